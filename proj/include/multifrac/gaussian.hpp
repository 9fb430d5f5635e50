#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "multifrac/distribution.hpp"
#include "multifrac/grid.hpp"
#include "multifrac/path.hpp"

namespace multifrac {

/// Normalization constant A(H) = Gamma(H+1/2)^2 / (2 H sin(pi H) Gamma(2H)).
/// A(1/2) = 1; evaluated through log-gamma so the endpoints of (0,1) stay finite.
double norm_const_A(double h);

/// Fractional Brownian motion covariance A(H)/2 (|t|^2H + |s|^2H - |t-s|^2H).
double fbm_cov(double t, double s, double h);

/// Behaviour of mbm_cov at the removable singularity H_mean = 1/2.
enum class MbmSingularity {
    forbid,  // throw within 1e-6 of the singular mean
    limit,   // evaluate by averaging symmetric offsets +-1e-4 in both exponents
};

/// Intermediate quantities of the two-exponent covariance.
struct MbmCovarianceTerms {
    double h_mean = 0.0;       // (H_s + H_t)/2
    double h_half_diff = 0.0;  // (H_s - H_t)/2
    double d_factor = 0.0;
};

MbmCovarianceTerms mbm_cov_terms(double h_t, double h_s);

/// Covariance of the moving-average field B(t,H_t), B(s,H_s); reduces to
/// fbm_cov when the exponents coincide.
double mbm_cov(double t, double s, double h_t, double h_s,
               MbmSingularity policy = MbmSingularity::forbid);

/// E[ sigma^2 A(H)/2 (|t|^2H + |s|^2H - |t-s|^2H) ] for independent H and sigma.
double stationary_cov(double t, double s, const FiniteDistribution& h_dist,
                      const FiniteDistribution& sigma_dist);

/// Autocovariance of the unit-lag increment process at integer lag delta.
double increment_autocov(std::uint64_t delta, const FiniteDistribution& h_dist,
                         const FiniteDistribution& sigma_dist);

/// Limit covariance of locally rescaled increments at offsets (r, v).
double local_cov_limit(double r, double v, const FiniteDistribution& h_dist,
                       const FiniteDistribution& sigma_dist);

struct CovarianceTable {
    std::vector<std::pair<double, double>> queries;
    std::vector<double> values;
    std::string model;
};

enum class FbmNormalization {
    standard,  // Var X_1 = 1
    paper,     // Var X_1 = A(H)
};

/// Exact fBm on a grid starting at 0, by circulant embedding of the increment
/// autocovariance (O(n log n)); falls back to dense Cholesky if the embedding
/// has a significantly negative eigenvalue (not expected for fGn).
SampledPath exact_fbm(double h, const UniformGrid& grid, std::uint64_t seed,
                      std::uint64_t stream_id,
                      FbmNormalization normalization = FbmNormalization::standard);

/// Same driver draws as exact_fbm, but with values re-anchored so the path is
/// zero at the node closest to time 0 (for grids extending to negative times,
/// e.g. Hurst drivers over an extended window). Grid need not start at 0.
SampledPath exact_fbm_two_sided(double h, const UniformGrid& grid, std::uint64_t seed,
                                std::uint64_t stream_id,
                                FbmNormalization normalization = FbmNormalization::standard);

namespace detail {
/// Circulant-embedding synthesis from explicit standard-normal draws; one
/// sample of length n consumes next_pow2(2n) normals. Deterministic, which
/// makes the induced linear map directly checkable against the target
/// covariance.
std::vector<double> fgn_from_normals(double h, std::size_t n, double dt, double scale,
                                     const std::vector<double>& normals);
}  // namespace detail

}  // namespace multifrac
