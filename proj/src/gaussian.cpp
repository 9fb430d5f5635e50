#include "multifrac/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "multifrac/fft.hpp"
#include "multifrac/rng.hpp"

namespace multifrac {

namespace {

void check_h(double h) {
    if (!(h > 0.0 && h < 1.0))
        throw std::invalid_argument("Hurst exponent must be in (0,1)");
}

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double pow_abs(double x, double e) { return x == 0.0 ? 0.0 : std::pow(std::abs(x), e); }

}  // namespace

double norm_const_A(double h) {
    check_h(h);
    const double log_num = 2.0 * std::lgamma(h + 0.5);
    const double log_den = std::lgamma(2.0 * h);
    return std::exp(log_num - log_den) / (2.0 * h * std::sin(M_PI * h));
}

double fbm_cov(double t, double s, double h) {
    check_h(h);
    return 0.5 * norm_const_A(h) *
           (pow_abs(t, 2.0 * h) + pow_abs(s, 2.0 * h) - pow_abs(t - s, 2.0 * h));
}

MbmCovarianceTerms mbm_cov_terms(double h_t, double h_s) {
    check_h(h_t);
    check_h(h_s);
    MbmCovarianceTerms out;
    out.h_mean = 0.5 * (h_s + h_t);
    out.h_half_diff = 0.5 * (h_s - h_t);
    const double one_minus = 1.0 - 2.0 * out.h_mean;
    const double log_mag = std::lgamma(h_t + 0.5) + std::lgamma(h_s + 0.5) +
                           std::lgamma(2.0 - 2.0 * out.h_mean) -
                           std::log(2.0 * M_PI * out.h_mean * std::abs(one_minus));
    out.d_factor = std::copysign(std::exp(log_mag), one_minus);
    return out;
}

namespace {

double mbm_cov_direct(double t, double s, double h_t, double h_s) {
    const MbmCovarianceTerms c = mbm_cov_terms(h_t, h_s);
    const double two_hm = 2.0 * c.h_mean;
    const double ht_ = c.h_half_diff;
    const double hm = c.h_mean;
    const double val =
        pow_abs(t, two_hm) * std::cos(M_PI * (ht_ - sgn(t) * hm)) +
        pow_abs(s, two_hm) * std::cos(M_PI * (ht_ + sgn(s) * hm)) -
        pow_abs(t - s, two_hm) * std::cos(M_PI * (ht_ - sgn(t - s) * hm));
    return c.d_factor * val;
}

}  // namespace

double mbm_cov(double t, double s, double h_t, double h_s, MbmSingularity policy) {
    check_h(h_t);
    check_h(h_s);
    const double h_mean = 0.5 * (h_s + h_t);
    if (std::abs(h_mean - 0.5) < 1e-6) {
        if (policy == MbmSingularity::forbid)
            throw std::domain_error(
                "mbm_cov: removable singularity at mean exponent 1/2; "
                "request the limit evaluation");
        const double off = 1e-4;
        const double up = mbm_cov_direct(t, s, h_t + off, h_s + off);
        const double dn = mbm_cov_direct(t, s, h_t - off, h_s - off);
        return 0.5 * (up + dn);
    }
    return mbm_cov_direct(t, s, h_t, h_s);
}

namespace {

void check_dists(const FiniteDistribution& h_dist, const FiniteDistribution& sigma_dist) {
    for (double h : h_dist.atoms) check_h(h);
    for (double s : sigma_dist.atoms)
        if (!(s > 0.0)) throw std::invalid_argument("sigma atoms must be positive");
}

}  // namespace

double stationary_cov(double t, double s, const FiniteDistribution& h_dist,
                      const FiniteDistribution& sigma_dist) {
    check_dists(h_dist, sigma_dist);
    const double sigma_sq = sigma_dist.expect([](double x) { return x * x; });
    return sigma_sq * h_dist.expect([&](double h) {
        return 0.5 * norm_const_A(h) *
               (pow_abs(t, 2 * h) + pow_abs(s, 2 * h) - pow_abs(t - s, 2 * h));
    });
}

double increment_autocov(std::uint64_t delta, const FiniteDistribution& h_dist,
                         const FiniteDistribution& sigma_dist) {
    check_dists(h_dist, sigma_dist);
    const double d = static_cast<double>(delta);
    const double sigma_sq = sigma_dist.expect([](double x) { return x * x; });
    return sigma_sq * h_dist.expect([&](double h) {
        return 0.5 * norm_const_A(h) *
               (pow_abs(d + 1.0, 2 * h) - 2.0 * pow_abs(d, 2 * h) + pow_abs(d - 1.0, 2 * h));
    });
}

double local_cov_limit(double r, double v, const FiniteDistribution& h_dist,
                       const FiniteDistribution& sigma_dist) {
    return stationary_cov(r, v, h_dist, sigma_dist);
}

// ---------------------------------------------------------------------------
// Exact fBm sampling
// ---------------------------------------------------------------------------

namespace {

// Autocovariance of fractional Gaussian noise at integer lag, step dt.
double fgn_autocov(std::uint64_t lag, double h, double dt, double scale) {
    const double k = static_cast<double>(lag);
    return 0.5 * scale * std::pow(dt, 2.0 * h) *
           (std::pow(k + 1.0, 2 * h) - 2.0 * std::pow(k, 2 * h) + pow_abs(k - 1.0, 2 * h));
}

// Dense Cholesky sampler on the fGn covariance; last resort only.
std::vector<double> fgn_cholesky(double h, std::size_t n, double dt, double scale,
                                 const NormalStream& rng) {
    if (n > 4096)
        throw std::runtime_error("exact_fbm: circulant embedding failed and the grid "
                                 "is too large for the Cholesky fallback");
    std::vector<double> l(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = fgn_autocov(i - j, h, dt, scale);
            for (std::size_t k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
            if (i == j) {
                if (sum <= 0.0) throw std::runtime_error("exact_fbm: covariance not PD");
                l[i * n + i] = std::sqrt(sum);
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    std::vector<double> z(n);
    rng.fill_normals(0, z.data(), n);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += l[i * n + j] * z[j];
        out[i] = acc;
    }
    return out;
}

// Circulant eigenvalues of the embedded fGn covariance; empty when the
// embedding is not nonnegative. Cached: Monte Carlo sweeps reuse one grid
// many times and the eigenvalue FFT is half the cost of a sample.
std::vector<double> embedding_eigenvalues(double h, std::size_t n, double dt, double scale) {
    struct Key {
        double h, dt, scale;
        std::size_t n;
        bool operator==(const Key&) const = default;
    };
    static std::mutex cache_mutex;
    static std::vector<std::pair<Key, std::vector<double>>> cache;
    const Key key{h, dt, scale, n};
    {
        std::lock_guard<std::mutex> lock(cache_mutex);
        for (const auto& [k, v] : cache)
            if (k == key) return v;
    }

    const std::size_t m = next_pow2(2 * n);
    std::vector<std::complex<double>> buf(m);
    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t lag = std::min(j, m - j);
        buf[j] = fgn_autocov(lag, h, dt, scale);
    }
    fft_pow2(buf);
    std::vector<double> lambda(m);
    double lam_max = 0.0, lam_min = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        lambda[j] = buf[j].real();
        lam_max = std::max(lam_max, lambda[j]);
        lam_min = std::min(lam_min, lambda[j]);
    }
    if (lam_min < -1e-9 * lam_max) return {};
    for (double& l : lambda) l = std::max(l, 0.0);

    std::lock_guard<std::mutex> lock(cache_mutex);
    if (cache.size() >= 16) cache.erase(cache.begin());
    cache.emplace_back(key, lambda);
    return lambda;
}

std::vector<double> synthesize_fgn(const std::vector<double>& lambda, std::size_t n,
                                   const std::vector<double>& z) {
    const std::size_t m = lambda.size();
    std::vector<std::complex<double>> buf(m);
    buf[0] = std::sqrt(lambda[0]) * z[0];
    buf[m / 2] = std::sqrt(lambda[m / 2]) * z[1];
    std::size_t idx = 2;
    for (std::size_t j = 1; j < m / 2; ++j) {
        const double a = z[idx];
        const double b = z[idx + 1];
        idx += 2;
        const double w = std::sqrt(0.5 * lambda[j]);
        buf[j] = std::complex<double>(w * a, w * b);
        buf[m - j] = std::complex<double>(w * a, -w * b);
    }
    fft_pow2(buf);
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = buf[k].real() * norm;
    return out;
}

// Davies-Harte: embeds the fGn covariance in a circulant of power-of-two size
// and synthesizes one sample with m Gaussian draws and one FFT.
std::vector<double> fgn_sample(double h, std::size_t n, double dt, double scale,
                               const NormalStream& rng) {
    const std::vector<double> lambda = embedding_eigenvalues(h, n, dt, scale);
    if (lambda.empty()) return fgn_cholesky(h, n, dt, scale, rng);
    std::vector<double> z(lambda.size());
    rng.fill_normals(0, z.data(), z.size());
    return synthesize_fgn(lambda, n, z);
}

SampledPath fbm_from_fgn(double h, const UniformGrid& grid, std::uint64_t seed,
                         std::uint64_t stream_id, FbmNormalization normalization,
                         std::size_t anchor_node) {
    check_h(h);
    grid.validate();
    const double scale = normalization == FbmNormalization::paper ? norm_const_A(h) : 1.0;
    const NormalStream rng(seed, RngDomain::fbm_oracle, stream_id);
    const std::vector<double> fgn = fgn_sample(h, grid.n_cells, grid.step(), scale, rng);
    SampledPath out;
    out.grid = grid;
    out.values.resize(grid.n_nodes());
    out.values[0] = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < fgn.size(); ++k) {
        acc += fgn[k];
        out.values[k + 1] = acc;
    }
    if (anchor_node > 0) {
        const double base = out.values[anchor_node];
        for (double& v : out.values) v -= base;
    }
    out.label = "fbm";
    return out;
}

}  // namespace

SampledPath exact_fbm(double h, const UniformGrid& grid, std::uint64_t seed,
                      std::uint64_t stream_id, FbmNormalization normalization) {
    if (std::abs(grid.t_min) > 1e-12 * std::max(1.0, std::abs(grid.t_max)))
        throw std::invalid_argument("exact_fbm: grid must start at 0");
    return fbm_from_fgn(h, grid, seed, stream_id, normalization, 0);
}

SampledPath exact_fbm_two_sided(double h, const UniformGrid& grid, std::uint64_t seed,
                                std::uint64_t stream_id, FbmNormalization normalization) {
    const std::size_t anchor = grid.t_min >= 0.0 ? 0 : grid.node_index(0.0);
    return fbm_from_fgn(h, grid, seed, stream_id, normalization, anchor);
}

namespace detail {

std::vector<double> fgn_from_normals(double h, std::size_t n, double dt, double scale,
                                     const std::vector<double>& normals) {
    const std::vector<double> lambda = embedding_eigenvalues(h, n, dt, scale);
    if (lambda.empty()) throw std::runtime_error("fgn_from_normals: embedding failed");
    if (normals.size() != lambda.size())
        throw std::invalid_argument("fgn_from_normals: need next_pow2(2n) draws");
    return synthesize_fgn(lambda, n, normals);
}

}  // namespace detail

}  // namespace multifrac
