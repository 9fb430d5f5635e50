#include <doctest.h>

#include <cmath>
#include <vector>

#include "multifrac/gaussian.hpp"
#include "multifrac/parallel.hpp"

using namespace multifrac;

// Values frozen from a high-precision external evaluation of the closed forms
// (40-digit gamma/quadrature arithmetic).
namespace {
constexpr double kA025 = 2.3962804694711844149;
constexpr double kA03 = 1.8750709111678687222;
constexpr double kA04 = 1.2891951930286515271;
constexpr double kA06 = 0.86371661196717745073;
constexpr double kA07 = 0.83889297187184362784;
constexpr double kA075 = 0.87401918476403993682;
constexpr double kA09 = 1.519574536208870557;

struct MeanVar {
    double mean = 0.0, se = 0.0;
};

MeanVar sample_mean(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs) v += (x - m) * (x - m);
    v /= static_cast<double>(xs.size() - 1);
    return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

bool chol_psd(std::vector<double> a, std::size_t n, double shift) {
    for (std::size_t i = 0; i < n; ++i) a[i * n + i] += shift;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (s <= 0.0) return false;
                a[i * n + i] = std::sqrt(s);
            } else {
                a[i * n + j] = s / a[j * n + j];
            }
        }
    }
    return true;
}

}  // namespace

TEST_CASE("normalization constant") {
    CHECK(norm_const_A(0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(norm_const_A(0.25) == doctest::Approx(kA025).epsilon(1e-12));
    CHECK(norm_const_A(0.75) == doctest::Approx(kA075).epsilon(1e-12));
    CHECK(norm_const_A(0.75) == doctest::Approx(0.874).epsilon(2e-3));
    CHECK(norm_const_A(0.25) > 0.0);
    CHECK(norm_const_A(0.7) == doctest::Approx(kA07).epsilon(1e-12));
    CHECK_THROWS_AS(norm_const_A(0.0), std::invalid_argument);
    CHECK_THROWS_AS(norm_const_A(1.0), std::invalid_argument);
}

TEST_CASE("reduction identity D(h,h) cos(pi h) = A(h)/2") {
    for (double h : {0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9}) {
        const MbmCovarianceTerms c = mbm_cov_terms(h, h);
        CHECK(std::abs(c.d_factor * std::cos(M_PI * h) - 0.5 * norm_const_A(h)) < 1e-10);
    }
}

TEST_CASE("fbm covariance closed form") {
    CHECK(fbm_cov(1, 1, 0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(fbm_cov(1, 2, 0.5) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(fbm_cov(1, -1, 0.5)) < 1e-13);
    CHECK(fbm_cov(1, 1, 0.75) == doctest::Approx(kA075).epsilon(1e-12));
    CHECK(fbm_cov(2, 1, 0.3) == doctest::Approx(fbm_cov(1, 2, 0.3)).epsilon(1e-13));
}

TEST_CASE("fbm covariance is positive semidefinite on random grids") {
    std::uint64_t state = 99;
    auto next_u = [&] {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    for (double h : {0.2, 0.5, 0.8}) {
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t n = 4 + static_cast<std::size_t>(next_u() * 12);
            std::vector<double> ts(n);
            for (double& t : ts) t = -2.0 + 4.0 * next_u();
            std::vector<double> gram(n * n);
            double scale = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    gram[i * n + j] = fbm_cov(ts[i], ts[j], h);
                    scale = std::max(scale, std::abs(gram[i * n + j]));
                }
            CHECK(chol_psd(gram, n, 1e-8 * scale));
        }
    }
}

TEST_CASE("mbm covariance against the quadrature oracle") {
    // asymmetric queries pin the sign convention of the half-difference term
    CHECK(mbm_cov(1, 2, 0.3, 0.4) == doctest::Approx(1.3214129038684).epsilon(1e-9));
    CHECK(mbm_cov(2, 1, 0.3, 0.4) == doctest::Approx(1.1442534458949).epsilon(1e-9));
    CHECK(mbm_cov(1, 2, 0.55, 0.8) == doctest::Approx(1.1489963099297).epsilon(1e-9));
    CHECK(mbm_cov(0.5, 1.5, 0.2, 0.45) == doctest::Approx(0.93944831056293).epsilon(1e-9));
    CHECK(mbm_cov(1, 3, 0.6, 0.9) == doctest::Approx(1.6260828513403).epsilon(1e-9));
    CHECK(mbm_cov(3, 1, 0.6, 0.9) == doctest::Approx(1.0684891128638).epsilon(1e-9));
}

TEST_CASE("mbm covariance reduces to fbm when the exponents agree") {
    CHECK(mbm_cov(1, 2, 0.3, 0.3) == doctest::Approx(fbm_cov(1, 2, 0.3)).epsilon(1e-10));
    CHECK(mbm_cov(1, 2, 0.3, 0.3) == doctest::Approx(1.42103802171944281).epsilon(1e-12));
    CHECK(mbm_cov(0.7, 0.2, 0.8, 0.8) ==
          doctest::Approx(fbm_cov(0.7, 0.2, 0.8)).epsilon(1e-10));
}

TEST_CASE("mbm covariance at the removable singularity") {
    CHECK_THROWS_AS(mbm_cov(1, 1, 0.5, 0.5), std::domain_error);
    CHECK_THROWS_AS(mbm_cov(1, 1, 0.4, 0.6), std::domain_error);
    CHECK(mbm_cov(1, 1, 0.5, 0.5, MbmSingularity::limit) ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(mbm_cov(1, 1, 0.4, 0.6, MbmSingularity::limit) ==
          doctest::Approx(0.96688279904640254).epsilon(5e-7));
    CHECK(mbm_cov(1, 2, 0.45, 0.55, MbmSingularity::limit) ==
          doctest::Approx(1.061076486810722).epsilon(5e-7));
}

TEST_CASE("stationary covariance for finite mixtures") {
    const auto one = FiniteDistribution::point(1.0);
    CHECK(stationary_cov(1, 2, FiniteDistribution::point(0.5), one) ==
          doctest::Approx(1.0).epsilon(1e-13));
    const FiniteDistribution mix({0.4, 0.6}, {0.5, 0.5});
    CHECK(stationary_cov(1, 1, mix, one) ==
          doctest::Approx(1.07645590249791449).epsilon(1e-12));
    CHECK(stationary_cov(1, 1, FiniteDistribution::point(0.7),
                         FiniteDistribution::point(2.0)) ==
          doctest::Approx(4.0 * kA07).epsilon(1e-12));
}

TEST_CASE("increment autocovariance") {
    const auto one = FiniteDistribution::point(1.0);
    const auto h05 = FiniteDistribution::point(0.5);
    CHECK(std::abs(increment_autocov(1, h05, one)) < 1e-13);
    CHECK(increment_autocov(0, h05, one) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(increment_autocov(1, FiniteDistribution::point(0.7), one) ==
          doctest::Approx(0.268032940804837108).epsilon(1e-12));

    // polarization against stationary_cov
    const FiniteDistribution mix({0.35, 0.65}, {0.25, 0.75});
    const FiniteDistribution sig({0.5, 2.0}, {0.5, 0.5});
    const double t = 2.0;
    for (std::uint64_t delta : {0u, 1u, 2u, 3u}) {
        const double d = static_cast<double>(delta);
        const double pol = stationary_cov(t + 1, t + d + 1, mix, sig) -
                           stationary_cov(t + 1, t + d, mix, sig) -
                           stationary_cov(t, t + d + 1, mix, sig) +
                           stationary_cov(t, t + d, mix, sig);
        CHECK(increment_autocov(delta, mix, sig) == doctest::Approx(pol).epsilon(1e-12));
    }
}

TEST_CASE("local covariance limit") {
    const auto one = FiniteDistribution::point(1.0);
    CHECK(local_cov_limit(1, 1, FiniteDistribution::point(0.5), one) ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(local_cov_limit(1, -1, FiniteDistribution::point(0.5), one)) < 1e-13);
    CHECK(local_cov_limit(1, 1, FiniteDistribution::point(0.75), one) ==
          doctest::Approx(kA075).epsilon(1e-12));
    // vanishes when either offset is 0, symmetric in (r, v)
    const FiniteDistribution mix({0.3, 0.8}, {0.4, 0.6});
    CHECK(std::abs(local_cov_limit(0.0, 1.4, mix, one)) < 1e-13);
    CHECK(local_cov_limit(1.4, -0.7, mix, one) ==
          doctest::Approx(local_cov_limit(-0.7, 1.4, mix, one)).epsilon(1e-13));
}

TEST_CASE("circulant sampler: Brownian case degenerates to iid increments") {
    const std::size_t n = 1 << 20;
    const UniformGrid g(0.0, 1.0, n);
    const SampledPath p = exact_fbm(0.5, g, 21, 0, FbmNormalization::standard);
    std::vector<double> inc(n);
    for (std::size_t i = 0; i < n; ++i) inc[i] = p.values[i + 1] - p.values[i];
    double mean = 0.0;
    for (double x : inc) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0, lag1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        var += (inc[i] - mean) * (inc[i] - mean);
        if (i + 1 < n) lag1 += (inc[i] - mean) * (inc[i + 1] - mean);
    }
    lag1 /= var;
    CHECK(std::abs(lag1) < 4e-3);
    CHECK(var / static_cast<double>(n) * n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("exact_fbm normalizations") {
    const UniformGrid g(0.0, 1.0, 16);
    const std::size_t n_paths = 20000;

    SUBCASE("paper normalization: Var X_1 = A(0.7)") {
        std::vector<double> x1(n_paths);
        parallel_for(n_paths, [&](std::size_t i) {
            x1[i] = exact_fbm(0.7, g, 33, i, FbmNormalization::paper).values.back();
        });
        std::vector<double> sq(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) sq[i] = x1[i] * x1[i];
        const MeanVar mv = sample_mean(sq);
        CHECK(std::abs(mv.mean - kA07) < 3.0 * mv.se);
    }
    SUBCASE("standard normalization: Var X_1 = 1 for H=0.3") {
        std::vector<double> sq(n_paths);
        parallel_for(n_paths, [&](std::size_t i) {
            const double v = exact_fbm(0.3, g, 34, i, FbmNormalization::standard).values.back();
            sq[i] = v * v;
        });
        const MeanVar mv = sample_mean(sq);
        CHECK(std::abs(mv.mean - 1.0) < 3.0 * mv.se);
    }
}

TEST_CASE("exact_fbm empirical covariance matches fbm_cov on an 8-point grid") {
    const std::size_t n = 8, n_paths = 10000;
    const UniformGrid g(0.0, 1.0, n);
    std::vector<std::vector<double>> paths(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        paths[i] = exact_fbm(0.7, g, 55, i, FbmNormalization::paper).values;
    });
    for (std::size_t a = 1; a <= n; ++a) {
        for (std::size_t b = a; b <= n; ++b) {
            std::vector<double> prod(n_paths);
            for (std::size_t i = 0; i < n_paths; ++i) prod[i] = paths[i][a] * paths[i][b];
            const MeanVar mv = sample_mean(prod);
            const double target = fbm_cov(g.node(a), g.node(b), 0.7);
            CHECK(std::abs(mv.mean - target) < 3.0 * mv.se);
        }
    }
}

TEST_CASE("exact_fbm determinism and preconditions") {
    const UniformGrid g(0.0, 1.0, 64);
    const SampledPath a = exact_fbm(0.6, g, 1, 2);
    const SampledPath b = exact_fbm(0.6, g, 1, 2);
    CHECK(a.values == b.values);
    CHECK(a.values != exact_fbm(0.6, g, 1, 3).values);
    CHECK_THROWS_AS(exact_fbm(0.6, UniformGrid(-1.0, 1.0, 8), 1, 2), std::invalid_argument);
}

TEST_CASE("two-sided sampler anchors at time zero") {
    const UniformGrid g(-2.0, 1.0, 96);
    const SampledPath p = exact_fbm_two_sided(0.2, g, 9, 4);
    CHECK(p.values[g.node_index(0.0)] == 0.0);
    // marginal variance at t: |t|^{2H}
    const std::size_t n_paths = 20000;
    std::vector<double> sq(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const SampledPath q = exact_fbm_two_sided(0.2, g, 10, i);
        const double v = q.values[g.node_index(-1.0)];
        sq[i] = v * v;
    });
    const MeanVar mv = sample_mean(sq);
    CHECK(std::abs(mv.mean - 1.0) < 3.0 * mv.se);
}
