#include "multifrac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multifrac/gaussian.hpp"
#include "multifrac/parallel.hpp"

namespace multifrac {

namespace {

struct LineFit {
    double slope = 0.0;
    double slope_se = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxy / sxx;
    if (n > 2) {
        const double b = my - f.slope * mx;
        double rss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = y[i] - (b + f.slope * x[i]);
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / (static_cast<double>(n - 2) * sxx));
    }
    return f;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

}  // namespace

HolderEstimate estimate_holder(const SampledPath& path, double t, std::size_t n_scales,
                               double window) {
    path.validate();
    if (n_scales < 3) throw std::invalid_argument("estimate_holder: need >= 3 scales");
    const double dt = path.grid.step();
    if (window * std::pow(2.0, -static_cast<double>(n_scales)) < dt)
        throw std::invalid_argument("estimate_holder: grid too coarse for the "
                                    "requested scales");
    if (t - window < path.grid.t_min - 1e-12 || t + window > path.grid.t_max + 1e-12)
        throw std::invalid_argument("estimate_holder: window leaves the grid");

    HolderEstimate est;
    est.t = t;
    est.window = window;
    std::vector<double> log_h, log_m;
    for (std::size_t j = 1; j <= n_scales; ++j) {
        const double h = window * std::pow(2.0, -static_cast<double>(j));
        const std::size_t kh =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::round(h / dt)));
        const std::size_t lo =
            static_cast<std::size_t>(std::round((t - window - path.grid.t_min) / dt));
        const std::size_t hi_start =
            static_cast<std::size_t>(std::round((t + window - path.grid.t_min) / dt)) - kh;
        double acc = 0.0;
        std::size_t count = 0;
        for (std::size_t k = lo; k <= hi_start; ++k) {
            acc += std::abs(path.values[k + kh] - path.values[k]);
            ++count;
        }
        const double mean = acc / static_cast<double>(count);
        est.scales_used.push_back(static_cast<double>(kh) * dt);
        log_h.push_back(std::log(static_cast<double>(kh) * dt));
        log_m.push_back(std::log(std::max(mean, 1e-300)));
    }
    const LineFit f = fit_line(log_h, log_m);
    est.alpha_hat = std::clamp(f.slope, 0.0, 1.5);
    est.std_error = f.slope_se;
    return est;
}

KcCheckReport kc_moment_check(const std::vector<SampledPath>& paths,
                              const HurstPath& exponent_field, double p,
                              const std::vector<double>& t_grid,
                              const std::vector<double>& h_grid) {
    if (paths.size() < 1000)
        throw std::invalid_argument("kc_moment_check: need at least 1000 paths");
    if (!(p > 0.0)) throw std::invalid_argument("kc_moment_check: p must be > 0");
    const UniformGrid& g = paths.front().grid;

    KcCheckReport rep;
    rep.p = p;
    rep.exponent_field = exponent_field;
    rep.t_grid = t_grid;
    rep.h_grid = h_grid;
    rep.ratios.assign(t_grid.size(), std::vector<double>(h_grid.size(), 0.0));

    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        const std::size_t kt = g.node_index(t_grid[ti]);
        const double a = exponent_field.path.at_time(t_grid[ti]);
        for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
            const double h = h_grid[hi];
            const std::size_t kh = g.node_index(g.t_min + h);
            if (kt + kh > g.n_cells)
                throw std::invalid_argument("kc_moment_check: t + h leaves the grid");
            double acc = 0.0;
            for (const SampledPath& path : paths)
                acc += std::pow(std::abs(path.values[kt + kh] - path.values[kt]), p);
            acc /= static_cast<double>(paths.size());
            rep.ratios[ti][hi] = acc / std::pow(h, p * a);
        }
    }

    std::vector<double> log_h, log_max;
    double grand = 0.0;
    for (std::size_t hi = 0; hi < h_grid.size(); ++hi) {
        double mx = 0.0;
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
            mx = std::max(mx, rep.ratios[ti][hi]);
            grand += rep.ratios[ti][hi];
        }
        log_h.push_back(std::log(h_grid[hi]));
        log_max.push_back(std::log(mx));
    }
    rep.grand_mean = grand / static_cast<double>(t_grid.size() * h_grid.size());
    rep.slope = fit_line(log_h, log_max).slope;
    rep.verdict = rep.slope > -0.1 ? KcVerdict::bounded : KcVerdict::unbounded_trend;
    return rep;
}

double ks_distance_gaussian_mixture(std::vector<double> sample,
                                    const std::vector<double>& sds,
                                    const std::vector<double>& weights) {
    if (sample.empty() || sds.empty() || sds.size() != weights.size())
        throw std::invalid_argument("ks_distance: bad inputs");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double cdf = 0.0;
        for (std::size_t k = 0; k < sds.size(); ++k)
            cdf += weights[k] * normal_cdf(sample[i] / sds[k]);
        d = std::max(d, std::abs(cdf - static_cast<double>(i + 1) / n));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    return d;
}

RescalingReport rescaling_test(const KernelSpec& kernel, const HurstSpec& hurst_spec,
                               const SimConfig& cfg, double t,
                               const std::vector<double>& h_values,
                               const std::vector<std::pair<double, double>>& rv_pairs,
                               std::size_t n_paths) {
    if (n_paths < 1000) throw std::invalid_argument("rescaling_test: need >= 1000 paths");
    for (std::size_t i = 1; i < h_values.size(); ++i)
        if (!(h_values[i] < h_values[i - 1]))
            throw std::invalid_argument("rescaling_test: h_values must decrease");

    // r grid: sorted union of {0} and all pair coordinates; must come out uniform
    std::vector<double> r_grid{0.0};
    for (const auto& [r, v] : rv_pairs) {
        r_grid.push_back(r);
        r_grid.push_back(v);
    }
    std::sort(r_grid.begin(), r_grid.end());
    r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
    double step = r_grid.size() > 1 ? r_grid[1] - r_grid[0] : 1.0;
    for (std::size_t i = 1; i < r_grid.size(); ++i)
        step = std::min(step, r_grid[i] - r_grid[i - 1]);
    const std::size_t n_fill =
        static_cast<std::size_t>(std::round((r_grid.back() - r_grid.front()) / step));
    std::vector<double> filled(n_fill + 1);
    for (std::size_t i = 0; i <= n_fill; ++i)
        filled[i] = r_grid.front() + static_cast<double>(i) * step;
    r_grid = std::move(filled);

    RescalingReport rep;
    rep.t = t;
    rep.h_values = h_values;
    rep.rv_pairs = rv_pairs;

    // limit table from the exponent marginal at t and the scale at t
    const FiniteDistribution h_marg = hurst_marginal_at(hurst_spec, t);
    const FiniteDistribution sig_marg = FiniteDistribution::point(kernel.sigma_at(t));
    for (const auto& [r, v] : rv_pairs)
        rep.limit.push_back(local_cov_limit(r, v, h_marg, sig_marg));

    const UniformGrid rg(r_grid.front(), r_grid.back(), r_grid.size() - 1);
    const auto sweep = mc_rescaled_sweep(kernel, hurst_spec, cfg, t, h_values, r_grid, n_paths);
    for (std::size_t hi = 0; hi < h_values.size(); ++hi) {
        std::vector<double> emp(rv_pairs.size(), 0.0), se(rv_pairs.size(), 0.0);
        for (std::size_t q = 0; q < rv_pairs.size(); ++q) {
            const std::size_t ir = rg.node_index(rv_pairs[q].first);
            const std::size_t iv = rg.node_index(rv_pairs[q].second);
            double mean = 0.0, m2 = 0.0;
            for (std::size_t pi = 0; pi < n_paths; ++pi) {
                const double prod = sweep[pi][hi][ir] * sweep[pi][hi][iv];
                mean += prod;
                m2 += prod * prod;
            }
            const double n = static_cast<double>(n_paths);
            mean /= n;
            const double var = std::max(0.0, m2 / n - mean * mean);
            emp[q] = mean;
            se[q] = std::sqrt(var / n);
        }
        double mx = 0.0;
        for (std::size_t q = 0; q < rv_pairs.size(); ++q)
            mx = std::max(mx, std::abs(emp[q] - rep.limit[q]));
        rep.max_abs_err.push_back(mx);

        // marginal at r = 1 against the limit Gaussian mixture
        double ks = std::nan("");
        if (std::abs(rg.t_min) <= 1.0 && rg.t_max >= 1.0) {
            const std::size_t i1 = rg.node_index(1.0);
            std::vector<double> sample(n_paths);
            for (std::size_t pi = 0; pi < n_paths; ++pi) sample[pi] = sweep[pi][hi][i1];
            std::vector<double> sds(h_marg.atoms.size());
            const double sig = kernel.sigma_at(t);
            for (std::size_t k = 0; k < sds.size(); ++k)
                sds[k] = std::abs(sig) * std::sqrt(norm_const_A(h_marg.atoms[k]));
            ks = ks_distance_gaussian_mixture(std::move(sample), sds, h_marg.weights);
        }
        rep.ks_distance.push_back(ks);
        rep.empirical.push_back(std::move(emp));
        rep.std_error.push_back(std::move(se));
    }
    return rep;
}

Fig2Report fig2_contrast(const Fig2Config& cfg) {
    Fig2Report rep;
    rep.config = cfg;

    SimConfig sim;
    sim.grid = UniformGrid(0.0, 1.0, cfg.grid_cells);
    sim.substeps = cfg.substeps;
    sim.tol_truncation = cfg.tol_truncation;
    sim.seed = cfg.noise_seed;

    KernelSpec kernel;
    kernel.family = ItoMbmFamily{};
    kernel.sigma = 1.0;
    kernel.bounds = default_bounds(kernel, cfg.control_h > cfg.center + cfg.amplitude
                                               ? cfg.control_h
                                               : cfg.center + cfg.amplitude);

    // both processes are only needed on short windows around the estimation
    // points, which is what makes fine grids affordable
    const double dt = sim.grid.step();
    struct Window {
        std::size_t first = 0;   // position within the evaluation list
        std::size_t k0 = 0;      // first output node
        std::size_t count = 0;
        double t = 0.0;
    };
    std::vector<Window> wins;
    std::vector<std::size_t> out_nodes;
    for (double t : cfg.points) {
        const double lo = t - cfg.window, hi = t + cfg.window;
        if (lo < 0.0 || hi > 1.0)
            throw std::invalid_argument("fig2_contrast: window leaves the unit interval");
        const std::size_t k0 =
            static_cast<std::size_t>(std::max(0.0, std::floor(lo / dt) - 1.0));
        const std::size_t k1 = std::min(sim.grid.n_cells,
                                        static_cast<std::size_t>(std::ceil(hi / dt)) + 1);
        Window w;
        w.first = out_nodes.size();
        w.k0 = k0;
        w.count = k1 - k0 + 1;
        w.t = t;
        wins.push_back(w);
        for (std::size_t k = k0; k <= k1; ++k) out_nodes.push_back(k);
    }

    auto run_set = [&](const HurstSpec& hs, std::size_t n_pairs, std::uint64_t stream0,
                       std::vector<double>& alpha_field, std::vector<double>& alpha_ito) {
        SimConfig local = sim;
        local.stream_id = stream0;
        const auto vals = mc_coupled_at(kernel, hs, local, out_nodes, n_pairs);
        const std::size_t np = wins.size();
        alpha_field.assign(n_pairs * np, 0.0);
        alpha_ito.assign(n_pairs * np, 0.0);
        parallel_for(n_pairs, [&](std::size_t pi) {
            for (std::size_t q = 0; q < np; ++q) {
                const Window& w = wins[q];
                const UniformGrid wg(sim.grid.node(w.k0), sim.grid.node(w.k0 + w.count - 1),
                                     w.count - 1);
                const std::vector<double> fv(vals[pi].field.begin() + w.first,
                                             vals[pi].field.begin() + w.first + w.count);
                const std::vector<double> av(vals[pi].adapted.begin() + w.first,
                                             vals[pi].adapted.begin() + w.first + w.count);
                alpha_field[pi * np + q] =
                    estimate_holder(SampledPath(wg, fv), w.t, cfg.n_scales, cfg.window)
                        .alpha_hat;
                alpha_ito[pi * np + q] =
                    estimate_holder(SampledPath(wg, av), w.t, cfg.n_scales, cfg.window)
                        .alpha_hat;
            }
        });
    };

    HurstSpec hs;
    hs.variant = TanhFbmHurst{cfg.center, cfg.amplitude, cfg.driver_hurst, cfg.hurst_seed};
    run_set(hs, cfg.n_pairs, 0, rep.alpha_field, rep.alpha_ito);
    rep.median_field = median(rep.alpha_field);
    rep.median_ito = median(rep.alpha_ito);

    // constant-H control: both processes coincide in law
    HurstSpec control;
    control.variant = ConstantHurst{cfg.control_h};
    std::vector<double> cf, ci;
    run_set(control, cfg.n_control_pairs, 1000000, cf, ci);
    rep.control_median_field = median(cf);
    rep.control_median_ito = median(ci);
    return rep;
}

}  // namespace multifrac
