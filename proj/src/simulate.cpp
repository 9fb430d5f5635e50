#include "multifrac/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "multifrac/parallel.hpp"

namespace multifrac {

namespace {

constexpr std::size_t kMaxDriverCells = 1u << 25;

struct Layout {
    UniformGrid grid;   // driver grid [-M, T]
    double delta = 0.0; // driver step
    std::size_t j0 = 0; // driver node index of time 0
};

Layout make_layout(const KernelSpec& kernel, const SimConfig& cfg) {
    cfg.validate();
    kernel.validate();
    const double out_step = cfg.grid.step();
    double m;
    if (const auto* mt = std::get_if<MaternFamily>(&kernel.family)) {
        // exponential tail: the generic power-law envelope grossly overshoots
        const double e_folds =
            std::log(std::max(kernel.bounds.l_bar / cfg.tol_truncation, 2.0)) / mt->lambda;
        m = std::min(truncation_horizon(kernel.bounds, out_step, cfg.tol_truncation),
                     std::max(1.0, e_folds + 1.0));
    } else {
        m = truncation_horizon(kernel.bounds, out_step, cfg.tol_truncation);
    }
    if (const auto* tr = std::get_if<TruncatedFamily>(&kernel.family))
        m = std::max(m, tr->cutoff);  // never cut into the kernel support
    const std::size_t m_cells = static_cast<std::size_t>(std::ceil(m / out_step - 1e-9));
    const std::size_t total_out = m_cells + cfg.grid.n_cells;
    if (total_out * cfg.substeps > kMaxDriverCells)
        throw std::invalid_argument("simulate: driver grid would exceed the cell limit; "
                                    "loosen tol_truncation or coarsen the grid");
    Layout lay;
    lay.grid = UniformGrid(-static_cast<double>(m_cells) * out_step, cfg.grid.t_max,
                           total_out * cfg.substeps);
    lay.delta = lay.grid.step();
    lay.j0 = m_cells * cfg.substeps;
    return lay;
}

// Path-independent per-distance data: log distances and the family factor.
struct Shared {
    Layout lay;
    const KernelSpec* kernel = nullptr;
    SimConfig cfg;
    bool offset = false;             // family carries the (-s)_+ anchor term
    bool log_base = false;           // log-modified base instead of plain power
    std::vector<double> logd;        // logd[d] = log(d * delta), d = 1..cells
    std::vector<double> fam;         // multiplicative factor per distance (may be empty)
    std::vector<double> logbase;     // log of (x log x)_+ per distance, NaN where zero
};

Shared make_shared_tables(const KernelSpec& kernel, const SimConfig& cfg) {
    Shared sh;
    sh.lay = make_layout(kernel, cfg);
    sh.kernel = &kernel;
    sh.cfg = cfg;
    sh.offset = kernel.has_offset_term();
    const std::size_t cells = sh.lay.grid.n_cells;
    sh.logd.resize(cells + 1);
    sh.logd[0] = 0.0;
    const double log_delta = std::log(sh.lay.delta);
    for (std::size_t d = 1; d <= cells; ++d)
        sh.logd[d] = std::log(static_cast<double>(d)) + log_delta;
    if (const auto* m = std::get_if<MaternFamily>(&kernel.family)) {
        sh.fam.resize(cells + 1);
        sh.fam[0] = 1.0;
        for (std::size_t d = 1; d <= cells; ++d)
            sh.fam[d] = std::exp(-m->lambda * static_cast<double>(d) * sh.lay.delta);
    } else if (const auto* t = std::get_if<TruncatedFamily>(&kernel.family)) {
        sh.fam.resize(cells + 1);
        sh.fam[0] = 1.0;
        for (std::size_t d = 1; d <= cells; ++d) {
            const double x = static_cast<double>(d) * sh.lay.delta;
            double phi = 1.0;
            if (x >= t->cutoff) {
                phi = 0.0;
            } else if (x > 0.5 * t->cutoff) {
                const double u = (x - 0.5 * t->cutoff) / (0.5 * t->cutoff);
                phi = 1.0 - u * u * (3.0 - 2.0 * u);
            }
            sh.fam[d] = phi;
        }
    }
    if (std::holds_alternative<LogModifiedFamily>(kernel.family)) {
        sh.log_base = true;
        sh.logbase.resize(cells + 1);
        sh.logbase[0] = std::nan("");
        for (std::size_t d = 1; d <= cells; ++d) {
            const double x = static_cast<double>(d) * sh.lay.delta;
            const double base = x * std::log(x);
            sh.logbase[d] = base > 0.0 ? std::log(base) : std::nan("");
        }
    }
    return sh;
}

inline double weight_main(const Shared& sh, std::size_t d, double a) {
    double w;
    if (sh.log_base) {
        const double lb = sh.logbase[d];
        w = std::isnan(lb) ? 0.0 : std::exp(a * lb);
    } else {
        w = std::exp(a * sh.logd[d]);
    }
    if (!sh.fam.empty()) w *= sh.fam[d];
    return w;
}

inline double weight_off(const Shared& sh, std::size_t d, double a) {
    if (sh.log_base) {
        const double lb = sh.logbase[d];
        return std::isnan(lb) ? 0.0 : std::exp(a * lb);
    }
    return std::exp(a * sh.logd[d]);
}

inline double singular_weight(const Shared& sh, double a) {
    if (sh.cfg.singular_cell == SingularCellMode::left_point) return weight_main(sh, 1, a);
    // exact leading-term cell variance: delta^(2H) / (2H), H = a + 1/2
    return std::exp(a * sh.logd[1]) / std::sqrt(2.0 * (a + 0.5));
}

// Dense per-exponent tables (shared across paths whenever the exponents are
// path-independent).
struct ExpTables {
    double a = 0.0;
    std::vector<double> main_w;  // [d]
    std::vector<double> off_w;   // [d], empty when the family has no offset term
    double sing_w = 0.0;
};

ExpTables build_exp_tables(const Shared& sh, double a) {
    const std::size_t cells = sh.lay.grid.n_cells;
    ExpTables t;
    t.a = a;
    t.main_w.resize(cells + 1);
    t.main_w[0] = 0.0;
    for (std::size_t d = 1; d <= cells; ++d) t.main_w[d] = weight_main(sh, d, a);
    if (sh.offset) {
        t.off_w.resize(sh.lay.j0 + 1);
        t.off_w[0] = 0.0;
        for (std::size_t d = 1; d <= sh.lay.j0; ++d) t.off_w[d] = weight_off(sh, d, a);
    }
    t.sing_w = singular_weight(sh, a);
    return t;
}

// Exponent/scale data of one path, mapped onto driver cells. Constant
// exponents go through eval_nodes_with_tables instead.
struct PathProfile {
    std::vector<double> u;      // sigma_j * dW_j
    const double* a = nullptr;  // per-cell exponent (null when leveled)
    std::vector<const ExpTables*> level_of_cell;
};

// Evaluates X at the given driver node indices.
std::vector<double> eval_nodes(const Shared& sh, const PathProfile& p,
                               const std::vector<std::size_t>& nodes) {
    const std::size_t j0 = sh.lay.j0;
    std::vector<double> out(nodes.size(), 0.0);

    // offset anchor: independent of the evaluation time
    double off_sum = 0.0;
    if (sh.offset) {
        if (!p.level_of_cell.empty()) {
            for (std::size_t j = 0; j < j0; ++j)
                off_sum += p.level_of_cell[j]->off_w[j0 - j] * p.u[j];
        } else {
            for (std::size_t j = 0; j < j0; ++j)
                off_sum += weight_off(sh, j0 - j, p.a[j]) * p.u[j];
        }
    }

    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const std::size_t i = nodes[q];
        double acc = 0.0;
        if (i >= 1) {
            const std::size_t last = i - 1;  // singular cell
            if (!p.level_of_cell.empty()) {
                for (std::size_t j = 0; j < last; ++j)
                    acc += p.level_of_cell[j]->main_w[i - j] * p.u[j];
                acc += p.level_of_cell[last]->sing_w * p.u[last];
            } else {
                for (std::size_t j = 0; j < last; ++j)
                    acc += weight_main(sh, i - j, p.a[j]) * p.u[j];
                acc += singular_weight(sh, p.a[last]) * p.u[last];
            }
        }
        out[q] = acc - off_sum;
    }
    return out;
}

// Variant that reuses prebuilt constant-exponent tables.
std::vector<double> eval_nodes_with_tables(const Shared& sh, const ExpTables& t,
                                           const std::vector<double>& u,
                                           const std::vector<std::size_t>& nodes) {
    const std::size_t j0 = sh.lay.j0;
    double off_sum = 0.0;
    if (sh.offset)
        for (std::size_t j = 0; j < j0; ++j) off_sum += t.off_w[j0 - j] * u[j];
    std::vector<double> out(nodes.size(), 0.0);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const std::size_t i = nodes[q];
        double acc = 0.0;
        if (i >= 1) {
            const std::size_t last = i - 1;
            const double* w = t.main_w.data();
            for (std::size_t j = 0; j < last; ++j) acc += w[i - j] * u[j];
            acc += t.sing_w * u[last];
        }
        out[q] = acc - off_sum;
    }
    return out;
}

// Maps a Hurst path (same grid or an integer refinement) onto driver cells.
std::vector<double> exponents_on_driver(const Shared& sh, const HurstPath& hurst) {
    hurst.validate();
    const UniformGrid& hg = hurst.path.grid;
    const UniformGrid& dg = sh.lay.grid;
    const double ratio_f = sh.lay.delta / hg.step();
    const double ratio_r = std::round(ratio_f);
    if (std::abs(ratio_f - ratio_r) > 1e-9 || ratio_r < 1.0)
        throw std::invalid_argument("simulate: Hurst grid must refine the driver grid");
    const std::size_t ratio = static_cast<std::size_t>(ratio_r);
    const double base_f = (dg.t_min - hg.t_min) / hg.step();
    const double base_r = std::round(base_f);
    if (std::abs(base_f - base_r) > 1e-6 || base_r < -1e-9)
        throw std::invalid_argument("simulate: Hurst grid does not align with the driver grid");
    const std::size_t base = static_cast<std::size_t>(std::max(0.0, base_r));
    if (base + (dg.n_cells - 1) * ratio >= hurst.path.values.size())
        throw std::invalid_argument("simulate: Hurst grid does not cover the driver grid");
    std::vector<double> a(dg.n_cells);
    for (std::size_t j = 0; j < dg.n_cells; ++j)
        a[j] = hurst.path.values[base + j * ratio] - 0.5;
    return a;
}

std::vector<double> scales_on_driver(const Shared& sh, const KernelSpec& kernel) {
    std::vector<double> sig;
    if (const auto* c = std::get_if<double>(&kernel.sigma)) {
        (void)c;
        return sig;  // empty: constant sigma
    }
    sig.resize(sh.lay.grid.n_cells);
    for (std::size_t j = 0; j < sig.size(); ++j)
        sig[j] = kernel.sigma_at(sh.lay.grid.node(j));
    return sig;
}

std::vector<double> scaled_increments(const Shared& sh, const std::vector<double>& sig,
                                      const NoiseGrid& noise) {
    std::vector<double> u = noise.increments;
    if (!sig.empty())
        for (std::size_t j = 0; j < u.size(); ++j) u[j] *= sig[j];
    else if (const auto* c = std::get_if<double>(&sh.kernel->sigma); c && *c != 1.0)
        for (double& x : u) x *= *c;
    return u;
}

std::vector<double> distinct_exponents(const std::vector<double>& a, std::size_t cap) {
    std::vector<double> lv;
    for (double x : a) {
        if (std::find(lv.begin(), lv.end(), x) == lv.end()) {
            lv.push_back(x);
            if (lv.size() > cap) return {};
        }
    }
    return lv;
}

std::vector<std::size_t> output_node_indices(const Shared& sh) {
    std::vector<std::size_t> nodes(sh.cfg.grid.n_nodes());
    for (std::size_t k = 0; k < nodes.size(); ++k)
        nodes[k] = sh.lay.j0 + k * sh.cfg.substeps;
    return nodes;
}

std::size_t driver_index_of_time(const Shared& sh, double t) {
    const std::size_t k = sh.cfg.grid.node_index(t);
    return sh.lay.j0 + k * sh.cfg.substeps;
}

std::vector<double> eval_path(const Shared& sh, const KernelSpec& kernel,
                              const HurstPath& hurst, const NoiseGrid& noise,
                              const std::vector<std::size_t>& nodes) {
    const std::vector<double> a = exponents_on_driver(sh, hurst);
    const std::vector<double> sig = scales_on_driver(sh, kernel);
    PathProfile p;
    p.u = scaled_increments(sh, sig, noise);

    const std::vector<double> levels = distinct_exponents(a, 12);
    if (levels.size() == 1) {
        const ExpTables t = build_exp_tables(sh, levels[0]);
        return eval_nodes_with_tables(sh, t, p.u, nodes);
    }
    if (!levels.empty()) {
        std::vector<ExpTables> tables;
        tables.reserve(levels.size());
        for (double lv : levels) tables.push_back(build_exp_tables(sh, lv));
        p.level_of_cell.resize(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) {
            const std::size_t idx = static_cast<std::size_t>(
                std::find(levels.begin(), levels.end(), a[j]) - levels.begin());
            p.level_of_cell[j] = &tables[idx];
        }
        return eval_nodes(sh, p, nodes);
    }
    p.a = a.data();
    return eval_nodes(sh, p, nodes);
}

bool spec_is_deterministic(const HurstSpec& spec) {
    return std::holds_alternative<ConstantHurst>(spec.variant) ||
           std::holds_alternative<TableHurst>(spec.variant) ||
           std::holds_alternative<StepHurst>(spec.variant);
}

}  // namespace

UniformGrid driver_grid_for(const KernelSpec& kernel, const SimConfig& cfg) {
    return make_layout(kernel, cfg).grid;
}

SampledPath simulate_moving_average(const KernelSpec& kernel, const HurstPath& hurst,
                                    const SimConfig& cfg) {
    const Shared sh = make_shared_tables(kernel, cfg);
    const NoiseGrid noise = make_noise(cfg.seed, cfg.stream_id, sh.lay.grid);
    const std::vector<double> values =
        eval_path(sh, kernel, hurst, noise, output_node_indices(sh));
    return SampledPath(cfg.grid, values, "X");
}

SampledPath simulate_moving_average(const KernelSpec& kernel, const HurstPath& hurst,
                                    const SimConfig& cfg, const NoiseGrid& noise) {
    const Shared sh = make_shared_tables(kernel, cfg);
    if (!(noise.grid == sh.lay.grid))
        throw std::invalid_argument("simulate: supplied noise grid does not match the "
                                    "driver grid for this configuration");
    const std::vector<double> values =
        eval_path(sh, kernel, hurst, noise, output_node_indices(sh));
    return SampledPath(cfg.grid, values, "X");
}

SampledPath simulate_mbm_field(const HurstPath& hurst, const SimConfig& cfg) {
    KernelSpec field_kernel;  // plain power kernel, unit scale
    field_kernel.family = ItoMbmFamily{};
    field_kernel.sigma = 1.0;
    field_kernel.bounds = default_bounds(field_kernel, hurst.h_upper);
    const Shared sh = make_shared_tables(field_kernel, cfg);
    const NoiseGrid noise = make_noise(cfg.seed, cfg.stream_id, sh.lay.grid);

    if (hurst.is_constant()) {
        const ExpTables t = build_exp_tables(sh, hurst.path.values.front() - 0.5);
        const std::vector<double> values =
            eval_nodes_with_tables(sh, t, noise.increments, output_node_indices(sh));
        return SampledPath(cfg.grid, values, "B");
    }

    const std::size_t j0 = sh.lay.j0;
    const std::vector<double>& dW = noise.increments;
    std::vector<double> out(cfg.grid.n_nodes(), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t i = j0 + k * cfg.substeps;
        const double a = hurst.path.at_time(cfg.grid.node(k)) - 0.5;
        double acc = 0.0;
        if (i >= 1) {
            const std::size_t last = i - 1;
            for (std::size_t j = 0; j < last; ++j) acc += std::exp(a * sh.logd[i - j]) * dW[j];
            acc += singular_weight(sh, a) * dW[last];
        }
        double off = 0.0;
        for (std::size_t j = 0; j < j0; ++j) off += std::exp(a * sh.logd[j0 - j]) * dW[j];
        out[k] = acc - off;
    }
    return SampledPath(cfg.grid, out, "B");
}

std::vector<SampledPath> rescaled_increment_paths(const KernelSpec& kernel,
                                                  const HurstSpec& hurst_spec,
                                                  const SimConfig& cfg, double t, double h,
                                                  const std::vector<double>& r_grid,
                                                  std::size_t n_paths) {
    if (r_grid.size() < 2) throw std::invalid_argument("rescaled: need >= 2 r values");
    const double r_step = r_grid[1] - r_grid[0];
    bool has_zero = false;
    for (std::size_t i = 0; i < r_grid.size(); ++i) {
        if (r_grid[i] == 0.0) has_zero = true;
        if (i > 0 && std::abs(r_grid[i] - r_grid[i - 1] - r_step) > 1e-9 * std::abs(r_step))
            throw std::invalid_argument("rescaled: r grid must be uniform");
    }
    if (!has_zero) throw std::invalid_argument("rescaled: r grid must contain 0");
    for (double r : r_grid) {
        const double tt = t + h * r;
        if (tt < -1e-12 || tt > cfg.grid.t_max + 1e-12)
            throw std::invalid_argument("rescaled: t + h*r must stay within the output grid");
    }

    const Shared sh = make_shared_tables(kernel, cfg);
    std::vector<std::size_t> nodes;
    nodes.reserve(r_grid.size() + 1);
    for (double r : r_grid) nodes.push_back(driver_index_of_time(sh, t + h * r));
    nodes.push_back(driver_index_of_time(sh, t));
    const std::size_t t_node_h = cfg.grid.node_index(t);

    const UniformGrid rg(r_grid.front(), r_grid.back(), r_grid.size() - 1);
    std::vector<SampledPath> out(n_paths);
    parallel_for(n_paths, [&](std::size_t pi) {
        const std::uint64_t stream = cfg.stream_id + pi;
        const HurstPath hp = generate_hurst(hurst_spec, sh.lay.grid, cfg.seed, stream);
        const NoiseGrid noise = make_noise(cfg.seed, stream, sh.lay.grid);
        const std::vector<double> vals = eval_path(sh, kernel, hp, noise, nodes);
        const double x_t = vals.back();
        const double realized_h = hp.path.values[sh.lay.j0 + t_node_h * cfg.substeps];
        const double scale = std::pow(h, -realized_h);
        std::vector<double> v(r_grid.size());
        for (std::size_t q = 0; q < r_grid.size(); ++q) v[q] = scale * (vals[q] - x_t);
        out[pi] = SampledPath(rg, std::move(v), "rescaled");
    });
    return out;
}

std::vector<std::vector<double>> mc_moving_average_at(const KernelSpec& kernel,
                                                      const HurstSpec& hurst_spec,
                                                      const SimConfig& cfg,
                                                      const std::vector<double>& times,
                                                      std::size_t n_paths) {
    const Shared sh = make_shared_tables(kernel, cfg);
    std::vector<std::size_t> nodes;
    nodes.reserve(times.size());
    for (double t : times) nodes.push_back(driver_index_of_time(sh, t));

    std::vector<std::vector<double>> out(n_paths);

    if (spec_is_deterministic(hurst_spec)) {
        const HurstPath hp = generate_hurst(hurst_spec, sh.lay.grid, cfg.seed, 0);
        const std::vector<double> a = exponents_on_driver(sh, hp);
        const std::vector<double> sig = scales_on_driver(sh, kernel);
        const std::vector<double> levels = distinct_exponents(a, 12);

        std::vector<ExpTables> tables;
        std::vector<const ExpTables*> cell_tables;
        if (!levels.empty()) {
            tables.reserve(levels.size());
            for (double lv : levels) tables.push_back(build_exp_tables(sh, lv));
            if (levels.size() > 1) {
                cell_tables.resize(a.size());
                for (std::size_t j = 0; j < a.size(); ++j) {
                    const std::size_t idx = static_cast<std::size_t>(
                        std::find(levels.begin(), levels.end(), a[j]) - levels.begin());
                    cell_tables[j] = &tables[idx];
                }
            }
        }
        parallel_for(n_paths, [&](std::size_t pi) {
            const NoiseGrid noise = make_noise(cfg.seed, cfg.stream_id + pi, sh.lay.grid);
            PathProfile p;
            p.u = scaled_increments(sh, sig, noise);
            if (levels.size() == 1) {
                out[pi] = eval_nodes_with_tables(sh, tables[0], p.u, nodes);
            } else if (!levels.empty()) {
                p.level_of_cell = cell_tables;
                out[pi] = eval_nodes(sh, p, nodes);
            } else {
                p.a = a.data();
                out[pi] = eval_nodes(sh, p, nodes);
            }
        });
        return out;
    }

    if (const auto* sc = std::get_if<StationaryConstantHurst>(&hurst_spec.variant)) {
        // per-atom tables shared across paths
        std::vector<ExpTables> tables;
        tables.reserve(sc->distribution.atoms.size());
        for (double atom : sc->distribution.atoms)
            tables.push_back(build_exp_tables(sh, atom - 0.5));
        const std::vector<double> sig = scales_on_driver(sh, kernel);
        parallel_for(n_paths, [&](std::size_t pi) {
            const std::uint64_t stream = cfg.stream_id + pi;
            const HurstPath hp = generate_hurst(hurst_spec, sh.lay.grid, cfg.seed, stream);
            const double a0 = hp.path.values.front() - 0.5;
            const ExpTables* t = nullptr;
            for (std::size_t i = 0; i < tables.size(); ++i)
                if (tables[i].a == a0) t = &tables[i];
            const NoiseGrid noise = make_noise(cfg.seed, stream, sh.lay.grid);
            const std::vector<double> u = scaled_increments(sh, sig, noise);
            out[pi] = eval_nodes_with_tables(sh, *t, u, nodes);
        });
        return out;
    }

    parallel_for(n_paths, [&](std::size_t pi) {
        const std::uint64_t stream = cfg.stream_id + pi;
        const HurstPath hp = generate_hurst(hurst_spec, sh.lay.grid, cfg.seed, stream);
        const NoiseGrid noise = make_noise(cfg.seed, stream, sh.lay.grid);
        out[pi] = eval_path(sh, kernel, hp, noise, nodes);
    });
    return out;
}

std::vector<std::vector<std::vector<double>>> mc_rescaled_sweep(
    const KernelSpec& kernel, const HurstSpec& hurst_spec, const SimConfig& cfg, double t,
    const std::vector<double>& h_values, const std::vector<double>& r_grid,
    std::size_t n_paths) {
    const Shared sh = make_shared_tables(kernel, cfg);

    // unique driver nodes over all (h, r) combinations, t last
    std::vector<std::size_t> nodes;
    std::vector<std::vector<std::size_t>> slot(h_values.size());
    auto node_slot = [&](std::size_t node) {
        for (std::size_t q = 0; q < nodes.size(); ++q)
            if (nodes[q] == node) return q;
        nodes.push_back(node);
        return nodes.size() - 1;
    };
    for (std::size_t hi = 0; hi < h_values.size(); ++hi) {
        for (double r : r_grid) {
            const double tt = t + h_values[hi] * r;
            if (tt < -1e-12 || tt > cfg.grid.t_max + 1e-12)
                throw std::invalid_argument("mc_rescaled_sweep: t + h*r out of range");
            slot[hi].push_back(node_slot(driver_index_of_time(sh, tt)));
        }
    }
    const std::size_t t_slot = node_slot(driver_index_of_time(sh, t));
    const std::size_t t_node_h = cfg.grid.node_index(t);

    std::vector<std::vector<std::vector<double>>> out(n_paths);
    parallel_for(n_paths, [&](std::size_t pi) {
        const std::uint64_t stream = cfg.stream_id + pi;
        const HurstPath hp = generate_hurst(hurst_spec, sh.lay.grid, cfg.seed, stream);
        const NoiseGrid noise = make_noise(cfg.seed, stream, sh.lay.grid);
        const std::vector<double> vals = eval_path(sh, kernel, hp, noise, nodes);
        const double x_t = vals[t_slot];
        const double realized_h = hp.path.values[sh.lay.j0 + t_node_h * cfg.substeps];
        std::vector<std::vector<double>> per_h(h_values.size());
        for (std::size_t hi = 0; hi < h_values.size(); ++hi) {
            const double scale = std::pow(h_values[hi], -realized_h);
            per_h[hi].resize(r_grid.size());
            for (std::size_t ri = 0; ri < r_grid.size(); ++ri)
                per_h[hi][ri] = scale * (vals[slot[hi][ri]] - x_t);
        }
        out[pi] = std::move(per_h);
    });
    return out;
}

std::vector<CoupledValues> mc_coupled_at(const KernelSpec& kernel,
                                         const HurstSpec& hurst_spec, const SimConfig& cfg,
                                         const std::vector<std::size_t>& out_nodes,
                                         std::size_t n_paths) {
    if (!std::holds_alternative<ItoMbmFamily>(kernel.family))
        throw std::invalid_argument("mc_coupled_at: the field pairing is defined for the "
                                    "plain power kernel");
    const Shared sh = make_shared_tables(kernel, cfg);
    std::vector<std::size_t> nodes(out_nodes.size());
    for (std::size_t q = 0; q < out_nodes.size(); ++q) {
        if (out_nodes[q] > cfg.grid.n_cells)
            throw std::invalid_argument("mc_coupled_at: output node out of range");
        nodes[q] = sh.lay.j0 + out_nodes[q] * cfg.substeps;
    }

    std::vector<CoupledValues> out(n_paths);
    parallel_for(n_paths, [&](std::size_t pi) {
        const std::uint64_t stream = cfg.stream_id + pi;
        const HurstPath hp = generate_hurst(hurst_spec, sh.lay.grid, cfg.seed, stream);
        const NoiseGrid noise = make_noise(cfg.seed, stream, sh.lay.grid);
        CoupledValues cv;
        cv.adapted = eval_path(sh, kernel, hp, noise, nodes);

        const std::vector<double>& dW = noise.increments;
        const std::size_t j0 = sh.lay.j0;
        cv.field.resize(nodes.size());
        if (hp.is_constant()) {
            const ExpTables t = build_exp_tables(sh, hp.path.values.front() - 0.5);
            cv.field = eval_nodes_with_tables(sh, t, dW, nodes);
        } else {
            for (std::size_t q = 0; q < nodes.size(); ++q) {
                const std::size_t i = nodes[q];
                const double a = hp.path.values[i] - 0.5;
                double acc = 0.0;
                if (i >= 1) {
                    const std::size_t last = i - 1;
                    for (std::size_t j = 0; j < last; ++j)
                        acc += std::exp(a * sh.logd[i - j]) * dW[j];
                    acc += singular_weight(sh, a) * dW[last];
                }
                double off = 0.0;
                for (std::size_t j = 0; j < j0; ++j)
                    off += std::exp(a * sh.logd[j0 - j]) * dW[j];
                cv.field[q] = acc - off;
            }
        }
        out[pi] = std::move(cv);
    });
    return out;
}

std::vector<std::vector<double>> mc_field_at(
    const SimConfig& cfg, const std::vector<std::pair<double, double>>& time_exponent,
    std::size_t n_paths) {
    KernelSpec field_kernel;
    field_kernel.family = ItoMbmFamily{};
    field_kernel.sigma = 1.0;
    double h_max = 0.5;
    for (const auto& [t, h] : time_exponent) h_max = std::max(h_max, h);
    field_kernel.bounds = default_bounds(field_kernel, h_max);
    const Shared sh = make_shared_tables(field_kernel, cfg);

    std::vector<std::size_t> nodes;
    std::vector<ExpTables> tables;
    for (const auto& [t, h] : time_exponent) {
        if (!(h > 0.0 && h < 1.0))
            throw std::invalid_argument("mc_field_at: exponent must be in (0,1)");
        nodes.push_back(driver_index_of_time(sh, t));
        tables.push_back(build_exp_tables(sh, h - 0.5));
    }

    std::vector<std::vector<double>> out(n_paths);
    parallel_for(n_paths, [&](std::size_t pi) {
        const NoiseGrid noise = make_noise(cfg.seed, cfg.stream_id + pi, sh.lay.grid);
        std::vector<double> vals(nodes.size());
        for (std::size_t q = 0; q < nodes.size(); ++q) {
            const std::vector<std::size_t> one{nodes[q]};
            vals[q] = eval_nodes_with_tables(sh, tables[q], noise.increments, one)[0];
        }
        out[pi] = std::move(vals);
    });
    return out;
}

}  // namespace multifrac
