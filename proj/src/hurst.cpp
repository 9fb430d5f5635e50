#include "multifrac/hurst.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "multifrac/gaussian.hpp"
#include "multifrac/rng.hpp"

namespace multifrac {

void HurstPath::validate() const {
    path.validate();
    if (!(h_lower > 0.0 && h_upper < 1.0 && h_lower <= h_upper))
        throw std::invalid_argument("HurstPath: bounds must satisfy 0 < lower <= upper < 1");
    for (double v : path.values)
        if (!(v >= h_lower && v <= h_upper))
            throw std::invalid_argument("HurstPath: values must lie within declared bounds");
    if (!continuous && breakpoints.empty())
        throw std::invalid_argument("HurstPath: discontinuous paths must carry breakpoints");
    for (std::size_t b : breakpoints)
        if (b >= path.values.size())
            throw std::invalid_argument("HurstPath: breakpoint index out of range");
}

bool HurstPath::is_constant() const {
    for (double v : path.values)
        if (v != path.values.front()) return false;
    return true;
}

namespace {

void check_range01(double x, const char* what) {
    if (!(x > 0.0 && x < 1.0))
        throw std::invalid_argument(std::string(what) + " must be in (0,1)");
}

}  // namespace

void HurstSpec::validate() const {
    if (const auto* c = std::get_if<ConstantHurst>(&variant)) {
        check_range01(c->value, "constant Hurst value");
    } else if (const auto* t = std::get_if<TableHurst>(&variant)) {
        if (t->times.size() < 2 || t->times.size() != t->values.size())
            throw std::invalid_argument("table Hurst: need >= 2 (time, value) pairs");
        for (std::size_t i = 1; i < t->times.size(); ++i)
            if (!(t->times[i] > t->times[i - 1]))
                throw std::invalid_argument("table Hurst: times must be increasing");
        for (double v : t->values) check_range01(v, "table Hurst value");
    } else if (const auto* s = std::get_if<StepHurst>(&variant)) {
        if (s->levels.size() != s->breakpoints.size() + 1)
            throw std::invalid_argument("step Hurst: need one more level than breakpoints");
        for (std::size_t i = 1; i < s->breakpoints.size(); ++i)
            if (!(s->breakpoints[i] > s->breakpoints[i - 1]))
                throw std::invalid_argument("step Hurst: breakpoints must be increasing");
        for (double v : s->levels) check_range01(v, "step Hurst level");
    } else if (const auto* f = std::get_if<TanhFbmHurst>(&variant)) {
        check_range01(f->driver_hurst, "tanh driver Hurst");
        if (!(f->amplitude > 0.0))
            throw std::invalid_argument("tanh Hurst: amplitude must be positive");
        if (!(f->center - f->amplitude > 0.0 && f->center + f->amplitude < 1.0))
            throw std::invalid_argument("tanh Hurst: center +- amplitude must stay in (0,1)");
    } else if (const auto* m = std::get_if<StationaryConstantHurst>(&variant)) {
        for (double v : m->distribution.atoms) check_range01(v, "mixture Hurst atom");
    }
}

namespace {

HurstPath make_constant(double value, const UniformGrid& grid) {
    HurstPath out;
    out.path = SampledPath(grid, std::vector<double>(grid.n_nodes(), value), "H");
    out.h_lower = value;
    out.h_upper = value;
    out.modulus = Modulus{ModulusKind::lipschitz, 1.0, 0.0};
    out.continuous = true;
    return out;
}

HurstPath make_table(const TableHurst& spec, const UniformGrid& grid) {
    std::vector<double> vals(grid.n_nodes());
    double lip = 0.0;
    for (std::size_t i = 1; i < spec.times.size(); ++i)
        lip = std::max(lip, std::abs(spec.values[i] - spec.values[i - 1]) /
                                (spec.times[i] - spec.times[i - 1]));
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double t = grid.node(k);
        if (t <= spec.times.front()) {
            vals[k] = spec.values.front();
        } else if (t >= spec.times.back()) {
            vals[k] = spec.values.back();
        } else {
            const auto it = std::upper_bound(spec.times.begin(), spec.times.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - spec.times.begin());
            const double w = (t - spec.times[i - 1]) / (spec.times[i] - spec.times[i - 1]);
            vals[k] = (1.0 - w) * spec.values[i - 1] + w * spec.values[i];
        }
    }
    HurstPath out;
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    out.h_lower = *lo;
    out.h_upper = *hi;
    out.path = SampledPath(grid, std::move(vals), "H");
    out.modulus = Modulus{ModulusKind::lipschitz, 1.0, lip};
    out.continuous = true;
    return out;
}

HurstPath make_step(const StepHurst& spec, const UniformGrid& grid) {
    std::vector<double> vals(grid.n_nodes());
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double t = grid.node(k);
        // right-limit convention: the node at a breakpoint takes the new level
        const auto it = std::upper_bound(spec.breakpoints.begin(), spec.breakpoints.end(),
                                         t + 0.5 * grid.step() * 1e-9);
        vals[k] = spec.levels[static_cast<std::size_t>(it - spec.breakpoints.begin())];
        if (k > 0 && vals[k] != vals[k - 1]) nodes.push_back(k);
    }
    HurstPath out;
    const auto [lo, hi] = std::minmax_element(spec.levels.begin(), spec.levels.end());
    out.h_lower = *lo;
    out.h_upper = *hi;
    out.path = SampledPath(grid, std::move(vals), "H");
    out.modulus = std::nullopt;
    out.continuous = nodes.empty();
    out.breakpoints = std::move(nodes);
    if (!out.continuous && out.breakpoints.empty())
        throw std::logic_error("step Hurst: lost breakpoints");
    return out;
}

// Declared Holder constant measured over dyadic lags of the sampled driver.
double dyadic_holder_constant(const std::vector<double>& vals, double dt, double exponent) {
    double c = 0.0;
    for (std::size_t lag = 1; lag < vals.size(); lag *= 2) {
        const double h = static_cast<double>(lag) * dt;
        double m = 0.0;
        for (std::size_t k = 0; k + lag < vals.size(); ++k)
            m = std::max(m, std::abs(vals[k + lag] - vals[k]));
        c = std::max(c, m / std::pow(h, exponent));
    }
    return c;
}

HurstPath make_tanh_fbm(const TanhFbmHurst& spec, const UniformGrid& grid,
                        std::uint64_t stream_id) {
    const SampledPath driver = exact_fbm_two_sided(spec.driver_hurst, grid, spec.driver_seed,
                                                   stream_id, FbmNormalization::standard);
    std::vector<double> vals(grid.n_nodes());
    for (std::size_t k = 0; k < vals.size(); ++k)
        vals[k] = spec.center + spec.amplitude * std::tanh(driver.values[k]);
    HurstPath out;
    out.h_lower = spec.center - spec.amplitude;
    out.h_upper = spec.center + spec.amplitude;
    const double c = dyadic_holder_constant(vals, grid.step(), spec.driver_hurst);
    out.path = SampledPath(grid, std::move(vals), "H");
    out.modulus = Modulus{ModulusKind::holder, spec.driver_hurst, c};
    out.continuous = true;
    return out;
}

HurstPath make_stationary_constant(const StationaryConstantHurst& spec, const UniformGrid& grid,
                                   std::uint64_t seed, std::uint64_t stream_id) {
    const NormalStream rng(seed, RngDomain::hurst_driver, stream_id);
    // one uniform draw from the normal CDF keeps the RNG surface single
    const double u = 0.5 * std::erfc(-rng.normal(0) * M_SQRT1_2);
    double acc = 0.0;
    double value = spec.distribution.atoms.back();
    for (std::size_t i = 0; i < spec.distribution.atoms.size(); ++i) {
        acc += spec.distribution.weights[i];
        if (u <= acc) {
            value = spec.distribution.atoms[i];
            break;
        }
    }
    HurstPath out = make_constant(value, grid);
    out.h_lower = spec.distribution.min();
    out.h_upper = spec.distribution.max();
    return out;
}

}  // namespace

HurstPath generate_hurst(const HurstSpec& spec, const UniformGrid& grid, std::uint64_t seed,
                         std::uint64_t stream_id) {
    spec.validate();
    grid.validate();
    HurstPath out = std::visit(
        [&](const auto& v) -> HurstPath {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantHurst>) {
                return make_constant(v.value, grid);
            } else if constexpr (std::is_same_v<T, TableHurst>) {
                return make_table(v, grid);
            } else if constexpr (std::is_same_v<T, StepHurst>) {
                return make_step(v, grid);
            } else if constexpr (std::is_same_v<T, TanhFbmHurst>) {
                return make_tanh_fbm(v, grid, stream_id);
            } else {
                return make_stationary_constant(v, grid, seed, stream_id);
            }
        },
        spec.variant);
    out.validate();
    return out;
}

HurstPath lsc_variant(const HurstPath& h) {
    h.validate();
    if (h.continuous) return h;
    HurstPath out = h;
    for (std::size_t b : h.breakpoints) {
        if (b == 0) continue;
        // node b carries the right limit, node b-1 the left limit
        out.path.values[b] = std::min(h.path.values[b - 1], h.path.values[b]);
    }
    return out;
}

double hurst_upper_bound(const HurstSpec& spec) {
    spec.validate();
    return std::visit(
        [](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantHurst>) {
                return v.value;
            } else if constexpr (std::is_same_v<T, TableHurst>) {
                return *std::max_element(v.values.begin(), v.values.end());
            } else if constexpr (std::is_same_v<T, StepHurst>) {
                return *std::max_element(v.levels.begin(), v.levels.end());
            } else if constexpr (std::is_same_v<T, TanhFbmHurst>) {
                return v.center + v.amplitude;
            } else {
                return v.distribution.max();
            }
        },
        spec.variant);
}

FiniteDistribution hurst_marginal_at(const HurstSpec& spec, double t,
                                     std::size_t n_samples, std::uint64_t stream_base) {
    spec.validate();
    if (const auto* c = std::get_if<ConstantHurst>(&spec.variant))
        return FiniteDistribution::point(c->value);
    if (const auto* m = std::get_if<StationaryConstantHurst>(&spec.variant))
        return m->distribution;
    if (const auto* tb = std::get_if<TableHurst>(&spec.variant)) {
        double v;
        if (t <= tb->times.front()) {
            v = tb->values.front();
        } else if (t >= tb->times.back()) {
            v = tb->values.back();
        } else {
            const auto it = std::upper_bound(tb->times.begin(), tb->times.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - tb->times.begin());
            const double w = (t - tb->times[i - 1]) / (tb->times[i] - tb->times[i - 1]);
            v = (1.0 - w) * tb->values[i - 1] + w * tb->values[i];
        }
        return FiniteDistribution::point(v);
    }
    if (const auto* st = std::get_if<StepHurst>(&spec.variant)) {
        // upper_bound skips breakpoints <= t: right-limit convention at a jump
        const auto it = std::upper_bound(st->breakpoints.begin(), st->breakpoints.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - st->breakpoints.begin());
        return FiniteDistribution::point(st->levels[i]);
    }
    const auto& f = std::get<TanhFbmHurst>(spec.variant);
    if (!(t >= 0.0)) throw std::invalid_argument("hurst_marginal_at: t must be >= 0");
    std::vector<double> sample(n_samples);
    const std::size_t cells = 256;
    const UniformGrid grid(0.0, std::max(t, 1e-3), cells);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const SampledPath driver = exact_fbm(f.driver_hurst, grid, f.driver_seed,
                                             stream_base + i, FbmNormalization::standard);
        sample[i] = f.center + f.amplitude * std::tanh(driver.values.back());
    }
    return FiniteDistribution::empirical(std::move(sample));
}

}  // namespace multifrac
