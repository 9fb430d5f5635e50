#include "multifrac/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multifrac {

namespace {

// (x)_+^a with the cadlag convention: zero for x <= 0 whatever the exponent.
double pos_pow(double x, double a) { return x > 0.0 ? std::pow(x, a) : 0.0; }

// [x log(x)]_+^a, zero wherever the base x*log(x) is not positive.
double log_base_pow(double x, double a) {
    if (x <= 0.0) return 0.0;
    const double base = x * std::log(x);
    return base > 0.0 ? std::pow(base, a) : 0.0;
}

// taper: 1 on [0, cutoff/2], cubic ramp down to 0 at cutoff
double taper(double x, double cutoff) {
    if (x <= 0.5 * cutoff) return 1.0;
    if (x >= cutoff) return 0.0;
    const double u = (x - 0.5 * cutoff) / (0.5 * cutoff);
    return 1.0 - u * u * (3.0 - 2.0 * u);
}

}  // namespace

void KernelSpec::validate() const {
    if (const auto* m = std::get_if<MaternFamily>(&family)) {
        if (!(m->lambda > 0.0)) throw std::invalid_argument("matern: lambda must be > 0");
    }
    if (const auto* t = std::get_if<TruncatedFamily>(&family)) {
        if (!(t->cutoff > 0.0)) throw std::invalid_argument("truncated: cutoff must be > 0");
    }
    if (const auto* p = std::get_if<SampledPath>(&sigma)) p->validate();
    bounds.validate();
    if (sigma_max() > bounds.l_bar + 1e-12)
        throw std::invalid_argument("kernel: |sigma| must not exceed l_bar");
}

double KernelSpec::sigma_at(double s) const {
    if (const auto* c = std::get_if<double>(&sigma)) return *c;
    const auto& p = std::get<SampledPath>(sigma);
    const double x = (s - p.grid.t_min) / p.grid.step();
    const double k = std::floor(x);
    if (k < 0.0) return p.values.front();
    if (k >= static_cast<double>(p.grid.n_cells)) return p.values.back();
    return p.values[static_cast<std::size_t>(k)];
}

double KernelSpec::sigma_max() const {
    if (const auto* c = std::get_if<double>(&sigma)) return std::abs(*c);
    const auto& p = std::get<SampledPath>(sigma);
    double m = 0.0;
    for (double v : p.values) m = std::max(m, std::abs(v));
    return m;
}

bool KernelSpec::has_offset_term() const {
    return std::holds_alternative<ItoMbmFamily>(family) ||
           std::holds_alternative<LogModifiedFamily>(family);
}

ConditionABounds default_bounds(const KernelSpec& spec, double h_upper) {
    if (!(h_upper > 0.0 && h_upper < 1.0))
        throw std::invalid_argument("default_bounds: h_upper must be in (0,1)");
    const double s = std::max(spec.sigma_max(), 1e-12);
    ConditionABounds b;
    if (std::holds_alternative<ItoMbmFamily>(spec.family)) {
        b.l_bar = s;
        b.r_lower = 1.5 - h_upper;
        b.rho = 1.0;
    } else if (const auto* m = std::get_if<MaternFamily>(&spec.family)) {
        b.l_bar = s * (0.5 + m->lambda);
        b.r_lower = 1.0;
        b.rho = 1.0;
    } else if (std::holds_alternative<LogModifiedFamily>(spec.family)) {
        b.l_bar = s;
        b.r_lower = 1.5 - h_upper;
        b.rho = 1.0;
    } else {
        const auto& t = std::get<TruncatedFamily>(spec.family);
        // the taper slope 3/cutoff dominates the tail envelope up to x = cutoff
        b.r_lower = 2.0;
        b.l_bar = s * std::max(0.5 + 6.0 / t.cutoff,
                               3.5 * std::pow(std::max(t.cutoff, 1.0), 1.5));
        b.rho = 1.0;
    }
    return b;
}

double eval_kernel(const KernelSpec& spec, double s, double t, double h_at_s) {
    if (!std::isfinite(s) || !std::isfinite(t) || !std::isfinite(h_at_s))
        throw std::invalid_argument("eval_kernel: non-finite input");
    if (!(h_at_s > 0.0 && h_at_s < 1.0))
        throw std::invalid_argument("eval_kernel: exponent must be in (0,1)");
    if (s >= t && !(s < t)) {
        // fall through: pos_pow handles s >= t uniformly
    }
    const double a = h_at_s - 0.5;
    const double sig = spec.sigma_at(s);
    if (std::holds_alternative<ItoMbmFamily>(spec.family))
        return sig * (pos_pow(t - s, a) - pos_pow(-s, a));
    if (const auto* m = std::get_if<MaternFamily>(&spec.family))
        return s < t ? sig * pos_pow(t - s, a) * std::exp(-m->lambda * (t - s)) : 0.0;
    if (std::holds_alternative<LogModifiedFamily>(spec.family))
        return sig * (log_base_pow(t - s, a) - log_base_pow(-s, a));
    const auto& tr = std::get<TruncatedFamily>(spec.family);
    return sig * pos_pow(t - s, a) * taper(t - s, tr.cutoff);
}

double truncation_horizon(const ConditionABounds& bounds, double h_step, double tol) {
    bounds.validate();
    if (!(tol > 0.0)) throw std::invalid_argument("truncation_horizon: tol must be > 0");
    if (!(h_step > 0.0)) throw std::invalid_argument("truncation_horizon: h_step must be > 0");
    const double p = 2.0 * bounds.r_lower - 1.0;
    const double base = h_step * h_step * bounds.l_bar * bounds.l_bar / (tol * tol * p);
    const double m = std::max(1.0, std::pow(base, 1.0 / p));
    if (m > 1e6)
        throw std::domain_error("truncation_horizon: required horizon exceeds 1e6; "
                                "loosen the tolerance");
    return m;
}

double astar_remainder(const KernelSpec& spec, double s, double t, double h_at_s) {
    if (!(s < t)) throw std::invalid_argument("astar_remainder: requires s < t");
    const double lead = spec.sigma_at(s) * pos_pow(t - s, h_at_s - 0.5);
    return eval_kernel(spec, s, t, h_at_s) - lead;
}

}  // namespace multifrac
