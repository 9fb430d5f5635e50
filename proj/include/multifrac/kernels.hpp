#pragma once

#include <variant>

#include "multifrac/path.hpp"

namespace multifrac {

/// Envelope data for a moving-average kernel family: |g| and |d/dt g| are
/// bounded by l_bar * (t-s)^(H-1/2) resp. (H-3/2) near the diagonal and by
/// l_bar * (t-s)^(-r_lower) in the tail; rho is the extra decay of the
/// leading-term remainder.
struct ConditionABounds {
    double l_bar = 1.0;
    double r_lower = 1.0;  // > 1/2
    double rho = 1.0;      // > 0

    void validate() const {
        if (!(l_bar > 0.0)) throw std::invalid_argument("bounds: l_bar must be > 0");
        if (!(r_lower > 0.5)) throw std::invalid_argument("bounds: r_lower must be > 1/2");
        if (!(rho > 0.0)) throw std::invalid_argument("bounds: rho must be > 0");
    }
};

struct ItoMbmFamily {};

struct MaternFamily {
    double lambda = 4.0;
};

struct LogModifiedFamily {};

struct TruncatedFamily {
    double cutoff = 1.0;  // taper is 1 below cutoff/2 and 0 beyond cutoff
};

/// Scale process sigma_s: a constant or a sampled path (evaluated at the
/// left-nearest node, so the value never looks ahead of s).
using SigmaSpec = std::variant<double, SampledPath>;

struct KernelSpec {
    std::variant<ItoMbmFamily, MaternFamily, LogModifiedFamily, TruncatedFamily> family =
        ItoMbmFamily{};
    SigmaSpec sigma = 1.0;
    ConditionABounds bounds;

    void validate() const;
    double sigma_at(double s) const;
    double sigma_max() const;
    bool has_offset_term() const;  // families with the (-s)_+ anchor at 0
};

/// Default envelope constants for a family given the Hurst range and the
/// largest |sigma|.
ConditionABounds default_bounds(const KernelSpec& spec, double h_upper);

/// Kernel value g_s(t) with exponent h_at_s; 0 for s >= t by the cadlag
/// convention (x)_+^a = 0 for x <= 0. Diverges as s -> t- when h < 1/2;
/// singular-cell handling is the simulator's job.
double eval_kernel(const KernelSpec& spec, double s, double t, double h_at_s);

/// Smallest horizon M >= 1 with step^2 l_bar^2 M^(1-2 r_lower) / (2 r_lower - 1)
/// <= tol^2; the driver grid must reach t_min - M. Throws if M would exceed 1e6.
double truncation_horizon(const ConditionABounds& bounds, double h_step, double tol);

/// g_s(t) - sigma_s (t-s)^(h-1/2): the deviation from the leading singular term.
double astar_remainder(const KernelSpec& spec, double s, double t, double h_at_s);

}  // namespace multifrac
