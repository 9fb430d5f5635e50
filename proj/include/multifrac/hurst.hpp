#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "multifrac/distribution.hpp"
#include "multifrac/grid.hpp"
#include "multifrac/path.hpp"

namespace multifrac {

enum class ModulusKind { none, holder, lipschitz };

/// Declared modulus of continuity |H_{t+h} - H_t| <= constant * h^exponent
/// (exponent = 1 for lipschitz). Declared by the generator, not estimated.
struct Modulus {
    ModulusKind kind = ModulusKind::none;
    double exponent = 0.0;
    double constant = 0.0;
};

/// A sampled functional Hurst exponent with its declared bounds and modulus.
/// Discontinuous paths carry the node indices of their jumps; the node at a
/// breakpoint holds the right-limit value.
struct HurstPath {
    SampledPath path;
    double h_lower = 0.0;
    double h_upper = 1.0;
    std::optional<Modulus> modulus;
    bool continuous = true;
    std::vector<std::size_t> breakpoints;

    void validate() const;
    double at_node(std::size_t k) const { return path.values[k]; }

    /// True when every node carries the same value.
    bool is_constant() const;
};

struct ConstantHurst {
    double value = 0.5;
};

/// Piecewise-linear deterministic function given by a (times, values) table.
struct TableHurst {
    std::vector<double> times;
    std::vector<double> values;
};

/// Piecewise-constant levels; level k applies on [breakpoints[k-1], breakpoints[k]).
struct StepHurst {
    std::vector<double> levels;       // size = breakpoints.size() + 1
    std::vector<double> breakpoints;  // strictly increasing
};

/// H_t = center + amplitude * tanh(driver fBm), driver independent of the
/// noise that drives any simulated process.
struct TanhFbmHurst {
    double center = 0.9;
    double amplitude = 0.05;
    double driver_hurst = 0.2;
    std::uint64_t driver_seed = 0;
};

/// One draw per path: H constant in time, sampled from a finite mixture.
struct StationaryConstantHurst {
    FiniteDistribution distribution;
};

struct HurstSpec {
    std::variant<ConstantHurst, TableHurst, StepHurst, TanhFbmHurst, StationaryConstantHurst>
        variant = ConstantHurst{};

    void validate() const;
};

/// Samples the functional Hurst exponent on a grid. The seed argument feeds
/// variants without a seed of their own (the tanh driver keeps its
/// driver_seed so one H realization can be paired with many noise seeds);
/// stream_id indexes Monte Carlo paths for the random variants.
HurstPath generate_hurst(const HurstSpec& spec, const UniformGrid& grid, std::uint64_t seed,
                         std::uint64_t stream_id);

/// Lower semicontinuous variant: at each jump node the value is replaced by
/// the minimum of the two one-sided limits. Identity on continuous paths and
/// idempotent.
HurstPath lsc_variant(const HurstPath& h);

/// Distribution of H_t at a fixed time under the spec. Exact for the
/// deterministic and mixture variants; an empirical sample of size n_samples
/// (streams stream_base..stream_base+n_samples-1 of the spec's own driver
/// seed) for the tanh variant.
FiniteDistribution hurst_marginal_at(const HurstSpec& spec, double t,
                                     std::size_t n_samples = 4000,
                                     std::uint64_t stream_base = 1u << 20);

/// Largest value the spec can produce (its declared upper bound).
double hurst_upper_bound(const HurstSpec& spec);

}  // namespace multifrac
