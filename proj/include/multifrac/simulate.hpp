#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "multifrac/grid.hpp"
#include "multifrac/hurst.hpp"
#include "multifrac/kernels.hpp"
#include "multifrac/noise.hpp"
#include "multifrac/path.hpp"

namespace multifrac {

/// Treatment of the driver cell immediately left of an evaluation time, where
/// the kernel weight diverges for exponents below 1/2.
enum class SingularCellMode {
    left_point,        // raw left-endpoint weight (fine for exponents > 1/2)
    variance_matched,  // rescale the cell's increment to the exact cell variance
};

struct SimConfig {
    UniformGrid grid;  // output grid; must start at 0
    std::size_t substeps = 8;
    double tol_truncation = 1e-3;
    SingularCellMode singular_cell = SingularCellMode::variance_matched;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    void validate() const {
        grid.validate();
        if (std::abs(grid.t_min) > 1e-12 * std::max(1.0, std::abs(grid.t_max)))
            throw std::invalid_argument("SimConfig: output grid must start at 0");
        if (substeps == 0) throw std::invalid_argument("SimConfig: substeps must be >= 1");
        if (!(tol_truncation > 0.0))
            throw std::invalid_argument("SimConfig: tol_truncation must be > 0");
    }
};

/// Driver grid [-M, T], refined by substeps; M comes from truncation_horizon
/// with the output step, rounded up to whole output cells (and never smaller
/// than a truncated kernel's support).
UniformGrid driver_grid_for(const KernelSpec& kernel, const SimConfig& cfg);

/// Left-point Ito discretization of X_t = int g_s(t) dW_s: exponent and scale
/// are frozen at the left endpoint of each driver cell. The Hurst path must be
/// sampled on the driver grid or an integer refinement of it.
SampledPath simulate_moving_average(const KernelSpec& kernel, const HurstPath& hurst,
                                    const SimConfig& cfg);

/// Same scheme with caller-supplied driver increments (noise.grid must equal
/// the driver grid for cfg). Lets refinement studies couple one Brownian path
/// across substep levels.
SampledPath simulate_moving_average(const KernelSpec& kernel, const HurstPath& hurst,
                                    const SimConfig& cfg, const NoiseGrid& noise);

/// Field evaluation B(t_k, H_{t_k}): the kernel exponent is taken at the
/// output time, same driver increments as the moving-average simulator.
SampledPath simulate_mbm_field(const HurstPath& hurst, const SimConfig& cfg);

/// Rescaled increments h^(-H_t) (X_{t+hr} - X_t) over a uniform r grid that
/// contains 0, one path per stream starting at cfg.stream_id. Scaling uses
/// each path's realized H_t.
std::vector<SampledPath> rescaled_increment_paths(const KernelSpec& kernel,
                                                  const HurstSpec& hurst_spec,
                                                  const SimConfig& cfg, double t, double h,
                                                  const std::vector<double>& r_grid,
                                                  std::size_t n_paths);

/// Monte Carlo sweep: X at the given output times for streams
/// cfg.stream_id .. +n_paths-1; results indexed [path][time]. Kernel weight
/// tables are shared across paths when the Hurst spec is deterministic.
std::vector<std::vector<double>> mc_moving_average_at(const KernelSpec& kernel,
                                                      const HurstSpec& hurst_spec,
                                                      const SimConfig& cfg,
                                                      const std::vector<double>& times,
                                                      std::size_t n_paths);

/// Monte Carlo sweep of the field at fixed (time, exponent) pairs, all pairs
/// sharing one driver per path (the coupled-field evaluation).
std::vector<std::vector<double>> mc_field_at(
    const SimConfig& cfg, const std::vector<std::pair<double, double>>& time_exponent,
    std::size_t n_paths);

/// Rescaled increments for a whole ladder of h values in one evaluation pass
/// per path: result[path][hi][ri] = h_i^(-H_t) (X_{t + h_i r_i} - X_t).
std::vector<std::vector<std::vector<double>>> mc_rescaled_sweep(
    const KernelSpec& kernel, const HurstSpec& hurst_spec, const SimConfig& cfg, double t,
    const std::vector<double>& h_values, const std::vector<double>& r_grid,
    std::size_t n_paths);

/// Field and adapted evaluations at selected output nodes, sharing one driver
/// and one Hurst realization per path (streams cfg.stream_id .. +n_paths-1).
struct CoupledValues {
    std::vector<double> field;    // B(t_k, H_{t_k})
    std::vector<double> adapted;  // X(t_k) with left-endpoint exponents
};
std::vector<CoupledValues> mc_coupled_at(const KernelSpec& kernel,
                                         const HurstSpec& hurst_spec, const SimConfig& cfg,
                                         const std::vector<std::size_t>& out_nodes,
                                         std::size_t n_paths);

}  // namespace multifrac
