#pragma once

#include <cstdint>
#include <vector>

#include "multifrac/grid.hpp"
#include "multifrac/path.hpp"

namespace multifrac {

/// Brownian driver increments on a uniform grid, increment k ~ N(0, step),
/// addressed by (seed, stream_id) for bit-exact regeneration.
struct NoiseGrid {
    UniformGrid grid;
    std::vector<double> increments;  // length grid.n_cells
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

NoiseGrid make_noise(std::uint64_t seed, std::uint64_t stream_id, const UniformGrid& grid);

/// Running sum of the increments: values[0] = 0, values[k] = sum of the first k.
SampledPath cumulate(const NoiseGrid& noise);

}  // namespace multifrac
