#include "multifrac/noise.hpp"

#include <cmath>

#include "multifrac/rng.hpp"

namespace multifrac {

NoiseGrid make_noise(std::uint64_t seed, std::uint64_t stream_id, const UniformGrid& grid) {
    grid.validate();
    NoiseGrid out;
    out.grid = grid;
    out.seed = seed;
    out.stream_id = stream_id;
    out.increments.resize(grid.n_cells);
    const NormalStream rng(seed, RngDomain::driver_noise, stream_id);
    rng.fill_normals(0, out.increments.data(), grid.n_cells);
    const double sd = std::sqrt(grid.step());
    for (double& x : out.increments) x *= sd;
    return out;
}

SampledPath cumulate(const NoiseGrid& noise) {
    SampledPath out;
    out.grid = noise.grid;
    out.values.resize(noise.grid.n_nodes());
    out.values[0] = 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < noise.increments.size(); ++k) {
        acc += noise.increments[k];
        out.values[k + 1] = acc;
    }
    out.label = "W";
    return out;
}

}  // namespace multifrac
