#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace multifrac {

/// Uniform time grid over [t_min, t_max] with n_cells cells (n_cells + 1 nodes).
struct UniformGrid {
    double t_min = 0.0;
    double t_max = 1.0;
    std::size_t n_cells = 1;

    UniformGrid() = default;
    UniformGrid(double t_min_, double t_max_, std::size_t n_cells_)
        : t_min(t_min_), t_max(t_max_), n_cells(n_cells_) {
        validate();
    }

    void validate() const {
        if (!(t_min < t_max))
            throw std::invalid_argument("UniformGrid: t_min must be < t_max");
        if (n_cells == 0)
            throw std::invalid_argument("UniformGrid: n_cells must be >= 1");
        if (!std::isfinite(t_min) || !std::isfinite(t_max))
            throw std::invalid_argument("UniformGrid: bounds must be finite");
    }

    double step() const { return (t_max - t_min) / static_cast<double>(n_cells); }
    std::size_t n_nodes() const { return n_cells + 1; }
    double node(std::size_t k) const { return t_min + static_cast<double>(k) * step(); }

    /// Index of the node nearest to time t; throws if t is not a node (within tol).
    std::size_t node_index(double t, double tol = 1e-9) const {
        const double x = (t - t_min) / step();
        const double r = std::round(x);
        if (std::abs(x - r) > tol || r < 0.0 || r > static_cast<double>(n_cells))
            throw std::invalid_argument("UniformGrid: time is not a grid node");
        return static_cast<std::size_t>(r);
    }

    bool operator==(const UniformGrid& o) const {
        return t_min == o.t_min && t_max == o.t_max && n_cells == o.n_cells;
    }
};

}  // namespace multifrac
