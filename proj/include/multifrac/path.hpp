#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "multifrac/grid.hpp"

namespace multifrac {

/// A process sampled on the nodes of a uniform grid.
struct SampledPath {
    UniformGrid grid;
    std::vector<double> values;  // length grid.n_nodes()
    std::string label;

    SampledPath() = default;
    SampledPath(UniformGrid g, std::vector<double> v, std::string lbl = {})
        : grid(g), values(std::move(v)), label(std::move(lbl)) {
        validate();
    }

    void validate() const {
        grid.validate();
        if (values.size() != grid.n_nodes())
            throw std::invalid_argument("SampledPath: values length must equal node count");
        for (double v : values)
            if (!std::isfinite(v))
                throw std::invalid_argument("SampledPath: values must be finite");
    }

    double at_node(std::size_t k) const { return values.at(k); }
    double at_time(double t) const { return values.at(grid.node_index(t)); }
};

}  // namespace multifrac
