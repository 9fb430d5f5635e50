#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace multifrac {

/// Finite mixture of point masses. Weights are normalized on construction.
struct FiniteDistribution {
    std::vector<double> atoms;
    std::vector<double> weights;

    static FiniteDistribution point(double x) { return FiniteDistribution({x}, {1.0}); }

    FiniteDistribution() = default;
    FiniteDistribution(std::vector<double> a, std::vector<double> w)
        : atoms(std::move(a)), weights(std::move(w)) {
        if (atoms.empty() || atoms.size() != weights.size())
            throw std::invalid_argument("FiniteDistribution: atoms/weights size mismatch");
        double total = 0.0;
        for (double x : weights) {
            if (x < 0.0) throw std::invalid_argument("FiniteDistribution: negative weight");
            total += x;
        }
        if (total <= 0.0) throw std::invalid_argument("FiniteDistribution: zero total weight");
        for (double& x : weights) x /= total;
    }

    /// Equal-weight empirical distribution from a sample.
    static FiniteDistribution empirical(std::vector<double> sample) {
        std::vector<double> w(sample.size(), 1.0);
        return FiniteDistribution(std::move(sample), std::move(w));
    }

    double min() const {
        double m = atoms[0];
        for (double x : atoms) m = x < m ? x : m;
        return m;
    }
    double max() const {
        double m = atoms[0];
        for (double x : atoms) m = x > m ? x : m;
        return m;
    }

    template <typename F>
    double expect(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) acc += weights[i] * f(atoms[i]);
        return acc;
    }
};

}  // namespace multifrac
