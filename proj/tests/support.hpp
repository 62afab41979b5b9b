#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "lsnw/wasserstein.hpp"

namespace lsnw::testing {

/// Random distribution with 1..max_atoms atoms on [-M, M]. With `lattice`
/// atoms sit on a coarse grid so that distinct draws share atoms.
inline DiscreteDistribution random_distribution(std::mt19937_64& gen, std::size_t max_atoms, double M,
                                                bool lattice = false) {
    std::uniform_int_distribution<std::size_t> count(1, max_atoms);
    std::uniform_real_distribution<double> pos(-M, M);
    std::uniform_int_distribution<int> cell(-4, 4);
    std::uniform_real_distribution<double> wt(0.01, 1.0);
    const std::size_t n = count(gen);
    std::vector<double> v(n), w(n);
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = lattice ? M * cell(gen) / 4.0 : pos(gen);
        w[k] = wt(gen);
    }
    return DiscreteDistribution::from_atoms(v, w);
}

/// Quantile function evaluated from raw (atom, weight) pairs by a linear
/// scan, independent of DiscreteDistribution::quantile.
inline double scan_quantile(const DiscreteDistribution& d, double z) {
    double acc = 0.0;
    for (std::size_t k = 0; k < d.size(); ++k) {
        acc += d.weights()[k];
        if (acc >= z - 1e-15) {
            return d.atoms()[k];
        }
    }
    return d.atoms()[d.size() - 1];
}

/// W_r^r by midpoint quadrature in quantile space.
inline double wr_power_oracle(const DiscreteDistribution& a, const DiscreteDistribution& b, double r,
                              std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double z = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        s += std::pow(std::abs(scan_quantile(a, z) - scan_quantile(b, z)), r);
    }
    return s / static_cast<double>(n);
}

} // namespace lsnw::testing
