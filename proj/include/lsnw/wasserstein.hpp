#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "lsnw/error.hpp"

namespace lsnw {

/// Atoms closer than this are merged when a distribution is built.
inline constexpr double kAtomMergeTolerance = 1e-12;

/// Finitely supported measure on the real line with total mass 1: strictly
/// increasing atoms and nonzero weights.
///
/// Probability distributions (the normal case) carry positive weights. A
/// signed variant exists for Nadaraya-Watson estimates built with a
/// sign-changing kernel; its step function is not monotone. Distances are
/// defined for both through the CDF representation, quantile-based
/// operations only for the positive case.
class DiscreteDistribution {
public:
    /// Drops zero-weight entries, sorts, merges equal values and
    /// renormalizes to unit mass. Weights must be nonnegative.
    static DiscreteDistribution from_atoms(std::span<const double> values,
                                           std::span<const double> weights) {
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                throw InvalidArgument("weights must be finite and nonnegative");
            }
        }
        return build(values, weights, false);
    }

    /// Same as from_atoms but accepts negative weights. Total mass must be
    /// positive; it is renormalized to 1.
    static DiscreteDistribution from_signed_atoms(std::span<const double> values,
                                                  std::span<const double> weights) {
        return build(values, weights, true);
    }

    /// Equal weight on every value (the empirical measure).
    static DiscreteDistribution uniform_over(std::span<const double> values) {
        if (values.empty()) {
            throw EmptyInput("empirical distribution of an empty sample");
        }
        const std::vector<double> w(values.size(), 1.0);
        return build(values, w, false);
    }

    static DiscreteDistribution dirac(double at) {
        const double v[] = {at};
        const double w[] = {1.0};
        return build(v, w, false);
    }

    std::span<const double> atoms() const noexcept { return atoms_; }
    std::span<const double> weights() const noexcept { return weights_; }
    /// cumulative()[k] = F(atoms()[k]).
    std::span<const double> cumulative() const noexcept { return cumulative_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    bool is_signed() const noexcept { return signed_; }

    /// F(y) = total weight of atoms <= y.
    double cdf(double y) const noexcept {
        const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), y);
        if (it == atoms_.begin()) {
            return 0.0;
        }
        return cumulative_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }

    /// inf { v : F(v) >= z } for z in (0, 1].
    double quantile(double z) const {
        if (!(z > 0.0 && z <= 1.0)) {
            throw QuantileLevelOutOfRange("quantile level must lie in (0, 1], got " +
                                          std::to_string(z));
        }
        require_unsigned("quantile");
        const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), z);
        if (it == cumulative_.end()) {
            return atoms_.back();
        }
        return atoms_[static_cast<std::size_t>(it - cumulative_.begin())];
    }

    double mean() const noexcept {
        double m = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            m += atoms_[k] * weights_[k];
        }
        return m;
    }

    double min_atom() const noexcept { return atoms_.front(); }
    double max_atom() const noexcept { return atoms_.back(); }

    /// Reporting view of a signed estimate: the step function clipped to
    /// [0, 1] and made nondecreasing by a running maximum. Identity for
    /// ordinary distributions.
    DiscreteDistribution monotone_envelope() const {
        if (!signed_) {
            return *this;
        }
        std::vector<double> w;
        std::vector<double> a;
        double level = 0.0;
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            const double f = std::clamp(cumulative_[k], 0.0, 1.0);
            const double next = std::max(level, k + 1 == atoms_.size() ? 1.0 : f);
            if (next > level) {
                a.push_back(atoms_[k]);
                w.push_back(next - level);
                level = next;
            }
        }
        return build(a, w, false);
    }

    void require_unsigned(const char* what) const {
        if (signed_) {
            throw InvalidArgument(std::string(what) + " needs a distribution with nonnegative weights");
        }
    }

    friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

private:
    static DiscreteDistribution build(std::span<const double> values,
                                      std::span<const double> weights, bool allow_signed) {
        if (values.size() != weights.size()) {
            throw InvalidArgument("values and weights differ in length");
        }
        if (values.empty()) {
            throw EmptySupport("no atoms");
        }
        std::vector<std::size_t> order;
        order.reserve(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!std::isfinite(values[i])) {
                throw InvalidArgument("atoms must be finite");
            }
            if (weights[i] != 0.0) {
                order.push_back(i);
            }
        }
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });

        DiscreteDistribution d;
        for (std::size_t i : order) {
            if (!d.atoms_.empty() && values[i] - d.atoms_.back() <= kAtomMergeTolerance) {
                d.weights_.back() += weights[i];
            } else {
                d.atoms_.push_back(values[i]);
                d.weights_.push_back(weights[i]);
            }
        }
        // merged signed weights can cancel exactly
        std::size_t keep = 0;
        for (std::size_t k = 0; k < d.atoms_.size(); ++k) {
            if (d.weights_[k] != 0.0) {
                d.atoms_[keep] = d.atoms_[k];
                d.weights_[keep] = d.weights_[k];
                ++keep;
            }
        }
        d.atoms_.resize(keep);
        d.weights_.resize(keep);

        const double total = std::accumulate(d.weights_.begin(), d.weights_.end(), 0.0);
        if (d.atoms_.empty() || !(total > 0.0) || !std::isfinite(total)) {
            throw EmptySupport("total weight must be positive");
        }
        d.cumulative_.resize(keep);
        double run = 0.0;
        for (std::size_t k = 0; k < keep; ++k) {
            d.weights_[k] /= total;
            if (d.weights_[k] < 0.0) {
                if (!allow_signed) {
                    throw InvalidArgument("negative weight in a probability distribution");
                }
                d.signed_ = true;
            }
            run += d.weights_[k];
            d.cumulative_[k] = run;
        }
        d.cumulative_.back() = 1.0;
        return d;
    }

    std::vector<double> atoms_;
    std::vector<double> weights_;
    std::vector<double> cumulative_;
    bool signed_ = false;
};

/// W1 = integral of |F1 - F2| evaluated exactly over the merged breakpoints.
/// Also valid for signed measures (it is then the L1 distance of the step
/// functions).
inline double w1(const DiscreteDistribution& d1, const DiscreteDistribution& d2) {
    const auto a1 = d1.atoms();
    const auto a2 = d2.atoms();
    const auto c1 = d1.cumulative();
    const auto c2 = d2.cumulative();
    std::size_t i = 0;
    std::size_t j = 0;
    double f1 = 0.0;
    double f2 = 0.0;
    double prev = std::min(a1.front(), a2.front());
    double total = 0.0;
    while (i < a1.size() || j < a2.size()) {
        const double next = (j == a2.size() || (i < a1.size() && a1[i] <= a2[j])) ? a1[i] : a2[j];
        total += std::abs(f1 - f2) * (next - prev);
        while (i < a1.size() && a1[i] == next) {
            f1 = c1[i++];
        }
        while (j < a2.size() && a2[j] == next) {
            f2 = c2[j++];
        }
        prev = next;
    }
    return total;
}

/// W_r through the quantile representation: both quantile functions are
/// piecewise constant between cumulative-weight levels, so the integral over
/// the merged levels is exact.
inline double wr(const DiscreteDistribution& d1, const DiscreteDistribution& d2, double r) {
    if (!(r >= 1.0) || !std::isfinite(r)) {
        throw InvalidOrder("order r must be >= 1");
    }
    d1.require_unsigned("wr");
    d2.require_unsigned("wr");
    const auto a1 = d1.atoms();
    const auto a2 = d2.atoms();
    const auto c1 = d1.cumulative();
    const auto c2 = d2.cumulative();
    std::size_t i = 0;
    std::size_t j = 0;
    double level = 0.0;
    double total = 0.0;
    while (i < a1.size() && j < a2.size()) {
        const double next = std::min(c1[i], c2[j]);
        const double gap = std::abs(a1[i] - a2[j]);
        const double term = r == 1.0 ? gap : std::pow(gap, r);
        total += term * (next - level);
        level = next;
        if (c1[i] == next) {
            ++i;
        }
        if (c2[j] == next) {
            ++j;
        }
    }
    return r == 1.0 ? total : std::pow(total, 1.0 / r);
}

/// Riemann (midpoint) approximation of integral |F1 - F2| over the hull of
/// both supports. Shares nothing with w1 beyond cdf evaluation; used as an
/// independent check.
inline double w1_riemann_oracle(const DiscreteDistribution& d1, const DiscreteDistribution& d2,
                                std::size_t grid_points) {
    if (grid_points < 10) {
        throw InvalidArgument("oracle needs at least 10 grid points");
    }
    const double lo = std::min(d1.min_atom(), d2.min_atom());
    const double hi = std::max(d1.max_atom(), d2.max_atom());
    if (!(hi > lo)) {
        return 0.0;
    }
    const double step = (hi - lo) / static_cast<double>(grid_points);
    double total = 0.0;
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double y = lo + (static_cast<double>(k) + 0.5) * step;
        total += std::abs(d1.cdf(y) - d2.cdf(y));
    }
    return total * step;
}

} // namespace lsnw
