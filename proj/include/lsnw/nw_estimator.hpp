#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/kernels.hpp"
#include "lsnw/wasserstein.hpp"

namespace lsnw {

/// Kernel pair and bandwidths of the two-kernel Nadaraya-Watson estimator.
struct EstimatorConfig {
    KernelSpec k1{KernelFamily::Uniform, KernelRole::Time};
    KernelSpec k2{KernelFamily::Gaussian, KernelRole::Space};
    double h_time = 0.1;
    double h_space = 0.1;

    /// Single bandwidth shared by both kernels.
    static EstimatorConfig shared(KernelFamily time, KernelFamily space, double h) {
        return {{time, KernelRole::Time}, {space, KernelRole::Space}, h, h};
    }

    EstimatorConfig with_bandwidths(double ht, double hs) const {
        EstimatorConfig c = *this;
        c.h_time = ht;
        c.h_space = hs;
        return c;
    }

    bool nonnegative_kernels() const noexcept {
        return is_nonnegative(k1.family) && is_nonnegative(k2.family);
    }

    void validate() const {
        if (!(h_time > 0.0) || !(h_space > 0.0)) {
            throw NonPositiveBandwidth("h_time and h_space must be > 0");
        }
        validate_role(k1);
        validate_role(k2);
    }
};

/// Normalized weights omega_a(u, x) for a = 1..T (stored 0-based).
struct NWWeights {
    std::vector<double> weights;
    double query_u = 0.0;
    std::optional<Curve> query_x;
};

namespace detail {

inline void check_query_time(double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw InvalidArgument("query time u must lie in [0, 1], got " + std::to_string(u));
    }
}

inline void normalize_or_throw(std::vector<double>& k, double u) {
    double sum = 0.0;
    for (double v : k) {
        sum += v;
    }
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        throw DegenerateNeighborhood("kernel mass " + std::to_string(sum) + " at u=" +
                                     std::to_string(u) +
                                     "; no observation inside the kernel support");
    }
    for (double& v : k) {
        v /= sum;
    }
}

} // namespace detail

/// Unnormalized products K1((u - a/T)/h_time) * K2(D_a / h_space) for
/// a = 1..T, given the distances D_a = D(x, X_a). The entry at
/// `leave_out` (0-based) is forced to zero.
inline std::vector<double> kernel_products(double u, std::span<const double> distances,
                                           const EstimatorConfig& cfg,
                                           std::optional<std::size_t> leave_out = std::nullopt) {
    cfg.validate();
    detail::check_query_time(u);
    const std::size_t T = distances.size();
    const double t = static_cast<double>(T);
    std::vector<double> k(T);
    for (std::size_t a = 0; a < T; ++a) {
        const double k1 = eval(cfg.k1, (u - static_cast<double>(a + 1) / t) / cfg.h_time);
        k[a] = k1 == 0.0 ? 0.0 : k1 * eval(cfg.k2, distances[a] / cfg.h_space);
    }
    if (leave_out) {
        k.at(*leave_out) = 0.0;
    }
    return k;
}

/// NW weights from precomputed distances.
inline std::vector<double> weights_from_distances(double u, std::span<const double> distances,
                                                  const EstimatorConfig& cfg,
                                                  std::optional<std::size_t> leave_out = std::nullopt) {
    auto k = kernel_products(u, distances, cfg, leave_out);
    detail::normalize_or_throw(k, u);
    return k;
}

inline NWWeights nw_weights(const FunctionalSample& s, double u, const Curve& x,
                            const EstimatorConfig& cfg) {
    const auto d = distances_to(s, x);
    return {weights_from_distances(u, d, cfg), u, x};
}

/// Weighted step distribution with atoms Y_a. Signed when K2 produced
/// negative weights.
inline DiscreteDistribution distribution_from_weights(std::span<const double> responses,
                                                      std::span<const double> weights) {
    bool negative = false;
    for (double w : weights) {
        negative = negative || w < 0.0;
    }
    return negative ? DiscreteDistribution::from_signed_atoms(responses, weights)
                    : DiscreteDistribution::from_atoms(responses, weights);
}

/// Estimated conditional distribution of Y given (u, x).
inline DiscreteDistribution conditional_cdf(const FunctionalSample& s, double u, const Curve& x,
                                            const EstimatorConfig& cfg) {
    const auto w = nw_weights(s, u, x, cfg);
    return distribution_from_weights(s.responses(), w.weights);
}

inline double weighted_mean(std::span<const double> responses, std::span<const double> weights) {
    double m = 0.0;
    for (std::size_t a = 0; a < responses.size(); ++a) {
        m += weights[a] * responses[a];
    }
    return m;
}

/// m_hat(u, x) = sum_a omega_a Y_a.
inline double conditional_mean(const FunctionalSample& s, double u, const Curve& x,
                               const EstimatorConfig& cfg) {
    const auto w = nw_weights(s, u, x, cfg);
    return weighted_mean(s.responses(), w.weights);
}

/// Conditional mean with observation `i` (0-based) removed and the
/// remaining T - 1 weights renormalized.
inline double loo_conditional_mean(const FunctionalSample& s, std::size_t i, double u,
                                   const Curve& x, const EstimatorConfig& cfg) {
    if (s.size() < 2) {
        throw SampleTooSmall("leave-one-out needs T >= 2");
    }
    if (i >= s.size()) {
        throw InvalidArgument("leave-out index out of range");
    }
    const auto d = distances_to(s, x);
    const auto w = weights_from_distances(u, d, cfg, i);
    return weighted_mean(s.responses(), w);
}

} // namespace lsnw
