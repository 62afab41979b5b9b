#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "lsnw/error.hpp"

namespace lsnw {

enum class KernelFamily { Uniform, Tricube, Epanechnikov, Gaussian, Silverman };

/// Which direction a kernel smooths: rescaled time (K1) or curve space (K2).
enum class KernelRole { Time, Space };

struct KernelSpec {
    KernelFamily family = KernelFamily::Uniform;
    KernelRole role = KernelRole::Time;

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline constexpr std::array<std::string_view, 5> kKernelNames = {
    "uniform", "tricube", "epanechnikov", "gaussian", "silverman"};

inline std::string_view kernel_name(KernelFamily f) {
    return kKernelNames[static_cast<std::size_t>(f)];
}

inline KernelFamily parse_kernel_family(std::string_view name) {
    for (std::size_t i = 0; i < kKernelNames.size(); ++i) {
        if (kKernelNames[i] == name) {
            return static_cast<KernelFamily>(i);
        }
    }
    throw InvalidArgument("unknown kernel '" + std::string(name) + "'");
}

inline constexpr bool has_compact_support(KernelFamily f) noexcept {
    return f == KernelFamily::Uniform || f == KernelFamily::Tricube ||
           f == KernelFamily::Epanechnikov;
}

inline constexpr bool is_nonnegative(KernelFamily f) noexcept {
    return f != KernelFamily::Silverman;
}

/// Upper bound on |K'| used by the numeric Lipschitz checks. Uniform is
/// discontinuous at |v| = 1 and has no finite constant.
inline double lipschitz_bound(KernelFamily f) noexcept {
    switch (f) {
    case KernelFamily::Uniform: return INFINITY;
    case KernelFamily::Tricube: return 1.7363; // attained at v^3 = 1/4
    case KernelFamily::Epanechnikov: return 1.5;
    case KernelFamily::Gaussian: return 0.2419707245191434; // phi(1)
    case KernelFamily::Silverman: return 0.1613;
    }
    return INFINITY;
}

/// Density-normalized kernel value; every family integrates to 1.
inline double eval(KernelFamily f, double v) noexcept {
    const double a = std::abs(v);
    switch (f) {
    case KernelFamily::Uniform:
        return a <= 1.0 ? 0.5 : 0.0;
    case KernelFamily::Tricube: {
        if (a > 1.0) {
            return 0.0;
        }
        const double t = 1.0 - a * a * a;
        return 70.0 / 81.0 * t * t * t;
    }
    case KernelFamily::Epanechnikov:
        return a <= 1.0 ? 0.75 * (1.0 - v * v) : 0.0;
    case KernelFamily::Gaussian:
        return std::exp(-0.5 * v * v) / std::sqrt(2.0 * std::numbers::pi);
    case KernelFamily::Silverman: {
        const double z = a / std::numbers::sqrt2;
        return 0.5 * std::exp(-z) * std::sin(z + std::numbers::pi / 4.0);
    }
    }
    return 0.0;
}

inline double eval(const KernelSpec& k, double v) noexcept { return eval(k.family, v); }

/// K_h(v) = K(v / h). No 1/h prefactor; the NW ratio cancels it.
inline double scaled_eval(KernelFamily f, double v, double h) {
    if (!(h > 0.0)) {
        throw NonPositiveBandwidth("bandwidth must be > 0, got " + std::to_string(h));
    }
    return eval(f, v / h);
}

inline double scaled_eval(const KernelSpec& k, double v, double h) {
    return scaled_eval(k.family, v, h);
}

/// Silverman oscillates in sign, so it is only accepted for the space role.
inline void validate_role(const KernelSpec& k) {
    if (k.family == KernelFamily::Silverman && k.role == KernelRole::Time) {
        throw InvalidArgument("the sign-changing silverman kernel is only allowed for K2 (space)");
    }
}

} // namespace lsnw
