#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/rng.hpp"

namespace lsnw {

enum class Process { TvFAR1, TvFAR2 };

inline Process parse_process(std::string_view s) {
    if (s == "tvfar1") return Process::TvFAR1;
    if (s == "tvfar2") return Process::TvFAR2;
    throw InvalidArgument("unknown process '" + std::string(s) + "'");
}

inline std::string_view process_name(Process p) { return p == Process::TvFAR1 ? "tvfar1" : "tvfar2"; }

struct SimConfig {
    std::size_t T = 100;
    std::size_t N = 100;
    std::size_t J = 7;
    Process process = Process::TvFAR1;
    std::size_t burn_in = 50;
    std::uint64_t seed = 0;
    /// Reuse one standard-normal operator draw for the whole replication
    /// (rescaled by the u-dependent standard deviations) instead of a fresh
    /// draw per time step.
    bool freeze_operators = false;

    void validate() const {
        if (T < 1 || N < 2 || J < 1) {
            throw InvalidArgument("simulation needs T >= 1, N >= 2, J >= 1");
        }
    }
};

using CoefVector = Eigen::VectorXd;

/// psi_j(tau) = sqrt(2) sin(pi (j + 1) tau) for odd j, sqrt(2) cos(pi j tau) for even j.
inline double fourier_basis(std::size_t j, double tau) {
    if (j < 1) {
        throw InvalidArgument("basis index starts at 1");
    }
    const double pi = std::numbers::pi;
    return std::numbers::sqrt2 * (j % 2 == 1 ? std::sin(pi * static_cast<double>(j + 1) * tau)
                                             : std::cos(pi * static_cast<double>(j) * tau));
}

/// Rows psi_1..psi_J evaluated on the grid.
inline Eigen::MatrixXd basis_matrix(const Grid& grid, std::size_t J) {
    Eigen::MatrixXd psi(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(grid.size()));
    const auto pts = grid.points();
    for (std::size_t j = 1; j <= J; ++j) {
        for (std::size_t n = 0; n < grid.size(); ++n) {
            psi(static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(n)) = fourier_basis(j, pts[n]);
        }
    }
    return psi;
}

/// Largest singular value.
inline double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) {
        throw InvalidArgument("spectral_norm expects a square matrix");
    }
    if (a.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()(0);
}

namespace detail {

template <NormalSource G>
Eigen::MatrixXd standard_normal_matrix(std::size_t J, G& rng) {
    const auto n = static_cast<Eigen::Index>(J);
    Eigen::MatrixXd z(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            z(i, j) = rng.normal();
        }
    }
    return z;
}

/// Entry standard deviations of A_u for tvFAR(1): u i^-6 + (1-u) e^{-i-j}.
inline Eigen::MatrixXd tvfar1_sd(double u, std::size_t J) {
    const auto n = static_cast<Eigen::Index>(J);
    Eigen::MatrixXd sd(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double fi = static_cast<double>(i + 1);
            const double fj = static_cast<double>(j + 1);
            sd(i, j) = std::sqrt(u / std::pow(fi, 6) + (1.0 - u) * std::exp(-fi - fj));
        }
    }
    return sd;
}

inline Eigen::MatrixXd tvfar2_sd1(std::size_t J) {
    const auto n = static_cast<Eigen::Index>(J);
    Eigen::MatrixXd sd(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            sd(i, j) = std::sqrt(std::exp(-(static_cast<double>(i + 1) - 3.0) -
                                          (static_cast<double>(j + 1) - 3.0)));
        }
    }
    return sd;
}

inline Eigen::MatrixXd tvfar2_sd2(std::size_t J) {
    const auto n = static_cast<Eigen::Index>(J);
    Eigen::MatrixXd sd(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            sd(i, j) = std::sqrt(1.0 / (std::pow(static_cast<double>(i + 1), 4) + static_cast<double>(j + 1)));
        }
    }
    return sd;
}

inline Eigen::MatrixXd normalize_to(const Eigen::MatrixXd& a, double coefficient) {
    const double norm = spectral_norm(a);
    if (!(norm > 0.0)) {
        throw DegenerateDraw("operator draw has zero spectral norm");
    }
    return (coefficient / norm) * a;
}

/// coefficient * A / ||A|| with A = sd .* Z; a zero-norm draw is redrawn once.
template <NormalSource G>
Eigen::MatrixXd draw_normalized(const Eigen::MatrixXd& sd, double coefficient, G& rng) {
    const auto J = static_cast<std::size_t>(sd.rows());
    for (int attempt = 0; attempt < 2; ++attempt) {
        const Eigen::MatrixXd a = sd.cwiseProduct(standard_normal_matrix(J, rng));
        const double norm = spectral_norm(a);
        if (norm > 0.0) {
            return (coefficient / norm) * a;
        }
    }
    throw DegenerateDraw("operator draw has zero spectral norm twice");
}

inline double tvfar2_lag1_coefficient(double u) {
    return 0.4 * std::cos(1.5 - std::cos(std::numbers::pi * u));
}

} // namespace detail

/// B_u = 0.4 A_u / ||A_u|| with independent centered Gaussian entries of
/// variance u i^-6 + (1 - u) e^{-i-j}.
template <NormalSource G>
Eigen::MatrixXd draw_operator_tvfar1(double u, std::size_t J, G& rng) {
    return detail::draw_normalized(detail::tvfar1_sd(u, J), 0.4, rng);
}

/// (B_{u,1}, B_{u,2}) with B_1 = 0.4 cos(1.5 - cos(pi u)) A_1 / ||A_1||,
/// B_2 = -0.5 A_2 / ||A_2||.
template <NormalSource G>
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> draw_operators_tvfar2(double u, std::size_t J, G& rng) {
    auto b1 = detail::draw_normalized(detail::tvfar2_sd1(J), detail::tvfar2_lag1_coefficient(u), rng);
    auto b2 = detail::draw_normalized(detail::tvfar2_sd2(J), -0.5, rng);
    return {std::move(b1), std::move(b2)};
}

/// Innovation coordinates with Var(coef_j) = (pi (j - 1.5))^-2.
template <NormalSource G>
CoefVector draw_innovation(std::size_t J, G& rng) {
    CoefVector eta(static_cast<Eigen::Index>(J));
    for (std::size_t j = 1; j <= J; ++j) {
        const double sd = 1.0 / std::abs(std::numbers::pi * (static_cast<double>(j) - 1.5));
        eta(static_cast<Eigen::Index>(j - 1)) = sd * rng.normal();
    }
    return eta;
}

/// Coefficient-space recursion. Burn-in steps run at u = 0 from zero
/// vectors and are discarded; step t = 1..T uses u = t/T.
template <NormalSource G>
std::vector<CoefVector> simulate_coefficients(const SimConfig& cfg, G& rng) {
    cfg.validate();
    const auto J = static_cast<Eigen::Index>(cfg.J);
    CoefVector prev1 = CoefVector::Zero(J);
    CoefVector prev2 = CoefVector::Zero(J);
    std::vector<CoefVector> out;
    out.reserve(cfg.T);

    Eigen::MatrixXd frozen1;
    Eigen::MatrixXd frozen2;
    if (cfg.freeze_operators) {
        frozen1 = detail::standard_normal_matrix(cfg.J, rng);
        frozen2 = detail::standard_normal_matrix(cfg.J, rng);
    }
    const double T = static_cast<double>(cfg.T);
    const std::size_t steps = cfg.burn_in + cfg.T;
    for (std::size_t step = 0; step < steps; ++step) {
        const double u = step < cfg.burn_in ? 0.0 : static_cast<double>(step - cfg.burn_in + 1) / T;
        CoefVector next;
        if (cfg.process == Process::TvFAR1) {
            const Eigen::MatrixXd b =
                cfg.freeze_operators
                    ? detail::normalize_to(detail::tvfar1_sd(u, cfg.J).cwiseProduct(frozen1), 0.4)
                    : draw_operator_tvfar1(u, cfg.J, rng);
            next = b * prev1;
        } else {
            Eigen::MatrixXd b1;
            Eigen::MatrixXd b2;
            if (cfg.freeze_operators) {
                b1 = detail::normalize_to(detail::tvfar2_sd1(cfg.J).cwiseProduct(frozen1),
                                          detail::tvfar2_lag1_coefficient(u));
                b2 = detail::normalize_to(detail::tvfar2_sd2(cfg.J).cwiseProduct(frozen2), -0.5);
            } else {
                std::tie(b1, b2) = draw_operators_tvfar2(u, cfg.J, rng);
            }
            next = b1 * prev1 + b2 * prev2;
        }
        next += draw_innovation(cfg.J, rng);
        prev2 = std::move(prev1);
        prev1 = next;
        if (step >= cfg.burn_in) {
            out.push_back(std::move(next));
        }
    }
    return out;
}

/// Curves sum_j coef_j psi_j(tau_n) on the grid.
inline std::vector<Curve> synthesize_curves(const std::vector<CoefVector>& coefs, const GridPtr& grid) {
    std::vector<Curve> curves;
    curves.reserve(coefs.size());
    if (coefs.empty()) {
        return curves;
    }
    const Eigen::MatrixXd psi = basis_matrix(*grid, static_cast<std::size_t>(coefs.front().size()));
    for (const auto& c : coefs) {
        const Eigen::VectorXd v = psi.transpose() * c;
        curves.emplace_back(grid, std::vector<double>(v.data(), v.data() + v.size()));
    }
    return curves;
}

template <NormalSource G>
std::vector<Curve> simulate_covariates(const SimConfig& cfg, G& rng) {
    return synthesize_curves(simulate_coefficients(cfg, rng), Grid::uniform(cfg.N));
}

/// m*(u, x) = 2.5 sin(2 pi u) integral_0^1 cos(pi x(tau)) dtau.
inline double true_mean(double u, const Curve& x) {
    std::vector<double> c(x.size());
    for (std::size_t n = 0; n < x.size(); ++n) {
        c[n] = std::cos(std::numbers::pi * x[n]);
    }
    return 2.5 * std::sin(2.0 * std::numbers::pi * u) * integrate(Curve(x.grid(), std::move(c)));
}

/// Y_t = m*(t/T, X_t) + eps_t with standard normal eps_t.
template <NormalSource G>
std::vector<double> generate_responses(const std::vector<Curve>& curves, G& rng) {
    if (curves.empty()) {
        throw EmptyInput("no curves to generate responses for");
    }
    const double T = static_cast<double>(curves.size());
    std::vector<double> y(curves.size());
    for (std::size_t t = 0; t < curves.size(); ++t) {
        y[t] = true_mean(static_cast<double>(t + 1) / T, curves[t]) + rng.normal();
    }
    return y;
}

/// Covariates and responses of one replication.
template <NormalSource G>
FunctionalSample simulate_sample(const SimConfig& cfg, G& rng) {
    auto curves = simulate_covariates(cfg, rng);
    auto y = generate_responses(curves, rng);
    return FunctionalSample(std::move(curves), std::move(y));
}

} // namespace lsnw
