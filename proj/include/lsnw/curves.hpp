#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsnw/error.hpp"

namespace lsnw {

/// Ordered discretization points tau_1 < ... < tau_N in [0, 1], together
/// with the trapezoid quadrature weights they induce.
class Grid {
public:
    explicit Grid(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2) {
            throw InvalidArgument("grid needs at least 2 points");
        }
        if (points_.front() < 0.0 || points_.back() > 1.0) {
            throw InvalidArgument("grid points must lie in [0, 1]");
        }
        for (std::size_t n = 1; n < points_.size(); ++n) {
            if (!(points_[n] > points_[n - 1])) {
                throw InvalidArgument("grid points must be strictly increasing");
            }
        }
        weights_.assign(points_.size(), 0.0);
        for (std::size_t n = 1; n < points_.size(); ++n) {
            const double half = 0.5 * (points_[n] - points_[n - 1]);
            weights_[n - 1] += half;
            weights_[n] += half;
        }
    }

    /// N equispaced points covering [0, 1] inclusive.
    static std::shared_ptr<const Grid> uniform(std::size_t n) {
        if (n < 2) {
            throw InvalidArgument("grid needs at least 2 points");
        }
        std::vector<double> pts(n);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i] = static_cast<double>(i) / static_cast<double>(n - 1);
        }
        pts.back() = 1.0;
        return std::make_shared<const Grid>(std::move(pts));
    }

    std::size_t size() const noexcept { return points_.size(); }
    std::span<const double> points() const noexcept { return points_; }
    std::span<const double> quadrature_weights() const noexcept { return weights_; }

    bool operator==(const Grid& other) const noexcept { return points_ == other.points_; }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline bool same_grid(const GridPtr& a, const GridPtr& b) noexcept {
    return a == b || (a && b && *a == *b);
}

/// A real function on [0, 1] sampled on a shared grid.
class Curve {
public:
    Curve(GridPtr grid, std::vector<double> values)
        : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) {
            throw InvalidArgument("curve needs a grid");
        }
        if (values_.size() != grid_->size()) {
            throw InvalidArgument("curve has " + std::to_string(values_.size()) +
                                  " values for a grid of " + std::to_string(grid_->size()));
        }
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("curve values must be finite");
            }
        }
    }

    const GridPtr& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t n) const noexcept { return values_[n]; }
    std::size_t size() const noexcept { return values_.size(); }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Time-indexed pairs (X_t, Y_t), t = 1..T, all curves on one grid.
class FunctionalSample {
public:
    FunctionalSample(std::vector<Curve> curves, std::vector<double> responses)
        : curves_(std::move(curves)), responses_(std::move(responses)) {
        if (curves_.empty()) {
            throw InvalidArgument("sample must contain at least one observation");
        }
        if (curves_.size() != responses_.size()) {
            throw InvalidArgument("curve count and response count differ");
        }
        for (const auto& c : curves_) {
            if (!same_grid(c.grid(), curves_.front().grid())) {
                throw GridMismatch("all curves in a sample must share one grid");
            }
        }
    }

    std::size_t size() const noexcept { return curves_.size(); }
    const GridPtr& grid() const noexcept { return curves_.front().grid(); }
    const std::vector<Curve>& curves() const noexcept { return curves_; }
    const std::vector<double>& responses() const noexcept { return responses_; }
    const Curve& curve(std::size_t a) const { return curves_.at(a); }
    double response(std::size_t a) const { return responses_.at(a); }

private:
    std::vector<Curve> curves_;
    std::vector<double> responses_;
};

/// Trapezoid rule on the curve's grid.
inline double integrate(const Curve& c) {
    const auto w = c.grid()->quadrature_weights();
    double acc = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        acc += w[n] * c[n];
    }
    return acc;
}

/// Trapezoid integral of (x - y)^2 over the shared grid.
inline double squared_distance(const Curve& x, const Curve& y) {
    if (!same_grid(x.grid(), y.grid())) {
        throw GridMismatch("semi-metric needs curves on the same grid");
    }
    const auto w = x.grid()->quadrature_weights();
    double acc = 0.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double d = x[n] - y[n];
        acc += w[n] * d * d;
    }
    return acc;
}

/// D(x, y) = ||x - y||_2.
inline double semi_metric_l2(const Curve& x, const Curve& y) {
    return std::sqrt(squared_distance(x, y));
}

/// Distances D(x, X_a) from one query curve to every curve in the sample.
inline std::vector<double> distances_to(const FunctionalSample& s, const Curve& x) {
    std::vector<double> d(s.size());
    for (std::size_t a = 0; a < s.size(); ++a) {
        d[a] = semi_metric_l2(x, s.curve(a));
    }
    return d;
}

} // namespace lsnw
