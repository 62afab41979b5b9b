#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/kernels.hpp"
#include "lsnw/nw_estimator.hpp"

namespace lsnw {

/// Strictly increasing positive bandwidth candidates.
class BandwidthGrid {
public:
    explicit BandwidthGrid(std::vector<double> candidates) : candidates_(std::move(candidates)) {
        if (candidates_.empty()) {
            throw InvalidArgument("bandwidth grid is empty");
        }
        for (std::size_t k = 0; k < candidates_.size(); ++k) {
            if (!(candidates_[k] > 0.0) || !std::isfinite(candidates_[k])) {
                throw InvalidArgument("bandwidth candidates must be positive");
            }
            if (k > 0 && !(candidates_[k] > candidates_[k - 1])) {
                throw InvalidArgument("bandwidth candidates must be strictly increasing");
            }
        }
    }

    /// `count` log-spaced values from lo to hi inclusive.
    static BandwidthGrid log_spaced(double lo, double hi, std::size_t count) {
        if (!(lo > 0.0) || !(hi >= lo) || count == 0) {
            throw InvalidArgument("log-spaced grid needs 0 < lo <= hi and count >= 1");
        }
        if (count == 1 || hi == lo) {
            return BandwidthGrid({lo});
        }
        std::vector<double> c(count);
        const double step = std::log(hi / lo) / static_cast<double>(count - 1);
        for (std::size_t k = 0; k < count; ++k) {
            c[k] = lo * std::exp(step * static_cast<double>(k));
        }
        c.front() = lo;
        c.back() = hi;
        return BandwidthGrid(std::move(c));
    }

    std::span<const double> candidates() const noexcept { return candidates_; }
    std::size_t size() const noexcept { return candidates_.size(); }
    double min() const noexcept { return candidates_.front(); }
    double max() const noexcept { return candidates_.back(); }

private:
    std::vector<double> candidates_;
};

enum class CVWeightMode { Global, Local };

inline CVWeightMode parse_cv_mode(std::string_view s) {
    if (s == "global") return CVWeightMode::Global;
    if (s == "local") return CVWeightMode::Local;
    throw InvalidArgument("unknown CV mode '" + std::string(s) + "'");
}

struct CvOptions {
    CVWeightMode mode = CVWeightMode::Global;
    /// A degenerate leave-one-out fit contributes (Y_i - mean(Y))^2, or this
    /// fixed value when set.
    std::optional<double> fixed_penalty;
};

struct CvScore {
    double score = 0.0;
    std::size_t degenerate = 0;
};

struct BandwidthChoice {
    double h_time = 0.0;
    double h_space = 0.0;
    double score = 0.0;
    std::size_t degenerate = 0;
};

/// Linear-interpolation quantile (type 7) of a copy of the data.
inline double quantile_of(std::vector<double> data, double p) {
    if (data.empty()) {
        throw EmptyInput("quantile of an empty set");
    }
    const double pos = p * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto mid = data.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(data.begin(), mid, data.end());
    const double below = *mid;
    if (lo + 1 >= data.size()) {
        return below;
    }
    const double above = *std::min_element(mid + 1, data.end());
    return below + (pos - static_cast<double>(lo)) * (above - below);
}

/// Leave-one-out cross-validation over one sample.
///
/// Pairwise curve distances are computed once. For kernels with compact
/// time support only pairs inside the widest time window ever requested are
/// kept; K2 values are cached per space bandwidth so a sweep over time
/// bandwidths reuses them. Each leave-one-out fit is evaluated at the
/// observation's own point (u = i/T, x = X_i).
class CvEngine {
public:
    /// `max_h_time` bounds the time bandwidths this engine will be asked for.
    CvEngine(const FunctionalSample& s, const EstimatorConfig& templ, double max_h_time)
        : sample_(s), templ_(templ), T_(s.size()) {
        if (T_ < 2) {
            throw SampleTooSmall("cross-validation needs T >= 2");
        }
        validate_role(templ.k1);
        validate_role(templ.k2);
        if (!(max_h_time > 0.0)) {
            throw NonPositiveBandwidth("max time bandwidth must be > 0");
        }
        max_h_time_ = max_h_time;
        if (has_compact_support(templ.k1.family)) {
            const double w = std::floor(max_h_time * static_cast<double>(T_) + 1e-9);
            window_ = std::min(T_ - 1, static_cast<std::size_t>(w));
        } else {
            window_ = T_ - 1;
        }
        const auto& resp = s.responses();
        response_mean_ = std::accumulate(resp.begin(), resp.end(), 0.0) / static_cast<double>(T_);
        compute_distances();
    }

    std::size_t sample_size() const noexcept { return T_; }
    std::size_t window() const noexcept { return window_; }

    /// D(X_i, X_j) for |i - j| <= window(); 0-based indices.
    double distance(std::size_t i, std::size_t j) const {
        if (i == j) {
            return 0.0;
        }
        const std::size_t lo = std::min(i, j);
        const std::size_t off = std::max(i, j) - lo;
        return band_[lo * window_ + (off - 1)];
    }

    CvScore score(double h_time, double h_space, const CvOptions& opt = {}) {
        if (!(h_time > 0.0) || !(h_space > 0.0)) {
            throw NonPositiveBandwidth("CV bandwidth must be > 0");
        }
        if (has_compact_support(templ_.k1.family) && h_time > max_h_time_ * (1.0 + 1e-12)) {
            throw InvalidArgument("time bandwidth exceeds the engine's window");
        }
        const auto& k2 = space_kernel(h_space);
        const auto& y = sample_.responses();
        const double t = static_cast<double>(T_);
        // lags beyond h_time * T (plus one for rounding) have K1 = 0
        std::size_t reach = window_;
        if (has_compact_support(templ_.k1.family)) {
            reach = std::min(window_, static_cast<std::size_t>(std::floor(h_time * t)) + 1);
        }
        // Interior lags use a per-lag table; the two outermost lags are
        // evaluated per pair with the estimator's exact arithmetic so that
        // support edges agree bit for bit.
        std::vector<double> k1_lag(reach + 1);
        for (std::size_t lag = 0; lag <= reach; ++lag) {
            k1_lag[lag] = eval(templ_.k1, static_cast<double>(lag) / t / h_time);
        }
        const std::size_t exact_from = has_compact_support(templ_.k1.family) && reach >= 1 ? reach - 1 : reach + 1;
        CvScore out;
        double total = 0.0;
        for (std::size_t i = 0; i < T_; ++i) {
            double g = 1.0;
            if (opt.mode == CVWeightMode::Local) {
                g = has_neighbor(i, h_space) ? 1.0 : 0.0;
            }
            // same arithmetic as kernel_products so support edges agree
            const double u = static_cast<double>(i + 1) / t;
            double num = 0.0;
            double den = 0.0;
            const std::size_t lo = i >= reach ? i - reach : 0;
            const std::size_t hi = std::min(T_ - 1, i + reach);
            for (std::size_t a = lo; a <= hi; ++a) {
                if (a == i) {
                    continue;
                }
                const std::size_t lag = a > i ? a - i : i - a;
                const double k1 = lag >= exact_from
                                      ? eval(templ_.k1, (u - static_cast<double>(a + 1) / t) / h_time)
                                      : k1_lag[lag];
                if (k1 == 0.0) {
                    continue;
                }
                const double k = k1 * k2[band_index(i, a)];
                num += k * y[a];
                den += k;
            }
            double r2;
            if (den > 0.0 && std::isfinite(den) && std::isfinite(num)) {
                const double r = y[i] - num / den;
                r2 = r * r;
            } else {
                ++out.degenerate;
                const double r = y[i] - response_mean_;
                r2 = opt.fixed_penalty ? *opt.fixed_penalty : r * r;
            }
            total += r2 * g;
        }
        out.score = total / t;
        return out;
    }

    /// Argmin over a single shared bandwidth h = h_time = h_space; ties go
    /// to the smallest h.
    BandwidthChoice select(const BandwidthGrid& grid, const CvOptions& opt = {}) {
        BandwidthChoice best;
        bool found = false;
        bool any_fit = false;
        for (double h : grid.candidates()) {
            const auto sc = score(h, h, opt);
            any_fit = any_fit || sc.degenerate < T_;
            if (!found || sc.score < best.score) {
                best = {h, h, sc.score, sc.degenerate};
                found = true;
            }
        }
        if (!any_fit) {
            throw AllCandidatesDegenerate("every bandwidth candidate left all fits degenerate");
        }
        return best;
    }

    /// Argmin over the product grid (h_time, h_space); ties go to the
    /// smallest h_time, then the smallest h_space.
    BandwidthChoice select_pair(const BandwidthGrid& time_grid, const BandwidthGrid& space_grid,
                                const CvOptions& opt = {}) {
        const std::size_t nt = time_grid.size();
        const std::size_t ns = space_grid.size();
        std::vector<CvScore> scores(nt * ns);
        // space outer: one K2 cache fill per space bandwidth
        for (std::size_t b = 0; b < ns; ++b) {
            for (std::size_t a = 0; a < nt; ++a) {
                scores[a * ns + b] = score(time_grid.candidates()[a], space_grid.candidates()[b], opt);
            }
        }
        BandwidthChoice best;
        bool found = false;
        bool any_fit = false;
        for (std::size_t a = 0; a < nt; ++a) {
            for (std::size_t b = 0; b < ns; ++b) {
                const auto& sc = scores[a * ns + b];
                any_fit = any_fit || sc.degenerate < T_;
                if (!found || sc.score < best.score) {
                    best = {time_grid.candidates()[a], space_grid.candidates()[b], sc.score, sc.degenerate};
                    found = true;
                }
            }
        }
        if (!any_fit) {
            throw AllCandidatesDegenerate("every bandwidth candidate left all fits degenerate");
        }
        return best;
    }

    /// Quantile of the cached pairwise distances.
    double distance_quantile(double p) const {
        std::vector<double> d;
        d.reserve(band_.size());
        for (double v : band_) {
            if (!std::isnan(v)) {
                d.push_back(v);
            }
        }
        return quantile_of(std::move(d), p);
    }

private:
    std::size_t band_index(std::size_t i, std::size_t a) const noexcept {
        const std::size_t lo = std::min(i, a);
        return lo * window_ + (std::max(i, a) - lo - 1);
    }

    void compute_distances() {
        band_.assign(T_ * window_, std::numeric_limits<double>::quiet_NaN());
        const auto& curves = sample_.curves();
        for (std::size_t i = 0; i < T_; ++i) {
            const std::size_t hi = std::min(T_ - 1, i + window_);
            for (std::size_t a = i + 1; a <= hi; ++a) {
                band_[i * window_ + (a - i - 1)] = semi_metric_l2(curves[i], curves[a]);
            }
        }
    }

    const std::vector<double>& space_kernel(double h_space) {
        if (cached_h_space_ != h_space) {
            k2_cache_.resize(band_.size());
            for (std::size_t n = 0; n < band_.size(); ++n) {
                k2_cache_[n] = std::isnan(band_[n]) ? 0.0 : eval(templ_.k2, band_[n] / h_space);
            }
            cached_h_space_ = h_space;
        }
        return k2_cache_;
    }

    bool has_neighbor(std::size_t i, double h) const {
        for (std::size_t j = 0; j < T_; ++j) {
            if (j == i) {
                continue;
            }
            const std::size_t off = j > i ? j - i : i - j;
            const double d = off <= window_ ? distance(i, j) : semi_metric_l2(sample_.curve(i), sample_.curve(j));
            if (d <= h) {
                return true;
            }
        }
        return false;
    }

    const FunctionalSample& sample_;
    EstimatorConfig templ_;
    std::size_t T_;
    std::size_t window_ = 0;
    double max_h_time_ = 0.0;
    double response_mean_ = 0.0;
    std::vector<double> band_;
    std::vector<double> k2_cache_;
    double cached_h_space_ = std::numeric_limits<double>::quiet_NaN();
};

/// CV(h) = (1/T) sum_i (Y_i - m_hat_{-i}(i/T, X_i))^2 g(X_i) with a shared
/// bandwidth h for both kernels.
inline CvScore cv_score(const FunctionalSample& s, double h, const EstimatorConfig& templ,
                        const CvOptions& opt = {}) {
    CvEngine engine(s, templ, h);
    return engine.score(h, h, opt);
}

inline BandwidthChoice select_bandwidth(const FunctionalSample& s, const BandwidthGrid& grid,
                                        const EstimatorConfig& templ, const CvOptions& opt = {}) {
    CvEngine engine(s, templ, grid.max());
    return engine.select(grid, opt);
}

/// Log-spaced default candidates: the 5th..95th percentile range of pairwise
/// curve distances intersected with the time range [1/T, min(max_h, 0.5)]. An empty
/// intersection falls back to the time range.
inline BandwidthGrid default_grid(const FunctionalSample& s, std::size_t count = 20, double max_h = 0.5) {
    const std::size_t T = s.size();
    std::vector<double> d;
    d.reserve(T * (T - 1) / 2);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = i + 1; j < T; ++j) {
            d.push_back(semi_metric_l2(s.curve(i), s.curve(j)));
        }
    }
    const double t_lo = 1.0 / static_cast<double>(T);
    const double t_hi = std::min(max_h, 0.5);
    if (d.empty()) {
        return BandwidthGrid::log_spaced(std::min(t_lo, t_hi), t_hi, count);
    }
    const double lo = std::max(quantile_of(d, 0.05), t_lo);
    const double hi = std::min(quantile_of(d, 0.95), t_hi);
    if (!(lo <= hi) || !(lo > 0.0)) {
        return BandwidthGrid::log_spaced(std::min(t_lo, t_hi), t_hi, count);
    }
    return BandwidthGrid::log_spaced(lo, hi, count);
}

} // namespace lsnw
