#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/rng.hpp"

namespace lsnw {

struct RawSeries {
    std::vector<double> values;
    std::string label;
};

/// Consecutive blocks of a scalar series, one curve per block.
struct SegmentedDataset {
    std::vector<Curve> curves;
    std::size_t block_len = 0;
};

/// Grid j / block_len, j = 1..block_len.
inline GridPtr block_grid(std::size_t block_len) {
    if (block_len < 2) {
        throw InvalidArgument("block length must be >= 2");
    }
    std::vector<double> pts(block_len);
    for (std::size_t j = 0; j < block_len; ++j) {
        pts[j] = static_cast<double>(j + 1) / static_cast<double>(block_len);
    }
    pts.back() = 1.0;
    return std::make_shared<const Grid>(std::move(pts));
}

/// Curve t (1-based) holds Z(block_len (t-1) + j), j = 1..block_len. The
/// trailing n mod block_len values are dropped.
inline SegmentedDataset segment(const RawSeries& series, std::size_t block_len) {
    if (block_len < 2) {
        throw InvalidArgument("block length must be >= 2");
    }
    const std::size_t n = series.values.size();
    if (n < 2 * block_len) {
        throw SeriesTooShort("series of " + std::to_string(n) + " values cannot hold two blocks of " +
                             std::to_string(block_len));
    }
    const auto grid = block_grid(block_len);
    SegmentedDataset ds;
    ds.block_len = block_len;
    const std::size_t count = n / block_len;
    ds.curves.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        const auto first = series.values.begin() + static_cast<std::ptrdiff_t>(t * block_len);
        ds.curves.emplace_back(grid, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(block_len)));
    }
    return ds;
}

/// Pairs (X_t = curve t, Y_t = j-th value of curve t+1) for t = 1..count-1.
inline FunctionalSample build_pairs(const SegmentedDataset& ds, std::size_t j) {
    if (j < 1 || j > ds.block_len) {
        throw IndexOutOfBlock("j=" + std::to_string(j) + " outside 1.." + std::to_string(ds.block_len));
    }
    if (ds.curves.size() < 2) {
        throw SeriesTooShort("need at least two curves to build pairs");
    }
    std::vector<Curve> x(ds.curves.begin(), ds.curves.end() - 1);
    std::vector<double> y;
    y.reserve(x.size());
    for (std::size_t t = 1; t < ds.curves.size(); ++t) {
        y.push_back(ds.curves[t][j - 1]);
    }
    return FunctionalSample(std::move(x), std::move(y));
}

/// Y_t + N(0, sigma^2).
template <NormalSource G>
std::vector<double> gaussian_smooth(std::vector<double> responses, double sigma, G& rng) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("sigma must be > 0");
    }
    for (double& y : responses) {
        y += sigma * rng.normal();
    }
    return responses;
}

} // namespace lsnw
