#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsnw/bandwidth.hpp"
#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/nw_estimator.hpp"
#include "lsnw/parallel.hpp"
#include "lsnw/rng.hpp"
#include "lsnw/simulate.hpp"
#include "lsnw/wasserstein.hpp"

namespace lsnw {

/// Equal-weight mixture of L distributions; its CDF is the pointwise
/// average of the inputs' CDFs.
inline DiscreteDistribution average_cdfs(const std::vector<DiscreteDistribution>& dists) {
    if (dists.empty()) {
        throw EmptyInput("nothing to average");
    }
    std::size_t total = 0;
    bool negative = false;
    for (const auto& d : dists) {
        total += d.size();
        negative = negative || d.is_signed();
    }
    std::vector<double> atoms;
    std::vector<double> weights;
    atoms.reserve(total);
    weights.reserve(total);
    const double scale = 1.0 / static_cast<double>(dists.size());
    for (const auto& d : dists) {
        atoms.insert(atoms.end(), d.atoms().begin(), d.atoms().end());
        for (double w : d.weights()) {
            weights.push_back(w * scale);
        }
    }
    return negative ? DiscreteDistribution::from_signed_atoms(atoms, weights)
                    : DiscreteDistribution::from_atoms(atoms, weights);
}

/// Equal mass on every observed value.
inline DiscreteDistribution empirical_cdf(std::span<const double> values) {
    return DiscreteDistribution::uniform_over(values);
}

enum class BandwidthMode {
    Fixed,    ///< the estimator's configured (h_time, h_space)
    CvShared, ///< cross-validated single h for both kernels
    CvPair,   ///< cross-validated (h_time, h_space) over a product grid
};

inline BandwidthMode parse_bandwidth_mode(std::string_view s) {
    if (s == "fixed") return BandwidthMode::Fixed;
    if (s == "cv") return BandwidthMode::CvShared;
    if (s == "cv-pair") return BandwidthMode::CvPair;
    throw InvalidArgument("unknown bandwidth mode '" + std::string(s) + "'");
}

inline std::string_view bandwidth_mode_name(BandwidthMode m) {
    switch (m) {
    case BandwidthMode::Fixed: return "fixed";
    case BandwidthMode::CvShared: return "cv";
    case BandwidthMode::CvPair: return "cv-pair";
    }
    return "?";
}

/// When cross-validation runs inside a Monte Carlo run.
enum class CvScope {
    PerReplication, ///< on every replication's own data
    PerRun,         ///< once per run, on a pilot replication
};

struct BandwidthPolicy {
    BandwidthMode mode = BandwidthMode::CvPair;
    CvScope scope = CvScope::PerReplication;
    std::size_t shared_candidates = 20;
    std::size_t time_candidates = 8;
    std::size_t space_candidates = 6;
    /// Smallest time bandwidth, in observations: h_time >= min_time_neighbors / T.
    double min_time_neighbors = 5.0;
    /// Explicit candidate lists override the data-driven defaults.
    std::optional<BandwidthGrid> shared_grid;
    std::optional<BandwidthGrid> time_grid;
    std::optional<BandwidthGrid> space_grid;
    CvOptions cv;
};

/// Largest time bandwidth keeping u inside I_h = [C1 h, 1 - C1 h] (C1 = 1
/// for compact time kernels; unrestricted otherwise, capped at 0.5).
inline double max_admissible_h_time(const EstimatorConfig& est, double u) {
    if (has_compact_support(est.k1.family)) {
        return std::min({u, 1.0 - u, 0.5});
    }
    return 0.5;
}

inline bool inside_interior(const EstimatorConfig& est, double u, double h_time) {
    if (!has_compact_support(est.k1.family)) {
        return u >= 0.0 && u <= 1.0;
    }
    constexpr double slack = 1e-12;
    return u >= h_time - slack && u <= 1.0 - h_time + slack;
}

namespace detail {

inline std::vector<double> clip_candidates(std::span<const double> c, double lo, double hi) {
    std::vector<double> out;
    for (double h : c) {
        if (h >= lo && h <= hi) {
            out.push_back(h);
        }
    }
    return out;
}

} // namespace detail

/// Bandwidth used at query time u on `sample` according to the policy.
inline BandwidthChoice choose_bandwidth(const FunctionalSample& sample, double u,
                                        const EstimatorConfig& est, const BandwidthPolicy& policy) {
    const double h_cap = max_admissible_h_time(est, u);
    if (!(h_cap > 0.0)) {
        throw InvalidArgument("query time u=" + std::to_string(u) + " leaves no admissible bandwidth");
    }
    switch (policy.mode) {
    case BandwidthMode::Fixed:
        if (!inside_interior(est, u, est.h_time)) {
            throw InvalidArgument("u=" + std::to_string(u) + " is outside I_h for h_time=" +
                                  std::to_string(est.h_time));
        }
        return {est.h_time, est.h_space, 0.0, 0};
    case BandwidthMode::CvShared: {
        std::vector<double> cands;
        if (policy.shared_grid) {
            cands = detail::clip_candidates(policy.shared_grid->candidates(), 0.0, h_cap);
        } else {
            const auto g = default_grid(sample, policy.shared_candidates, h_cap);
            cands = detail::clip_candidates(g.candidates(), 0.0, h_cap);
        }
        if (cands.empty()) {
            throw InvalidArgument("no shared bandwidth candidate keeps u inside I_h");
        }
        const BandwidthGrid grid(std::move(cands));
        CvEngine engine(sample, est, grid.max());
        return engine.select(grid, policy.cv);
    }
    case BandwidthMode::CvPair: {
        const double T = static_cast<double>(sample.size());
        BandwidthGrid tgrid = [&] {
            if (policy.time_grid) {
                auto c = detail::clip_candidates(policy.time_grid->candidates(), 0.0, h_cap);
                if (c.empty()) {
                    throw InvalidArgument("no time bandwidth candidate keeps u inside I_h");
                }
                return BandwidthGrid(std::move(c));
            }
            const double lo = std::min(h_cap, policy.min_time_neighbors / T);
            return BandwidthGrid::log_spaced(lo, h_cap, policy.time_candidates);
        }();
        CvEngine engine(sample, est, tgrid.max());
        BandwidthGrid sgrid = policy.space_grid ? *policy.space_grid : [&] {
            const double lo = engine.distance_quantile(0.05);
            const double hi = engine.distance_quantile(0.95);
            if (!(lo > 0.0)) {
                throw InvalidArgument("curves are too close to build a space bandwidth grid");
            }
            return BandwidthGrid::log_spaced(lo, std::max(lo, hi), policy.space_candidates);
        }();
        return engine.select_pair(tgrid, sgrid, policy.cv);
    }
    }
    throw InvalidArgument("unhandled bandwidth mode");
}

/// Rescaled-time index t with t/T closest to u, within 1..T.
inline std::size_t time_index_for(double u, std::size_t T) {
    const double t = std::round(u * static_cast<double>(T));
    return static_cast<std::size_t>(std::clamp(t, 1.0, static_cast<double>(T)));
}

struct AlgorithmResult {
    double w1 = 0.0;
    /// Replications whose NW weights were degenerate (excluded from the
    /// average).
    std::size_t degenerate = 0;
    double mean_h_time = 0.0;
    double mean_h_space = 0.0;
    /// True when the averaged estimate carried negative mass.
    bool signed_estimate = false;
};

/// Pieces shared by both algorithms once every replication has produced its
/// responses and (when not degenerate) its NW weights.
struct Replicate {
    std::vector<double> responses;
    std::vector<double> weights; ///< empty when degenerate
    double y_at_t = 0.0;
    double h_time = 0.0;
    double h_space = 0.0;
};

/// Averages the NW distributions of the non-degenerate replicates and
/// compares them with the empirical distribution of Y_t over all
/// replicates.
inline AlgorithmResult compare_with_empirical(const std::vector<Replicate>& reps) {
    std::vector<DiscreteDistribution> estimates;
    std::vector<double> observed;
    AlgorithmResult out;
    double ht = 0.0;
    double hs = 0.0;
    for (const auto& r : reps) {
        observed.push_back(r.y_at_t);
        if (r.weights.empty()) {
            ++out.degenerate;
            continue;
        }
        estimates.push_back(distribution_from_weights(r.responses, r.weights));
        ht += r.h_time;
        hs += r.h_space;
    }
    if (estimates.empty()) {
        throw DegenerateNeighborhood("every replication was degenerate");
    }
    const auto avg = average_cdfs(estimates);
    out.w1 = w1(avg, empirical_cdf(observed));
    out.signed_estimate = avg.is_signed();
    out.mean_h_time = ht / static_cast<double>(estimates.size());
    out.mean_h_space = hs / static_cast<double>(estimates.size());
    return out;
}

/// Synthetic experiment settings.
struct ExperimentConfig {
    std::size_t L = 100;
    std::size_t mc_runs = 10;
    std::vector<std::size_t> T_list{250, 500, 1000, 2000};
    std::vector<double> u_list{0.25};
    EstimatorConfig estimator = EstimatorConfig::shared(KernelFamily::Uniform, KernelFamily::Silverman, 0.1);
    BandwidthPolicy bandwidth;
    SimConfig sim;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        if (L < 1 || mc_runs < 1) {
            throw InvalidArgument("L and mc_runs must be >= 1");
        }
        if (T_list.empty() || u_list.empty()) {
            throw InvalidArgument("T_list and u_list must be nonempty");
        }
        for (std::size_t T : T_list) {
            if (T < 2) {
                throw InvalidArgument("every T must be >= 2");
            }
        }
        validate_role(estimator.k1);
        validate_role(estimator.k2);
        for (double u : u_list) {
            if (!(u > 0.0 && u < 1.0)) {
                throw InvalidArgument("query times must lie in (0, 1)");
            }
            if (bandwidth.mode == BandwidthMode::Fixed && !inside_interior(estimator, u, estimator.h_time)) {
                throw InvalidArgument("u=" + std::to_string(u) + " is outside I_h = [h, 1-h]");
            }
        }
    }
};

/// Stream tags; fixed so outputs never depend on scheduling.
inline constexpr std::uint64_t kPilotTag = 0xB0D1ULL;

/// Replication experiment with a caller-supplied generator
/// make_sample(l) -> FunctionalSample of size T.
template <class MakeSample>
AlgorithmResult run_algorithm1_with(std::size_t T, std::size_t t_index, std::size_t L,
                                    const EstimatorConfig& est, const BandwidthPolicy& policy,
                                    std::size_t threads, MakeSample&& make_sample,
                                    std::optional<BandwidthChoice> preset = std::nullopt) {
    if (t_index < 1 || t_index > T) {
        throw InvalidArgument("time index must lie in 1..T");
    }
    const double u = static_cast<double>(t_index) / static_cast<double>(T);
    std::vector<Replicate> reps(L);
    parallel_for(L, threads, [&](std::size_t l) {
        const FunctionalSample sample = make_sample(l);
        if (sample.size() != T) {
            throw InvalidArgument("replication generator returned the wrong sample size");
        }
        Replicate& r = reps[l];
        r.responses = sample.responses();
        r.y_at_t = sample.response(t_index - 1);
        const BandwidthChoice bw = preset ? *preset : choose_bandwidth(sample, u, est, policy);
        r.h_time = bw.h_time;
        r.h_space = bw.h_space;
        const auto d = distances_to(sample, sample.curve(t_index - 1));
        try {
            r.weights = weights_from_distances(u, d, est.with_bandwidths(bw.h_time, bw.h_space));
        } catch (const DegenerateNeighborhood&) {
            r.weights.clear();
        }
    });
    return compare_with_empirical(reps);
}

/// One replication experiment on the simulated process: L replications,
/// NW conditional distribution at u = t/T with x = that replication's own
/// X_t, averaged and compared to the empirical law of Y_t.
inline AlgorithmResult run_algorithm1(const ExperimentConfig& cfg, std::size_t T, std::size_t t_index,
                                      std::size_t run = 0) {
    SimConfig sim = cfg.sim;
    sim.T = T;
    std::optional<BandwidthChoice> preset;
    const double u = static_cast<double>(t_index) / static_cast<double>(T);
    if (cfg.bandwidth.mode != BandwidthMode::Fixed && cfg.bandwidth.scope == CvScope::PerRun) {
        Rng rng = Rng::stream(cfg.seed, {T, t_index, run, kPilotTag});
        preset = choose_bandwidth(simulate_sample(sim, rng), u, cfg.estimator, cfg.bandwidth);
    }
    return run_algorithm1_with(T, t_index, cfg.L, cfg.estimator, cfg.bandwidth, cfg.threads,
                               [&](std::size_t l) {
                                   Rng rng = Rng::stream(cfg.seed, {T, t_index, run, l});
                                   return simulate_sample(sim, rng);
                               },
                               preset);
}

/// Smoothed-response experiment: Gaussian-perturbed replicates Y_a + Z_a^(l), Z ~ N(0, sigma^2),
/// of one fixed dataset. NW weights do not depend on the responses, so they
/// are computed once unless `recompute_weights` is set.
template <NormalSource G>
AlgorithmResult run_algorithm2_with(const FunctionalSample& data, std::size_t t_index, double sigma,
                                    std::size_t L, const EstimatorConfig& est_with_h,
                                    const std::function<G(std::size_t)>& noise_for,
                                    std::size_t threads = 1, bool recompute_weights = false) {
    if (!(sigma > 0.0)) {
        throw InvalidArgument("sigma must be > 0");
    }
    const std::size_t T = data.size();
    if (t_index < 1 || t_index > T) {
        throw InvalidArgument("time index must lie in 1..T");
    }
    const double u = static_cast<double>(t_index) / static_cast<double>(T);
    const auto d = distances_to(data, data.curve(t_index - 1));
    std::vector<double> shared_weights;
    bool degenerate = false;
    try {
        shared_weights = weights_from_distances(u, d, est_with_h);
    } catch (const DegenerateNeighborhood&) {
        degenerate = true;
    }
    std::vector<Replicate> reps(L);
    parallel_for(L, threads, [&](std::size_t l) {
        G noise = noise_for(l);
        Replicate& r = reps[l];
        r.responses = data.responses();
        for (double& y : r.responses) {
            y += sigma * noise.normal();
        }
        r.y_at_t = r.responses[t_index - 1];
        r.h_time = est_with_h.h_time;
        r.h_space = est_with_h.h_space;
        if (degenerate) {
            return;
        }
        r.weights = recompute_weights ? weights_from_distances(u, distances_to(data, data.curve(t_index - 1)), est_with_h)
                                      : shared_weights;
    });
    return compare_with_empirical(reps);
}

inline AlgorithmResult run_algorithm2(const FunctionalSample& data, std::size_t t_index, double sigma,
                                      std::size_t L, const EstimatorConfig& est_with_h, std::uint64_t seed,
                                      std::size_t run = 0, std::size_t threads = 1) {
    const std::function<Rng(std::size_t)> noise = [&](std::size_t l) {
        return Rng::stream(seed, {data.size(), t_index, run, l});
    };
    return run_algorithm2_with<Rng>(data, t_index, sigma, L, est_with_h, noise, threads);
}

struct ReportRow {
    std::size_t T = 0;
    double u = 0.0;
    double w1_mean = 0.0;
    double w1_std = 0.0;
    std::size_t degenerate = 0;
    double seconds = 0.0;
    double mean_h_time = 0.0;
    double mean_h_space = 0.0;
    std::vector<double> w1_runs;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
};

/// Mean and sample standard deviation (0 for a single value).
inline std::pair<double, double> mean_and_std(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) {
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

namespace detail {

template <class RunOnce>
ReportRow aggregate_runs(std::size_t T, double u, std::size_t mc_runs, RunOnce&& run_once) {
    ReportRow row;
    row.T = T;
    row.u = u;
    const auto start = std::chrono::steady_clock::now();
    double ht = 0.0;
    double hs = 0.0;
    std::size_t ok = 0;
    for (std::size_t run = 0; run < mc_runs; ++run) {
        try {
            const AlgorithmResult r = run_once(run);
            row.w1_runs.push_back(r.w1);
            row.degenerate += r.degenerate;
            ht += r.mean_h_time;
            hs += r.mean_h_space;
            ++ok;
        } catch (const DegenerateNeighborhood&) {
            ++row.degenerate;
        }
    }
    if (ok > 0) {
        std::tie(row.w1_mean, row.w1_std) = mean_and_std(row.w1_runs);
        row.mean_h_time = ht / static_cast<double>(ok);
        row.mean_h_space = hs / static_cast<double>(ok);
    } else {
        row.w1_mean = std::nan("");
        row.w1_std = std::nan("");
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

} // namespace detail

/// mc_runs independent replication experiments for every (T, u).
inline ExperimentReport monte_carlo(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentReport report;
    for (std::size_t T : cfg.T_list) {
        for (double u : cfg.u_list) {
            const std::size_t t = time_index_for(u, T);
            report.rows.push_back(detail::aggregate_runs(
                T, u, cfg.mc_runs, [&](std::size_t run) { return run_algorithm1(cfg, T, t, run); }));
        }
    }
    return report;
}

/// Smoothed-response experiment settings for one segmented dataset.
struct RealExperimentConfig {
    std::size_t L = 100;
    std::size_t mc_runs = 10;
    double sigma = 0.1;
    std::vector<double> u_list{0.5};
    EstimatorConfig estimator = EstimatorConfig::shared(KernelFamily::Uniform, KernelFamily::Silverman, 0.1);
    BandwidthPolicy bandwidth;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

/// Bandwidth is chosen once per u on the unperturbed data; each run then
/// draws fresh smoothing noise.
inline ExperimentReport monte_carlo_real(const FunctionalSample& data, const RealExperimentConfig& cfg) {
    if (cfg.L < 1 || cfg.mc_runs < 1) {
        throw InvalidArgument("L and mc_runs must be >= 1");
    }
    ExperimentReport report;
    const std::size_t T = data.size();
    for (double u : cfg.u_list) {
        const std::size_t t = time_index_for(u, T);
        const double ut = static_cast<double>(t) / static_cast<double>(T);
        const BandwidthChoice bw = choose_bandwidth(data, ut, cfg.estimator, cfg.bandwidth);
        const EstimatorConfig est = cfg.estimator.with_bandwidths(bw.h_time, bw.h_space);
        report.rows.push_back(detail::aggregate_runs(T, u, cfg.mc_runs, [&](std::size_t run) {
            return run_algorithm2(data, t, cfg.sigma, cfg.L, est, cfg.seed, run, cfg.threads);
        }));
    }
    return report;
}

} // namespace lsnw
