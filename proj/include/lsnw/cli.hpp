#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsnw/bandwidth.hpp"
#include "lsnw/curves.hpp"
#include "lsnw/error.hpp"
#include "lsnw/experiments.hpp"
#include "lsnw/ingest.hpp"
#include "lsnw/io.hpp"
#include "lsnw/kernels.hpp"
#include "lsnw/nw_estimator.hpp"
#include "lsnw/parallel.hpp"
#include "lsnw/rng.hpp"
#include "lsnw/simulate.hpp"
#include "lsnw/wasserstein.hpp"

namespace lsnw::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr std::uint64_t kIngestTag = 0x1A6E57ULL;

inline std::string utc_timestamp(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Config echo, seed, version, timestamps and per-stage timings of one run.
class RunManifest {
public:
    RunManifest(std::string subcommand, const CLI::App& sub)
        : start_(std::chrono::system_clock::now()) {
        json_["artifact"] = "lsnw";
        json_["version"] = kVersion;
        json_["subcommand"] = std::move(subcommand);
        auto& config = json_["config"];
        config = nlohmann::ordered_json::object();
        for (const CLI::Option* opt : sub.get_options()) {
            const std::string name = opt->get_single_name();
            if (name == "help" || name == "config" || name.empty()) {
                continue;
            }
            if (opt->count() > 0) {
                const auto& res = opt->results();
                config[name] = res.size() == 1 ? nlohmann::ordered_json(res.front()) : nlohmann::ordered_json(res);
            } else {
                config[name] = opt->get_default_str();
            }
        }
        if (const CLI::Option* cfg = sub.get_config_ptr(); cfg != nullptr && cfg->count() > 0) {
            json_["config_file"] = cfg->as<std::string>();
        }
        json_["timings"] = nlohmann::ordered_json::object();
    }

    void set_seed(std::uint64_t seed) { json_["seed"] = seed; }

    template <class Fn>
    decltype(auto) stage(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            RunManifest* self;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                self->json_["timings"][name] =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        } record{this, name, t0};
        return fn();
    }

    nlohmann::ordered_json& extra() { return json_["result"]; }

    void add_output(const std::string& path) { json_["outputs"].push_back(path); }

    std::string finish() {
        json_["started_at"] = utc_timestamp(start_);
        json_["finished_at"] = utc_timestamp(std::chrono::system_clock::now());
        return json_.dump(2) + "\n";
    }

private:
    std::chrono::system_clock::time_point start_;
    nlohmann::ordered_json json_;
};

inline std::ofstream open_output(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidArgument("cannot write '" + path + "'");
    }
    return f;
}

/// Data goes to `out_path` (stdout for "-"). The manifest goes to
/// `manifest_path`, else next to a file output, else to the error stream.
struct Sink {
    std::string out_path = "-";
    std::string manifest_path;
    std::ostream* stdout_stream = nullptr;
    std::ostream* stderr_stream = nullptr;

    template <class Write>
    void data(RunManifest& m, Write&& write) const {
        if (out_path == "-") {
            write(*stdout_stream);
            return;
        }
        auto f = open_output(out_path);
        write(f);
        m.add_output(out_path);
    }

    void manifest(RunManifest& m) const {
        std::string path = manifest_path;
        if (path.empty() && out_path != "-") {
            path = out_path + ".manifest.json";
        }
        const std::string text = m.finish();
        if (path.empty()) {
            *stderr_stream << text;
            return;
        }
        auto f = open_output(path);
        f << text;
    }
};

struct KernelFlags {
    std::string k1 = "uniform";
    std::string k2 = "silverman";

    EstimatorConfig config(double h_time, double h_space) const {
        EstimatorConfig c{{parse_kernel_family(k1), KernelRole::Time},
                          {parse_kernel_family(k2), KernelRole::Space},
                          h_time,
                          h_space};
        c.validate();
        return c;
    }
};

struct BandwidthFlags {
    std::string mode = "cv-pair";
    std::string scope = "replication";
    std::string cv_mode = "global";
    std::size_t shared_candidates = 20;
    std::size_t time_candidates = 8;
    std::size_t space_candidates = 6;
    double min_time_neighbors = 5.0;
    std::optional<double> penalty;

    BandwidthPolicy policy() const {
        BandwidthPolicy p;
        p.mode = parse_bandwidth_mode(mode);
        if (scope == "replication") {
            p.scope = CvScope::PerReplication;
        } else if (scope == "run") {
            p.scope = CvScope::PerRun;
        } else {
            throw InvalidArgument("unknown cv scope '" + scope + "'");
        }
        p.shared_candidates = shared_candidates;
        p.time_candidates = time_candidates;
        p.space_candidates = space_candidates;
        p.min_time_neighbors = min_time_neighbors;
        p.cv.mode = parse_cv_mode(cv_mode);
        p.cv.fixed_penalty = penalty;
        return p;
    }
};

inline void add_kernel_flags(CLI::App* s, KernelFlags& k) {
    s->add_option("--k1", k.k1, "time kernel: uniform|tricube|epanechnikov|gaussian");
    s->add_option("--k2", k.k2, "space kernel: uniform|tricube|epanechnikov|gaussian|silverman");
}

inline void add_bandwidth_flags(CLI::App* s, BandwidthFlags& b) {
    s->add_option("--bandwidth", b.mode, "fixed|cv|cv-pair");
    s->add_option("--cv-scope", b.scope, "replication|run: where CV is run");
    s->add_option("--cv-mode", b.cv_mode, "global|local CV weighting");
    s->add_option("--shared-candidates", b.shared_candidates, "grid size for --bandwidth cv")
        ->check(CLI::PositiveNumber);
    s->add_option("--time-candidates", b.time_candidates, "h_time grid size for cv-pair")
        ->check(CLI::PositiveNumber);
    s->add_option("--space-candidates", b.space_candidates, "h_space grid size for cv-pair")
        ->check(CLI::PositiveNumber);
    s->add_option("--min-time-neighbors", b.min_time_neighbors,
                  "smallest h_time candidate is this many time steps")
        ->check(CLI::PositiveNumber);
    s->add_option("--cv-penalty", b.penalty, "score for degenerate LOO fits (default: squared deviation)");
}

inline void add_sink_flags(CLI::App* s, Sink& sink, bool out_required = false, const char* out_help = "output CSV, - for stdout") {
    auto* o = s->add_option("--out", sink.out_path, out_help);
    if (out_required) {
        o->required();
    }
    s->add_option("--manifest", sink.manifest_path, "manifest JSON path");
}

inline std::size_t default_thread_count() { return default_threads(); }

/// Splices the key=value lines of `SUB --config FILE` in after SUB as
/// flags, skipping keys already given on the command line.
inline std::vector<std::string> expand_config(const CLI::App& app, std::vector<std::string> args) {
    if (args.empty()) {
        return args;
    }
    const CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) {
        return args;
    }
    std::string path;
    for (std::size_t k = 1; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) {
            path = args[k + 1];
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
        }
    }
    if (path.empty()) {
        return args;
    }
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin() + 1, args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (item.name == "++" || item.name == "--" || !(item.parents.empty() || item.parents.front() == sub->get_name())) {
            continue;
        }
        const std::string flag = "--" + item.name;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (opt == nullptr || item.name == "config") {
            throw CLI::ValidationError("--config", "unknown key '" + item.name + "' in " + path);
        }
        if (given(flag)) {
            continue;
        }
        if (opt->get_expected_max() == 0) {
            if (!item.inputs.empty() && CLI::detail::to_flag_value(item.inputs.front()) > 0) {
                injected.push_back(flag);
            }
            continue;
        }
        injected.push_back(flag);
        injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
    }
    args.insert(args.begin() + 1, injected.begin(), injected.end());
    return args;
}

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1 usage
/// error, 2 data or estimation error.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"Locally stationary functional Nadaraya-Watson toolkit", "lsnw"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::function<void()> action;
    std::string config_path;
    // accepted everywhere; only the experiment runners are parallel
    std::size_t sequential_threads = default_thread_count();
    auto add_threads = [&](CLI::App* sub) {
        sub->add_option("--threads", sequential_threads, "worker threads")->check(CLI::PositiveNumber);
    };

    // simulate
    struct {
        std::string process = "tvfar1";
        std::size_t T = 100, N = 100, J = 7, burn_in = 50;
        std::uint64_t seed = 0;
        bool freeze = false;
        std::string prefix;
        std::string manifest;
    } sim;
    auto* s_sim = app.add_subcommand("simulate", "simulate a tvFAR sample: curves (T x N) and responses (T x 1)");
    s_sim->add_option("--config", config_path, "key=value config file; command-line flags win");
    add_threads(s_sim);
    s_sim->add_option("--process", sim.process, "tvfar1|tvfar2");
    s_sim->add_option("--T", sim.T, "sample length")->check(CLI::PositiveNumber);
    s_sim->add_option("--N", sim.N, "grid points per curve")->check(CLI::Range(2u, 1000000u));
    s_sim->add_option("--J", sim.J, "basis functions")->check(CLI::PositiveNumber);
    s_sim->add_option("--burn-in", sim.burn_in, "discarded initial steps");
    s_sim->add_option("--seed", sim.seed, "root seed");
    s_sim->add_flag("--freeze-operators", sim.freeze, "reuse one operator draw per replication");
    s_sim->add_option("--out", sim.prefix, "output prefix: PREFIX.curves.csv, PREFIX.responses.csv")->required();
    s_sim->add_option("--manifest", sim.manifest, "manifest JSON path (default PREFIX.manifest.json)");
    s_sim->callback([&] {
        action = [&] {
            RunManifest m("simulate", *s_sim);
            m.set_seed(sim.seed);
            SimConfig cfg;
            cfg.process = parse_process(sim.process);
            cfg.T = sim.T;
            cfg.N = sim.N;
            cfg.J = sim.J;
            cfg.burn_in = sim.burn_in;
            cfg.seed = sim.seed;
            cfg.freeze_operators = sim.freeze;
            Rng rng = Rng::stream(sim.seed, {0});
            const FunctionalSample sample = m.stage("simulate", [&] { return simulate_sample(cfg, rng); });
            m.stage("write", [&] {
                auto fc = open_output(sim.prefix + ".curves.csv");
                io::write_curves(fc, sample.curves());
                auto fr = open_output(sim.prefix + ".responses.csv");
                io::write_column(fr, sample.responses());
            });
            m.add_output(sim.prefix + ".curves.csv");
            m.add_output(sim.prefix + ".responses.csv");
            auto fm = open_output(sim.manifest.empty() ? sim.prefix + ".manifest.json" : sim.manifest);
            fm << m.finish();
        };
    });

    // estimate
    struct {
        std::string curves, responses;
        std::size_t query_index = 0;
        std::optional<double> u;
        double h = 0.1;
        std::optional<double> h_time, h_space;
        KernelFlags kernels;
        Sink sink;
    } est;
    auto* s_est = app.add_subcommand("estimate", "NW conditional CDF at (u, X_t) as atom,weight,cumweight CSV");
    s_est->set_help_flag("--help", "print this help message and exit");
    s_est->add_option("--config", config_path, "key=value config file; command-line flags win");
    add_threads(s_est);
    s_est->add_option("--curves", est.curves, "T x N curve CSV")->required();
    s_est->add_option("--responses", est.responses, "T x 1 response CSV")->required();
    s_est->add_option("--query-index", est.query_index, "t in 1..T; x = X_t")->required()->check(CLI::PositiveNumber);
    s_est->add_option("--u", est.u, "rescaled query time (default t/T)");
    s_est->add_option("--h", est.h, "bandwidth shared by both kernels");
    s_est->add_option("--h-time", est.h_time, "time bandwidth (overrides --h)");
    s_est->add_option("--h-space", est.h_space, "space bandwidth (overrides --h)");
    add_kernel_flags(s_est, est.kernels);
    add_sink_flags(s_est, est.sink);
    s_est->callback([&] {
        action = [&] {
            RunManifest m("estimate", *s_est);
            const FunctionalSample s = io::read_sample(est.curves, est.responses);
            if (est.query_index > s.size()) {
                throw InvalidArgument("--query-index exceeds T=" + std::to_string(s.size()));
            }
            const double u = est.u.value_or(static_cast<double>(est.query_index) / static_cast<double>(s.size()));
            const EstimatorConfig cfg = est.kernels.config(est.h_time.value_or(est.h), est.h_space.value_or(est.h));
            const DiscreteDistribution raw =
                m.stage("estimate", [&] { return conditional_cdf(s, u, s.curve(est.query_index - 1), cfg); });
            DiscreteDistribution shown = raw;
            if (raw.is_signed()) {
                shown = raw.monotone_envelope();
                const double gap = w1(raw, shown);
                err << "note: signed estimate reported through its monotone envelope; w1(raw, envelope) = "
                    << io::format_double(gap) << "\n";
                m.extra()["monotonization_w1"] = gap;
            }
            m.extra()["u"] = u;
            m.extra()["mean"] = raw.mean();
            est.sink.data(m, [&](std::ostream& o) { io::write_distribution(o, shown); });
            est.sink.manifest(m);
        };
    });

    // cv
    struct {
        std::string curves, responses;
        std::optional<double> grid_min, grid_max;
        std::size_t grid_size = 20;
        std::string mode = "global";
        std::optional<double> penalty;
        KernelFlags kernels;
        Sink sink;
    } cv;
    auto* s_cv = app.add_subcommand("cv", "leave-one-out CV over a shared bandwidth grid");
    s_cv->add_option("--config", config_path, "key=value config file; command-line flags win");
    add_threads(s_cv);
    s_cv->add_option("--curves", cv.curves, "T x N curve CSV")->required();
    s_cv->add_option("--responses", cv.responses, "T x 1 response CSV")->required();
    s_cv->add_option("--grid-min", cv.grid_min, "smallest candidate");
    s_cv->add_option("--grid-max", cv.grid_max, "largest candidate");
    s_cv->add_option("--grid-size", cv.grid_size, "number of equally spaced candidates")->check(CLI::PositiveNumber);
    s_cv->add_option("--mode", cv.mode, "global|local");
    s_cv->add_option("--cv-penalty", cv.penalty, "score for degenerate LOO fits");
    add_kernel_flags(s_cv, cv.kernels);
    add_sink_flags(s_cv, cv.sink);
    s_cv->callback([&] {
        action = [&] {
            RunManifest m("cv", *s_cv);
            const FunctionalSample s = io::read_sample(cv.curves, cv.responses);
            const EstimatorConfig templ = cv.kernels.config(0.1, 0.1);
            CvOptions opt{parse_cv_mode(cv.mode), cv.penalty};
            const BandwidthGrid grid = [&] {
                if (!cv.grid_min && !cv.grid_max) {
                    return default_grid(s, cv.grid_size);
                }
                if (!cv.grid_min || !cv.grid_max) {
                    throw InvalidArgument("--grid-min and --grid-max go together");
                }
                const double lo = *cv.grid_min;
                const double hi = *cv.grid_max;
                if (cv.grid_size == 1 || lo == hi) {
                    return BandwidthGrid({lo});
                }
                std::vector<double> c(cv.grid_size);
                for (std::size_t k = 0; k < c.size(); ++k) {
                    c[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(c.size() - 1);
                }
                c.back() = hi;
                return BandwidthGrid(std::move(c));
            }();
            CvEngine engine(s, templ, grid.max());
            std::vector<CvScore> scores;
            m.stage("cv", [&] {
                for (double h : grid.candidates()) {
                    scores.push_back(engine.score(h, h, opt));
                }
            });
            const BandwidthChoice best = engine.select(grid, opt);
            cv.sink.data(m, [&](std::ostream& o) {
                o << "h,score,degenerate,selected\n";
                for (std::size_t k = 0; k < grid.size(); ++k) {
                    const double h = grid.candidates()[k];
                    o << io::format_double(h) << ',' << io::format_double(scores[k].score) << ','
                      << scores[k].degenerate << ',' << (h == best.h_time ? 1 : 0) << '\n';
                }
            });
            err << "selected h = " << io::format_double(best.h_time) << "\n";
            m.extra()["selected_h"] = best.h_time;
            m.extra()["selected_score"] = best.score;
            cv.sink.manifest(m);
        };
    });

    // wasserstein
    struct {
        std::string a, b;
        std::optional<double> r;
        std::string manifest;
    } ws;
    auto* s_ws = app.add_subcommand("wasserstein", "W1 (and W_r with --r) between two value,weight CSVs");
    s_ws->add_option("--config", config_path, "key=value config file; command-line flags win");
    add_threads(s_ws);
    s_ws->add_option("a", ws.a, "first distribution CSV")->required();
    s_ws->add_option("b", ws.b, "second distribution CSV")->required();
    s_ws->add_option("--r", ws.r, "order r >= 1; prints W_r on a second line");
    s_ws->add_option("--manifest", ws.manifest, "manifest JSON path (default: error stream)");
    s_ws->callback([&] {
        action = [&] {
            RunManifest m("wasserstein", *s_ws);
            const auto da = io::read_distribution(ws.a);
            const auto db = io::read_distribution(ws.b);
            const double d1 = w1(da, db);
            out << io::format_double(d1) << "\n";
            m.extra()["w1"] = d1;
            if (ws.r) {
                const double dr = wr(da, db, *ws.r);
                out << io::format_double(dr) << "\n";
                m.extra()["wr"] = dr;
            }
            Sink sink{"-", ws.manifest, &out, &err};
            sink.manifest(m);
        };
    });

    // ingest
    struct {
        std::string input;
        std::size_t block_len = 0, j = 0;
        std::optional<double> sigma;
        std::uint64_t seed = 0;
        std::string prefix;
        std::string manifest;
    } ing;
    auto* s_ing = app.add_subcommand("ingest", "segment a raw series into curves and build (X_t, Y_t) pairs");
    s_ing->add_option("--config", config_path, "key=value config file; command-line flags win");
    add_threads(s_ing);
    s_ing->add_option("--input", ing.input, "single-column CSV of the raw series")->required();
    s_ing->add_option("--block-len", ing.block_len, "values per curve")->required()->check(CLI::Range(2u, 100000000u));
    s_ing->add_option("--j", ing.j, "intra-block index of the response, 1..block-len")->required()->check(CLI::PositiveNumber);
    s_ing->add_option("--sigma", ing.sigma, "add N(0, sigma^2) noise to the responses")->check(CLI::PositiveNumber);
    s_ing->add_option("--seed", ing.seed, "root seed for --sigma");
    s_ing->add_option("--out", ing.prefix, "output prefix: PREFIX.curves.csv, PREFIX.responses.csv")->required();
    s_ing->add_option("--manifest", ing.manifest, "manifest JSON path (default PREFIX.manifest.json)");
    s_ing->callback([&] {
        action = [&] {
            RunManifest m("ingest", *s_ing);
            m.set_seed(ing.seed);
            const RawSeries raw{io::read_column(ing.input), ing.input};
            const SegmentedDataset ds = segment(raw, ing.block_len);
            const FunctionalSample pairs = build_pairs(ds, ing.j);
            std::vector<double> y = pairs.responses();
            if (ing.sigma) {
                Rng rng = Rng::stream(ing.seed, {kIngestTag});
                y = gaussian_smooth(std::move(y), *ing.sigma, rng);
            }
            auto fc = open_output(ing.prefix + ".curves.csv");
            io::write_curves(fc, pairs.curves());
            auto fr = open_output(ing.prefix + ".responses.csv");
            io::write_column(fr, y);
            m.add_output(ing.prefix + ".curves.csv");
            m.add_output(ing.prefix + ".responses.csv");
            m.extra()["curves"] = ds.curves.size();
            m.extra()["pairs"] = pairs.size();
            auto fm = open_output(ing.manifest.empty() ? ing.prefix + ".manifest.json" : ing.manifest);
            fm << m.finish();
        };
    });

    // experiment-synthetic
    struct {
        std::string process = "tvfar1";
        std::vector<std::size_t> T{250, 500, 1000, 2000};
        std::vector<double> u{0.25};
        std::size_t L = 100, mc = 10, N = 100, J = 7, burn_in = 50;
        std::uint64_t seed = 0;
        bool freeze = false;
        double h = 0.1;
        std::optional<double> h_time, h_space;
        std::size_t threads = default_thread_count();
        KernelFlags kernels;
        BandwidthFlags bw;
        Sink sink;
    } exs;
    auto* s_exs = app.add_subcommand("experiment-synthetic", "Monte Carlo W1 error of the NW conditional CDF on simulated data");
    s_exs->set_help_flag("--help", "print this help message and exit");
    s_exs->add_option("--config", config_path, "key=value config file; command-line flags win");
    s_exs->add_option("--process", exs.process, "tvfar1|tvfar2");
    s_exs->add_option("--T", exs.T, "sample lengths, comma separated")->delimiter(',');
    s_exs->add_option("--u", exs.u, "query times in (0, 1), comma separated")->delimiter(',');
    s_exs->add_option("--L", exs.L, "replications per run")->check(CLI::PositiveNumber);
    s_exs->add_option("--mc", exs.mc, "Monte Carlo runs")->check(CLI::PositiveNumber);
    s_exs->add_option("--N", exs.N, "grid points per curve")->check(CLI::Range(2u, 1000000u));
    s_exs->add_option("--J", exs.J, "basis functions")->check(CLI::PositiveNumber);
    s_exs->add_option("--burn-in", exs.burn_in, "discarded initial steps");
    s_exs->add_flag("--freeze-operators", exs.freeze, "reuse one operator draw per replication");
    s_exs->add_option("--seed", exs.seed, "root seed");
    s_exs->add_option("--h", exs.h, "bandwidth for --bandwidth fixed");
    s_exs->add_option("--h-time", exs.h_time, "fixed time bandwidth (overrides --h)");
    s_exs->add_option("--h-space", exs.h_space, "fixed space bandwidth (overrides --h)");
    s_exs->add_option("--threads", exs.threads, "worker threads")->check(CLI::PositiveNumber);
    add_kernel_flags(s_exs, exs.kernels);
    add_bandwidth_flags(s_exs, exs.bw);
    add_sink_flags(s_exs, exs.sink, false, "report CSV, - for stdout");
    s_exs->callback([&] {
        action = [&] {
            RunManifest m("experiment-synthetic", *s_exs);
            m.set_seed(exs.seed);
            ExperimentConfig cfg;
            cfg.L = exs.L;
            cfg.mc_runs = exs.mc;
            cfg.T_list = exs.T;
            cfg.u_list = exs.u;
            cfg.estimator = exs.kernels.config(exs.h_time.value_or(exs.h), exs.h_space.value_or(exs.h));
            cfg.bandwidth = exs.bw.policy();
            cfg.sim.process = parse_process(exs.process);
            cfg.sim.N = exs.N;
            cfg.sim.J = exs.J;
            cfg.sim.burn_in = exs.burn_in;
            cfg.sim.freeze_operators = exs.freeze;
            cfg.seed = exs.seed;
            cfg.threads = exs.threads;
            const ExperimentReport report = m.stage("monte_carlo", [&] { return monte_carlo(cfg); });
            for (const auto& row : report.rows) {
                m.extra()["rows"].push_back({{"T", row.T},
                                             {"u", row.u},
                                             {"w1_runs", row.w1_runs},
                                             {"mean_h_time", row.mean_h_time},
                                             {"mean_h_space", row.mean_h_space}});
            }
            exs.sink.data(m, [&](std::ostream& o) { io::write_report(o, report); });
            exs.sink.manifest(m);
        };
    });

    // experiment-real
    struct {
        std::string curves, responses, input;
        std::size_t block_len = 0, j = 0;
        double sigma = 0.1;
        std::vector<double> u{0.5};
        std::size_t L = 100, mc = 10;
        std::uint64_t seed = 0;
        double h = 0.1;
        std::optional<double> h_time, h_space;
        std::size_t threads = default_thread_count();
        KernelFlags kernels;
        BandwidthFlags bw;
        Sink sink;
    } exr;
    auto* s_exr = app.add_subcommand("experiment-real", "Monte Carlo W1 error under Gaussian-smoothed responses on one dataset");
    s_exr->set_help_flag("--help", "print this help message and exit");
    s_exr->add_option("--config", config_path, "key=value config file; command-line flags win");
    auto* o_curves = s_exr->add_option("--curves", exr.curves, "T x B curve CSV from ingest");
    auto* o_resp = s_exr->add_option("--responses", exr.responses, "T x 1 response CSV from ingest");
    auto* o_input = s_exr->add_option("--input", exr.input, "raw single-column series (with --block-len, --j)");
    auto* o_block = s_exr->add_option("--block-len", exr.block_len, "values per curve")->check(CLI::Range(2u, 100000000u));
    auto* o_j = s_exr->add_option("--j", exr.j, "intra-block response index")->check(CLI::PositiveNumber);
    o_curves->needs(o_resp);
    o_resp->needs(o_curves);
    o_input->needs(o_block)->needs(o_j)->excludes(o_curves);
    s_exr->add_option("--sigma", exr.sigma, "smoothing noise standard deviation")->check(CLI::PositiveNumber);
    s_exr->add_option("--u", exr.u, "query times in (0, 1), comma separated")->delimiter(',');
    s_exr->add_option("--L", exr.L, "replications per run")->check(CLI::PositiveNumber);
    s_exr->add_option("--mc", exr.mc, "Monte Carlo runs")->check(CLI::PositiveNumber);
    s_exr->add_option("--seed", exr.seed, "root seed");
    s_exr->add_option("--h", exr.h, "bandwidth for --bandwidth fixed");
    s_exr->add_option("--h-time", exr.h_time, "fixed time bandwidth (overrides --h)");
    s_exr->add_option("--h-space", exr.h_space, "fixed space bandwidth (overrides --h)");
    s_exr->add_option("--threads", exr.threads, "worker threads")->check(CLI::PositiveNumber);
    add_kernel_flags(s_exr, exr.kernels);
    add_bandwidth_flags(s_exr, exr.bw);
    add_sink_flags(s_exr, exr.sink, false, "report CSV, - for stdout");
    s_exr->callback([&] {
        action = [&] {
            if (exr.curves.empty() && exr.input.empty()) {
                throw CLI::RequiredError("--curves/--responses or --input");
            }
            RunManifest m("experiment-real", *s_exr);
            m.set_seed(exr.seed);
            const FunctionalSample data = m.stage("load", [&] {
                if (!exr.curves.empty()) {
                    return io::read_sample(exr.curves, exr.responses);
                }
                const RawSeries raw{io::read_column(exr.input), exr.input};
                return build_pairs(segment(raw, exr.block_len), exr.j);
            });
            RealExperimentConfig cfg;
            cfg.L = exr.L;
            cfg.mc_runs = exr.mc;
            cfg.sigma = exr.sigma;
            cfg.u_list = exr.u;
            cfg.estimator = exr.kernels.config(exr.h_time.value_or(exr.h), exr.h_space.value_or(exr.h));
            cfg.bandwidth = exr.bw.policy();
            cfg.seed = exr.seed;
            cfg.threads = exr.threads;
            const ExperimentReport report = m.stage("monte_carlo", [&] { return monte_carlo_real(data, cfg); });
            for (const auto& row : report.rows) {
                m.extra()["rows"].push_back({{"T", row.T},
                                             {"u", row.u},
                                             {"w1_runs", row.w1_runs},
                                             {"h_time", row.mean_h_time},
                                             {"h_space", row.mean_h_space}});
            }
            exr.sink.data(m, [&](std::ostream& o) { io::write_report(o, report); });
            exr.sink.manifest(m);
        };
    });

    for (Sink* sink : {&est.sink, &cv.sink, &exs.sink, &exr.sink}) {
        sink->stdout_stream = &out;
        sink->stderr_stream = &err;
    }

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(app, std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
        if (!action) {
            throw CLI::CallForHelp();
        }
        action();
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        const CLI::App* failing = &app;
        for (const CLI::App* sub : app.get_subcommands()) {
            failing = sub;
        }
        err << failing->help();
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace lsnw::cli
