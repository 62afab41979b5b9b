// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion on stdout;
// details go to stderr. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lsnw/experiments.hpp"
#include "lsnw/ingest.hpp"
#include "lsnw/io.hpp"
#include "support.hpp"

using namespace lsnw;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Outcome wasserstein_correctness() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(1);
    double worst_riemann = 0.0;
    double worst_wr = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto a = testing::random_distribution(gen, 30, 10.0, k % 4 == 0);
        const auto b = testing::random_distribution(gen, 30, 10.0, k % 4 == 0);
        const double exact = w1(a, b);
        worst_riemann = std::max(worst_riemann, std::abs(exact - w1_riemann_oracle(a, b, 100000)));
        worst_wr = std::max(worst_wr, std::abs(wr(a, b, 1.0) - exact));
    }
    const double secs = seconds_since(t0);
    return {worst_riemann <= 1e-3 && worst_wr <= 1e-12 && secs < 10.0,
            "max |w1 - riemann| = " + fmt("%.3g", worst_riemann) + ", max |wr1 - w1| = " + fmt("%.3g", worst_wr) +
                ", " + fmt("%.2f", secs) + " s"};
}

Outcome metric_suite() {
    std::mt19937_64 gen(2);
    const double M = 5.0;
    int violations = 0;
    for (int k = 0; k < 1000; ++k) {
        const bool lattice = k % 2 == 0;
        const auto a = testing::random_distribution(gen, 20, M, lattice);
        const auto b = testing::random_distribution(gen, 20, M, lattice);
        const auto c = testing::random_distribution(gen, 20, M, lattice);
        const double ab = w1(a, b);
        violations += std::abs(ab - w1(b, a)) > 1e-10;
        violations += w1(a, a) != 0.0;
        violations += (a == b) != (ab == 0.0);
        violations += w1(a, c) > ab + w1(b, c) + 1e-10;
        violations += std::abs(a.mean() - b.mean()) > ab + 1e-10;
        for (double r : {1.5, 2.0, 3.0}) {
            violations += std::pow(wr(a, b, r), r) > std::pow(2.0 * M, r - 1.0) * ab + 1e-9;
        }
    }
    return {violations == 0, std::to_string(violations) + " violations over 1000 triples"};
}

Outcome estimator_contracts() {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    const KernelFamily time[] = {KernelFamily::Uniform, KernelFamily::Tricube, KernelFamily::Epanechnikov,
                                 KernelFamily::Gaussian};
    const KernelFamily space[] = {KernelFamily::Uniform, KernelFamily::Tricube, KernelFamily::Epanechnikov,
                                  KernelFamily::Gaussian};
    int failures = 0;
    int cases = 0;
    int attempts = 0;
    while (cases < 200 && attempts < 2000) {
        ++attempts;
        const std::size_t T = 5 + static_cast<std::size_t>(ud(gen) * 60);
        const std::size_t N = 5 + static_cast<std::size_t>(ud(gen) * 30);
        auto g = Grid::uniform(N);
        std::vector<Curve> curves;
        std::vector<double> y;
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> v(N);
            for (double& x : v) x = nd(gen);
            curves.emplace_back(g, v);
            y.push_back(std::round(3.0 * nd(gen)));
        }
        const FunctionalSample s(curves, y);
        std::vector<double> xv(N);
        for (double& x : xv) x = nd(gen);
        const Curve x(g, xv);
        const EstimatorConfig cfg{{time[attempts % 4], KernelRole::Time},
                                  {space[(attempts / 4) % 4], KernelRole::Space},
                                  0.05 + 0.5 * ud(gen),
                                  0.5 + 3.0 * ud(gen)};
        const double u = ud(gen);
        std::vector<double> w;
        try {
            w = nw_weights(s, u, x, cfg).weights;
        } catch (const DegenerateNeighborhood&) {
            continue;
        }
        ++cases;
        double sum = 0.0;
        bool ok = true;
        for (double v : w) {
            sum += v;
            ok = ok && v >= 0.0;
        }
        ok = ok && std::abs(sum - 1.0) <= 1e-12;
        const double m = conditional_mean(s, u, x, cfg);
        ok = ok && m >= *std::min_element(y.begin(), y.end()) && m <= *std::max_element(y.begin(), y.end());
        const auto d = conditional_cdf(s, u, x, cfg);
        ok = ok && std::abs(d.mean() - m) <= 1e-12;
        // valid step CDF: sorted atoms, positive weights, nondecreasing, ends at 1
        double prev = 0.0;
        for (std::size_t k = 0; k < d.size(); ++k) {
            ok = ok && d.weights()[k] > 0.0 && (k == 0 || d.atoms()[k] > d.atoms()[k - 1]);
            ok = ok && d.cumulative()[k] >= prev;
            prev = d.cumulative()[k];
            ok = ok && d.cdf(d.atoms()[k]) == d.cumulative()[k];
        }
        ok = ok && d.cumulative()[d.size() - 1] == 1.0 && d.cdf(d.min_atom() - 1.0) == 0.0;
        failures += !ok;
    }
    return {cases == 200 && failures == 0,
            std::to_string(failures) + " failures over " + std::to_string(cases) + " cases"};
}

double power_norm(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd m = a.transpose() * a;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.cols());
    double lambda = 0.0;
    for (int it = 0; it < 10000; ++it) {
        const Eigen::VectorXd w = m * v;
        const double next = w.norm();
        v = w / next;
        if (std::abs(next - lambda) <= 1e-16 * next) break;
        lambda = next;
    }
    return std::sqrt((v.transpose() * m * v)(0));
}

Outcome simulator_calibration() {
    Rng rng(4);
    double worst_norm = 0.0;
    for (int k = 0; k <= 20; ++k) {
        const double u = k / 20.0;
        worst_norm = std::max(worst_norm, std::abs(power_norm(draw_operator_tvfar1(u, 7, rng)) - 0.4));
        const auto [b1, b2] = draw_operators_tvfar2(u, 7, rng);
        worst_norm = std::max(worst_norm, std::abs(power_norm(b2) - 0.5));
        worst_norm = std::max(worst_norm,
                              std::abs(power_norm(b1) - std::abs(0.4 * std::cos(1.5 - std::cos(std::numbers::pi * u)))));
    }

    const int n = 100000;
    std::vector<double> sum(7, 0.0), sum2(7, 0.0);
    for (int k = 0; k < n; ++k) {
        const auto eta = draw_innovation(7, rng);
        for (int j = 0; j < 7; ++j) {
            sum[j] += eta(j);
            sum2[j] += eta(j) * eta(j);
        }
    }
    double worst_z = 0.0;
    for (int j = 0; j < 7; ++j) {
        const double mean = sum[j] / n;
        const double var = (sum2[j] - n * mean * mean) / (n - 1.0);
        const double expected = std::pow(std::numbers::pi * (j + 1 - 1.5), -2.0);
        worst_z = std::max(worst_z, std::abs(var - expected) / (expected * std::sqrt(2.0 / (n - 1.0))));
    }

    SimConfig cfg;
    cfg.T = 50;
    const auto coefs = simulate_coefficients(cfg, rng);
    const auto grid = Grid::uniform(100);
    const auto curves = synthesize_curves(coefs, grid);
    double worst_coef = 0.0;
    for (std::size_t t = 0; t < coefs.size(); ++t) {
        for (std::size_t j = 1; j <= 7; ++j) {
            std::vector<double> prod(100);
            for (std::size_t m = 0; m < 100; ++m) prod[m] = curves[t][m] * fourier_basis(j, grid->points()[m]);
            worst_coef = std::max(worst_coef, std::abs(integrate(Curve(grid, prod)) - coefs[t](j - 1)));
        }
    }
    return {worst_norm <= 1e-10 && worst_z <= 3.0 && worst_coef <= 1e-2,
            "max norm error " + fmt("%.3g", worst_norm) + ", max variance z " + fmt("%.2f", worst_z) +
                ", max coefficient error " + fmt("%.3g", worst_coef)};
}

Outcome convergence_trend() {
    ExperimentConfig cfg;
    cfg.sim.process = Process::TvFAR1;
    cfg.estimator = EstimatorConfig::shared(KernelFamily::Uniform, KernelFamily::Silverman, 0.1);
    cfg.T_list = {250, 500, 1000, 2000};
    cfg.u_list = {0.25};
    cfg.L = 100;
    cfg.mc_runs = 10;
    cfg.seed = 0;
    cfg.threads = default_threads();
    const auto t0 = std::chrono::steady_clock::now();
    const auto report = monte_carlo(cfg);
    bool decreasing = true;
    bool std_ok = true;
    std::string trend;
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        const auto& r = report.rows[k];
        std::cerr << "  T=" << r.T << " w1_mean=" << io::format_double(r.w1_mean)
                  << " w1_std=" << io::format_double(r.w1_std) << " degenerate=" << r.degenerate
                  << " mean_h_time=" << r.mean_h_time << " mean_h_space=" << r.mean_h_space << "\n";
        std_ok = std_ok && std::isfinite(r.w1_std) && r.w1_std >= 0.0 && r.w1_runs.size() >= 2;
        if (k > 0) decreasing = decreasing && r.w1_mean < report.rows[k - 1].w1_mean;
        trend += (k ? " > " : "") + fmt("%.4f", r.w1_mean);
    }
    return {decreasing && std_ok, "w1_mean by T: " + trend + ", " + fmt("%.0f", seconds_since(t0)) + " s"};
}

/// Seasonal series shaped like the monthly Nino 1+2 index: 12-month cycle,
/// slow multi-year swing and AR(1) anomalies.
RawSeries sst_stand_in(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    RawSeries s;
    s.label = "sst-stand-in";
    double anomaly = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        anomaly = 0.8 * anomaly + 0.5 * rng.normal();
        const double month = static_cast<double>(k);
        s.values.push_back(23.0 + 2.5 * std::sin(2.0 * std::numbers::pi * month / 12.0) +
                           0.7 * std::sin(2.0 * std::numbers::pi * month / 50.0) + anomaly);
    }
    return s;
}

Outcome smoothing_ordinal() {
    const fs::path sst = fs::path(LSNW_SOURCE_DIR) / "data" / "sst.csv";
    RawSeries series;
    if (fs::exists(sst)) {
        series = RawSeries{io::read_column(sst.string()), "sst"};
    } else {
        series = sst_stand_in(900, 2025);
    }
    const auto pairs = build_pairs(segment(series, 36), 21);
    RealExperimentConfig cfg;
    cfg.L = 100;
    cfg.mc_runs = 1;
    cfg.u_list = {0.5};
    cfg.threads = default_threads();
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        cfg.sigma = 1e-4;
        const double fine = monte_carlo_real(pairs, cfg).rows[0].w1_mean;
        cfg.sigma = 1e-1;
        const double coarse = monte_carlo_real(pairs, cfg).rows[0].w1_mean;
        wins += fine > coarse;
        std::cerr << "  seed " << seed << ": w1(1e-4)=" << fine << " w1(1e-1)=" << coarse << "\n";
    }
    return {wins >= 8, std::to_string(wins) + "/10 runs with w1(sigma=1e-4) > w1(sigma=1e-1) on " + series.label +
                           " (T=" + std::to_string(pairs.size()) + ")"};
}

Outcome segmentation_arithmetic() {
    const struct {
        std::size_t n, block, pairs;
    } cases[] = {{900, 36, 24}, {900, 12, 74}, {900, 6, 149}, {14340, 60, 238}, {14340, 30, 477}, {14340, 15, 955}};
    std::string got;
    bool ok = true;
    for (const auto& c : cases) {
        RawSeries s;
        s.values.assign(c.n, 1.0);
        const std::size_t p = build_pairs(segment(s, c.block), 1).size();
        ok = ok && p == c.pairs;
        got += (got.empty() ? "" : " ") + std::to_string(c.n) + "/" + std::to_string(c.block) + "->" + std::to_string(p);
    }
    return {ok, got};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Report CSVs carry wall-clock seconds in their last column; everything
/// else must match byte for byte.
std::string without_seconds(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, out;
    while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
}

Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "lsnw_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string bin = LSNW_BIN;
    auto sh = [&](const std::string& args) {
        const std::string cmd = "\"" + bin + "\" " + args + " 2>/dev/null";
        return std::system(cmd.c_str());
    };
    auto d = [&](const std::string& name) { return (dir / name).string(); };

    {
        std::ofstream raw(d("raw.csv"));
        raw << "value\n";
        for (double v : sst_stand_in(240, 7).values) raw << io::format_double(v) << "\n";
        std::ofstream a(d("a.csv"));
        a << "0.5,1\n2,3\n";
        std::ofstream b(d("b.csv"));
        b << "1,1\n-1,0.5\n";
    }
    struct Check {
        std::string name;
        std::vector<std::string> files;
        bool report;
    };
    std::vector<Check> checks;
    int failures = 0;
    for (const std::string th : {"1", "4"}) {
        const std::string t = " --threads " + th + " ";
        failures += sh("simulate --T 120 --N 25 --seed 5" + t + "--out " + d("sim" + th)) != 0;
        failures += sh("estimate --curves " + d("sim1.curves.csv") + " --responses " + d("sim1.responses.csv") +
                       " --query-index 60 --h 0.3" + t + "--out " + d("est" + th + ".csv")) != 0;
        failures += sh("cv --curves " + d("sim1.curves.csv") + " --responses " + d("sim1.responses.csv") +
                       " --grid-size 6" + t + "--out " + d("cv" + th + ".csv")) != 0;
        failures += sh("wasserstein " + d("a.csv") + " " + d("b.csv") + " --r 2" + t + "--manifest " +
                       d("ws" + th + ".json") + " > " + d("ws" + th + ".txt")) != 0;
        failures += sh("ingest --input " + d("raw.csv") + " --block-len 6 --j 2 --sigma 0.1 --seed 3" + t + "--out " +
                       d("ing" + th)) != 0;
        failures += sh("experiment-synthetic --process tvfar2 --k1 tricube --k2 gaussian --T 80,120 --u 0.5 --L 12 "
                       "--mc 3 --seed 42 --N 20" + t + "--out " + d("exs" + th + ".csv")) != 0;
        failures += sh("experiment-real --curves " + d("ing1.curves.csv") + " --responses " + d("ing1.responses.csv") +
                       " --sigma 0.05 --L 20 --mc 3 --seed 9" + t + "--out " + d("exr" + th + ".csv")) != 0;
    }
    const std::vector<std::pair<std::string, std::string>> files{
        {"sim1.curves.csv", "sim4.curves.csv"}, {"sim1.responses.csv", "sim4.responses.csv"},
        {"est1.csv", "est4.csv"},               {"cv1.csv", "cv4.csv"},
        {"ws1.txt", "ws4.txt"},                 {"ing1.curves.csv", "ing4.curves.csv"},
        {"ing1.responses.csv", "ing4.responses.csv"}, {"exs1.csv", "exs4.csv"},
        {"exr1.csv", "exr4.csv"}};
    int mismatches = 0;
    for (const auto& [a, b] : files) {
        std::string x = slurp(dir / a);
        std::string y = slurp(dir / b);
        if (a.rfind("ex", 0) == 0) {
            x = without_seconds(x);
            y = without_seconds(y);
        }
        if (x.empty() || x != y) {
            ++mismatches;
            std::cerr << "  mismatch: " << a << " vs " << b << "\n";
        }
    }
    fs::remove_all(dir);
    return {failures == 0 && mismatches == 0,
            std::to_string(files.size() - mismatches) + "/" + std::to_string(files.size()) +
                " outputs identical across --threads 1/4, " + std::to_string(failures) + " failed runs"};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int k = 1; k < argc; ++k) wanted.insert(std::atoi(argv[k]));
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
        {"wasserstein correctness", wasserstein_correctness},
        {"metric and inequality suite", metric_suite},
        {"estimator contracts", estimator_contracts},
        {"simulator calibration", simulator_calibration},
        {"desk-scale convergence trend", convergence_trend},
        {"smoothed-response ordinal check", smoothing_ordinal},
        {"segmentation arithmetic", segmentation_arithmetic},
        {"cli determinism", cli_determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[k].first
                  << "): " << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
