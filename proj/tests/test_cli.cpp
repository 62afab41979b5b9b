#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "lsnw/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "lsnw");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = lsnw::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("lsnw_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }
    fs::path dir;
};

} // namespace

TEST_F(Cli, WassersteinDiracs) {
    spit(p("a.csv"), "value,weight\n0,1\n");
    spit(p("b.csv"), "1,1\n");
    const auto r = run({"wasserstein", p("a.csv"), p("b.csv"), "--manifest", p("w.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, "1.0\n");
    const auto m = nlohmann::json::parse(slurp(p("w.json")));
    EXPECT_EQ(m["subcommand"], "wasserstein");
    EXPECT_EQ(m["result"]["w1"], 1.0);

    const auto r2 = run({"wasserstein", p("a.csv"), p("b.csv"), "--r", "2"});
    EXPECT_EQ(r2.out, "1.0\n1.0\n");
    // without --manifest the manifest goes to the error stream
    EXPECT_NE(r2.err.find("\"subcommand\": \"wasserstein\""), std::string::npos);
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    const auto missing = run({"estimate", "--curves", "x.csv"});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("--responses"), std::string::npos);
    EXPECT_EQ(run({"simulate", "--T", "abc", "--out", p("s")}).code, 1);
    EXPECT_EQ(run({"estimate", "--help"}).code, 0);
}

TEST_F(Cli, DataErrors) {
    EXPECT_EQ(run({"wasserstein", p("nope.csv"), p("nope.csv")}).code, 2);
    spit(p("neg.csv"), "0,1\n1,-1\n");
    EXPECT_EQ(run({"wasserstein", p("neg.csv"), p("neg.csv")}).code, 2);
    spit(p("short.csv"), "1\n2\n3\n4\n5\n6\n");
    const auto r = run({"ingest", "--input", p("short.csv"), "--block-len", "2", "--j", "3", "--out", p("i")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("IndexOutOfBlock"), std::string::npos);
}

TEST_F(Cli, SimulateEstimateCvChain) {
    ASSERT_EQ(run({"simulate", "--T", "80", "--N", "30", "--seed", "3", "--out", p("sim")}).code, 0);
    const std::string curves = slurp(p("sim.curves.csv"));
    EXPECT_EQ(std::count(curves.begin(), curves.end(), '\n'), 80);
    const auto first_line = curves.substr(0, curves.find('\n'));
    EXPECT_EQ(std::count(first_line.begin(), first_line.end(), ','), 29);
    const auto manifest = nlohmann::json::parse(slurp(p("sim.manifest.json")));
    EXPECT_EQ(manifest["seed"], 3);
    EXPECT_EQ(manifest["config"]["T"], "80");
    EXPECT_TRUE(manifest.contains("started_at"));
    EXPECT_TRUE(manifest["timings"].contains("simulate"));

    const auto est = run({"estimate", "--curves", p("sim.curves.csv"), "--responses", p("sim.responses.csv"),
                          "--query-index", "40", "--h", "0.3", "--k2", "gaussian", "--out", p("est.csv")});
    ASSERT_EQ(est.code, 0) << est.err;
    const std::string table = slurp(p("est.csv"));
    EXPECT_EQ(table.rfind("atom,weight,cumweight\n", 0), 0u);
    EXPECT_NE(table.find(",1.0\n"), std::string::npos);
    EXPECT_TRUE(fs::exists(p("est.csv.manifest.json")));

    const auto cv = run({"cv", "--curves", p("sim.curves.csv"), "--responses", p("sim.responses.csv"), "--grid-min",
                         "0.1", "--grid-max", "0.5", "--grid-size", "5", "--mode", "local", "--k2", "gaussian"});
    ASSERT_EQ(cv.code, 0) << cv.err;
    EXPECT_EQ(cv.out.rfind("h,score,degenerate,selected\n0.10000000000000001,", 0), 0u);
    EXPECT_NE(cv.err.find("selected h = "), std::string::npos);
}

TEST_F(Cli, ConfigFileAndPrecedence) {
    spit(p("cfg.ini"), "T=12\nN=5\nseed=4\n");
    ASSERT_EQ(run({"simulate", "--config", p("cfg.ini"), "--out", p("a")}).code, 0);
    const std::string a = slurp(p("a.curves.csv"));
    EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 12);
    ASSERT_EQ(run({"simulate", "--config", p("cfg.ini"), "--T", "7", "--out", p("b")}).code, 0);
    const std::string b = slurp(p("b.curves.csv"));
    EXPECT_EQ(std::count(b.begin(), b.end(), '\n'), 7);
    ASSERT_EQ(run({"simulate", "--T", "12", "--N", "5", "--seed", "4", "--out", p("c")}).code, 0);
    EXPECT_EQ(slurp(p("c.curves.csv")), a);
    spit(p("bad.ini"), "T=12\nbogus=1\n");
    EXPECT_EQ(run({"simulate", "--config", p("bad.ini"), "--out", p("d")}).code, 1);
}

TEST_F(Cli, IngestThenExperimentReal) {
    std::string series = "sst\n";
    for (int k = 0; k < 240; ++k) series += std::to_string(20.0 + std::sin(k * 0.52) + 0.01 * (k % 7)) + "\n";
    spit(p("raw.csv"), series);
    ASSERT_EQ(run({"ingest", "--input", p("raw.csv"), "--block-len", "6", "--j", "3", "--out", p("ing")}).code, 0);
    const std::string resp = slurp(p("ing.responses.csv"));
    EXPECT_EQ(std::count(resp.begin(), resp.end(), '\n'), 39);
    const auto r = run({"experiment-real", "--curves", p("ing.curves.csv"), "--responses", p("ing.responses.csv"),
                        "--sigma", "0.01", "--L", "10", "--mc", "2", "--k2", "gaussian", "--out", p("real.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string rep = slurp(p("real.csv"));
    EXPECT_EQ(rep.rfind("T,u,w1_mean,w1_std,degenerate,seconds\n39,0.5,", 0), 0u);
    const auto direct = run({"experiment-real", "--input", p("raw.csv"), "--block-len", "6", "--j", "3", "--sigma",
                             "0.01", "--L", "10", "--mc", "2", "--k2", "gaussian", "--out", p("real2.csv")});
    ASSERT_EQ(direct.code, 0) << direct.err;
    auto strip_seconds = [](const std::string& s) { return s.substr(0, s.rfind(',')); };
    EXPECT_EQ(strip_seconds(slurp(p("real2.csv"))), strip_seconds(rep));
}

TEST_F(Cli, ExperimentSyntheticTwiceIsIdentical) {
    std::vector<std::string> args{"experiment-synthetic", "--process", "tvfar1", "--T", "60,90", "--u", "0.5",
                                  "--L", "5", "--mc", "2", "--seed", "42", "--N", "20"};
    auto a = run(args);
    auto b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    auto columns = [](const std::string& csv) {
        std::istringstream in(csv);
        std::string line, kept;
        while (std::getline(in, line)) kept += line.substr(0, line.rfind(',')) + "\n";
        return kept;
    };
    EXPECT_EQ(columns(a.out), columns(b.out));
    EXPECT_EQ(a.out.rfind("T,u,w1_mean,w1_std,degenerate,seconds\n60,0.5,", 0), 0u);
}
