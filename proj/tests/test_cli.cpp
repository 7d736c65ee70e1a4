#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlearn/cli.hpp"

using dlearn::io::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dlearn::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string golden(const std::string& name) {
  std::ifstream f(std::string(DLEARN_SOURCE_DIR) + "/tests/golden/" + name);
  EXPECT_TRUE(f) << name;
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << content;
  return path;
}

}  // namespace

TEST(CliDistance, SingleMetric) {
  const auto r = run({"distance", "--p", R"({"pmf":[0.5,0.5]})", "--q", R"({"pmf":[0.8,0.2]})",
                      "--metric", "tv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["tv"].get<double>(), 0.3, 1e-15);
}

TEST(CliDistance, InfiniteKlIsAString) {
  const auto r = run({"distance", "--p", R"({"pmf":[0.5,0.5]})", "--q", R"({"pmf":[1,0]})",
                      "--metric", "kl"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["kl"], "inf");
}

TEST(CliDistance, AllMetricsWithInequalities) {
  const auto r = run({"distance", "--p", R"({"family":"uniform","k":4})", "--q",
                      R"({"family":"zipf","k":4})"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  for (const char* m : {"tv", "hellinger", "kl", "chi2", "kolmogorov", "l2", "linf"})
    EXPECT_TRUE(j.contains(m)) << m;
  EXPECT_EQ(j["inequalities"].size(), 10u);
  EXPECT_EQ(j["all_hold"], true);
}

TEST(CliDistance, MismatchedDomainsExit2) {
  const auto r = run({"distance", "--p", R"({"pmf":[1]})", "--q", R"({"pmf":[0.5,0.5]})"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(CliDistance, ReadsSpecFromFile) {
  const auto p = temp_file("dlearn_cli_p.json", R"({"pmf":[0.5,0.5]})");
  const auto r = run({"distance", "--p", "@" + p.string(), "--q", R"({"pmf":[1,0]})", "--metric",
                      "hellinger"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["hellinger"].get<double>(), 0.5411961, 1e-7);
}

TEST(CliEstimate, FromSamples) {
  const auto r = run({"estimate", "--samples", "1,1,2", "--k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j["pmf"][0].get<double>(), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(j["pmf"][2], 0.0);
  EXPECT_EQ(j["sample_set"]["counts"], json::parse("[2,1,0]"));
}

TEST(CliEstimate, AddConstant) {
  const auto r = run({"estimate", "--samples", "1", "--k", "2", "--estimator", "add-constant:0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["pmf"], json::parse("[0.75,0.25]"));
}

TEST(CliEstimate, FromDistributionIsSeeded) {
  const std::vector<std::string> args = {"estimate", "--dist", R"({"family":"uniform","k":5})",
                                         "--n", "40", "--seed", "8"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(json::parse(a.out)["sample_set"]["n"], 40);
}

TEST(CliEstimate, OutOfDomainSampleExit2) {
  EXPECT_EQ(run({"estimate", "--samples", "1,4", "--k", "3"}).code, 2);
  EXPECT_EQ(run({"estimate", "--samples", "1,x", "--k", "3"}).code, 2);
}

TEST(CliSampleSize, GoldenOutputs) {
  const auto tv = run({"sample-size", "--metric", "tv", "--k", "1000", "--eps", "0.1", "--delta",
                       "0.05"});
  ASSERT_EQ(tv.code, 0) << tv.err;
  EXPECT_EQ(tv.out, golden("sample_size_tv.json"));

  const auto ks = run({"sample-size", "--metric", "kolmogorov", "--eps", "0.1", "--delta", "0.01"});
  ASSERT_EQ(ks.code, 0) << ks.err;
  EXPECT_EQ(ks.out, golden("sample_size_kolmogorov.json"));

  const auto h = run({"sample-size", "--metric", "hellinger", "--tier", "optimal", "--k", "100",
                      "--eps", "0.1", "--delta", "0.05"});
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_EQ(h.out, golden("sample_size_hellinger_optimal.json"));
}

TEST(CliSampleSize, Values) {
  auto n_of = [](std::vector<std::string> args) {
    const auto r = run(std::move(args));
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out)["n"].get<std::uint64_t>();
  };
  EXPECT_EQ(n_of({"sample-size", "--metric", "tv-union", "--k", "100", "--eps", "0.1", "--delta",
                  "0.05"}),
            3616u);
  EXPECT_EQ(n_of({"sample-size", "--metric", "kl", "--k", "2", "--eps", "0.5", "--delta", "0.05"}),
            12u);
  EXPECT_EQ(n_of({"sample-size", "--metric", "linf", "--eps", "0.1", "--delta", "0.01"}), 1060u);
  EXPECT_EQ(n_of({"sample-size", "--metric", "l2", "--eps", "0.1", "--delta", "0.05"}), 1476u);
  EXPECT_EQ(n_of({"sample-size", "--metric", "hellinger", "--tier", "easy", "--k", "100", "--eps",
                  "0.1", "--delta", "0.05"}),
            1000000u);
}

TEST(CliSampleSize, ChiSquareIsUnsupported) {
  const auto r = run({"sample-size", "--metric", "chi2", "--k", "10", "--eps", "0.1", "--delta",
                      "0.05"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("open problem"), std::string::npos);
}

TEST(CliSampleSize, BadArgumentsExit2) {
  EXPECT_EQ(run({"sample-size", "--metric", "tv", "--k", "10", "--eps", "0", "--delta", "0.05"}).code,
            2);
  EXPECT_EQ(run({"sample-size", "--metric", "tv", "--k", "10", "--eps", "0.1"}).code, 2);
  EXPECT_EQ(run({"sample-size", "--metric", "tv", "--tier", "easy", "--k", "10", "--eps", "0.1",
                 "--delta", "0.1"})
                .code,
            2);
}

TEST(CliTail, Values) {
  const auto r = run({"tail", "--bound", "dkw", "--n", "100", "--eps", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out)["value"].get<double>(), 0.270671, 1e-6);

  const auto a = run({"tail", "--bound", "agrawal", "--n", "2", "--alpha", "1", "--k", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NEAR(json::parse(a.out)["value"].get<double>(), 0.735759, 1e-6);

  EXPECT_EQ(run({"tail", "--bound", "agrawal", "--n", "1", "--alpha", "0.5", "--k", "2"}).code, 2);
}

TEST(CliSimulate, FlagsExpectation) {
  const auto r = run({"simulate", "--family", "uniform", "--k", "2", "--n", "100", "--trials",
                      "2000", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["pass"], true);
  EXPECT_EQ(j["trials"], 2000);
  EXPECT_EQ(j["theory"]["expected_tv_bound"].get<double>(), 0.5 * std::sqrt(2.0 / 100));
}

TEST(CliSimulate, SeedFromEnvironment) {
  const std::vector<std::string> args = {"simulate", "--family", "zipf", "--k", "5", "--n", "20",
                                         "--trials", "300"};
  ::setenv("DLEARN_SEED", "77", 1);
  const auto a = run(args);
  ::unsetenv("DLEARN_SEED");
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(json::parse(a.out)["base_seed"], 77);
  EXPECT_EQ(json::parse(b.out)["base_seed"], 42);
}

TEST(CliSimulate, ConfigFileAndCsv) {
  const auto cfg = temp_file("dlearn_cli_tail.json", R"({
    "mode": "tail-curve",
    "dist": {"family": "uniform", "k": 10},
    "metric": "kolmogorov",
    "n": 100,
    "trials": 500,
    "seed": 5,
    "thresholds": [0.05, 0.1, 0.2]
  })");
  const auto j = run({"simulate", "--config", cfg.string()});
  ASSERT_EQ(j.code, 0) << j.err;
  EXPECT_EQ(json::parse(j.out)["tail_curve"].size(), 3u);

  const auto csv_path = std::filesystem::temp_directory_path() / "dlearn_cli_tail.csv";
  const auto c = run({"simulate", "--config", cfg.string(), "--csv", "--csv-file", csv_path.string()});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out.rfind("threshold,exceed_count,", 0), 0u);
  std::ifstream f(csv_path);
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), c.out);
}

TEST(CliSimulate, ThresholdsFlag) {
  const auto r = run({"simulate", "--mode", "tail-curve", "--metric", "linf", "--family", "uniform",
                      "--k", "4", "--n", "100", "--trials", "200", "--thresholds", "0.1,0.2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = json::parse(r.out)["tail_curve"];
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1]["threshold"], 0.2);
}

TEST(CliSimulate, KlUnbounded) {
  const auto r = run({"simulate", "--mode", "kl-unbounded", "--family", "uniform", "--k", "2",
                      "--n", "1", "--tiny-mass", "0.5", "--trials", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["infinite_count"], 100);
}

TEST(CliSimulate, FailedVerdictExits1) {
  // Far too few samples for the requested guarantee.
  const auto r = run({"simulate", "--mode", "failure-rate", "--family", "uniform", "--k", "50",
                      "--n", "10", "--eps", "0.05", "--delta", "0.05", "--trials", "200"});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_EQ(json::parse(r.out)["pass"], false);
}

TEST(CliSimulate, MalformedConfigExit2) {
  const auto bad = temp_file("dlearn_cli_bad.json", R"({"dist": {"family": "uniform"}, "n": 5})");
  EXPECT_EQ(run({"simulate", "--config", bad.string()}).code, 2);
  const auto junk = temp_file("dlearn_cli_junk.json", "{ nope");
  EXPECT_EQ(run({"simulate", "--config", junk.string()}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", "/nonexistent/dlearn.json"}).code, 2);
  EXPECT_EQ(run({"simulate", "--family", "uniform", "--k", "3", "--n", "5", "--csv"}).code, 2);
}

TEST(CliGeneral, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"distance", "--p", R"({"pmf":[1]})"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
}
