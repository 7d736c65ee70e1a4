#pragma once

// `dlearn` command-line front end. run() is the whole program minus main(), so
// tests can drive every subcommand in-process.
//
// Exit codes: 0 success / all verdicts pass, 1 a verdict failed, 2 usage or
// configuration error.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dlearn/acceptance.hpp"
#include "dlearn/bounds.hpp"
#include "dlearn/core.hpp"
#include "dlearn/error.hpp"
#include "dlearn/estimators.hpp"
#include "dlearn/harness.hpp"
#include "dlearn/io.hpp"
#include "dlearn/metrics.hpp"

namespace dlearn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kSeedEnv = "DLEARN_SEED";
inline constexpr std::uint64_t kDefaultSeed = 42;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::InvalidConfig, "cannot read '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Inline JSON, or @path to a JSON file.
inline io::json json_arg(const std::string& arg) {
  return io::parse_json(!arg.empty() && arg.front() == '@' ? read_file(arg.substr(1)) : arg);
}

inline std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::InvalidConfig, std::string(kSeedEnv) + " is not an unsigned integer");
  }
  return kDefaultSeed;
}

inline std::vector<std::uint32_t> parse_samples(const std::string& s) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == item.size() && !item.empty(), ErrorCode::InvalidParam,
            "cannot parse sample '" + item + "'");
    require(v >= 1 && v <= 0xFFFFFFFFLL, ErrorCode::OutOfDomain,
            "sample " + item + " is not a domain element");
    out.push_back(static_cast<std::uint32_t>(v));
  }
  return out;
}

inline void emit(std::ostream& out, const io::json& j) { out << j.dump(2) << '\n'; }

}  // namespace detail

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline int cmd_distance(const std::string& p_arg, const std::string& q_arg,
                        const std::string& metric, std::ostream& out) {
  const auto p = io::parse_dist_spec(detail::json_arg(p_arg)).resolve();
  const auto q = io::parse_dist_spec(detail::json_arg(q_arg)).resolve();
  io::json j = io::json::object();
  if (metric == "all") {
    for (MetricKind m : kAllMetrics) j[std::string(to_string(m))] = io::number(distance(m, p, q));
    const auto report = inequality_report(p, q);
    j["inequalities"] = io::to_json(report);
    j["all_hold"] = all_hold(report);
  } else {
    const MetricKind m = parse_metric(metric);
    j[std::string(to_string(m))] = io::number(distance(m, p, q));
  }
  detail::emit(out, j);
  return kExitOk;
}

struct EstimateArgs {
  std::string samples;
  std::string dist;
  std::size_t k = 0;
  std::uint64_t n = 0;
  std::optional<std::uint64_t> seed;
  std::string estimator = "empirical";
};

inline int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
  const EstimatorKind kind = parse_estimator(a.estimator);
  SampleSet s;
  std::size_t k = a.k;
  if (!a.samples.empty()) {
    require(a.dist.empty(), ErrorCode::InvalidConfig, "use either --samples or --dist, not both");
    require(k >= 1, ErrorCode::InvalidConfig, "--k is required with --samples");
    s = make_sample_set(detail::parse_samples(a.samples), k);
  } else {
    require(!a.dist.empty(), ErrorCode::InvalidConfig, "need --samples or --dist");
    require(a.n >= 1, ErrorCode::InvalidConfig, "--n is required with --dist");
    const auto p = io::parse_dist_spec(detail::json_arg(a.dist)).resolve();
    require(k == 0 || k == p.k(), ErrorCode::InvalidConfig, "--k disagrees with the distribution");
    k = p.k();
    s = sample(p, a.n, a.seed.value_or(detail::default_seed()));
  }
  const auto est = estimate(kind, s, k);
  io::json j = {{"estimator", to_string(kind)}, {"k", k}, {"sample_set", io::to_json(s)}};
  j["pmf"] = io::to_json(est)["pmf"];
  detail::emit(out, j);
  return kExitOk;
}

struct SampleSizeArgs {
  std::string metric;
  std::size_t k = 1;
  double eps = 0.0;
  double delta = 0.0;
  std::string tier;
};

inline int cmd_sample_size(const SampleSizeArgs& a, std::ostream& out) {
  if (a.metric == "chi2" || a.metric == "chisquare") {
    fail(ErrorCode::Unsupported,
         "no chi-square sample size: the optimal sample complexity of learning in chi-square "
         "divergence is an open problem");
  }
  require(a.tier.empty() || a.metric == "hellinger", ErrorCode::InvalidParam,
          "--tier only applies to --metric hellinger");
  BoundCertificate c;
  if (a.metric == "tv-union") {
    c = sample_size_tv_union(a.k, a.eps, a.delta);
  } else {
    BoundRequest req{parse_metric(a.metric), a.k, a.eps, a.delta,
                     a.tier.empty() ? HellingerTier::Optimal : parse_tier(a.tier)};
    c = sample_size(req);
  }
  detail::emit(out, io::to_json(c));
  return kExitOk;
}

struct TailArgs {
  std::string bound;
  double n = 0.0;
  std::optional<double> eps;
  std::size_t k = 0;
};

inline int cmd_tail(const TailArgs& a, std::ostream& out) {
  require(a.eps.has_value(), ErrorCode::InvalidParam, "--eps (or --alpha) is required");
  const TailKind kind = parse_tail_kind(a.bound);
  double v = 0.0;
  switch (kind) {
    case TailKind::Dkw: v = tail_dkw(a.n, *a.eps); break;
    case TailKind::HoeffdingSubset: v = tail_hoeffding_subset(a.n, *a.eps); break;
    case TailKind::McDiarmidTv: v = tail_mcdiarmid_tv(a.n, *a.eps); break;
    case TailKind::Agrawal: v = tail_agrawal(a.n, a.k, *a.eps); break;
    case TailKind::None: fail(ErrorCode::InvalidParam, "choose a tail bound");
  }
  io::json j = {{"bound", std::string(to_string(kind))}, {"n", a.n}, {"eps", *a.eps}};
  if (kind == TailKind::Agrawal) j["k"] = a.k;
  j["value"] = io::number(v);
  detail::emit(out, j);
  return kExitOk;
}

struct SimulateArgs {
  std::string config_path;
  std::string mode = "expectation";
  std::string metric = "tv";
  std::string dist;
  std::string family;
  std::size_t k = 0;
  std::size_t index = 1;
  double bias = 0.5;
  double exponent = 1.0;
  double concentration = 1.0;
  std::uint64_t dist_seed = 0;
  std::string estimator = "empirical";
  std::string orientation = "truth-first";
  std::string statistic = "value";
  std::uint64_t n = 0;
  bool auto_n = false;
  std::string tier;
  std::uint64_t trials = 10000;
  std::optional<std::uint64_t> seed;
  std::optional<double> eps;
  std::optional<double> delta;
  std::vector<double> thresholds;
  std::string tail = "none";
  double tiny_mass = 1e-4;
  std::optional<unsigned> threads;
  bool csv = false;
  std::string csv_file;
};

inline ExperimentConfig config_from_flags(const SimulateArgs& a) {
  ExperimentConfig c;
  c.mode = parse_mode(a.mode);
  if (!a.dist.empty()) {
    require(a.family.empty(), ErrorCode::InvalidConfig, "use either --dist or --family");
    c.dist = io::parse_dist_spec(detail::json_arg(a.dist));
  } else {
    require(!a.family.empty(), ErrorCode::InvalidConfig, "need --family or --dist");
    require(a.k >= 1, ErrorCode::InvalidConfig, "--k is required with --family");
    FamilySpec f;
    f.family = parse_family(a.family);
    f.k = a.k;
    f.index = a.index;
    f.bias = a.bias;
    f.exponent = a.exponent;
    f.concentration = a.concentration;
    f.seed = a.dist_seed;
    c.dist.family = f;
  }
  c.estimator = parse_estimator(a.estimator);
  c.metric = parse_metric(a.metric);
  c.orientation = parse_orientation(a.orientation);
  c.statistic = parse_statistic(a.statistic);
  c.n = a.n;
  c.auto_n = a.auto_n;
  if (!a.tier.empty()) c.tier = parse_tier(a.tier);
  c.trials = a.trials;
  c.base_seed = a.seed.value_or(detail::default_seed());
  c.thresholds = a.thresholds;
  c.eps = a.eps;
  c.delta = a.delta;
  c.tail = parse_tail_kind(a.tail);
  c.tiny_mass = a.tiny_mass;
  if (a.threads) c.threads = *a.threads;
  validate(c);
  return c;
}

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ExperimentConfig c;
  if (!a.config_path.empty()) {
    c = io::parse_experiment_config(io::parse_json(detail::read_file(a.config_path)));
    if (a.seed) c.base_seed = *a.seed;
    if (a.threads) c.threads = *a.threads;
  } else {
    c = config_from_flags(a);
  }
  require(!a.csv || c.mode == Mode::TailCurve, ErrorCode::InvalidConfig,
          "--csv is only available for tail-curve experiments");
  ExperimentReport r;
  try {
    r = run_experiment(c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    fail(ErrorCode::InvalidConfig, e.what());
  }
  if (!a.csv_file.empty()) {
    require(c.mode == Mode::TailCurve, ErrorCode::InvalidConfig,
            "--csv-file is only available for tail-curve experiments");
    std::ofstream f(a.csv_file);
    require(static_cast<bool>(f), ErrorCode::InvalidConfig, "cannot write '" + a.csv_file + "'");
    f << io::tail_curve_csv(r);
  }
  if (a.csv)
    out << io::tail_curve_csv(r);
  else
    detail::emit(out, io::to_json(r));
  return r.passed() ? kExitOk : kExitFailed;
}

struct VerifyArgs {
  std::optional<std::uint64_t> seed;
  std::string scale = "smoke";
  unsigned threads = 0;
  bool json = false;
  bool timings = false;
};

inline int cmd_verify_all(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
  acceptance::Options o{a.seed.value_or(detail::default_seed()), acceptance::parse_scale(a.scale),
                        a.threads};
  auto results = acceptance::run_all(o, [&](const acceptance::CriterionResult& r, double secs) {
    if (a.timings) err << "criterion " << r.id << ": " << secs << " s\n";
  });
  const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
  if (a.json) {
    detail::emit(out, {{"seed", o.seed},
                       {"scale", a.scale},
                       {"criteria", acceptance::to_json(results)},
                       {"pass", ok}});
  } else {
    out << "verify-all seed=" << o.seed << " scale=" << a.scale << '\n'
        << acceptance::render_table(results) << (ok ? "ALL PASS" : "SOME FAILED") << '\n';
  }
  return ok ? kExitOk : kExitFailed;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distances, sample-size bounds and Monte Carlo checks for learning discrete "
               "distributions",
               "dlearn"};
  app.require_subcommand(1);

  std::string p_arg, q_arg, metric_arg = "all";
  auto* distance = app.add_subcommand("distance", "Distance between two distributions");
  distance->add_option("--p", p_arg, "Distribution JSON spec (or @file)")->required();
  distance->add_option("--q", q_arg, "Distribution JSON spec (or @file)")->required();
  distance->add_option("--metric", metric_arg,
                       "tv|hellinger|kl|chi2|kolmogorov|l2|linf|all");

  EstimateArgs est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a distribution from samples");
  estimate_cmd->add_option("--samples", est.samples, "Comma-separated 1-based samples");
  estimate_cmd->add_option("--dist", est.dist, "Draw samples from this distribution spec");
  estimate_cmd->add_option("--k", est.k, "Domain size");
  estimate_cmd->add_option("--n", est.n, "Number of samples to draw with --dist");
  estimate_cmd->add_option("--seed", est.seed, "Sampling seed");
  estimate_cmd->add_option("--estimator", est.estimator, "empirical | add-constant:<c>");

  SampleSizeArgs ss;
  auto* sample_size_cmd = app.add_subcommand("sample-size", "Sample-size certificate");
  sample_size_cmd
      ->add_option("--metric", ss.metric, "tv|tv-union|hellinger|kl|kolmogorov|linf|l2")
      ->required();
  sample_size_cmd->add_option("--k", ss.k, "Domain size");
  sample_size_cmd->add_option("--eps", ss.eps, "Accuracy")->required();
  sample_size_cmd->add_option("--delta", ss.delta, "Failure probability")->required();
  sample_size_cmd->add_option("--tier", ss.tier, "Hellinger tier: easy|intermediate|optimal");

  TailArgs tl;
  auto* tail_cmd = app.add_subcommand("tail", "Evaluate a tail bound");
  tail_cmd->add_option("--bound", tl.bound, "dkw|hoeffding|mcdiarmid-tv|agrawal")->required();
  tail_cmd->add_option("--n", tl.n, "Sample size")->required();
  auto* eps_opt = tail_cmd->add_option("--eps", tl.eps, "Deviation");
  tail_cmd->add_option("--alpha", tl.eps, "KL level (agrawal)")->excludes(eps_opt);
  tail_cmd->add_option("--k", tl.k, "Domain size (agrawal)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo experiment");
  simulate->add_option("--config", sim.config_path, "ExperimentConfig JSON file");
  simulate->add_option("--mode", sim.mode, "expectation|failure-rate|tail-curve|kl-unbounded");
  simulate->add_option("--metric", sim.metric, "Metric");
  simulate->add_option("--dist", sim.dist, "Distribution JSON spec (or @file)");
  simulate->add_option("--family", sim.family, "uniform|point|two_point|zipf|dirichlet");
  simulate->add_option("--k", sim.k, "Domain size");
  simulate->add_option("--index", sim.index, "point_mass index");
  simulate->add_option("--bias", sim.bias, "two_point bias");
  simulate->add_option("--exponent", sim.exponent, "zipf exponent");
  simulate->add_option("--concentration", sim.concentration, "dirichlet concentration");
  simulate->add_option("--dist-seed", sim.dist_seed, "dirichlet seed");
  simulate->add_option("--estimator", sim.estimator, "empirical | add-constant:<c>");
  simulate->add_option("--orientation", sim.orientation, "truth-first | estimate-first");
  simulate->add_option("--statistic", sim.statistic, "value | squared");
  simulate->add_option("--n", sim.n, "Samples per trial");
  simulate->add_flag("--auto-n", sim.auto_n, "Take n from the sample-size certificate");
  simulate->add_option("--tier", sim.tier, "Hellinger tier for --auto-n");
  simulate->add_option("--trials", sim.trials, "Number of trials");
  simulate->add_option("--seed", sim.seed, "Base seed");
  simulate->add_option("--eps", sim.eps, "Accuracy");
  simulate->add_option("--delta", sim.delta, "Failure probability");
  simulate->add_option("--thresholds", sim.thresholds, "Tail thresholds")->delimiter(',');
  simulate->add_option("--tail", sim.tail, "Failure-rate comparison tail");
  simulate->add_option("--tiny-mass", sim.tiny_mass, "kl-unbounded light mass");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  simulate->add_flag("--csv", sim.csv, "Print the tail curve as CSV instead of JSON");
  simulate->add_option("--csv-file", sim.csv_file, "Also write the tail curve CSV here");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify-all", "Run the acceptance grid");
  verify->add_option("--seed", va.seed, "Base seed");
  verify->add_option("--scale", va.scale, "smoke | full");
  verify->add_option("--threads", va.threads, "Worker threads (0 = all cores)");
  verify->add_flag("--json", va.json, "JSON output");
  verify->add_flag("--timings", va.timings, "Print per-criterion wall time to stderr");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (distance->parsed()) return cmd_distance(p_arg, q_arg, metric_arg, out);
    if (estimate_cmd->parsed()) return cmd_estimate(est, out);
    if (sample_size_cmd->parsed()) return cmd_sample_size(ss, out);
    if (tail_cmd->parsed()) return cmd_tail(tl, out);
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (verify->parsed()) return cmd_verify_all(va, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << "error: no subcommand\n";
  return kExitUsage;
}

}  // namespace dlearn::cli
