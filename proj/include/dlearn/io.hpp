#pragma once

// JSON and CSV encodings of the library types. Infinite values are written as
// the string "inf" since JSON has no infinity literal.

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dlearn/bounds.hpp"
#include "dlearn/core.hpp"
#include "dlearn/error.hpp"
#include "dlearn/estimators.hpp"
#include "dlearn/harness.hpp"
#include "dlearn/metrics.hpp"

namespace dlearn::io {

using json = nlohmann::ordered_json;

inline json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json number(const ExtendedReal& v) { return number(v.value()); }

/// Accepts a JSON number or the strings "inf" / "-inf".
inline double to_double(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  fail(ErrorCode::InvalidConfig, what + " must be a number");
}

inline json parse_json(const std::string& text, ErrorCode code = ErrorCode::InvalidConfig) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(code, std::string("malformed JSON: ") + e.what());
  }
}

namespace detail {

template <typename T>
T get_as(const json& j, const char* key, const std::string& ctx) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidConfig, ctx + ": field '" + key + "' missing or of wrong type");
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const std::string& ctx) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    require(ok, ErrorCode::InvalidConfig, ctx + ": unknown field '" + it.key() + "'");
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Distribution specs and sample sets
// ---------------------------------------------------------------------------

/// {"pmf": [...]} or {"family": "...", "k": N, "params": {...}, "seed": N}.
inline DistSpec parse_dist_spec(const json& j) {
  require(j.is_object(), ErrorCode::InvalidConfig, "distribution spec must be a JSON object");
  DistSpec spec;
  if (j.contains("pmf")) {
    detail::reject_unknown(j, {"pmf"}, "distribution spec");
    require(j["pmf"].is_array(), ErrorCode::InvalidConfig, "pmf must be an array");
    for (const auto& x : j["pmf"]) spec.pmf.push_back(to_double(x, "pmf entry"));
    return spec;
  }
  require(j.contains("family"), ErrorCode::InvalidConfig,
          "distribution spec needs either 'pmf' or 'family'");
  detail::reject_unknown(j, {"family", "k", "params", "seed"}, "distribution spec");
  FamilySpec f;
  f.family = parse_family(detail::get_as<std::string>(j, "family", "distribution spec"));
  f.k = detail::get_as<std::size_t>(j, "k", "distribution spec");
  if (j.contains("seed")) f.seed = detail::get_as<std::uint64_t>(j, "seed", "distribution spec");
  if (j.contains("params")) {
    const auto& p = j["params"];
    require(p.is_object(), ErrorCode::InvalidConfig, "params must be an object");
    detail::reject_unknown(p, {"index", "bias", "exponent", "concentration"}, "params");
    if (p.contains("index")) f.index = detail::get_as<std::size_t>(p, "index", "params");
    if (p.contains("bias")) f.bias = detail::get_as<double>(p, "bias", "params");
    if (p.contains("exponent")) f.exponent = detail::get_as<double>(p, "exponent", "params");
    if (p.contains("concentration"))
      f.concentration = detail::get_as<double>(p, "concentration", "params");
  }
  spec.family = f;
  return spec;
}

inline json to_json(const DistSpec& spec) {
  if (!spec.family) {
    json pmf = json::array();
    for (double x : spec.pmf) pmf.push_back(x);
    return {{"pmf", pmf}};
  }
  const auto& f = *spec.family;
  json params = json::object();
  switch (f.family) {
    case Family::PointMass: params["index"] = f.index; break;
    case Family::TwoPoint: params["bias"] = f.bias; break;
    case Family::Zipf: params["exponent"] = f.exponent; break;
    case Family::Dirichlet: params["concentration"] = f.concentration; break;
    case Family::Uniform: break;
  }
  json out = {{"family", std::string(to_string(f.family))}, {"k", f.k}, {"params", params}};
  if (f.family == Family::Dirichlet) out["seed"] = f.seed;
  return out;
}

inline json to_json(const Distribution& d) {
  json pmf = json::array();
  for (double x : d.pmf()) pmf.push_back(x);
  return {{"k", d.k()}, {"pmf", pmf}};
}

inline json to_json(const SampleSet& s) {
  return {{"n", s.n()}, {"seed", s.seed}, {"counts", s.counts}};
}

// ---------------------------------------------------------------------------
// Metrics and certificates
// ---------------------------------------------------------------------------

inline json to_json(const InequalityReport& report) {
  json out = json::array();
  for (const auto& c : report) {
    out.push_back({{"name", c.name},
                   {"lhs", number(c.lhs)},
                   {"rhs", number(c.rhs)},
                   {"slack", number(c.slack)},
                   {"holds", c.holds}});
  }
  return out;
}

inline json to_json(const BoundCertificate& c) {
  json terms = json::object();
  for (const auto& t : c.formula_terms) terms[t.name] = number(t.value);
  json out = {{"metric", c.metric},
              {"tier", c.tier.empty() ? json(nullptr) : json(c.tier)},
              {"k", c.k},
              {"eps", c.eps},
              {"delta", c.delta},
              {"n", c.n},
              {"theorem", c.theorem},
              {"formula_terms", terms}};
  if (c.achieved_tail) out["achieved_tail"] = number(*c.achieved_tail);
  if (c.derived) out["derived"] = true;
  if (!c.notes.empty()) out["notes"] = c.notes;
  return out;
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// ExperimentConfig from its JSON form. Unknown fields are rejected.
inline ExperimentConfig parse_experiment_config(const json& j) {
  require(j.is_object(), ErrorCode::InvalidConfig, "experiment config must be a JSON object");
  detail::reject_unknown(j,
                         {"mode", "dist", "estimator", "metric", "orientation", "statistic", "n",
                          "auto_n", "tier", "trials", "seed", "base_seed", "thresholds", "eps",
                          "delta", "tail", "tiny_mass", "threads"},
                         "experiment config");
  const std::string ctx = "experiment config";
  ExperimentConfig c;
  try {
    if (j.contains("mode")) c.mode = parse_mode(detail::get_as<std::string>(j, "mode", ctx));
    require(j.contains("dist"), ErrorCode::InvalidConfig, "experiment config needs 'dist'");
    c.dist = parse_dist_spec(j["dist"]);
    (void)c.dist.resolve();  // surface invalid pmfs and family parameters now
    if (j.contains("estimator"))
      c.estimator = parse_estimator(detail::get_as<std::string>(j, "estimator", ctx));
    if (j.contains("metric")) c.metric = parse_metric(detail::get_as<std::string>(j, "metric", ctx));
    if (j.contains("orientation"))
      c.orientation = parse_orientation(detail::get_as<std::string>(j, "orientation", ctx));
    if (j.contains("statistic"))
      c.statistic = parse_statistic(detail::get_as<std::string>(j, "statistic", ctx));
    if (j.contains("n")) c.n = detail::get_as<std::uint64_t>(j, "n", ctx);
    if (j.contains("auto_n")) c.auto_n = detail::get_as<bool>(j, "auto_n", ctx);
    if (j.contains("tier")) c.tier = parse_tier(detail::get_as<std::string>(j, "tier", ctx));
    if (j.contains("trials")) c.trials = detail::get_as<std::uint64_t>(j, "trials", ctx);
    if (j.contains("seed")) c.base_seed = detail::get_as<std::uint64_t>(j, "seed", ctx);
    if (j.contains("base_seed")) c.base_seed = detail::get_as<std::uint64_t>(j, "base_seed", ctx);
    if (j.contains("thresholds"))
      c.thresholds = detail::get_as<std::vector<double>>(j, "thresholds", ctx);
    if (j.contains("eps")) c.eps = detail::get_as<double>(j, "eps", ctx);
    if (j.contains("delta")) c.delta = detail::get_as<double>(j, "delta", ctx);
    if (j.contains("tail")) c.tail = parse_tail_kind(detail::get_as<std::string>(j, "tail", ctx));
    if (j.contains("tiny_mass")) c.tiny_mass = detail::get_as<double>(j, "tiny_mass", ctx);
    if (j.contains("threads")) c.threads = detail::get_as<unsigned>(j, "threads", ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    fail(ErrorCode::InvalidConfig, e.what());
  }
  validate(c);
  return c;
}

inline json to_json(const ExperimentReport& r) {
  json out = {{"mode", std::string(to_string(r.mode))},
              {"metric", r.metric},
              {"estimator", r.estimator},
              {"orientation", r.orientation},
              {"statistic", r.statistic},
              {"rng", r.rng},
              {"k", r.k},
              {"n", r.n},
              {"trials", r.trials},
              {"base_seed", r.base_seed},
              {"mean", number(r.mean)},
              {"std_err", number(r.std_err)},
              {"ci95", {number(r.ci95.lo), number(r.ci95.hi)}},
              {"infinite_count", r.infinite_count}};
  if (r.mode == Mode::FailureRate) {
    out["eps"] = number(*r.eps);
    out["delta"] = number(*r.delta);
    out["failures"] = r.failures;
    out["failure_rate"] = number(r.failure_rate);
    out["failure_rate_upper"] = number(r.failure_rate_upper);
  }
  json theory = json::object();
  for (const auto& t : r.theory) theory[t.name] = number(t.value);
  out["theory"] = theory;
  json verdicts = json::array();
  for (const auto& v : r.verdicts) {
    verdicts.push_back({{"name", v.name},
                        {"lhs", number(v.lhs)},
                        {"relation", v.relation},
                        {"rhs", number(v.rhs)},
                        {"pass", v.passed}});
  }
  out["verdicts"] = verdicts;
  if (r.mode == Mode::TailCurve) {
    json rows = json::array();
    for (const auto& row : r.tail_rows) {
      rows.push_back({{"threshold", number(row.threshold)},
                      {"exceed_count", row.exceed_count},
                      {"empirical_tail", number(row.empirical)},
                      {"theoretical_tail", row.theoretical ? number(*row.theoretical) : json(nullptr)},
                      {"bound", row.bound},
                      {"asserted", row.asserted},
                      {"pass", row.passed}});
    }
    out["tail_curve"] = rows;
  }
  out["pass"] = r.passed();
  return out;
}

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return json(v).dump();
}

/// One row per threshold: threshold,exceed_count,empirical_tail,theoretical_tail,asserted,pass
inline std::string tail_curve_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "threshold,exceed_count,empirical_tail,theoretical_tail,asserted,pass\n";
  for (const auto& row : r.tail_rows) {
    os << format_double(row.threshold) << ',' << row.exceed_count << ','
       << format_double(row.empirical) << ','
       << (row.theoretical ? format_double(*row.theoretical) : std::string()) << ','
       << (row.asserted ? "true" : "false") << ',' << (row.passed ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace dlearn::io
