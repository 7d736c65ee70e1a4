#pragma once

// Seeded Monte Carlo experiments that check expectation bounds, failure-rate
// guarantees and tail curves against the closed forms in bounds.hpp.
//
// Trial t draws its samples from Rng(derive_seed(base_seed, t)), i.e. it sees
// exactly sample(p, n, derive_seed(base_seed, t)). Per-trial values are stored
// by trial index and reduced in index order, so a report is a pure function of
// the config and does not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dlearn/bounds.hpp"
#include "dlearn/core.hpp"
#include "dlearn/error.hpp"
#include "dlearn/estimators.hpp"
#include "dlearn/metrics.hpp"
#include "dlearn/rng.hpp"
#include "dlearn/stats.hpp"

namespace dlearn {

enum class Mode { Expectation, FailureRate, TailCurve, KlUnbounded };
/// TruthFirst evaluates metric(p, p_hat); EstimateFirst evaluates metric(p_hat, p).
enum class Orientation { TruthFirst, EstimateFirst };
enum class Statistic { Value, Squared };
enum class TailKind { None, Dkw, HoeffdingSubset, McDiarmidTv, Agrawal };

constexpr std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Expectation: return "expectation";
    case Mode::FailureRate: return "failure-rate";
    case Mode::TailCurve: return "tail-curve";
    case Mode::KlUnbounded: return "kl-unbounded";
  }
  return "?";
}
constexpr std::string_view to_string(Orientation o) {
  return o == Orientation::TruthFirst ? "truth-first" : "estimate-first";
}
constexpr std::string_view to_string(Statistic s) {
  return s == Statistic::Value ? "value" : "squared";
}
constexpr std::string_view to_string(TailKind t) {
  switch (t) {
    case TailKind::None: return "none";
    case TailKind::Dkw: return "dkw";
    case TailKind::HoeffdingSubset: return "hoeffding";
    case TailKind::McDiarmidTv: return "mcdiarmid-tv";
    case TailKind::Agrawal: return "agrawal";
  }
  return "?";
}

inline Mode parse_mode(std::string_view s) {
  if (s == "expectation") return Mode::Expectation;
  if (s == "failure-rate" || s == "failure_rate") return Mode::FailureRate;
  if (s == "tail-curve" || s == "tail_curve") return Mode::TailCurve;
  if (s == "kl-unbounded" || s == "kl_unbounded") return Mode::KlUnbounded;
  fail(ErrorCode::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}
inline Orientation parse_orientation(std::string_view s) {
  if (s == "truth-first" || s == "truth_first") return Orientation::TruthFirst;
  if (s == "estimate-first" || s == "estimate_first") return Orientation::EstimateFirst;
  fail(ErrorCode::InvalidConfig, "unknown orientation '" + std::string(s) + "'");
}
inline Statistic parse_statistic(std::string_view s) {
  if (s == "value") return Statistic::Value;
  if (s == "squared") return Statistic::Squared;
  fail(ErrorCode::InvalidConfig, "unknown statistic '" + std::string(s) + "'");
}
inline TailKind parse_tail_kind(std::string_view s) {
  if (s == "none") return TailKind::None;
  if (s == "dkw") return TailKind::Dkw;
  if (s == "hoeffding" || s == "hoeffding-subset") return TailKind::HoeffdingSubset;
  if (s == "mcdiarmid-tv" || s == "mcdiarmid") return TailKind::McDiarmidTv;
  if (s == "agrawal") return TailKind::Agrawal;
  fail(ErrorCode::InvalidParam, "unknown tail bound '" + std::string(s) + "'");
}

struct ExperimentConfig {
  Mode mode = Mode::Expectation;
  DistSpec dist;
  EstimatorKind estimator;
  MetricKind metric = MetricKind::TV;
  Orientation orientation = Orientation::TruthFirst;
  Statistic statistic = Statistic::Value;
  std::uint64_t n = 0;
  bool auto_n = false;  // take n from the matching sample-size certificate
  HellingerTier tier = HellingerTier::Optimal;
  std::uint64_t trials = 10000;
  std::uint64_t base_seed = 0;
  std::vector<double> thresholds;
  std::optional<double> eps;
  std::optional<double> delta;
  TailKind tail = TailKind::None;  // failure-rate: compare against this tail instead of delta
  double tiny_mass = 1e-4;         // kl-unbounded only
  unsigned threads = 0;            // 0 = hardware concurrency; never affects results
};

struct TheoryValue {
  std::string name;
  double value = 0.0;
};

struct Verdict {
  std::string name;
  double lhs = 0.0;
  std::string relation;  // "<=" or "within"
  double rhs = 0.0;
  bool passed = false;
};

struct TailRow {
  double threshold = 0.0;
  std::uint64_t exceed_count = 0;
  double empirical = 0.0;
  std::optional<double> theoretical;  // absent when no bound is asserted at this point
  std::string bound;                  // name of the tail formula, or why none applies
  bool asserted = false;
  bool passed = true;
};

struct ExperimentReport {
  Mode mode = Mode::Expectation;
  std::string metric;
  std::string estimator;
  std::string orientation;
  std::string statistic;
  std::string rng{kRngName};
  std::size_t k = 0;
  std::uint64_t n = 0;
  std::uint64_t trials = 0;
  std::uint64_t base_seed = 0;

  double mean = 0.0;
  double std_err = 0.0;
  stats::Interval ci95;
  std::uint64_t infinite_count = 0;

  std::optional<double> eps;
  std::optional<double> delta;
  std::uint64_t failures = 0;
  double failure_rate = 0.0;
  double failure_rate_upper = 0.0;

  std::vector<TheoryValue> theory;
  std::vector<Verdict> verdicts;
  std::vector<TailRow> tail_rows;

  bool passed() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.passed; }) &&
           std::all_of(tail_rows.begin(), tail_rows.end(), [](const auto& r) { return r.passed; });
  }
};

// Relative tolerance used when a metric is compared against a threshold. It
// only separates exact ties from float noise: strict comparisons ignore values
// within it above the threshold, inclusive ones accept values within it below.
inline constexpr double kTieTolerance = 1e-12;

inline bool exceeds(double value, double threshold, bool inclusive) {
  const double slack = kTieTolerance * std::max(1.0, std::abs(threshold));
  return inclusive ? value >= threshold - slack : value > threshold + slack;
}

namespace detail {

inline unsigned resolve_threads(unsigned requested, std::uint64_t trials) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::uint64_t>(t, trials));
}

inline Verdict verdict_le(std::string name, double lhs, double rhs) {
  return {std::move(name), lhs, "<=", rhs, lhs <= rhs};
}

}  // namespace detail

/// Per-trial metric values (possibly +inf), indexed by trial.
inline std::vector<double> run_trials(const Distribution& p, const EstimatorKind& estimator,
                                      MetricKind metric, Orientation orientation,
                                      Statistic statistic, std::uint64_t n, std::uint64_t trials,
                                      std::uint64_t base_seed, unsigned threads) {
  require(n >= 1, ErrorCode::InvalidConfig, "n must be >= 1");
  require(trials >= 1, ErrorCode::InvalidConfig, "trials must be >= 1");
  const Sampler sampler(p);
  std::vector<double> values(trials);

  auto work = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<std::uint64_t> counts(p.k());
    for (std::uint64_t t = begin; t < end; ++t) {
      Rng rng(derive_seed(base_seed, t));
      sampler.draw_counts(n, rng, counts);
      const Distribution est = estimate_from_counts(estimator, counts);
      const double v = orientation == Orientation::TruthFirst
                           ? distance(metric, p, est).value()
                           : distance(metric, est, p).value();
      values[t] = statistic == Statistic::Squared ? v * v : v;
    }
  };

  const unsigned nthreads = detail::resolve_threads(threads, trials);
  if (nthreads <= 1) {
    work(0, trials);
    return values;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::uint64_t chunk = (trials + nthreads - 1) / nthreads;
  for (unsigned w = 0; w < nthreads; ++w) {
    const std::uint64_t begin = std::min<std::uint64_t>(trials, w * chunk);
    const std::uint64_t end = std::min<std::uint64_t>(trials, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return values;
}

inline void validate(const ExperimentConfig& c) {
  require(c.trials >= 1, ErrorCode::InvalidConfig, "trials must be >= 1");
  require(c.auto_n || c.n >= 1 || c.mode == Mode::KlUnbounded, ErrorCode::InvalidConfig,
          "n must be >= 1 (or use auto-n)");
  for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
    require(std::isfinite(c.thresholds[i]) && c.thresholds[i] > 0.0, ErrorCode::InvalidConfig,
            "thresholds must be positive");
    require(i == 0 || c.thresholds[i] > c.thresholds[i - 1], ErrorCode::InvalidConfig,
            "thresholds must be strictly increasing");
  }
  if (c.eps) require(std::isfinite(*c.eps) && *c.eps > 0.0, ErrorCode::InvalidConfig, "eps must be > 0");
  if (c.delta)
    require(std::isfinite(*c.delta) && *c.delta > 0.0 && *c.delta <= 1.0, ErrorCode::InvalidConfig,
            "delta must lie in (0, 1]");
  if (c.auto_n)
    require(c.eps && c.delta, ErrorCode::InvalidConfig, "auto-n needs eps and delta");
  switch (c.mode) {
    case Mode::FailureRate:
      require(c.eps && c.delta, ErrorCode::InvalidConfig, "failure-rate mode needs eps and delta");
      break;
    case Mode::TailCurve:
      require(!c.thresholds.empty(), ErrorCode::InvalidConfig, "tail-curve mode needs thresholds");
      break;
    default: break;
  }
}

/// n as configured, or the certificate's n when auto_n is set.
inline std::uint64_t resolve_n(const ExperimentConfig& c, std::size_t k) {
  if (!c.auto_n) return c.n;
  try {
    return sample_size(BoundRequest{c.metric, k, *c.eps, *c.delta, c.tier}).n;
  } catch (const Error& e) {
    fail(ErrorCode::InvalidConfig, std::string("auto-n: ") + e.what());
  }
}

namespace detail {

inline ExperimentReport report_header(const ExperimentConfig& c, const Distribution& p,
                                      std::uint64_t n) {
  ExperimentReport r;
  r.mode = c.mode;
  r.metric = std::string(to_string(c.metric));
  r.estimator = to_string(c.estimator);
  r.orientation = std::string(to_string(c.orientation));
  r.statistic = std::string(to_string(c.statistic));
  r.k = p.k();
  r.n = n;
  r.trials = c.trials;
  r.base_seed = c.base_seed;
  r.eps = c.eps;
  r.delta = c.delta;
  return r;
}

/// Mean, standard error and CI over the finite values; infinities are counted.
inline void fill_summary(ExperimentReport& r, std::span<const double> values) {
  std::vector<double> finite;
  finite.reserve(values.size());
  for (double v : values) {
    if (std::isinf(v))
      ++r.infinite_count;
    else
      finite.push_back(v);
  }
  if (finite.empty()) {
    r.mean = std::numeric_limits<double>::infinity();
    r.std_err = 0.0;
    r.ci95 = {r.mean, r.mean};
    return;
  }
  const auto s = stats::summarize(finite);
  r.mean = s.mean;
  r.std_err = s.std_err;
  r.ci95 = s.ci95;
}

struct TailChoice {
  std::optional<double> value;
  std::string bound;
  bool inclusive = false;
};

/// The tail bound that applies to P[metric > t] (or >= t) at sample size n.
inline TailChoice tail_for(const ExperimentConfig& c, std::size_t k, std::uint64_t n, double t) {
  const double dn = static_cast<double>(n);
  const bool empirical = c.estimator.tag == EstimatorKind::Tag::Empirical;
  if (!empirical) return {std::nullopt, "none (bounds assume the empirical estimator)", false};
  if (c.statistic != Statistic::Value)
    return {std::nullopt, "none (tail bounds are stated for the unsquared metric)", false};
  switch (c.metric) {
    case MetricKind::Kolmogorov: return {tail_dkw(dn, t), "dkw", false};
    case MetricKind::Linf: return {tail_dkw(dn, t / 2.0), "dkw at t/2", false};
    case MetricKind::TV:
      if (expected_tv_bound(k, n) <= t / 2.0) return {tail_mcdiarmid_tv(dn, t), "mcdiarmid-tv", false};
      return {std::nullopt, "mcdiarmid-tv (not asserted: (1/2)sqrt(k/n) > t/2)", false};
    case MetricKind::L2:
      if (1.0 / std::sqrt(dn) <= t / 2.0)
        return {2.0 * std::exp(-dn * t * t / 4.0), "l2-bounded-differences", false};
      return {std::nullopt, "l2-bounded-differences (not asserted: 1/sqrt(n) > t/2)", false};
    case MetricKind::Hellinger:
      if (k >= 2 && dn >= static_cast<double>(k - 1) / (2.0 * t * t))
        return {tail_agrawal(dn, k, 2.0 * t * t), "agrawal at alpha = 2t^2", true};
      return {std::nullopt, "agrawal (not asserted: n < (k-1)/(2t^2))", true};
    case MetricKind::KL:
      if (c.orientation != Orientation::EstimateFirst)
        return {std::nullopt, "none (KL(p||p_hat) is unbounded)", false};
      if (k >= 2 && dn >= static_cast<double>(k - 1) / t)
        return {tail_agrawal(dn, k, t), "agrawal", true};
      return {std::nullopt, "agrawal (not asserted: n < (k-1)/alpha)", true};
    case MetricKind::ChiSquare: return {std::nullopt, "none", false};
  }
  return {std::nullopt, "none", false};
}

}  // namespace detail

/// Mean of the metric over trials, compared against the matching expectation bound.
inline ExperimentReport run_expectation(const ExperimentConfig& config) {
  validate(config);
  const Distribution p = config.dist.resolve();
  const std::uint64_t n = resolve_n(config, p.k());
  auto r = detail::report_header(config, p, n);
  r.mode = Mode::Expectation;
  const auto values = run_trials(p, config.estimator, config.metric, config.orientation,
                                 config.statistic, n, config.trials, config.base_seed,
                                 config.threads);
  detail::fill_summary(r, values);

  if (config.estimator.tag != EstimatorKind::Tag::Empirical) return r;
  if (config.metric == MetricKind::TV && config.statistic == Statistic::Value) {
    const double b = expected_tv_bound(p.k(), n);
    r.theory.push_back({"expected_tv_bound", b});
    r.verdicts.push_back(detail::verdict_le("mean_le_expected_tv_bound", r.mean, b));
  } else if (config.metric == MetricKind::Hellinger && config.statistic == Statistic::Squared) {
    const double b = expected_hellinger_sq_bound(p.k(), n);
    r.theory.push_back({"expected_hellinger_sq_bound", b});
    r.verdicts.push_back(detail::verdict_le("mean_le_expected_hellinger_sq_bound", r.mean, b));
  } else if (config.metric == MetricKind::L2 && config.statistic == Statistic::Squared) {
    const double exact = expected_l2_sq_exact(p, n);
    r.theory.push_back({"expected_l2_sq_exact", exact});
    const double gap = std::abs(r.mean - exact);
    r.verdicts.push_back({"mean_matches_expected_l2_sq_within_4se", gap, "<=", 4.0 * r.std_err,
                          gap <= 4.0 * r.std_err});
  }
  return r;
}

/// Fraction of trials with metric > eps, certified by a one-sided 95%
/// Clopper-Pearson upper limit against delta (or against a supplied tail bound).
inline ExperimentReport run_failure_rate(const ExperimentConfig& config) {
  validate(config);
  require(config.eps && config.delta, ErrorCode::InvalidConfig, "failure-rate needs eps and delta");
  const Distribution p = config.dist.resolve();
  const std::uint64_t n = resolve_n(config, p.k());
  auto r = detail::report_header(config, p, n);
  r.mode = Mode::FailureRate;
  const auto values = run_trials(p, config.estimator, config.metric, config.orientation,
                                 config.statistic, n, config.trials, config.base_seed,
                                 config.threads);
  detail::fill_summary(r, values);

  const double eps = *config.eps;
  for (double v : values) r.failures += exceeds(v, eps, false) ? 1 : 0;
  r.failure_rate = static_cast<double>(r.failures) / static_cast<double>(config.trials);
  r.failure_rate_upper = stats::clopper_pearson_upper(r.failures, config.trials, 0.95);
  r.theory.push_back({"delta", *config.delta});

  if (config.tail == TailKind::None) {
    r.verdicts.push_back(
        detail::verdict_le("failure_rate_upper_le_delta", r.failure_rate_upper, *config.delta));
    return r;
  }
  const double dn = static_cast<double>(n);
  double tail = 0.0;
  switch (config.tail) {
    case TailKind::Dkw: tail = tail_dkw(dn, eps); break;
    case TailKind::HoeffdingSubset: tail = tail_hoeffding_subset(dn, eps); break;
    case TailKind::McDiarmidTv: tail = tail_mcdiarmid_tv(dn, eps); break;
    case TailKind::Agrawal:
      try {
        tail = tail_agrawal(dn, p.k(), eps);
      } catch (const Error& e) {
        fail(ErrorCode::InvalidConfig, e.what());
      }
      break;
    case TailKind::None: break;
  }
  r.theory.push_back({std::string("tail_") + std::string(to_string(config.tail)), tail});
  r.verdicts.push_back(detail::verdict_le("failure_rate_upper_le_tail", r.failure_rate_upper, tail));
  return r;
}

/// Empirical exceedance per threshold next to the theoretical tail where one applies.
inline ExperimentReport run_tail_curve(const ExperimentConfig& config) {
  validate(config);
  require(!config.thresholds.empty(), ErrorCode::InvalidConfig, "tail curve needs thresholds");
  const Distribution p = config.dist.resolve();
  const std::uint64_t n = resolve_n(config, p.k());
  auto r = detail::report_header(config, p, n);
  r.mode = Mode::TailCurve;
  const auto values = run_trials(p, config.estimator, config.metric, config.orientation,
                                 config.statistic, n, config.trials, config.base_seed,
                                 config.threads);
  detail::fill_summary(r, values);

  for (double t : config.thresholds) {
    auto choice = detail::tail_for(config, p.k(), n, t);
    TailRow row;
    row.threshold = t;
    for (double v : values) row.exceed_count += exceeds(v, t, choice.inclusive) ? 1 : 0;
    row.empirical = static_cast<double>(row.exceed_count) / static_cast<double>(config.trials);
    row.theoretical = choice.value;
    row.bound = choice.bound;
    row.asserted = choice.value.has_value();
    row.passed = !row.asserted || row.empirical <= *choice.value;
    r.tail_rows.push_back(std::move(row));
  }
  return r;
}

// ---------------------------------------------------------------------------
// KL(p || p_hat) unboundedness
// ---------------------------------------------------------------------------

/// p = (1 - (k-1) m, m, ..., m): one heavy element and k-1 light ones.
inline Distribution light_tail_distribution(std::size_t k, double tiny_mass) {
  require(k >= 2, ErrorCode::InvalidConfig, "kl-unbounded needs k >= 2");
  require(tiny_mass > 0.0 && tiny_mass <= 1.0 / static_cast<double>(k), ErrorCode::InvalidConfig,
          "tiny mass must lie in (0, 1/k]");
  std::vector<double> pmf(k, tiny_mass);
  pmf[0] = 1.0 - static_cast<double>(k - 1) * tiny_mass;
  return make_distribution(std::move(pmf));
}

/// P[some element of light_tail_distribution(k, m) is absent from n draws],
/// by inclusion-exclusion over the missing set. For k = 2 this is
/// (1 - m)^n + m^n.
inline double analytic_missing_probability(std::size_t k, std::uint64_t n, double tiny_mass) {
  const double heavy = 1.0 - static_cast<double>(k - 1) * tiny_mass;
  const double dn = static_cast<double>(n);
  double total = 0.0;
  double binom = 1.0;  // C(k-1, j)
  for (std::size_t j = 0; j <= k - 1; ++j) {
    for (int with_heavy = 0; with_heavy <= 1; ++with_heavy) {
      const std::size_t size = j + static_cast<std::size_t>(with_heavy);
      if (size == 0) continue;
      const double remaining =
          std::max(0.0, 1.0 - static_cast<double>(j) * tiny_mass - with_heavy * heavy);
      const double sign = (size % 2 == 1) ? 1.0 : -1.0;
      total += sign * binom * std::pow(remaining, dn);
    }
    binom = binom * static_cast<double>(k - 1 - j) / static_cast<double>(j + 1);
  }
  return std::clamp(total, 0.0, 1.0);
}

/// Fraction of trials with KL(p || p_hat) = +inf, compared with the exact
/// probability that the estimate misses part of the support (zero for any
/// full-support estimator).
inline ExperimentReport run_kl_unbounded_demo(std::size_t k, std::uint64_t n, double tiny_mass,
                                              std::uint64_t trials, std::uint64_t seed,
                                              const EstimatorKind& estimator = {},
                                              unsigned threads = 0) {
  require(n >= 1 && trials >= 1, ErrorCode::InvalidConfig, "n and trials must be >= 1");
  const Distribution p = light_tail_distribution(k, tiny_mass);
  ExperimentConfig c;
  c.mode = Mode::KlUnbounded;
  c.estimator = estimator;
  c.metric = MetricKind::KL;
  c.orientation = Orientation::TruthFirst;
  c.n = n;
  c.trials = trials;
  c.base_seed = seed;
  c.tiny_mass = tiny_mass;
  auto r = detail::report_header(c, p, n);
  const auto values = run_trials(p, estimator, MetricKind::KL, Orientation::TruthFirst,
                                 Statistic::Value, n, trials, seed, threads);
  detail::fill_summary(r, values);

  const double fraction = static_cast<double>(r.infinite_count) / static_cast<double>(trials);
  const double analytic = estimator.tag == EstimatorKind::Tag::Empirical
                              ? analytic_missing_probability(k, n, tiny_mass)
                              : 0.0;
  const double se = std::sqrt(analytic * (1.0 - analytic) / static_cast<double>(trials));
  r.theory.push_back({"infinite_fraction", fraction});
  r.theory.push_back({"analytic_infinite_fraction", analytic});
  r.theory.push_back({"analytic_std_err", se});
  const double gap = std::abs(fraction - analytic);
  r.verdicts.push_back({"infinite_fraction_within_3se", gap, "<=", 3.0 * se, gap <= 3.0 * se});
  return r;
}

/// Dispatches on config.mode.
inline ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.mode) {
    case Mode::Expectation: return run_expectation(config);
    case Mode::FailureRate: return run_failure_rate(config);
    case Mode::TailCurve: return run_tail_curve(config);
    case Mode::KlUnbounded:
      return run_kl_unbounded_demo(config.dist.k(), config.n, config.tiny_mass, config.trials,
                                   config.base_seed, config.estimator, config.threads);
  }
  fail(ErrorCode::InvalidConfig, "unknown mode");
}

}  // namespace dlearn
