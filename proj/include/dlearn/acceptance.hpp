#pragma once

// The acceptance grid: twelve end-to-end checks that tie every bound to a
// Monte Carlo experiment or an exact oracle. Shared by `dlearn verify-all`
// and the acceptance test binary.
//
// Each criterion is a pure function of (seed, scale, threads) and its output
// contains no timing, so the rendered table is byte-stable.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dlearn/bounds.hpp"
#include "dlearn/core.hpp"
#include "dlearn/estimators.hpp"
#include "dlearn/harness.hpp"
#include "dlearn/io.hpp"
#include "dlearn/metrics.hpp"
#include "dlearn/rng.hpp"

namespace dlearn::acceptance {

enum class Scale { Smoke, Full };

inline Scale parse_scale(std::string_view s) {
  if (s == "smoke") return Scale::Smoke;
  if (s == "full") return Scale::Full;
  fail(ErrorCode::InvalidParam, "unknown scale '" + std::string(s) + "'");
}

struct Options {
  std::uint64_t seed = 42;
  Scale scale = Scale::Full;
  unsigned threads = 0;
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Wall-clock budget per criterion in seconds (full scale).
inline double time_limit_seconds(int id) {
  switch (id) {
    case 1: return 30;
    case 2: return 120;
    case 3: case 4: case 5: case 6: case 11: return 60;
    case 7: return 1;
    case 8: return 30;
    case 9: case 10: return 10;
    case 12: return 60;
    default: return 60;
  }
}

namespace detail {

inline std::uint64_t trials(const Options& o, std::uint64_t full) {
  return o.scale == Scale::Full ? full : std::max<std::uint64_t>(full / 10, 100);
}

inline std::uint64_t seed_for(const Options& o, int criterion, std::uint64_t index) {
  return derive_seed(o.seed, static_cast<std::uint64_t>(criterion) * 1000003ULL + index);
}

inline std::string trim_sep(std::string s) {
  while (s.size() >= 2 && s.compare(s.size() - 2, 2, "; ") == 0) s.resize(s.size() - 2);
  return s;
}

inline std::string g6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

inline DistSpec uniform(std::size_t k) { return {FamilySpec{Family::Uniform, k}, {}}; }

inline DistSpec zipf(std::size_t k, double s) {
  FamilySpec f{Family::Zipf, k};
  f.exponent = s;
  return {f, {}};
}

inline Distribution dirichlet(std::size_t k, std::uint64_t seed) {
  FamilySpec f{Family::Dirichlet, k};
  f.concentration = 1.0;
  f.seed = seed;
  return from_family(f);
}

/// log C(n, j) via lgamma.
inline double log_binom(std::uint64_t n, std::uint64_t j) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
         std::lgamma(static_cast<double>(n - j) + 1.0);
}

/// E|X/n - 1/2| for X ~ Binomial(n, 1/2), by enumeration.
inline double exact_expected_tv_fair_coin(std::uint64_t n) {
  double s = 0.0;
  for (std::uint64_t j = 0; j <= n; ++j) {
    const double w = std::exp(log_binom(n, j) - static_cast<double>(n) * std::log(2.0));
    s += w * std::abs(static_cast<double>(j) / static_cast<double>(n) - 0.5);
  }
  return s;
}

}  // namespace detail

// 1. E[TV(p, p_hat)] <= (1/2) sqrt(k/n), plus the exact fair-coin oracle.
inline CriterionResult criterion_tv_expectation(const Options& o) {
  CriterionResult res{1, "TV expectation bound", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  for (std::size_t k : {2, 10, 100}) {
    ExperimentConfig c;
    c.dist = detail::uniform(k);
    c.metric = MetricKind::TV;
    c.n = 100 * k;
    c.trials = detail::trials(o, 10000);
    c.base_seed = detail::seed_for(o, 1, idx++);
    c.threads = o.threads;
    const auto r = run_expectation(c);
    const bool ok = r.passed() && r.mean <= 0.05;
    res.passed = res.passed && ok;
    d << "k=" << k << " mean=" << detail::g6(r.mean) << " bound=0.05; ";
  }
  ExperimentConfig c;
  c.dist = detail::uniform(2);
  c.metric = MetricKind::TV;
  c.n = 100;
  c.trials = detail::trials(o, 10000);
  c.base_seed = detail::seed_for(o, 1, idx++);
  c.threads = o.threads;
  const auto r = run_expectation(c);
  const double exact = detail::exact_expected_tv_fair_coin(100);
  const bool ok = std::abs(r.mean - exact) <= 3.0 * r.std_err;
  res.passed = res.passed && ok;
  d << "k=2,n=100 mean=" << detail::g6(r.mean) << " exact=" << detail::g6(exact)
    << " 3se=" << detail::g6(3.0 * r.std_err);
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 2. Failure rate at n = sample_size_tv is certified below delta.
inline CriterionResult criterion_tv_failure_rate(const Options& o) {
  CriterionResult res{2, "TV failure-rate guarantee", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  double worst = 0.0;
  for (std::size_t k : {2, 10, 100}) {
    for (double eps : {0.1, 0.2}) {
      ExperimentConfig c;
      c.mode = Mode::FailureRate;
      c.dist = detail::uniform(k);
      c.metric = MetricKind::TV;
      c.eps = eps;
      c.delta = 0.05;
      c.auto_n = true;
      c.trials = detail::trials(o, 10000);
      c.base_seed = detail::seed_for(o, 2, idx++);
      c.threads = o.threads;
      const auto r = run_failure_rate(c);
      res.passed = res.passed && r.passed();
      worst = std::max(worst, r.failure_rate_upper);
    }
  }
  d << "6 configs, worst failure_rate_upper=" << detail::g6(worst) << " delta=0.05";
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 3. E[H^2(p, p_hat)] <= k/(2n) for uniform and Zipf(1).
inline CriterionResult criterion_hellinger_expectation(const Options& o) {
  CriterionResult res{3, "Hellinger expectation bound", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  for (bool is_zipf : {false, true}) {
    for (std::size_t k : {10, 100}) {
      ExperimentConfig c;
      c.dist = is_zipf ? detail::zipf(k, 1.0) : detail::uniform(k);
      c.metric = MetricKind::Hellinger;
      c.statistic = Statistic::Squared;
      c.n = 100 * k;
      c.trials = detail::trials(o, 10000);
      c.base_seed = detail::seed_for(o, 3, idx++);
      c.threads = o.threads;
      const auto r = run_expectation(c);
      const double bound = expected_hellinger_sq_bound(k, c.n);
      res.passed = res.passed && r.passed() && r.mean <= bound;
      d << (is_zipf ? "zipf" : "uniform") << " k=" << k << " margin="
        << detail::g6(bound - r.mean) << "; ";
    }
  }
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 4. Failure rate at the optimal Hellinger sample size.
inline CriterionResult criterion_hellinger_optimal(const Options& o) {
  CriterionResult res{4, "Hellinger optimal sample size", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  for (std::size_t k : {10, 100}) {
    ExperimentConfig c;
    c.mode = Mode::FailureRate;
    c.dist = detail::uniform(k);
    c.metric = MetricKind::Hellinger;
    c.tier = HellingerTier::Optimal;
    c.eps = 0.2;
    c.delta = 0.05;
    c.auto_n = true;
    c.trials = detail::trials(o, 10000);
    c.base_seed = detail::seed_for(o, 4, idx++);
    c.threads = o.threads;
    const auto r = run_failure_rate(c);
    res.passed = res.passed && r.passed();
    d << "k=" << k << " n=" << r.n << " upper=" << detail::g6(r.failure_rate_upper) << "; ";
  }
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 5. Empirical Kolmogorov exceedance below 2 exp(-2 n t^2).
inline CriterionResult criterion_dkw(const Options& o) {
  CriterionResult res{5, "DKW tail", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  for (std::uint64_t n : {50, 265}) {
    ExperimentConfig c;
    c.mode = Mode::TailCurve;
    c.dist = detail::uniform(20);
    c.metric = MetricKind::Kolmogorov;
    c.n = n;
    c.thresholds = {0.05, 0.1, 0.15, 0.2};
    c.trials = detail::trials(o, 100000);
    c.base_seed = detail::seed_for(o, 5, idx++);
    c.threads = o.threads;
    const auto r = run_tail_curve(c);
    bool ok = r.passed();
    for (const auto& row : r.tail_rows) ok = ok && row.asserted;
    res.passed = res.passed && ok;
    d << "n=" << n << " at t=0.2: " << detail::g6(r.tail_rows.back().empirical) << " <= "
      << detail::g6(*r.tail_rows.back().theoretical) << "; ";
  }
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 6. Empirical P[KL(p_hat || p) >= alpha] below the relative-entropy tail.
inline CriterionResult criterion_agrawal(const Options& o) {
  CriterionResult res{6, "Relative-entropy tail", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  for (std::size_t k : {2, 5}) {
    for (std::uint64_t n : {50, 100}) {
      const double alpha = 4.0 * static_cast<double>(k - 1) / static_cast<double>(n);
      ExperimentConfig c;
      c.mode = Mode::TailCurve;
      c.dist = detail::uniform(k);
      c.metric = MetricKind::KL;
      c.orientation = Orientation::EstimateFirst;
      c.n = n;
      c.thresholds = {alpha};
      c.trials = detail::trials(o, 100000);
      c.base_seed = detail::seed_for(o, 6, idx++);
      c.threads = o.threads;
      const auto r = run_tail_curve(c);
      const auto& row = r.tail_rows.front();
      res.passed = res.passed && r.passed() && row.asserted;
      d << "k=" << k << ",n=" << n << ": " << detail::g6(row.empirical) << " <= "
        << detail::g6(row.theoretical.value_or(0.0)) << "; ";
    }
  }
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 7. E[1/(N+1)] closed form against exhaustive enumeration.
inline CriterionResult criterion_binomial_inverse_moment(const Options&) {
  CriterionResult res{7, "Binomial inverse-moment identity", true, ""};
  double worst = 0.0;
  for (std::uint64_t r = 0; r <= 20; ++r) {
    for (int t = 1; t <= 10; ++t) {
      const double rho = t / 10.0;
      double oracle = 0.0;
      for (std::uint64_t j = 0; j <= r; ++j) {
        const double pj = std::exp(detail::log_binom(r, j)) * std::pow(rho, static_cast<double>(j)) *
                          std::pow(1.0 - rho, static_cast<double>(r - j));
        oracle += pj / (static_cast<double>(j) + 1.0);
      }
      worst = std::max(worst, std::abs(binomial_inverse_moment(r, rho) - oracle));
    }
  }
  res.passed = worst <= 1e-10;
  res.detail = "r<=20, rho in {0.1..1.0}, max abs error=" + detail::g6(worst);
  return res;
}

// 8. Inequality chains between all measures on random Dirichlet pairs.
inline CriterionResult criterion_inequality_chains(const Options& o) {
  CriterionResult res{8, "Metric inequality chains", true, ""};
  std::ostringstream d;
  const std::uint64_t pairs = detail::trials(o, 10000);
  std::uint64_t violations = 0;
  for (std::size_t k : {2, 10, 100}) {
    for (std::uint64_t i = 0; i < pairs; ++i) {
      const auto p = detail::dirichlet(k, detail::seed_for(o, 8, 2 * (k * pairs + i)));
      const auto q = detail::dirichlet(k, detail::seed_for(o, 8, 2 * (k * pairs + i) + 1));
      if (!all_hold(inequality_report(p, q))) ++violations;
    }
  }
  res.passed = violations == 0;
  d << pairs << " pairs per k in {2,10,100}, violations=" << violations;
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 9. (1/2) l1 equals the supremum over all 2^k subsets.
inline CriterionResult criterion_tv_subset_oracle(const Options& o) {
  CriterionResult res{9, "TV brute-force subset oracle", true, ""};
  const std::uint64_t pairs = o.scale == Scale::Full ? 100 : 20;
  double worst = 0.0;
  for (std::size_t k = 1; k <= 12; ++k) {
    for (std::uint64_t i = 0; i < pairs; ++i) {
      const auto p = detail::dirichlet(k, detail::seed_for(o, 9, 2 * (k * pairs + i)));
      const auto q = detail::dirichlet(k, detail::seed_for(o, 9, 2 * (k * pairs + i) + 1));
      double sup = 0.0;
      for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j)
          if (mask & (1u << j)) s += p.pmf()[j] - q.pmf()[j];
        sup = std::max(sup, s);
      }
      worst = std::max(worst, std::abs(total_variation(p, q) - sup));
    }
  }
  res.passed = worst <= 1e-10;
  res.detail = std::to_string(pairs) + " pairs per k<=12, max abs error=" + detail::g6(worst);
  return res;
}

// 10. KL(p || p_hat) is infinite whenever a light element is unsampled.
inline CriterionResult criterion_kl_unbounded(const Options& o) {
  CriterionResult res{10, "KL(p||p_hat) unboundedness", true, ""};
  const std::uint64_t t = detail::trials(o, 10000);
  const auto emp = run_kl_unbounded_demo(2, 100, 1e-4, t, detail::seed_for(o, 10, 0),
                                         EstimatorKind::empirical(), o.threads);
  const auto smooth = run_kl_unbounded_demo(2, 100, 1e-4, t, detail::seed_for(o, 10, 1),
                                            EstimatorKind::add_constant(1.0), o.threads);
  res.passed = emp.passed() && smooth.infinite_count == 0;
  std::ostringstream d;
  d << "empirical: fraction=" << detail::g6(static_cast<double>(emp.infinite_count) / t)
    << " analytic=" << detail::g6(std::pow(1.0 - 1e-4, 100)) << "; add-constant infinities="
    << smooth.infinite_count;
  res.detail = detail::trim_sep(d.str());
  return res;
}

// 11. Kolmogorov / linf / l2 sample sizes do not depend on k.
inline CriterionResult criterion_k_independence(const Options& o) {
  CriterionResult res{11, "k-independence of K/linf/l2 sample sizes", true, ""};
  std::ostringstream d;
  std::uint64_t idx = 0;
  for (MetricKind m : {MetricKind::Kolmogorov, MetricKind::Linf, MetricKind::L2}) {
    const auto small = sample_size(BoundRequest{m, 10, 0.1, 0.05});
    const auto large = sample_size(BoundRequest{m, 100000, 0.1, 0.05});
    const bool same = small.n == large.n && small.formula_terms == large.formula_terms &&
                      small.theorem == large.theorem;
    res.passed = res.passed && same;
    for (std::size_t k : {10, 1000}) {
      ExperimentConfig c;
      c.mode = Mode::FailureRate;
      c.dist = detail::uniform(k);
      c.metric = m;
      c.eps = 0.1;
      c.delta = 0.05;
      c.n = small.n;
      // At n=185 the Kolmogorov failure rate is about 0.043, so the upper
      // confidence limit needs 10^5 trials to clear 0.05 reliably, at any scale.
      c.trials = m == MetricKind::Kolmogorov ? 100000 : detail::trials(o, 10000);
      c.base_seed = detail::seed_for(o, 11, idx++);
      c.threads = o.threads;
      const auto r = run_failure_rate(c);
      res.passed = res.passed && r.passed();
    }
    d << to_string(m) << " n=" << small.n << (same ? "" : " (certificates differ!)") << "; ";
  }
  res.detail = detail::trim_sep(d.str());
  return res;
}

inline std::vector<std::function<CriterionResult(const Options&)>> base_criteria() {
  return {criterion_tv_expectation,    criterion_tv_failure_rate,
          criterion_hellinger_expectation, criterion_hellinger_optimal,
          criterion_dkw,               criterion_agrawal,
          criterion_binomial_inverse_moment, criterion_inequality_chains,
          criterion_tv_subset_oracle,  criterion_kl_unbounded,
          criterion_k_independence};
}

/// Human-readable table, one row per criterion.
inline std::string render_table(const std::vector<CriterionResult>& results) {
  std::ostringstream os;
  for (const auto& r : results) {
    os << std::setw(2) << r.id << "  " << (r.passed ? "PASS" : "FAIL") << "  " << r.name << "  ("
       << r.detail << ")\n";
  }
  return os.str();
}

inline io::json to_json(const std::vector<CriterionResult>& results) {
  io::json rows = io::json::array();
  for (const auto& r : results)
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.passed}, {"detail", r.detail}});
  return rows;
}

// 12. Criteria 1-11 at smoke scale render identically with 1 and 4 threads.
inline CriterionResult criterion_determinism(const Options& o) {
  CriterionResult res{12, "Determinism across thread counts", true, ""};
  std::vector<std::string> renders;
  for (unsigned threads : {1u, 4u}) {
    Options smoke{o.seed, Scale::Smoke, threads};
    std::vector<CriterionResult> rows;
    for (const auto& f : base_criteria()) rows.push_back(f(smoke));
    renders.push_back(render_table(rows));
  }
  res.passed = renders[0] == renders[1];
  res.detail = res.passed ? "smoke reports byte-identical for threads {1,4}"
                          : "smoke reports differ between threads 1 and 4";
  return res;
}

inline std::vector<std::function<CriterionResult(const Options&)>> all_criteria() {
  auto v = base_criteria();
  v.push_back(criterion_determinism);
  return v;
}

/// Runs every criterion; `on_done` (optional) receives each result with its wall time.
inline std::vector<CriterionResult> run_all(
    const Options& o,
    const std::function<void(const CriterionResult&, double seconds)>& on_done = {}) {
  std::vector<CriterionResult> out;
  for (const auto& f : all_criteria()) {
    const auto start = std::chrono::steady_clock::now();
    out.push_back(f(o));
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_done) on_done(out.back(), secs);
  }
  return out;
}

}  // namespace dlearn::acceptance
