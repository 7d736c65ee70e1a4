#pragma once

// Sample-size calculators, tail bounds and expectation bounds for learning a
// distribution on {1, ..., k} with the empirical estimator.
//
// Tail functions take a real-valued n so that inversion identities can be
// checked exactly; they are returned uncapped and may exceed 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlearn/core.hpp"
#include "dlearn/error.hpp"
#include "dlearn/metrics.hpp"

namespace dlearn {

enum class HellingerTier { Easy, Intermediate, Optimal };

constexpr std::string_view to_string(HellingerTier t) {
  switch (t) {
    case HellingerTier::Easy: return "easy";
    case HellingerTier::Intermediate: return "intermediate";
    case HellingerTier::Optimal: return "optimal";
  }
  return "?";
}

inline HellingerTier parse_tier(std::string_view s) {
  if (s == "easy") return HellingerTier::Easy;
  if (s == "intermediate") return HellingerTier::Intermediate;
  if (s == "optimal") return HellingerTier::Optimal;
  fail(ErrorCode::InvalidParam, "unknown Hellinger tier '" + std::string(s) + "'");
}

struct BoundRequest {
  MetricKind metric = MetricKind::TV;
  std::size_t k = 1;
  double eps = 0.1;
  double delta = 0.05;
  HellingerTier tier = HellingerTier::Optimal;
};

struct FormulaTerm {
  std::string name;
  double value = 0.0;

  friend bool operator==(const FormulaTerm&, const FormulaTerm&) = default;
};

/// Required sample count plus the evaluated pieces of the formula behind it.
struct BoundCertificate {
  std::string metric;
  std::string tier;  // empty unless Hellinger
  std::size_t k = 0;
  double eps = 0.0;
  double delta = 0.0;
  std::uint64_t n = 1;
  std::string theorem;
  std::vector<FormulaTerm> formula_terms;
  std::optional<double> achieved_tail;
  bool derived = false;
  std::vector<std::string> notes;
};

/// Ceiling that ignores floating-point noise within 1e-12 relative of an
/// integer, so exact equality cases (e.g. delta = 2 e^-2 for DKW) land on the
/// intended integer. Never returns less than 1.
inline std::uint64_t ceil_count(double x) {
  require(std::isfinite(x), ErrorCode::InvalidParam, "sample-size bound is not finite");
  if (x <= 1.0) return 1;
  const double r = std::round(x);
  const double v = std::abs(x - r) <= 1e-12 * x ? r : std::ceil(x);
  require(v < 0x1.0p63, ErrorCode::InvalidParam, "sample-size bound overflows 64 bits");
  return static_cast<std::uint64_t>(v);
}

namespace detail {

inline void check_eps_delta(double eps, double delta) {
  require(std::isfinite(eps) && eps > 0.0, ErrorCode::InvalidParam, "eps must be > 0");
  require(std::isfinite(delta) && delta > 0.0 && delta <= 1.0, ErrorCode::InvalidParam,
          "delta must lie in (0, 1]");
}

inline void check_k(std::size_t k) {
  require(k >= 1, ErrorCode::InvalidParam, "domain size k must be >= 1");
}

inline void check_tail_args(double n, double eps) {
  require(std::isfinite(n) && n >= 1.0, ErrorCode::InvalidParam, "n must be >= 1");
  require(std::isfinite(eps) && eps > 0.0, ErrorCode::InvalidParam, "eps must be > 0");
}

inline BoundCertificate make_cert(std::string metric, std::size_t k, double eps, double delta) {
  BoundCertificate c;
  c.metric = std::move(metric);
  c.k = k;
  c.eps = eps;
  c.delta = delta;
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tail bounds
// ---------------------------------------------------------------------------

/// P[K(p_hat, p) > eps] <= 2 exp(-2 n eps^2).
inline double tail_dkw(double n, double eps) {
  detail::check_tail_args(n, eps);
  return 2.0 * std::exp(-2.0 * n * eps * eps);
}

/// P[p_hat(S) > p(S) + eps] <= exp(-2 n eps^2) for one fixed subset S.
inline double tail_hoeffding_subset(double n, double eps) {
  detail::check_tail_args(n, eps);
  return std::exp(-2.0 * n * eps * eps);
}

/// P[|TV(p, p_hat) - E TV| >= eps / 2] <= 2 exp(-n eps^2 / 2)
/// (bounded differences with c = 1/n).
inline double tail_mcdiarmid_tv(double n, double eps) {
  detail::check_tail_args(n, eps);
  return 2.0 * std::exp(-0.5 * n * eps * eps);
}

/// Natural log of the relative-entropy tail e^{-n a} (e a n / (k-1))^{k-1}.
inline double log_tail_agrawal(double n, std::size_t k, double alpha) {
  require(k >= 2, ErrorCode::InvalidParam, "relative-entropy tail needs k >= 2");
  require(std::isfinite(alpha) && alpha > 0.0, ErrorCode::InvalidParam, "alpha must be > 0");
  require(std::isfinite(n) && n > 0.0, ErrorCode::InvalidParam, "n must be > 0");
  const double km1 = static_cast<double>(k - 1);
  require(n >= km1 / alpha, ErrorCode::PreconditionViolated,
          "relative-entropy tail only holds for n >= (k-1)/alpha");
  return -n * alpha + km1 * (1.0 + std::log(alpha * n / km1));
}

/// P[KL(p_hat || p) >= alpha] <= e^{-n alpha} (e alpha n / (k-1))^{k-1},
/// valid for n >= (k-1)/alpha.
inline double tail_agrawal(double n, std::size_t k, double alpha) {
  return std::exp(log_tail_agrawal(n, k, alpha));
}

// ---------------------------------------------------------------------------
// Expectation bounds and moment identities
// ---------------------------------------------------------------------------

/// E[TV(p, p_hat)] <= (1/2) sqrt(k / n).
inline double expected_tv_bound(std::size_t k, std::uint64_t n) {
  detail::check_k(k);
  require(n >= 1, ErrorCode::InvalidParam, "n must be >= 1");
  return 0.5 * std::sqrt(static_cast<double>(k) / static_cast<double>(n));
}

/// E[H(p, p_hat)^2] <= k / (2n).
inline double expected_hellinger_sq_bound(std::size_t k, std::uint64_t n) {
  detail::check_k(k);
  require(n >= 1, ErrorCode::InvalidParam, "n must be >= 1");
  return static_cast<double>(k) / (2.0 * static_cast<double>(n));
}

/// E[l2(p, p_hat)^2] = sum p(i)(1 - p(i)) / n, exactly.
inline double expected_l2_sq_exact(const Distribution& p, std::uint64_t n) {
  require(n >= 1, ErrorCode::InvalidParam, "n must be >= 1");
  double s = 0.0;
  for (double x : p.pmf()) s += x * (1.0 - x);
  return s / static_cast<double>(n);
}

/// E[1/(N+1)] for N ~ Binomial(r, rho): (1 - (1-rho)^{r+1}) / (rho (r+1)).
inline double binomial_inverse_moment(std::uint64_t r, double rho) {
  require(std::isfinite(rho) && rho > 0.0 && rho <= 1.0, ErrorCode::InvalidParam,
          "rho must lie in (0, 1]");
  const double r1 = static_cast<double>(r) + 1.0;
  return -std::expm1(r1 * std::log1p(-rho)) / (rho * r1);
}

// ---------------------------------------------------------------------------
// Sample-size calculators
// ---------------------------------------------------------------------------

/// n >= max(k / eps^2, (2 / eps^2) ln(2 / delta)).
inline BoundCertificate sample_size_tv(std::size_t k, double eps, double delta) {
  detail::check_k(k);
  detail::check_eps_delta(eps, delta);
  const double e2 = eps * eps;
  const double expectation = static_cast<double>(k) / e2;
  const double deviation = 2.0 / e2 * std::log(2.0 / delta);
  auto c = detail::make_cert("tv", k, eps, delta);
  c.theorem = "TV Theorem";
  c.formula_terms = {{"k/eps^2", expectation}, {"(2/eps^2)ln(2/delta)", deviation}};
  c.n = ceil_count(std::max(expectation, deviation));
  c.notes.push_back("expectation bound (1/2)sqrt(k/n) plus bounded-differences deviation");
  return c;
}

/// n >= (k ln 2 + ln(1/delta)) / (2 eps^2): Hoeffding on each of the 2^k subsets.
inline BoundCertificate sample_size_tv_union(std::size_t k, double eps, double delta) {
  detail::check_k(k);
  detail::check_eps_delta(eps, delta);
  const double e2 = eps * eps;
  const double subsets = static_cast<double>(k) * std::numbers::ln2;
  const double confidence = std::log(1.0 / delta);
  auto c = detail::make_cert("tv", k, eps, delta);
  c.tier = "union";
  c.theorem = "TV Theorem (union bound over subsets)";
  c.formula_terms = {{"k ln 2", subsets},
                     {"ln(1/delta)", confidence},
                     {"(k ln 2 + ln(1/delta))/(2 eps^2)", (subsets + confidence) / (2.0 * e2)}};
  c.n = ceil_count((subsets + confidence) / (2.0 * e2));
  return c;
}

inline BoundCertificate sample_size_hellinger(std::size_t k, double eps, double delta,
                                              HellingerTier tier) {
  detail::check_k(k);
  detail::check_eps_delta(eps, delta);
  require(eps <= 1.0, ErrorCode::InvalidParam, "Hellinger accuracy eps must be <= 1");
  const double kk = static_cast<double>(k);
  const double e2 = eps * eps;
  auto c = detail::make_cert("hellinger", k, eps, delta);
  c.tier = std::string(to_string(tier));
  switch (tier) {
    case HellingerTier::Easy: {
      // H^2 <= TV, so TV <= eps^2 suffices.
      auto tv = sample_size_tv(k, e2, delta);
      c.theorem = "Hellinger easy bound (TV at accuracy eps^2)";
      c.formula_terms = tv.formula_terms;
      c.n = tv.n;
      break;
    }
    case HellingerTier::Intermediate: {
      const double expectation = kk / e2;
      const double deviation = 8.0 / (e2 * e2) * std::log(1.0 / delta);
      c.theorem = "Hellinger intermediate bound";
      c.formula_terms = {{"k/eps^2", expectation}, {"(8/eps^4)ln(1/delta)", deviation}};
      c.n = ceil_count(std::max(expectation, deviation));
      break;
    }
    case HellingerTier::Optimal: {
      const double size_term = 15.0 * kk / (2.0 * std::numbers::e * e2);
      const double confidence = std::log(1.0 / delta) / e2;
      const double applicability = (kk - 1.0) / (2.0 * e2);
      const double in_text = 15.0 * kk / (2.0 * e2);
      c.theorem = "Hellinger Theorem (relative-entropy tail at alpha = 2 eps^2)";
      c.formula_terms = {{"15k/(2e eps^2)", size_term},
                         {"ln(1/delta)/eps^2", confidence},
                         {"(k-1)/(2 eps^2)", applicability},
                         {"15k/(2 eps^2)", in_text}};
      c.n = ceil_count(std::max({size_term, confidence, applicability}));
      c.notes.push_back(
          "n uses the 15k/(2e eps^2) constant; the 15k/(2 eps^2) variant is reported for "
          "comparison only");
      break;
    }
  }
  return c;
}

/// Smallest n >= ceil((k-1)/eps) with tail_agrawal(n, k, eps) <= delta.
/// The tail is strictly decreasing there, so doubling then bisection finds it.
inline BoundCertificate sample_size_kl(std::size_t k, double eps, double delta) {
  detail::check_k(k);
  detail::check_eps_delta(eps, delta);
  auto c = detail::make_cert("kl", k, eps, delta);
  c.theorem = "KL Theorem (inversion of the relative-entropy tail)";
  if (k == 1) {
    c.n = 1;
    c.achieved_tail = 0.0;
    c.notes.push_back("KL is identically 0 on a single-point domain");
    return c;
  }
  const double km1 = static_cast<double>(k - 1);
  std::uint64_t floor_n = ceil_count(km1 / eps);
  if (static_cast<double>(floor_n) < km1 / eps) ++floor_n;
  const double log_delta = std::log(delta);
  auto ok = [&](std::uint64_t n) {
    return log_tail_agrawal(static_cast<double>(n), k, eps) <= log_delta;
  };
  constexpr std::uint64_t cap = std::uint64_t{1} << 62;

  std::uint64_t n = floor_n;
  if (!ok(floor_n)) {
    std::uint64_t lo = floor_n;  // fails
    std::uint64_t hi = floor_n;
    do {
      lo = hi;
      require(hi <= cap / 2, ErrorCode::InvalidParam, "KL sample size exceeds 2^62");
      hi *= 2;
    } while (!ok(hi));
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (ok(mid) ? hi : lo) = mid;
    }
    n = hi;
  }
  c.n = n;
  c.achieved_tail = tail_agrawal(static_cast<double>(n), k, eps);
  c.formula_terms = {{"(k-1)/eps", km1 / eps},
                     {"(k + ln(1/delta))/eps", (static_cast<double>(k) + std::log(1.0 / delta)) / eps}};
  return c;
}

/// Inverts 2 exp(-2 n eps^2) <= delta. Independent of k.
inline BoundCertificate sample_size_kolmogorov(double eps, double delta) {
  detail::check_eps_delta(eps, delta);
  const double v = std::log(2.0 / delta) / (2.0 * eps * eps);
  auto c = detail::make_cert("kolmogorov", 0, eps, delta);
  c.theorem = "DKW inequality (Massart constant)";
  c.formula_terms = {{"ln(2/delta)/(2 eps^2)", v}};
  c.n = ceil_count(v);
  return c;
}

/// linf <= 2 K, so the Kolmogorov size at eps/2 suffices.
inline BoundCertificate sample_size_linf(double eps, double delta) {
  detail::check_eps_delta(eps, delta);
  auto inner = sample_size_kolmogorov(eps / 2.0, delta);
  auto c = detail::make_cert("linf", 0, eps, delta);
  c.theorem = "Linf via DKW at eps/2";
  c.formula_terms = {{"2 ln(2/delta)/eps^2", inner.formula_terms.front().value}};
  c.n = inner.n;
  return c;
}

/// E[l2] <= 1/sqrt(n) gives the 4/eps^2 term; bounded differences with a
/// per-sample change of sqrt(2)/n gives P[|l2 - E l2| >= eps/2] <= 2e^{-n eps^2/4}.
inline BoundCertificate sample_size_l2(double eps, double delta) {
  detail::check_eps_delta(eps, delta);
  const double e2 = eps * eps;
  const double expectation = 4.0 / e2;
  const double deviation = 4.0 / e2 * std::log(2.0 / delta);
  auto c = detail::make_cert("l2", 0, eps, delta);
  c.theorem = "L2 bound (expectation + bounded differences)";
  c.formula_terms = {{"4/eps^2", expectation}, {"(4/eps^2)ln(2/delta)", deviation}};
  c.n = ceil_count(std::max(expectation, deviation));
  c.derived = true;
  c.notes.push_back("closed form derived here; only the rate log(1/delta)/eps^2 is classical");
  return c;
}

/// Dispatch on the metric. chi^2 has no known sample-size formula.
inline BoundCertificate sample_size(const BoundRequest& req) {
  switch (req.metric) {
    case MetricKind::TV: return sample_size_tv(req.k, req.eps, req.delta);
    case MetricKind::Hellinger: return sample_size_hellinger(req.k, req.eps, req.delta, req.tier);
    case MetricKind::KL: return sample_size_kl(req.k, req.eps, req.delta);
    case MetricKind::Kolmogorov: {
      auto c = sample_size_kolmogorov(req.eps, req.delta);
      c.k = req.k;
      return c;
    }
    case MetricKind::Linf: {
      auto c = sample_size_linf(req.eps, req.delta);
      c.k = req.k;
      return c;
    }
    case MetricKind::L2: {
      auto c = sample_size_l2(req.eps, req.delta);
      c.k = req.k;
      return c;
    }
    case MetricKind::ChiSquare:
      fail(ErrorCode::Unsupported,
           "no chi-square sample-size formula: the optimal sample complexity of learning in "
           "chi-square divergence is an open problem");
  }
  fail(ErrorCode::InvalidParam, "unknown metric");
}

}  // namespace dlearn
