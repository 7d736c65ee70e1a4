#pragma once

// Distances and divergences between two distributions on the same domain.
//
// Conventions: 0 * ln(0 / q) = 0 and 0^2 / 0 = 0; a term with p(i) > 0 and
// q(i) = 0 makes KL(p||q) and chi^2(p||q) infinite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlearn/core.hpp"
#include "dlearn/error.hpp"

namespace dlearn {

/// A value in [0, +inf]. Never NaN, never negative.
class ExtendedReal {
 public:
  constexpr ExtendedReal() = default;
  explicit ExtendedReal(double v) : value_(v) {
    require(!std::isnan(v) && v >= 0.0, ErrorCode::InvalidParam,
            "extended real must be nonnegative and not NaN");
  }

  static ExtendedReal infinity() { return ExtendedReal(std::numeric_limits<double>::infinity()); }

  double value() const noexcept { return value_; }
  bool is_infinite() const noexcept { return std::isinf(value_); }
  bool is_finite() const noexcept { return !is_infinite(); }

  friend auto operator<=>(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  double value_ = 0.0;
};

enum class MetricKind { TV, Hellinger, KL, ChiSquare, Kolmogorov, L2, Linf };

inline constexpr std::array<MetricKind, 7> kAllMetrics = {
    MetricKind::TV,         MetricKind::Hellinger, MetricKind::KL,  MetricKind::ChiSquare,
    MetricKind::Kolmogorov, MetricKind::L2,        MetricKind::Linf};

constexpr std::string_view to_string(MetricKind m) {
  switch (m) {
    case MetricKind::TV: return "tv";
    case MetricKind::Hellinger: return "hellinger";
    case MetricKind::KL: return "kl";
    case MetricKind::ChiSquare: return "chi2";
    case MetricKind::Kolmogorov: return "kolmogorov";
    case MetricKind::L2: return "l2";
    case MetricKind::Linf: return "linf";
  }
  return "?";
}

inline MetricKind parse_metric(std::string_view s) {
  if (s == "tv" || s == "TV") return MetricKind::TV;
  if (s == "hellinger" || s == "Hellinger") return MetricKind::Hellinger;
  if (s == "kl" || s == "KL") return MetricKind::KL;
  if (s == "chi2" || s == "chisquare" || s == "ChiSquare") return MetricKind::ChiSquare;
  if (s == "kolmogorov" || s == "Kolmogorov") return MetricKind::Kolmogorov;
  if (s == "l2" || s == "L2") return MetricKind::L2;
  if (s == "linf" || s == "Linf") return MetricKind::Linf;
  fail(ErrorCode::InvalidParam, "unknown metric '" + std::string(s) + "'");
}

constexpr bool is_symmetric(MetricKind m) {
  return m != MetricKind::KL && m != MetricKind::ChiSquare;
}

namespace detail {

inline void check_same_domain(const Distribution& p, const Distribution& q) {
  if (p.k() != q.k())
    fail(ErrorCode::DomainMismatch,
         "domain sizes differ (" + std::to_string(p.k()) + " vs " + std::to_string(q.k()) + ")");
}

inline constexpr std::size_t kCompensatedSumThreshold = 10000;

/// Ascending-index sum; Kahan-compensated once the domain is large.
template <typename Term>
double sum_terms(std::size_t k, Term&& term) {
  double sum = 0.0;
  if (k <= kCompensatedSumThreshold) {
    for (std::size_t i = 0; i < k; ++i) sum += term(i);
    return sum;
  }
  double c = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double y = term(i) - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  return sum;
}

}  // namespace detail

/// (1/2) * sum |p(i) - q(i)|, in [0, 1].
inline double total_variation(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

/// Squared Hellinger distance, (1/2) * sum (sqrt p(i) - sqrt q(i))^2, which
/// equals 1 - sum sqrt(p(i) q(i)) for normalized p and q.
inline double hellinger_squared(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::sqrt(a[i]) - std::sqrt(b[i]);
    s += d * d;
  }
  return std::clamp(0.5 * s, 0.0, 1.0);
}

inline double hellinger(const Distribution& p, const Distribution& q) {
  return std::sqrt(hellinger_squared(p, q));
}

/// Bhattacharyya coefficient sum sqrt(p(i) q(i)).
inline double bhattacharyya(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::sqrt(a[i] * b[i]);
  return s;
}

/// sum p(i) ln(p(i) / q(i)), natural log.
inline ExtendedReal kl_divergence(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0 && b[i] == 0.0) return ExtendedReal::infinity();
  }
  const double s = detail::sum_terms(a.size(), [&](std::size_t i) {
    return a[i] > 0.0 ? a[i] * std::log(a[i] / b[i]) : 0.0;
  });
  // Individual terms may be negative; only the rounding of the total can dip below 0.
  return ExtendedReal(std::max(s, 0.0));
}

/// sum (p(i) - q(i))^2 / q(i).
inline ExtendedReal chi_square(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (b[i] == 0.0) {
      if (a[i] > 0.0) return ExtendedReal::infinity();
      continue;
    }
    const double d = a[i] - b[i];
    s += d * d / b[i];
  }
  return ExtendedReal(s);
}

/// max_i |F_p(i) - F_q(i)| over the cumulative distribution functions.
inline double kolmogorov(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  const auto fp = cdf(p);
  const auto fq = cdf(q);
  double m = 0.0;
  for (std::size_t i = 0; i < fp.size(); ++i) m = std::max(m, std::abs(fp[i] - fq[i]));
  return std::clamp(m, 0.0, 1.0);
}

inline double l1(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

inline double l2(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double l_inf(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  auto a = p.pmf();
  auto b = q.pmf();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Dispatch by tag; KL and chi^2 may return +inf.
inline ExtendedReal distance(MetricKind kind, const Distribution& p, const Distribution& q) {
  switch (kind) {
    case MetricKind::TV: return ExtendedReal(total_variation(p, q));
    case MetricKind::Hellinger: return ExtendedReal(hellinger(p, q));
    case MetricKind::KL: return kl_divergence(p, q);
    case MetricKind::ChiSquare: return chi_square(p, q);
    case MetricKind::Kolmogorov: return ExtendedReal(kolmogorov(p, q));
    case MetricKind::L2: return ExtendedReal(l2(p, q));
    case MetricKind::Linf: return ExtendedReal(l_inf(p, q));
  }
  fail(ErrorCode::InvalidParam, "unknown metric");
}

// ---------------------------------------------------------------------------
// Inequality chains between the measures
// ---------------------------------------------------------------------------

inline constexpr double kInequalityTolerance = 1e-10;

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs; +inf when rhs is infinite
  bool holds = false;
};

using InequalityReport = std::vector<InequalityCheck>;

namespace detail {

inline InequalityCheck check_le(std::string name, double lhs, double rhs) {
  InequalityCheck c{std::move(name), lhs, rhs, 0.0, false};
  if (std::isinf(rhs)) {
    c.slack = std::numeric_limits<double>::infinity();
    c.holds = true;
  } else if (std::isinf(lhs)) {
    c.slack = -std::numeric_limits<double>::infinity();
    c.holds = false;
  } else {
    c.slack = rhs - lhs;
    c.holds = lhs <= rhs + kInequalityTolerance;
  }
  return c;
}

}  // namespace detail

/// Evaluates every pairwise relation between the measures:
///   (1/2) TV^2 <= H^2 <= TV,  2 TV^2 <= KL <= chi^2,
///   l2 <= 2 TV <= sqrt(k) l2,  linf <= l2,  l2^2 <= linf * l1,
///   (1/2) linf <= K <= TV.
inline InequalityReport inequality_report(const Distribution& p, const Distribution& q) {
  detail::check_same_domain(p, q);
  const double tv = total_variation(p, q);
  const double h2 = hellinger_squared(p, q);
  const double kl = kl_divergence(p, q).value();
  const double chi2 = chi_square(p, q).value();
  const double dk = kolmogorov(p, q);
  const double d1 = l1(p, q);
  const double d2 = l2(p, q);
  const double dinf = l_inf(p, q);
  const double sqrt_k = std::sqrt(static_cast<double>(p.k()));

  using detail::check_le;
  return {
      check_le("half_tv_sq_le_hellinger_sq", 0.5 * tv * tv, h2),
      check_le("hellinger_sq_le_tv", h2, tv),
      check_le("pinsker_two_tv_sq_le_kl", 2.0 * tv * tv, kl),
      check_le("kl_le_chi2", kl, chi2),
      check_le("l2_le_two_tv", d2, 2.0 * tv),
      check_le("two_tv_le_sqrt_k_l2", 2.0 * tv, sqrt_k * d2),
      check_le("linf_le_l2", dinf, d2),
      check_le("l2_sq_le_linf_l1", d2 * d2, dinf * d1),
      check_le("half_linf_le_kolmogorov", 0.5 * dinf, dk),
      check_le("kolmogorov_le_tv", dk, tv),
  };
}

inline bool all_hold(const InequalityReport& report) {
  return std::all_of(report.begin(), report.end(), [](const auto& c) { return c.holds; });
}

}  // namespace dlearn
