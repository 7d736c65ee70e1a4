#pragma once

#include <cmath>
#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>

#include <boost/math/special_functions/beta.hpp>

#include "dlearn/error.hpp"

namespace dlearn::stats {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// One-sided Clopper-Pearson upper limit for a binomial proportion:
/// the p with P[Bin(trials, p) <= successes] = 1 - confidence.
inline double clopper_pearson_upper(std::uint64_t successes, std::uint64_t trials,
                                    double confidence = 0.95) {
  require(trials >= 1 && successes <= trials, ErrorCode::InvalidParam,
          "need 0 <= successes <= trials, trials >= 1");
  if (successes == trials) return 1.0;
  return boost::math::ibeta_inv(static_cast<double>(successes) + 1.0,
                                static_cast<double>(trials - successes), confidence);
}

/// One-sided Clopper-Pearson lower limit.
inline double clopper_pearson_lower(std::uint64_t successes, std::uint64_t trials,
                                    double confidence = 0.95) {
  require(trials >= 1 && successes <= trials, ErrorCode::InvalidParam,
          "need 0 <= successes <= trials, trials >= 1");
  if (successes == 0) return 0.0;
  return boost::math::ibeta_inv(static_cast<double>(successes),
                                static_cast<double>(trials - successes) + 1.0, 1.0 - confidence);
}

/// Wilson score interval at z = 1.959964 (95%).
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  require(trials >= 1 && successes <= trials, ErrorCode::InvalidParam,
          "need 0 <= successes <= trials, trials >= 1");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double ph = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (ph + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(ph * (1.0 - ph) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Summary {
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_err = 0.0;
  Interval ci95;          // normal approximation
};

/// Two-pass mean/variance over `xs` in index order.
inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  CompensatedSum sum;
  for (double x : xs) sum.add(x);
  s.mean = sum.value() / n;
  if (xs.size() >= 2) {
    CompensatedSum sq;
    for (double x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.variance = sq.value() / (n - 1.0);
  }
  s.std_err = std::sqrt(s.variance / n);
  constexpr double z = 1.959963984540054;
  s.ci95 = {s.mean - z * s.std_err, s.mean + z * s.std_err};
  return s;
}

}  // namespace dlearn::stats
