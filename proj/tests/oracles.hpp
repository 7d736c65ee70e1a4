#pragma once

// Test-only oracles. They compute the same quantities as the library through
// independent routes (enumeration, brute force) and must not call into it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace oracle {

/// max over all 2^k subsets S of p(S) - q(S).
inline double tv_subset_sup(std::span<const double> p, std::span<const double> q) {
  const std::size_t k = p.size();
  double best = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1) s += p[i] - q[i];
    best = std::max(best, s);
  }
  return best;
}

inline double log_choose(std::uint64_t n, std::uint64_t j) {
  return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
}

/// P[Binomial(n, rho) = j].
inline double binom_pmf(std::uint64_t n, std::uint64_t j, double rho) {
  if (rho == 0.0) return j == 0 ? 1.0 : 0.0;
  if (rho == 1.0) return j == n ? 1.0 : 0.0;
  return std::exp(log_choose(n, j) + j * std::log(rho) + (n - j) * std::log1p(-rho));
}

/// sum_j C(r, j) rho^j (1 - rho)^(r - j) / (j + 1).
inline double inverse_moment_enumeration(std::uint64_t r, double rho) {
  double s = 0.0;
  for (std::uint64_t j = 0; j <= r; ++j) s += binom_pmf(r, j, rho) / (j + 1.0);
  return s;
}

/// E|X/n - 1/2| for X ~ Binomial(n, 1/2).
inline double fair_coin_expected_tv(std::uint64_t n) {
  double s = 0.0;
  for (std::uint64_t j = 0; j <= n; ++j) s += binom_pmf(n, j, 0.5) * std::abs(double(j) / n - 0.5);
  return s;
}

/// P[|X/n - 1/2| > eps] for X ~ Binomial(n, 1/2).
inline double fair_coin_tail(std::uint64_t n, double eps) {
  double s = 0.0;
  for (std::uint64_t j = 0; j <= n; ++j)
    if (std::abs(double(j) / n - 0.5) > eps) s += binom_pmf(n, j, 0.5);
  return s;
}

/// Smallest n >= n0 with e^{-n a}(e a n/(k-1))^{k-1} <= delta, by linear scan.
inline std::uint64_t kl_scan(std::uint64_t k, double alpha, double delta, std::uint64_t n0) {
  for (std::uint64_t n = n0;; ++n) {
    const double v = std::exp(-double(n) * alpha) *
                     std::pow(std::exp(1.0) * alpha * n / double(k - 1), double(k - 1));
    if (v <= delta) return n;
  }
}

}  // namespace oracle
