#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlearn/core.hpp"
#include "dlearn/error.hpp"

namespace dlearn {

/// Empirical estimator, or add-constant smoothing with pseudo-count c > 0.
struct EstimatorKind {
  enum class Tag { Empirical, AddConstant };
  Tag tag = Tag::Empirical;
  double c = 0.0;

  static EstimatorKind empirical() { return {}; }
  static EstimatorKind add_constant(double c) {
    require(std::isfinite(c) && c > 0.0, ErrorCode::InvalidParam, "add-constant c must be > 0");
    return {Tag::AddConstant, c};
  }

  friend bool operator==(const EstimatorKind&, const EstimatorKind&) = default;
};

inline std::string to_string(const EstimatorKind& e) {
  if (e.tag == EstimatorKind::Tag::Empirical) return "empirical";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), e.c);
  return "add-constant:" + std::string(buf.data(), res.ptr);
}

/// Accepts "empirical" or "add-constant:<c>".
inline EstimatorKind parse_estimator(std::string_view s) {
  if (s == "empirical") return EstimatorKind::empirical();
  constexpr std::string_view prefix = "add-constant:";
  if (s.substr(0, prefix.size()) == prefix) {
    const std::string arg(s.substr(prefix.size()));
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == arg.size() && !arg.empty(), ErrorCode::InvalidParam,
            "cannot parse add-constant value '" + arg + "'");
    return EstimatorKind::add_constant(c);
  }
  fail(ErrorCode::InvalidParam, "unknown estimator '" + std::string(s) + "'");
}

/// counts[i] / n.
inline Distribution empirical_from_counts(std::span<const std::uint64_t> counts) {
  std::uint64_t n = 0;
  for (auto c : counts) n += c;
  require(n >= 1, ErrorCode::InvalidParam, "empirical estimator needs at least one sample");
  std::vector<double> pmf(counts.size());
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) pmf[i] = static_cast<double>(counts[i]) / dn;
  return make_distribution(std::move(pmf));
}

/// (counts[i] + c) / (n + c k).
inline Distribution add_constant_from_counts(std::span<const std::uint64_t> counts, double c) {
  require(std::isfinite(c) && c > 0.0, ErrorCode::InvalidParam, "add-constant c must be > 0");
  std::uint64_t n = 0;
  for (auto x : counts) n += x;
  const double denom = static_cast<double>(n) + c * static_cast<double>(counts.size());
  std::vector<double> pmf(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    pmf[i] = (static_cast<double>(counts[i]) + c) / denom;
  return make_distribution(std::move(pmf));
}

namespace detail {

inline void check_samples_in_domain(const SampleSet& s, std::size_t k) {
  require(s.n() >= 1, ErrorCode::InvalidParam, "sample set is empty");
  for (auto x : s.samples) {
    if (x < 1 || x > k)
      fail(ErrorCode::OutOfDomain,
           "sample " + std::to_string(x) + " outside [1, " + std::to_string(k) + "]");
  }
  if (s.counts.size() != k)
    fail(ErrorCode::OutOfDomain, "histogram length does not match domain size " + std::to_string(k));
}

}  // namespace detail

inline Distribution empirical(const SampleSet& s, std::size_t k) {
  detail::check_samples_in_domain(s, k);
  return empirical_from_counts(s.counts);
}

inline Distribution add_constant(const SampleSet& s, std::size_t k, double c) {
  require(std::isfinite(c) && c > 0.0, ErrorCode::InvalidParam, "add-constant c must be > 0");
  detail::check_samples_in_domain(s, k);
  return add_constant_from_counts(s.counts, c);
}

inline Distribution estimate_from_counts(const EstimatorKind& kind,
                                         std::span<const std::uint64_t> counts) {
  return kind.tag == EstimatorKind::Tag::Empirical ? empirical_from_counts(counts)
                                                   : add_constant_from_counts(counts, kind.c);
}

inline Distribution estimate(const EstimatorKind& kind, const SampleSet& s, std::size_t k) {
  return kind.tag == EstimatorKind::Tag::Empirical ? empirical(s, k) : add_constant(s, k, kind.c);
}

}  // namespace dlearn
