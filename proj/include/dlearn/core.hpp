#pragma once

// Distributions over the finite domain {1, ..., k}, named families, seeded
// sampling and cumulative distribution functions.
//
// Domain elements are 1-based everywhere they are visible (samples, point-mass
// indices, JSON). Internally pmf()[i - 1] is the mass of element i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlearn/error.hpp"
#include "dlearn/rng.hpp"

namespace dlearn {

inline constexpr double kConstructionTolerance = 1e-9;
inline constexpr double kNormalizedTolerance = 1e-12;

/// Validated probability mass function over {1, ..., k}. Immutable.
class Distribution {
 public:
  std::size_t k() const noexcept { return pmf_.size(); }
  std::span<const double> pmf() const noexcept { return pmf_; }
  /// Mass of domain element i, 1-based.
  double mass(std::size_t i) const { return pmf_.at(i - 1); }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  explicit Distribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {}
  friend Distribution make_distribution(std::vector<double> pmf);

  std::vector<double> pmf_;
};

/// Validates `pmf` (finite, nonnegative, sums to 1 within 1e-9) and rescales
/// it so the stored masses sum to 1 in double precision.
inline Distribution make_distribution(std::vector<double> pmf) {
  require(!pmf.empty(), ErrorCode::EmptyDomain, "pmf must have at least one entry");
  double total = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (!std::isfinite(pmf[i]))
      fail(ErrorCode::InvalidParam, "pmf entry " + std::to_string(i + 1) + " is not finite");
    if (pmf[i] < 0.0)
      fail(ErrorCode::NegativeMass, "pmf entry " + std::to_string(i + 1) + " is negative");
    total += pmf[i];
  }
  if (!(std::abs(total - 1.0) <= kConstructionTolerance))
    fail(ErrorCode::NotNormalized, "pmf sums to " + std::to_string(total));
  if (total != 1.0) {
    for (double& x : pmf) x /= total;
  }
  return Distribution(std::move(pmf));
}

/// Running sums F[i] = p(1) + ... + p(i + 1); the last entry is 1 up to rounding.
inline std::vector<double> cdf(const Distribution& dist) {
  std::vector<double> out(dist.k());
  double acc = 0.0;
  auto pmf = dist.pmf();
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i];
    out[i] = acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Named families
// ---------------------------------------------------------------------------

enum class Family { Uniform, PointMass, TwoPoint, Zipf, Dirichlet };

constexpr std::string_view to_string(Family f) {
  switch (f) {
    case Family::Uniform: return "uniform";
    case Family::PointMass: return "point_mass";
    case Family::TwoPoint: return "two_point";
    case Family::Zipf: return "zipf";
    case Family::Dirichlet: return "dirichlet";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  if (name == "uniform") return Family::Uniform;
  if (name == "point_mass" || name == "point" || name == "point-mass") return Family::PointMass;
  if (name == "two_point" || name == "two-point") return Family::TwoPoint;
  if (name == "zipf") return Family::Zipf;
  if (name == "dirichlet") return Family::Dirichlet;
  fail(ErrorCode::InvalidParam, "unknown family '" + std::string(name) + "'");
}

struct FamilySpec {
  Family family = Family::Uniform;
  std::size_t k = 1;
  std::size_t index = 1;       // point_mass: the supported element
  double bias = 0.5;           // two_point: mass of element 1, the rest on element 2
  double exponent = 1.0;       // zipf: p(i) proportional to i^-exponent
  double concentration = 1.0;  // dirichlet: symmetric concentration
  std::uint64_t seed = 0;      // dirichlet only

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

inline Distribution from_family(const FamilySpec& spec) {
  const std::size_t k = spec.k;
  require(k >= 1, ErrorCode::InvalidParam, "family domain size must be >= 1");
  std::vector<double> pmf(k, 0.0);
  switch (spec.family) {
    case Family::Uniform:
      std::fill(pmf.begin(), pmf.end(), 1.0 / static_cast<double>(k));
      break;
    case Family::PointMass:
      require(spec.index >= 1 && spec.index <= k, ErrorCode::InvalidParam,
              "point_mass index must lie in [1, k]");
      pmf[spec.index - 1] = 1.0;
      break;
    case Family::TwoPoint:
      require(k >= 2, ErrorCode::InvalidParam, "two_point needs k >= 2");
      require(spec.bias >= 0.0 && spec.bias <= 1.0, ErrorCode::InvalidParam,
              "two_point bias must lie in [0, 1]");
      pmf[0] = spec.bias;
      pmf[1] = 1.0 - spec.bias;
      break;
    case Family::Zipf: {
      require(std::isfinite(spec.exponent) && spec.exponent > 0.0, ErrorCode::InvalidParam,
              "zipf exponent must be > 0");
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        pmf[i] = std::pow(static_cast<double>(i + 1), -spec.exponent);
        total += pmf[i];
      }
      for (double& x : pmf) x /= total;
      break;
    }
    case Family::Dirichlet: {
      require(std::isfinite(spec.concentration) && spec.concentration > 0.0,
              ErrorCode::InvalidParam, "dirichlet concentration must be > 0");
      Rng rng(spec.seed);
      std::gamma_distribution<double> gamma(spec.concentration, 1.0);
      double total = 0.0;
      for (double& x : pmf) {
        x = gamma(rng);
        total += x;
      }
      if (total > 0.0) {
        for (double& x : pmf) x /= total;
      } else {
        // Every draw underflowed (tiny concentration): the limit is a point mass.
        pmf[static_cast<std::size_t>(rng() % k)] = 1.0;
      }
      break;
    }
  }
  return make_distribution(std::move(pmf));
}

/// Either an explicit pmf or a named family; this is what the JSON
/// {"pmf": [...]} / {"family": ...} spec resolves to.
struct DistSpec {
  std::optional<FamilySpec> family;
  std::vector<double> pmf;

  Distribution resolve() const { return family ? from_family(*family) : make_distribution(pmf); }
  std::size_t k() const { return family ? family->k : pmf.size(); }
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// n draws from a distribution together with their histogram.
struct SampleSet {
  std::vector<std::uint32_t> samples;  // 1-based domain elements
  std::vector<std::uint64_t> counts;   // counts[i - 1] = occurrences of i
  std::uint64_t seed = 0;

  std::uint64_t n() const noexcept { return samples.size(); }

  friend bool operator==(const SampleSet&, const SampleSet&) = default;
};

/// Inverse-CDF sampler over a precomputed cumulative table (binary search).
class Sampler {
 public:
  explicit Sampler(const Distribution& dist) : table_(cdf(dist)) {
    auto pmf = dist.pmf();
    last_ = pmf.size() - 1;
    while (last_ > 0 && pmf[last_] == 0.0) --last_;
  }

  std::size_t k() const noexcept { return table_.size(); }

  /// One draw, returned 0-based.
  std::size_t draw_index(Rng& rng) const {
    const double u = rng.uniform() * table_.back();
    const auto it = std::upper_bound(table_.begin(), table_.end(), u);
    return std::min(static_cast<std::size_t>(it - table_.begin()), last_);
  }

  /// Histogram of n draws; consumes the generator exactly like sample().
  void draw_counts(std::uint64_t n, Rng& rng, std::span<std::uint64_t> counts) const {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::uint64_t j = 0; j < n; ++j) ++counts[draw_index(rng)];
  }

 private:
  std::vector<double> table_;
  std::size_t last_ = 0;
};

inline SampleSet sample(const Distribution& dist, std::uint64_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidParam, "sample size n must be >= 1");
  Sampler sampler(dist);
  Rng rng(seed);
  SampleSet out;
  out.seed = seed;
  out.samples.reserve(n);
  out.counts.assign(dist.k(), 0);
  for (std::uint64_t j = 0; j < n; ++j) {
    const std::size_t i = sampler.draw_index(rng);
    out.samples.push_back(static_cast<std::uint32_t>(i + 1));
    ++out.counts[i];
  }
  return out;
}

/// Builds a SampleSet from explicit 1-based samples (e.g. parsed from the CLI).
inline SampleSet make_sample_set(std::vector<std::uint32_t> samples, std::size_t k,
                                 std::uint64_t seed = 0) {
  require(!samples.empty(), ErrorCode::InvalidParam, "sample set must be non-empty");
  require(k >= 1, ErrorCode::InvalidParam, "domain size must be >= 1");
  SampleSet out;
  out.seed = seed;
  out.counts.assign(k, 0);
  for (auto s : samples) {
    if (s < 1 || s > k)
      fail(ErrorCode::OutOfDomain,
           "sample " + std::to_string(s) + " outside [1, " + std::to_string(k) + "]");
    ++out.counts[s - 1];
  }
  out.samples = std::move(samples);
  return out;
}

}  // namespace dlearn
