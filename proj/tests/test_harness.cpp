#include <gtest/gtest.h>

#include <cmath>

#include "dlearn/harness.hpp"
#include "oracles.hpp"

using namespace dlearn;

namespace {

ExperimentConfig base(Family fam, std::size_t k, std::uint64_t n, std::uint64_t trials) {
  ExperimentConfig c;
  c.dist.family = FamilySpec{fam, k};
  c.n = n;
  c.trials = trials;
  c.base_seed = 42;
  return c;
}

ExperimentConfig with_pmf(std::vector<double> pmf, std::uint64_t n, std::uint64_t trials) {
  ExperimentConfig c;
  c.dist.pmf = std::move(pmf);
  c.n = n;
  c.trials = trials;
  c.base_seed = 7;
  return c;
}

}  // namespace

TEST(RunTrials, DeterministicAcrossThreadCounts) {
  const auto p = from_family({Family::Zipf, 20});
  const auto one = run_trials(p, {}, MetricKind::Hellinger, Orientation::TruthFirst,
                              Statistic::Value, 50, 999, 5, 1);
  for (unsigned t : {4u, 16u}) {
    const auto many = run_trials(p, {}, MetricKind::Hellinger, Orientation::TruthFirst,
                                 Statistic::Value, 50, 999, 5, t);
    ASSERT_EQ(one, many) << "threads=" << t;
  }
}

TEST(RunTrials, TrialIsSampleWithDerivedSeed) {
  const auto p = from_family({Family::Uniform, 6});
  const auto values =
      run_trials(p, {}, MetricKind::TV, Orientation::TruthFirst, Statistic::Value, 17, 5, 99, 1);
  for (std::uint64_t t = 0; t < 5; ++t) {
    const auto est = empirical(sample(p, 17, derive_seed(99, t)), 6);
    EXPECT_EQ(values[t], total_variation(p, est));
  }
}

TEST(Expectation, PointMassIsExact) {
  auto c = base(Family::PointMass, 5, 10, 200);
  c.dist.family->index = 3;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.std_err, 0.0);
  EXPECT_TRUE(r.passed());
}

TEST(Expectation, ReportIsIdenticalAcrossThreads) {
  auto c = base(Family::Uniform, 10, 100, 2000);
  c.threads = 1;
  const auto a = run_experiment(c);
  c.threads = 8;
  const auto b = run_experiment(c);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_err, b.std_err);
}

TEST(Expectation, FairCoinMatchesExactExpectation) {
  const double exact = oracle::fair_coin_expected_tv(100);
  EXPECT_NEAR(exact, 0.0397946, 1e-7);
  auto c = base(Family::Uniform, 2, 100, 100000);
  const auto r = run_experiment(c);
  EXPECT_LT(std::abs(r.mean - exact), 4.0 * r.std_err);
  EXPECT_LE(r.mean, 0.5 * std::sqrt(2.0 / 100));
  EXPECT_TRUE(r.passed());
}

TEST(Expectation, DominatedOnDirichletDistributions) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    ExperimentConfig c;
    FamilySpec f{Family::Dirichlet, 2 + s * 3};
    f.seed = s;
    c.dist.family = f;
    c.n = 30 + 10 * s;
    c.trials = 2000;
    c.base_seed = s;
    EXPECT_TRUE(run_experiment(c).passed()) << "tv s=" << s;
    c.metric = MetricKind::Hellinger;
    c.statistic = Statistic::Squared;
    EXPECT_TRUE(run_experiment(c).passed()) << "hellinger^2 s=" << s;
  }
}

TEST(Expectation, L2SquaredMatchesExactValue) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    ExperimentConfig c;
    FamilySpec f{Family::Dirichlet, 3 + s};
    f.seed = 100 + s;
    c.dist.family = f;
    c.metric = MetricKind::L2;
    c.statistic = Statistic::Squared;
    c.n = 25;
    c.trials = 20000;
    c.base_seed = s;
    const auto r = run_experiment(c);
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_TRUE(r.passed()) << "s=" << s << " gap=" << r.verdicts[0].lhs;
  }
}

TEST(Expectation, L2SquaredUniformMonteCarlo) {
  auto c = base(Family::Uniform, 10, 100, 100000);
  c.metric = MetricKind::L2;
  c.statistic = Statistic::Squared;
  const auto r = run_experiment(c);
  EXPECT_NEAR(r.theory[0].value, 0.009, 1e-15);
  EXPECT_LT(std::abs(r.mean - 0.009), 3.0 * r.std_err);
}

TEST(FailureRate, TvAtCertifiedSizeHasNoFailures) {
  // k=2, eps=0.1, delta=0.05: n = ceil((2/eps^2) ln(2/delta)) = 738.
  auto c = base(Family::Uniform, 2, 0, 10000);
  c.mode = Mode::FailureRate;
  c.eps = 0.1;
  c.delta = 0.05;
  c.auto_n = true;
  const auto r = run_experiment(c);
  EXPECT_EQ(r.n, 738u);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_LE(r.failure_rate_upper, 0.05);
  EXPECT_TRUE(r.passed());
}

TEST(FailureRate, StrictInequalityAtTies) {
  // Fair coin with n=2: TV is 0 or 0.5, so TV > 0.5 never happens.
  auto c = base(Family::Uniform, 2, 2, 1000);
  c.mode = Mode::FailureRate;
  c.eps = 0.5;
  c.delta = 0.01;
  EXPECT_EQ(run_experiment(c).failures, 0u);
}

TEST(FailureRate, AgainstTailBound) {
  auto c = base(Family::Uniform, 2, 100, 20000);
  c.mode = Mode::FailureRate;
  c.metric = MetricKind::Kolmogorov;
  c.eps = 0.1;
  c.delta = 0.5;
  c.tail = TailKind::Dkw;
  const auto r = run_experiment(c);
  EXPECT_NEAR(r.theory.back().value, 0.270671, 1e-6);
  // Exact tail: P[|X/100 - 1/2| > 0.1].
  EXPECT_NEAR(r.failure_rate, oracle::fair_coin_tail(100, 0.1), 4 * std::sqrt(0.04 / 20000));
  EXPECT_TRUE(r.passed());
}

TEST(TailCurve, DkwOnZipf) {
  auto c = base(Family::Zipf, 50, 200, 5000);
  c.mode = Mode::TailCurve;
  c.metric = MetricKind::Kolmogorov;
  c.thresholds = {0.02, 0.05, 0.1, 0.15};
  const auto r = run_experiment(c);
  ASSERT_EQ(r.tail_rows.size(), 4u);
  for (const auto& row : r.tail_rows) {
    EXPECT_TRUE(row.asserted);
    EXPECT_NEAR(*row.theoretical, tail_dkw(200, row.threshold), 1e-15);
  }
  EXPECT_TRUE(r.passed());
}

TEST(TailCurve, TvRowsOutsideRegimeAreNotAsserted) {
  auto c = base(Family::Uniform, 100, 100, 500);
  c.mode = Mode::TailCurve;
  c.thresholds = {0.1, 0.5, 1.5};
  const auto r = run_experiment(c);
  // (1/2)sqrt(100/100) = 0.5: only t >= 1 qualifies.
  EXPECT_FALSE(r.tail_rows[0].asserted);
  EXPECT_FALSE(r.tail_rows[1].asserted);
  EXPECT_TRUE(r.tail_rows[2].asserted);
}

TEST(TailCurve, KlEstimateFirstUsesAgrawalInclusive) {
  auto c = base(Family::Uniform, 2, 50, 5000);
  c.mode = Mode::TailCurve;
  c.metric = MetricKind::KL;
  c.orientation = Orientation::EstimateFirst;
  c.thresholds = {0.02, 0.05, 0.1};
  const auto r = run_experiment(c);
  for (const auto& row : r.tail_rows) {
    ASSERT_TRUE(row.asserted);
    EXPECT_EQ(row.bound, "agrawal");
    EXPECT_NEAR(*row.theoretical, tail_agrawal(50, 2, row.threshold), 1e-15);
  }
  EXPECT_TRUE(r.passed());
}

TEST(TailCurve, NothingAssertedForSmoothedEstimator) {
  auto c = base(Family::Uniform, 4, 100, 200);
  c.mode = Mode::TailCurve;
  c.metric = MetricKind::Kolmogorov;
  c.estimator = EstimatorKind::add_constant(1.0);
  c.thresholds = {0.1};
  const auto r = run_experiment(c);
  EXPECT_FALSE(r.tail_rows[0].asserted);
  EXPECT_FALSE(r.tail_rows[0].theoretical.has_value());
}

TEST(KlUnbounded, DemoMatchesAnalyticFraction) {
  EXPECT_NEAR(analytic_missing_probability(2, 100, 1e-4), std::pow(1 - 1e-4, 100), 1e-15);
  const auto r = run_kl_unbounded_demo(2, 100, 1e-4, 10000, 3);
  EXPECT_NEAR(r.theory[1].value, 0.990049, 1e-6);
  EXPECT_TRUE(r.passed());
  EXPECT_GT(r.infinite_count, 9800u);
}

TEST(KlUnbounded, HalfMassSingleSampleAlwaysInfinite) {
  const auto r = run_kl_unbounded_demo(2, 1, 0.5, 1000, 1);
  EXPECT_EQ(r.infinite_count, 1000u);
  EXPECT_EQ(r.theory[1].value, 1.0);
  EXPECT_TRUE(r.passed());
}

TEST(KlUnbounded, AddConstantNeverInfinite) {
  const auto r = run_kl_unbounded_demo(2, 100, 1e-4, 2000, 3, EstimatorKind::add_constant(1.0));
  EXPECT_EQ(r.infinite_count, 0u);
  EXPECT_TRUE(r.passed());
}

TEST(KlUnbounded, InclusionExclusionMatchesEnumerationForK3) {
  // k=3, m=0.2: p = (0.6, 0.2, 0.2). Missing probability by direct enumeration.
  const std::uint64_t n = 5;
  double present_all = 0.0;
  for (std::uint64_t a = 1; a <= n; ++a)
    for (std::uint64_t b = 1; a + b < n; ++b) {
      const std::uint64_t c = n - a - b;
      const double logm = std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(b + 1.0) -
                          std::lgamma(c + 1.0);
      present_all += std::exp(logm) * std::pow(0.6, a) * std::pow(0.2, b) * std::pow(0.2, c);
    }
  EXPECT_NEAR(analytic_missing_probability(3, n, 0.2), 1.0 - present_all, 1e-12);
}

TEST(KlUnbounded, RejectsBadTinyMass) {
  EXPECT_THROW(light_tail_distribution(2, 0.6), Error);
  EXPECT_THROW(light_tail_distribution(2, 0.0), Error);
  EXPECT_THROW(light_tail_distribution(1, 0.1), Error);
}

TEST(Soundness, FailureRatesStayBelowDeltaAtCertifiedSizes) {
  struct Case {
    MetricKind metric;
    std::size_t k;
    double eps;
    double delta;
  };
  const std::vector<Case> cases = {{MetricKind::TV, 10, 0.2, 0.1},
                                   {MetricKind::Kolmogorov, 20, 0.1, 0.1},
                                   {MetricKind::Linf, 20, 0.1, 0.1},
                                   {MetricKind::L2, 20, 0.2, 0.1},
                                   {MetricKind::Hellinger, 10, 0.2, 0.1}};
  for (const auto& cs : cases) {
    for (Family fam : {Family::Uniform, Family::Zipf}) {
      auto c = base(fam, cs.k, 0, 2000);
      c.mode = Mode::FailureRate;
      c.metric = cs.metric;
      c.eps = cs.eps;
      c.delta = cs.delta;
      c.auto_n = true;
      const auto r = run_experiment(c);
      EXPECT_TRUE(r.passed()) << to_string(cs.metric) << " upper=" << r.failure_rate_upper;
    }
  }
}

TEST(Config, InvalidConfigsAreRejected) {
  auto expect_invalid = [](const ExperimentConfig& c) {
    try {
      run_experiment(c);
      ADD_FAILURE() << "accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidConfig) << e.what();
    }
  };
  auto c = base(Family::Uniform, 3, 0, 10);
  expect_invalid(c);  // n = 0
  c.n = 10;
  c.trials = 0;
  expect_invalid(c);
  c.trials = 10;
  c.mode = Mode::FailureRate;
  expect_invalid(c);  // no eps/delta
  c.mode = Mode::TailCurve;
  expect_invalid(c);  // no thresholds
  c.thresholds = {0.2, 0.1};
  expect_invalid(c);
  c.mode = Mode::Expectation;
  c.thresholds.clear();
  c.auto_n = true;
  expect_invalid(c);  // auto-n without eps/delta
  c.eps = 0.1;
  c.delta = 0.1;
  c.metric = MetricKind::ChiSquare;
  expect_invalid(c);  // no certificate for chi-square
}

TEST(Exceeds, TieTolerance) {
  EXPECT_FALSE(exceeds(0.1 + 1e-17, 0.1, false));
  EXPECT_TRUE(exceeds(0.1 + 1e-9, 0.1, false));
  EXPECT_TRUE(exceeds(0.1 - 1e-17, 0.1, true));
  EXPECT_FALSE(exceeds(0.1 - 1e-9, 0.1, true));
}

TEST(ParseEnums, RoundTrip) {
  for (Mode m : {Mode::Expectation, Mode::FailureRate, Mode::TailCurve, Mode::KlUnbounded})
    EXPECT_EQ(parse_mode(to_string(m)), m);
  for (TailKind t : {TailKind::Dkw, TailKind::HoeffdingSubset, TailKind::McDiarmidTv, TailKind::Agrawal})
    EXPECT_EQ(parse_tail_kind(to_string(t)), t);
  EXPECT_THROW(parse_mode("bogus"), Error);
}
