#include "dp/choosing.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace {

using dp::BoundedGrowthQuality;
using dp::Database;
using dp::RandomnessSource;

// Quality that is zero on every solution (empty support).
BoundedGrowthQuality zero_quality() {
  BoundedGrowthQuality q;
  q.growth_bound = 1;
  q.score = [](const Database&, std::uint64_t) -> std::uint64_t { return 0; };
  q.support = [](const Database&) { return std::vector<std::uint64_t>{}; };
  return q;
}

// Overlapping length-2 intervals [f, f+1]; appending a point can raise two
// interval counts, so the growth bound is 2.
BoundedGrowthQuality overlapping_pair_quality(int bits) {
  BoundedGrowthQuality q;
  q.growth_bound = 2;
  q.score = [](const Database& db, std::uint64_t f) -> std::uint64_t {
    std::uint64_t c = 0;
    for (std::uint64_t v : db.values()) c += v == f || v == f + 1;
    return c;
  };
  q.support = [bits](const Database& db) {
    std::set<std::uint64_t> out;
    const std::uint64_t last = dp::domain_size(bits) - 1;
    for (std::uint64_t v : db.values()) {
      if (v > 0) out.insert(v - 1);
      if (v < last) out.insert(v);
    }
    return std::vector<std::uint64_t>(out.begin(), out.end());
  };
  return q;
}

TEST(MinSample, PinnedFormulaValues) {
  // ceil((16/(alpha*eps)) * ln(16k/(alpha*beta*eps*delta)))
  EXPECT_EQ(dp::choose_min_sample(0.1, 0.1, 0.1, 0.1, 1), 19173u);
  EXPECT_EQ(dp::choose_min_sample(0.1, 0.1, 0.1, 0.1, 1),
            static_cast<std::uint64_t>(
                std::ceil(1600.0 * std::log(160000.0))));
  // Doubling k adds (16/(alpha*eps)) * ln 2, monotonically.
  const auto m1 = dp::choose_min_sample(0.1, 0.1, 0.1, 0.1, 1);
  const auto m2 = dp::choose_min_sample(0.1, 0.1, 0.1, 0.1, 2);
  EXPECT_GT(m2, m1);
  EXPECT_NEAR(static_cast<double>(m2 - m1), 1600.0 * std::log(2.0), 1.0);
  // Doubling alpha roughly halves the bound (up to the log term).
  const double ratio =
      static_cast<double>(m1) / dp::choose_min_sample(0.2, 0.1, 0.1, 0.1, 1);
  EXPECT_GT(ratio, 1.9);
  EXPECT_LT(ratio, 2.3);
}

TEST(MinSample, RejectsBadRanges) {
  EXPECT_THROW(dp::choose_min_sample(0.0, 0.1, 0.1, 0.1, 1),
               std::invalid_argument);
  EXPECT_THROW(dp::choose_min_sample(0.1, 1.0, 0.1, 0.1, 1),
               std::invalid_argument);
  EXPECT_THROW(dp::choose_min_sample(0.1, 0.1, 0.0, 0.1, 1),
               std::invalid_argument);
  EXPECT_THROW(dp::choose_min_sample(0.1, 0.1, 0.1, 0.0, 1),
               std::invalid_argument);
  EXPECT_THROW(dp::choose_min_sample(0.1, 0.1, 0.1, 0.1, 0),
               std::invalid_argument);
}

TEST(Choose, ConcentratedDatabaseReturnsItsPoint) {
  // 100 copies of one point, alpha=0.2, eps=1: the threshold miss
  // probability is only exp(-22.5)/2, so every trial should return p.
  Database db(4, std::vector<std::uint64_t>(100, 11));
  RandomnessSource rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto out = dp::choose(db, dp::histogram_quality(), 0.2, 0.1, 1.0,
                                0.1, rng, /*validate_sample=*/false);
    ASSERT_FALSE(out.bottom);
    EXPECT_EQ(out.solution, 11u);
  }
}

TEST(Choose, AllZeroQualitiesHaltAtThreshold) {
  Database db(4, std::vector<std::uint64_t>(100, 3));
  RandomnessSource rng(13);
  const int n = 100000;
  int threshold_halts = 0;
  for (int i = 0; i < n; ++i) {
    const auto out = dp::choose(db, zero_quality(), 0.2, 0.1, 1.0, 0.1, rng,
                                /*validate_sample=*/false);
    ASSERT_TRUE(out.bottom);  // empty support can never be released
    threshold_halts += out.reason == dp::ChoiceOutcome::Reason::kThreshold;
  }
  // Step-1 halt probability: 1 - exp(-eps*alpha*m/8)/2 = 1 - exp(-2.5)/2.
  EXPECT_NEAR(static_cast<double>(threshold_halts) / n,
              1.0 - 0.5 * std::exp(-2.5), 0.005);
}

TEST(Choose, OutputsStayInsideSupport) {
  // Exhaustive micro check: every database over d=2, m=3; any released
  // solution must be in G(S) = {values present in S}.
  RandomnessSource rng(19);
  for (std::uint64_t a = 0; a < 4; ++a)
    for (std::uint64_t b = 0; b < 4; ++b)
      for (std::uint64_t c = 0; c < 4; ++c) {
        Database db(2, {a, b, c});
        const std::set<std::uint64_t> support = {a, b, c};
        for (int t = 0; t < 50; ++t) {
          const auto out = dp::choose(db, dp::histogram_quality(), 0.5, 0.25,
                                      1.0, 0.1, rng,
                                      /*validate_sample=*/false);
          if (!out.bottom) {
            EXPECT_TRUE(support.count(out.solution));
          }
        }
      }
}

TEST(Choose, SupportSizeBoundedByGrowthTimesSize) {
  RandomnessSource rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    Database db(6);
    const std::size_t m = 1 + rng.uniform_index(40);
    for (std::size_t i = 0; i < m; ++i) db.add(rng.uniform_index(64));
    EXPECT_LE(dp::histogram_quality().support(db).size(), 1 * m);
    const auto pairs = overlapping_pair_quality(6);
    EXPECT_LE(pairs.support(db).size(), 2 * m);
  }
}

TEST(Choose, UtilityAtMinimumSampleSize) {
  // Unique solution with quality m against all-zero rivals: released with
  // frequency at least 1 - beta once m reaches the minimum sample bound.
  const double alpha = 0.5, beta = 0.25, eps = 2.0, delta = 0.25;
  const auto m = dp::choose_min_sample(alpha, beta, eps, delta, 1);
  ASSERT_EQ(m, 89u);
  Database db(3, std::vector<std::uint64_t>(m, 5));
  RandomnessSource rng(29);
  int good = 0;
  const int trials = 2000;
  for (int i = 0; i < trials; ++i) {
    const auto out =
        dp::choose(db, dp::histogram_quality(), alpha, beta, eps, delta, rng);
    good += !out.bottom && out.solution == 5;
  }
  EXPECT_GE(static_cast<double>(good) / trials, 1.0 - beta);
}

TEST(Choose, ValidatesSampleSizeUnlessOptedOut) {
  Database db(3, std::vector<std::uint64_t>(10, 5));
  RandomnessSource rng(31);
  EXPECT_THROW(
      dp::choose(db, dp::histogram_quality(), 0.5, 0.25, 2.0, 0.25, rng),
      std::invalid_argument);
  EXPECT_NO_THROW(dp::choose(db, dp::histogram_quality(), 0.5, 0.25, 2.0,
                             0.25, rng, /*validate_sample=*/false));
  // Parameter-range violations always throw.
  EXPECT_THROW(dp::choose(db, dp::histogram_quality(), 1.5, 0.25, 2.0, 0.25,
                          rng, false),
               std::invalid_argument);
  EXPECT_THROW(dp::choose(db, dp::histogram_quality(), 0.5, 0.25, 2.0, 0.0,
                          rng, false),
               std::invalid_argument);
}

TEST(GrowthBound, HistogramIsOneBounded) {
  RandomnessSource rng(37);
  for (int trial = 0; trial < 30; ++trial) {
    Database db(4);
    const std::size_t m = rng.uniform_index(8);
    for (std::size_t i = 0; i < m; ++i) db.add(rng.uniform_index(16));
    const dp::DomainPoint x{rng.uniform_index(16), 4};
    EXPECT_TRUE(dp::check_growth_bound(dp::histogram_quality(), db, x));
  }
}

TEST(GrowthBound, OverlappingIntervalsAreTwoBounded) {
  Database db(3, {1, 4});
  auto pairs = overlapping_pair_quality(3);
  // Appending 2 raises intervals [1,2] and [2,3]: two increments.
  EXPECT_TRUE(dp::check_growth_bound(pairs, db, {2, 3}));
  // The same family declared 1-bounded fails the check.
  pairs.growth_bound = 1;
  EXPECT_FALSE(dp::check_growth_bound(pairs, db, {2, 3}));
}

TEST(GrowthBound, DetectsSensitivityTwoQuality) {
  BoundedGrowthQuality bad;
  bad.growth_bound = 1;
  bad.score = [](const Database& db, std::uint64_t f) -> std::uint64_t {
    std::uint64_t c = 0;
    for (std::uint64_t v : db.values()) c += v == f;
    return 2 * c;  // a single append moves the score by 2
  };
  bad.support = [](const Database& db) {
    std::set<std::uint64_t> s(db.values().begin(), db.values().end());
    return std::vector<std::uint64_t>(s.begin(), s.end());
  };
  EXPECT_FALSE(dp::check_growth_bound(bad, Database(3, {5}), {5, 3}));
}

TEST(GrowthBound, RespectsEnumerationBudget) {
  Database db(4, {1, 2, 3});
  EXPECT_THROW(
      dp::check_growth_bound(dp::histogram_quality(), db, {7, 4}, 2),
      dp::ResourceError);
}

}  // namespace
