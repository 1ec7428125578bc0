#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "dp/domain.hpp"
#include "dp/privacy.hpp"

namespace dp {

// A choice problem whose per-solution scores start at zero on the empty
// database and where appending one element raises at most `growth_bound`
// scores, each by exactly one. Scores are integers by construction. The
// support enumerator returns every solution with a positive score so the
// mechanism never scans the full solution space.
struct BoundedGrowthQuality {
  std::uint64_t growth_bound = 1;
  std::function<std::uint64_t(const Database&, std::uint64_t)> score;
  std::function<std::vector<std::uint64_t>(const Database&)> support;
};

// Histogram scores: quality of a point is its number of appearances.
// A single append raises exactly one score, so the growth bound is 1.
inline BoundedGrowthQuality histogram_quality() {
  BoundedGrowthQuality q;
  q.growth_bound = 1;
  q.score = [](const Database& db, std::uint64_t f) -> std::uint64_t {
    std::uint64_t c = 0;
    for (std::uint64_t v : db.values()) c += v == f;
    return c;
  };
  q.support = [](const Database& db) {
    std::vector<std::uint64_t> out(db.values());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };
  return q;
}

// Result of the choosing mechanism. Halting with bottom is a first-class
// outcome, not an error; the reason distinguishes the noisy-threshold halt
// from the empty-support halt.
struct ChoiceOutcome {
  enum class Reason { kChosen, kThreshold, kEmptySupport };
  bool bottom = false;
  std::uint64_t solution = 0;
  Reason reason = Reason::kChosen;
};

// Minimum database size under which the choosing mechanism's privacy and
// utility guarantees are claimed:
// ceil((16/(alpha*eps)) * ln(16k/(alpha*beta*eps*delta))).
inline std::uint64_t choose_min_sample(double alpha, double beta, double eps,
                                       double delta, std::uint64_t k) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  if (k == 0) throw std::invalid_argument("growth bound must be positive");
  const double v = (16.0 / (alpha * eps)) *
                   std::log(16.0 * static_cast<double>(k) /
                            (alpha * beta * eps * delta));
  return static_cast<std::uint64_t>(std::ceil(v));
}

// Private selection for bounded-growth choice problems: perturb the best
// score with Lap(4/eps) and halt on bottom when it falls below alpha*m/2;
// otherwise pick from the positive-score solutions with the exponential
// mechanism at parameter eps/2. An empty support after the threshold also
// yields bottom, since there is nothing to sample from.
inline ChoiceOutcome choose(const Database& s, const BoundedGrowthQuality& q,
                            double alpha, double beta, double eps,
                            double delta, RandomnessSource& rng,
                            bool validate_sample = true) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  const std::uint64_t m = s.size();
  if (validate_sample &&
      m < choose_min_sample(alpha, beta, eps, delta, q.growth_bound))
    throw std::invalid_argument(
        "database smaller than the minimum sample size; pass "
        "validate_sample=false to opt out");

  const auto support = q.support(s);
  std::vector<double> qualities;
  qualities.reserve(support.size());
  double best_score = 0.0;
  for (std::uint64_t f : support) {
    const double v = static_cast<double>(q.score(s, f));
    qualities.push_back(v);
    best_score = std::max(best_score, v);
  }

  ChoiceOutcome out;
  const double noisy_best = best_score + laplace(4.0 / eps, rng);
  if (noisy_best < alpha * static_cast<double>(m) / 2.0) {
    out.bottom = true;
    out.reason = ChoiceOutcome::Reason::kThreshold;
    return out;
  }
  if (support.empty()) {
    out.bottom = true;
    out.reason = ChoiceOutcome::Reason::kEmptySupport;
    return out;
  }
  out.solution = support[exp_mechanism_index(qualities, eps / 2.0, rng)];
  return out;
}

// Property-test helper: appending x to S must raise at most growth_bound
// scores, each by exactly one, leaving every other score unchanged.
inline bool check_growth_bound(const BoundedGrowthQuality& q,
                               const Database& s, DomainPoint x,
                               std::uint64_t budget = 1u << 20) {
  if (x.bits != s.bits())
    throw std::invalid_argument("point and database widths differ");
  Database extended = s;
  extended.add(x.value);
  auto before = q.support(s);
  auto after = q.support(extended);
  if (before.size() > budget || after.size() > budget)
    throw ResourceError("growth-bound check exceeded enumeration budget");
  before.insert(before.end(), after.begin(), after.end());
  std::sort(before.begin(), before.end());
  before.erase(std::unique(before.begin(), before.end()), before.end());

  std::uint64_t raised = 0;
  for (std::uint64_t f : before) {
    const std::uint64_t a = q.score(s, f);
    const std::uint64_t b = q.score(extended, f);
    if (b == a) continue;
    if (b != a + 1) return false;
    ++raised;
  }
  return raised <= q.growth_bound;
}

}  // namespace dp
