#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dp/rng.hpp"

namespace dp {

// An (epsilon, delta) privacy budget. delta = 0 means pure privacy.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Validates a budget: epsilon must be positive, delta in [0, 1), and
// strictly positive when require_delta is set.
inline void check_privacy(const PrivacyParams& p, bool require_delta = false) {
  if (!(p.epsilon > 0))
    throw std::invalid_argument("epsilon must be positive");
  if (!(p.delta >= 0) || p.delta >= 1)
    throw std::invalid_argument("delta must lie in [0, 1)");
  if (require_delta && p.delta == 0)
    throw std::invalid_argument("delta must be positive for this mechanism");
}

// Draws one sample from the Laplace distribution with scale b, centered at
// zero, by inverting the CDF. Adding such noise scaled to sensitivity/eps
// to a single statistic gives eps-privacy.
inline double laplace(double b, RandomnessSource& rng) {
  if (!(b > 0)) throw std::invalid_argument("laplace scale must be positive");
  const double u = rng.uniform() - 0.5;
  return -b * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
}

// Selection probabilities of the exponential mechanism: solution i wins
// with weight exp(eps * quality[i] / 2). Qualities are shifted by their
// maximum before exponentiation so large scores cannot overflow.
inline std::vector<double> exp_mechanism_probabilities(
    const std::vector<double>& qualities, double eps) {
  if (qualities.empty())
    throw std::invalid_argument("exponential mechanism needs a solution");
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  for (double q : qualities)
    if (!std::isfinite(q))
      throw std::invalid_argument("qualities must be finite");
  const double top = *std::max_element(qualities.begin(), qualities.end());
  std::vector<double> probs(qualities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < qualities.size(); ++i) {
    probs[i] = std::exp(eps * (qualities[i] - top) / 2.0);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

// Samples an index from the exponential mechanism distribution.
inline std::size_t exp_mechanism_index(const std::vector<double>& qualities,
                                       double eps, RandomnessSource& rng) {
  const auto probs = exp_mechanism_probabilities(qualities, eps);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

// Exponential mechanism over arbitrary solutions with a quality callback.
template <typename Solution, typename Quality>
const Solution& exponential_mechanism(const std::vector<Solution>& solutions,
                                      Quality&& quality, double eps,
                                      RandomnessSource& rng) {
  std::vector<double> qualities;
  qualities.reserve(solutions.size());
  for (const auto& s : solutions) qualities.push_back(quality(s));
  return solutions[exp_mechanism_index(qualities, eps, rng)];
}

// Probability that the exponential mechanism returns a solution whose
// quality falls more than alpha below the optimum, when qualities are
// averages over m records: at most |H| * exp(-eps * alpha * m / 2),
// clamped to [0, 1].
inline double exp_mechanism_failure_bound(double num_solutions, double eps,
                                          double alpha, double m) {
  if (!(num_solutions > 0) || !(eps > 0) || !(m > 0) || !(alpha >= 0))
    throw std::invalid_argument("failure bound needs positive parameters");
  return std::min(1.0, num_solutions * std::exp(-eps * alpha * m / 2.0));
}

// Outcome of the high-gap selector: either the index of the released
// solution or bottom when the noisy gap fell below the threshold.
struct SelectionResult {
  bool bottom = false;
  std::size_t index = 0;
  double gap = 0.0;        // exact quality gap between top two solutions
  double noisy_gap = 0.0;  // gap after Laplace perturbation
};

// Core of the selector once the top-two quality gap is known: perturbs the
// gap with Lap(1/eps) and releases only when the noisy value clears
// ln(1/delta)/eps. The caller interprets index 0 as the top solution.
inline SelectionResult a_dist_gap(double gap, double eps, double delta,
                                  RandomnessSource& rng) {
  check_privacy({eps, delta}, /*require_delta=*/true);
  SelectionResult r;
  r.gap = gap;
  r.noisy_gap = gap + laplace(1.0 / eps, rng);
  r.bottom = r.noisy_gap < std::log(1.0 / delta) / eps;
  return r;
}

// Releases the best-quality solution only when it beats the runner-up by a
// large (noisy) margin; otherwise reports bottom. Ties break toward the
// smallest index. With a single solution the runner-up quality is taken
// to be zero.
inline SelectionResult a_dist_index(const std::vector<double>& qualities,
                                    double eps, double delta,
                                    RandomnessSource& rng) {
  if (qualities.empty())
    throw std::invalid_argument("selector needs a solution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < qualities.size(); ++i)
    if (qualities[i] > qualities[best]) best = i;
  double second = 0.0;
  if (qualities.size() > 1) {
    bool seen = false;
    for (std::size_t i = 0; i < qualities.size(); ++i) {
      if (i == best) continue;
      if (!seen || qualities[i] > second) second = qualities[i];
      seen = true;
    }
  }
  auto r = a_dist_gap(qualities[best] - second, eps, delta, rng);
  r.index = best;
  return r;
}

// Running several private computations on the same data costs the sum of
// their budgets.
inline PrivacyParams compose_basic(const std::vector<PrivacyParams>& parts) {
  if (parts.empty())
    throw std::invalid_argument("composition needs at least one part");
  PrivacyParams out{0.0, 0.0};
  for (const auto& p : parts) {
    if (!(p.epsilon >= 0) || !(p.delta >= 0))
      throw std::invalid_argument("budgets must be non-negative");
    out.epsilon += p.epsilon;
    out.delta += p.delta;
  }
  return out;
}

// k-fold composition of identical budgets.
inline PrivacyParams compose_k_fold(std::uint64_t k, const PrivacyParams& p) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  return {k * p.epsilon, k * p.delta};
}

// Strong composition: k runs of an (eps, delta) computation are
// (sqrt(2k ln(1/delta_prime)) * eps + 2k eps^2, k delta + delta_prime)
// private, valid for 0 < eps, delta_prime <= 1 and delta in [0, 1].
inline PrivacyParams compose_advanced(std::uint64_t k, double eps,
                                      double delta, double delta_prime) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  if (!(eps > 0) || eps > 1)
    throw std::invalid_argument("eps must lie in (0, 1]");
  if (!(delta_prime > 0) || delta_prime > 1)
    throw std::invalid_argument("delta_prime must lie in (0, 1]");
  if (!(delta >= 0) || delta > 1)
    throw std::invalid_argument("delta must lie in [0, 1]");
  const double kd = static_cast<double>(k);
  return {std::sqrt(2.0 * kd * std::log(1.0 / delta_prime)) * eps +
              2.0 * kd * eps * eps,
          kd * delta + delta_prime};
}

}  // namespace dp
