#pragma once

// Machinery that turns sanitizers into better sanitizers and into private
// learners: block-level utility amplification, a labeled-domain lift of a
// plain-domain sanitizer, and empirical risk minimization over a sanitized
// labeled database.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dp/domain.hpp"
#include "dp/learners.hpp"
#include "dp/privacy.hpp"
#include "dp/rng.hpp"
#include "dp/sanitizers.hpp"

namespace dp {

// Accuracy and privacy guarantees a sanitizer promises at a declared
// sample size: with probability 1 - beta every class query on the output
// is within alpha of its value on the input, under (epsilon, delta)
// differential privacy.
struct SanitizerContract {
  double alpha = 0.1;
  double beta = 0.1;
  double epsilon = 1.0;
  double delta = 0.0;
  std::uint64_t sample_size = 1;
};

// A runnable sanitizer bundled with its contract. `fixed_output` marks
// handles whose output size is the same for every input of the declared
// sample size; block amplification requires that property.
struct SanitizerHandle {
  int bits = 1;
  SanitizerContract contract = {};
  bool fixed_output = false;
  std::uint64_t output_size = 0;
  std::function<Database(const Database&, RandomnessSource&)> run;
};

// Sizing schedule for the labeled-domain lift: the base sanitizer consumes
// blocks of m entries, label sides are rounded to multiples of
// big_m = q * m, and the lifted sanitizer expects t labeled entries.
struct BlockPlan {
  std::uint64_t q = 1;
  std::uint64_t m = 1;
  std::uint64_t big_m = 1;
  std::uint64_t t = 1;
};

// Counters from one run of the lifted sanitizer, for census checks.
struct LiftSanitizerRecord {
  std::int64_t noise0 = 0;
  std::int64_t noise1 = 0;
  std::uint64_t clamped0 = 0;
  std::uint64_t clamped1 = 0;
  std::uint64_t rounded0 = 0;
  std::uint64_t rounded1 = 0;
  std::uint64_t laplace_draws = 0;
  std::uint64_t san_calls = 0;
};

namespace detail {

inline void check_contract(const SanitizerContract& c) {
  if (!(c.alpha > 0) || c.alpha >= 1 || !(c.beta > 0) || c.beta >= 1)
    throw std::invalid_argument(
        "contract alpha and beta must lie in (0, 1)");
  if (!(c.epsilon > 0))
    throw std::invalid_argument("contract epsilon must be positive");
  if (!(c.delta >= 0) || c.delta >= 1)
    throw std::invalid_argument("contract delta must lie in [0, 1)");
  if (c.sample_size == 0)
    throw std::invalid_argument("contract sample size must be positive");
}

}  // namespace detail

// Smallest block count for which amplification concentrates: averaging
// q >= ceil((18 / beta) ln(1 / beta)) independent blocks pushes the
// failure probability of the concatenation below beta.
inline std::uint64_t amplify_min_blocks(double beta) {
  if (!(beta > 0) || !(beta < 1))
    throw std::invalid_argument("beta must lie in (0, 1)");
  return static_cast<std::uint64_t>(
      std::ceil((18.0 / beta) * std::log(1.0 / beta)));
}

// Canonical sizing for the labeled lift of a base sanitizer: the rounding
// unit is big_m = m * ceil((18 / beta) ln(2 / (alpha beta)) (1 + 1 / (m
// eps))) and the lifted sample size is t = ceil(6 / alpha^2) * big_m.
inline BlockPlan make_block_plan(const SanitizerContract& c) {
  detail::check_contract(c);
  const double m = static_cast<double>(c.sample_size);
  BlockPlan p;
  p.m = c.sample_size;
  p.q = static_cast<std::uint64_t>(
      std::ceil((18.0 / c.beta) * std::log(2.0 / (c.alpha * c.beta)) *
                (1.0 + 1.0 / (m * c.epsilon))));
  p.big_m = p.q * p.m;
  p.t = static_cast<std::uint64_t>(
            std::ceil(6.0 / (c.alpha * c.alpha))) *
        p.big_m;
  return p;
}

// Valid lifted sample sizes for a base contract, reported as [lo, hi].
// Only the lower end gates execution; the upper end is advisory.
inline std::pair<double, double> lift_sample_interval(
    const SanitizerContract& c) {
  detail::check_contract(c);
  const double m = static_cast<double>(c.sample_size);
  const double a2 = c.alpha * c.alpha;
  const double lo = (100.0 * m / a2) * std::log(1.0 / (c.alpha * c.beta));
  const double hi = (150.0 / (a2 * c.beta)) *
                    std::log(2.0 / (c.alpha * c.beta)) *
                    (m + 1.0 / c.epsilon);
  return {lo, hi};
}

// Nearest multiple of `unit`, halves rounding up.
inline std::uint64_t block_round(std::uint64_t v, std::uint64_t unit) {
  if (unit == 0) throw std::invalid_argument("rounding unit must be positive");
  const std::uint64_t rem = v % unit;
  std::uint64_t down = v - rem;
  if (rem * 2 >= unit) down += unit;
  return down;
}

// Sanitizer that returns its input unchanged: a perfectly accurate (and
// deliberately non-private) baseline for pipeline tests and benchmarks.
inline SanitizerHandle identity_sanitizer(int bits,
                                          SanitizerContract contract) {
  check_bits(bits);
  detail::check_contract(contract);
  SanitizerHandle h;
  h.bits = bits;
  h.contract = contract;
  h.fixed_output = true;
  h.output_size = contract.sample_size;
  const std::uint64_t n = contract.sample_size;
  h.run = [bits, n](const Database& s, RandomnessSource&) {
    if (s.bits() != bits)
      throw std::invalid_argument("sanitizer domain width mismatch");
    if (s.size() != n)
      throw std::invalid_argument(
          "input size does not match the declared sample size");
    return s;
  };
  return h;
}

// Point-query sanitizer wrapped as a fixed-output handle: the released
// frequency estimate is fitted back to a proper database of `output_size`
// entries. `validate` forwards to the underlying minimum-sample check.
inline SanitizerHandle point_sanitizer(int bits, SanitizerContract contract,
                                       std::uint64_t output_size,
                                       bool validate = true) {
  check_bits(bits);
  detail::check_contract(contract);
  if (output_size == 0)
    throw std::invalid_argument("output size must be positive");
  SanitizerHandle h;
  h.bits = bits;
  h.contract = contract;
  h.fixed_output = true;
  h.output_size = output_size;
  const SanitizerContract c = contract;
  h.run = [bits, c, output_size, validate](const Database& s,
                                           RandomnessSource& rng) {
    if (s.bits() != bits)
      throw std::invalid_argument("sanitizer domain width mismatch");
    if (s.size() != c.sample_size)
      throw std::invalid_argument(
          "input size does not match the declared sample size");
    const Estimate est =
        san_points(s, c.alpha, c.beta, c.epsilon, c.delta, rng, validate);
    return fit_proper_db(est, output_size);
  };
  return h;
}

// Utility amplification: split a q * m input into q blocks, sanitize each
// block independently with the base, and concatenate in order. Accuracy
// degrades to 2 alpha + 2 beta while the overall failure probability drops
// to beta, provided q >= amplify_min_blocks(beta). Privacy is untouched:
// every entry reaches exactly one base call. q = 1 returns the base
// unchanged; `validate` = false skips the minimum-block check for callers
// that establish it by construction.
inline SanitizerHandle amplify_sanitizer(const SanitizerHandle& base,
                                         std::uint64_t q,
                                         bool validate = true) {
  if (q == 0) throw std::invalid_argument("block count must be positive");
  if (q == 1) return base;
  if (!base.run)
    throw std::invalid_argument("base sanitizer is not runnable");
  if (!base.fixed_output)
    throw std::invalid_argument(
        "amplification needs a base with a fixed output size");
  if (validate && q < amplify_min_blocks(base.contract.beta))
    throw ConfigError("block count " + std::to_string(q) +
                      " is below the amplification minimum " +
                      std::to_string(amplify_min_blocks(base.contract.beta)));
  SanitizerHandle out;
  out.bits = base.bits;
  out.contract = base.contract;
  out.contract.alpha = 2 * base.contract.alpha + 2 * base.contract.beta;
  out.contract.sample_size = q * base.contract.sample_size;
  out.fixed_output = true;
  out.output_size = q * base.output_size;
  out.run = [base, q](const Database& s, RandomnessSource& rng) {
    const std::uint64_t m = base.contract.sample_size;
    if (s.bits() != base.bits)
      throw std::invalid_argument("sanitizer domain width mismatch");
    if (s.size() != q * m)
      throw std::invalid_argument(
          "input size must be the block count times the block size");
    const auto& vals = s.values();
    Database joined(base.bits);
    for (std::uint64_t b = 0; b < q; ++b) {
      Database block(base.bits);
      for (std::uint64_t i = 0; i < m; ++i) block.add(vals[b * m + i]);
      const Database piece = base.run(block, rng);
      if (piece.size() != base.output_size)
        throw std::runtime_error(
            "base sanitizer violated its declared output size");
      for (std::uint64_t v : piece.values()) joined.add(v);
    }
    return joined;
  };
  return out;
}

// One run of the labeled-domain lift: split the labeled input by its low
// label bit, perturb each side's size with floored Laplace noise, round to
// a multiple of big_m, pad with zeros or truncate the tail to the rounded
// size, sanitize each non-empty side with the block-amplified base, and
// re-attach the label bit. Each side's output length is proportional to
// its rounded size, so label fractions carry over without reweighting.
inline Database lift_sanitizer_run(const SanitizerHandle& base,
                                   const BlockPlan& plan,
                                   const Database& labeled,
                                   RandomnessSource& rng,
                                   LiftSanitizerRecord* record = nullptr) {
  if (!base.run) throw std::invalid_argument("base sanitizer is not runnable");
  if (!base.fixed_output)
    throw std::invalid_argument(
        "the lift needs a base with a fixed output size");
  if (plan.m == 0 || plan.m != base.contract.sample_size)
    throw std::invalid_argument(
        "plan block size must match the base contract");
  if (plan.big_m == 0 || plan.big_m % plan.m != 0)
    throw std::invalid_argument(
        "rounding unit must be a positive multiple of the block size");
  if (plan.t == 0 || plan.t % plan.big_m != 0)
    throw std::invalid_argument(
        "total sample must be a positive multiple of the rounding unit");
  if (labeled.bits() != base.bits + 1)
    throw std::invalid_argument(
        "labeled input must be one bit wider than the base domain");
  if (labeled.size() != plan.t)
    throw std::invalid_argument("labeled input size must match the plan");
  if (static_cast<double>(plan.t) < lift_sample_interval(base.contract).first)
    throw ConfigError("plan total is below the valid lifted sample range");

  std::vector<std::uint64_t> side[2];
  for (std::uint64_t v : labeled.values()) side[v & 1].push_back(v >> 1);

  LiftSanitizerRecord rec;
  Database out(labeled.bits());
  for (int label = 0; label < 2; ++label) {
    // The noise draw happens for both sides, even when a side ends up
    // empty; the draw itself is part of the privacy census.
    const auto noise = static_cast<std::int64_t>(
        std::floor(laplace(1.0 / base.contract.epsilon, rng)));
    ++rec.laplace_draws;
    const std::int64_t sized =
        static_cast<std::int64_t>(side[label].size()) + noise;
    const std::uint64_t clamped =
        sized > 0 ? static_cast<std::uint64_t>(sized) : 0;
    const std::uint64_t rounded = block_round(clamped, plan.big_m);
    if (label == 0) {
      rec.noise0 = noise;
      rec.clamped0 = clamped;
      rec.rounded0 = rounded;
    } else {
      rec.noise1 = noise;
      rec.clamped1 = clamped;
      rec.rounded1 = rounded;
    }
    // A side rounded to zero contributes nothing and skips its sanitizer.
    if (rounded == 0) continue;

    Database padded(base.bits);
    const std::uint64_t keep =
        std::min<std::uint64_t>(rounded, side[label].size());
    for (std::uint64_t i = 0; i < keep; ++i) padded.add(side[label][i]);
    for (std::uint64_t i = keep; i < rounded; ++i) padded.add(0);

    const SanitizerHandle amp =
        amplify_sanitizer(base, rounded / plan.m, /*validate=*/false);
    const Database tilde = amp.run(padded, rng);
    ++rec.san_calls;
    for (std::uint64_t v : tilde.values())
      out.add((v << 1) | static_cast<std::uint64_t>(label));
  }
  if (record) *record = rec;
  return out;
}

// Handle for the lifted sanitizer over the labeled domain. Two noisy side
// sizes cost epsilon each and two conditioned side sanitizations cost
// 2 epsilon each, so the lift runs at 6 epsilon total; the conditioning
// also inflates each side's delta by a factor e^epsilon.
inline SanitizerHandle lift_sanitizer(const SanitizerHandle& base,
                                      const BlockPlan& plan) {
  if (!base.fixed_output)
    throw std::invalid_argument(
        "the lift needs a base with a fixed output size");
  SanitizerHandle h;
  h.bits = base.bits + 1;
  h.contract.alpha = 5 * base.contract.alpha + 4 * base.contract.beta;
  h.contract.beta = 5 * base.contract.beta;
  h.contract.epsilon = 6 * base.contract.epsilon;
  h.contract.delta =
      2 * std::exp(base.contract.epsilon) * base.contract.delta;
  h.contract.sample_size = plan.t;
  h.fixed_output = false;
  h.output_size = 0;
  h.run = [base, plan](const Database& s, RandomnessSource& rng) {
    return lift_sanitizer_run(base, plan, s, rng, nullptr);
  };
  return h;
}

// Labeled sample size that makes sanitized empirical errors track the
// distribution within gamma for every concept of the given VC dimension.
inline std::uint64_t sanitizer_learner_min_sample(int vc, double gamma,
                                                  double beta) {
  return agnostic_sample_bound(vc, gamma, beta);
}

// Proper learner built on a labeled-domain sanitizer: sanitize the packed
// labeled sample, then return the class member whose disagreement rate on
// the sanitized database is smallest. Ties break to the first member in
// canonical enumeration order, so the scan is deterministic given the
// sanitizer output. `gamma_c` scales the minimum-sample gate.
inline LearnerOutput learn_via_sanitizer(const SanitizerHandle& label_san,
                                         const ConceptClass& cc,
                                         const LabeledSample& s, double gamma,
                                         double gamma_c,
                                         RandomnessSource& rng,
                                         double budget = 1 << 20) {
  if (cc.labeled)
    throw std::invalid_argument(
        "pass the plain class; the label lift happens internally");
  if (cc.d * cc.axes != s.bits())
    throw std::invalid_argument("class and sample widths differ");
  if (!label_san.run)
    throw std::invalid_argument("sanitizer is not runnable");
  if (label_san.bits != s.bits() + 1)
    throw std::invalid_argument(
        "sanitizer domain must be one bit wider than the sample");
  if (!(gamma > 0) || gamma >= 1)
    throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(gamma_c > 0))
    throw std::invalid_argument("gamma_c must be positive");
  const std::uint64_t need = sanitizer_learner_min_sample(
      vc_dimension(cc), gamma, label_san.contract.beta);
  if (static_cast<double>(s.size()) <
      gamma_c * static_cast<double>(need))
    throw ConfigError("sample of " + std::to_string(s.size()) +
                      " is below the scaled minimum " +
                      std::to_string(gamma_c * static_cast<double>(need)));

  const std::vector<Concept> concepts = enumerate_class(cc, budget);
  const Database sanitized = label_san.run(s.label_database(), rng);
  if (sanitized.size() == 0)
    throw std::runtime_error("sanitizer returned an empty database");

  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    const double err =
        counting_query(lift_concept(concepts[i]), sanitized);
    if (err < best_err) {
      best_err = err;
      best = i;
    }
  }
  LearnerOutput out{concepts[best]};
  out.hypothesis_count = concepts.size();
  return out;
}

// Guarantees of the full chain base sanitizer -> lifted sanitizer ->
// empirical minimizer, with the minimizer's slack set to the lifted
// sanitizer's accuracy: error 15 alpha + 12 beta with probability
// 1 - 10 beta, under (6 epsilon, 2 e^epsilon delta) privacy, from t
// labeled examples.
inline SanitizerContract reduction_chain_contract(
    const SanitizerContract& base, const BlockPlan& plan) {
  detail::check_contract(base);
  SanitizerContract c;
  c.alpha = 15 * base.alpha + 12 * base.beta;
  c.beta = 10 * base.beta;
  c.epsilon = 6 * base.epsilon;
  c.delta = 2 * std::exp(base.epsilon) * base.delta;
  c.sample_size = plan.t;
  return c;
}

}  // namespace dp
