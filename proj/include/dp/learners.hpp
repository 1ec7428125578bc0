#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dp/domain.hpp"
#include "dp/privacy.hpp"
#include "dp/rec_concave.hpp"
#include "dp/rng.hpp"
#include "dp/sanitizers.hpp"

namespace dp {

// Shared learner knobs: accuracy target alpha, confidence beta, the privacy
// budget for the whole run, the recursion depth used by the threshold
// learner, and a scale factor gamma_c that relaxes minimum-sample
// validation for experiments run below the analytic constants.
struct LearnerParams {
  double alpha = 0.1;
  double beta = 0.1;
  PrivacyParams privacy{1.0, 0.0};
  std::uint64_t recursion_budget = 1;
  double gamma_c = 1.0;
};

// Tuning constants of the rectangle learner: c_r scales the per-axis
// sanitizer accuracy, c_p the number of partition cells per axis.
struct RectangleConfig {
  double c_r = 1.0;
  double c_p = 1.0;
};

// Per-axis digest of the rectangle learner: partition boundaries (cell q
// spans [cuts[q], cuts[q+1] - 1]), the noisy labeled-mass estimate per
// cell, and the outermost cells that cleared the significance cutoff.
struct AxisDiagnostics {
  std::vector<std::uint64_t> cuts;
  std::vector<double> estimates;
  std::size_t left_interval = 0;
  std::size_t right_interval = 0;
  bool degenerate = false;
};

// What a learner returns beyond the hypothesis: the selector outcome when
// one was used, the recursion trace of the threshold learner, per-axis
// diagnostics of the rectangle learner, and the probe and hypothesis counts
// of the label-private learner.
struct LearnerOutput {
  Concept hypothesis;
  bool bottom = false;
  SelectionResult selection = {};
  RecTrace trace = {};
  std::vector<AxisDiagnostics> axes = {};
  std::uint64_t probe_count = 0;
  std::uint64_t hypothesis_count = 0;
};

namespace detail {

inline void check_learner_params(const LearnerParams& p, bool require_delta) {
  if (!(p.alpha > 0) || p.alpha >= 1 || !(p.beta > 0) || p.beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  if (!(p.gamma_c > 0))
    throw std::invalid_argument("gamma_c must be positive");
  check_privacy(p.privacy, require_delta);
}

}  // namespace detail

// ---- Point learner --------------------------------------------------------

// Samples sufficient for the point learner:
// (8 / (alpha eps)) ln(4 / (beta delta)).
inline std::uint64_t learn_point_min_sample(double alpha, double beta,
                                            double eps, double delta) {
  if (!(alpha > 0) || !(beta > 0) || !(eps > 0) || !(delta > 0))
    throw std::invalid_argument("parameters must be positive");
  return static_cast<std::uint64_t>(
      std::ceil((8.0 / (alpha * eps)) * std::log(4.0 / (beta * delta))));
}

// Proper learner for singleton concepts. Tallies label-1 counts per point,
// runs the high-gap selector on the top-two counts, and releases the most
// frequent point on success. On bottom it falls back to a uniformly random
// point, or to the all-zero concept when `zero_fallback` is set. The random
// fallback needs 1/(alpha beta) <= 2^d so that a blind guess is still
// alpha-good with the required confidence; the all-zero fallback carries no
// such requirement.
inline LearnerOutput learn_point(const LabeledSample& s,
                                 const LearnerParams& params,
                                 RandomnessSource& rng,
                                 bool zero_fallback = false) {
  detail::check_learner_params(params, /*require_delta=*/true);
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  const int bits = s.bits();
  if (!zero_fallback &&
      1.0 / (params.alpha * params.beta) >
          static_cast<double>(domain_size(bits)))
    throw ConfigError(
        "random fallback needs 1/(alpha beta) <= 2^d; "
        "use the all-zero fallback on small domains");

  // Top two label-1 counts over the whole domain; points outside the tally
  // have count zero, and ties resolve toward the smaller point.
  std::map<std::uint64_t, std::uint64_t> counts;
  for (const auto& e : s.entries())
    if (e.y == 1) ++counts[e.x];
  std::uint64_t best_point = 0, best = 0, second = 0;
  for (const auto& [x, c] : counts) {
    if (c > best) {
      second = best;
      best = c;
      best_point = x;
    } else if (c > second) {
      second = c;
    }
  }

  auto sel =
      a_dist_gap(static_cast<double>(best) - static_cast<double>(second),
                 params.privacy.epsilon, params.privacy.delta, rng);
  sel.index = static_cast<std::size_t>(best_point);
  if (!sel.bottom) {
    LearnerOutput out{Concept::point(best_point, bits)};
    out.selection = sel;
    return out;
  }
  Concept fallback =
      zero_fallback
          ? Concept::zero_point(bits)
          : Concept::point(rng.uniform_index(domain_size(bits)), bits);
  LearnerOutput out{std::move(fallback)};
  out.bottom = true;
  out.selection = sel;
  return out;
}

// ---- Threshold learner ----------------------------------------------------

// Number of sample entries on which the threshold at j agrees with the
// label: |{i : [x_i < j] == y_i}|.
inline std::uint64_t threshold_agreement(const LabeledSample& s,
                                         std::uint64_t j) {
  if (j > domain_size(s.bits()))
    throw std::invalid_argument("threshold out of [0, 2^d]");
  std::uint64_t agree = 0;
  for (const auto& e : s.entries())
    agree += (e.x < j ? 1 : 0) == e.y;
  return agree;
}

// Larger of the two sample-size terms for the threshold learner at
// recursion depth n: (200 / alpha^2) ln(4 / (alpha beta)) for sampling, and
// 8^n (72 n / (alpha eps)) (log2(12 n / (beta delta)) + iterlog^n(2^d)) for
// the recursive mechanism.
inline std::uint64_t learn_threshold_min_sample(double alpha, double beta,
                                                double eps, double delta,
                                                std::uint64_t n, int bits) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1 ||
      !(eps > 0) || !(delta > 0))
    throw std::invalid_argument("parameters must lie in their open ranges");
  check_bits(bits);
  if (n == 0 || n > log_star_pow2(static_cast<std::uint64_t>(bits)))
    throw ConfigError("recursion depth must lie in [1, log*(2^d)]");
  const double nd = static_cast<double>(n);
  const double sampling =
      (200.0 / (alpha * alpha)) * std::log(4.0 / (alpha * beta));
  // One ceil-log application brings 2^d to d, so n applications to the
  // range are n - 1 applications to the exponent.
  const double ilog = static_cast<double>(
      iter_log(n - 1, static_cast<std::uint64_t>(bits)));
  const double mechanism =
      std::pow(8.0, nd) * (72.0 * nd / (alpha * eps)) *
      (std::log2(12.0 * nd / (beta * delta)) + ilog);
  return static_cast<std::uint64_t>(
      std::ceil(std::max(sampling, mechanism)));
}

// Proper threshold learner: maximizes label agreement over cut points in
// [0, 2^d] with the recursive quasi-concave optimizer at depth
// `recursion_budget`. Each of the 3n internal mechanisms receives
// eps/(3n) and delta/(3n), so the whole run spends (eps, delta).
inline LearnerOutput learn_threshold(const LabeledSample& s,
                                     const LearnerParams& params,
                                     RandomnessSource& rng) {
  detail::check_learner_params(params, /*require_delta=*/true);
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  const int bits = s.bits();
  if (bits > 20)
    throw ResourceError("threshold learner materializes 2^" +
                        std::to_string(bits) + " agreement counts");
  const std::uint64_t n = params.recursion_budget;
  const std::uint64_t bound = learn_threshold_min_sample(
      params.alpha, params.beta, params.privacy.epsilon,
      params.privacy.delta, n, bits);
  if (static_cast<double>(s.size()) <
      params.gamma_c * static_cast<double>(bound))
    throw ConfigError("sample smaller than the scaled minimum size");

  // Prefix counts make every agreement query O(1):
  // Q(j) = ones_below(j) + zeros_at_or_above(j).
  const std::uint64_t top = domain_size(bits);
  auto ones_lt =
      std::make_shared<std::vector<std::uint64_t>>(top + 1, 0);
  auto zeros_lt =
      std::make_shared<std::vector<std::uint64_t>>(top + 1, 0);
  std::uint64_t total_zero = 0;
  for (const auto& e : s.entries()) {
    if (e.y == 1) {
      ++(*ones_lt)[e.x + 1];
    } else {
      ++(*zeros_lt)[e.x + 1];
      ++total_zero;
    }
  }
  for (std::uint64_t j = 1; j <= top; ++j) {
    (*ones_lt)[j] += (*ones_lt)[j - 1];
    (*zeros_lt)[j] += (*zeros_lt)[j - 1];
  }

  QuasiConcaveProblem problem;
  problem.range = top;
  problem.promise = static_cast<double>(s.size());
  problem.approx = params.alpha / 2.0;
  problem.budget = n;
  problem.quality = [ones_lt, zeros_lt, total_zero](const Database&,
                                                    std::uint64_t j) {
    return static_cast<double>((*ones_lt)[j] + total_zero - (*zeros_lt)[j]);
  };
  const Database points = s.points();
  const auto res = rec_concave(
      problem, points, params.privacy.epsilon / (3.0 * static_cast<double>(n)),
      params.privacy.delta / (3.0 * static_cast<double>(n)), rng);
  LearnerOutput out{Concept::threshold(res.index, bits)};
  out.trace = res.trace;
  return out;
}

// ---- Generic finite-class learner -----------------------------------------

// Agnostic learner for any enumerable class: the exponential mechanism over
// all members with label-agreement quality.
inline LearnerOutput learn_generic(const LabeledSample& s,
                                   const ConceptClass& cc,
                                   const LearnerParams& params,
                                   RandomnessSource& rng,
                                   double budget = 1 << 20) {
  detail::check_learner_params(params, /*require_delta=*/false);
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  if (cc.labeled) throw std::invalid_argument("class must be unlabeled");
  if (cc.d * cc.axes != s.bits())
    throw std::invalid_argument("class domain does not match the sample");
  const auto hypotheses = enumerate_class(cc, budget);
  const double m = static_cast<double>(s.size());
  std::vector<double> qualities;
  qualities.reserve(hypotheses.size());
  for (const auto& h : hypotheses)
    qualities.push_back((1.0 - empirical_error(h, s)) * m);
  const std::size_t pick =
      exp_mechanism_index(qualities, params.privacy.epsilon, rng);
  LearnerOutput out{hypotheses[pick]};
  out.hypothesis_count = hypotheses.size();
  return out;
}

// ---- Label-private learner ------------------------------------------------

// Size of the label-independent first segment:
// (32 / alpha) (VC ln(64 / alpha) + ln(8 / beta)), scaled by gamma_c.
inline std::uint64_t learn_label_private_split(double alpha, double beta,
                                               int vc, double gamma_c) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1 || vc < 1 ||
      !(gamma_c > 0))
    throw std::invalid_argument("invalid split parameters");
  return static_cast<std::uint64_t>(std::ceil(
      (32.0 / alpha) *
      (static_cast<double>(vc) * std::log(64.0 / alpha) +
       std::log(8.0 / beta)) *
      gamma_c));
}

// Minimum total sample for the label-private learner:
// (768 / (alpha^2 eps)) (VC ln(64 / alpha) + 2 ln(8 / beta)), scaled by
// gamma_c.
inline std::uint64_t learn_label_private_min_sample(double alpha, double beta,
                                                    double eps, int vc,
                                                    double gamma_c) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1 ||
      !(eps > 0) || vc < 1 || !(gamma_c > 0))
    throw std::invalid_argument("invalid sample-bound parameters");
  return static_cast<std::uint64_t>(std::ceil(
      (768.0 / (alpha * alpha * eps)) *
      (static_cast<double>(vc) * std::log(64.0 / alpha) +
       2.0 * std::log(8.0 / beta)) *
      gamma_c));
}

// Learner that protects only the labels. The first segment supplies probe
// points, the class is projected onto those probes, and the exponential
// mechanism picks among the representatives by agreement on the second
// segment. Every step before the final selection ignores labels, and the
// selection reads only second-segment labels, so the run is (eps, 0)
// private with respect to single label changes.
inline LearnerOutput learn_label_private(const Database& sx,
                                         const std::vector<int>& sy,
                                         const ConceptClass& cc,
                                         const LearnerParams& params,
                                         RandomnessSource& rng,
                                         double budget = 1 << 20) {
  detail::check_learner_params(params, /*require_delta=*/false);
  if (sx.size() != sy.size())
    throw std::invalid_argument("points and labels differ in length");
  if (sx.size() == 0) throw std::invalid_argument("empty sample");
  if (cc.labeled) throw std::invalid_argument("class must be unlabeled");
  if (cc.d * cc.axes != sx.bits())
    throw std::invalid_argument("class domain does not match the sample");
  for (int y : sy)
    if (y != 0 && y != 1)
      throw std::invalid_argument("labels must be 0 or 1");
  const int vc = vc_dimension(cc);
  const std::uint64_t need = learn_label_private_min_sample(
      params.alpha, params.beta, params.privacy.epsilon, vc, params.gamma_c);
  if (sx.size() < need)
    throw ConfigError("sample smaller than the scaled minimum size");
  const std::uint64_t n = learn_label_private_split(
      params.alpha, params.beta, vc, params.gamma_c);
  if (n >= sx.size())
    throw ConfigError("first segment would swallow the whole sample");

  // Distinct probe points from the first segment; labels are not read.
  std::vector<std::uint64_t> probes(
      sx.values().begin(),
      sx.values().begin() + static_cast<std::ptrdiff_t>(n));
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  // One representative per labeling the class induces on the probes.
  const auto dichotomies = project_class(cc, probes, budget);
  std::vector<Concept> hypotheses;
  hypotheses.reserve(dichotomies.size());
  for (const auto& dich : dichotomies)
    hypotheses.push_back(dich.representative);

  // The only label-reading step: agreement on the second segment.
  std::vector<double> qualities(hypotheses.size(), 0.0);
  for (std::size_t i = n; i < sx.size(); ++i)
    for (std::size_t h = 0; h < hypotheses.size(); ++h)
      qualities[h] +=
          hypotheses[h].evaluate(sx.value(i), sx.bits()) == sy[i];
  const std::size_t pick =
      exp_mechanism_index(qualities, params.privacy.epsilon, rng);
  LearnerOutput out{hypotheses[pick]};
  out.probe_count = probes.size();
  out.hypothesis_count = hypotheses.size();
  return out;
}

// ---- Rectangle learner ----------------------------------------------------

// Number of near-equal-mass cells each axis is cut into:
// ceil(c_p * axes / alpha).
inline std::uint64_t rectangle_interval_count(double c_p, int axes,
                                              double alpha) {
  if (!(c_p > 0) || axes < 1 || !(alpha > 0) || alpha >= 1)
    throw std::invalid_argument("invalid partition parameters");
  return static_cast<std::uint64_t>(
      std::ceil(c_p * static_cast<double>(axes) / alpha));
}

// Per-mechanism budget for the 2 * axes mechanism groups of the rectangle
// learner (one interval sanitizer plus one noisy histogram per axis): the
// better of an even split and the strong-composition root.
inline PrivacyParams rectangle_budget_split(int axes,
                                            const PrivacyParams& total) {
  if (axes < 1) throw std::invalid_argument("need at least one axis");
  check_privacy(total, /*require_delta=*/true);
  const double k = 2.0 * static_cast<double>(axes);
  const double eps_basic = total.epsilon / k;
  // Strong composition reserves delta/2 for the composition slack and
  // splits the rest evenly; its per-mechanism epsilon is the root of
  // sqrt(2k ln(2/delta)) x + 2k x^2 = eps on (0, 1], when one exists.
  const double delta_prime = total.delta / 2.0;
  const double c = std::sqrt(2.0 * k * std::log(1.0 / delta_prime));
  const auto composed = [&](double x) { return c * x + 2.0 * k * x * x; };
  if (composed(1.0) >= total.epsilon) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = (lo + hi) / 2.0;
      (composed(mid) < total.epsilon ? lo : hi) = mid;
    }
    if (lo > eps_basic) return {lo, total.delta / (2.0 * k)};
  }
  return {eps_basic, total.delta / k};
}

// Proper learner for axis-parallel boxes. Per axis: sanitize the coordinate
// marginal, cut it into near-equal-mass cells, estimate each cell's
// labeled-1 mass with a noisy histogram, and keep the span from the first
// to the last cell whose estimate clears alpha / (4 axes). An axis with no
// significant cell makes the whole hypothesis the empty box.
inline LearnerOutput learn_rectangle(const LabeledSample& s, int axes,
                                     const LearnerParams& params,
                                     RandomnessSource& rng,
                                     const RectangleConfig& cfg = {}) {
  detail::check_learner_params(params, /*require_delta=*/true);
  if (axes < 1) throw std::invalid_argument("need at least one axis");
  if (s.bits() % axes != 0)
    throw std::invalid_argument("sample width not divisible by axis count");
  if (s.size() == 0) throw std::invalid_argument("empty sample");
  const int d = s.bits() / axes;
  const PrivacyParams unit = rectangle_budget_split(axes, params.privacy);
  const std::uint64_t cells =
      rectangle_interval_count(cfg.c_p, axes, params.alpha);
  if (cells > domain_size(d))
    throw ConfigError("more partition cells than axis values");
  const double tau = params.alpha / (4.0 * static_cast<double>(axes));
  const double m = static_cast<double>(s.size());
  const double alpha_san =
      params.alpha / (cfg.c_r * static_cast<double>(axes));
  const double beta_san = params.beta / (2.0 * static_cast<double>(axes));

  std::vector<std::uint64_t> lo(static_cast<std::size_t>(axes), 0);
  std::vector<std::uint64_t> hi(static_cast<std::size_t>(axes), 0);
  std::vector<AxisDiagnostics> diags;
  bool degenerate = false;
  for (int ax = 0; ax < axes && !degenerate; ++ax) {
    Database proj(d);
    for (const auto& e : s.entries())
      proj.add(unpack_axis(e.x, static_cast<std::size_t>(ax), d));
    const WeightedDatabase san =
        san_thresholds_run(proj, alpha_san, beta_san, unit.epsilon,
                           unit.delta, rng, params.gamma_c);

    AxisDiagnostics diag;
    // Quantile boundaries of the sanitized marginal: cut q sits right
    // after the prefix holding q/cells of the total weight. A massless
    // sanitizer output falls back to an even value split.
    diag.cuts.assign(cells + 1, 0);
    diag.cuts[cells] = domain_size(d);
    const double total = san.total_weight();
    if (total > 0) {
      auto it = san.weights().begin();
      double cum = 0.0;
      for (std::uint64_t q = 1; q < cells; ++q) {
        const double target =
            total * static_cast<double>(q) / static_cast<double>(cells);
        while (cum < target && it != san.weights().end()) {
          cum += it->second;
          ++it;
        }
        diag.cuts[q] =
            it == san.weights().begin() ? 0 : std::prev(it)->first + 1;
      }
    } else {
      for (std::uint64_t q = 1; q < cells; ++q)
        diag.cuts[q] = q * domain_size(d) / cells;
    }

    // Noisy labeled-1 mass per cell: one histogram release with L1
    // sensitivity 2/m over the fractions.
    diag.estimates.assign(cells, 0.0);
    for (const auto& e : s.entries()) {
      if (e.y != 1) continue;
      const std::uint64_t coord =
          unpack_axis(e.x, static_cast<std::size_t>(ax), d);
      const auto pos =
          std::upper_bound(diag.cuts.begin() + 1, diag.cuts.end(), coord);
      diag.estimates[static_cast<std::size_t>(
          pos - (diag.cuts.begin() + 1))] += 1.0;
    }
    for (auto& v : diag.estimates)
      v = v / m + laplace(2.0 / (unit.epsilon * m), rng);

    // Outermost significant cells bound the box on this axis.
    bool any = false;
    std::size_t left = 0, right = 0;
    for (std::size_t q = 0; q < cells; ++q) {
      if (diag.estimates[q] > tau) {
        if (!any) left = q;
        right = q;
        any = true;
      }
    }
    if (!any) {
      diag.degenerate = true;
      degenerate = true;
      diags.push_back(std::move(diag));
      break;
    }
    diag.left_interval = left;
    diag.right_interval = right;
    lo[static_cast<std::size_t>(ax)] = diag.cuts[left];
    hi[static_cast<std::size_t>(ax)] = diag.cuts[right + 1] - 1;
    diags.push_back(std::move(diag));
  }

  Concept h =
      degenerate
          ? Concept::rectangle(
                std::vector<std::uint64_t>(static_cast<std::size_t>(axes), 1),
                std::vector<std::uint64_t>(static_cast<std::size_t>(axes), 0),
                d)
          : Concept::rectangle(lo, hi, d);
  LearnerOutput out{std::move(h)};
  out.axes = std::move(diags);
  return out;
}

}  // namespace dp
