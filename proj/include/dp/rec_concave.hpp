#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dp/domain.hpp"
#include "dp/privacy.hpp"

namespace dp {

// Quality of solution i on database S. Callers declare sensitivity 1 in
// each database position; the solver never verifies it.
using QualityFn = std::function<double(const Database&, std::uint64_t)>;

// ceil(log2(x)), with values <= 1 mapping to 0.
inline std::uint64_t ceil_log2(std::uint64_t x) {
  return x <= 1 ? 0 : static_cast<std::uint64_t>(std::bit_width(x - 1));
}

// n-fold application of ceil_log2 to t.
inline std::uint64_t iter_log(std::uint64_t n, std::uint64_t t) {
  for (std::uint64_t i = 0; i < n; ++i) t = ceil_log2(t);
  return t;
}

// Number of ceil_log2 applications needed to bring t down to 1 or less.
inline std::uint64_t log_star(std::uint64_t t) {
  std::uint64_t count = 0;
  while (t > 1) {
    t = ceil_log2(t);
    ++count;
  }
  return count;
}

// log_star of 2^exponent, for ranges too large to represent directly.
inline std::uint64_t log_star_pow2(std::uint64_t exponent) {
  return exponent == 0 ? 0 : 1 + log_star(exponent);
}

// True iff v[l] >= min(v[i], v[j]) for every i <= l <= j. Checked in one
// pass against the running maxima from both ends.
inline bool quasi_concave(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("empty sequence");
  const std::size_t n = v.size();
  std::vector<double> right_max(n);
  double acc = -1e300;
  for (std::size_t i = n; i-- > 0;) {
    acc = std::max(acc, v[i]);
    right_max[i] = acc;
  }
  double left_max = -1e300;
  for (std::size_t i = 0; i < n; ++i) {
    left_max = std::max(left_max, v[i]);
    if (v[i] < std::min(left_max, right_max[i])) return false;
  }
  return true;
}

// A maximization problem over the integer range [0, range] with a promised
// optimum of at least `promise`, to be solved within a factor (1 - approx).
// The promise and the quasi-concavity of the quality are caller assertions:
// privacy never depends on them, only utility does. `budget` counts the
// remaining recursion levels including the current one.
struct QuasiConcaveProblem {
  std::uint64_t range = 0;
  QualityFn quality;
  double promise = 1.0;
  double approx = 0.25;
  std::uint64_t budget = 1;
};

namespace detail {

// Quality values on [0, padded]: the real values on [0, range] followed by
// the constant extension min(0, Q(S, range)).
inline std::vector<double> extended_qualities(const Database& s,
                                              const QualityFn& q,
                                              std::uint64_t range,
                                              std::uint64_t padded) {
  std::vector<double> out;
  out.reserve(padded + 1);
  for (std::uint64_t i = 0; i <= range; ++i) out.push_back(q(s, i));
  const double tail = std::min(0.0, out.back());
  for (std::uint64_t i = range + 1; i <= padded; ++i) out.push_back(tail);
  return out;
}

// L[j] = best over all length-2^j windows of the window minimum, for
// j = 0..top, plus L[top+1] = min(0, L[top]). Doubling windows keep the
// whole table at O(padded * log padded).
inline std::vector<double> window_quality_levels(std::vector<double> vals) {
  const std::uint64_t top = ceil_log2(vals.size() - 1);
  std::vector<double> levels;
  levels.reserve(top + 2);
  for (std::uint64_t j = 0; j <= top; ++j) {
    if (j > 0) {
      const std::size_t half = 1ull << (j - 1);
      for (std::size_t a = 0; a + half < vals.size(); ++a)
        vals[a] = std::min(vals[a], vals[a + half]);
      vals.resize(vals.size() - half);
    }
    levels.push_back(*std::max_element(vals.begin(), vals.end()));
  }
  levels.push_back(std::min(0.0, levels.back()));
  return levels;
}

}  // namespace detail

// Best achievable minimum of the (extended) quality over intervals of
// length 2^j inside [0, padded].
inline double interval_quality_L(const Database& s, const QualityFn& q,
                                 std::uint64_t range, std::uint64_t padded,
                                 std::uint64_t j) {
  if (padded < range || std::bit_ceil(padded) != padded)
    throw std::invalid_argument("padded range must be a power of two >= range");
  const std::uint64_t top = ceil_log2(padded);
  if (j > top + 1) throw std::invalid_argument("window level out of range");
  const auto levels = detail::window_quality_levels(
      detail::extended_qualities(s, q, range, padded));
  return levels[j];
}

// Recursion quality: min(L(j) - (1-alpha) r, r - L(j+1)). High exactly on
// window sizes that still fit inside the high-quality region.
inline double step_quality_q(const Database& s, const QualityFn& q,
                             std::uint64_t range, std::uint64_t padded,
                             std::uint64_t j, double r, double alpha) {
  if (j > ceil_log2(padded))
    throw std::invalid_argument("window level out of range");
  const double lj = interval_quality_L(s, q, range, padded, j);
  const double lj1 = interval_quality_L(s, q, range, padded, j + 1);
  return std::min(lj - (1.0 - alpha) * r, r - lj1);
}

// Smallest promise for which the solver's utility guarantee is claimed at
// recursion budget n over [0, t]:
// 8^n * (36 n / (alpha eps)) * (log2(6 n / (beta delta)) + iter_log(n, t)).
inline double min_promise(double alpha, double beta, double eps, double delta,
                          std::uint64_t n, std::uint64_t t) {
  if (!(alpha > 0) || alpha > 0.5)
    throw std::invalid_argument("approximation must lie in (0, 1/2]");
  if (!(beta > 0) || beta >= 1)
    throw std::invalid_argument("beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  if (n == 0 || n > log_star(t))
    throw std::invalid_argument("recursion budget must lie in [1, log*(t)]");
  const double nd = static_cast<double>(n);
  return std::pow(8.0, nd) * (36.0 * nd / (alpha * eps)) *
         (std::log2(6.0 * nd / (beta * delta)) +
          static_cast<double>(iter_log(n, t)));
}

// One recursion level of the solver, for diagnostics.
struct RecLevel {
  std::uint64_t range = 0;   // T at this level
  std::uint64_t padded = 0;  // T' (power of two), recursive levels only
  bool base_case = false;
  int mechanism_calls = 0;
  std::uint64_t z = 0;  // index returned by the recursive call
  std::uint64_t block = 0;   // K = 2^z
  bool a_bottom = false, b_bottom = false;
  std::uint64_t a_lo = 0, a_hi = 0, b_lo = 0, b_hi = 0;
  std::uint64_t chosen = 0;  // index picked at this level
};

struct RecTrace {
  std::vector<RecLevel> levels;

  std::string to_string() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& l = levels[i];
      out << "level " << (i + 1) << ": T=" << l.range;
      if (l.base_case) {
        out << " base pick=" << l.chosen;
      } else {
        out << " T'=" << l.padded << " z=" << l.z << " K=" << l.block
            << " A=";
        if (l.a_bottom)
          out << "bottom";
        else
          out << "[" << l.a_lo << "," << l.a_hi << "]";
        out << " B=";
        if (l.b_bottom)
          out << "bottom";
        else
          out << "[" << l.b_lo << "," << l.b_hi << "]";
        out << " pick=" << l.chosen;
      }
      out << " calls=" << l.mechanism_calls << "\n";
    }
    return out.str();
  }
};

struct RecResult {
  std::uint64_t index = 0;
  RecTrace trace;
};

namespace detail {

inline std::uint64_t rec_concave_level(const QuasiConcaveProblem& p,
                                       const Database& s, double eps,
                                       double delta, RandomnessSource& rng,
                                       RecTrace& trace) {
  RecLevel level;
  level.range = p.range;

  if (p.range <= 32 || p.budget == 1) {
    // Base case: one exponential mechanism over the whole range.
    std::vector<double> qualities;
    qualities.reserve(p.range + 1);
    for (std::uint64_t i = 0; i <= p.range; ++i)
      qualities.push_back(p.quality(s, i));
    level.base_case = true;
    level.mechanism_calls = 1;
    level.chosen = exp_mechanism_index(qualities, eps, rng);
    trace.levels.push_back(level);
    return level.chosen;
  }

  const std::uint64_t padded = std::bit_ceil(p.range);
  const std::uint64_t top = ceil_log2(padded);
  level.padded = padded;
  const auto ext = extended_qualities(s, p.quality, p.range, padded);
  const auto window_levels = window_quality_levels(ext);

  // Recurse on window sizes with promise (approx/2) * promise, accuracy 1/4.
  QuasiConcaveProblem inner;
  inner.range = top;
  inner.promise = (p.approx / 2.0) * p.promise;
  inner.approx = 0.25;
  inner.budget = p.budget - 1;
  const double r = p.promise;
  const double alpha = p.approx;
  inner.quality = [&window_levels, r, alpha](const Database&,
                                             std::uint64_t j) {
    return std::min(window_levels[j] - (1.0 - alpha) * r,
                    r - window_levels[j + 1]);
  };
  // The trace slot for this level is filled after the recursion returns so
  // levels read root-first.
  const std::size_t slot = trace.levels.size();
  trace.levels.push_back(level);
  const std::uint64_t z = rec_concave_level(inner, s, eps, delta, rng, trace);
  RecLevel& lv = trace.levels[slot];
  lv.z = z;
  const std::uint64_t block = std::uint64_t{1} << std::min<std::uint64_t>(
                                  z, 60);
  lv.block = block;

  // Length-8K blocks from 0, and the same grid shifted by 4K; trailing
  // blocks are trimmed. A degenerate shifted family gets the tail point.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> a_blocks, b_blocks;
  for (std::uint64_t a = 0; a <= padded; a += 8 * block)
    a_blocks.emplace_back(a, std::min(a + 8 * block - 1, padded));
  for (std::uint64_t b = 4 * block; b <= padded; b += 8 * block)
    b_blocks.emplace_back(b, std::min(b + 8 * block - 1, padded));
  if (b_blocks.empty()) b_blocks.emplace_back(padded, padded);

  const auto interval_max = [&ext](std::pair<std::uint64_t, std::uint64_t> i) {
    double best = ext[i.first];
    for (std::uint64_t t = i.first + 1; t <= i.second; ++t)
      best = std::max(best, ext[t]);
    return best;
  };
  const auto pick_interval =
      [&](const std::vector<std::pair<std::uint64_t, std::uint64_t>>& blocks,
          bool& bottom, std::uint64_t& lo, std::uint64_t& hi) {
        std::vector<double> scores;
        scores.reserve(blocks.size());
        for (const auto& b : blocks) scores.push_back(interval_max(b));
        const auto sel = a_dist_index(scores, eps, delta, rng);
        bottom = sel.bottom;
        if (!sel.bottom) {
          lo = blocks[sel.index].first;
          hi = blocks[sel.index].second;
        }
      };
  pick_interval(a_blocks, lv.a_bottom, lv.a_lo, lv.a_hi);
  pick_interval(b_blocks, lv.b_bottom, lv.b_lo, lv.b_hi);

  // Candidates: indices covered by the released intervals; with both sides
  // at bottom, fall back to the full padded range.
  std::vector<std::uint64_t> candidates;
  if (lv.a_bottom && lv.b_bottom) {
    candidates.resize(padded + 1);
    for (std::uint64_t i = 0; i <= padded; ++i) candidates[i] = i;
  } else {
    if (!lv.a_bottom)
      for (std::uint64_t i = lv.a_lo; i <= lv.a_hi; ++i)
        candidates.push_back(i);
    if (!lv.b_bottom)
      for (std::uint64_t i = lv.b_lo; i <= lv.b_hi; ++i)
        candidates.push_back(i);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());
  }
  std::vector<double> qualities;
  qualities.reserve(candidates.size());
  for (std::uint64_t c : candidates) qualities.push_back(ext[c]);
  const std::uint64_t picked =
      candidates[exp_mechanism_index(qualities, eps, rng)];
  lv.mechanism_calls = 3;
  lv.chosen = std::min(picked, p.range);
  return lv.chosen;
}

}  // namespace detail

// Private solver for quasi-concave promise problems. Small ranges or an
// exhausted budget run one exponential mechanism; otherwise the level
// recurses on window sizes, picks an interval from each of the two shifted
// block families, and selects an index inside their union. Every level
// spends at most (3 eps, 2 delta); with budget N the whole run stays
// within (3 N eps, 3 N delta).
inline RecResult rec_concave(const QuasiConcaveProblem& p, const Database& s,
                             double eps, double delta, RandomnessSource& rng) {
  if (!p.quality) throw std::invalid_argument("quality function required");
  if (!(p.approx > 0) || p.approx > 0.5)
    throw std::invalid_argument("approximation must lie in (0, 1/2]");
  if (!(p.promise > 0))
    throw std::invalid_argument("promise must be positive");
  if (p.budget == 0)
    throw std::invalid_argument("recursion budget must be positive");
  check_privacy({eps, delta});
  RecResult res;
  res.index = detail::rec_concave_level(p, s, eps, delta, rng, res.trace);
  return res;
}

}  // namespace dp
