#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "dp/choosing.hpp"
#include "dp/domain.hpp"
#include "dp/privacy.hpp"
#include "dp/rec_concave.hpp"

namespace dp {

// Point-query answers in [0,1], defaulting to 0 for points never set.
// With a positive arity the estimate answers point-set queries of exactly
// that size by a lazily clamped sum, so the full set of k-subsets is never
// materialized.
class Estimate {
 public:
  explicit Estimate(int bits, std::uint64_t point_set_arity = 0)
      : bits_(bits), arity_(point_set_arity) {
    check_bits(bits);
  }

  int bits() const { return bits_; }
  std::uint64_t arity() const { return arity_; }
  const std::map<std::uint64_t, double>& values() const { return values_; }

  void set(std::uint64_t point, double value) {
    check_value(point, bits_);
    values_[point] = std::clamp(value, 0.0, 1.0);
  }

  double point_estimate(std::uint64_t point) const {
    const auto it = values_.find(point);
    return it == values_.end() ? 0.0 : it->second;
  }

  double evaluate(const Concept& c) const {
    if (c.domain_bits() != bits_)
      throw std::invalid_argument("estimate and concept widths differ");
    if (c.kind() == ConceptKind::kPoint)
      return c.is_zero_point() ? 0.0 : point_estimate(c.index());
    if (c.kind() == ConceptKind::kPointSet) {
      if (arity_ != 0 && c.set().size() != arity_)
        throw std::invalid_argument("point-set query arity mismatch");
      double sum = 0.0;
      for (std::uint64_t p : c.set()) sum += point_estimate(p);
      return std::min(1.0, sum);
    }
    throw std::invalid_argument("estimate answers point queries only");
  }

 private:
  int bits_;
  std::uint64_t arity_;
  std::map<std::uint64_t, double> values_;
};

// Database with non-negative real multiplicities. Counting queries are
// weight fractions of the total.
class WeightedDatabase {
 public:
  explicit WeightedDatabase(int bits) : bits_(bits) { check_bits(bits); }

  int bits() const { return bits_; }
  double total_weight() const { return total_; }
  const std::map<std::uint64_t, double>& weights() const { return weights_; }

  void add_weight(std::uint64_t point, double weight) {
    check_value(point, bits_);
    if (!(weight >= 0))
      throw std::invalid_argument("weights must be non-negative");
    if (weight > 0) weights_[point] += weight;
    total_ += weight;
  }

  double counting_query(const Concept& c) const {
    if (!(total_ > 0))
      throw std::invalid_argument("counting query on empty weighted database");
    double acc = 0.0;
    for (const auto& [p, w] : weights_)
      if (c.evaluate(p, bits_)) acc += w;
    return acc / total_;
  }

 private:
  int bits_;
  double total_ = 0.0;
  std::map<std::uint64_t, double> weights_;
};

namespace detail {

inline std::uint64_t count_range_sorted(
    const std::vector<std::uint64_t>& sorted, std::uint64_t lo,
    std::uint64_t hi) {
  const auto a = std::lower_bound(sorted.begin(), sorted.end(), lo);
  const auto b = std::upper_bound(sorted.begin(), sorted.end(), hi);
  return static_cast<std::uint64_t>(b - a);
}

// Max points inside any value window of width min(2^j, |range|) within
// [lo, hi], two-pointer over the sorted values.
inline std::uint64_t interval_stat_sorted(
    const std::vector<std::uint64_t>& sorted, std::uint64_t lo,
    std::uint64_t hi, std::uint64_t j) {
  const std::size_t first = static_cast<std::size_t>(
      std::lower_bound(sorted.begin(), sorted.end(), lo) - sorted.begin());
  const std::size_t last = static_cast<std::size_t>(
      std::upper_bound(sorted.begin(), sorted.end(), hi) - sorted.begin());
  const std::uint64_t len = hi - lo + 1;
  const std::uint64_t cap =
      j >= 63 ? len : std::min<std::uint64_t>(len, std::uint64_t{1} << j);
  std::uint64_t best = 0;
  std::size_t left = first;
  for (std::size_t i = first; i < last; ++i) {
    while (sorted[i] - sorted[left] + 1 > cap) ++left;
    best = std::max<std::uint64_t>(best, i - left + 1);
  }
  return best;
}

}  // namespace detail

// Number of database elements with value in [a, b].
inline std::uint64_t count_range(const Database& s, std::uint64_t a,
                                 std::uint64_t b) {
  if (a > b) throw std::invalid_argument("empty range");
  check_value(b, s.bits());
  std::uint64_t c = 0;
  for (std::uint64_t v : s.values()) c += v >= a && v <= b;
  return c;
}

// Max count over intervals [x, y] inside [lo, hi] of length at most 2^j.
inline std::uint64_t interval_stat_I(const Database& s, std::uint64_t lo,
                                     std::uint64_t hi, std::uint64_t j) {
  if (lo > hi) throw std::invalid_argument("empty range");
  check_value(hi, s.bits());
  std::vector<std::uint64_t> sorted(s.values());
  std::sort(sorted.begin(), sorted.end());
  return detail::interval_stat_sorted(sorted, lo, hi, j);
}

// Window-size quality used by the threshold sanitizer:
// min(I(j) - alpha m/32, 3 alpha m/32 - I(j-1)), with I(-1) = 0.
inline double san_step_quality_Q(const Database& s, std::uint64_t lo,
                                 std::uint64_t hi, std::uint64_t j,
                                 std::uint64_t m, double alpha) {
  const double ij = static_cast<double>(interval_stat_I(s, lo, hi, j));
  const double prev =
      j == 0 ? 0.0 : static_cast<double>(interval_stat_I(s, lo, hi, j - 1));
  const double md = static_cast<double>(m);
  return std::min(ij - alpha * md / 32.0, 3.0 * alpha * md / 32.0 - prev);
}

struct SanPointsTrace {
  int choose_calls = 0;
  std::vector<std::uint64_t> chosen;
};

// Smallest database size accepted by the point sanitizer: the selection
// step must itself be large enough at the derived privacy parameters.
inline std::uint64_t san_points_min_sample(double alpha, double beta,
                                           double eps, double delta) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  const double eps_t = eps / std::sqrt((32.0 / alpha) * std::log(5.0 / delta));
  const double delta_t = alpha * delta / 5.0;
  return choose_min_sample(alpha / 2.0, alpha * beta / 4.0, eps_t, delta_t, 1);
}

// Point sanitizer: repeatedly picks a still-unestimated frequent point and
// releases its noisy frequency. Points never picked keep estimate 0.
inline Estimate san_points(const Database& s, double alpha, double beta,
                           double eps, double delta, RandomnessSource& rng,
                           bool validate_sample = true,
                           SanPointsTrace* trace = nullptr) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  if (s.size() == 0) throw std::invalid_argument("empty database");
  if (validate_sample &&
      s.size() < san_points_min_sample(alpha, beta, eps, delta))
    throw std::invalid_argument(
        "database smaller than the sanitizer's minimum sample size");

  const double eps_t = eps / std::sqrt((32.0 / alpha) * std::log(5.0 / delta));
  const double delta_t = alpha * delta / 5.0;
  const double m = static_cast<double>(s.size());

  std::set<std::uint64_t> removed;
  BoundedGrowthQuality q;
  q.growth_bound = 1;
  q.score = [&removed](const Database& db, std::uint64_t f) -> std::uint64_t {
    if (removed.count(f)) return 0;
    std::uint64_t c = 0;
    for (std::uint64_t v : db.values()) c += v == f;
    return c;
  };
  q.support = [&removed](const Database& db) {
    std::set<std::uint64_t> out(db.values().begin(), db.values().end());
    for (std::uint64_t r : removed) out.erase(r);
    return std::vector<std::uint64_t>(out.begin(), out.end());
  };

  Estimate est(s.bits());
  const auto iterations =
      static_cast<std::uint64_t>(std::ceil(2.0 / alpha));
  for (std::uint64_t i = 0; i < iterations; ++i) {
    const auto outcome = choose(s, q, alpha / 2.0, alpha * beta / 4.0, eps_t,
                                delta_t, rng, /*validate_sample=*/false);
    if (trace) ++trace->choose_calls;
    if (outcome.bottom) continue;
    const std::uint64_t b = outcome.solution;
    const double truth =
        static_cast<double>(count_range(s, b, b)) / m;
    est.set(b, truth + laplace(1.0 / (eps_t * m), rng));
    removed.insert(b);
    if (trace) trace->chosen.push_back(b);
  }
  return est;
}

// Sanitizer for size-k point-set queries: the point sanitizer at
// approximation alpha/k, answering set queries by lazy summation.
inline Estimate san_k_points(const Database& s, std::uint64_t k, double alpha,
                             double beta, double eps, double delta,
                             RandomnessSource& rng,
                             bool validate_sample = true,
                             SanPointsTrace* trace = nullptr) {
  if (k == 0) throw std::invalid_argument("set size must be positive");
  const Estimate inner = san_points(s, alpha / static_cast<double>(k), beta,
                                    eps, delta, rng, validate_sample, trace);
  Estimate out(s.bits(), k);
  for (const auto& [p, v] : inner.values()) out.set(p, v);
  return out;
}

// One recursion step of the threshold sanitizer, for diagnostics.
struct SanCallRecord {
  std::uint64_t lo = 0, hi = 0;
  int laplace = 0, choose = 0, rec = 0;
  std::uint64_t z = 0;
  bool emitted = false;
  std::uint64_t point = 0;
  double weight = 0.0;
  std::vector<double> draws;
};

// Shared state of one threshold-sanitizer execution: the accumulating
// output, the remaining recursion budget, and a per-call log.
struct SanState {
  explicit SanState(int bits) : output(bits) {}
  std::uint64_t calls = 0;
  bool budget_exhausted = false;
  WeightedDatabase output;
  std::vector<SanCallRecord> log;
  std::vector<std::uint64_t> sorted;  // input values, sorted once per run
};

// Sample-size bound of the threshold sanitizer:
// (1024/(alpha eps)) ln(2048/(alpha beta eps delta)).
inline std::uint64_t san_thresholds_min_sample(double alpha, double beta,
                                               double eps, double delta) {
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  return static_cast<std::uint64_t>(
      std::ceil((1024.0 / (alpha * eps)) *
                std::log(2048.0 / (alpha * beta * eps * delta))));
}

// Recursive threshold sanitizer over the range [lo, hi]: estimate the
// range's noisy count, either emit it whole (small mass) or privately
// locate a dense point or short interval, emit its noisy count at the
// interval's right end, and recurse on both sides.
inline void san_thresholds(const Database& s, std::uint64_t lo,
                           std::uint64_t hi, double alpha, double beta,
                           double eps, double delta, SanState& state,
                           RandomnessSource& rng) {
  if (lo > hi) throw std::invalid_argument("empty range");
  if (state.calls == 0) {
    state.budget_exhausted = true;
    return;
  }
  state.calls -= 1;
  if (state.sorted.size() != s.size()) {
    state.sorted = s.values();
    std::sort(state.sorted.begin(), state.sorted.end());
  }
  const std::size_t idx = state.log.size();
  state.log.push_back({});
  state.log[idx].lo = lo;
  state.log[idx].hi = hi;
  const double m = static_cast<double>(s.size());

  const auto emit = [&state, idx](std::uint64_t point, double w) {
    w = std::max(0.0, w);
    state.output.add_weight(point, w);
    state.log[idx].emitted = true;
    state.log[idx].point = point;
    state.log[idx].weight = w;
  };

  const double d1 = laplace(1.0 / eps, rng);
  ++state.log[idx].laplace;
  state.log[idx].draws.push_back(d1);
  const double noisy =
      static_cast<double>(detail::count_range_sorted(state.sorted, lo, hi)) +
      d1;
  if (noisy < alpha * m / 8.0) {
    emit(hi, noisy);
    return;
  }

  const std::uint64_t t_pow = std::bit_ceil(hi - lo + 1);
  const std::uint64_t logt = ceil_log2(t_pow);
  const std::uint64_t stars = std::max<std::uint64_t>(
      1, log_star(static_cast<std::uint64_t>(s.bits())));

  QuasiConcaveProblem window_problem;
  window_problem.range = logt;
  window_problem.promise = alpha * m / 32.0;
  window_problem.approx = 0.25;
  window_problem.budget = stars;
  window_problem.quality = [&state, lo, hi, m, alpha](const Database&,
                                                      std::uint64_t j) {
    const double ij = static_cast<double>(
        detail::interval_stat_sorted(state.sorted, lo, hi, j));
    const double prev =
        j == 0 ? 0.0
               : static_cast<double>(detail::interval_stat_sorted(
                     state.sorted, lo, hi, j - 1));
    return std::min(ij - alpha * m / 32.0, 3.0 * alpha * m / 32.0 - prev);
  };
  const auto zres =
      rec_concave(window_problem, s, eps / (3.0 * stars),
                  delta / (3.0 * stars), rng);
  ++state.log[idx].rec;
  const std::uint64_t z = zres.index;
  state.log[idx].z = z;

  BoundedGrowthQuality q;
  const std::uint64_t zz = std::uint64_t{1}
                           << std::min<std::uint64_t>(z, 60);
  if (z == 0) {
    // Single-point histogram restricted to the current range.
    q.growth_bound = 1;
    q.score = [&state, lo, hi](const Database&,
                               std::uint64_t f) -> std::uint64_t {
      if (f < lo || f > hi) return 0;
      return detail::count_range_sorted(state.sorted, f, f);
    };
    q.support = [&state, lo, hi](const Database&) {
      std::set<std::uint64_t> out;
      for (std::uint64_t v : state.sorted)
        if (v >= lo && v <= hi) out.insert(v);
      return std::vector<std::uint64_t>(out.begin(), out.end());
    };
  } else {
    // Length-2Z intervals from lo plus the same grid shifted by Z; a point
    // lies in at most one interval of each family. Solutions are interval
    // start points.
    const std::uint64_t step = 2 * zz;
    q.growth_bound = 2;
    q.score = [&state, hi, step](const Database&,
                                 std::uint64_t start) -> std::uint64_t {
      return detail::count_range_sorted(state.sorted, start,
                                        std::min(start + step - 1, hi));
    };
    q.support = [&state, lo, hi, zz, step](const Database&) {
      std::set<std::uint64_t> out;
      for (std::uint64_t v : state.sorted) {
        if (v < lo || v > hi) continue;
        out.insert(lo + ((v - lo) / step) * step);
        if (v >= lo + zz) out.insert(lo + zz + ((v - lo - zz) / step) * step);
      }
      return std::vector<std::uint64_t>(out.begin(), out.end());
    };
  }
  const auto outcome = choose(s, q, alpha / 64.0, beta, eps, delta, rng,
                              /*validate_sample=*/false);
  ++state.log[idx].choose;
  if (outcome.bottom) {
    // The figure leaves this case open; emitting the whole range as in the
    // small-mass base case keeps the run terminating and private.
    emit(hi, noisy);
    return;
  }
  std::uint64_t a, b;
  if (z == 0) {
    a = b = outcome.solution;
  } else {
    a = outcome.solution;
    b = std::min(a + 2 * zz - 1, hi);
  }

  const double d2 = laplace(1.0 / eps, rng);
  ++state.log[idx].laplace;
  state.log[idx].draws.push_back(d2);
  emit(b, static_cast<double>(detail::count_range_sorted(state.sorted, a, b)) +
              d2);

  if (a > lo) san_thresholds(s, lo, a - 1, alpha, beta, eps, delta, state, rng);
  if (b < hi) san_thresholds(s, b + 1, hi, alpha, beta, eps, delta, state, rng);
}

// Whole-domain threshold sanitization with a fresh recursion budget of
// ceil(77/alpha) calls. gamma_c scales the minimum-sample validation so
// small demonstrations can opt into reduced-guarantee runs.
inline WeightedDatabase san_thresholds_run(const Database& s, double alpha,
                                           double beta, double eps,
                                           double delta,
                                           RandomnessSource& rng,
                                           double gamma_c = 1.0,
                                           bool validate_sample = true,
                                           SanState* out_state = nullptr) {
  if (!(gamma_c > 0)) throw std::invalid_argument("gamma_c must be positive");
  if (s.size() == 0) throw std::invalid_argument("empty database");
  if (!(alpha > 0) || alpha >= 1 || !(beta > 0) || beta >= 1)
    throw std::invalid_argument("alpha and beta must lie in (0, 1)");
  check_privacy({eps, delta}, /*require_delta=*/true);
  if (validate_sample) {
    const double bound = (1024.0 / (alpha * eps)) *
                         std::log(2048.0 / (alpha * beta * eps * delta));
    if (static_cast<double>(s.size()) < gamma_c * bound)
      throw std::invalid_argument(
          "database smaller than the scaled minimum sample size");
  }
  SanState state(s.bits());
  state.calls = static_cast<std::uint64_t>(std::ceil(77.0 / alpha));
  state.sorted = s.values();
  std::sort(state.sorted.begin(), state.sorted.end());
  san_thresholds(s, 0, domain_size(s.bits()) - 1, alpha, beta, eps, delta,
                 state, rng);
  WeightedDatabase out = state.output;
  if (out_state) *out_state = std::move(state);
  return out;
}

// Proper database for threshold queries by quantile matching: entry i is
// the smallest point whose cumulative weight reaches (i + 0.5)/n of the
// total. Exact inputs reproduce their source multiset.
inline Database fit_proper_db(const WeightedDatabase& w, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("target size must be positive");
  if (w.bits() > 16)
    throw ResourceError("quantile fitting limited to 16-bit domains");
  Database out(w.bits());
  if (!(w.total_weight() > 0)) {
    for (std::uint64_t i = 0; i < n; ++i) out.add(0);
    return out;
  }
  auto it = w.weights().begin();
  double cum = it->second;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double target =
        (static_cast<double>(i) + 0.5) / static_cast<double>(n) *
        w.total_weight();
    while (cum < target && std::next(it) != w.weights().end()) {
      ++it;
      cum += it->second;
    }
    out.add(it->first);
  }
  return out;
}

// Proper database for point queries by largest-remainder rounding of the
// normalized masses. Never fails: an all-zero estimate degenerates to n
// copies of the origin.
inline Database fit_proper_db(const Estimate& est, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("target size must be positive");
  double total = 0.0;
  for (const auto& [p, v] : est.values()) total += v;
  Database out(est.bits());
  if (!(total > 0)) {
    for (std::uint64_t i = 0; i < n; ++i) out.add(0);
    return out;
  }
  struct Share {
    std::uint64_t point;
    std::uint64_t base;
    double remainder;
  };
  std::vector<Share> shares;
  std::uint64_t assigned = 0;
  for (const auto& [p, v] : est.values()) {
    if (v <= 0) continue;
    const double ideal = v / total * static_cast<double>(n);
    const auto base = static_cast<std::uint64_t>(std::floor(ideal));
    shares.push_back({p, base, ideal - static_cast<double>(base)});
    assigned += base;
  }
  std::stable_sort(shares.begin(), shares.end(),
                   [](const Share& a, const Share& b) {
                     if (a.remainder != b.remainder)
                       return a.remainder > b.remainder;
                     return a.point < b.point;
                   });
  for (std::size_t i = 0; i < shares.size() && assigned < n; ++i) {
    ++shares[i].base;
    ++assigned;
  }
  std::sort(shares.begin(), shares.end(),
            [](const Share& a, const Share& b) { return a.point < b.point; });
  for (const auto& sh : shares)
    for (std::uint64_t i = 0; i < sh.base; ++i) out.add(sh.point);
  // Rounding can in rare cases leave the database short; pad with the
  // smallest supported point.
  while (out.size() < n) out.add(shares.front().point);
  return out;
}

// Greedy proper fitting for small domains and enumerable classes: add the
// point that most reduces the squared deviation from the target answers,
// and fail if the finished database is not alpha-close.
inline Database fit_proper_greedy(
    const std::function<double(const Concept&)>& target,
    const ConceptClass& cc, std::uint64_t n, double alpha) {
  if (n == 0) throw std::invalid_argument("target size must be positive");
  if (cc.d > 8)
    throw ResourceError("greedy fitting limited to 8-bit domains");
  const auto concepts = enumerate_class(cc);
  const std::uint64_t dom = domain_size(cc.d);
  std::vector<double> want(concepts.size());
  for (std::size_t ci = 0; ci < concepts.size(); ++ci)
    want[ci] = target(concepts[ci]) * static_cast<double>(n);
  std::vector<std::uint64_t> have(concepts.size(), 0);
  Database out(cc.d);
  for (std::uint64_t step = 0; step < n; ++step) {
    std::uint64_t best_x = 0;
    double best_obj = 1e300;
    for (std::uint64_t x = 0; x < dom; ++x) {
      double obj = 0.0;
      for (std::size_t ci = 0; ci < concepts.size(); ++ci) {
        const double h = static_cast<double>(have[ci]) +
                         (concepts[ci].evaluate(x, cc.d) ? 1.0 : 0.0);
        obj += (want[ci] - h) * (want[ci] - h);
      }
      if (obj < best_obj) {
        best_obj = obj;
        best_x = x;
      }
    }
    out.add(best_x);
    for (std::size_t ci = 0; ci < concepts.size(); ++ci)
      have[ci] += concepts[ci].evaluate(best_x, cc.d) ? 1 : 0;
  }
  for (std::size_t ci = 0; ci < concepts.size(); ++ci) {
    const double err = std::abs(want[ci] - static_cast<double>(have[ci])) /
                       static_cast<double>(n);
    if (err > alpha)
      throw ResourceError("no database within the accuracy budget");
  }
  return out;
}

}  // namespace dp
