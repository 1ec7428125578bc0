#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dp/rng.hpp"

namespace dp {

// Domains are {0,1}^d read as integers in [0, 2^d - 1]; d is capped so that
// every point fits a machine word with room for a label bit.
inline constexpr int kMaxBits = 62;

// Sentinel inside a point concept marking the member that evaluates to 0
// everywhere (the point class is augmented with it so that a learner falling
// back to "no point" can stay inside the class).
inline constexpr std::uint64_t kZeroConceptValue = ~0ULL;

// A computation whose exact/enumerative path exceeds its configured budget.
class ResourceError : public std::runtime_error {
 public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-facing configuration (CLI flags, config files, parameter ranges
// that a caller chose rather than the library deriving them).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline void check_bits(int bits) {
  if (bits < 1 || bits > kMaxBits)
    throw std::invalid_argument("bit width must be in [1, " +
                                std::to_string(kMaxBits) + "], got " +
                                std::to_string(bits));
}

inline std::uint64_t domain_size(int bits) {
  check_bits(bits);
  return std::uint64_t{1} << bits;
}

inline void check_value(std::uint64_t value, int bits) {
  if (value >= domain_size(bits))
    throw std::invalid_argument("value " + std::to_string(value) +
                                " out of range for d=" + std::to_string(bits));
}

struct DomainPoint {
  std::uint64_t value = 0;
  int bits = 1;
};

// Ordered sequence of unlabeled points over a fixed bit width. Databases are
// positional: two databases are neighbors when they have equal length and
// differ in exactly one position.
class Database {
 public:
  explicit Database(int bits) : bits_(bits) { check_bits(bits); }
  Database(int bits, std::vector<std::uint64_t> values)
      : bits_(bits), values_(std::move(values)) {
    check_bits(bits);
    for (std::uint64_t v : values_) check_value(v, bits_);
  }

  int bits() const { return bits_; }
  std::size_t size() const { return values_.size(); }
  std::uint64_t value(std::size_t i) const { return values_.at(i); }
  const std::vector<std::uint64_t>& values() const { return values_; }

  void add(std::uint64_t value) {
    check_value(value, bits_);
    values_.push_back(value);
  }

  // Neighbor of this database differing only at position i.
  Database with_replaced(std::size_t i, std::uint64_t value) const {
    Database out = *this;
    check_value(value, bits_);
    out.values_.at(i) = value;
    return out;
  }

 private:
  int bits_;
  std::vector<std::uint64_t> values_;
};

struct LabeledEntry {
  std::uint64_t x = 0;
  int y = 0;
};

// Ordered sequence of labeled points (x, y) with y in {0,1}.
class LabeledSample {
 public:
  explicit LabeledSample(int bits) : bits_(bits) { check_bits(bits); }

  int bits() const { return bits_; }
  std::size_t size() const { return entries_.size(); }
  const LabeledEntry& entry(std::size_t i) const { return entries_.at(i); }
  const std::vector<LabeledEntry>& entries() const { return entries_; }

  void add(std::uint64_t x, int y) {
    check_value(x, bits_);
    if (y != 0 && y != 1)
      throw std::invalid_argument("label must be 0 or 1, got " +
                                  std::to_string(y));
    entries_.push_back({x, y});
  }

  LabeledSample with_replaced(std::size_t i, std::uint64_t x, int y) const {
    LabeledSample out = *this;
    out.entries_.at(i) = {0, 0};
    check_value(x, bits_);
    if (y != 0 && y != 1) throw std::invalid_argument("label must be 0 or 1");
    out.entries_.at(i) = {x, y};
    return out;
  }

  LabeledSample with_label_flipped(std::size_t i) const {
    LabeledSample out = *this;
    out.entries_.at(i).y ^= 1;
    return out;
  }

  Database points() const {
    Database out(bits_);
    for (const auto& e : entries_) out.add(e.x);
    return out;
  }

  // View over d+1 bits with the label packed as the low bit: (x << 1) | y.
  Database label_database() const {
    Database out(bits_ + 1);
    for (const auto& e : entries_)
      out.add((e.x << 1) | static_cast<std::uint64_t>(e.y));
    return out;
  }

 private:
  int bits_;
  std::vector<LabeledEntry> entries_;
};

// Multi-axis points pack one d-bit coordinate per axis, axis 0 in the low
// bits.
inline std::uint64_t pack_axes(const std::vector<std::uint64_t>& coords,
                               int bits_per_axis) {
  check_bits(bits_per_axis);
  if (coords.empty()) throw std::invalid_argument("no axes to pack");
  if (static_cast<int>(coords.size()) * bits_per_axis > kMaxBits)
    throw std::invalid_argument("packed point exceeds machine word");
  std::uint64_t out = 0;
  for (std::size_t a = 0; a < coords.size(); ++a) {
    check_value(coords[a], bits_per_axis);
    out |= coords[a] << (a * bits_per_axis);
  }
  return out;
}

inline std::uint64_t unpack_axis(std::uint64_t value, std::size_t axis,
                                 int bits_per_axis) {
  return (value >> (axis * bits_per_axis)) &
         (domain_size(bits_per_axis) - 1);
}

enum class ConceptKind { kPoint, kThreshold, kPointSet, kRectangle };

// A {0,1}-valued predicate over a packed domain. Labeled concepts evaluate on
// (d+1)-bit points and return 1 exactly where the base concept disagrees with
// the packed label, so their counting query equals the base empirical error.
class Concept {
 public:
  static Concept point(std::uint64_t j, int bits) {
    if (j != kZeroConceptValue) check_value(j, bits);
    Concept c(ConceptKind::kPoint, bits, 1);
    c.value_ = j;
    return c;
  }

  static Concept zero_point(int bits) {
    return point(kZeroConceptValue, bits);
  }

  static Concept threshold(std::uint64_t t, int bits) {
    if (t > domain_size(bits))
      throw std::invalid_argument("threshold out of [0, 2^d]");
    Concept c(ConceptKind::kThreshold, bits, 1);
    c.value_ = t;
    return c;
  }

  static Concept point_set(std::vector<std::uint64_t> set, int bits) {
    for (std::uint64_t v : set) check_value(v, bits);
    std::sort(set.begin(), set.end());
    if (std::adjacent_find(set.begin(), set.end()) != set.end())
      throw std::invalid_argument("point set has repeated elements");
    Concept c(ConceptKind::kPointSet, bits, 1);
    c.set_ = std::move(set);
    return c;
  }

  // Axis-parallel box; any axis with lo > hi normalizes the whole concept to
  // the canonical empty box (lo=1, hi=0 on every axis).
  static Concept rectangle(std::vector<std::uint64_t> lo,
                           std::vector<std::uint64_t> hi, int bits_per_axis) {
    if (lo.empty() || lo.size() != hi.size())
      throw std::invalid_argument("rectangle needs matching nonempty bounds");
    if (static_cast<int>(lo.size()) * bits_per_axis > kMaxBits)
      throw std::invalid_argument("rectangle domain exceeds machine word");
    bool empty = false;
    for (std::size_t a = 0; a < lo.size(); ++a) {
      check_value(lo[a], bits_per_axis);
      check_value(hi[a], bits_per_axis);
      if (lo[a] > hi[a]) empty = true;
    }
    if (empty) {
      std::fill(lo.begin(), lo.end(), 1);
      std::fill(hi.begin(), hi.end(), 0);
    }
    Concept c(ConceptKind::kRectangle, bits_per_axis,
              static_cast<int>(lo.size()));
    c.lo_ = std::move(lo);
    c.hi_ = std::move(hi);
    return c;
  }

  static Concept labeled(Concept base) {
    if (base.labeled_) throw std::invalid_argument("concept already labeled");
    base.labeled_ = true;
    return base;
  }

  ConceptKind kind() const { return kind_; }
  bool is_labeled() const { return labeled_; }
  int axes() const { return axes_; }
  int axis_bits() const { return bits_; }
  int domain_bits() const { return bits_ * axes_ + (labeled_ ? 1 : 0); }
  std::uint64_t index() const { return value_; }
  bool is_zero_point() const {
    return kind_ == ConceptKind::kPoint && value_ == kZeroConceptValue;
  }
  const std::vector<std::uint64_t>& set() const { return set_; }
  const std::vector<std::uint64_t>& lo() const { return lo_; }
  const std::vector<std::uint64_t>& hi() const { return hi_; }
  Concept base() const {
    if (!labeled_) throw std::invalid_argument("concept is not labeled");
    Concept c = *this;
    c.labeled_ = false;
    return c;
  }

  int evaluate(std::uint64_t value, int bits) const {
    if (bits != domain_bits())
      throw std::invalid_argument(
          "bit width mismatch: concept expects d=" +
          std::to_string(domain_bits()) + ", point has d=" +
          std::to_string(bits));
    check_value(value, bits);
    if (labeled_) {
      const int y = static_cast<int>(value & 1);
      return base_evaluate(value >> 1) == y ? 0 : 1;
    }
    return base_evaluate(value);
  }

  int evaluate(const DomainPoint& p) const { return evaluate(p.value, p.bits); }

  std::string to_string() const {
    std::string body;
    switch (kind_) {
      case ConceptKind::kPoint:
        body = is_zero_point() ? "point:none"
                               : "point:" + std::to_string(value_);
        break;
      case ConceptKind::kThreshold:
        body = "thresh:" + std::to_string(value_);
        break;
      case ConceptKind::kPointSet: {
        body = "kpoint:";
        for (std::size_t i = 0; i < set_.size(); ++i) {
          if (i) body += '+';
          body += std::to_string(set_[i]);
        }
        break;
      }
      case ConceptKind::kRectangle: {
        body = "rect:";
        for (std::size_t a = 0; a < lo_.size(); ++a) {
          if (a) body += 'x';
          body += std::to_string(lo_[a]) + "-" + std::to_string(hi_[a]);
        }
        break;
      }
    }
    if (labeled_) body = "label(" + body + ")";
    return body;
  }

  friend bool operator==(const Concept& a, const Concept& b) {
    return a.kind_ == b.kind_ && a.bits_ == b.bits_ && a.axes_ == b.axes_ &&
           a.labeled_ == b.labeled_ && a.value_ == b.value_ &&
           a.set_ == b.set_ && a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }
  friend bool operator!=(const Concept& a, const Concept& b) {
    return !(a == b);
  }

 private:
  Concept(ConceptKind kind, int bits, int axes)
      : kind_(kind), bits_(bits), axes_(axes) {
    check_bits(bits);
  }

  int base_evaluate(std::uint64_t x) const {
    switch (kind_) {
      case ConceptKind::kPoint:
        return (!is_zero_point() && x == value_) ? 1 : 0;
      case ConceptKind::kThreshold:
        return x < value_ ? 1 : 0;
      case ConceptKind::kPointSet:
        return std::binary_search(set_.begin(), set_.end(), x) ? 1 : 0;
      case ConceptKind::kRectangle: {
        for (std::size_t a = 0; a < lo_.size(); ++a) {
          const std::uint64_t coord =
              unpack_axis(x, a, bits_);
          if (coord < lo_[a] || coord > hi_[a]) return 0;
        }
        return 1;
      }
    }
    return 0;
  }

  ConceptKind kind_;
  int bits_;
  int axes_;
  bool labeled_ = false;
  std::uint64_t value_ = 0;
  std::vector<std::uint64_t> set_;
  std::vector<std::uint64_t> lo_, hi_;
};

// Fraction of database entries the concept maps to 1.
inline double counting_query(const Concept& c, const Database& db) {
  if (db.size() == 0)
    throw std::invalid_argument("counting query over empty database");
  std::size_t hits = 0;
  for (std::uint64_t v : db.values()) hits += c.evaluate(v, db.bits());
  return static_cast<double>(hits) / static_cast<double>(db.size());
}

// Fraction of labeled entries where the hypothesis disagrees with the label.
inline double empirical_error(const Concept& h, const LabeledSample& s) {
  if (s.size() == 0)
    throw std::invalid_argument("empirical error over empty sample");
  std::size_t bad = 0;
  for (const auto& e : s.entries()) bad += h.evaluate(e.x, s.bits()) != e.y;
  return static_cast<double>(bad) / static_cast<double>(s.size());
}

// Probability distribution with finite explicit support over [0, 2^d - 1].
class FiniteDistribution {
 public:
  FiniteDistribution(int bits,
                     std::vector<std::pair<std::uint64_t, double>> masses,
                     bool renormalize = false)
      : bits_(bits) {
    check_bits(bits);
    std::sort(masses.begin(), masses.end());
    double total = 0;
    for (const auto& [x, p] : masses) {
      check_value(x, bits_);
      if (p < 0) throw std::invalid_argument("negative probability mass");
      total += p;
    }
    for (std::size_t i = 1; i < masses.size(); ++i)
      if (masses[i].first == masses[i - 1].first)
        throw std::invalid_argument("repeated support point");
    if (total <= 0) throw std::invalid_argument("distribution has no mass");
    if (!renormalize && std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("masses sum to " + std::to_string(total) +
                                  ", not 1");
    support_.reserve(masses.size());
    mass_.reserve(masses.size());
    cdf_.reserve(masses.size());
    double acc = 0;
    for (const auto& [x, p] : masses) {
      if (p == 0) continue;
      acc += p / total;
      support_.push_back(x);
      mass_.push_back(p / total);
      cdf_.push_back(acc);
    }
    cdf_.back() = 1.0;
  }

  static FiniteDistribution uniform(int bits) {
    check_bits(bits);
    if (bits > 20)
      throw ResourceError("uniform distribution support 2^" +
                          std::to_string(bits) + " exceeds explicit budget");
    const std::uint64_t n = domain_size(bits);
    std::vector<std::pair<std::uint64_t, double>> masses;
    masses.reserve(n);
    for (std::uint64_t x = 0; x < n; ++x)
      masses.emplace_back(x, 1.0 / static_cast<double>(n));
    return FiniteDistribution(bits, std::move(masses), true);
  }

  int bits() const { return bits_; }
  const std::vector<std::uint64_t>& support() const { return support_; }
  const std::vector<double>& masses() const { return mass_; }

  double mass_of(std::uint64_t x) const {
    auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it == support_.end() || *it != x) return 0.0;
    return mass_[static_cast<std::size_t>(it - support_.begin())];
  }

  std::uint64_t sample(RandomnessSource& rng) const {
    const double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return support_[static_cast<std::size_t>(it - cdf_.begin())];
  }

 private:
  int bits_;
  std::vector<std::uint64_t> support_;
  std::vector<double> mass_;
  std::vector<double> cdf_;
};

// Exact disagreement mass between hypothesis and target under an explicit
// distribution.
inline double generalization_error(const Concept& h, const Concept& target,
                                   const FiniteDistribution& dist) {
  double err = 0;
  for (std::size_t i = 0; i < dist.support().size(); ++i) {
    const std::uint64_t x = dist.support()[i];
    if (h.evaluate(x, dist.bits()) != target.evaluate(x, dist.bits()))
      err += dist.masses()[i];
  }
  return err;
}

enum class ClassKind { kPoint, kThreshold, kPointSet, kRectangle };

// Descriptor of a concept class; `labeled` lifts every member c to the
// predicate (x, y) -> [c(x) != y] over the d+1-bit packed domain.
struct ConceptClass {
  ClassKind kind = ClassKind::kPoint;
  int d = 1;
  int axes = 1;
  int k = 1;
  bool labeled = false;
};

inline ConceptClass label_lift(ConceptClass c) {
  if (c.labeled) throw std::invalid_argument("class already labeled");
  c.labeled = true;
  return c;
}

inline Concept lift_concept(const Concept& c) { return Concept::labeled(c); }

namespace detail {
inline double binomial(double n, int k) {
  double out = 1;
  for (int i = 0; i < k; ++i) out *= (n - i) / (i + 1);
  return out;
}
}  // namespace detail

// Number of concepts enumerate_class would produce, as a double so that
// astronomically large classes still compare against budgets.
inline double class_size(const ConceptClass& cc) {
  check_bits(cc.d);
  const double n = std::ldexp(1.0, cc.d);
  switch (cc.kind) {
    case ClassKind::kPoint:
      return n + 1;  // every singleton plus the all-zero member
    case ClassKind::kThreshold:
      return n + 1;
    case ClassKind::kPointSet:
      if (cc.k < 1 || std::ldexp(1.0, cc.d) < cc.k)
        throw std::invalid_argument("point-set size k out of range");
      return detail::binomial(n, cc.k);
    case ClassKind::kRectangle: {
      if (cc.axes < 1 || cc.axes * cc.d > kMaxBits)
        throw std::invalid_argument("rectangle axes out of range");
      const double per_axis = n * (n + 1) / 2;
      return std::pow(per_axis, cc.axes) + 1;  // boxes plus the empty box
    }
  }
  return 0;
}

inline int vc_dimension(const ConceptClass& cc) {
  if (cc.labeled)
    throw std::invalid_argument(
        "labeled classes only have VC bounds, use vc_bounds");
  check_bits(cc.d);
  switch (cc.kind) {
    case ClassKind::kPoint:
      return 1;
    case ClassKind::kThreshold:
      return 1;
    case ClassKind::kPointSet: {
      const double n = std::ldexp(1.0, cc.d);
      const double vc = std::min<double>(cc.k, n - cc.k);
      return static_cast<int>(std::max(0.0, vc));
    }
    case ClassKind::kRectangle:
      // On a one-bit grid the box family collapses to subcube-like sets;
      // the exhaustive checker in the test suite covers those cases.
      if (cc.d == 1) return cc.axes <= 2 ? 2 : cc.axes;
      return 2 * cc.axes;
  }
  return 0;
}

// [lower, upper] VC bounds; exact (equal ends) except for labeled lifts.
inline std::pair<int, int> vc_bounds(const ConceptClass& cc) {
  if (!cc.labeled) {
    const int v = vc_dimension(cc);
    return {v, v};
  }
  ConceptClass base = cc;
  base.labeled = false;
  const int v = vc_dimension(base);
  return {v, 2 * v};
}

// Sample size that makes empirical error track generalization error in the
// consistent-hypothesis regime.
inline std::uint64_t realizable_sample_bound(int vc, double alpha,
                                             double beta) {
  if (vc < 1 || alpha <= 0 || alpha >= 1 || beta <= 0 || beta >= 1)
    throw std::invalid_argument("bad sample-bound parameters");
  return static_cast<std::uint64_t>(std::ceil(
      (8.0 / alpha) * (vc * std::log(16.0 / alpha) + std::log(2.0 / beta))));
}

// Sample size for uniform convergence without the consistency assumption.
inline std::uint64_t agnostic_sample_bound(int vc, double alpha, double beta) {
  if (vc < 1 || alpha <= 0 || alpha >= 1 || beta <= 0 || beta >= 1)
    throw std::invalid_argument("bad sample-bound parameters");
  return static_cast<std::uint64_t>(std::ceil(
      (50.0 * vc / (alpha * alpha)) * std::log(1.0 / (alpha * beta))));
}

// All members of the class in canonical order. Constant-0 members come last
// so that indices of "real" members match their natural encodings.
inline std::vector<Concept> enumerate_class(const ConceptClass& cc,
                                            double budget = 1 << 20) {
  if (class_size(cc) > budget)
    throw ResourceError("class size " + std::to_string(class_size(cc)) +
                        " exceeds enumeration budget " +
                        std::to_string(budget));
  std::vector<Concept> out;
  const std::uint64_t n = domain_size(cc.d);
  switch (cc.kind) {
    case ClassKind::kPoint: {
      for (std::uint64_t j = 0; j < n; ++j)
        out.push_back(Concept::point(j, cc.d));
      out.push_back(Concept::zero_point(cc.d));
      break;
    }
    case ClassKind::kThreshold: {
      for (std::uint64_t t = 0; t <= n; ++t)
        out.push_back(Concept::threshold(t, cc.d));
      break;
    }
    case ClassKind::kPointSet: {
      std::vector<std::uint64_t> pick(cc.k);
      for (int i = 0; i < cc.k; ++i) pick[i] = i;
      for (;;) {
        out.push_back(Concept::point_set(pick, cc.d));
        int i = cc.k - 1;
        while (i >= 0 && pick[i] == n - cc.k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < cc.k; ++j) pick[j] = pick[j - 1] + 1;
      }
      break;
    }
    case ClassKind::kRectangle: {
      // Lexicographic walk over per-axis (lo, hi) interval pairs.
      const std::uint64_t pairs = n * (n + 1) / 2;
      std::vector<std::pair<std::uint64_t, std::uint64_t>> axis_pairs;
      axis_pairs.reserve(pairs);
      for (std::uint64_t lo = 0; lo < n; ++lo)
        for (std::uint64_t hi = lo; hi < n; ++hi)
          axis_pairs.emplace_back(lo, hi);
      std::vector<std::size_t> idx(cc.axes, 0);
      for (;;) {
        std::vector<std::uint64_t> lo(cc.axes), hi(cc.axes);
        for (int a = 0; a < cc.axes; ++a) {
          lo[a] = axis_pairs[idx[a]].first;
          hi[a] = axis_pairs[idx[a]].second;
        }
        out.push_back(Concept::rectangle(lo, hi, cc.d));
        int a = cc.axes - 1;
        while (a >= 0 && idx[a] + 1 == axis_pairs.size()) idx[a--] = 0;
        if (a < 0) break;
        ++idx[a];
      }
      out.push_back(Concept::rectangle(std::vector<std::uint64_t>(cc.axes, 1),
                                       std::vector<std::uint64_t>(cc.axes, 0),
                                       cc.d));
      break;
    }
  }
  if (cc.labeled)
    for (auto& c : out) c = Concept::labeled(c);
  return out;
}

// One entry of a projected class: the labeling pattern the class realizes on
// the probe points, plus the first member (in enumeration order) realizing it.
struct Dichotomy {
  std::string pattern;
  Concept representative;
};

namespace detail {
inline std::string pattern_of(const Concept& c,
                              const std::vector<std::uint64_t>& probes,
                              int bits) {
  std::string p(probes.size(), '0');
  for (std::size_t i = 0; i < probes.size(); ++i)
    if (c.evaluate(probes[i], bits)) p[i] = '1';
  return p;
}
}  // namespace detail

// Distinct labelings the class induces on `probes`, each with its canonical
// representative. Point and threshold classes have closed-form projections,
// so they avoid full enumeration; other kinds enumerate within the budget.
inline std::vector<Dichotomy> project_class(
    const ConceptClass& cc, const std::vector<std::uint64_t>& probes,
    double budget = 1 << 20) {
  if (cc.labeled)
    throw std::invalid_argument("projection is defined for unlabeled classes");
  for (std::uint64_t p : probes) check_value(p, cc.d * cc.axes);
  std::vector<Dichotomy> out;
  std::vector<std::string> seen;
  auto add = [&](const Concept& c) {
    std::string pat = detail::pattern_of(c, probes, cc.d * cc.axes);
    if (std::find(seen.begin(), seen.end(), pat) == seen.end()) {
      seen.push_back(pat);
      out.push_back({pat, c});
    }
  };
  const std::uint64_t n = domain_size(cc.d);
  if (cc.kind == ClassKind::kPoint) {
    // Walk in enumeration order but only over points that can matter: the
    // smallest non-probe point realizes the all-zero pattern first.
    std::vector<std::uint64_t> sorted(probes.begin(), probes.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::uint64_t first_free = 0;
    while (first_free < n &&
           std::binary_search(sorted.begin(), sorted.end(), first_free))
      ++first_free;
    std::vector<std::uint64_t> candidates = sorted;
    if (first_free < n) candidates.push_back(first_free);
    std::sort(candidates.begin(), candidates.end());
    for (std::uint64_t j : candidates) add(Concept::point(j, cc.d));
    if (first_free >= n) add(Concept::zero_point(cc.d));
    return out;
  }
  if (cc.kind == ClassKind::kThreshold) {
    // The pattern only changes as t crosses a probe value.
    std::vector<std::uint64_t> cuts(1, 0);
    std::vector<std::uint64_t> sorted(probes.begin(), probes.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (std::uint64_t b : sorted) cuts.push_back(b + 1);
    for (std::uint64_t t : cuts) add(Concept::threshold(t, cc.d));
    return out;
  }
  for (const Concept& c : enumerate_class(cc, budget)) add(c);
  return out;
}

// ---- Database files -------------------------------------------------------
// Text format: header "d=<bits>" or "d=<bits>,labeled", then one decimal
// point per line ("point" or "point,label").

namespace detail {
inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::uint64_t parse_u64(const std::string& s, int line_no) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("database file line " + std::to_string(line_no) +
                      ": bad integer '" + s + "'");
  }
}

struct DbHeader {
  int bits = 0;
  bool labeled = false;
};

inline DbHeader parse_db_header(const std::string& line, int line_no) {
  const std::string t = trim(line);
  if (t.rfind("d=", 0) != 0)
    throw ConfigError("database file line " + std::to_string(line_no) +
                      ": expected 'd=<bits>' header");
  std::string rest = t.substr(2);
  DbHeader h;
  const std::size_t comma = rest.find(',');
  if (comma != std::string::npos) {
    if (trim(rest.substr(comma + 1)) != "labeled")
      throw ConfigError("database file line " + std::to_string(line_no) +
                        ": bad header suffix");
    h.labeled = true;
    rest = rest.substr(0, comma);
  }
  h.bits = static_cast<int>(parse_u64(trim(rest), line_no));
  check_bits(h.bits);
  return h;
}
}  // namespace detail

inline void save_database(const std::string& path, const Database& db) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << "d=" << db.bits() << "\n";
  for (std::uint64_t v : db.values()) out << v << "\n";
}

inline void save_sample(const std::string& path, const LabeledSample& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  out << "d=" << s.bits() << ",labeled\n";
  for (const auto& e : s.entries()) out << e.x << "," << e.y << "\n";
}

inline Database load_database(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line))
    throw ConfigError("database file " + path + " is empty");
  const auto header = detail::parse_db_header(line, line_no);
  if (header.labeled)
    throw ConfigError(path + " holds a labeled sample, not a plain database");
  Database db(header.bits);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const std::uint64_t v = detail::parse_u64(t, line_no);
    check_value(v, header.bits);
    db.add(v);
  }
  return db;
}

inline LabeledSample load_sample(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line))
    throw ConfigError("database file " + path + " is empty");
  const auto header = detail::parse_db_header(line, line_no);
  if (!header.labeled)
    throw ConfigError(path + " holds a plain database, not a labeled sample");
  LabeledSample s(header.bits);
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const std::size_t comma = t.find(',');
    if (comma == std::string::npos)
      throw ConfigError("database file line " + std::to_string(line_no) +
                        ": labeled entry needs 'point,label'");
    const std::uint64_t x =
        detail::parse_u64(detail::trim(t.substr(0, comma)), line_no);
    const std::uint64_t y =
        detail::parse_u64(detail::trim(t.substr(comma + 1)), line_no);
    if (y > 1)
      throw ConfigError("database file line " + std::to_string(line_no) +
                        ": label must be 0 or 1");
    s.add(x, static_cast<int>(y));
  }
  return s;
}

}  // namespace dp
