#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "dp/choosing.hpp"
#include "dp/domain.hpp"
#include "dp/learners.hpp"
#include "dp/privacy.hpp"
#include "dp/rec_concave.hpp"
#include "dp/reductions.hpp"
#include "dp/rng.hpp"
#include "dp/sanitizers.hpp"

namespace dp {

// ---- Spec string parsing ---------------------------------------------------

namespace detail {

inline std::vector<std::string> split_spec(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

inline double parse_spec_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a number, got '" + s + "'");
  }
  if (pos != s.size() || s.empty())
    throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

inline std::uint64_t parse_spec_u64(const std::string& s) {
  if (s.empty() || s[0] == '-')
    throw std::invalid_argument("expected a non-negative integer, got '" + s +
                                "'");
  std::size_t pos = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("expected a non-negative integer, got '" + s +
                                "'");
  }
  if (pos != s.size())
    throw std::invalid_argument("expected a non-negative integer, got '" + s +
                                "'");
  return v;
}

// "key=value" -> pair; anything else throws.
inline std::pair<std::string, std::string> parse_kv(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("expected key=value, got '" + s + "'");
  return {s.substr(0, eq), s.substr(eq + 1)};
}

// Shortest decimal form that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace detail

// ---- Synthetic distributions ----------------------------------------------

// Distribution grammar over a d-bit domain:
//   "uniform"                     every point weight 1/2^d
//   "mix:3=0.25,9=0.25,rest=0.5"  explicit point masses, with an optional
//                                 "rest" mass spread evenly over every
//                                 unlisted point; weights are renormalized
//   "adv:alpha=0.1,points=3+9"    mass 1-5*alpha at point 0 and 5*alpha/k
//                                 on each of the k listed points
//   "geometric:ratio=0.5"         mass proportional to ratio^x
// Malformed specs throw std::invalid_argument; variants that must enumerate
// the whole domain require d <= 20 and throw ResourceError beyond that.
inline FiniteDistribution gen_distribution(const std::string& spec, int bits) {
  check_bits(bits);
  const auto colon = spec.find(':');
  const std::string head =
      colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string body =
      colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (head == "uniform") {
    if (!body.empty())
      throw std::invalid_argument("uniform takes no parameters");
    return FiniteDistribution::uniform(bits);
  }

  if (head == "mix") {
    const auto parts = detail::split_spec(body, ',');
    if (parts.empty()) throw std::invalid_argument("empty mixture spec");
    std::map<std::uint64_t, double> listed;
    double rest = -1.0;
    for (const auto& part : parts) {
      const auto [key, value] = detail::parse_kv(part);
      const double w = detail::parse_spec_double(value);
      if (w < 0) throw std::invalid_argument("negative mixture weight");
      if (key == "rest") {
        if (rest >= 0) throw std::invalid_argument("duplicate rest weight");
        rest = w;
        continue;
      }
      const std::uint64_t x = detail::parse_spec_u64(key);
      check_value(x, bits);
      if (!listed.emplace(x, w).second)
        throw std::invalid_argument("duplicate mixture point");
    }
    std::vector<std::pair<std::uint64_t, double>> masses(listed.begin(),
                                                         listed.end());
    if (rest > 0) {
      if (bits > 20)
        throw ResourceError(
            "a rest mass enumerates the whole domain; needs d <= 20");
      const std::uint64_t n = domain_size(bits);
      if (listed.size() >= n)
        throw std::invalid_argument("no unlisted points left for rest mass");
      const double each =
          rest / static_cast<double>(n - listed.size());
      for (std::uint64_t x = 0; x < n; ++x)
        if (!listed.count(x)) masses.emplace_back(x, each);
    }
    return FiniteDistribution(bits, std::move(masses), /*renormalize=*/true);
  }

  if (head == "adv") {
    double alpha = -1.0;
    std::vector<std::uint64_t> points;
    for (const auto& part : detail::split_spec(body, ',')) {
      const auto [key, value] = detail::parse_kv(part);
      if (key == "alpha") {
        alpha = detail::parse_spec_double(value);
      } else if (key == "points") {
        for (const auto& p : detail::split_spec(value, '+'))
          points.push_back(detail::parse_spec_u64(p));
      } else {
        throw std::invalid_argument("unknown adversarial key '" + key + "'");
      }
    }
    if (!(alpha > 0) || points.empty())
      throw std::invalid_argument(
          "adversarial spec needs alpha > 0 and a nonempty point list");
    if (5.0 * alpha > 1.0)
      throw std::invalid_argument("adversarial spec needs 5*alpha <= 1");
    std::vector<std::pair<std::uint64_t, double>> masses;
    masses.emplace_back(0, 1.0 - 5.0 * alpha);
    const double each = 5.0 * alpha / static_cast<double>(points.size());
    for (std::uint64_t p : points) masses.emplace_back(p, each);
    return FiniteDistribution(bits, std::move(masses), /*renormalize=*/false);
  }

  if (head == "geometric") {
    const auto [key, value] = detail::parse_kv(body);
    if (key != "ratio")
      throw std::invalid_argument("geometric spec needs ratio=<r>");
    const double r = detail::parse_spec_double(value);
    if (!(r > 0) || r >= 1)
      throw std::invalid_argument("geometric ratio must lie in (0, 1)");
    if (bits > 20)
      throw ResourceError(
          "a geometric distribution enumerates the whole domain; needs "
          "d <= 20");
    std::vector<std::pair<std::uint64_t, double>> masses;
    double w = 1.0;
    for (std::uint64_t x = 0; x < domain_size(bits); ++x, w *= r)
      masses.emplace_back(x, w);
    return FiniteDistribution(bits, std::move(masses), /*renormalize=*/true);
  }

  throw std::invalid_argument("unknown distribution spec '" + spec + "'");
}

// ---- Sampling --------------------------------------------------------------

inline Database sample_database(const FiniteDistribution& dist,
                                std::uint64_t m, RandomnessSource& rng) {
  if (m == 0) throw std::invalid_argument("need at least one sample");
  Database out(dist.bits());
  for (std::uint64_t i = 0; i < m; ++i) out.add(dist.sample(rng));
  return out;
}

// i.i.d. points from the distribution, labeled by the target concept.
inline LabeledSample sample_labeled(const FiniteDistribution& dist,
                                    const Concept& target, std::uint64_t m,
                                    RandomnessSource& rng) {
  if (m == 0) throw std::invalid_argument("need at least one sample");
  if (target.domain_bits() != dist.bits())
    throw std::invalid_argument("target and distribution widths differ");
  LabeledSample s(dist.bits());
  for (std::uint64_t i = 0; i < m; ++i) {
    const std::uint64_t x = dist.sample(rng);
    s.add(x, target.evaluate(x, dist.bits()));
  }
  return s;
}

// ---- Interval statistics ---------------------------------------------------

// Lower Wilson score bound on a binomial success probability; z defaults to
// the two-sided 95 percent normal quantile.
inline double wilson_lower(std::uint64_t successes, std::uint64_t trials,
                           double z = 1.959963984540054) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  if (successes > trials)
    throw std::invalid_argument("more successes than trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double den = 1.0 + z * z / n;
  const double centre = p + z * z / (2.0 * n);
  const double rad =
      z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
  return std::max(0.0, (centre - rad) / den);
}

// One-sided Clopper-Pearson bounds at level a: the true probability lies
// below cp_upper (above cp_lower) with probability at least 1 - a.
inline double cp_lower(std::uint64_t k, std::uint64_t n, double a) {
  if (n == 0) throw std::invalid_argument("need at least one trial");
  if (k > n) throw std::invalid_argument("count exceeds trials");
  if (!(a > 0) || a >= 1)
    throw std::invalid_argument("level must lie in (0, 1)");
  if (k == 0) return 0.0;
  boost::math::beta_distribution<double> b(static_cast<double>(k),
                                           static_cast<double>(n - k + 1));
  return boost::math::quantile(b, a);
}

inline double cp_upper(std::uint64_t k, std::uint64_t n, double a) {
  if (n == 0) throw std::invalid_argument("need at least one trial");
  if (k > n) throw std::invalid_argument("count exceeds trials");
  if (!(a > 0) || a >= 1)
    throw std::invalid_argument("level must lie in (0, 1)");
  if (k == n) return 1.0;
  boost::math::beta_distribution<double> b(static_cast<double>(k + 1),
                                           static_cast<double>(n - k));
  return boost::math::quantile(b, 1.0 - a);
}

// ---- Query error sweeps ----------------------------------------------------

// Largest error over all 2^d + 1 threshold queries between the source
// database and a sanitized weighted database. Both cumulative fractions are
// step functions, so the maximum is attained at a cut just after a source
// value or a weight point, or at 0.
inline double max_threshold_error(const Database& source,
                                  const WeightedDatabase& w) {
  if (source.bits() != w.bits())
    throw std::invalid_argument("database widths differ");
  if (source.size() == 0) throw std::invalid_argument("empty source");
  if (!(w.total_weight() > 0))
    throw std::invalid_argument("weighted database has no mass");

  std::vector<std::uint64_t> sorted = source.values();
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint64_t> wpoints;
  std::vector<double> wprefix;  // weight strictly before wpoints[i]
  double acc = 0.0;
  for (const auto& [p, wt] : w.weights()) {
    wpoints.push_back(p);
    wprefix.push_back(acc);
    acc += wt;
  }
  const double total = acc;
  const double m = static_cast<double>(sorted.size());

  std::vector<std::uint64_t> cuts;
  cuts.push_back(0);
  for (std::uint64_t v : sorted) cuts.push_back(v + 1);
  for (std::uint64_t p : wpoints) cuts.push_back(p + 1);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double worst = 0.0;
  for (std::uint64_t t : cuts) {
    const auto sc =
        std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    const auto wi =
        std::lower_bound(wpoints.begin(), wpoints.end(), t) - wpoints.begin();
    const double wmass =
        wi == 0 ? 0.0
                : wprefix[static_cast<std::size_t>(wi - 1)] +
                      w.weights().at(wpoints[static_cast<std::size_t>(wi - 1)]);
    worst = std::max(worst, std::abs(static_cast<double>(sc) / m -
                                     wmass / total));
  }
  return worst;
}

// Largest error over all point queries between the source database and a
// released estimate; points the estimate never covered count with their
// full source frequency.
inline double max_point_error(const Database& source, const Estimate& est) {
  if (source.bits() != est.bits())
    throw std::invalid_argument("database widths differ");
  if (source.size() == 0) throw std::invalid_argument("empty source");
  std::map<std::uint64_t, double> freq;
  for (std::uint64_t v : source.values())
    freq[v] += 1.0 / static_cast<double>(source.size());
  std::set<std::uint64_t> points;
  for (const auto& [p, f] : freq) points.insert(p);
  for (const auto& [p, f] : est.values()) points.insert(p);
  double worst = 0.0;
  for (std::uint64_t p : points) {
    const auto it = freq.find(p);
    const double truth = it == freq.end() ? 0.0 : it->second;
    worst = std::max(worst, std::abs(truth - est.point_estimate(p)));
  }
  return worst;
}

// ---- Experiment configuration ----------------------------------------------

// Flat, fully serializable description of one experiment run. The same
// config and seed always produce identical results.
struct ExperimentConfig {
  std::string task = "learn";  // learn | sanitize | reduce | audit | bench
  std::string cls = "point";
  int d = 4;
  int axes = 2;
  std::uint64_t k = 1;
  std::string dist = "uniform";
  std::string target = "random";
  double alpha = 0.1;
  double beta = 0.1;
  double epsilon = 1.0;
  double delta = 0.01;
  std::uint64_t depth = 1;
  double gamma = 0.1;
  double gamma_c = 1.0;
  std::uint64_t m = 100;
  std::uint64_t trials = 10;
  std::uint64_t seed = 0;
  std::string mech = "laplace_count";
  double true_epsilon = 0.0;  // 0 means: behave at the declared epsilon
  bool lift = false;
  bool validate = true;
  double err_cap = -1.0;      // negative: use the task's default cap
  double min_success = -1.0;  // negative: no success-rate gate
  std::string out;
  bool trace = false;
};

// Canonical key order used by both the config file format and the JSON echo.
inline std::vector<std::pair<std::string, std::string>> config_entries(
    const ExperimentConfig& c) {
  using detail::format_double;
  return {
      {"task", c.task},
      {"class", c.cls},
      {"d", std::to_string(c.d)},
      {"axes", std::to_string(c.axes)},
      {"k", std::to_string(c.k)},
      {"dist", c.dist},
      {"target", c.target},
      {"alpha", format_double(c.alpha)},
      {"beta", format_double(c.beta)},
      {"eps", format_double(c.epsilon)},
      {"delta", format_double(c.delta)},
      {"depth", std::to_string(c.depth)},
      {"gamma", format_double(c.gamma)},
      {"gamma_c", format_double(c.gamma_c)},
      {"m", std::to_string(c.m)},
      {"trials", std::to_string(c.trials)},
      {"seed", std::to_string(c.seed)},
      {"mech", c.mech},
      {"true_eps", format_double(c.true_epsilon)},
      {"lift", c.lift ? "1" : "0"},
      {"validate", c.validate ? "1" : "0"},
      {"err_cap", format_double(c.err_cap)},
      {"min_success", format_double(c.min_success)},
      {"out", c.out},
      {"trace", c.trace ? "1" : "0"},
  };
}

inline void apply_config_entry(ExperimentConfig& c, const std::string& key,
                               const std::string& value) {
  try {
    if (key == "task") c.task = value;
    else if (key == "class") c.cls = value;
    else if (key == "d") c.d = static_cast<int>(detail::parse_spec_u64(value));
    else if (key == "axes")
      c.axes = static_cast<int>(detail::parse_spec_u64(value));
    else if (key == "k") c.k = detail::parse_spec_u64(value);
    else if (key == "dist") c.dist = value;
    else if (key == "target") c.target = value;
    else if (key == "alpha") c.alpha = detail::parse_spec_double(value);
    else if (key == "beta") c.beta = detail::parse_spec_double(value);
    else if (key == "eps") c.epsilon = detail::parse_spec_double(value);
    else if (key == "delta") c.delta = detail::parse_spec_double(value);
    else if (key == "depth") c.depth = detail::parse_spec_u64(value);
    else if (key == "gamma") c.gamma = detail::parse_spec_double(value);
    else if (key == "gamma_c") c.gamma_c = detail::parse_spec_double(value);
    else if (key == "m") c.m = detail::parse_spec_u64(value);
    else if (key == "trials") c.trials = detail::parse_spec_u64(value);
    else if (key == "seed") c.seed = detail::parse_spec_u64(value);
    else if (key == "mech") c.mech = value;
    else if (key == "true_eps")
      c.true_epsilon = detail::parse_spec_double(value);
    else if (key == "lift") c.lift = detail::parse_spec_u64(value) != 0;
    else if (key == "validate")
      c.validate = detail::parse_spec_u64(value) != 0;
    else if (key == "err_cap") c.err_cap = detail::parse_spec_double(value);
    else if (key == "min_success")
      c.min_success = detail::parse_spec_double(value);
    else if (key == "out") c.out = value;
    else if (key == "trace") c.trace = detail::parse_spec_u64(value) != 0;
    else
      throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for config key '" + key + "': " + e.what());
  }
}

// Config file format: UTF-8 text, one `key = value` per line, `#` starts a
// comment, blank lines ignored. Unknown keys are rejected.
inline void load_config_file(ExperimentConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    apply_config_entry(c, detail::trim(t.substr(0, eq)),
                       detail::trim(t.substr(eq + 1)));
  }
}

// ---- Trial results ---------------------------------------------------------

// Timing fields stay out of every serialized output: CSV and JSON must be
// byte-identical across reruns of the same config and seed.
struct TrialResult {
  std::uint64_t trial = 0;
  double error = 0.0;  // generalization error or max query error, in [0, 1]
  bool success = false;
  bool bottom = false;
  bool proper = true;
  std::uint64_t census_laplace = 0;
  std::uint64_t census_san = 0;
  double seconds = 0.0;
  std::string trace_text;
};

struct ExperimentSummary {
  std::vector<TrialResult> rows;
  std::uint64_t successes = 0;
  std::uint64_t bottom_count = 0;
  std::uint64_t proper_count = 0;
  double success_rate = 0.0;
  double wilson = 0.0;
  double mean_error = 0.0;
  double max_error = 0.0;
  double seconds = 0.0;
};

namespace detail {

inline ExperimentSummary summarize(std::vector<TrialResult> rows) {
  ExperimentSummary s;
  s.rows = std::move(rows);
  if (s.rows.empty()) throw std::invalid_argument("no trials to summarize");
  for (const auto& r : s.rows) {
    if (!(r.error >= 0.0 && r.error <= 1.0))
      throw std::runtime_error("trial error " + format_double(r.error) +
                               " escaped [0, 1]");
    s.successes += r.success;
    s.bottom_count += r.bottom;
    s.proper_count += r.proper;
    s.mean_error += r.error;
    s.max_error = std::max(s.max_error, r.error);
    s.seconds += r.seconds;
  }
  const double n = static_cast<double>(s.rows.size());
  s.success_rate = static_cast<double>(s.successes) / n;
  s.wilson = wilson_lower(s.successes, s.rows.size());
  s.mean_error /= n;
  return s;
}

enum class TaskFamily {
  kPoint,
  kThreshold,
  kRectangle,
  kGenericPoint,
  kGenericThreshold,
  kLabelPoint,
  kLabelThreshold,
  kKPoint,
  kIdentity,
};

inline TaskFamily parse_family(const std::string& cls,
                               const std::string& task) {
  if (task == "learn") {
    if (cls == "point") return TaskFamily::kPoint;
    if (cls == "thresh") return TaskFamily::kThreshold;
    if (cls == "rect") return TaskFamily::kRectangle;
    if (cls == "generic_point") return TaskFamily::kGenericPoint;
    if (cls == "generic_thresh") return TaskFamily::kGenericThreshold;
    if (cls == "label_point") return TaskFamily::kLabelPoint;
    if (cls == "label_thresh") return TaskFamily::kLabelThreshold;
  } else if (task == "sanitize") {
    if (cls == "point") return TaskFamily::kPoint;
    if (cls == "k_point") return TaskFamily::kKPoint;
    if (cls == "thresh") return TaskFamily::kThreshold;
    if (cls == "identity") return TaskFamily::kIdentity;
  } else if (task == "reduce") {
    if (cls == "point") return TaskFamily::kPoint;
    if (cls == "thresh") return TaskFamily::kThreshold;
  }
  throw ConfigError("class '" + cls + "' is not available for task '" + task +
                    "'");
}

inline ConceptKind base_kind(TaskFamily f) {
  switch (f) {
    case TaskFamily::kThreshold:
    case TaskFamily::kGenericThreshold:
    case TaskFamily::kLabelThreshold:
      return ConceptKind::kThreshold;
    case TaskFamily::kRectangle:
      return ConceptKind::kRectangle;
    default:
      return ConceptKind::kPoint;
  }
}

// Target concept for one trial: an explicit "point:J" / "thresh:T" literal,
// or a fresh random member drawn from the trial stream.
inline Concept make_target(TaskFamily family, const ExperimentConfig& cfg,
                           RandomnessSource& rng) {
  const ConceptKind kind = base_kind(family);
  if (cfg.target != "random") {
    const auto colon = cfg.target.find(':');
    if (colon == std::string::npos)
      throw ConfigError("target must be 'random', 'point:J', or 'thresh:T'");
    const std::string head = cfg.target.substr(0, colon);
    const std::uint64_t v = parse_spec_u64(cfg.target.substr(colon + 1));
    if (head == "point" && kind == ConceptKind::kPoint)
      return Concept::point(v, cfg.d);
    if (head == "thresh" && kind == ConceptKind::kThreshold)
      return Concept::threshold(v, cfg.d);
    throw ConfigError("target '" + cfg.target +
                      "' does not match class '" + cfg.cls + "'");
  }
  switch (kind) {
    case ConceptKind::kPoint:
      return Concept::point(rng.uniform_index(domain_size(cfg.d)), cfg.d);
    case ConceptKind::kThreshold:
      return Concept::threshold(rng.uniform_index(domain_size(cfg.d) + 1),
                                cfg.d);
    case ConceptKind::kRectangle: {
      std::vector<std::uint64_t> lo(static_cast<std::size_t>(cfg.axes));
      std::vector<std::uint64_t> hi(static_cast<std::size_t>(cfg.axes));
      for (int a = 0; a < cfg.axes; ++a) {
        std::uint64_t x = rng.uniform_index(domain_size(cfg.d));
        std::uint64_t y = rng.uniform_index(domain_size(cfg.d));
        if (x > y) std::swap(x, y);
        lo[static_cast<std::size_t>(a)] = x;
        hi[static_cast<std::size_t>(a)] = y;
      }
      return Concept::rectangle(lo, hi, cfg.d);
    }
    default:
      throw ConfigError("no target family for this class");
  }
}

}  // namespace detail

// ---- Experiment runners ----------------------------------------------------

// PAC experiment: per trial, draw a target and an i.i.d. labeled sample,
// run the configured learner, and score the hypothesis by its exact
// generalization error. Success means error <= alpha. Each trial consumes
// a randomness stream split off the master seed by trial index.
inline ExperimentSummary run_pac_experiment(const ExperimentConfig& cfg) {
  const auto family = detail::parse_family(cfg.cls, "learn");
  const int sample_bits =
      family == detail::TaskFamily::kRectangle ? cfg.d * cfg.axes : cfg.d;
  const FiniteDistribution dist = gen_distribution(cfg.dist, sample_bits);
  const ConceptKind expected = detail::base_kind(family);
  RandomnessSource root(cfg.seed);
  std::vector<TrialResult> rows;
  rows.reserve(cfg.trials);
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    RandomnessSource rng = root.split(t);
    const Concept target = detail::make_target(family, cfg, rng);
    const LabeledSample s = sample_labeled(dist, target, cfg.m, rng);
    LearnerParams params;
    params.alpha = cfg.alpha;
    params.beta = cfg.beta;
    params.privacy = {cfg.epsilon, cfg.delta};
    params.recursion_budget = cfg.depth;
    params.gamma_c = cfg.gamma_c;

    const auto t0 = std::chrono::steady_clock::now();
    const LearnerOutput out = [&]() -> LearnerOutput {
      switch (family) {
        case detail::TaskFamily::kPoint:
          return learn_point(s, params, rng);
        case detail::TaskFamily::kThreshold:
          return learn_threshold(s, params, rng);
        case detail::TaskFamily::kRectangle:
          return learn_rectangle(s, cfg.axes, params, rng);
        case detail::TaskFamily::kGenericPoint:
          return learn_generic(
              s, ConceptClass{ClassKind::kPoint, cfg.d, 1, 1, false}, params,
              rng);
        case detail::TaskFamily::kGenericThreshold:
          return learn_generic(
              s, ConceptClass{ClassKind::kThreshold, cfg.d, 1, 1, false},
              params, rng);
        case detail::TaskFamily::kLabelPoint:
        case detail::TaskFamily::kLabelThreshold: {
          std::vector<int> sy;
          sy.reserve(s.size());
          for (const auto& e : s.entries()) sy.push_back(e.y);
          const ClassKind ck = family == detail::TaskFamily::kLabelPoint
                                   ? ClassKind::kPoint
                                   : ClassKind::kThreshold;
          return learn_label_private(s.points(), sy,
                                     ConceptClass{ck, cfg.d, 1, 1, false},
                                     params, rng);
        }
        default:
          throw ConfigError("class '" + cfg.cls + "' is not a learner");
      }
    }();
    const auto t1 = std::chrono::steady_clock::now();

    TrialResult r;
    r.trial = t;
    r.error = generalization_error(out.hypothesis, target, dist);
    r.success = r.error <= cfg.alpha;
    r.bottom = out.bottom;
    r.proper = out.hypothesis.kind() == expected;
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    if (!out.trace.levels.empty()) r.trace_text = out.trace.to_string();
    rows.push_back(std::move(r));
  }
  return detail::summarize(std::move(rows));
}

// Sanitization experiment: per trial, draw a database and sanitize it, then
// sweep the full query class for the worst estimation error. Success means
// the sweep stays within alpha.
inline ExperimentSummary run_san_experiment(const ExperimentConfig& cfg) {
  const auto family = detail::parse_family(cfg.cls, "sanitize");
  const FiniteDistribution dist = gen_distribution(cfg.dist, cfg.d);
  RandomnessSource root(cfg.seed);
  std::vector<TrialResult> rows;
  rows.reserve(cfg.trials);
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    RandomnessSource rng = root.split(t);
    const Database db = sample_database(dist, cfg.m, rng);
    TrialResult r;
    r.trial = t;
    const auto t0 = std::chrono::steady_clock::now();
    switch (family) {
      case detail::TaskFamily::kPoint: {
        SanPointsTrace trace;
        const Estimate est = san_points(db, cfg.alpha, cfg.beta, cfg.epsilon,
                                        cfg.delta, rng, cfg.validate, &trace);
        r.error = max_point_error(db, est);
        r.census_san = static_cast<std::uint64_t>(trace.choose_calls);
        break;
      }
      case detail::TaskFamily::kKPoint: {
        SanPointsTrace trace;
        const Estimate est =
            san_k_points(db, cfg.k, cfg.alpha, cfg.beta, cfg.epsilon,
                         cfg.delta, rng, cfg.validate, &trace);
        r.error = max_point_error(db, est);
        r.census_san = static_cast<std::uint64_t>(trace.choose_calls);
        break;
      }
      case detail::TaskFamily::kThreshold: {
        SanState state(cfg.d);
        const WeightedDatabase w =
            san_thresholds_run(db, cfg.alpha, cfg.beta, cfg.epsilon,
                               cfg.delta, rng, cfg.gamma_c, cfg.validate,
                               &state);
        r.error = max_threshold_error(db, w);
        r.census_san = state.log.size();
        break;
      }
      case detail::TaskFamily::kIdentity: {
        WeightedDatabase w(db.bits());
        for (std::uint64_t v : db.values()) w.add_weight(v, 1.0);
        r.error = max_threshold_error(db, w);
        break;
      }
      default:
        throw ConfigError("class '" + cfg.cls + "' is not a sanitizer");
    }
    const auto t1 = std::chrono::steady_clock::now();
    r.success = r.error <= cfg.alpha;
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    rows.push_back(std::move(r));
  }
  return detail::summarize(std::move(rows));
}

// Sanitizer-to-learner experiment. With lift = 0 the base point sanitizer
// runs directly on the packed labeled domain (d + 1 bits, sample m). With
// lift = 1 the base covers the unlabeled domain (d bits, block size m), is
// wrapped in the labeled-domain lift at the canonical block plan, and the
// per-run mechanism census lands in the trial row. Success means
// generalization error at most err_cap, which defaults to 2*alpha + gamma
// for the direct mode and 5*alpha + 4*beta + gamma for the lifted mode.
inline ExperimentSummary run_reduce_experiment(const ExperimentConfig& cfg) {
  const auto family = detail::parse_family(cfg.cls, "reduce");
  const FiniteDistribution dist = gen_distribution(cfg.dist, cfg.d);
  const ClassKind ck = family == detail::TaskFamily::kThreshold
                           ? ClassKind::kThreshold
                           : ClassKind::kPoint;
  const ConceptClass cc{ck, cfg.d, 1, 1, false};
  const SanitizerContract base_contract{cfg.alpha, cfg.beta, cfg.epsilon,
                                        cfg.delta, cfg.m};
  double cap = cfg.err_cap;
  if (cap < 0)
    cap = std::min(1.0, cfg.lift
                            ? 5 * cfg.alpha + 4 * cfg.beta + cfg.gamma
                            : 2 * cfg.alpha + cfg.gamma);

  std::uint64_t sample_size = cfg.m;
  SanitizerHandle base;
  BlockPlan plan;
  if (cfg.lift) {
    base = point_sanitizer(cfg.d, base_contract, cfg.m, cfg.validate);
    plan = make_block_plan(base_contract);
    sample_size = plan.t;
  } else {
    base =
        point_sanitizer(cfg.d + 1, base_contract, cfg.m, cfg.validate);
  }

  RandomnessSource root(cfg.seed);
  std::vector<TrialResult> rows;
  rows.reserve(cfg.trials);
  for (std::uint64_t t = 0; t < cfg.trials; ++t) {
    RandomnessSource rng = root.split(t);
    const Concept target = detail::make_target(family, cfg, rng);
    const LabeledSample s = sample_labeled(dist, target, sample_size, rng);

    LiftSanitizerRecord record;
    SanitizerHandle san = base;
    if (cfg.lift) {
      san = lift_sanitizer(base, plan);
      san.run = [&base, &plan, &record](const Database& in,
                                        RandomnessSource& r2) {
        return lift_sanitizer_run(base, plan, in, r2, &record);
      };
    }

    const auto t0 = std::chrono::steady_clock::now();
    const LearnerOutput out =
        learn_via_sanitizer(san, cc, s, cfg.gamma, cfg.gamma_c, rng);
    const auto t1 = std::chrono::steady_clock::now();

    TrialResult r;
    r.trial = t;
    r.error = generalization_error(out.hypothesis, target, dist);
    r.success = r.error <= cap;
    r.proper = out.hypothesis.kind() == detail::base_kind(family);
    r.census_laplace = record.laplace_draws;
    r.census_san = record.san_calls;
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    rows.push_back(std::move(r));
  }
  return detail::summarize(std::move(rows));
}

// ---- Differential privacy audit --------------------------------------------

// A hand-picked pair of equal-length databases differing in one entry.
struct NeighborPair {
  std::string name;
  Database left;
  Database right;
};

// Black-box view of a mechanism for auditing: one call maps a database and
// a randomness stream to an event id below event_count. Continuous outputs
// must be bucketed by the adapter; the canonical adapters only ever expose
// discrete decisions.
struct MechanismAdapter {
  std::string name;
  std::uint64_t event_count = 2;
  std::function<std::uint64_t(const Database&, RandomnessSource&)> observe;
};

struct AuditEventRow {
  std::uint64_t event = 0;
  std::uint64_t left_count = 0;
  std::uint64_t right_count = 0;
  double left_lower = 0.0, left_upper = 0.0;
  double right_lower = 0.0, right_upper = 0.0;
};

struct AuditPairSummary {
  std::string pair;
  double eps_hat = 0.0;
};

// Result of one audit: the empirically supported privacy-loss bound
// eps_hat at the given delta, the flag, and per-event probability bounds on
// the worst pair. A raised flag is a high-confidence counterexample; a
// clean pass is evidence, not proof.
struct DpAuditReport {
  std::string mechanism;
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t trials = 0;
  double confidence_level = 0.0;  // per-bound one-sided level after splitting
  bool violation = false;
  double eps_hat = 0.0;
  std::string worst_pair;
  std::string worst_set;
  std::string worst_direction;
  double worst_lower = 0.0;
  double worst_upper = 0.0;
  std::vector<AuditPairSummary> pairs;
  std::vector<AuditEventRow> events;  // single events of the worst pair
};

// Estimates event probabilities on both sides of every pair and tests the
// e^eps * p + delta bound in both directions, over single events and over
// prefix and suffix unions of the ordered event ids. The overall error
// budget 1e-4 is split evenly across every one-sided bound, so a flag is a
// counterexample at confidence 1 - 1e-4. Runs below 10^4 trials per side
// are rejected as underpowered.
inline DpAuditReport audit_dp(const MechanismAdapter& mech,
                              const std::vector<NeighborPair>& pairs,
                              double epsilon, double delta,
                              std::uint64_t trials, RandomnessSource& rng) {
  if (!mech.observe) throw std::invalid_argument("adapter is not runnable");
  if (mech.event_count == 0)
    throw std::invalid_argument("adapter declares no events");
  if (pairs.empty()) throw std::invalid_argument("no neighbor pairs");
  check_privacy({epsilon, delta});
  if (trials < 10000)
    throw ConfigError("audit needs at least 10^4 trials per side");
  for (const auto& p : pairs) {
    if (p.left.size() != p.right.size() || p.left.size() == 0)
      throw std::invalid_argument("neighbor pair sizes differ or are empty");
    if (p.left.bits() != p.right.bits())
      throw std::invalid_argument("neighbor pair widths differ");
  }

  const std::uint64_t e_count = mech.event_count;
  const std::uint64_t sets_per_pair =
      e_count == 1 ? 1 : e_count + 2 * (e_count - 1);
  const double level =
      1e-4 / (4.0 * static_cast<double>(sets_per_pair) *
              static_cast<double>(pairs.size()));

  DpAuditReport report;
  report.mechanism = mech.name;
  report.epsilon = epsilon;
  report.delta = delta;
  report.trials = trials;
  report.confidence_level = level;

  std::size_t worst_pair_index = 0;
  std::vector<std::vector<std::uint64_t>> all_counts;

  for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
    std::vector<std::uint64_t> counts[2];
    counts[0].assign(e_count, 0);
    counts[1].assign(e_count, 0);
    const Database* dbs[2] = {&pairs[pi].left, &pairs[pi].right};
    for (int side = 0; side < 2; ++side) {
      RandomnessSource stream =
          rng.split(2 * static_cast<std::uint64_t>(pi) +
                    static_cast<std::uint64_t>(side));
      for (std::uint64_t t = 0; t < trials; ++t) {
        RandomnessSource sub = stream.split(t);
        const std::uint64_t e = mech.observe(*dbs[side], sub);
        if (e >= e_count)
          throw std::runtime_error("adapter produced event " +
                                   std::to_string(e) + " outside its range");
        ++counts[side][e];
      }
    }

    // Event sets to test: singles, then prefixes {0..j}, then suffixes
    // {j..}; each as (set count on left, set count on right, description).
    double pair_eps_hat = 0.0;
    auto consider = [&](std::uint64_t kl, std::uint64_t kr,
                        const std::string& desc) {
      const double bounds[2][2] = {
          {cp_lower(kl, trials, level), cp_upper(kl, trials, level)},
          {cp_lower(kr, trials, level), cp_upper(kr, trials, level)}};
      for (int from = 0; from < 2; ++from) {
        const double lo = bounds[from][0];
        const double up = bounds[1 - from][1];
        if (!(lo - delta > 0) || !(up > 0)) continue;
        const double ratio = std::log((lo - delta) / up);
        if (ratio > pair_eps_hat) pair_eps_hat = ratio;
        if (ratio > report.eps_hat) {
          report.eps_hat = ratio;
          report.worst_pair = pairs[pi].name;
          report.worst_set = desc;
          report.worst_direction =
              from == 0 ? "left->right" : "right->left";
          report.worst_lower = lo;
          report.worst_upper = up;
          worst_pair_index = pi;
        }
      }
    };

    for (std::uint64_t e = 0; e < e_count; ++e)
      consider(counts[0][e], counts[1][e], "event=" + std::to_string(e));
    if (e_count > 1) {
      std::uint64_t pl = 0, pr = 0;
      for (std::uint64_t e = 0; e + 1 < e_count; ++e) {
        pl += counts[0][e];
        pr += counts[1][e];
        consider(pl, pr, "head<=" + std::to_string(e));
      }
      std::uint64_t sl = 0, sr = 0;
      for (std::uint64_t e = e_count; e-- > 1;) {
        sl += counts[0][e];
        sr += counts[1][e];
        consider(sl, sr, "tail>=" + std::to_string(e));
      }
    }

    report.pairs.push_back({pairs[pi].name, pair_eps_hat});
    all_counts.push_back(std::move(counts[0]));
    all_counts.push_back(std::move(counts[1]));
  }

  report.violation = report.eps_hat > epsilon;
  const auto& wl = all_counts[2 * worst_pair_index];
  const auto& wr = all_counts[2 * worst_pair_index + 1];
  if (report.worst_pair.empty()) report.worst_pair = pairs[0].name;
  for (std::uint64_t e = 0; e < e_count; ++e) {
    if (wl[e] == 0 && wr[e] == 0) continue;
    AuditEventRow row;
    row.event = e;
    row.left_count = wl[e];
    row.right_count = wr[e];
    row.left_lower = cp_lower(wl[e], trials, level);
    row.left_upper = cp_upper(wl[e], trials, level);
    row.right_lower = cp_lower(wr[e], trials, level);
    row.right_upper = cp_upper(wr[e], trials, level);
    report.events.push_back(row);
  }
  return report;
}

// ---- Canonical audit mechanisms --------------------------------------------

struct AuditSetup {
  MechanismAdapter mech;
  std::vector<NeighborPair> pairs;
  double epsilon = 1.0;
  double delta = 0.0;
};

namespace detail {

inline Database two_value_db(int bits, std::uint64_t a, std::uint64_t na,
                             std::uint64_t b, std::uint64_t nb) {
  Database db(bits);
  for (std::uint64_t i = 0; i < na; ++i) db.add(a);
  for (std::uint64_t i = 0; i < nb; ++i) db.add(b);
  return db;
}

inline LabeledSample unpack_labeled(const Database& packed) {
  LabeledSample s(packed.bits() - 1);
  for (std::uint64_t v : packed.values())
    s.add(v >> 1, static_cast<int>(v & 1));
  return s;
}

}  // namespace detail

// Builds the audit target named by cfg.mech, together with its canonical
// near-worst-case neighbor pairs and the privacy claim under test. The
// declared budget comes from cfg (eps, delta); true_eps, when positive,
// makes the Laplace release actually run at that different epsilon, which
// is how a deliberately mis-declared mechanism is set up.
inline AuditSetup make_audit_setup(const ExperimentConfig& cfg) {
  AuditSetup setup;
  setup.epsilon = cfg.epsilon;
  setup.delta = cfg.delta;

  if (cfg.mech == "constant") {
    setup.mech.name = "constant";
    setup.mech.event_count = 2;
    setup.mech.observe = [](const Database&, RandomnessSource&) {
      return std::uint64_t{0};
    };
    setup.pairs.push_back({"two-point swap",
                           detail::two_value_db(2, 1, 2, 2, 2),
                           detail::two_value_db(2, 1, 3, 2, 1)});
    return setup;
  }

  if (cfg.mech == "laplace_count") {
    const std::uint64_t m = cfg.m;
    if (m < 2) throw ConfigError("laplace_count needs m >= 2");
    const double run_eps =
        cfg.true_epsilon > 0 ? cfg.true_epsilon : cfg.epsilon;
    setup.mech.name = "laplace_count";
    setup.mech.event_count = m + 1;
    setup.mech.observe = [m, run_eps](const Database& db,
                                      RandomnessSource& rng) {
      std::uint64_t ones = 0;
      for (std::uint64_t v : db.values()) ones += v & 1;
      const double noisy =
          static_cast<double>(ones) + laplace(1.0 / run_eps, rng);
      const auto rounded = static_cast<std::int64_t>(std::llround(noisy));
      const std::int64_t hi = static_cast<std::int64_t>(m);
      return static_cast<std::uint64_t>(std::clamp<std::int64_t>(rounded, 0,
                                                                 hi));
    };
    setup.pairs.push_back(
        {"count " + std::to_string(m / 2 + 1) + " vs " +
             std::to_string(m / 2),
         detail::two_value_db(1, 1, m / 2 + 1, 0, m - m / 2 - 1),
         detail::two_value_db(1, 1, m / 2, 0, m - m / 2)});
    return setup;
  }

  if (cfg.mech == "a_dist") {
    const double eps = cfg.epsilon, delta = cfg.delta;
    setup.mech.name = "a_dist";
    setup.mech.event_count = 3;
    setup.mech.observe = [eps, delta](const Database& db,
                                      RandomnessSource& rng) {
      std::vector<double> q(2, 0.0);
      for (std::uint64_t v : db.values()) {
        if (v == 1) q[0] += 1.0;
        if (v == 2) q[1] += 1.0;
      }
      const auto sel = a_dist_index(q, eps, delta, rng);
      return sel.bottom ? std::uint64_t{0} : std::uint64_t{1} + sel.index;
    };
    setup.pairs.push_back({"near tie 16/16 vs 17/15",
                           detail::two_value_db(2, 1, 16, 2, 16),
                           detail::two_value_db(2, 1, 17, 2, 15)});
    return setup;
  }

  if (cfg.mech == "choose") {
    const double eps = cfg.epsilon, delta = cfg.delta;
    setup.mech.name = "choose";
    setup.mech.event_count = 4;
    setup.mech.observe = [eps, delta](const Database& db,
                                      RandomnessSource& rng) {
      const auto out = choose(db, histogram_quality(), 0.5, 0.1, eps, delta,
                              rng, /*validate_sample=*/false);
      if (out.bottom) return std::uint64_t{0};
      if (out.solution == 1) return std::uint64_t{1};
      if (out.solution == 2) return std::uint64_t{2};
      return std::uint64_t{3};
    };
    setup.pairs.push_back({"near tie 16/16 vs 17/15",
                           detail::two_value_db(2, 1, 16, 2, 16),
                           detail::two_value_db(2, 1, 17, 2, 15)});
    return setup;
  }

  if (cfg.mech == "san_points") {
    const double eps = cfg.epsilon, delta = cfg.delta;
    setup.mech.name = "san_points";
    setup.mech.event_count = 16;  // released-point bitmask over a 2-bit domain
    setup.mech.observe = [eps, delta](const Database& db,
                                      RandomnessSource& rng) {
      const Estimate est = san_points(db, 0.5, 0.1, eps, delta, rng,
                                      /*validate_sample=*/false);
      std::uint64_t mask = 0;
      for (const auto& [p, v] : est.values()) mask |= 1ull << p;
      return mask;
    };
    setup.pairs.push_back({"near tie 16/16 vs 17/15",
                           detail::two_value_db(2, 1, 16, 2, 16),
                           detail::two_value_db(2, 1, 17, 2, 15)});
    return setup;
  }

  if (cfg.mech == "learn_point") {
    const double eps = cfg.epsilon, delta = cfg.delta;
    setup.mech.name = "learn_point";
    setup.mech.event_count = domain_size(3) + 1;
    setup.mech.observe = [eps, delta](const Database& packed,
                                      RandomnessSource& rng) {
      const LabeledSample s = detail::unpack_labeled(packed);
      LearnerParams params;
      params.alpha = 0.5;
      params.beta = 0.3;
      params.privacy = {eps, delta};
      const auto out = learn_point(s, params, rng);
      return out.hypothesis.is_zero_point() ? domain_size(3)
                                            : out.hypothesis.index();
    };
    const auto pack = [](std::uint64_t x, std::uint64_t y) {
      return (x << 1) | y;
    };
    setup.pairs.push_back(
        {"labels 8/8 vs 9/7",
         detail::two_value_db(4, pack(3, 1), 8, pack(5, 1), 8),
         detail::two_value_db(4, pack(3, 1), 9, pack(5, 1), 7)});
    return setup;
  }

  if (cfg.mech == "learn_label_private") {
    // The claim is label privacy only, so the canonical pair shares its
    // points and flips a single label in the selection segment.
    const int d = 8;
    const std::uint64_t m = 64;
    const double gamma_c = 0.002;
    const double eps = cfg.epsilon;
    setup.delta = 0.0;
    setup.mech.name = "learn_label_private";
    setup.mech.event_count = domain_size(d) + 1;
    setup.mech.observe = [d, gamma_c, eps](const Database& packed,
                                           RandomnessSource& rng) {
      const LabeledSample s = detail::unpack_labeled(packed);
      std::vector<int> sy;
      sy.reserve(s.size());
      for (const auto& e : s.entries()) sy.push_back(e.y);
      LearnerParams params;
      params.alpha = 0.5;
      params.beta = 0.3;
      params.privacy = {eps, 0.0};
      params.gamma_c = gamma_c;
      const auto out =
          learn_label_private(s.points(), sy,
                              ConceptClass{ClassKind::kPoint, d, 1, 1, false},
                              params, rng);
      return out.hypothesis.is_zero_point() ? domain_size(d)
                                            : out.hypothesis.index();
    };
    const FiniteDistribution dist =
        gen_distribution("mix:5=0.6,rest=0.4", d);
    RandomnessSource fixed(424242);
    const Concept target = Concept::point(5, d);
    const LabeledSample base = sample_labeled(dist, target, m, fixed);
    const std::uint64_t flip_at =
        learn_label_private_split(0.5, 0.3, 1, gamma_c);
    const LabeledSample flipped =
        base.with_label_flipped(static_cast<std::size_t>(flip_at));
    setup.pairs.push_back({"one label flipped", base.label_database(),
                           flipped.label_database()});
    return setup;
  }

  if (cfg.mech == "reduce_pipeline") {
    // Label lift of a point sanitizer at deliberately relaxed constants so
    // one observation stays cheap; the declared budget is the lifted
    // contract (6 eps, 2 e^eps delta).
    const SanitizerContract base_contract{0.9, 0.9, 1.0, 0.002, 2};
    const SanitizerHandle base =
        point_sanitizer(2, base_contract, 2, /*validate=*/false);
    const BlockPlan plan{4, 2, 8, 56};
    const SanitizerHandle lifted = lift_sanitizer(base, plan);
    setup.epsilon = lifted.contract.epsilon;
    setup.delta = lifted.contract.delta;
    setup.mech.name = "reduce_pipeline";
    setup.mech.event_count = 256;  // value-presence bitmask over 3 bits
    setup.mech.observe = [base, plan](const Database& db,
                                      RandomnessSource& rng) {
      const Database out = lift_sanitizer_run(base, plan, db, rng);
      std::uint64_t mask = 0;
      for (std::uint64_t v : out.values()) mask |= 1ull << v;
      return mask;
    };
    const auto pack = [](std::uint64_t x, std::uint64_t y) {
      return (x << 1) | y;
    };
    setup.pairs.push_back(
        {"one labeled entry swapped",
         detail::two_value_db(3, pack(1, 0), 28, pack(2, 1), 28),
         [&] {
           Database db =
               detail::two_value_db(3, pack(1, 0), 28, pack(2, 1), 27);
           db.add(pack(3, 1));
           return db;
         }()});
    return setup;
  }

  throw ConfigError("unknown audit mechanism '" + cfg.mech + "'");
}

// ---- Micro benchmark -------------------------------------------------------

struct BenchRow {
  std::string name;
  std::uint64_t iterations = 0;
  double seconds = 0.0;
  double ns_per_op = 0.0;
};

inline std::vector<BenchRow> run_bench(const ExperimentConfig& cfg) {
  RandomnessSource rng(cfg.seed);
  std::vector<BenchRow> rows;
  const auto timed = [&rows](const std::string& name, std::uint64_t iters,
                             const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    BenchRow r;
    r.name = name;
    r.iterations = iters;
    r.seconds = std::chrono::duration<double>(t1 - t0).count();
    r.ns_per_op = r.seconds * 1e9 / static_cast<double>(iters);
    rows.push_back(r);
  };

  volatile double sink = 0.0;
  timed("laplace-noise", 1000000, [&] {
    double acc = 0.0;
    for (int i = 0; i < 1000000; ++i) acc += laplace(1.0, rng);
    sink = acc;
  });

  const std::vector<double> qualities{3, 9, 1, 7, 4, 8, 2, 6};
  timed("softmax-selection", 200000, [&] {
    std::uint64_t acc = 0;
    for (int i = 0; i < 200000; ++i)
      acc += exp_mechanism_index(qualities, 1.0, rng);
    sink = static_cast<double>(acc);
  });

  timed("gap-selector", 200000, [&] {
    std::uint64_t acc = 0;
    for (int i = 0; i < 200000; ++i)
      acc += a_dist_gap(5.0, 1.0, 0.05, rng).bottom;
    sink = static_cast<double>(acc);
  });

  const Database hist = detail::two_value_db(10, 100, 700, 900, 324);
  timed("bounded-growth-choose", 2000, [&] {
    std::uint64_t acc = 0;
    for (int i = 0; i < 2000; ++i)
      acc += choose(hist, histogram_quality(), 0.2, 0.1, 1.0, 0.01, rng,
                    /*validate_sample=*/false)
                 .solution;
    sink = static_cast<double>(acc);
  });

  const double promise = min_promise(0.25, 0.1, 1.0, 0.01, 1, 4096);
  QuasiConcaveProblem problem;
  problem.range = 4096;
  problem.promise = promise;
  problem.approx = 0.25;
  problem.budget = 1;
  problem.quality = [promise](const Database&, std::uint64_t i) {
    const double dist_to_peak =
        std::abs(static_cast<double>(i) - 2000.0);
    return std::max(0.0, promise - dist_to_peak * (promise / 512.0));
  };
  const Database dummy(1, {0});
  timed("quasi-concave-solver", 50, [&] {
    std::uint64_t acc = 0;
    for (int i = 0; i < 50; ++i)
      acc += rec_concave(problem, dummy, 1.0 / 3.0, 0.01 / 3.0, rng).index;
    sink = static_cast<double>(acc);
  });

  RandomnessSource data_rng(7);
  const Database td =
      sample_database(gen_distribution("mix:100=0.4,800=0.3,rest=0.3", 10),
                      2000, data_rng);
  timed("threshold-sanitizer", 20, [&] {
    double acc = 0.0;
    for (int i = 0; i < 20; ++i)
      acc += san_thresholds_run(td, 0.25, 0.1, 1.0, 0.01, rng, 0.05,
                                /*validate_sample=*/false)
                 .total_weight();
    sink = acc;
  });
  (void)sink;
  return rows;
}

}  // namespace dp
