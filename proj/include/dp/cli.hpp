#pragma once

#include <exception>
#include <fstream>
#include <iostream>
#include <new>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dp/harness.hpp"

namespace dp {

namespace detail {

inline const char* csv_bool(bool b) { return b ? "1" : "0"; }

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ResourceError("cannot write '" + path + "'");
  out << content;
  if (!out) throw ResourceError("short write to '" + path + "'");
}

// CSV uses '.' as the decimal separator and %.17g doubles regardless of
// locale; one row per trial, in trial order.
inline std::string trial_csv(const ExperimentSummary& s) {
  std::string out =
      "trial,error,success,bottom,proper,census_laplace,census_san\n";
  for (const auto& r : s.rows) {
    out += std::to_string(r.trial);
    out += ',';
    out += format_double(r.error);
    out += ',';
    out += csv_bool(r.success);
    out += ',';
    out += csv_bool(r.bottom);
    out += ',';
    out += csv_bool(r.proper);
    out += ',';
    out += std::to_string(r.census_laplace);
    out += ',';
    out += std::to_string(r.census_san);
    out += '\n';
  }
  return out;
}

inline std::string audit_csv(const DpAuditReport& rep) {
  std::string out =
      "event,left_count,right_count,left_lower,left_upper,right_lower,"
      "right_upper\n";
  for (const auto& e : rep.events) {
    out += std::to_string(e.event);
    out += ',';
    out += std::to_string(e.left_count);
    out += ',';
    out += std::to_string(e.right_count);
    out += ',';
    out += format_double(e.left_lower);
    out += ',';
    out += format_double(e.left_upper);
    out += ',';
    out += format_double(e.right_lower);
    out += ',';
    out += format_double(e.right_upper);
    out += '\n';
  }
  return out;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "name,iterations,seconds,ns_per_op\n";
  for (const auto& r : rows) {
    out += r.name;
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += format_double(r.seconds);
    out += ',';
    out += format_double(r.ns_per_op);
    out += '\n';
  }
  return out;
}

inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  auto j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

inline nlohmann::ordered_json summary_json(const ExperimentConfig& cfg,
                                           const ExperimentSummary& s) {
  nlohmann::ordered_json j;
  j["command"] = cfg.task;
  j["config"] = config_json(cfg);
  nlohmann::ordered_json res;
  res["trials"] = s.rows.size();
  res["successes"] = s.successes;
  res["success_rate"] = s.success_rate;
  res["wilson_lower"] = s.wilson;
  res["mean_error"] = s.mean_error;
  res["max_error"] = s.max_error;
  res["bottom_count"] = s.bottom_count;
  res["proper_count"] = s.proper_count;
  j["results"] = res;
  return j;
}

inline nlohmann::ordered_json audit_json(const ExperimentConfig& cfg,
                                         const DpAuditReport& rep) {
  nlohmann::ordered_json j;
  j["command"] = cfg.task;
  j["config"] = config_json(cfg);
  nlohmann::ordered_json r;
  r["mechanism"] = rep.mechanism;
  r["epsilon"] = rep.epsilon;
  r["delta"] = rep.delta;
  r["trials"] = rep.trials;
  r["confidence_level"] = rep.confidence_level;
  r["eps_hat"] = rep.eps_hat;
  r["violation"] = rep.violation;
  r["worst_pair"] = rep.worst_pair;
  r["worst_set"] = rep.worst_set;
  r["worst_direction"] = rep.worst_direction;
  r["worst_lower"] = rep.worst_lower;
  r["worst_upper"] = rep.worst_upper;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : rep.pairs)
    pairs.push_back({{"pair", p.pair}, {"eps_hat", p.eps_hat}});
  r["pairs"] = pairs;
  j["report"] = r;
  return j;
}

inline nlohmann::ordered_json bench_json(const ExperimentConfig& cfg,
                                         const std::vector<BenchRow>& rows) {
  nlohmann::ordered_json j;
  j["command"] = cfg.task;
  j["config"] = config_json(cfg);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows)
    arr.push_back({{"name", r.name},
                   {"iterations", r.iterations},
                   {"seconds", r.seconds},
                   {"ns_per_op", r.ns_per_op}});
  j["results"] = arr;
  return j;
}

inline std::string trace_dump(const ExperimentSummary& s) {
  std::string out;
  for (const auto& r : s.rows) {
    if (r.trace_text.empty()) continue;
    out += "trial " + std::to_string(r.trial) + "\n" + r.trace_text;
    if (out.back() != '\n') out += '\n';
  }
  if (out.empty()) out = "no recursion traces recorded\n";
  return out;
}

}  // namespace detail

// Entry point of the experiment harness. Subcommands: learn, sanitize,
// reduce, audit, bench. Options may come from a `--config` file of
// `key = value` lines; explicit flags override file values, and --seed must
// always be given explicitly. Exit codes: 0 success, 2 usage or config
// error, 3 resource failure, 4 an acceptance threshold was missed (audit
// flag raised, or success rate below --min-success).
inline int cli_main(int argc, char** argv) {
  ExperimentConfig cfg;
  try {
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" && i + 1 < argc) {
        load_config_file(cfg, argv[i + 1]);
      } else if (a.rfind("--config=", 0) == 0) {
        load_config_file(cfg, a.substr(9));
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"differential privacy experiment harness"};
  app.require_subcommand(1);
  std::string config_path;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path,
                    "config file with key = value lines");
    sub->add_option("--seed", cfg.seed, "master random seed")->required();
    sub->add_option("--class", cfg.cls, "concept or query class");
    sub->add_option("--d", cfg.d, "domain bit width");
    sub->add_option("--axes", cfg.axes, "rectangle axis count");
    sub->add_option("--k", cfg.k, "point-set query size");
    sub->add_option("--dist", cfg.dist, "distribution spec");
    sub->add_option("--target", cfg.target,
                    "target concept (random, point:J, thresh:T)");
    sub->add_option("--alpha", cfg.alpha, "approximation parameter");
    sub->add_option("--beta", cfg.beta, "failure probability");
    sub->add_option("--eps", cfg.epsilon, "privacy parameter epsilon");
    sub->add_option("--delta", cfg.delta, "privacy parameter delta");
    sub->add_option("--depth", cfg.depth, "recursion budget");
    sub->add_option("--gamma", cfg.gamma, "agnostic slack");
    sub->add_option("--gamma-c", cfg.gamma_c,
                    "scale on analytic sample bounds");
    sub->add_option("--m", cfg.m, "sample or database size");
    sub->add_option("--trials", cfg.trials, "number of trials");
    sub->add_option("--mech", cfg.mech, "audit mechanism name");
    sub->add_option("--true-eps", cfg.true_epsilon,
                    "epsilon the mechanism actually runs at");
    sub->add_option("--lift", cfg.lift,
                    "route through the labeled-domain lift (0/1)");
    sub->add_option("--validate", cfg.validate,
                    "enforce minimum sample sizes (0/1)");
    sub->add_option("--err-cap", cfg.err_cap,
                    "success threshold on per-trial error");
    sub->add_option("--min-success", cfg.min_success,
                    "required success rate; below it the exit code is 4");
    sub->add_option("--out", cfg.out, "output file prefix");
    sub->add_flag("--trace", cfg.trace, "dump recursion traces");
  };
  add_common(app.add_subcommand("learn", "run a private PAC experiment"));
  add_common(app.add_subcommand("sanitize", "run a sanitization experiment"));
  add_common(
      app.add_subcommand("reduce", "learn through a sanitizer reduction"));
  add_common(
      app.add_subcommand("audit", "estimate a mechanism's privacy loss"));
  add_common(app.add_subcommand("bench", "time the core mechanisms"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  cfg.task = app.get_subcommands().front()->get_name();

  try {
    if (cfg.task == "learn" || cfg.task == "sanitize" ||
        cfg.task == "reduce") {
      const ExperimentSummary s = cfg.task == "learn"
                                      ? run_pac_experiment(cfg)
                                      : cfg.task == "sanitize"
                                            ? run_san_experiment(cfg)
                                            : run_reduce_experiment(cfg);
      const auto j = detail::summary_json(cfg, s);
      if (!cfg.out.empty()) {
        detail::write_file(cfg.out + ".csv", detail::trial_csv(s));
        detail::write_file(cfg.out + ".json", j.dump(2) + "\n");
        if (cfg.trace)
          detail::write_file(cfg.out + "_trace.txt", detail::trace_dump(s));
        std::cout << "wrote " << cfg.out << ".csv and " << cfg.out
                  << ".json\n";
      } else {
        std::cout << j.dump(2) << "\n";
      }
      if (cfg.min_success >= 0 && s.success_rate < cfg.min_success) {
        std::cerr << "success rate " << s.success_rate
                  << " below required " << cfg.min_success << "\n";
        return 4;
      }
      return 0;
    }
    if (cfg.task == "audit") {
      const AuditSetup setup = make_audit_setup(cfg);
      RandomnessSource rng(cfg.seed);
      const DpAuditReport rep = audit_dp(setup.mech, setup.pairs,
                                         setup.epsilon, setup.delta,
                                         cfg.trials, rng);
      const auto j = detail::audit_json(cfg, rep);
      if (!cfg.out.empty()) {
        detail::write_file(cfg.out + ".csv", detail::audit_csv(rep));
        detail::write_file(cfg.out + ".json", j.dump(2) + "\n");
        std::cout << "wrote " << cfg.out << ".csv and " << cfg.out
                  << ".json\n";
      } else {
        std::cout << j.dump(2) << "\n";
      }
      if (rep.violation) {
        std::cerr << "privacy violation: eps_hat " << rep.eps_hat
                  << " exceeds declared epsilon " << rep.epsilon << " ("
                  << rep.worst_pair << ", " << rep.worst_set << ", "
                  << rep.worst_direction << ")\n";
        return 4;
      }
      return 0;
    }
    const std::vector<BenchRow> rows = run_bench(cfg);
    const auto j = detail::bench_json(cfg, rows);
    if (!cfg.out.empty()) {
      detail::write_file(cfg.out + ".csv", detail::bench_csv(rows));
      detail::write_file(cfg.out + ".json", j.dump(2) + "\n");
      std::cout << "wrote " << cfg.out << ".csv and " << cfg.out << ".json\n";
    } else {
      std::cout << j.dump(2) << "\n";
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace dp
