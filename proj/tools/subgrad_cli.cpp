// Deterministic experiment harness for the subgradient-method testbed.
//
//   subgrad_cli run       --config cfg.json [--out dir] [--seed s]
//   subgrad_cli flow      --config cfg.json [--out dir] [--seed s]
//   subgrad_cli avoidance --config cfg.json [--out dir] [--seed s] [--threads n]
//   subgrad_cli ripcheck  --config instance.json [--out dir]
//
// Exit codes: 0 success, 1 config error, 2 divergence, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subgrad/subgrad.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subgrad;

namespace {

constexpr std::uint64_t kX0StreamSalt = 0xD1B54A32D192ED03ULL;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional, const std::string& where) {
  for (const char* k : required)
    if (!j.contains(k)) throw ConfigError(where + ": missing field '" + std::string(k) + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required)
      if (it.key() == k) known = true;
    for (const char* k : optional)
      if (it.key() == k) known = true;
    if (!known) throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

double get_real(const json& j, const char* key, const std::string& where) {
  if (!j.at(key).is_number()) throw ConfigError(where + ": field '" + key + "' must be a number");
  return j.at(key).get<double>();
}

std::size_t get_count(const json& j, const char* key, const std::string& where) {
  if (!j.at(key).is_number_unsigned()) throw ConfigError(where + ": field '" + key + "' must be a nonnegative integer");
  return j.at(key).get<std::size_t>();
}

SignPolicy parse_policy(const json& j) {
  const std::string s = j.is_null() ? "zero" : j.get<std::string>();
  if (s == "zero") return SignPolicy::Zero;
  if (s == "plus") return SignPolicy::PlusOne;
  if (s == "minus") return SignPolicy::MinusOne;
  throw ConfigError("policy must be one of zero|plus|minus");
}

Objective make_problem(const json& p, std::uint64_t seed, const fs::path& config_dir) {
  if (!p.is_object() || !p.contains("kind")) throw ConfigError("problem: missing 'kind'");
  const std::string kind = p.at("kind").get<std::string>();
  const std::string where = "problem(" + kind + ")";
  if (kind == "rpca") {
    require_keys(p, {"kind", "m", "n", "r_true", "p", "sigma_s"}, {"r"}, where);
    const std::size_t r = p.contains("r") ? get_count(p, "r", where) : 0;
    return Objective(gen_rpca_instance(seed, get_count(p, "m", where), get_count(p, "n", where),
                                       get_count(p, "r_true", where), get_real(p, "p", where),
                                       get_real(p, "sigma_s", where), r));
  }
  if (kind == "phase") {
    require_keys(p, {"kind", "n", "N", "p", "sigma_s"}, {}, where);
    return Objective(gen_phase_instance(seed, get_count(p, "n", where), get_count(p, "N", where),
                                        get_real(p, "p", where), get_real(p, "sigma_s", where)));
  }
  if (kind == "sensing") {
    require_keys(p, {"kind", "m", "n", "r_true", "r", "N", "p", "sigma_s"}, {}, where);
    return Objective(gen_sensing_instance(seed, get_count(p, "m", where), get_count(p, "n", where),
                                          get_count(p, "r_true", where), get_count(p, "r", where),
                                          get_count(p, "N", where), get_real(p, "p", where),
                                          get_real(p, "sigma_s", where)));
  }
  if (kind == "symrankone") {
    require_keys(p, {"kind", "u"}, {}, where);
    return Objective(SymRankOne{json_real_array(p.at("u"), where)});
  }
  if (kind == "instance") {
    require_keys(p, {"kind", "path"}, {}, where);
    const fs::path path = config_dir / p.at("path").get<std::string>();
    return objective_from_json(load_json(path));
  }
  throw ConfigError("problem: unknown kind '" + kind + "'");
}

Vec make_x0(const json& x0cfg, const Objective& obj, std::uint64_t seed) {
  if (!x0cfg.is_object() || !x0cfg.contains("kind")) throw ConfigError("x0: missing 'kind'");
  const std::string kind = x0cfg.at("kind").get<std::string>();
  if (kind == "explicit") {
    require_keys(x0cfg, {"kind", "values"}, {}, "x0");
    Vec x = json_real_array(x0cfg.at("values"), "x0.values");
    if (x.size() != obj.dim()) throw ConfigError("x0: explicit vector has wrong dimension");
    return x;
  }
  if (kind == "normal") {
    require_keys(x0cfg, {"kind", "scale"}, {}, "x0");
    const double scale = get_real(x0cfg, "scale", "x0");
    Rng rng(seed ^ kX0StreamSalt);  // stream independent of the instance draws
    Vec x(obj.dim());
    for (double& v : x) v = scale * rng.normal();
    return x;
  }
  throw ConfigError("x0: unknown kind '" + kind + "'");
}

StepSchedule make_schedule(const json& s) {
  if (!s.is_object() || !s.contains("kind")) throw ConfigError("schedule: missing 'kind'");
  const std::string kind = s.at("kind").get<std::string>();
  if (kind == "harmonic") {
    require_keys(s, {"kind", "alpha_bar"}, {}, "schedule");
    return StepSchedule::harmonic(get_real(s, "alpha_bar", "schedule"));
  }
  if (kind == "constant") {
    require_keys(s, {"kind", "alpha"}, {}, "schedule");
    return StepSchedule::constant(get_real(s, "alpha", "schedule"));
  }
  if (kind == "explicit") {
    require_keys(s, {"kind", "values"}, {}, "schedule");
    return StepSchedule::explicit_list(json_real_array(s.at("values"), "schedule.values"));
  }
  throw ConfigError("schedule: unknown kind '" + kind + "'");
}

struct CommonArgs {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

int cmd_run(const CommonArgs& args) {
  const fs::path cfg_path(args.config);
  const json cfg = load_json(cfg_path);
  require_keys(cfg, {"problem", "seed", "x0", "schedule", "iters"},
               {"policy", "thin", "convergence", "classify_tau", "out_prefix"}, "run config");
  const std::uint64_t seed = args.seed ? *args.seed : cfg.at("seed").get<std::uint64_t>();
  const Objective obj = make_problem(cfg.at("problem"), seed, cfg_path.parent_path());
  const Vec x0 = make_x0(cfg.at("x0"), obj, seed);
  const StepSchedule sched = make_schedule(cfg.at("schedule"));
  const std::size_t iters = get_count(cfg, "iters", "run config");
  const SignPolicy policy = parse_policy(cfg.value("policy", json()));
  const std::size_t thin = cfg.contains("thin") ? get_count(cfg, "thin", "run config") : 0;

  std::size_t window = std::min<std::size_t>(iters, 1000);
  double tol = 1e-6;
  if (cfg.contains("convergence")) {
    const json& c = cfg.at("convergence");
    require_keys(c, {"window", "tol"}, {}, "convergence");
    window = get_count(c, "window", "convergence");
    tol = get_real(c, "tol", "convergence");
    if (window > iters) throw ConfigError("convergence: window exceeds iteration budget");
  }
  const std::string prefix = cfg.value("out_prefix", std::string("run"));

  const RunRecord rec = run_subgradient(obj, x0, sched, iters, policy, thin);
  const ConvergenceReport rep = detect_convergence(rec, std::min(window, rec.steps()), tol);

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  atomic_write(out_dir / (prefix + "-run.csv"), run_record_csv(rec));
  atomic_write(out_dir / (prefix + "-convergence.json"), convergence_report_json(rep));
  if (obj.is_sym_rank_one()) {
    const double tau = cfg.contains("classify_tau") ? get_real(cfg, "classify_tau", "run config") : 1e-6;
    atomic_write(out_dir / (prefix + "-landscape.json"),
                 landscape_report_json(obj.sym().u, rec.final_point, tau));
  }
  if (rec.diverged) {
    std::cerr << "run diverged after " << rec.steps() << " iterations\n";
    return 2;
  }
  return 0;
}

int cmd_flow(const CommonArgs& args) {
  const fs::path cfg_path(args.config);
  const json cfg = load_json(cfg_path);
  require_keys(cfg, {"problem", "x0", "h", "t_end"}, {"seed", "policy", "out_prefix"}, "flow config");
  const std::uint64_t seed = args.seed ? *args.seed : cfg.value("seed", std::uint64_t{0});
  const Objective obj = make_problem(cfg.at("problem"), seed, cfg_path.parent_path());
  const Vec x0 = make_x0(cfg.at("x0"), obj, seed);
  const double h = get_real(cfg, "h", "flow config");
  const double t_end = get_real(cfg, "t_end", "flow config");
  const SignPolicy policy = parse_policy(cfg.value("policy", json()));
  const std::string prefix = cfg.value("out_prefix", std::string("flow"));

  FlowRecord rec;
  bool failed = false;
  try {
    rec = integrate_flow(obj, x0, h, t_end, policy);
  } catch (const IntegrationError& e) {
    std::cerr << e.what() << "\n";
    rec = e.record;
    failed = true;
  }

  std::string report = "{\n";
  report += "  \"chain_rule_defect\": " + fmt_real(rec.size() ? check_chain_rule(rec) : 0.0) + ",\n";
  report += "  \"stopped_at_critical\": " + std::string(rec.stopped_at_critical ? "true" : "false") + ",\n";
  if (obj.is_phase()) {
    report += "  \"orthogonal_drift\": " + fmt_real(orthogonal_component_drift(obj, rec)) + ",\n";
    const BoundCertificate bc = certified_bounds(obj, x0);
    report += "  \"bounds\": {\"c1\": " + fmt_real(bc.c1) + ", \"lambda_plus\": " + fmt_real(bc.lambda_plus) +
              ", \"bound\": " + fmt_real(bc.primary_bound()) +
              ", \"max_violation\": " + fmt_real(verify_bounds(obj, rec, bc)) + "},\n";
  } else if (obj.is_sensing()) {
    report += "  \"balancedness_drift\": " + fmt_real(balancedness_drift(obj, rec)) + ",\n";
    const RipCertificate cert = rip_lower_certificate(obj.sensing().A);
    if (cert.c > 0.0) {
      const BoundCertificate bc = certified_bounds(obj, x0, cert);
      report += "  \"bounds\": {\"c\": " + fmt_real(bc.c) + ", \"c1\": " + fmt_real(bc.c1) +
                ", \"c2\": " + fmt_real(bc.c2) + ", \"c3\": " + fmt_real(bc.c3) +
                ", \"product_bound\": " + fmt_real(bc.primary_bound()) +
                ", \"quartic_bound\": " + fmt_real(bc.quartic_bound()) +
                ", \"max_violation\": " + fmt_real(verify_bounds(obj, rec, bc)) + "},\n";
    } else {
      report += "  \"bounds\": null,\n";
    }
  } else if (obj.is_rpca()) {
    report += "  \"balancedness_drift\": " + fmt_real(balancedness_drift(obj, rec)) + ",\n";
  }
  report += "  \"steps\": " + std::to_string(rec.size()) + "\n}\n";

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  atomic_write(out_dir / (prefix + "-flow.csv"), flow_record_csv(rec));
  atomic_write(out_dir / (prefix + "-invariants.json"), report);
  return failed ? 2 : 0;
}

int cmd_avoidance(const CommonArgs& args) {
  const fs::path cfg_path(args.config);
  const json cfg = load_json(cfg_path);
  require_keys(cfg, {"u", "trials", "box", "schedule", "iters", "seed"},
               {"policy", "classify_tau", "convergence", "out_prefix"}, "avoidance config");
  const Vec u = json_real_array(cfg.at("u"), "avoidance.u");
  const std::size_t trials = get_count(cfg, "trials", "avoidance config");
  const auto box = json_real_array(cfg.at("box"), "avoidance.box");
  if (box.size() != 2 || box[0] >= box[1]) throw ConfigError("avoidance: box must be [lo, hi]");
  const StepSchedule sched = make_schedule(cfg.at("schedule"));
  const std::size_t iters = get_count(cfg, "iters", "avoidance config");
  const std::uint64_t seed = args.seed ? *args.seed : cfg.at("seed").get<std::uint64_t>();
  const SignPolicy policy = parse_policy(cfg.value("policy", json()));
  const double tau = cfg.contains("classify_tau") ? get_real(cfg, "classify_tau", "avoidance config") : 1e-3;
  std::size_t window = std::min<std::size_t>(iters, 1000);
  double tol = 1e-2;
  if (cfg.contains("convergence")) {
    const json& c = cfg.at("convergence");
    require_keys(c, {"window", "tol"}, {}, "convergence");
    window = get_count(c, "window", "convergence");
    tol = get_real(c, "tol", "convergence");
    if (window > iters) throw ConfigError("convergence: window exceeds iteration budget");
  }
  const std::string prefix = cfg.value("out_prefix", std::string("avoidance"));
  const Objective obj{SymRankOne{u}};

  // All trial starting points are drawn up front from one stream, so the
  // result is independent of how trials are scheduled across threads.
  std::vector<Vec> starts(trials);
  {
    Rng rng(seed ^ kX0StreamSalt);
    for (Vec& x0 : starts) {
      x0.resize(u.size());
      for (double& v : x0) v = rng.uniform(box[0], box[1]);
    }
  }

  struct Trial {
    CriticalClass cls;
    ConvergenceReport rep;
  };
  std::vector<Trial> results(trials);
  auto run_trial = [&](std::size_t i) {
    const RunRecord rec = run_subgradient(obj, starts[i], sched, iters, policy);
    results[i].rep = detect_convergence(rec, std::min(window, rec.steps()), tol);
    results[i].cls = classify_critical(u, rec.final_point, tau);
  };
  const unsigned threads = std::max(1u, args.threads);
  if (threads == 1 || trials <= 1) {
    for (std::size_t i = 0; i < trials; ++i) run_trial(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mu;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard<std::mutex> lock(mu);
            if (next >= trials) return;
            i = next++;
          }
          run_trial(i);
        }
      });
    for (std::thread& th : pool) th.join();
  }

  std::size_t n_plus = 0, n_minus = 0, n_a = 0, n_un = 0;
  std::string per_trial = "[";
  for (std::size_t i = 0; i < trials; ++i) {
    const Trial& tr = results[i];
    const bool converged = tr.rep.status == ConvergenceReport::Status::Converged;
    std::string label = "unresolved";
    if (converged && tr.cls.tag == CriticalClass::Tag::GlobalMinPlus) {
      ++n_plus;
      label = "plus_u";
    } else if (converged && tr.cls.tag == CriticalClass::Tag::GlobalMinMinus) {
      ++n_minus;
      label = "minus_u";
    } else if (converged && tr.cls.tag == CriticalClass::Tag::SpuriousA) {
      ++n_a;
      label = "spurious_a";
    } else {
      ++n_un;
    }
    if (i) per_trial += ",";
    per_trial += "\n    {\"trial\": " + std::to_string(i) + ", \"label\": \"" + label +
                 "\", \"class\": \"" + to_string(tr.cls.tag) +
                 "\", \"distance\": " + fmt_real(tr.cls.distance) +
                 ", \"trailing_displacement\": " + fmt_real(tr.rep.trailing_displacement) +
                 ", \"final\": " + fmt_real_array(tr.rep.limit_estimate) + "}";
  }
  per_trial += trials ? "\n  ]" : "]";

  std::string out = "{\n";
  out += "  \"trials\": " + std::to_string(trials) + ",\n";
  out += "  \"converged_to_plus_u\": " + std::to_string(n_plus) + ",\n";
  out += "  \"converged_to_minus_u\": " + std::to_string(n_minus) + ",\n";
  out += "  \"converged_to_A\": " + std::to_string(n_a) + ",\n";
  out += "  \"unresolved\": " + std::to_string(n_un) + ",\n";
  out += "  \"per_trial\": " + per_trial + "\n}\n";

  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  atomic_write(out_dir / (prefix + "-summary.json"), out);
  return 0;
}

int cmd_ripcheck(const CommonArgs& args) {
  const json inst = load_json(args.config);
  const Objective obj = objective_from_json(inst);
  if (!obj.is_sensing()) throw ConfigError("ripcheck: instance must have kind 'sensing'");
  const RipCertificate cert = rip_lower_certificate(obj.sensing().A);
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);
  atomic_write(out_dir / "rip-certificate.json", rip_certificate_json(cert));
  std::cout << "c = " << fmt_real(cert.c) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"subgradient method testbed for robust signal recovery"};
  app.require_subcommand(1);

  CommonArgs args;
  auto add_common = [&](CLI::App* sub, bool with_threads) {
    sub->add_option("--config", args.config, "JSON config (or instance) file")->required();
    sub->add_option("--out", args.out, "output directory (default: current)");
    sub->add_option("--seed", args.seed, "override the config seed");
    if (with_threads) sub->add_option("--threads", args.threads, "worker threads for trials");
  };
  CLI::App* run = app.add_subcommand("run", "discrete subgradient method run");
  CLI::App* flow = app.add_subcommand("flow", "subgradient-flow integration with invariant monitors");
  CLI::App* avoid = app.add_subcommand("avoidance", "terminal-class statistics over random starts");
  CLI::App* rip = app.add_subcommand("ripcheck", "RIP-type lower certificate for a sensing instance");
  add_common(run, false);
  add_common(flow, false);
  add_common(avoid, true);
  add_common(rip, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    if (run->parsed()) return cmd_run(args);
    if (flow->parsed()) return cmd_flow(args);
    if (avoid->parsed()) return cmd_avoidance(args);
    return cmd_ripcheck(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  }
}
