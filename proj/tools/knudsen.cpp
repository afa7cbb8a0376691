// Command-line front end: batch simulation, named statistical checks,
// invariance-principle comparisons, SDE ensembles, profile validation.
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "knudsen/chain.hpp"
#include "knudsen/errors.hpp"
#include "knudsen/geometry.hpp"
#include "knudsen/io.hpp"
#include "knudsen/parallel.hpp"
#include "knudsen/sde.hpp"
#include "knudsen/stats.hpp"
#include "knudsen/trajectory.hpp"
#include "knudsen/verify.hpp"

using nlohmann::json;
using namespace knudsen;

namespace {

constexpr const char* kVersion = "knudsen 0.1.0";

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct Invocation {
  std::string subcommand;
  KeyValueConfig resolved;  // every knob that shaped the run
  std::vector<std::string> outputs;
};

void write_manifest(const Invocation& inv, const std::string& path) {
  json m;
  m["version"] = kVersion;
  m["subcommand"] = inv.subcommand;
  m["timestamp"] = iso_timestamp();
  json cfg = json::object();
  for (const auto& [k, v] : inv.resolved.kv) cfg[k] = v;
  m["config"] = cfg;
  m["config_hash"] = fnv1a(inv.subcommand + "\n" + inv.resolved.canonical());
  m["outputs"] = inv.outputs;
  std::ofstream out(path);
  out << m.dump(2) << "\n";
}

TubeProfile resolve_profile(const KeyValueConfig& cfg) {
  const std::string mode = cfg.get("mode", "annulus");
  if (mode == "perturbed" && !cfg.has("f.c0") && !cfg.has("g.c0")) {
    // built-in example tube
    TubeProfile p = default_perturbed_profile(cfg.get_double("epsilon", 1e-3));
    return p;
  }
  return profile_from_config(cfg);
}

json report_to_json(const LemmaReport& rep) {
  json j;
  j["lemma_id"] = rep.lemma_id;
  j["params"] = {{"epsilon", rep.epsilon}, {"seed", rep.seed}, {"n", rep.n}};
  j["target"] = rep.target;
  j["estimate"] = rep.estimate;
  j["tolerance"] = rep.tolerance;
  j["pass"] = rep.pass;
  j["seed"] = rep.seed;
  j["runtime_ms"] = rep.runtime_ms;
  if (!rep.note.empty()) j["note"] = rep.note;
  json checks = json::array();
  for (const SubCheck& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"target", c.target},
                      {"estimate", c.estimate},
                      {"tolerance", c.tolerance},
                      {"ci", c.ci},
                      {"pass", c.pass}});
  }
  j["checks"] = checks;
  return j;
}

json invariance_to_json(const InvarianceReport& rep) {
  json j;
  j["epsilon"] = rep.epsilon;
  j["n_paths"] = rep.n_paths;
  j["seed"] = rep.seed;
  j["alpha0"] = rep.alpha0;
  j["reference"] = rep.annulus_reference ? "brownian" : "sde";
  j["pass"] = rep.pass;
  json rows = json::array();
  for (const MarginalComparison& r : rep.rows) {
    rows.push_back({{"s", r.s},
                    {"mean_billiard", r.mean_billiard},
                    {"ci_mean_billiard", r.ci_mean_billiard},
                    {"mean_ref", r.mean_ref},
                    {"var_billiard", r.var_billiard},
                    {"var_ref", r.var_ref},
                    {"ks_stat", r.ks_stat},
                    {"ks_p", r.ks_p},
                    {"mean_pass", r.mean_pass},
                    {"var_pass", r.var_pass},
                    {"ks_pass", r.ks_pass}});
  }
  j["marginals"] = rows;
  return j;
}

// ---- subcommand drivers (shared by the CLI parse and manifest rerun) ----

int run_simulate(const KeyValueConfig& cfg, Invocation& inv) {
  const TubeProfile profile = resolve_profile(cfg);
  const ValidationReport vr = validate_profile(profile);
  if (!vr.pass) {
    std::cerr << "profile validation failed\n";
    return 2;
  }
  const std::uint64_t steps = cfg.get_u64("steps", 1000);
  const std::uint64_t seed = cfg.get_u64("seed", 0);
  const double alpha0 = cfg.get_double("alpha0", 0.0);
  const std::string events_path = cfg.get("out", "events.csv");
  const std::string path_path = cfg.get("path_out", "");
  const std::string format = cfg.get("format", "csv");

  SplitMix64 rng = SplitMix64::stream(seed, 0);
  ChainState init = make_initial_state(alpha0, profile, true, rng);
  const Trajectory traj = build_trajectory(profile, init, steps, rng, seed);

  std::ofstream out(events_path);
  if (format == "jsonl") {
    for (std::size_t n = 1; n < traj.events.size(); ++n) {
      const ReflectionEvent& e = traj.events[n];
      json rec = {{"step_index", n},
                  {"alpha", e.alpha},
                  {"side", side_index(e.side)},
                  {"theta", e.theta},
                  {"jump_kind", jump_kind_name(e.jump)},
                  {"chord_length", e.time - traj.events[n - 1].time}};
      out << rec.dump() << "\n";
    }
  } else {
    out << "step_index,alpha,side,theta,jump_kind,chord_length\n";
    for (std::size_t n = 1; n < traj.events.size(); ++n) {
      const ReflectionEvent& e = traj.events[n];
      out << n << ',' << format_double(e.alpha) << ',' << side_index(e.side) << ','
          << format_double(e.theta) << ',' << jump_kind_name(e.jump) << ','
          << format_double(e.time - traj.events[n - 1].time) << "\n";
    }
  }
  inv.outputs.push_back(events_path);

  if (!path_path.empty()) {
    std::ofstream pout(path_path);
    pout << "n,T_n,alpha_n,side_n,x,y\n";
    for (std::size_t n = 0; n < traj.events.size(); ++n) {
      const ReflectionEvent& e = traj.events[n];
      pout << n << ',' << format_double(e.time) << ',' << format_double(e.alpha) << ','
           << side_index(e.side) << ',' << format_double(e.position.x()) << ','
           << format_double(e.position.y()) << "\n";
    }
    inv.outputs.push_back(path_path);
  }
  return 0;
}

int run_verify(const KeyValueConfig& cfg, Invocation& inv) {
  LemmaParams params;
  params.seed = cfg.get_u64("seed", 42);
  params.epsilon = cfg.get_double("epsilon", 1e-3);
  params.n = cfg.get_u64("n", 0);
  params.bins = static_cast<int>(cfg.get_u64("bins", 16));
  params.paths = static_cast<int>(cfg.get_u64("paths", 0));
  params.t_horizon = cfg.get_double("t_horizon", 1.0);
  if (cfg.has("epsilon_ladder")) params.ladder = parse_double_list(cfg.get("epsilon_ladder"));
  if (cfg.get("mode", "") == "perturbed" || cfg.has("f.c0") || cfg.has("g.c0")) {
    params.profile = resolve_profile(cfg);
    params.has_profile = true;
  }

  const std::string which = cfg.get("lemma", "");
  std::vector<std::string> ids;
  if (which == "all" || which.empty()) {
    ids = lemma_ids();
  } else {
    ids.push_back(which);
  }

  json reports = json::array();
  bool all_pass = true;
  for (const std::string& id : ids) {
    const LemmaReport rep = verify_lemma(id, params);
    all_pass = all_pass && rep.pass;
    reports.push_back(report_to_json(rep));
    std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << id << "  target=" << rep.target
              << " estimate=" << rep.estimate << " tol=" << rep.tolerance << "\n";
  }
  const std::string out_path = cfg.get("out", "lemma_report.json");
  {
    std::ofstream out(out_path);
    json doc = ids.size() == 1 ? reports[0] : json{{"reports", reports}};
    out << doc.dump(2) << "\n";
  }
  inv.outputs.push_back(out_path);

  const std::string summary_path = cfg.get("summary", "");
  if (!summary_path.empty()) {
    std::ofstream s(summary_path);
    s << "lemma_id,target,estimate,tolerance,pass,n,runtime_ms\n";
    for (const auto& r : reports)
      s << r["lemma_id"].get<std::string>() << ',' << format_double(r["target"].get<double>())
        << ',' << format_double(r["estimate"].get<double>()) << ','
        << format_double(r["tolerance"].get<double>()) << ',' << (r["pass"].get<bool>() ? 1 : 0)
        << ',' << r["params"]["n"].get<std::uint64_t>() << ','
        << format_double(r["runtime_ms"].get<double>()) << "\n";
    inv.outputs.push_back(summary_path);
  }
  return all_pass ? 0 : 3;
}

int run_invariance(const KeyValueConfig& cfg, Invocation& inv) {
  const TubeProfile profile = resolve_profile(cfg);
  if (!validate_profile(profile).pass) {
    std::cerr << "profile validation failed\n";
    return 2;
  }
  const std::uint64_t seed = cfg.get_u64("seed", 42);
  const int n_paths = static_cast<int>(cfg.get_u64("paths", 2000));
  std::vector<double> s_grid = cfg.has("s_grid") ? parse_double_list(cfg.get("s_grid"))
                                                 : std::vector<double>{0.25, 0.5, 1.0};
  InvarianceOptions opts;
  opts.alpha0 = cfg.get_double("alpha0", 0.0);
  opts.dt = cfg.get_double("dt", 1e-4);
  opts.var_tol = cfg.get_double("var_tol", 0.25);
  opts.ks_p_floor = cfg.get_double("ks_p_floor", 0.001);
  const InvarianceReport rep = compare_invariance(profile, s_grid, n_paths, seed, opts);

  const std::string prefix = cfg.get("out", "invariance");
  {
    std::ofstream bill(prefix + "_billiard.csv");
    bill << "path_id,s,beta_rescaled\n";
    for (std::size_t gi = 0; gi < rep.s_grid.size(); ++gi)
      for (std::size_t p = 0; p < rep.billiard[gi].size(); ++p)
        bill << p << ',' << format_double(rep.s_grid[gi]) << ','
             << format_double(rep.billiard[gi][p]) << "\n";
    inv.outputs.push_back(prefix + "_billiard.csv");
  }
  if (!rep.reference.empty()) {
    std::ofstream sde(prefix + "_sde.csv");
    sde << "path_id,t,X\n";
    for (std::size_t gi = 0; gi < rep.s_grid.size(); ++gi)
      for (std::size_t p = 0; p < rep.reference[gi].size(); ++p)
        sde << p << ',' << format_double(rep.s_grid[gi]) << ','
            << format_double(rep.reference[gi][p]) << "\n";
    inv.outputs.push_back(prefix + "_sde.csv");
  }
  {
    std::ofstream rj(prefix + "_report.json");
    rj << invariance_to_json(rep).dump(2) << "\n";
    inv.outputs.push_back(prefix + "_report.json");
  }
  for (const MarginalComparison& r : rep.rows)
    std::cout << (r.mean_pass && r.var_pass && r.ks_pass ? "[PASS] " : "[FAIL] ") << "s=" << r.s
              << " var_billiard=" << r.var_billiard << " var_ref=" << r.var_ref
              << " ks_p=" << r.ks_p << "\n";
  return rep.pass ? 0 : 3;
}

int run_sde(const KeyValueConfig& cfg, Invocation& inv) {
  const TubeProfile profile = resolve_profile(cfg);
  const DiffusionSpec spec = DiffusionSpec::from_profile(profile, cfg.get_double("x0", 0.0));
  const double t_end = cfg.get_double("t_end", 1.0);
  const double dt = cfg.get_double("dt", 1e-4);
  const int n_paths = static_cast<int>(cfg.get_u64("paths", 100));
  const std::uint64_t seed = cfg.get_u64("seed", 42);
  const std::string out_path = cfg.get("out", "sde.csv");

  std::vector<double> grid;
  if (cfg.has("t_grid")) {
    grid = parse_double_list(cfg.get("t_grid"));
  } else {
    for (int k = 1; k <= 8; ++k) grid.push_back(t_end * k / 8.0);
  }
  const auto marg = sde_ensemble(spec, grid, n_paths, seed, dt);
  std::ofstream out(out_path);
  out << "path_id,t,X\n";
  for (std::size_t gi = 0; gi < grid.size(); ++gi)
    for (std::size_t p = 0; p < marg[gi].size(); ++p)
      out << p << ',' << format_double(grid[gi]) << ',' << format_double(marg[gi][p]) << "\n";
  inv.outputs.push_back(out_path);
  return 0;
}

int run_validate(const KeyValueConfig& cfg, Invocation&) {
  const TubeProfile profile = resolve_profile(cfg);
  const ValidationReport rep = validate_profile(profile);
  for (const ValidationCheck& c : rep.checks)
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " = " << format_double(c.value)
              << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
  std::cout << "g_prime_sup = " << format_double(rep.g_prime_sup)
            << ", kappa_min = " << format_double(rep.kappa_min) << "\n";
  return rep.pass ? 0 : 3;
}

int dispatch(const std::string& sub, const KeyValueConfig& cfg) {
  Invocation inv;
  inv.subcommand = sub;
  inv.resolved = cfg;
  int rc = 0;
  if (sub == "simulate") rc = run_simulate(cfg, inv);
  else if (sub == "verify") rc = run_verify(cfg, inv);
  else if (sub == "invariance") rc = run_invariance(cfg, inv);
  else if (sub == "sde") rc = run_sde(cfg, inv);
  else if (sub == "validate-profile") rc = run_validate(cfg, inv);
  else throw ConfigError("unknown subcommand: " + sub);
  const std::string manifest = cfg.get("manifest", "");
  if (!manifest.empty() && rc == 0) {
    write_manifest(inv, manifest);
  } else if (!manifest.empty()) {
    write_manifest(inv, manifest);  // still record what ran
  }
  return rc;
}

int run_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest: " + manifest_path);
  json m = json::parse(in);
  KeyValueConfig cfg;
  for (const auto& [k, v] : m["config"].items()) cfg.kv[k] = v.get<std::string>();
  cfg.kv.erase("manifest");  // avoid clobbering the original manifest
  return dispatch(m["subcommand"].get<std::string>(), cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic billiards in thin annular tubes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // every option lands in one key/value map; a --config file supplies
  // fallback values and explicit flags win
  std::map<std::string, std::string> flags;
  std::string config_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option_function<std::string>(
        "--profile", [&](const std::string& v) { flags["profile_file"] = v; },
        "tube profile file (key = value)");
    auto opt = [&, sub](const std::string& name, const std::string& help) {
      std::string spec = "--" + name;
      if (name.find('_') != std::string::npos) {
        std::string dashed = name;
        for (char& c : dashed)
          if (c == '_') c = '-';
        spec += ",--" + dashed;
      }
      sub->add_option_function<std::string>(
          spec, [&flags, name](const std::string& v) { flags[name] = v; }, help);
    };
    opt("epsilon", "width scale");
    opt("mode", "annulus | perturbed");
    opt("seed", "master seed (mandatory for reproducible artifacts)");
    opt("out", "output path (or prefix)");
    opt("manifest", "write a manifest JSON here");
    opt("threads", "worker cap (also env KNUDSEN_THREADS)");
    return opt;
  };

  auto* sim = app.add_subcommand("simulate", "sample a reflection chain and export events");
  {
    auto opt = add_common(sim);
    opt("steps", "number of reflections");
    opt("alpha0", "initial angle");
    opt("format", "csv | jsonl");
    opt("path_out", "also export the full path (n, T_n, alpha_n, side, x, y)");
  }
  auto* ver = app.add_subcommand("verify", "run named statistical checks");
  {
    auto opt = add_common(ver);
    opt("lemma", "check id or 'all'");
    opt("n", "sample budget");
    opt("bins", "alpha bins");
    opt("paths", "path budget");
    opt("t_horizon", "time horizon for counting checks");
    opt("epsilon_ladder", "comma list of epsilons");
    opt("summary", "also write a CSV summary table");
  }
  auto* inv = app.add_subcommand("invariance", "billiard vs limiting-law marginals");
  {
    auto opt = add_common(inv);
    opt("paths", "paths per ensemble");
    opt("s_grid", "comma list of rescaled times");
    opt("alpha0", "initial angle / SDE start");
    opt("dt", "SDE step");
    opt("var_tol", "relative variance window");
    opt("ks_p_floor", "KS acceptance floor");
  }
  auto* sde = app.add_subcommand("sde", "integrate the limiting diffusion ensemble");
  {
    auto opt = add_common(sde);
    opt("paths", "ensemble size");
    opt("t_end", "horizon");
    opt("dt", "step");
    opt("t_grid", "comma list of report times");
    opt("x0", "initial value");
  }
  auto* val = app.add_subcommand("validate-profile", "admissibility checks for a tube profile");
  add_common(val);

  auto* rer = app.add_subcommand("rerun", "re-execute a recorded manifest");
  std::string manifest_path;
  rer->add_option("manifest", manifest_path, "manifest JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (rer->parsed()) return run_rerun(manifest_path);

    KeyValueConfig cfg;
    if (!config_path.empty()) cfg = KeyValueConfig::parse_file(config_path);
    if (flags.count("profile_file")) {
      const KeyValueConfig pf = KeyValueConfig::parse_file(flags["profile_file"]);
      for (const auto& [k, v] : pf.kv) cfg.kv[k] = v;
      flags.erase("profile_file");
    }
    for (const auto& [k, v] : flags) cfg.kv[k] = v;  // explicit flags win
    if (cfg.has("threads")) setenv("KNUDSEN_THREADS", cfg.get("threads").c_str(), 1);

    const std::string sub = app.get_subcommands().front()->get_name();
    return dispatch(sub, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
