// Command-line surface: payoff tables, derived constants, simulation,
// audits, the frequency-inequality enumeration, and LP cross-checks.
//
// Exit codes: 0 pass, 2 configuration error, 3 infeasible constants
// (discount factor below the feasibility checks), 4 audit/check failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "reputeq/audit.hpp"
#include "reputeq/constants.hpp"
#include "reputeq/io.hpp"
#include "reputeq/lp.hpp"
#include "reputeq/simulate.hpp"

namespace {

using namespace reputeq;

struct CliOverrides {
  std::string config_path;
  std::uint64_t seed = 0;
  long long paths = 0;
  long long horizon = -1;
  std::string out;
  std::string format;
  bool exact = false;
  long long depth = 0;
  bool allow_delta_low = false;
  bool seed_set = false, paths_set = false, exact_set = false;
};

void add_common(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "configuration file (JSON)")
      ->required();
  cmd->add_option("--seed", ov.seed, "override experiment.seed0")
      ->each([&ov](const std::string&) { ov.seed_set = true; });
  cmd->add_option("--paths", ov.paths, "override experiment.n_paths")
      ->each([&ov](const std::string&) { ov.paths_set = true; });
  cmd->add_option("--horizon", ov.horizon, "override experiment.horizon");
  cmd->add_option("--out", ov.out, "output directory");
  cmd->add_option("--format", ov.format, "json | csv | both");
  cmd->add_flag("--exact", ov.exact, "exact rational arithmetic")
      ->each([&ov](const std::string&) { ov.exact_set = true; });
  cmd->add_option("--depth", ov.depth,
                  "audit enumeration depth / sequence length");
  cmd->add_flag("--allow-delta-low", ov.allow_delta_low,
                "run even when the discount-factor checks fail");
}

RunConfig load_config(const CliOverrides& ov) {
  std::ifstream in(ov.config_path);
  if (!in)
    throw Error(ErrorKind::ParseError,
                "cannot open config file '" + ov.config_path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  if (ov.seed_set) cfg.experiment.seed0 = ov.seed;
  if (ov.paths_set) cfg.experiment.n_paths = ov.paths;
  if (ov.horizon >= 0) cfg.experiment.horizon = ov.horizon;
  if (!ov.out.empty()) cfg.output.dir = ov.out;
  if (!ov.format.empty()) {
    if (ov.format != "json" && ov.format != "csv" && ov.format != "both")
      throw Error(ErrorKind::ValidationError,
                  "format must be json, csv, or both");
    cfg.output.format = ov.format;
  }
  if (ov.depth > 0) {
    cfg.audit.depth = ov.depth;
    cfg.audit.max_len = ov.depth;
  }
  if (ov.allow_delta_low) cfg.audit.allow_delta_low = true;
  return cfg;
}

void require_sequential(const RunConfig& cfg, const char* what) {
  if (!cfg.is_sequential())
    throw Error(ErrorKind::ValidationError,
                std::string(what) +
                    " requires the trust-sequential variant; got '" +
                    cfg.variant + "'");
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  std::filesystem::path p = std::filesystem::path(dir) / name;
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out)
    throw Error(ErrorKind::ValidationError, "cannot write " + p.string());
  out << content;
}

void begin_report(JsonWriter& w, const RunConfig& cfg,
                  const std::string& subcommand) {
  w.begin_object();
  w.kv("schema_version", kSchemaVersion);
  w.kv("subcommand", subcommand);
  w.key("config");
  write_config_echo(w, cfg);
}

// ---------------------------------------------------------------------------

int cmd_payoff_bounds(const CliOverrides& ov) {
  RunConfig cfg = load_config(ov);
  JsonWriter w;
  begin_report(w, cfg, "payoff-bounds");
  bool consistent = true;
  if (cfg.is_sequential()) {
    const GameSpec& g = cfg.game;
    Rat gs = g.gstar();
    w.key("payoff_table");
    write_payoff_table(w, g);
    w.key("lp_cross_check");
    w.begin_array();
    for (std::size_t j = 0; j < g.m(); ++j) {
      Rat closed = v_star(g.thetas[j], g.thetas[0], gs);
      w.begin_object();
      w.kv("type", static_cast<long long>(j));
      if (ov.exact) {
        TrustLpResult<Rat> lp = solve_trust_lp(g.thetas[j], g.thetas[0], gs);
        w.kv_rat("lp_value", lp.value);
        w.kv("match", lp.value == closed);
        if (lp.value != closed) consistent = false;
      } else {
        TrustLpResult<double> lp = solve_trust_lp(
            to_double(g.thetas[j]), to_double(g.thetas[0]), to_double(gs));
        double gap = std::abs(lp.value - to_double(closed));
        w.kv("lp_value", lp.value);
        w.kv("gap", gap);
        w.kv("match", gap <= 1e-9);
        if (gap > 1e-9) consistent = false;
      }
      w.end_object();
    }
    w.end_array();
  } else {
    GeneralGame gg = cfg.general_game();
    w.key("general_values");
    w.begin_array();
    for (std::size_t t = 0; t < gg.n_types(); ++t) {
      w.begin_object();
      w.kv("type", gg.type_names[t]);
      if (ov.exact)
        w.kv_rat("value", solve_general_lp<Rat>(gg, t));
      else
        w.kv("value", solve_general_lp<double>(gg, t));
      w.end_object();
    }
    w.end_array();
  }
  w.kv("pass", consistent);
  w.end_object();
  write_file(cfg.output.dir, "report.json", w.str() + "\n");
  std::printf("payoff-bounds: %s\n", consistent ? "pass" : "FAIL");
  return consistent ? 0 : 4;
}

int cmd_constants(const CliOverrides& ov) {
  RunConfig cfg = load_config(ov);
  require_sequential(cfg, "constants");
  DerivedConstants cc =
      derive_constants(cfg.game, !cfg.audit.allow_delta_low);
  JsonWriter w;
  begin_report(w, cfg, "constants");
  w.key("constants");
  write_constants(w, cc);
  w.kv("pass", cc.delta_ok());
  w.end_object();
  write_file(cfg.output.dir, "report.json", w.str() + "\n");
  std::printf("constants: %s\n", cc.delta_ok() ? "pass" : "delta checks FAIL");
  return cc.delta_ok() ? 0 : 3;
}

int cmd_simulate(const CliOverrides& ov) {
  RunConfig cfg = load_config(ov);
  require_sequential(cfg, "simulate");
  DerivedConstants cc =
      derive_constants(cfg.game, !cfg.audit.allow_delta_low);
  long long horizon = cfg.experiment.horizon > 0
                          ? cfg.experiment.horizon
                          : default_horizon(to_double(cfg.game.delta));
  ExperimentStats st = run_experiment(
      cfg.game, cc, cfg.experiment.n_paths, horizon, cfg.experiment.seed0,
      !cfg.audit.allow_delta_low, cfg.audit.kl_eps);

  if (cfg.output.format != "csv") {
    JsonWriter w;
    begin_report(w, cfg, "simulate");
    w.key("constants");
    write_constants(w, cc);
    w.key("stats");
    write_stats(w, st);
    w.kv("pass", true);
    w.end_object();
    write_file(cfg.output.dir, "report.json", w.str() + "\n");
  }
  if (cfg.output.format != "json")
    write_file(cfg.output.dir, "stats.csv", stats_csv(st));

  if (cfg.experiment.traces > 0) {
    Params<double> p = make_params<double>(cfg.game, cc);
    EqState<double> init =
        initial_state<double>(cfg.game, cc, !cfg.audit.allow_delta_low);
    for (std::size_t j = 0; j < p.m; ++j) {
      for (long long i = 0; i < cfg.experiment.traces; ++i) {
        std::uint64_t seed = reputeq::detail::path_seed(
            cfg.experiment.seed0,
            static_cast<std::uint64_t>(j) *
                    static_cast<std::uint64_t>(cfg.experiment.n_paths) +
                static_cast<std::uint64_t>(i));
        Trace tr = simulate_path(p, init, j, seed, horizon);
        write_file(cfg.output.dir,
                   "traces/" + std::to_string(j) + "/" +
                       std::to_string(seed) + ".csv",
                   trace_csv(tr, p.m));
      }
    }
  }
  std::printf("simulate: %lld paths x %zu types, horizon %lld\n",
              cfg.experiment.n_paths, cfg.game.m(), horizon);
  return 0;
}

int cmd_audit(const CliOverrides& ov) {
  RunConfig cfg = load_config(ov);
  require_sequential(cfg, "audit");
  DerivedConstants cc =
      derive_constants(cfg.game, !cfg.audit.allow_delta_low);
  AuditReport rep = run_full_audit(
      cfg.game, cc, cfg.experiment.n_paths, cfg.experiment.horizon,
      cfg.experiment.seed0, cfg.audit.depth, cfg.audit.n_sampled,
      cfg.audit.max_len, !cfg.audit.allow_delta_low);
  if (ov.exact) {
    // Exact-arithmetic pass over the local incentive checks.
    DefaultModel<Rat> model(make_params<Rat>(cfg.game, cc));
    EqState<Rat> init =
        initial_state<Rat>(cfg.game, cc, !cfg.audit.allow_delta_low);
    AuditReport ex = audit_local_ic<Rat>(model, init, cc,
                                         std::min(cfg.audit.depth, 12LL), 0, 0,
                                         cfg.experiment.seed0);
    for (AuditCheck& c : ex.checks) c.name = "exact-" + c.name;
    rep.merge(ex);
  }
  JsonWriter aw;
  write_audit(aw, rep);
  write_file(cfg.output.dir, "audit.json", aw.str() + "\n");
  JsonWriter w;
  begin_report(w, cfg, "audit");
  w.key("audit");
  write_audit(w, rep);
  w.kv("pass", rep.all_pass());
  w.end_object();
  write_file(cfg.output.dir, "report.json", w.str() + "\n");
  for (const AuditCheck& c : rep.checks)
    std::printf("%-36s %s\n", c.name.c_str(),
                c.skipped ? "skip" : (c.pass ? "pass" : "FAIL"));
  std::printf("audit: %s\n", rep.all_pass() ? "pass" : "FAIL");
  return rep.all_pass() ? 0 : 4;
}

int cmd_lemma_a1(const CliOverrides& ov) {
  RunConfig cfg = load_config(ov);
  require_sequential(cfg, "lemma-a1");
  DerivedConstants cc =
      derive_constants(cfg.game, !cfg.audit.allow_delta_low);
  AuditReport rep = audit_lemma_a1(cfg.game, cc, cfg.audit.max_len);
  JsonWriter w;
  begin_report(w, cfg, "lemma-a1");
  w.key("audit");
  write_audit(w, rep);
  w.kv("pass", rep.all_pass());
  w.end_object();
  write_file(cfg.output.dir, "report.json", w.str() + "\n");
  std::printf("lemma-a1: %s (%lld sequences)\n",
              rep.all_pass() ? "pass" : "FAIL",
              rep.checks.empty() ? 0 : rep.checks[0].examined);
  return rep.all_pass() ? 0 : 4;
}

int cmd_lp_check(const CliOverrides& ov) {
  RunConfig cfg = load_config(ov);
  bool pass = true;
  JsonWriter w;
  begin_report(w, cfg, "lp-check");
  w.key("rows");
  w.begin_array();
  if (cfg.is_sequential() || cfg.variant == "trust-simultaneous") {
    const GameSpec& g = cfg.game;
    Rat gs = g.gstar();
    const double mesh = 0.01;
    for (std::size_t j = 0; j < g.m(); ++j) {
      Rat closed = v_star(g.thetas[j], g.thetas[0], gs);
      double closed_d = to_double(closed);
      w.begin_object();
      w.kv("type", static_cast<long long>(j));
      w.kv_rat("closed_form", closed);
      bool lp_ok;
      if (ov.exact) {
        TrustLpResult<Rat> lp = solve_trust_lp(g.thetas[j], g.thetas[0], gs);
        w.kv_rat("lp_value", lp.value);
        lp_ok = lp.value == closed;
      } else {
        TrustLpResult<double> lp = solve_trust_lp(
            to_double(g.thetas[j]), to_double(g.thetas[0]), to_double(gs));
        w.kv("lp_value", lp.value);
        lp_ok = std::abs(lp.value - closed_d) <= 1e-9;
      }
      GridResult<double> grid =
          grid_oracle(trust_lp(to_double(g.thetas[j]), to_double(g.thetas[0]),
                               to_double(gs)),
                      mesh);
      w.kv("grid_value", grid.value);
      bool grid_ok = grid.feasible && std::abs(grid.value - closed_d) <= 5 * mesh;
      w.kv("match", lp_ok && grid_ok);
      w.end_object();
      if (!(lp_ok && grid_ok)) pass = false;
    }
  } else {
    GeneralGame gg = cfg.general_game();
    for (std::size_t t = 0; t < gg.n_types(); ++t) {
      w.begin_object();
      w.kv("type", gg.type_names[t]);
      double vd = solve_general_lp<double>(gg, t);
      w.kv("lp_value", vd);
      if (ov.exact) {
        Rat vr = solve_general_lp<Rat>(gg, t);
        w.key("lp_value_exact");
        w.value(vr);
        if (std::abs(to_double(vr) - vd) > 1e-9) pass = false;
      }
      w.end_object();
    }
  }
  w.end_array();
  w.kv("pass", pass);
  w.end_object();
  write_file(cfg.output.dir, "report.json", w.str() + "\n");
  std::printf("lp-check: %s\n", pass ? "pass" : "FAIL");
  return pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reputation-equilibrium engine"};
  app.require_subcommand(1);
  CliOverrides ov;
  auto* payoff = app.add_subcommand("payoff-bounds",
                                    "closed-form and LP payoff tables");
  auto* consts = app.add_subcommand("constants", "derived constants dump");
  auto* sim = app.add_subcommand("simulate", "Monte Carlo simulation");
  auto* aud = app.add_subcommand("audit", "full audit suite");
  auto* lem = app.add_subcommand("lemma-a1",
                                 "trust-frequency inequality enumeration");
  auto* lp = app.add_subcommand("lp-check",
                                "closed form vs LP vs grid oracle");
  for (CLI::App* c : {payoff, consts, sim, aud, lem, lp}) add_common(c, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (payoff->parsed()) return cmd_payoff_bounds(ov);
    if (consts->parsed()) return cmd_constants(ov);
    if (sim->parsed()) return cmd_simulate(ov);
    if (aud->parsed()) return cmd_audit(ov);
    if (lem->parsed()) return cmd_lemma_a1(ov);
    if (lp->parsed()) return cmd_lp_check(ov);
  } catch (const reputeq::Error& e) {
    std::fprintf(stderr, "%s\n", reputeq::error_json(e).c_str());
    switch (e.kind()) {
      case reputeq::ErrorKind::DeltaTooLow:
        return 3;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "{\"error\":\"Internal\",\"message\":\"%s\"}\n",
                 e.what());
    return 2;
  }
  return 2;
}
