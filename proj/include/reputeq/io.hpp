#ifndef REPUTEQ_IO_HPP
#define REPUTEQ_IO_HPP

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "reputeq/audit.hpp"
#include "reputeq/constants.hpp"
#include "reputeq/errors.hpp"
#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"
#include "reputeq/simulate.hpp"

namespace reputeq {

inline constexpr const char* kSchemaVersion = "reputeq-1";

// ---------------------------------------------------------------------------
// Run configuration: a strict, versioned JSON document with nested blocks.

struct ExperimentConfig {
  long long n_paths = 10000;
  long long horizon = 0;  // 0 -> default_horizon(delta)
  std::uint64_t seed0 = 12345;
  long long traces = 0;  // per-type count of full traces to write
};

struct AuditConfig {
  long long depth = 14;         // exhaustive local-IC depth
  long long n_sampled = 10000;  // sampled states beyond the exhaustive depth
  long long sample_depth = 200;
  long long max_len = 12;  // frequency-inequality enumeration length
  double tol = 0.01;       // promise-keeping tolerance
  double kl_eps = 0.01;
  double eps_mean = 0.05;
  double eps_path = 0.2;
  bool allow_delta_low = false;
};

struct OutputConfig {
  std::string dir = ".";
  std::string format = "json";  // json | csv | both
};

struct RunConfig {
  std::string variant = "trust-sequential";
  GameSpec game;
  std::vector<Rat> d;      // untrusted effort cost, simultaneous variants
  Rat x1, x2, y1, y2;      // monetary-policy player-2 payoffs
  GeneralGame general;     // filled for variant == "general"
  ExperimentConfig experiment;
  AuditConfig audit;
  OutputConfig output;

  bool is_sequential() const { return variant == "trust-sequential"; }

  // The one-shot table for the declared variant (not for trust-sequential).
  GeneralGame general_game() const {
    if (variant == "trust-simultaneous")
      return encode_trust_simultaneous(game.thetas, game.b, game.c, d);
    if (variant == "limit-pricing")
      return encode_limit_pricing(game.thetas, game.b, game.c, d);
    if (variant == "capital-taxation")
      return encode_capital_taxation(game.thetas, game.b, game.c);
    if (variant == "monetary-policy")
      return encode_monetary_policy(game.thetas, d, x1, x2, y1, y2);
    if (variant == "general") return general;
    throw Error(ErrorKind::ValidationError,
                "variant '" + variant + "' has no one-shot table");
  }
};

namespace detail {

using json = nlohmann::json;

inline Rat rat_from_json(const json& v, const std::string& field) {
  try {
    if (v.is_string()) return rat_from_decimal(v.get<std::string>());
    if (v.is_number_integer()) return Rat(v.get<long long>());
    if (v.is_number_float()) return rat_from_double(v.get<double>());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::ParseError, field + ": " + e.what());
  }
  throw Error(ErrorKind::ParseError, field + ": expected a number");
}

inline std::vector<Rat> rats_from_json(const json& v, const std::string& field) {
  if (!v.is_array())
    throw Error(ErrorKind::ParseError, field + ": expected an array");
  std::vector<Rat> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(rat_from_json(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw Error(ErrorKind::ValidationError,
                  "unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read_int(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number_integer())
    throw Error(ErrorKind::ParseError, std::string(key) + ": expected an integer");
  out = obj[key].get<T>();
}

inline void read_double(const json& obj, const char* key, double& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number())
    throw Error(ErrorKind::ParseError, std::string(key) + ": expected a number");
  out = obj[key].get<double>();
}

inline void read_bool(const json& obj, const char* key, bool& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_boolean())
    throw Error(ErrorKind::ParseError, std::string(key) + ": expected a boolean");
  out = obj[key].get<bool>();
}

inline void read_string(const json& obj, const char* key, std::string& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_string())
    throw Error(ErrorKind::ParseError, std::string(key) + ": expected a string");
  out = obj[key].get<std::string>();
}

inline GeneralGame general_from_json(const json& g) {
  reject_unknown(g, "general",
                 {"type_names", "a1_names", "a2_names", "u1", "u2"});
  GeneralGame game;
  if (g.contains("a1_names"))
    for (const auto& s : g["a1_names"]) game.a1_names.push_back(s.get<std::string>());
  if (g.contains("a2_names")) {
    const auto& a2 = g["a2_names"];
    if (!a2.is_array() || a2.size() != 2)
      throw Error(ErrorKind::ParseError, "a2_names: expected two names");
    game.a2_names = {a2[0].get<std::string>(), a2[1].get<std::string>()};
  }
  if (!g.contains("u1") || !g.contains("u2"))
    throw Error(ErrorKind::ValidationError, "general variant needs u1 and u2");
  for (std::size_t t = 0; t < g["u1"].size(); ++t) {
    std::vector<std::array<Rat, 2>> row;
    for (std::size_t i = 0; i < g["u1"][t].size(); ++i) {
      const auto& cell = g["u1"][t][i];
      if (!cell.is_array() || cell.size() != 2)
        throw Error(ErrorKind::ParseError, "u1: each cell needs two payoffs");
      row.push_back({rat_from_json(cell[0], "u1"), rat_from_json(cell[1], "u1")});
    }
    game.u1.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < g["u2"].size(); ++i) {
    const auto& cell = g["u2"][i];
    if (!cell.is_array() || cell.size() != 2)
      throw Error(ErrorKind::ParseError, "u2: each row needs two payoffs");
    game.u2.push_back({rat_from_json(cell[0], "u2"), rat_from_json(cell[1], "u2")});
  }
  if (g.contains("type_names"))
    for (const auto& s : g["type_names"])
      game.type_names.push_back(s.get<std::string>());
  while (game.type_names.size() < game.u1.size())
    game.type_names.push_back("theta_" + std::to_string(game.type_names.size() + 1));
  while (game.a1_names.size() < game.u2.size())
    game.a1_names.push_back("a1_" + std::to_string(game.a1_names.size() + 1));
  if (game.a2_names[0].empty()) game.a2_names = {"a2_1", "a2_2"};
  game.validate();
  return game;
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  detail::json doc;
  try {
    doc = detail::json::parse(text);
  } catch (const detail::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
  if (!doc.is_object())
    throw Error(ErrorKind::ParseError, "config root must be an object");
  detail::reject_unknown(doc, "config root",
                         {"schema", "variant", "game", "general", "experiment",
                          "audit", "output"});
  RunConfig cfg;
  std::string schema = kSchemaVersion;
  detail::read_string(doc, "schema", schema);
  if (schema != kSchemaVersion)
    throw Error(ErrorKind::ValidationError,
                "unsupported schema '" + schema + "' (expected " +
                    kSchemaVersion + ")");
  detail::read_string(doc, "variant", cfg.variant);
  const std::vector<std::string> variants = {
      "trust-sequential", "trust-simultaneous", "capital-taxation",
      "limit-pricing",    "monetary-policy",    "general"};
  bool known = false;
  for (const auto& v : variants)
    if (v == cfg.variant) known = true;
  if (!known)
    throw Error(ErrorKind::ValidationError, "unknown variant '" + cfg.variant + "'");

  if (cfg.variant == "general") {
    if (!doc.contains("general"))
      throw Error(ErrorKind::ValidationError, "variant 'general' needs a general block");
    cfg.general = detail::general_from_json(doc["general"]);
  } else {
    if (!doc.contains("game") || !doc["game"].is_object())
      throw Error(ErrorKind::ValidationError, "config needs a game block");
    const auto& g = doc["game"];
    detail::reject_unknown(g, "game", {"b", "c", "thetas", "prior", "delta",
                                       "gamma", "d", "x1", "x2", "y1", "y2"});
    for (const char* req : {"b", "c", "thetas"})
      if (!g.contains(req))
        throw Error(ErrorKind::ValidationError,
                    std::string("game block is missing '") + req + "'");
    cfg.game.b = detail::rat_from_json(g["b"], "b");
    cfg.game.c = detail::rat_from_json(g["c"], "c");
    cfg.game.thetas = detail::rats_from_json(g["thetas"], "thetas");
    if (g.contains("prior"))
      cfg.game.prior = detail::rats_from_json(g["prior"], "prior");
    if (g.contains("delta"))
      cfg.game.delta = detail::rat_from_json(g["delta"], "delta");
    if (g.contains("gamma"))
      cfg.game.gamma = detail::rat_from_json(g["gamma"], "gamma");
    if (g.contains("d")) cfg.d = detail::rats_from_json(g["d"], "d");
    if (cfg.d.empty()) cfg.d.assign(cfg.game.thetas.size(), Rat(0));
    if (cfg.d.size() != cfg.game.thetas.size())
      throw Error(ErrorKind::ValidationError, "d must have one entry per type");
    if (cfg.variant == "monetary-policy") {
      for (const char* req : {"x1", "x2", "y1", "y2"})
        if (!g.contains(req))
          throw Error(ErrorKind::ValidationError,
                      std::string("monetary-policy needs '") + req + "'");
      cfg.x1 = detail::rat_from_json(g["x1"], "x1");
      cfg.x2 = detail::rat_from_json(g["x2"], "x2");
      cfg.y1 = detail::rat_from_json(g["y1"], "y1");
      cfg.y2 = detail::rat_from_json(g["y2"], "y2");
    }
    if (cfg.is_sequential()) {
      for (const char* req : {"prior", "delta", "gamma"})
        if (!g.contains(req))
          throw Error(ErrorKind::ValidationError,
                      std::string("trust-sequential needs '") + req + "'");
      cfg.game.validate();
    } else {
      cfg.general_game().validate();
    }
  }

  if (doc.contains("experiment")) {
    const auto& e = doc["experiment"];
    detail::reject_unknown(e, "experiment",
                           {"n_paths", "horizon", "seed0", "traces"});
    detail::read_int(e, "n_paths", cfg.experiment.n_paths);
    detail::read_int(e, "horizon", cfg.experiment.horizon);
    detail::read_int(e, "seed0", cfg.experiment.seed0);
    detail::read_int(e, "traces", cfg.experiment.traces);
    if (cfg.experiment.n_paths < 1)
      throw Error(ErrorKind::ValidationError, "n_paths must be >= 1");
    if (cfg.experiment.horizon < 0)
      throw Error(ErrorKind::ValidationError, "horizon must be >= 0");
  }
  if (doc.contains("audit")) {
    const auto& a = doc["audit"];
    detail::reject_unknown(a, "audit",
                           {"depth", "n_sampled", "sample_depth", "max_len",
                            "tol", "kl_eps", "eps_mean", "eps_path",
                            "allow_delta_low"});
    detail::read_int(a, "depth", cfg.audit.depth);
    detail::read_int(a, "n_sampled", cfg.audit.n_sampled);
    detail::read_int(a, "sample_depth", cfg.audit.sample_depth);
    detail::read_int(a, "max_len", cfg.audit.max_len);
    detail::read_double(a, "tol", cfg.audit.tol);
    detail::read_double(a, "kl_eps", cfg.audit.kl_eps);
    detail::read_double(a, "eps_mean", cfg.audit.eps_mean);
    detail::read_double(a, "eps_path", cfg.audit.eps_path);
    detail::read_bool(a, "allow_delta_low", cfg.audit.allow_delta_low);
  }
  if (doc.contains("output")) {
    const auto& o = doc["output"];
    detail::reject_unknown(o, "output", {"dir", "format"});
    detail::read_string(o, "dir", cfg.output.dir);
    detail::read_string(o, "format", cfg.output.format);
    if (cfg.output.format != "json" && cfg.output.format != "csv" &&
        cfg.output.format != "both")
      throw Error(ErrorKind::ValidationError,
                  "format must be json, csv, or both");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Deterministic JSON emission: fixed key order, doubles at 17 significant
// digits so every number round-trips losslessly and output is byte-stable.

class JsonWriter {
 public:
  void begin_object() { open('{'); }
  void end_object() { close('}'); }
  void begin_array() { open('['); }
  void end_array() { close(']'); }

  void key(const std::string& k) {
    comma();
    append_string(k);
    s_ += ':';
    pending_ = true;
  }

  void value(double x) {
    comma();
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    s_ += buf;
  }
  void value(long long x) { comma(); s_ += std::to_string(x); }
  void value(std::uint64_t x) { comma(); s_ += std::to_string(x); }
  void value(int x) { value(static_cast<long long>(x)); }
  void value(bool b) { comma(); s_ += b ? "true" : "false"; }
  void value(const std::string& s) { comma(); append_string(s); }
  void value(const char* s) { value(std::string(s)); }
  void value(const Rat& r) {  // exact: "num/den" string
    value(numerator(r).str() + "/" + denominator(r).str());
  }

  void kv(const std::string& k, double x) { key(k); value(x); }
  void kv(const std::string& k, long long x) { key(k); value(x); }
  void kv(const std::string& k, std::uint64_t x) { key(k); value(x); }
  void kv(const std::string& k, int x) { key(k); value(x); }
  void kv(const std::string& k, bool b) { key(k); value(b); }
  void kv(const std::string& k, const std::string& s) { key(k); value(s); }
  void kv(const std::string& k, const char* s) { key(k); value(s); }
  // A rational is emitted twice: exact string and 17-digit double.
  void kv_rat(const std::string& k, const Rat& r) {
    key(k + "_exact");
    value(r);
    key(k);
    value(to_double(r));
  }

  const std::string& str() const { return s_; }

 private:
  void open(char c) {
    comma();
    s_ += c;
    first_ = true;
  }
  void close(char c) {
    s_ += c;
    first_ = false;
  }
  void comma() {
    if (pending_) {
      pending_ = false;
      return;
    }
    if (!first_ && !s_.empty()) s_ += ',';
    first_ = false;
  }
  void append_string(const std::string& v) {
    s_ += '"';
    for (char c : v) {
      switch (c) {
        case '"': s_ += "\\\""; break;
        case '\\': s_ += "\\\\"; break;
        case '\n': s_ += "\\n"; break;
        case '\t': s_ += "\\t"; break;
        case '\r': s_ += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            s_ += buf;
          } else {
            s_ += c;
          }
      }
    }
    s_ += '"';
  }

  std::string s_;
  bool first_ = true;
  bool pending_ = false;
};

// --- section writers --------------------------------------------------------

inline void write_payoff_table(JsonWriter& w, const GameSpec& spec) {
  Rat gs = spec.gstar();
  w.begin_array();
  for (std::size_t j = 0; j < spec.m(); ++j) {
    w.begin_object();
    w.kv("type", static_cast<long long>(j));
    w.kv_rat("theta", spec.thetas[j]);
    w.kv_rat("v_commitment", stackelberg_payoff(spec.thetas[j], gs));
    w.kv_rat("v_star", v_star(spec.thetas[j], spec.thetas[0], gs));
    if (spec.gamma > 0) {
      ValueWeights<Rat> vw = v_weights(spec.thetas[0], spec.gamma);
      w.kv_rat("v_gamma", vw.pH * (1 - spec.thetas[j]) + vw.pL);
    }
    w.end_object();
  }
  w.end_array();
}

inline void write_constants(JsonWriter& w, const DerivedConstants& cc) {
  w.begin_object();
  w.kv_rat("gamma_star", cc.gstar);
  w.kv("n_hat", cc.n_hat.str());
  w.kv("k_hat", cc.k_hat.str());
  w.kv("n", cc.n.str());
  w.kv("k", cc.k.str());
  w.kv_rat("gamma_hat", cc.gamma_hat);
  w.kv_rat("gamma_tilde", cc.gamma_tilde);
  w.kv_rat("eta_star", cc.eta_star);
  w.kv_rat("lambda", cc.lambda);
  w.kv("growth_log_margin", cc.a8_margin);
  w.key("k_j");
  w.begin_array();
  for (long long k : cc.kj) w.value(k);
  w.end_array();
  w.kv("K", cc.Kcap);
  w.kv("T", cc.T);
  w.kv("S", cc.S);
  w.kv("t_clamp", cc.t_clamp);
  w.kv("N", cc.Ncap);
  w.kv("M", cc.Mcap);
  w.kv_rat("Y", cc.Y);
  w.kv("trust_run_ok", cc.a2_ok);
  w.kv("patience_ok", cc.a25_ok);
  w.kv("delta_ok", cc.delta_ok());
  w.kv("delta_failure", cc.delta_failure);
  w.kv("delta_threshold", cc.delta_threshold);
  w.end_object();
}

inline void write_stats(JsonWriter& w, const ExperimentStats& st) {
  w.begin_object();
  w.kv("n_paths", st.n_paths);
  w.kv("horizon", st.horizon);
  w.kv("seed0", st.seed0);
  w.key("per_type");
  w.begin_array();
  for (const TypeStats& ts : st.per_type) {
    w.begin_object();
    w.kv("type", static_cast<long long>(ts.type));
    w.kv("mean_payoff", ts.mean_payoff);
    w.kv("se_payoff", ts.se_payoff);
    w.kv("alpha_N", ts.aN);
    w.kv("alpha_H", ts.aH);
    w.kv("alpha_L", ts.aL);
    w.kv("mean_absorption", ts.mean_absorption);
    w.kv("se_absorption", ts.se_absorption);
    w.kv("max_class2", ts.max_class2);
    w.kv("eta_hit_frac", ts.eta_hit_frac);
    w.kv("mean_kl", ts.mean_kl);
    w.kv("se_kl", ts.se_kl);
    w.kv("not_absorbed", ts.not_absorbed);
    w.kv("degraded_paths", ts.degraded_paths);
    w.key("class2_histogram");
    w.begin_object();
    for (const auto& [count, paths] : ts.class2_histogram)
      w.kv(std::to_string(count), paths);
    w.end_object();
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline void write_audit(JsonWriter& w, const AuditReport& rep) {
  w.begin_object();
  w.kv("all_pass", rep.all_pass());
  w.key("checks");
  w.begin_array();
  for (const AuditCheck& c : rep.checks) {
    w.begin_object();
    w.kv("name", c.name);
    w.kv("claim", c.claim);
    w.kv("examined", c.examined);
    w.kv("worst_slack", c.worst_slack);
    w.kv("tolerance", c.tolerance);
    w.kv("pass", c.pass);
    w.kv("skipped", c.skipped);
    w.kv("note", c.note);
    w.key("witnesses");
    w.begin_array();
    for (const std::string& s : c.witnesses) w.value(s);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
}

inline void write_config_echo(JsonWriter& w, const RunConfig& cfg) {
  w.begin_object();
  w.kv("schema", kSchemaVersion);
  w.kv("variant", cfg.variant);
  if (cfg.variant != "general") {
    w.key("game");
    w.begin_object();
    w.kv_rat("b", cfg.game.b);
    w.kv_rat("c", cfg.game.c);
    w.key("thetas");
    w.begin_array();
    for (const Rat& t : cfg.game.thetas) w.value(to_double(t));
    w.end_array();
    if (!cfg.game.prior.empty()) {
      w.key("prior");
      w.begin_array();
      for (const Rat& t : cfg.game.prior) w.value(to_double(t));
      w.end_array();
    }
    if (cfg.game.delta > 0) w.kv_rat("delta", cfg.game.delta);
    if (cfg.game.gamma > 0) w.kv_rat("gamma", cfg.game.gamma);
    w.end_object();
  }
  w.key("experiment");
  w.begin_object();
  w.kv("n_paths", cfg.experiment.n_paths);
  w.kv("horizon", cfg.experiment.horizon);
  w.kv("seed0", cfg.experiment.seed0);
  w.kv("traces", cfg.experiment.traces);
  w.end_object();
  w.key("audit");
  w.begin_object();
  w.kv("depth", cfg.audit.depth);
  w.kv("n_sampled", cfg.audit.n_sampled);
  w.kv("sample_depth", cfg.audit.sample_depth);
  w.kv("max_len", cfg.audit.max_len);
  w.kv("tol", cfg.audit.tol);
  w.kv("kl_eps", cfg.audit.kl_eps);
  w.kv("eps_mean", cfg.audit.eps_mean);
  w.kv("eps_path", cfg.audit.eps_path);
  w.kv("allow_delta_low", cfg.audit.allow_delta_low);
  w.end_object();
  w.key("output");
  w.begin_object();
  w.kv("dir", cfg.output.dir);
  w.kv("format", cfg.output.format);
  w.end_object();
  w.end_object();
}

// --- CSV emitters ------------------------------------------------------------

namespace detail {

inline std::string csv_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace detail

inline std::string stats_csv(const ExperimentStats& st) {
  std::string out =
      "type,n_paths,mean_payoff,se_payoff,alpha_N,alpha_H,alpha_L,"
      "mean_absorption,se_absorption,max_class2,eta_hit_frac,mean_kl,se_kl,"
      "not_absorbed,degraded_paths\n";
  for (const TypeStats& ts : st.per_type) {
    out += std::to_string(ts.type) + "," + std::to_string(ts.n_paths) + "," +
           detail::csv_num(ts.mean_payoff) + "," +
           detail::csv_num(ts.se_payoff) + "," + detail::csv_num(ts.aN) + "," +
           detail::csv_num(ts.aH) + "," + detail::csv_num(ts.aL) + "," +
           detail::csv_num(ts.mean_absorption) + "," +
           detail::csv_num(ts.se_absorption) + "," +
           std::to_string(ts.max_class2) + "," +
           detail::csv_num(ts.eta_hit_frac) + "," +
           detail::csv_num(ts.mean_kl) + "," + detail::csv_num(ts.se_kl) +
           "," + std::to_string(ts.not_absorbed) + "," +
           std::to_string(ts.degraded_paths) + "\n";
  }
  return out;
}

inline std::string trace_csv(const Trace& tr, std::size_t m) {
  std::string out = "period,outcome,eta,class,pN,pH,pL";
  for (std::size_t j = 0; j < m; ++j)
    out += ",h_prob_" + std::to_string(j);
  out += "\n";
  for (std::size_t t = 0; t < tr.records.size(); ++t) {
    const TraceRecord& r = tr.records[t];
    out += std::to_string(t);
    out += ',';
    out += outcome_char(r.outcome);
    out += ',';
    out += detail::csv_num(r.eta);
    out += ',';
    out += hist_class_name(r.cls);
    out += ',';
    out += detail::csv_num(r.pN);
    out += ',';
    out += detail::csv_num(r.pH);
    out += ',';
    out += detail::csv_num(r.pL);
    for (std::size_t j = 0; j < m; ++j) {
      out += ',';
      out += detail::csv_num(j < r.h_prob.size() ? r.h_prob[j] : 0.0);
    }
    out += '\n';
  }
  return out;
}

// Machine-readable error object (emitted on any nonzero exit).
inline std::string error_json(const Error& e) {
  JsonWriter w;
  w.begin_object();
  w.kv("error", error_kind_name(e.kind()));
  w.kv("message", e.what());
  w.end_object();
  return w.str();
}

}  // namespace reputeq

#endif  // REPUTEQ_IO_HPP
