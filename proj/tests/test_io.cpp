#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include <json.hpp>

#include "reputeq/io.hpp"

using namespace reputeq;

namespace {

const char* kCanonical = R"({
  "schema": "reputeq-1",
  "variant": "trust-sequential",
  "game": {
    "b": 1, "c": 1,
    "thetas": [0.2, 0.5],
    "prior": [0.9, 0.1],
    "delta": 0.99,
    "gamma": 0.6
  },
  "experiment": {"n_paths": 100, "horizon": 917, "seed0": 9, "traces": 2},
  "audit": {"depth": 10, "max_len": 8, "allow_delta_low": true},
  "output": {"dir": "out", "format": "both"}
})";

GameSpec canonical_spec() {
  GameSpec g;
  g.b = 1;
  g.c = 1;
  g.thetas = {Rat(1, 5), Rat(1, 2)};
  g.prior = {Rat(9, 10), Rat(1, 10)};
  g.delta = Rat(99, 100);
  g.gamma = Rat(3, 5);
  return g;
}

}  // namespace

TEST_CASE("config parsing reads every block") {
  RunConfig cfg = parse_config(kCanonical);
  CHECK(cfg.variant == "trust-sequential");
  CHECK(cfg.is_sequential());
  CHECK(cfg.game.thetas == std::vector<Rat>{Rat(1, 5), Rat(1, 2)});
  CHECK(cfg.game.prior == std::vector<Rat>{Rat(9, 10), Rat(1, 10)});
  CHECK(cfg.game.delta == Rat(99, 100));
  CHECK(cfg.game.gamma == Rat(3, 5));
  CHECK(cfg.experiment.n_paths == 100);
  CHECK(cfg.experiment.seed0 == 9);
  CHECK(cfg.experiment.traces == 2);
  CHECK(cfg.audit.depth == 10);
  CHECK(cfg.audit.max_len == 8);
  CHECK(cfg.audit.allow_delta_low);
  CHECK(cfg.audit.n_sampled == 10000);  // default preserved
  CHECK(cfg.output.dir == "out");
  CHECK(cfg.output.format == "both");
}

TEST_CASE("decimal literals become exact rationals") {
  RunConfig cfg = parse_config(R"({
    "variant": "trust-sequential",
    "game": {"b": 1, "c": 1, "thetas": ["0.2", 0.5], "prior": [0.9, 0.1],
             "delta": 0.995, "gamma": 0.52}
  })");
  CHECK(cfg.game.thetas[0] == Rat(1, 5));
  CHECK(cfg.game.thetas[1] == Rat(1, 2));
  CHECK(cfg.game.delta == Rat(199, 200));
  CHECK(cfg.game.gamma == Rat(13, 25));
}

TEST_CASE("config rejections") {
  CHECK_THROWS_AS(parse_config("{"), Error);           // malformed JSON
  CHECK_THROWS_AS(parse_config("[1,2]"), Error);       // not an object
  CHECK_THROWS_WITH(
      parse_config(R"({"schema": "reputeq-9", "variant": "trust-sequential"})"),
      Catch::Matchers::ContainsSubstring("unsupported schema"));
  CHECK_THROWS_WITH(parse_config(R"({"variant": "poker"})"),
                    Catch::Matchers::ContainsSubstring("unknown variant"));
  CHECK_THROWS_WITH(parse_config(R"({"varaint": "general"})"),
                    Catch::Matchers::ContainsSubstring("unknown key"));
  // Unknown key nested in a block.
  CHECK_THROWS_WITH(
      parse_config(R"({"variant": "trust-sequential",
        "game": {"b":1,"c":1,"thetas":[0.2],"prior":[1],"delta":0.99,
                 "gamma":0.6,"bogus":1}})"),
      Catch::Matchers::ContainsSubstring("unknown key 'bogus'"));
  // Missing required field for the sequential variant.
  CHECK_THROWS_WITH(
      parse_config(R"({"variant": "trust-sequential",
        "game": {"b":1,"c":1,"thetas":[0.2,0.5],"prior":[0.9,0.1],
                 "delta":0.99}})"),
      Catch::Matchers::ContainsSubstring("needs 'gamma'"));
  // Invalid output format.
  CHECK_THROWS_WITH(
      parse_config(R"({"variant": "capital-taxation",
        "game": {"b":1,"c":1,"thetas":[0.2,0.5]},
        "output": {"format": "xml"}})"),
      Catch::Matchers::ContainsSubstring("format must be"));
}

TEST_CASE("general variant parses a payoff table") {
  RunConfig cfg = parse_config(R"({
    "variant": "general",
    "general": {
      "a1_names": ["top", "bottom"],
      "a2_names": ["in", "out"],
      "u1": [[[0.8, 0], [1, 0]], [[0.5, 0], [1, 0]]],
      "u2": [[1, 0], [-1, 0]]
    }
  })");
  CHECK(cfg.general.n_types() == 2);
  CHECK(cfg.general.n_a1() == 2);
  CHECK(cfg.general.u1[0][0][0] == Rat(4, 5));
  CHECK(cfg.general.type_names[0] == "theta_1");  // auto-filled
  GeneralGame table = cfg.general_game();
  CHECK(check_assumptions(table).all_ok());
}

TEST_CASE("json writer emits stable, lossless documents") {
  JsonWriter w;
  w.begin_object();
  w.kv("name", "quote\"and\\slash\n");
  w.kv("third", 1.0 / 3.0);
  w.kv("count", static_cast<long long>(42));
  w.kv("flag", true);
  w.kv_rat("ratio", Rat(2, 7));
  w.key("list");
  w.begin_array();
  w.value(1.5);
  w.value("x");
  w.end_array();
  w.end_object();

  nlohmann::json doc = nlohmann::json::parse(w.str());
  CHECK(doc["name"] == "quote\"and\\slash\n");
  CHECK(doc["third"].get<double>() == 1.0 / 3.0);  // 17 digits round-trip
  CHECK(doc["count"] == 42);
  CHECK(doc["flag"] == true);
  CHECK(doc["ratio_exact"] == "2/7");
  CHECK(doc["ratio"].get<double>() == to_double(Rat(2, 7)));
  CHECK(doc["list"][0] == 1.5);

  JsonWriter w2;
  w2.begin_object();
  w2.kv("name", "quote\"and\\slash\n");
  w2.kv("third", 1.0 / 3.0);
  w2.kv("count", static_cast<long long>(42));
  w2.kv("flag", true);
  w2.kv_rat("ratio", Rat(2, 7));
  w2.key("list");
  w2.begin_array();
  w2.value(1.5);
  w2.value("x");
  w2.end_array();
  w2.end_object();
  CHECK(w.str() == w2.str());  // byte-identical re-emission
}

TEST_CASE("payoff table and constants sections are valid JSON") {
  GameSpec g = canonical_spec();
  DerivedConstants cc = derive_constants(g);
  JsonWriter w;
  w.begin_object();
  w.key("payoff_table");
  write_payoff_table(w, g);
  w.key("constants");
  write_constants(w, cc);
  w.end_object();
  nlohmann::json doc = nlohmann::json::parse(w.str());
  CHECK(doc["payoff_table"].size() == 2);
  CHECK(doc["payoff_table"][0]["v_star_exact"] == "4/5");
  CHECK(doc["payoff_table"][1]["v_star_exact"] == "2/3");
  CHECK(doc["payoff_table"][1]["v_gamma_exact"] == "7/11");
  CHECK(doc["constants"]["n_hat"] == "4");
  CHECK(doc["constants"]["k_hat"] == "7");
  CHECK(doc["constants"]["T"] == 3);
  CHECK(doc["constants"]["S"] == 159);
  CHECK(doc["constants"]["delta_ok"] == true);
}

TEST_CASE("stats and trace CSV emitters") {
  GameSpec g = canonical_spec();
  DerivedConstants cc = derive_constants(g);
  ExperimentStats st = run_experiment(g, cc, 50, 917, 12345);
  std::string csv = stats_csv(st);
  CHECK(csv.rfind("type,n_paths,mean_payoff,se_payoff,alpha_N,alpha_H,"
                  "alpha_L,mean_absorption,se_absorption,max_class2,"
                  "eta_hit_frac,mean_kl,se_kl,not_absorbed,degraded_paths\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 types

  Params<double> p = make_params<double>(g, cc);
  EqState<double> init = initial_state<double>(g, cc);
  Trace tr = simulate_path(p, init, 0, 42, 20);
  std::string tcsv = trace_csv(tr, 2);
  CHECK(tcsv.rfind("period,outcome,eta,class,pN,pH,pL,h_prob_0,h_prob_1\n",
                   0) == 0);
  CHECK(std::count(tcsv.begin(), tcsv.end(), '\n') == 21);
  CHECK(tcsv.find("Class1") != std::string::npos);
}

TEST_CASE("error objects serialize kind and message") {
  Error e(ErrorKind::DeltaTooLow, "too impatient");
  nlohmann::json doc = nlohmann::json::parse(error_json(e));
  CHECK(doc["error"] == "DeltaTooLow");
  CHECK(doc["message"].get<std::string>().find("too impatient") !=
        std::string::npos);
}
