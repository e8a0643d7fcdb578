// Acceptance gate: one pass/fail line per criterion, exit 1 on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "reputeq/audit.hpp"
#include "reputeq/constants.hpp"
#include "reputeq/equilibrium.hpp"
#include "reputeq/game.hpp"
#include "reputeq/io.hpp"
#include "reputeq/lp.hpp"
#include "reputeq/rational.hpp"
#include "reputeq/simulate.hpp"

namespace {

struct CriterionFailure {};

// Always-on requirement: never compiled out in Release.
#define EXPECT(cond, msg)                                                   \
  do {                                                                      \
    if (!(cond)) {                                                          \
      std::fprintf(stderr, "  FAIL %s:%d %s\n", __FILE__, __LINE__, (msg)); \
      throw CriterionFailure{};                                             \
    }                                                                       \
  } while (0)

int g_failures = 0;

void criterion(int n, const char* title, const std::function<void()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  try {
    body();
  } catch (const CriterionFailure&) {
    ok = false;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "  FAIL unexpected exception: %s\n", e.what());
    ok = false;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0).count();
  if (!ok) ++g_failures;
  std::printf("CRITERION %d: %s  (%s, %.2fs)\n", n, ok ? "PASS" : "FAIL",
              title, secs);
  std::fflush(stdout);
}

using namespace reputeq;

GameSpec canonical() {
  GameSpec g;
  g.b = 1;
  g.c = 1;
  g.thetas = {Rat(1, 5), Rat(1, 2)};
  g.prior = {Rat(9, 10), Rat(1, 10)};
  g.delta = Rat(99, 100);
  g.gamma = Rat(3, 5);
  return g;
}

GameSpec three_type() {
  GameSpec g;
  g.b = 1;
  g.c = 1;
  g.thetas = {Rat(1, 5), Rat(7, 20), Rat(1, 2)};
  g.prior = {Rat(4, 5), Rat(1, 10), Rat(1, 10)};
  g.delta = Rat(199, 200);
  g.gamma = Rat(13, 25);
  return g;
}

const AuditCheck& find_check(const AuditReport& r, const std::string& name) {
  for (const AuditCheck& c : r.checks)
    if (c.name == name) return c;
  EXPECT(false, ("missing audit check: " + name).c_str());
  static AuditCheck dummy;
  return dummy;
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// --- negative-control fixtures (criterion 14) --------------------------------

struct BeliefBump {
  DefaultModel<double> base;
  explicit BeliefBump(Params<double> p) : base(std::move(p)) {}
  const Params<double>& params() const { return base.params(); }
  Prescription<double> prescribe(const EqState<double>& st) const {
    return base.prescribe(st);
  }
  EqState<double> transition(const EqState<double>& st, Outcome y) const {
    EqState<double> nx = base.transition(st, y);
    if (y == Outcome::H && nx.cls != HistClass::Punish && nx.eta < 0.999)
      nx.eta += 1e-3;
    return nx;
  }
};

struct ValueBump {
  DefaultModel<double> base;
  explicit ValueBump(Params<double> p) : base(std::move(p)) {}
  const Params<double>& params() const { return base.params(); }
  Prescription<double> prescribe(const EqState<double>& st) const {
    return base.prescribe(st);
  }
  EqState<double> transition(const EqState<double>& st, Outcome y) const {
    EqState<double> nx = base.transition(st, y);
    if (nx.cls != HistClass::Punish) nx.pH += 1e-3;
    return nx;
  }
};

struct TrustAtPunish {
  DefaultModel<double> base;
  explicit TrustAtPunish(Params<double> p) : base(std::move(p)) {}
  const Params<double>& params() const { return base.params(); }
  Prescription<double> prescribe(const EqState<double>& st) const {
    if (st.cls == HistClass::Punish) {
      Prescription<double> pr;
      pr.buyer_trusts = true;
      pr.h_prob.assign(base.params().m, 0.0);
      pr.tight.assign(base.params().m, Tight::StrictL);
      pr.agg_H = 0.0;
      return pr;
    }
    return base.prescribe(st);
  }
  EqState<double> transition(const EqState<double>& st, Outcome y) const {
    return base.transition(st, y);
  }
};

}  // namespace

int main() {
  GameSpec g = canonical();
  DerivedConstants cc = derive_constants(g);

  // Heavy shared work: the 1e5-path canonical experiment (criteria 6 and 8)
  // and the delta sweep are run inside their criteria so each is timed.
  ExperimentStats big;  // filled by criterion 6, reused by 8 and 12

  criterion(1, "payoff bound: closed form vs LP vs grid oracle", [&] {
    auto t0 = std::chrono::steady_clock::now();
    Rat gs(1, 2), th1(1, 5), th2(1, 2);
    EXPECT(v_star(th1, th1, gs) == Rat(4, 5), "v*_1 != 0.8");
    EXPECT(v_star(th2, th1, gs) == Rat(2, 3), "v*_2 != 0.666667");
    EXPECT(solve_trust_lp(th1, th1, gs).value == Rat(4, 5), "LP v_1");
    EXPECT(solve_trust_lp(th2, th1, gs).value == Rat(2, 3), "LP v_2");
    for (int j = 0; j < 2; ++j) {
      double thj = j == 0 ? 0.2 : 0.5;
      GridResult<double> gr = grid_oracle(trust_lp(thj, 0.2, 0.5), 1e-3);
      EXPECT(gr.feasible, "grid infeasible");
      double cf = j == 0 ? 0.8 : 2.0 / 3.0;
      EXPECT(std::abs(gr.value - cf) <= 5e-3, "grid oracle gap > 5e-3");
    }
    std::uint64_t rng = 2024;
    for (int i = 0; i < 100; ++i) {
      long long a = 1 + static_cast<long long>(splitmix64(rng) % 997);
      long long b = a + static_cast<long long>(splitmix64(rng) % (999 - a));
      long long c = 1 + static_cast<long long>(splitmix64(rng) % 998);
      Rat th1r(a, 1000), thjr(b, 1000), gsr(c, 1000);
      Rat cf = v_star(thjr, th1r, gsr);
      EXPECT(solve_trust_lp(thjr, th1r, gsr).value == cf,
             "random instance: LP != closed form (exact)");
      GridResult<double> gr = grid_oracle(
          trust_lp(to_double(thjr), to_double(th1r), to_double(gsr)), 1e-3);
      EXPECT(gr.feasible, "random instance: grid infeasible");
      EXPECT(std::abs(gr.value - to_double(cf)) <= 5e-3,
             "random instance: grid oracle gap > 5e-3");
    }
    EXPECT(elapsed(t0) < 1.0, "runtime >= 1 s");
  });

  criterion(2, "lowest-type bound equals 1 - theta_1 exactly", [&] {
    std::uint64_t rng = 99;
    for (int i = 0; i < 1000; ++i) {
      long long a = 1 + static_cast<long long>(splitmix64(rng) % 99998);
      long long b = 1 + static_cast<long long>(splitmix64(rng) % 99998);
      Rat th1(a, 100000), gs(b, 100000);
      EXPECT(v_star(th1, th1, gs) == 1 - th1, "identity fails");
    }
  });

  criterion(3, "small theta_1 limit: bound near commitment payoff", [&] {
    Rat th1(1, 1000);
    std::vector<Rat> thetas = {th1, Rat(1, 4), Rat(2, 5), Rat(3, 5),
                               Rat(4, 5)};
    for (const Rat& gs : {Rat(1, 4), Rat(1, 2), Rat(3, 4)}) {
      for (const Rat& th : thetas) {
        double gap = to_double(stackelberg_payoff(th, gs) -
                               v_star(th, th1, gs));
        EXPECT(gap >= 0.0, "bound above commitment payoff");
        EXPECT(gap <= 2e-3, "gap > 2e-3");
      }
    }
  });

  criterion(4, "constants: worked values at 0.99, rejection at 0.5", [&] {
    EXPECT(cc.gstar == Rat(1, 2), "gamma* != 0.5");
    EXPECT(cc.n_hat == 4 && cc.k_hat == 7, "n^/k^ != 4/7");
    EXPECT(cc.n == 16 && cc.k == 28, "n/k != 16/28");
    EXPECT(cc.lambda == Rat(1, 10), "lambda != 0.1");
    EXPECT(cc.a8_margin > 0, "lambda margin not positive");
    EXPECT(cc.T == 3, "T != 3");
    EXPECT(cc.S == 159, "S != 159");
    EXPECT(cc.delta_ok(), "delta = 0.99 rejected");
    GameSpec bad = canonical();
    bad.delta = Rat(1, 2);
    try {
      derive_constants(bad);
      EXPECT(false, "delta = 0.5 accepted");
    } catch (const Error& e) {
      EXPECT(e.kind() == ErrorKind::DeltaTooLow, "wrong error kind");
      EXPECT(std::string(e.what()).find("patience check") != std::string::npos,
             "failure does not cite the patience condition");
    }
  });

  criterion(5, "one-shot deviation audit, double and exact", [&] {
    auto t0 = std::chrono::steady_clock::now();
    DefaultModel<double> model(make_params<double>(g, cc));
    EqState<double> init = initial_state<double>(g, cc);
    AuditReport rep =
        audit_local_ic<double>(model, init, cc, 14, 10000, 200, 12345);
    EXPECT(rep.all_pass(), "double-mode local IC audit failed");
    EXPECT(find_check(rep, "seller-indifference").worst_slack <= 1e-9,
           "indifference gap > 1e-9");
    EXPECT(find_check(rep, "seller-strict-preference").worst_slack > 0,
           "strict margin not positive");
    EXPECT(find_check(rep, "schedule-compliance").worst_slack > 0,
           "schedule margin not positive");

    DefaultModel<Rat> mr(make_params<Rat>(g, cc));
    EqState<Rat> ir = initial_state<Rat>(g, cc);
    AuditReport rx = audit_local_ic<Rat>(mr, ir, cc, 14, 0, 0, 1);
    EXPECT(rx.all_pass(), "exact-mode local IC audit failed");
    EXPECT(find_check(rx, "seller-indifference").worst_slack == 0.0,
           "exact indifference gap nonzero");

    auto states = detail::enumerate_on_path<double>(model, init, 10);
    auto extra = detail::sample_on_path(model, init, 5000, 10, 200, 7);
    states.insert(states.end(), extra.begin(), extra.end());
    AuditReport rb = audit_buyer_ic<double>(model, states);
    EXPECT(rb.all_pass(), "buyer IC audit failed");
    EXPECT(find_check(rb, "class1-unclamped-exact-threshold").worst_slack <=
               1e-12,
           "P(H) != gamma* at an unclamped Class-1 state");
    EXPECT(find_check(rb, "buyer-trust-threshold").worst_slack >= -1e-12,
           "P(H) < gamma* somewhere the buyer trusts");
    EXPECT(elapsed(t0) < 60.0, "runtime >= 60 s");
  });

  criterion(6, "promise keeping over 1e5 paths", [&] {
    auto t0 = std::chrono::steady_clock::now();
    big = run_experiment(g, cc, 100000, 920, 12345);
    const double v[2] = {0.8, 7.0 / 11.0};
    for (const TypeStats& ts : big.per_type)
      EXPECT(std::abs(ts.mean_payoff - v[ts.type]) <= 0.01,
             "mean payoff off by > 0.01");
    EXPECT(elapsed(t0) < 120.0, "runtime >= 120 s");
  });

  criterion(7, "belief martingale to 1e-9", [&] {
    DefaultModel<double> model(make_params<double>(g, cc));
    EqState<double> init = initial_state<double>(g, cc);
    auto states = detail::enumerate_on_path<double>(model, init, 10);
    auto extra = detail::sample_on_path(model, init, 5000, 10, 200, 21);
    states.insert(states.end(), extra.begin(), extra.end());
    AuditReport rep = audit_martingale<double>(model, states);
    EXPECT(rep.all_pass(), "martingale audit failed");
    EXPECT(rep.checks.front().worst_slack <= 1e-9, "|E[eta'] - eta| > 1e-9");
  });

  criterion(8, "absorption, Class-2 cap, and patience monotonicity", [&] {
    EXPECT(big.n_paths == 100000, "criterion 6 must run first");
    for (const TypeStats& ts : big.per_type) {
      EXPECT(ts.not_absorbed == 0, "a path never reached the schedule");
      EXPECT(ts.max_class2 <= cc.Mcap, "Class-2 count above the cap");
    }
    double lo_prev = -1;
    for (double dd : {0.9, 0.95, 0.99}) {
      GameSpec gs = canonical();
      gs.delta = rat_from_double(dd);
      DerivedConstants c2 = derive_constants(gs, false);
      ExperimentStats st = run_experiment(gs, c2, 10000, 1500, 555, false);
      // Pool both types, weighting by the number of paths (equal here).
      double mean = 0, se2 = 0;
      for (const TypeStats& ts : st.per_type) {
        EXPECT(ts.not_absorbed == 0, "sweep path never absorbed");
        mean += ts.mean_absorption / 2;
        se2 += ts.se_absorption * ts.se_absorption / 4;
      }
      double half = 1.96 * std::sqrt(se2);
      EXPECT(mean - half > lo_prev,
             "absorption-time CIs overlap across delta");
      lo_prev = mean + half;
    }
  });

  criterion(9, "learning budget and T(eps) reproduction", [&] {
    EXPECT(kl_time_budget(0.1, 0.01) == 231, "T(0.01, 0.1) != 231");
    ExperimentStats st = run_experiment(g, cc, 10000, 917, 12345);
    AuditReport rep = audit_kl_budget(g, st);
    EXPECT(rep.all_pass(), "KL budget audit failed");
  });

  criterion(10, "three-type frequency pins and per-path ratio bounds", [&] {
    GameSpec g3 = three_type();
    DerivedConstants c3 = derive_constants(g3);
    long long horizon = default_horizon(to_double(g3.delta));
    ExperimentStats st = run_experiment(g3, c3, 10000, horizon, 12345);
    const TypeStats& mid = st.per_type[1];
    EXPECT(std::abs(mid.aH - 4.0 / 9.0) <= 0.05, "alpha_H pin off by > 0.05");
    EXPECT(std::abs(mid.aL - 4.0 / 9.0) <= 0.05, "alpha_L pin off by > 0.05");
    EXPECT(std::abs(mid.aN - 1.0 / 9.0) <= 0.05, "alpha_N pin off by > 0.05");
    AuditReport rep = audit_frequencies(g3, c3, st);
    EXPECT(find_check(rep, "per-path-HL-ratio-lower").pass,
           "per-path lower ratio bound violated");
    const AuditCheck& hi = find_check(rep, "per-path-HL-ratio-upper");
    EXPECT(hi.pass || hi.skipped, "per-path upper ratio bound violated");
    EXPECT(find_check(rep, "middle-type-frequency-pins").pass,
           "middle-type pin audit failed");
  });

  criterion(11, "frequency inequality over all short Class-1 paths", [&] {
    auto t0 = std::chrono::steady_clock::now();
    AuditReport rep = audit_lemma_a1(g, cc, 12);
    EXPECT(rep.all_pass(), "a Class-1-maintaining sequence violates the bound");
    EXPECT(rep.checks.front().examined > 0, "nothing enumerated");
    EXPECT(elapsed(t0) < 30.0, "runtime >= 30 s");
  });

  criterion(12, "behavior witnesses: pure states and nonstationarity", [&] {
    EXPECT(big.n_paths == 100000, "criterion 6 must run first");
    AuditReport rep = audit_behavior(g, cc, big);
    EXPECT(find_check(rep, "per-type-pure-state-exists").pass,
           "a type has no pure-prescription state");
    EXPECT(find_check(rep, "per-type-nonstationary").pass,
           "a type's prescription never varies");
  });

  criterion(13, "schedule partial sums and tails on the (q, delta) grid", [&] {
    for (double q : {0.0, 0.25, 0.6, 1.0}) {
      for (double delta : {0.9, 0.99}) {
        FmSchedule<double> f(q, delta, 2 * (1 - delta));
        double partial = 0, disc = 1;
        for (int s = 1; s <= 2000; ++s) {
          EXPECT(std::abs(f.residual() - q) <= 2 * (1 - delta) + 1e-12,
                 "tail beyond 2(1-delta) of target");
          if (f.next()) partial += (1 - delta) * disc;
          disc *= delta;
          EXPECT(std::abs(q - partial) <= disc + 1e-12,
                 "partial-sum error above delta^S");
        }
      }
    }
  });

  criterion(14, "negative controls caught by their audits", [&] {
    Params<double> p = make_params<double>(g, cc);
    EqState<double> init = initial_state<double>(g, cc);
    {
      BeliefBump model(p);
      auto states = detail::enumerate_on_path<double>(model, init, 8);
      AuditReport rep = audit_martingale<double>(model, states);
      rep.merge(audit_buyer_ic<double>(model, states));
      const AuditCheck& mg = find_check(rep, "belief-martingale");
      EXPECT(!mg.pass, "belief perturbation went undetected");
      EXPECT(!mg.witnesses.empty(), "no witness state reported");
      for (const AuditCheck& c : rep.checks)
        if (c.name != "belief-martingale")
          EXPECT(c.pass || c.skipped, "belief perturbation tripped another audit");
    }
    {
      ValueBump model(p);
      AuditReport rep = audit_local_ic<double>(model, init, cc, 8, 200, 60, 5);
      const AuditCheck& ind = find_check(rep, "seller-indifference");
      EXPECT(!ind.pass, "value perturbation went undetected");
      EXPECT(!ind.witnesses.empty(), "no witness state reported");
      for (const AuditCheck& c : rep.checks)
        if (c.name != "seller-indifference")
          EXPECT(c.pass || c.skipped, "value perturbation tripped another audit");
    }
    {
      TrustAtPunish model(p);
      auto states = detail::enumerate_on_path<double>(model, init, 8);
      states.push_back(detail::punish_state<double>(p.m));
      AuditReport rep = audit_buyer_ic<double>(model, states);
      rep.merge(audit_martingale<double>(model, states));
      const AuditCheck& thr = find_check(rep, "buyer-trust-threshold");
      EXPECT(!thr.pass, "buyer IC violation went undetected");
      EXPECT(!thr.witnesses.empty(), "no witness state reported");
      for (const AuditCheck& c : rep.checks)
        if (c.name != "buyer-trust-threshold")
          EXPECT(c.pass || c.skipped, "buyer IC fixture tripped another audit");
    }
  });

  criterion(15, "capital-taxation bound matches the general LP", [&] {
    Rat cf = capital_taxation_vstar(Rat(1, 2), Rat(1, 5), Rat(1, 2));
    EXPECT(cf == Rat(25, 22), "closed form != 25/22");
    EXPECT(std::abs(to_double(cf) - 1.136364) <= 5e-7,
           "closed form != 1.136364");
    GeneralGame table =
        encode_capital_taxation({Rat(1, 5), Rat(1, 2)}, Rat(1), Rat(1));
    EXPECT(solve_general_lp<Rat>(table, 1) == cf, "general LP != closed form");
    double lp_d = solve_general_lp<double>(table, 1);
    EXPECT(std::abs(lp_d - to_double(cf)) <= 1e-12,
           "double LP off by > 1e-12");
  });

  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all 15 criteria PASS\n");
  return 0;
}
