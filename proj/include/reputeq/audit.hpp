#ifndef REPUTEQ_AUDIT_HPP
#define REPUTEQ_AUDIT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "reputeq/constants.hpp"
#include "reputeq/equilibrium.hpp"
#include "reputeq/errors.hpp"
#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"
#include "reputeq/simulate.hpp"

namespace reputeq {

struct AuditCheck {
  std::string name;
  std::string claim;          // plain-language statement of what is verified
  long long examined = 0;     // states / paths / sequences inspected
  double worst_slack = 0;     // signed; orientation given in claim
  double tolerance = 0;
  bool pass = false;
  bool skipped = false;
  std::string note;
  std::vector<std::string> witnesses;  // failing states (capped)
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool all_pass() const {
    for (const AuditCheck& c : checks)
      if (!c.pass && !c.skipped) return false;
    return true;
  }
  void merge(const AuditReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
};

// The plain construction as a model; audits are templated on the model so
// test fixtures can wrap it with deliberate corruptions.
template <class S>
struct DefaultModel {
  Params<S> p;
  explicit DefaultModel(Params<S> pp) : p(std::move(pp)) {}
  const Params<S>& params() const { return p; }
  Prescription<S> prescribe(const EqState<S>& st) const {
    return reputeq::prescribe(p, st);
  }
  EqState<S> transition(const EqState<S>& st, Outcome y) const {
    return reputeq::transition(p, st, y);
  }
};

namespace detail {

template <class S>
std::string describe_state(const EqState<S>& st) {
  std::ostringstream os;
  os << hist_class_name(st.cls) << " eta=" << to_double(st.eta)
     << " pN=" << to_double(st.pN) << " pH=" << to_double(st.pH)
     << " pL=" << to_double(st.pL) << " bar=" << st.bar_theta
     << " l=" << st.l;
  return os.str();
}

constexpr std::size_t kWitnessCap = 8;

inline void add_witness(AuditCheck& c, const std::string& w) {
  if (c.witnesses.size() < kWitnessCap) c.witnesses.push_back(w);
}

// All on-path states reachable within `depth` transitions of init.
template <class S, class Model>
std::vector<EqState<S>> enumerate_on_path(const Model& model,
                                          const EqState<S>& init,
                                          long long depth) {
  std::vector<EqState<S>> out, frontier{init};
  for (long long d = 0; d < depth && !frontier.empty(); ++d) {
    std::vector<EqState<S>> next;
    for (const EqState<S>& st : frontier) {
      out.push_back(st);
      if (st.cls == HistClass::Punish) continue;
      if (st.cls == HistClass::Class3) {
        Prescription<S> pr = model.prescribe(st);
        next.push_back(
            model.transition(st, pr.buyer_trusts ? Outcome::H : Outcome::N));
        continue;
      }
      Prescription<S> pr = model.prescribe(st);
      if (pr.agg_H > 0) next.push_back(model.transition(st, Outcome::H));
      if (pr.agg_H < 1) next.push_back(model.transition(st, Outcome::L));
    }
    frontier = std::move(next);
  }
  for (EqState<S>& st : frontier) out.push_back(std::move(st));
  return out;
}

// Random on-path states at depths stratified over (depth_lo, depth_hi].
template <class Model>
std::vector<EqState<double>> sample_on_path(const Model& model,
                                            const EqState<double>& init,
                                            long long n, long long depth_lo,
                                            long long depth_hi,
                                            std::uint64_t seed) {
  std::vector<EqState<double>> out;
  if (depth_hi <= depth_lo) return out;
  std::uint64_t rng = seed;
  for (long long i = 0; i < n; ++i) {
    long long target = depth_lo + 1 + i % (depth_hi - depth_lo);
    EqState<double> st = init;
    for (long long t = 0; t < target; ++t) {
      if (st.cls == HistClass::Punish) break;
      Prescription<double> pr = model.prescribe(st);
      Outcome y;
      if (st.cls == HistClass::Class3) {
        y = pr.buyer_trusts ? Outcome::H : Outcome::N;
      } else {
        y = uniform01(rng) < pr.agg_H ? Outcome::H : Outcome::L;
      }
      st = model.transition(st, y);
    }
    out.push_back(std::move(st));
  }
  return out;
}

template <class S>
struct audit_traits {
  static double indiff_tol() { return 0; }
  static double strict_tol() { return 0; }
};
template <>
struct audit_traits<double> {
  static double indiff_tol() { return 1e-9; }
  static double strict_tol() { return 1e-12; }
};

// Stage payoff of the seller of the given type under outcome y.
template <class S>
S stage_u(const Params<S>& p, std::size_t type, Outcome y) {
  if (y == Outcome::N) return S(0);
  if (y == Outcome::H) return 1 - p.thetas[type];
  return S(1);
}

}  // namespace detail

// One-shot deviation audit: at every enumerated/sampled on-path state, each
// supported type's payoff from playing H vs L this period (then conforming)
// is compared against the tightness tag the construction claims.
template <class S, class Model>
AuditReport audit_local_ic(const Model& model, const EqState<S>& init,
                           const DerivedConstants& cc,
                           long long depth_exhaustive = 14,
                           long long n_sampled = 10000,
                           long long sample_depth = 200,
                           std::uint64_t seed = 1) {
  const Params<S>& p = model.params();
  std::vector<EqState<S>> states =
      detail::enumerate_on_path<S>(model, init, depth_exhaustive);
  if constexpr (std::is_same_v<S, double>) {
    auto extra = detail::sample_on_path(model, init, n_sampled,
                                        depth_exhaustive, sample_depth, seed);
    states.insert(states.end(), extra.begin(), extra.end());
  }

  const double itol = detail::audit_traits<S>::indiff_tol();
  const double stol = detail::audit_traits<S>::strict_tol();
  AuditCheck ind{"seller-indifference",
                 "at states tagged indifferent, one-shot H and L payoffs "
                 "agree; slack = max |gap|",
                 0, 0, itol, true, false, "", {}};
  AuditCheck strict{"seller-strict-preference",
                    "at states tagged strict, the preferred action's margin "
                    "is positive; slack = min margin",
                    0, 1e300, stol, true, false, "", {}};
  AuditCheck c3{"schedule-compliance",
                "in high-value schedule periods, conforming beats deviating "
                "to L (which triggers punishment); slack = min margin",
                0, 1e300, stol, true, false, "", {}};
  AuditCheck efloor{"eta-floor",
                    "posterior on the lowest type stays at or above eta* at "
                    "every active-learning state; slack = min(eta - eta*)",
                    0, 1e300, -stol, true, false, "", {}};
  AuditCheck order{"lowest-type-plays-H-most",
                   "the lowest-cost type's prescribed H-probability is >= "
                   "every other supported type's; slack = min difference",
                   0, 1e300, -stol, true, false, "", {}};
  AuditCheck phlow{"pH-weight-lower-bound",
                   "the H-vector weight stays above its designed floor at "
                   "active-learning states; slack = min(pH - floor)",
                   0, 1e300, -stol, true, false, "", {}};
  const double ph_floor =
      to_double(cc.Y) / std::pow(2.0, static_cast<double>(cc.Mcap));

  const S one_minus_d = 1 - p.delta;
  for (const EqState<S>& st : states) {
    if (st.cls == HistClass::Punish) continue;
    // Promise-budget shortfalls only occur below the construction's real
    // delta threshold; the engine completes such paths with a documented
    // fallback whose states are outside the audited construction.
    if (st.degraded) continue;
    Prescription<S> pr = model.prescribe(st);
    if (st.cls == HistClass::Class3) {
      bool high = pr.buyer_trusts;
      if (!high) continue;
      EqState<S> nx = model.transition(st, Outcome::H);
      ++c3.examined;
      for (std::size_t j = 0; j < p.m; ++j) {
        S on = one_minus_d * (1 - p.thetas[j]) + p.delta * nx.value(p, j);
        S margin = on - one_minus_d * 1;  // deviation: L now, then value 0
        double mg = to_double(margin);
        if (mg < c3.worst_slack) c3.worst_slack = mg;
        if (!(mg > stol)) {
          c3.pass = false;
          detail::add_witness(c3, detail::describe_state(st) + " type=" +
                                      std::to_string(j));
        }
      }
      continue;
    }
    // Class 1 / Class 2.
    EqState<S> nxH = model.transition(st, Outcome::H);
    EqState<S> nxL = model.transition(st, Outcome::L);
    ++ind.examined;
    ++strict.examined;
    ++efloor.examined;
    ++phlow.examined;
    {
      double s = to_double(st.eta) - to_double(p.eta_star);
      if (s < efloor.worst_slack) efloor.worst_slack = s;
      if (s < -stol) {
        efloor.pass = false;
        detail::add_witness(efloor, detail::describe_state(st));
      }
      double ph = to_double(st.pH) - ph_floor;
      if (ph < phlow.worst_slack) phlow.worst_slack = ph;
      if (ph < -stol) {
        phlow.pass = false;
        detail::add_witness(phlow, detail::describe_state(st));
      }
    }
    if (st.cls == HistClass::Class1) {
      ++order.examined;
      for (std::size_t j = 1; j < p.m; ++j) {
        if (!st.support[j]) continue;
        double d0 = to_double(pr.h_prob[0]) - to_double(pr.h_prob[j]);
        if (d0 < order.worst_slack) order.worst_slack = d0;
        if (d0 < -stol) {
          order.pass = false;
          detail::add_witness(order, detail::describe_state(st));
        }
      }
    }
    for (std::size_t j = 0; j < p.m; ++j) {
      if (!st.support[j]) continue;
      S vH = one_minus_d * (1 - p.thetas[j]) + p.delta * nxH.value(p, j);
      S vL = one_minus_d * 1 + p.delta * nxL.value(p, j);
      S gap = vH - vL;
      double g = to_double(gap);
      switch (pr.tight[j]) {
        case Tight::Indifferent: {
          double a = std::abs(g);
          if (a > ind.worst_slack) ind.worst_slack = a;
          bool ok;
          if constexpr (std::is_same_v<S, double>) ok = a <= itol;
          else ok = gap == 0;
          if (!ok) {
            ind.pass = false;
            detail::add_witness(ind, detail::describe_state(st) + " type=" +
                                         std::to_string(j) + " gap=" +
                                         std::to_string(g));
          }
          break;
        }
        case Tight::StrictH:
        case Tight::StrictL: {
          double margin = pr.tight[j] == Tight::StrictH ? g : -g;
          if (margin < strict.worst_slack) strict.worst_slack = margin;
          if (!(margin > stol)) {
            strict.pass = false;
            detail::add_witness(strict, detail::describe_state(st) +
                                            " type=" + std::to_string(j) +
                                            " margin=" +
                                            std::to_string(margin));
          }
          break;
        }
      }
    }
  }
  if (strict.examined == 0 || strict.worst_slack == 1e300)
    strict.worst_slack = 0;
  if (c3.worst_slack == 1e300) c3.worst_slack = 0;
  if (efloor.worst_slack == 1e300) efloor.worst_slack = 0;
  if (order.worst_slack == 1e300) order.worst_slack = 0;
  if (phlow.worst_slack == 1e300) phlow.worst_slack = 0;
  phlow.note = "floor = Y / 2^M = " + std::to_string(ph_floor);

  AuditReport rep;
  rep.checks = {ind, strict, c3, efloor, order, phlow};
  return rep;
}

// Buyer's incentive to trust: aggregate P(H) >= gamma* wherever she trusts,
// with equality at unclamped Class-1 states, and the Class-2 L-mass cap.
template <class S, class Model>
AuditReport audit_buyer_ic(const Model& model,
                           const std::vector<EqState<S>>& states) {
  const Params<S>& p = model.params();
  const double tol = 1e-12;
  AuditCheck thr{"buyer-trust-threshold",
                 "P(H) >= gamma* at every state where the buyer trusts; "
                 "slack = min(P(H) - gamma*)",
                 0, 1e300, -tol, true, false, "", {}};
  AuditCheck eq{"class1-unclamped-exact-threshold",
                "P(H) equals gamma* exactly at unclamped Class-1 states; "
                "slack = max |P(H) - gamma*|",
                0, 0, tol, true, false, "", {}};
  AuditCheck lcap{"class2-L-mass-cap",
                  "P(L) <= 1 - gamma* at Class-2 states; slack = max(P(L) - "
                  "(1 - gamma*))",
                  0, -1e300, tol, true, false, "", {}};
  const double gs = to_double(p.gstar);
  for (const EqState<S>& st : states) {
    Prescription<S> pr;
    try {
      pr = model.prescribe(st);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::StateOffPath) continue;  // buyer plays N
      throw;
    }
    if (!pr.buyer_trusts) continue;
    ++thr.examined;
    double ph = to_double(pr.agg_H);
    double s = ph - gs;
    if (s < thr.worst_slack) thr.worst_slack = s;
    if (s < -tol) {
      thr.pass = false;
      detail::add_witness(thr, detail::describe_state(st) +
                                   " P(H)=" + std::to_string(ph));
    }
    if (st.cls == HistClass::Class1 &&
        !detail::class1_maps(p, st.eta).clamped) {
      ++eq.examined;
      double a = std::abs(s);
      if (a > eq.worst_slack) eq.worst_slack = a;
      if (a > tol) {
        eq.pass = false;
        detail::add_witness(eq, detail::describe_state(st));
      }
    }
    if (st.cls == HistClass::Class2) {
      ++lcap.examined;
      double over = (1 - ph) - (1 - gs);
      if (over > lcap.worst_slack) lcap.worst_slack = over;
      if (over > tol) {
        lcap.pass = false;
        detail::add_witness(lcap, detail::describe_state(st));
      }
    }
  }
  if (thr.worst_slack == 1e300) thr.worst_slack = 0;
  if (lcap.worst_slack == -1e300) lcap.worst_slack = 0;
  AuditReport rep;
  rep.checks = {thr, eq, lcap};
  return rep;
}

// Belief martingale: expected next-period posterior equals the current one at
// every active-learning state.
template <class S, class Model>
AuditReport audit_martingale(const Model& model,
                             const std::vector<EqState<S>>& states) {
  AuditCheck mg{"belief-martingale",
                "E[eta'] = eta at every Class-1/2 state; slack = max "
                "|E[eta'] - eta|",
                0, 0, 1e-9, true, false, "", {}};
  for (const EqState<S>& st : states) {
    if (st.cls != HistClass::Class1 && st.cls != HistClass::Class2) continue;
    Prescription<S> pr = model.prescribe(st);
    S e = S(0);
    if (pr.agg_H > 0)
      e += pr.agg_H * model.transition(st, Outcome::H).eta;
    if (pr.agg_H < 1)
      e += (1 - pr.agg_H) * model.transition(st, Outcome::L).eta;
    ++mg.examined;
    double gap = std::abs(to_double(e - st.eta));
    if (gap > mg.worst_slack) mg.worst_slack = gap;
    if (gap > mg.tolerance) {
      mg.pass = false;
      detail::add_witness(mg, detail::describe_state(st) +
                                  " E[eta']=" + std::to_string(to_double(e)));
    }
  }
  AuditReport rep;
  rep.checks = {mg};
  return rep;
}

namespace detail {

// Truncated expected-value expansion for one type under its own prescribed
// mixture, with the stored continuation value plugged in at the leaves.
inline double expand_value(const DefaultModel<double>& model,
                           const EqState<double>& st, std::size_t type,
                           long long depth) {
  const Params<double>& p = model.params();
  if (st.cls == HistClass::Punish) return 0;
  if (depth == 0) return st.value(p, type);
  Prescription<double> pr = model.prescribe(st);
  if (st.cls == HistClass::Class3) {
    Outcome y = pr.buyer_trusts ? Outcome::H : Outcome::N;
    return (1 - p.delta) * stage_u(p, type, y) +
           p.delta * expand_value(model, model.transition(st, y), type,
                                  depth - 1);
  }
  double a = pr.h_prob[type];
  double vh = 0, vl = 0;
  if (a > 0)
    vh = (1 - p.delta) * stage_u(p, type, Outcome::H) +
         p.delta *
             expand_value(model, model.transition(st, Outcome::H), type,
                          depth - 1);
  if (a < 1)
    vl = (1 - p.delta) * stage_u(p, type, Outcome::L) +
         p.delta *
             expand_value(model, model.transition(st, Outcome::L), type,
                          depth - 1);
  return a * vh + (1 - a) * vl;
}

}  // namespace detail

// Promise keeping: Monte Carlo mean realized payoff per type against the
// designed value, plus a recursive expansion check at random on-path states,
// plus the empirical cap on the lowest type's payoff.
inline AuditReport audit_promise_keeping(const GameSpec& spec,
                                         const DerivedConstants& cc,
                                         const ExperimentStats& stats,
                                         double tol = 0.01,
                                         long long n_states = 100,
                                         long long expand_depth = 12,
                                         std::uint64_t seed = 7,
                                         bool enforce_delta = true) {
  const double delta = to_double(spec.delta);
  if (std::pow(delta, static_cast<double>(stats.horizon)) > tol / 10)
    throw Error(ErrorKind::ParameterOutOfRange,
                "horizon too short for the requested tolerance");
  std::vector<double> thetas_d;
  for (const Rat& th : spec.thetas) thetas_d.push_back(to_double(th));
  std::vector<double> v =
      v_of_gamma<double>(thetas_d, to_double(spec.gamma),
                         to_double(spec.gstar()));
  AuditCheck mc{"monte-carlo-mean-payoff",
                "per type, mean realized payoff within tol + 3*SE of the "
                "designed value; slack = max(|mean - v| - tol - 3*SE)",
                0, -1e300, 0, true, false, "", {}};
  AuditCheck cap{"lowest-type-payoff-cap",
                 "the lowest type's mean payoff does not exceed 1 - theta_1 "
                 "beyond noise; slack = mean - (1 - theta_1) - 3*SE",
                 0, 0, 0, true, false, "", {}};
  for (const TypeStats& ts : stats.per_type) {
    ++mc.examined;
    double slack =
        std::abs(ts.mean_payoff - v[ts.type]) - tol - 3 * ts.se_payoff;
    if (slack > mc.worst_slack) mc.worst_slack = slack;
    if (slack > 0) {
      mc.pass = false;
      detail::add_witness(mc, "type=" + std::to_string(ts.type) + " mean=" +
                                  std::to_string(ts.mean_payoff) + " v=" +
                                  std::to_string(v[ts.type]));
    }
    if (ts.type == 0) {
      ++cap.examined;
      // Budget-fallback paths can over-deliver by up to (1-delta) when the
      // residual promise falls below one period's flow, so the cap is taken
      // over the regular paths only.
      double mean = ts.mean_payoff, se = ts.se_payoff;
      if (ts.degraded_paths > 0 && !ts.paths.empty()) {
        std::vector<double> pays;
        for (const PathSummary& ps : ts.paths)
          if (!ps.degraded) pays.push_back(ps.payoff);
        detail::mean_se(pays, mean, se);
        cap.note = std::to_string(ts.degraded_paths) +
                   " budget-fallback path(s) excluded";
      }
      // 1e-9 absolute headroom: promise keeping is exact per path, so the
      // sample SE is 0 and accumulation rounding alone would trip the cap.
      double s = mean - (1 - to_double(spec.thetas[0])) - 3 * se - 1e-9;
      cap.worst_slack = s;
      if (s > 0) {
        cap.pass = false;
        detail::add_witness(cap, "mean=" + std::to_string(mean));
      }
    }
  }
  if (mc.worst_slack == -1e300) mc.worst_slack = 0;

  AuditCheck rec{"state-value-recursion",
                 "stored continuation values satisfy the recursive "
                 "expectation expansion; slack = max |v - expansion|",
                 0, 0, 1e-9, true, false, "", {}};
  DefaultModel<double> model(make_params<double>(spec, cc));
  EqState<double> init = initial_state<double>(spec, cc, enforce_delta);
  auto states = detail::sample_on_path(model, init, n_states, 0, 60, seed);
  states.push_back(init);
  for (const EqState<double>& st : states) {
    if (st.cls == HistClass::Punish) continue;
    if (st.degraded) continue;  // fallback states break the expansion
    for (std::size_t j = 0; j < model.p.m; ++j) {
      if (!st.support[j]) continue;
      ++rec.examined;
      double ex = detail::expand_value(model, st, j, expand_depth);
      double gap = std::abs(st.value(model.p, j) - ex);
      if (gap > rec.worst_slack) rec.worst_slack = gap;
      if (gap > rec.tolerance) {
        rec.pass = false;
        detail::add_witness(rec, detail::describe_state(st) + " type=" +
                                     std::to_string(j) + " gap=" +
                                     std::to_string(gap));
      }
    }
  }
  AuditReport rep;
  rep.checks = {mc, cap, rec};
  return rep;
}

// T(eps): the cap on the expected number of periods whose prediction error
// exceeds eps, from the prior weight of the true type (natural log).
inline long long kl_time_budget(double pi_j, double eps) {
  if (!(pi_j > 0 && pi_j <= 1) || !(eps > 0))
    throw Error(ErrorKind::ParameterOutOfRange, "need pi in (0,1], eps > 0");
  return static_cast<long long>(std::ceil(-std::log(pi_j) / eps));
}

// Learning budget: per type, the mean per-path sum of one-period prediction
// errors (KL of the type's mixture from the announced aggregate) must not
// exceed -ln(prior weight) beyond noise; also the exceedance-count bound.
inline AuditReport audit_kl_budget(const GameSpec& spec,
                                   const ExperimentStats& stats,
                                   double eps = 0.01) {
  AuditCheck bud{"kl-budget",
                 "mean per-path KL sum <= -ln(prior) + 3*SE per type; slack "
                 "= max(mean - budget - 3*SE)",
                 0, -1e300, 0, true, false, "", {}};
  AuditCheck cnt{"kl-exceedance-count",
                 "mean number of periods with one-period KL > eps stays "
                 "within the T(eps) cap plus noise; slack = max(mean - T(eps) "
                 "- 3*SE)",
                 0, -1e300, 0, true, false, "", {}};
  for (const TypeStats& ts : stats.per_type) {
    double budget = -std::log(to_double(spec.prior[ts.type]));
    ++bud.examined;
    double s = ts.mean_kl - budget - 3 * ts.se_kl;
    if (s > bud.worst_slack) bud.worst_slack = s;
    if (s > 0) {
      bud.pass = false;
      detail::add_witness(bud, "type=" + std::to_string(ts.type) + " mean=" +
                                   std::to_string(ts.mean_kl) + " budget=" +
                                   std::to_string(budget));
    }
    long long teps = kl_time_budget(to_double(spec.prior[ts.type]), eps);
    std::vector<double> counts;
    counts.reserve(ts.paths.size());
    for (const PathSummary& pp : ts.paths)
      counts.push_back(static_cast<double>(pp.kl_over));
    double mean = 0, se = 0;
    detail::mean_se(counts, mean, se);
    ++cnt.examined;
    double sc = mean - static_cast<double>(teps) - 3 * se;
    if (sc > cnt.worst_slack) cnt.worst_slack = sc;
    if (sc > 0) {
      cnt.pass = false;
      detail::add_witness(cnt, "type=" + std::to_string(ts.type) +
                                   " mean-count=" + std::to_string(mean) +
                                   " cap=" + std::to_string(teps));
    }
  }
  if (bud.worst_slack == -1e300) bud.worst_slack = 0;
  if (cnt.worst_slack == -1e300) cnt.worst_slack = 0;
  AuditReport rep;
  rep.checks = {bud, cnt};
  return rep;
}

// Discounted action-frequency bounds.  The construction targets gamma above
// gamma*, so the per-path ratio windows carry that documented gap: the lower
// edge uses gamma* - eps_path, the upper edge gamma + eps_path.
inline AuditReport audit_frequencies(const GameSpec& spec,
                                     const DerivedConstants& cc,
                                     const ExperimentStats& stats,
                                     double eps_mean = 0.05,
                                     double eps_path = 0.2) {
  AuditReport rep;
  const std::size_t m = spec.m();
  if (m < 2) {
    AuditCheck sk{"frequency-bounds", "requires at least two types",
                  0, 0, 0, true, true, "skipped: single-type game", {}};
    rep.checks = {sk};
    return rep;
  }
  const double gs = to_double(cc.gstar);
  const double gamma = to_double(spec.gamma);
  const double th1 = to_double(spec.thetas[0]);
  const std::string gap_note =
      "gamma - gamma* gap = " + std::to_string(gamma - gs) +
      "; per-path slack eps_path = " + std::to_string(eps_path);

  AuditCheck lo{"per-path-HL-ratio-lower",
                "for every type except the highest cost, each path's "
                "discounted H:L ratio stays above (gamma*-eps)/(1-gamma*+eps); "
                "slack = min(aH - bound*aL)",
                0, 1e300, -1e-12, true, false, gap_note, {}};
  AuditCheck hi{"per-path-HL-ratio-upper",
                "for every type except the lowest cost, each path's ratio "
                "stays below (gamma+eps)/(1-gamma-eps); slack = min(bound*aL "
                "- aH)",
                0, 1e300, -1e-12, true, false, gap_note, {}};
  const double blo = (gs - eps_path) / (1 - gs + eps_path);
  const bool hi_vacuous = 1 - gamma - eps_path <= 0;
  const double bhi =
      hi_vacuous ? 0 : (gamma + eps_path) / (1 - gamma - eps_path);
  if (hi_vacuous) {
    hi.skipped = true;
    hi.note += "; skipped: upper window vacuous at this gamma";
  }
  for (const TypeStats& ts : stats.per_type) {
    for (const PathSummary& pp : ts.paths) {
      if (ts.type + 1 < m) {
        ++lo.examined;
        double s = pp.aH - blo * pp.aL;
        if (s < lo.worst_slack) lo.worst_slack = s;
        if (s < -1e-12) {
          lo.pass = false;
          detail::add_witness(lo, "type=" + std::to_string(ts.type) + " aH=" +
                                      std::to_string(pp.aH) + " aL=" +
                                      std::to_string(pp.aL));
        }
      }
      if (ts.type > 0 && !hi_vacuous) {
        ++hi.examined;
        double s = bhi * pp.aL - pp.aH;
        if (s < hi.worst_slack) hi.worst_slack = s;
        if (s < -1e-12) {
          hi.pass = false;
          detail::add_witness(hi, "type=" + std::to_string(ts.type) + " aH=" +
                                      std::to_string(pp.aH) + " aL=" +
                                      std::to_string(pp.aL));
        }
      }
    }
  }
  if (lo.worst_slack == 1e300) lo.worst_slack = 0;
  if (hi.worst_slack == 1e300) hi.worst_slack = 0;

  AuditCheck mid{"middle-type-frequency-pins",
                 "middle types' mean discounted (H,L,N) frequencies sit near "
                 "the limit pins; slack = max deviation - eps_mean",
                 0, -1e300, 0, true, m < 3, gap_note, {}};
  if (m < 3) {
    mid.note += "; skipped: no middle type";
    mid.worst_slack = 0;
  } else {
    const double denom = 1 - gs * th1;
    const double pinH = gs * (1 - th1) / denom;
    const double pinL = (1 - gs) * (1 - th1) / denom;
    const double pinN = th1 * (1 - gs) / denom;
    for (const TypeStats& ts : stats.per_type) {
      if (ts.type == 0 || ts.type + 1 == m) continue;
      ++mid.examined;
      double dev = std::max({std::abs(ts.aH - pinH), std::abs(ts.aL - pinL),
                             std::abs(ts.aN - pinN)});
      double s = dev - eps_mean;
      if (s > mid.worst_slack) mid.worst_slack = s;
      if (s > 0) {
        mid.pass = false;
        detail::add_witness(mid, "type=" + std::to_string(ts.type) +
                                     " (aH,aL,aN)=(" + std::to_string(ts.aH) +
                                     "," + std::to_string(ts.aL) + "," +
                                     std::to_string(ts.aN) + ")");
      }
    }
    if (mid.worst_slack == -1e300) mid.worst_slack = 0;
  }

  AuditCheck rev{"full-revelation-positive-fraction",
                 "a positive fraction of lowest-type paths drives the "
                 "posterior to 1; slack = fraction",
                 0, 0, 0, true, false, "", {}};
  AuditCheck revH{"revealed-paths-H-frequency",
                  "on lowest-type paths that fully reveal, the mean H "
                  "frequency strictly exceeds the designed H weight; slack = "
                  "mean - bound",
                  0, 0, 0, true, false, "", {}};
  const TypeStats& t0 = stats.per_type.front();
  rev.examined = t0.n_paths;
  rev.worst_slack = t0.eta_hit_frac;
  rev.pass = t0.eta_hit_frac > 0;
  double bound = gamma * (1 - th1) / (1 - gamma * th1);
  double sum = 0;
  long long n = 0;
  for (const PathSummary& pp : t0.paths)
    if (pp.eta_reached_1) {
      sum += pp.aH;
      ++n;
    }
  revH.examined = n;
  if (n == 0) {
    revH.pass = false;
    revH.note = "no fully revealing paths observed";
  } else {
    revH.worst_slack = sum / static_cast<double>(n) - bound;
    revH.pass = revH.worst_slack > 0;
  }

  rep.checks = {lo, hi, mid, rev, revH};
  return rep;
}

// Exhaustive check of the discounted H-frequency bound along belief paths
// that stay in the active learning phase: for every outcome sequence whose
// prefixes all remain Class 1 from the prior belief, the discounted H weight
// is at most the clamp-run slack plus gamma~/(1-gamma~) times the L weight.
inline AuditReport audit_lemma_a1(const GameSpec& spec,
                                  const DerivedConstants& cc,
                                  long long max_len) {
  if (max_len > 20)
    throw Error(ErrorKind::LengthTooLarge, "max_len must be <= 20");
  AuditCheck chk{"class1-H-frequency-bound",
                 "discounted H weight <= (1 - delta^X) + ratio * discounted L "
                 "weight along every Class-1-maintaining sequence; slack = "
                 "min(RHS - LHS)",
                 0, 1e300, -1e-12, true, false, "", {}};
  const double delta = to_double(spec.delta);
  const double eta_star = to_double(cc.eta_star);
  const double lam = to_double(cc.lambda);
  const double gs = to_double(cc.gstar);
  const double ratio =
      to_double(cc.gamma_tilde / (1 - cc.gamma_tilde));
  const double slack0 =
      1 - std::pow(delta, static_cast<double>(cc.t_clamp));
  chk.note = "X = " + std::to_string(cc.t_clamp) +
             " (exact clamp-run length from the prior)";

  ValueWeights<double> w0 =
      v_weights(to_double(spec.thetas[0]), to_double(spec.gamma));
  struct Node {
    double eta, pL;
    double wH, wL;  // discounted weights so far
    long long t;
  };
  std::vector<Node> stack{{to_double(spec.prior[0]), w0.pL, 0, 0, 0}};
  while (!stack.empty()) {
    Node nd = stack.back();
    stack.pop_back();
    ++chk.examined;
    double s = slack0 + ratio * nd.wL - nd.wH;
    if (s < chk.worst_slack) chk.worst_slack = s;
    if (s < -1e-12) {
      chk.pass = false;
      detail::add_witness(chk, "t=" + std::to_string(nd.t) + " wH=" +
                                   std::to_string(nd.wH) + " wL=" +
                                   std::to_string(nd.wL));
    }
    if (nd.t >= max_len) continue;
    if (nd.pL < 1 - delta) continue;  // current history left Class 1
    double d = nd.eta - eta_star;
    double grow = (1 + lam * (1 - gs)) * d;
    double lim = 1 - eta_star;
    bool clamped = grow >= lim * (1 - 1e-12);
    double step = (1 - delta) * std::pow(delta, static_cast<double>(nd.t));
    // H child (posterior clamps to 1 and leaves Class 1, but the endpoint is
    // still in the inequality's domain; it is just not extended).
    stack.push_back({clamped ? 1.0 : eta_star + grow,
                     clamped ? 0.0 : nd.pL / delta, nd.wH + step, nd.wL,
                     nd.t + 1});
    // L child.
    stack.push_back({eta_star + (1 - lam * gs) * d, nd.pL - (1 - delta) >= 0
                                                        ? (nd.pL - (1 - delta)) / delta
                                                        : 0.0,
                     nd.wH, nd.wL + step, nd.t + 1});
  }
  if (chk.worst_slack == 1e300) chk.worst_slack = 0;
  AuditReport rep;
  rep.checks = {chk};
  return rep;
}

// Behavioral shape: for every type, the construction is neither stationary
// nor completely mixed — there is an on-path state where the type's
// prescription is pure and two on-path states where it differs.
inline AuditReport audit_behavior(const GameSpec& spec,
                                  const DerivedConstants& cc,
                                  const ExperimentStats& stats,
                                  long long search_depth = 16,
                                  long long sample_depth = 2000,
                                  bool enforce_delta = true) {
  AuditReport rep;
  const std::size_t m = spec.m();
  if (m < 2) {
    AuditCheck sk{"behavior-witnesses", "requires at least two types",
                  0, 0, 0, true, true, "skipped: single-type game", {}};
    rep.checks = {sk};
    return rep;
  }
  DefaultModel<double> model(make_params<double>(spec, cc));
  EqState<double> init = initial_state<double>(spec, cc, enforce_delta);

  std::vector<bool> pure_found(m, false), distinct_found(m, false);
  std::vector<double> first_prob(m, -1);
  std::vector<std::string> pure_w(m), distinct_w(m);
  long long examined = 0;
  std::size_t pending = 2 * m;
  std::vector<std::pair<EqState<double>, long long>> stack{{init, 0}};
  while (!stack.empty() && pending > 0) {
    auto [st, d] = stack.back();
    stack.pop_back();
    if (st.cls == HistClass::Punish) continue;
    ++examined;
    Prescription<double> pr = model.prescribe(st);
    if (st.cls != HistClass::Class3) {
      for (std::size_t j = 0; j < m; ++j) {
        if (!st.support[j]) continue;
        double a = pr.h_prob[j];
        if (!pure_found[j] && (a == 0.0 || a == 1.0)) {
          pure_found[j] = true;
          pure_w[j] = detail::describe_state(st);
          --pending;
        }
        if (first_prob[j] < 0) {
          first_prob[j] = a;
        } else if (!distinct_found[j] &&
                   std::abs(a - first_prob[j]) > 1e-12) {
          distinct_found[j] = true;
          distinct_w[j] = detail::describe_state(st);
          --pending;
        }
      }
    }
    if (d >= search_depth) continue;
    if (st.cls == HistClass::Class3) {
      stack.push_back(
          {model.transition(st, pr.buyer_trusts ? Outcome::H : Outcome::N),
           d + 1});
    } else {
      if (pr.agg_H > 0)
        stack.push_back({model.transition(st, Outcome::H), d + 1});
      if (pr.agg_H < 1)
        stack.push_back({model.transition(st, Outcome::L), d + 1});
    }
  }
  if (pending > 0) {
    // Some prescriptions (e.g. the pure-L reveal of the highest type) first
    // appear deep along the tree and last only a period or two, so random
    // walks are scanned state by state rather than at their endpoints.
    std::uint64_t rng = 99;
    for (int walk = 0; walk < 400 && pending > 0; ++walk) {
      EqState<double> st = init;
      for (long long t = 0; t < sample_depth && pending > 0; ++t) {
        if (st.cls == HistClass::Punish || st.cls == HistClass::Class3) break;
        ++examined;
        Prescription<double> pr = model.prescribe(st);
        for (std::size_t j = 0; j < m; ++j) {
          if (!st.support[j]) continue;
          double a = pr.h_prob[j];
          if (!pure_found[j] && (a == 0.0 || a == 1.0)) {
            pure_found[j] = true;
            pure_w[j] = detail::describe_state(st);
            --pending;
          }
          if (first_prob[j] >= 0 && !distinct_found[j] &&
              std::abs(a - first_prob[j]) > 1e-12) {
            distinct_found[j] = true;
            distinct_w[j] = detail::describe_state(st);
            --pending;
          }
        }
        st = model.transition(st, detail::uniform01(rng) < pr.agg_H
                                      ? Outcome::H
                                      : Outcome::L);
      }
    }
  }
  AuditCheck pure{"per-type-pure-state-exists",
                  "every type has an on-path state with a pure prescription "
                  "(rules out completely mixed strategies); slack = count of "
                  "types missing a witness",
                  examined, 0, 0, true, false, "", {}};
  AuditCheck dis{"per-type-nonstationary",
                 "every type's prescription differs across two on-path "
                 "states (rules out stationary strategies); slack = count of "
                 "types missing a witness",
                 examined, 0, 0, true, false, "", {}};
  for (std::size_t j = 0; j < m; ++j) {
    if (!pure_found[j]) {
      pure.pass = false;
      pure.worst_slack += 1;
      detail::add_witness(pure, "type=" + std::to_string(j));
    } else {
      pure.note += (pure.note.empty() ? "" : " | ") + std::to_string(j) +
                   ": " + pure_w[j];
    }
    if (!distinct_found[j]) {
      dis.pass = false;
      dis.worst_slack += 1;
      detail::add_witness(dis, "type=" + std::to_string(j));
    } else {
      dis.note += (dis.note.empty() ? "" : " | ") + std::to_string(j) + ": " +
                  distinct_w[j];
    }
  }
  long long revealed = 0;
  for (const PathSummary& pp : stats.per_type.front().paths)
    if (pp.eta_reached_1) ++revealed;
  AuditCheck cnt{"full-revelation-event-count",
                 "number of simulated lowest-type paths with a full "
                 "revelation event (reported, informational)",
                 stats.per_type.front().n_paths,
                 static_cast<double>(revealed), 0, true, false, "", {}};
  rep.checks = {pure, dis, cnt};
  return rep;
}

// The complete audit suite on one game instance.
inline AuditReport run_full_audit(const GameSpec& spec,
                                  const DerivedConstants& cc,
                                  long long n_paths = 10000,
                                  long long horizon = 0,
                                  std::uint64_t seed0 = 12345,
                                  long long depth_exhaustive = 14,
                                  long long n_sampled = 10000,
                                  long long lemma_max_len = 12,
                                  bool enforce_delta = true) {
  if (horizon <= 0) horizon = default_horizon(to_double(spec.delta));
  DefaultModel<double> model(make_params<double>(spec, cc));
  EqState<double> init = initial_state<double>(spec, cc, enforce_delta);
  AuditReport rep = audit_local_ic<double>(model, init, cc, depth_exhaustive,
                                           n_sampled, 200, seed0);
  auto states = detail::enumerate_on_path<double>(model, init, 10);
  auto extra = detail::sample_on_path(model, init, 2000, 10, 200, seed0 + 1);
  states.insert(states.end(), extra.begin(), extra.end());
  rep.merge(audit_buyer_ic<double>(model, states));
  rep.merge(audit_martingale<double>(model, states));
  ExperimentStats stats =
      run_experiment(spec, cc, n_paths, horizon, seed0, enforce_delta);
  rep.merge(audit_promise_keeping(spec, cc, stats, 0.01, 100, 12, seed0 + 2,
                                  enforce_delta));
  rep.merge(audit_kl_budget(spec, stats));
  rep.merge(audit_frequencies(spec, cc, stats));
  rep.merge(audit_lemma_a1(spec, cc, lemma_max_len));
  rep.merge(audit_behavior(spec, cc, stats, 16, horizon, enforce_delta));
  // Absorption guard: a never-absorbed path is a hard failure.
  AuditCheck ab{"absorption",
                "every simulated path reaches the absorbing phase before the "
                "horizon and respects the Class-2 visit cap; slack = count of "
                "offending paths",
                0, 0, 0, true, false, "", {}};
  for (const TypeStats& ts : stats.per_type) {
    ab.examined += ts.n_paths;
    if (ts.not_absorbed > 0) {
      ab.pass = false;
      ab.worst_slack += static_cast<double>(ts.not_absorbed);
      detail::add_witness(ab, "type=" + std::to_string(ts.type) +
                                  " unabsorbed=" +
                                  std::to_string(ts.not_absorbed));
    }
    if (ts.max_class2 > cc.Mcap) {
      ab.pass = false;
      detail::add_witness(ab, "type=" + std::to_string(ts.type) +
                                  " class2max=" +
                                  std::to_string(ts.max_class2) + " cap=" +
                                  std::to_string(cc.Mcap));
    }
    if (ts.degraded_paths > 0)
      ab.note += "type " + std::to_string(ts.type) + ": " +
                 std::to_string(ts.degraded_paths) +
                 " path(s) completed via the budget fallback; ";
  }
  rep.checks.push_back(ab);
  return rep;
}

}  // namespace reputeq

#endif  // REPUTEQ_AUDIT_HPP
