#ifndef REPUTEQ_EQUILIBRIUM_HPP
#define REPUTEQ_EQUILIBRIUM_HPP

#include <cstddef>
#include <vector>

#include "reputeq/constants.hpp"
#include "reputeq/errors.hpp"
#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"

namespace reputeq {

enum class HistClass { Class1, Class2, Class3, Punish };
enum class Outcome { N, H, L };

inline const char* hist_class_name(HistClass c) {
  switch (c) {
    case HistClass::Class1: return "Class1";
    case HistClass::Class2: return "Class2";
    case HistClass::Class3: return "Class3";
    case HistClass::Punish: return "Punish";
  }
  return "?";
}

inline char outcome_char(Outcome y) {
  return y == Outcome::N ? 'N' : (y == Outcome::H ? 'H' : 'L');
}

template <class S>
struct num_traits {
  static S clamp_tol() { return S(0); }
};
template <>
struct num_traits<double> {
  static double clamp_tol() { return 1e-12; }
};

// Scalar-typed snapshot of everything the transition system needs.
template <class S>
struct Params {
  std::size_t m;
  std::vector<S> thetas;
  std::vector<S> prior;
  S delta, gamma, gstar;
  S eta_star, lambda;
  std::vector<long long> kj;
};

template <class S>
Params<S> make_params(const GameSpec& spec, const DerivedConstants& cc) {
  Params<S> p;
  p.m = spec.m();
  for (const Rat& th : spec.thetas) p.thetas.push_back(scalar_from<S>(th));
  for (const Rat& pi : spec.prior) p.prior.push_back(scalar_from<S>(pi));
  p.delta = scalar_from<S>(spec.delta);
  p.gamma = scalar_from<S>(spec.gamma);
  p.gstar = scalar_from<S>(spec.gstar());
  p.eta_star = scalar_from<S>(cc.eta_star);
  p.lambda = scalar_from<S>(cc.lambda);
  p.kj = cc.kj;
  return p;
}

// One node of the constructed equilibrium.  typew is the posterior over all
// types (zero off support); eta duplicates typew[0] for readability.  The
// Class-3 schedule state is (fm_target, fm_residual).
template <class S>
struct EqState {
  S eta{};
  S pN{}, pH{}, pL{};
  HistClass cls = HistClass::Punish;
  std::vector<char> support;
  std::vector<S> typew;
  std::size_t bar_theta = 0;
  long long l = 0;
  S fm_target{}, fm_residual{};
  // Set (and then inherited) once the p^H weight can no longer fund a full
  // period of the H continuation (p^H < 1-delta at a Class-1/2 state).  The
  // construction guarantees this never happens when delta clears its real
  // feasibility threshold; below it, rare paths exhaust the budget and play
  // is completed by a value-delivering schedule instead of leaving the
  // simplex.  Audits skip degraded states.
  bool degraded = false;

  // Type j's continuation value recorded at this state.
  S value(const Params<S>& p, std::size_t j) const {
    if (cls == HistClass::Punish) return S(0);
    return pH * (1 - p.thetas[j]) + pL;
  }
};

// Tightness tags predicted by the construction at each state.
enum class Tight { Indifferent, StrictH, StrictL };

template <class S>
struct Prescription {
  bool buyer_trusts = false;
  std::vector<S> h_prob;        // per type
  std::vector<Tight> tight;     // per type
  S agg_H{};                    // P(outcome H | trust), under the current belief
};

namespace detail {

template <class S>
HistClass class_of(const S& pL, const S& delta) {
  if (pL >= 1 - delta) return HistClass::Class1;
  if (pL > 0) return HistClass::Class2;
  return HistClass::Class3;
}

// Class-1 posterior maps: the designed updates eta(h,H) and eta(h,L).
template <class S>
struct Class1Maps {
  S eta_H, eta_L;
  bool clamped;
};

template <class S>
Class1Maps<S> class1_maps(const Params<S>& p, const S& eta) {
  S d = eta - p.eta_star;
  S grow = (1 + p.lambda * (1 - p.gstar)) * d;
  S lim = 1 - p.eta_star;
  bool clamped = grow >= lim - num_traits<S>::clamp_tol() * lim;
  Class1Maps<S> m;
  m.clamped = clamped;
  m.eta_H = clamped ? S(1) : p.eta_star + grow;
  m.eta_L = p.eta_star + (1 - p.lambda * p.gstar) * d;
  return m;
}

// Greedy schedule emission; keeps the residual in [0,1] and every tail within
// (1-delta)/delta of the target.
template <class S>
bool fm_emit_high(const S& residual, const S& target, const S& delta) {
  if (residual < 1 - delta) return false;
  return residual >= target || residual > delta;
}

template <class S>
S fm_advance(const S& residual, bool emitted_high, const S& delta) {
  if (emitted_high) return S((residual - (1 - delta)) / delta);
  return S(residual / delta);
}

}  // namespace detail

// Stand-alone schedule generator over symbols {high, low-value period}.
template <class S>
class FmSchedule {
 public:
  FmSchedule(const S& target, const S& delta, const S& epsilon)
      : target_(target), residual_(target), delta_(delta) {
    if (!(1 - delta <= epsilon))
      throw Error(ErrorKind::EpsilonTooSmallForDelta,
                  "need 1-delta <= epsilon");
    if (target < 0 || target > 1)
      throw Error(ErrorKind::ParameterOutOfRange, "target must lie in [0,1]");
  }

  const S& residual() const { return residual_; }

  // Emits the next symbol; true = high-value period (T,H), false = (N,L).
  bool next() {
    bool high = detail::fm_emit_high(residual_, target_, delta_);
    residual_ = detail::fm_advance(residual_, high, delta_);
    return high;
  }

 private:
  S target_, residual_, delta_;
};

template <class S>
EqState<S> initial_state(const GameSpec& spec, const DerivedConstants& cc,
                         bool enforce_delta = true) {
  if (enforce_delta && !cc.delta_ok())
    throw Error(ErrorKind::DeltaTooLow, cc.delta_failure);
  Params<S> p = make_params<S>(spec, cc);
  EqState<S> st;
  ValueWeights<S> w = v_weights(p.thetas[0], p.gamma);
  st.pN = w.pN;
  st.pH = w.pH;
  st.pL = w.pL;
  st.eta = p.prior[0];
  st.typew = p.prior;
  st.support.assign(p.m, 1);
  st.bar_theta = p.m - 1;
  st.l = 0;
  st.cls = detail::class_of(st.pL, p.delta);
  if (st.cls == HistClass::Class3) {
    st.fm_target = st.pH;
    st.fm_residual = st.pH;
  } else if (st.pH < 1 - p.delta) {
    st.degraded = true;
  }
  return st;
}

template <class S>
Prescription<S> prescribe(const Params<S>& p, const EqState<S>& st) {
  if (st.cls == HistClass::Punish)
    throw Error(ErrorKind::StateOffPath, "no prescription at the punish state");
  Prescription<S> pr;
  pr.h_prob.assign(p.m, S(0));
  pr.tight.assign(p.m, Tight::Indifferent);

  if (st.cls == HistClass::Class3) {
    bool high = detail::fm_emit_high(st.fm_residual, st.fm_target, p.delta);
    pr.buyer_trusts = high;
    for (std::size_t j = 0; j < p.m; ++j) {
      pr.h_prob[j] = high ? S(1) : S(0);
      pr.tight[j] = high ? Tight::StrictH : Tight::Indifferent;
    }
    pr.agg_H = high ? S(1) : S(0);
    return pr;
  }

  pr.buyer_trusts = true;
  if (st.cls == HistClass::Class1) {
    auto maps = detail::class1_maps(p, st.eta);
    S ratio = (st.eta - maps.eta_L) / (maps.eta_H - maps.eta_L);
    // When p^H cannot fund a full H period, the H continuation is the
    // value-delivering schedule, which keeps theta_1 exactly indifferent and
    // makes every higher type strictly prefer L (as in the clamped case).
    bool strict_l = maps.clamped || st.pH < 1 - p.delta;
    for (std::size_t j = 0; j < p.m; ++j) {
      if (!st.support[j]) continue;
      if (j == 0) {
        pr.h_prob[0] = ratio * maps.eta_H / st.eta;
        pr.tight[0] = Tight::Indifferent;
      } else {
        pr.h_prob[j] = ratio * (1 - maps.eta_H) / (1 - st.eta);
        pr.tight[j] = strict_l ? Tight::StrictL : Tight::Indifferent;
      }
    }
    pr.agg_H = ratio;
    return pr;
  }

  // Class 2: everyone but the highest supported cost plays H for sure.
  const std::size_t bar = st.bar_theta;
  S q;  // bar's probability of L
  if (bar == 1) {
    S cand = (1 - p.gstar) / (1 - st.eta);
    q = cand > 1 ? S(1) : cand;
  } else {
    q = S(1) / S(static_cast<long long>(p.kj[bar] - st.l));
  }
  S p_low = st.typew[bar] * q;
  pr.agg_H = 1 - p_low;
  for (std::size_t j = 0; j < p.m; ++j) {
    if (!st.support[j]) continue;
    if (j == bar) {
      pr.h_prob[j] = 1 - q;
      // Indifferent unless observing H would fully reveal theta_1, which
      // happens exactly when bar plays L for sure and no third type remains.
      bool reveals = q >= 1;
      for (std::size_t i = 1; i < p.m && reveals; ++i)
        if (i != bar && st.support[i]) reveals = false;
      pr.tight[j] = reveals ? Tight::StrictL : Tight::Indifferent;
    } else {
      pr.h_prob[j] = S(1);
      pr.tight[j] = Tight::StrictH;
    }
  }
  return pr;
}

namespace detail {

template <class S>
EqState<S> punish_state(std::size_t m) {
  EqState<S> st;
  st.cls = HistClass::Punish;
  st.support.assign(m, 0);
  st.typew.assign(m, S(0));
  return st;
}

// Replaces the weight triple by a schedule over v^H and v^N that delivers
// theta_1's continuation value after one period of H flow.  Clips mark the
// state degraded: they only bind when the promised value is not deliverable
// this way (possible below the construction's real delta threshold).
template <class S>
void enter_class3_value(const Params<S>& p, EqState<S>& st) {
  S v1 = st.pH * (1 - p.thetas[0]) + st.pL;
  S v1H = (v1 - (1 - p.delta) * (1 - p.thetas[0])) / p.delta;
  S w = v1H / (1 - p.thetas[0]);
  if (w < 0) {
    w = S(0);
    st.degraded = true;
  } else if (w > 1) {
    w = S(1);
    st.degraded = true;
  }
  st.pH = w;
  st.pN = 1 - w;
  st.pL = S(0);
  st.cls = HistClass::Class3;
  st.fm_target = st.pH;
  st.fm_residual = st.pH;
}

// Clamped H-transition: belief jumps to 1 and the continuation delivers
// theta_1's value with weights on v^H and v^N only.
template <class S>
void enter_class3_full_reveal(const Params<S>& p, EqState<S>& st) {
  st.eta = S(1);
  st.typew.assign(p.m, S(0));
  st.typew[0] = S(1);
  st.support.assign(p.m, 0);
  st.support[0] = 1;
  st.bar_theta = 0;
  enter_class3_value(p, st);
}

}  // namespace detail

template <class S>
EqState<S> transition(const Params<S>& p, const EqState<S>& st, Outcome y) {
  if (st.cls == HistClass::Punish) return detail::punish_state<S>(p.m);

  if (st.cls == HistClass::Class3) {
    bool high = detail::fm_emit_high(st.fm_residual, st.fm_target, p.delta);
    Outcome expect = high ? Outcome::H : Outcome::N;
    if (y != expect) return detail::punish_state<S>(p.m);
    EqState<S> nx = st;
    nx.fm_residual = detail::fm_advance(st.fm_residual, high, p.delta);
    nx.pH = nx.fm_residual;
    nx.pN = 1 - nx.fm_residual;
    nx.pL = S(0);
    return nx;
  }

  if (y == Outcome::N) return detail::punish_state<S>(p.m);  // buyer trusts here

  if (st.cls == HistClass::Class1) {
    auto maps = detail::class1_maps(p, st.eta);
    EqState<S> nx = st;
    if (y == Outcome::H) {
      if (maps.clamped) {
        detail::enter_class3_full_reveal(p, nx);
        return nx;
      }
      if (st.pH < 1 - p.delta) {
        // p^H cannot fund the (v^N, v^L, v^H) decomposition; deliver the
        // remaining value through a schedule instead.
        nx.degraded = true;
        nx.eta = maps.eta_H;
        for (std::size_t j = 1; j < p.m; ++j)
          if (st.support[j])
            nx.typew[j] = st.typew[j] * (1 - nx.eta) / (1 - st.eta);
        nx.typew[0] = nx.eta;
        detail::enter_class3_value(p, nx);
        return nx;
      }
      nx.eta = maps.eta_H;
      nx.pN = st.pN / p.delta;
      nx.pH = (st.pH - (1 - p.delta)) / p.delta;
      nx.pL = st.pL / p.delta;
    } else {
      nx.eta = maps.eta_L;
      nx.pN = st.pN / p.delta;
      nx.pH = st.pH / p.delta;
      nx.pL = (st.pL - (1 - p.delta)) / p.delta;
      if (nx.pL < 0) nx.pL = S(0);  // guard against real-mode rounding
    }
    // Non-theta_1 weights rescale proportionally (same mixture for all).
    for (std::size_t j = 1; j < p.m; ++j)
      if (st.support[j]) nx.typew[j] = st.typew[j] * (1 - nx.eta) / (1 - st.eta);
    nx.typew[0] = nx.eta;
    nx.cls = detail::class_of(nx.pL, p.delta);
    if (nx.cls == HistClass::Class3) {
      nx.fm_target = nx.pH / (nx.pH + nx.pN);
      nx.fm_residual = nx.fm_target;
    } else if (nx.pH < 1 - p.delta) {
      nx.degraded = true;
    }
    return nx;
  }

  // Class 2.
  const std::size_t bar = st.bar_theta;
  Prescription<S> pr = prescribe(p, st);
  S q = 1 - pr.h_prob[bar];
  EqState<S> nx = st;
  if (y == Outcome::L) {
    if (!(q > 0)) return detail::punish_state<S>(p.m);
    // Only the highest supported cost plays L; belief collapses onto it.
    S Q = st.pH - (1 - p.delta - st.pL) / (1 - p.thetas[bar]);
    if (Q < 0) {
      Q = S(0);
      nx.degraded = true;
    } else if (Q > p.delta) {
      Q = p.delta;
      nx.degraded = true;
    }
    nx.pH = Q / p.delta;
    nx.pN = (p.delta - Q) / p.delta;
    nx.pL = S(0);
    nx.typew.assign(p.m, S(0));
    nx.typew[bar] = S(1);
    nx.support.assign(p.m, 0);
    nx.support[bar] = 1;
    nx.eta = S(0);
    nx.cls = HistClass::Class3;
    nx.fm_target = nx.pH;
    nx.fm_residual = nx.pH;
    return nx;
  }
  // Outcome H: Bayes update; bar leaves the support if it played L for sure.
  S keep = st.typew[bar] * (1 - q);
  S agg = pr.agg_H;
  for (std::size_t j = 0; j < p.m; ++j) {
    if (!st.support[j]) continue;
    nx.typew[j] = (j == bar ? keep : st.typew[j]) / agg;
  }
  bool bar_out = !(keep > 0);
  if (bar_out) {
    nx.support[bar] = 0;
    nx.typew[bar] = S(0);
    std::size_t nb = bar;
    while (nb > 0 && !nx.support[nb]) --nb;
    nx.bar_theta = nb;
    nx.l = 0;
  } else {
    nx.l = st.l + 1;
  }
  nx.eta = nx.typew[0];
  // Full revelation: only the lowest type remains supported (robust to
  // rounding in the normalizing constant, which is why the support flags are
  // checked rather than eta == 1).
  bool only_theta1 = nx.support[0] != 0;
  for (std::size_t j = 1; j < p.m && only_theta1; ++j)
    if (nx.support[j]) only_theta1 = false;
  if (only_theta1) {
    nx.eta = S(1);
    nx.typew.assign(p.m, S(0));
    nx.typew[0] = S(1);
    nx.pN = st.pN;  // enter_class3_full_reveal reads pH/pL of the current state
    nx.pH = st.pH;
    nx.pL = st.pL;
    detail::enter_class3_full_reveal(p, nx);
    nx.l = 0;
    return nx;
  }
  if (st.pH < 1 - p.delta) {
    // Same budget shortfall as in Class 1: complete play with a schedule.
    nx.degraded = true;
    detail::enter_class3_value(p, nx);
    nx.l = 0;
    return nx;
  }
  nx.pN = st.pN / p.delta;
  nx.pH = (st.pH - (1 - p.delta)) / p.delta;
  nx.pL = st.pL / p.delta;
  nx.cls = detail::class_of(nx.pL, p.delta);
  if (nx.cls != HistClass::Class3 && nx.pH < 1 - p.delta) nx.degraded = true;
  return nx;
}

}  // namespace reputeq

#endif  // REPUTEQ_EQUILIBRIUM_HPP
