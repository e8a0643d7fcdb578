#ifndef REPUTEQ_GAME_HPP
#define REPUTEQ_GAME_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "reputeq/errors.hpp"
#include "reputeq/rational.hpp"

namespace reputeq {

// Stage/repeated game parameters.  thetas are the seller's costs of high
// effort, ascending; prior is the buyer's initial distribution over them.
struct GameSpec {
  Rat b;                    // buyer benefit from trusting a high-effort seller
  Rat c;                    // buyer loss from trusting a low-effort seller
  std::vector<Rat> thetas;  // theta_1 < ... < theta_m, each in (0,1)
  std::vector<Rat> prior;   // pi over thetas, entries > 0, sum 1
  Rat delta;                // seller discount, in (0,1)
  Rat gamma;                // target trust frequency, in (gamma*, 1)

  std::size_t m() const { return thetas.size(); }
  Rat gstar() const { return c / (b + c); }

  void validate() const {
    if (!(b > 0) || !(c > 0))
      throw Error(ErrorKind::ValidationError, "b and c must be positive");
    if (thetas.empty())
      throw Error(ErrorKind::ValidationError, "need at least one type");
    for (std::size_t j = 0; j < thetas.size(); ++j) {
      if (!(thetas[j] > 0 && thetas[j] < 1))
        throw Error(ErrorKind::ValidationError, "thetas must lie in (0,1)");
      if (j > 0 && !(thetas[j - 1] < thetas[j]))
        throw Error(ErrorKind::ValidationError, "thetas must be strictly increasing");
    }
    if (prior.size() != thetas.size())
      throw Error(ErrorKind::ValidationError, "prior must have one entry per type");
    Rat sum = 0;
    for (const Rat& p : prior) {
      if (!(p > 0))
        throw Error(ErrorKind::ValidationError, "prior entries must be positive");
      sum += p;
    }
    if (sum != 1)
      throw Error(ErrorKind::ValidationError, "prior must sum to 1");
    if (!(delta > 0 && delta < 1))
      throw Error(ErrorKind::ValidationError, "delta must lie in (0,1)");
    if (!(gamma > gstar() && gamma < 1))
      throw Error(ErrorKind::ValidationError,
                  "gamma must lie strictly between c/(b+c) and 1");
  }
};

template <class S>
S gamma_star(const S& b, const S& c) {
  if (!(b > 0) || !(c > 0))
    throw Error(ErrorKind::NonPositiveParameter, "gamma_star needs b, c > 0");
  return c / (b + c);
}

// Optimal commitment payoff 1 - gamma* theta when mixing H with weight gamma*.
template <class S>
S stackelberg_payoff(const S& theta, const S& gstar) {
  if (!(theta > 0 && theta < 1) || gstar < 0 || gstar > 1)
    throw Error(ErrorKind::ParameterOutOfRange, "stackelberg_payoff domain");
  return 1 - gstar * theta;
}

// Highest equilibrium payoff: the Stackelberg payoff scaled by the common
// incomplete-information multiplier (1-theta_1)/(1-gamma* theta_1).
template <class S>
S v_star(const S& theta_j, const S& theta_1, const S& gstar) {
  if (theta_1 > theta_j)
    throw Error(ErrorKind::TypeOrderViolation, "theta_1 must be the lowest cost");
  if (!(theta_1 > 0 && theta_j < 1) || !(gstar > 0 && gstar < 1))
    throw Error(ErrorKind::ParameterOutOfRange, "v_star domain");
  return (1 - gstar * theta_j) * (1 - theta_1) / (1 - gstar * theta_1);
}

// Convex weights (on v^N, v^H, v^L) of the target value vector v(gamma).
template <class S>
struct ValueWeights {
  S pN, pH, pL;
};

template <class S>
ValueWeights<S> v_weights(const S& theta_1, const S& gamma) {
  S denom = 1 - gamma * theta_1;
  return ValueWeights<S>{theta_1 * (1 - gamma) / denom,
                         (1 - theta_1) * gamma / denom,
                         (1 - theta_1) * (1 - gamma) / denom};
}

template <class S>
std::vector<S> v_of_gamma(const std::vector<S>& thetas, const S& gamma,
                          const S& gstar) {
  if (gamma < gstar || gamma > 1)
    throw Error(ErrorKind::GammaOutOfRange, "v_of_gamma needs gamma in [gamma*, 1]");
  ValueWeights<S> w = v_weights(thetas.front(), gamma);
  std::vector<S> v;
  v.reserve(thetas.size());
  for (const S& th : thetas) v.push_back(w.pH * (1 - th) + w.pL);
  return v;
}

// Capital-taxation variant: the government's highest equilibrium payoff,
// where theta is the benefit from expropriation (not a cost).
template <class S>
S capital_taxation_vstar(const S& theta_j, const S& theta_1, const S& gstar) {
  if (theta_1 > theta_j)
    throw Error(ErrorKind::TypeOrderViolation, "theta_1 must be the lowest benefit");
  if (!(theta_1 > 0) || !(gstar > 0 && gstar < 1))
    throw Error(ErrorKind::ParameterOutOfRange, "capital_taxation_vstar domain");
  return (1 + theta_j - gstar * theta_j) / (1 + theta_1 - gstar * theta_1);
}

// -------------------------------------------------------------------------
// Generalized simultaneous-move games and their assumption checks.

// Actions and types are listed in decreasing order: index 0 is the top of the
// chain (the commitment action a1_bar, the trusting a2, the most efficient
// type).  |A2| = 2 throughout.
struct GeneralGame {
  std::vector<std::string> type_names;
  std::vector<std::string> a1_names;
  std::array<std::string, 2> a2_names;
  std::vector<std::vector<std::array<Rat, 2>>> u1;  // [type][a1][a2]
  std::vector<std::array<Rat, 2>> u2;               // [a1][a2]

  std::size_t n_types() const { return u1.size(); }
  std::size_t n_a1() const { return u2.size(); }

  void validate() const {
    if (u1.empty() || u2.size() < 2)
      throw Error(ErrorKind::ValidationError, "need >=1 type and >=2 actions for A1");
    for (const auto& row : u1)
      if (row.size() != u2.size())
        throw Error(ErrorKind::ValidationError, "u1 table must be total");
  }
};

struct AssumptionWitness {
  std::string assumption;  // "A1", "A2", "A3"
  std::string detail;
};

struct AssumptionReport {
  bool a1_ok = true;
  bool a2_ok = true;
  bool a3_ok = true;
  std::vector<AssumptionWitness> witnesses;
  // Filled when A1 holds: buyer's unique best reply per a1, and each type's
  // unique pure Stackelberg a1.
  std::vector<std::size_t> br2;
  std::vector<std::size_t> stackelberg_a1;

  bool all_ok() const { return a1_ok && a2_ok && a3_ok; }
};

inline AssumptionReport check_assumptions(const GeneralGame& g) {
  g.validate();
  AssumptionReport rep;
  const std::size_t nt = g.n_types(), na = g.n_a1();

  auto fail = [&rep](const char* which, bool& flag, const std::string& detail) {
    flag = false;
    rep.witnesses.push_back({which, detail});
  };

  // A1: unique best reply per pure a1; unique pure Stackelberg per type.
  rep.br2.assign(na, 0);
  for (std::size_t i = 0; i < na; ++i) {
    if (g.u2[i][0] == g.u2[i][1])
      fail("A1", rep.a1_ok, "BR2 tie at a1=" + g.a1_names[i]);
    rep.br2[i] = g.u2[i][0] >= g.u2[i][1] ? 0 : 1;
  }
  rep.stackelberg_a1.assign(nt, 0);
  for (std::size_t t = 0; t < nt; ++t) {
    std::size_t best = 0;
    bool tie = false;
    for (std::size_t i = 1; i < na; ++i) {
      const Rat& cur = g.u1[t][i][rep.br2[i]];
      const Rat& top = g.u1[t][best][rep.br2[best]];
      if (cur == top) tie = true;
      if (cur > top) {
        best = i;
        tie = false;
      }
    }
    if (tie)
      fail("A1", rep.a1_ok, "Stackelberg tie for type " + g.type_names[t]);
    rep.stackelberg_a1[t] = best;
  }

  // A2 (monotone supermodularity), operational form.  Strictness is required
  // where the trusting column makes it meaningful; ties are tolerated in the
  // non-trusting column (the baseline with d = 0 has them).
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t i = 0; i + 1 < na; ++i) {
      // u1 decreasing in a1: strict at a2 top, weak at a2 bottom.
      if (!(g.u1[t][i][0] < g.u1[t][i + 1][0]))
        fail("A2", rep.a2_ok,
             "u1 not strictly decreasing in a1 at (" + g.type_names[t] + ", a2=" +
                 g.a2_names[0] + ")");
      if (g.u1[t][i][1] > g.u1[t][i + 1][1])
        fail("A2", rep.a2_ok,
             "u1 increasing in a1 at (" + g.type_names[t] + ", a2=" +
                 g.a2_names[1] + ")");
    }
    // u1 strictly increasing in a2.
    for (std::size_t i = 0; i < na; ++i)
      if (!(g.u1[t][i][0] > g.u1[t][i][1]))
        fail("A2", rep.a2_ok,
             "u1 not strictly increasing in a2 at (" + g.type_names[t] + ", " +
                 g.a1_names[i] + ")");
  }
  for (std::size_t t = 0; t + 1 < nt; ++t) {
    for (std::size_t i = 0; i + 1 < na; ++i) {
      // Increasing differences in (theta, a1): strict at a2 top, weak below.
      Rat d_top_hi = g.u1[t][i][0] - g.u1[t][i + 1][0];
      Rat d_top_lo = g.u1[t + 1][i][0] - g.u1[t + 1][i + 1][0];
      if (!(d_top_hi > d_top_lo))
        fail("A2", rep.a2_ok,
             "differences in (theta,a1) not strict at a2=" + g.a2_names[0] +
                 " between " + g.type_names[t] + " and " + g.type_names[t + 1]);
      Rat d_bot_hi = g.u1[t][i][1] - g.u1[t + 1][i][1];
      Rat d_bot_lo = g.u1[t][i + 1][1] - g.u1[t + 1][i + 1][1];
      if (d_bot_hi < d_bot_lo)
        fail("A2", rep.a2_ok,
             "differences in (theta,a1) decreasing at a2=" + g.a2_names[1] +
                 " between " + g.type_names[t] + " and " + g.type_names[t + 1]);
    }
    // Weakly increasing differences in (theta, a2).
    for (std::size_t i = 0; i < na; ++i) {
      Rat d_hi = g.u1[t][i][0] - g.u1[t][i][1];
      Rat d_lo = g.u1[t + 1][i][0] - g.u1[t + 1][i][1];
      if (d_hi < d_lo)
        fail("A2", rep.a2_ok,
             "differences in (theta,a2) decreasing at a1=" + g.a1_names[i] +
                 " between " + g.type_names[t] + " and " + g.type_names[t + 1]);
    }
  }
  // u2 strictly increasing differences in (a1, a2).
  for (std::size_t i = 0; i + 1 < na; ++i)
    if (!(g.u2[i][0] - g.u2[i + 1][0] > g.u2[i][1] - g.u2[i + 1][1]))
      fail("A2", rep.a2_ok,
           "u2 differences in (a1,a2) not strictly increasing between " +
               g.a1_names[i] + " and " + g.a1_names[i + 1]);

  // A3: top type's Stackelberg action is max A1.
  if (rep.stackelberg_a1[0] != 0)
    fail("A3", rep.a3_ok,
         "top type's Stackelberg action is " + g.a1_names[rep.stackelberg_a1[0]] +
             ", not " + g.a1_names[0]);

  return rep;
}

// -------------------------------------------------------------------------
// Encoders for the standard application tables.  d is the effort cost borne
// when the counterparty does not trust (zero in the baseline).

inline GeneralGame encode_trust_simultaneous(const std::vector<Rat>& thetas,
                                             const Rat& b, const Rat& c,
                                             const std::vector<Rat>& d) {
  GeneralGame g;
  g.a1_names = {"H", "L"};
  g.a2_names = {"T", "N"};
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    g.type_names.push_back("theta_" + std::to_string(t + 1));
    g.u1.push_back({{1 - thetas[t], -d[t]}, {Rat(1), Rat(0)}});
  }
  g.u2 = {{b, Rat(0)}, {-c, Rat(0)}};
  return g;
}

inline GeneralGame encode_limit_pricing(const std::vector<Rat>& thetas,
                                        const Rat& b, const Rat& c,
                                        const std::vector<Rat>& d) {
  GeneralGame g;
  g.a1_names = {"LowPrice", "NormalPrice"};
  g.a2_names = {"Out", "Enter"};
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    g.type_names.push_back("theta_" + std::to_string(t + 1));
    g.u1.push_back({{1 - thetas[t], -d[t]}, {Rat(1), Rat(0)}});
  }
  g.u2 = {{Rat(0), -b}, {Rat(0), c}};
  return g;
}

inline GeneralGame encode_capital_taxation(const std::vector<Rat>& thetas,
                                           const Rat& b, const Rat& c) {
  GeneralGame g;
  g.a1_names = {"LowTax", "HighTax"};
  g.a2_names = {"Invest", "NotInvest"};
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    g.type_names.push_back("theta_" + std::to_string(t + 1));
    g.u1.push_back({{Rat(1), Rat(0)}, {1 + thetas[t], Rat(0)}});
  }
  g.u2 = {{b, Rat(0)}, {-c, Rat(0)}};
  return g;
}

inline GeneralGame encode_monetary_policy(const std::vector<Rat>& thetas,
                                          const std::vector<Rat>& d,
                                          const Rat& x1, const Rat& x2,
                                          const Rat& y1, const Rat& y2) {
  GeneralGame g;
  g.a1_names = {"LowInflation", "HighInflation"};
  g.a2_names = {"LowExpectation", "HighExpectation"};
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    g.type_names.push_back("theta_" + std::to_string(t + 1));
    g.u1.push_back({{1 - thetas[t], -d[t]}, {Rat(1), Rat(0)}});
  }
  g.u2 = {{x1, -y1}, {-y2, x2}};
  return g;
}

}  // namespace reputeq

#endif  // REPUTEQ_GAME_HPP
