#ifndef REPUTEQ_SIMULATE_HPP
#define REPUTEQ_SIMULATE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "reputeq/constants.hpp"
#include "reputeq/equilibrium.hpp"
#include "reputeq/errors.hpp"
#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"

namespace reputeq {

struct OutcomeDist {
  double N = 0, H = 0, L = 0;
  double tail_bound = 0;  // discounted mass beyond the recorded horizon
};

struct TraceRecord {
  Outcome outcome;
  double eta;
  HistClass cls;  // class of the state the period started in
  double pN, pH, pL;
  std::vector<double> h_prob;  // per-type prescribed H-probability
};

struct Trace {
  std::size_t true_type = 0;
  std::uint64_t seed = 0;
  double delta = 0;
  std::vector<TraceRecord> records;
  long long absorption = -1;  // first period whose state is Class 3; -1 if none
  long long class2_count = 0;
  bool eta_reached_1 = false;
  double kl_sum = 0;          // sum of per-period KL terms before absorption
  double tail_residual = 0;   // schedule residual at the horizon, if absorbed
  bool degraded = false;      // path hit a promise-budget shortfall
};

// Per-path aggregate kept by run_experiment.
struct PathSummary {
  double payoff = 0;
  double aN = 0, aH = 0, aL = 0;
  long long absorption = -1;
  long long class2_count = 0;
  bool eta_reached_1 = false;
  double kl_sum = 0;
  long long kl_over = 0;  // periods whose one-period KL exceeded kl_eps
  bool degraded = false;  // path hit a promise-budget shortfall
};

struct TypeStats {
  std::size_t type = 0;
  long long n_paths = 0;
  double mean_payoff = 0, se_payoff = 0;
  double aN = 0, aH = 0, aL = 0;  // discounted outcome weights, path-averaged
  double mean_absorption = 0, se_absorption = 0;
  std::map<long long, long long> class2_histogram;
  long long max_class2 = 0;
  double eta_hit_frac = 0;
  double mean_kl = 0, se_kl = 0;
  long long not_absorbed = 0;  // paths that never reached Class 3 (must be 0)
  long long degraded_paths = 0;  // paths that hit a promise-budget shortfall
  std::vector<PathSummary> paths;
};

struct ExperimentStats {
  std::vector<TypeStats> per_type;
  long long n_paths = 0;
  long long horizon = 0;
  std::uint64_t seed0 = 0;
};

inline long long default_horizon(double delta, double tol = 1e-4) {
  return static_cast<long long>(std::ceil(std::log(tol) / std::log(delta)));
}

namespace detail {

inline double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

// Distinct streams must not be plain arithmetic shifts of each other: the
// generator itself steps by the same constant, which would make path k's
// stream a one-draw shift of path k+1's. Mixing once decorrelates them.
inline std::uint64_t path_seed(std::uint64_t seed0, std::uint64_t index) {
  std::uint64_t s = seed0 + 0x9E3779B97F4A7C15ULL * (index + 1);
  return splitmix64(s);
}

// KL divergence of Bernoulli(p) from Bernoulli(q), with 0 ln 0 = 0.
inline double bernoulli_kl(double p, double q) {
  double s = 0;
  if (p > 0) {
    if (q <= 0) return std::numeric_limits<double>::infinity();
    s += p * std::log(p / q);
  }
  if (p < 1) {
    if (q >= 1) return std::numeric_limits<double>::infinity();
    s += (1 - p) * std::log((1 - p) / (1 - q));
  }
  return s;
}

}  // namespace detail

// Plays the constructed equilibrium forward for one seller type, drawing the
// type's action from its prescribed mixture each period.  After the first
// Class-3 period the path is deterministic (schedule).  When record_trace is
// false only the summary fields are filled in (records stays empty).
inline Trace simulate_path(const Params<double>& p, const EqState<double>& init,
                           std::size_t type_index, std::uint64_t seed,
                           long long horizon, PathSummary* summary = nullptr) {
  Trace tr;
  tr.true_type = type_index;
  tr.seed = seed;
  tr.delta = p.delta;
  std::uint64_t rng = seed;
  EqState<double> st = init;
  double disc = 1.0;  // delta^t
  double aN = 0, aH = 0, aL = 0;

  for (long long t = 0; t < horizon; ++t) {
    if (st.cls == HistClass::Class3 && tr.absorption < 0) tr.absorption = t;
    if (st.cls == HistClass::Class2) ++tr.class2_count;
    if (st.eta == 1.0) tr.eta_reached_1 = true;

    Prescription<double> pr = prescribe(p, st);
    Outcome y;
    if (st.cls == HistClass::Class3) {
      y = pr.buyer_trusts ? Outcome::H : Outcome::N;
    } else {
      tr.kl_sum += detail::bernoulli_kl(pr.h_prob[type_index], pr.agg_H);
      double u = detail::uniform01(rng);
      y = u < pr.h_prob[type_index] ? Outcome::H : Outcome::L;
    }
    tr.records.push_back({y, st.eta, st.cls, st.pN, st.pH, st.pL, pr.h_prob});
    double w = (1 - p.delta) * disc;
    if (y == Outcome::N) aN += w;
    else if (y == Outcome::H) aH += w;
    else aL += w;
    disc *= p.delta;
    st = transition(p, st, y);
  }
  if (st.eta == 1.0) tr.eta_reached_1 = true;
  if (st.cls == HistClass::Class3) tr.tail_residual = st.fm_residual;
  tr.degraded = st.degraded;

  if (summary) {
    PathSummary s;
    s.degraded = st.degraded;
    s.absorption = tr.absorption;
    s.class2_count = tr.class2_count;
    s.eta_reached_1 = tr.eta_reached_1;
    s.kl_sum = tr.kl_sum;
    if (st.cls == HistClass::Class3) {
      // The tail H-weight from the horizon equals the schedule residual.
      aH += disc * st.fm_residual;
      aN += disc * (1 - st.fm_residual);
    }
    s.aN = aN;
    s.aH = aH;
    s.aL = aL;
    s.payoff = (1 - p.thetas[type_index]) * aH + aL;
    *summary = s;
  }
  return tr;
}

// Discounted outcome frequencies of a recorded trace, with the truncated tail
// assigned from the schedule residual at the horizon.
inline OutcomeDist discounted_frequency(const Trace& tr, double delta) {
  if (tr.records.empty())
    throw Error(ErrorKind::EmptyTrace, "trace has no recorded periods");
  OutcomeDist d;
  double disc = 1.0;
  for (const TraceRecord& r : tr.records) {
    double w = (1 - delta) * disc;
    if (r.outcome == Outcome::N) d.N += w;
    else if (r.outcome == Outcome::H) d.H += w;
    else d.L += w;
    disc *= delta;
  }
  d.tail_bound = disc;
  if (tr.absorption >= 0) {
    d.H += disc * tr.tail_residual;
    d.N += disc * (1 - tr.tail_residual);
    d.tail_bound = 0;
  }
  return d;
}

namespace detail {

// Streaming path runner used by run_experiment: no trace storage, analytic
// tail as soon as the path enters Class 3.
inline PathSummary run_path(const Params<double>& p,
                            const EqState<double>& init,
                            std::size_t type_index, std::uint64_t seed,
                            long long horizon, double kl_eps = 0.01) {
  PathSummary s;
  std::uint64_t rng = seed;
  EqState<double> st = init;
  double disc = 1.0;
  long long t = 0;
  for (; t < horizon; ++t) {
    if (st.cls == HistClass::Class3) break;
    if (st.cls == HistClass::Class2) ++s.class2_count;
    if (st.eta == 1.0) s.eta_reached_1 = true;
    Prescription<double> pr = prescribe(p, st);
    double kl = bernoulli_kl(pr.h_prob[type_index], pr.agg_H);
    s.kl_sum += kl;
    if (kl > kl_eps) ++s.kl_over;
    double u = uniform01(rng);
    Outcome y = u < pr.h_prob[type_index] ? Outcome::H : Outcome::L;
    double w = (1 - p.delta) * disc;
    if (y == Outcome::H) s.aH += w;
    else s.aL += w;
    disc *= p.delta;
    st = transition(p, st, y);
  }
  if (st.eta == 1.0) s.eta_reached_1 = true;
  s.degraded = st.degraded;
  if (st.cls == HistClass::Class3) {
    s.absorption = t;
    s.aH += disc * st.fm_residual;
    s.aN += disc * (1 - st.fm_residual);
  }
  s.aN += 1.0 - (s.aN + s.aH + s.aL);  // numeric closure; exact tail otherwise
  s.payoff = (1 - p.thetas[type_index]) * s.aH + s.aL;
  return s;
}

inline void mean_se(const std::vector<double>& xs, double& mean, double& se) {
  mean = 0;
  se = 0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  double var = ss / static_cast<double>(xs.size() - 1);
  se = std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace detail

inline ExperimentStats run_experiment(const GameSpec& spec,
                                      const DerivedConstants& cc,
                                      long long n_paths, long long horizon,
                                      std::uint64_t seed0,
                                      bool enforce_delta = true,
                                      double kl_eps = 0.01) {
  if (n_paths < 1)
    throw Error(ErrorKind::ParameterOutOfRange, "n_paths must be >= 1");
  Params<double> p = make_params<double>(spec, cc);
  EqState<double> init = initial_state<double>(spec, cc, enforce_delta);
  ExperimentStats out;
  out.n_paths = n_paths;
  out.horizon = horizon;
  out.seed0 = seed0;
  for (std::size_t j = 0; j < p.m; ++j) {
    TypeStats ts;
    ts.type = j;
    ts.n_paths = n_paths;
    ts.paths.reserve(static_cast<std::size_t>(n_paths));
    std::vector<double> pay, absn, kls;
    long long eta_hits = 0;
    for (long long i = 0; i < n_paths; ++i) {
      std::uint64_t seed = detail::path_seed(
          seed0, static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(n_paths) +
                     static_cast<std::uint64_t>(i));
      PathSummary s = detail::run_path(p, init, j, seed, horizon, kl_eps);
      ts.aN += s.aN;
      ts.aH += s.aH;
      ts.aL += s.aL;
      pay.push_back(s.payoff);
      kls.push_back(s.kl_sum);
      if (s.absorption >= 0)
        absn.push_back(static_cast<double>(s.absorption));
      else
        ++ts.not_absorbed;
      ++ts.class2_histogram[s.class2_count];
      if (s.class2_count > ts.max_class2) ts.max_class2 = s.class2_count;
      if (s.degraded) ++ts.degraded_paths;
      if (s.eta_reached_1) ++eta_hits;
      ts.paths.push_back(s);
    }
    double n = static_cast<double>(n_paths);
    ts.aN /= n;
    ts.aH /= n;
    ts.aL /= n;
    detail::mean_se(pay, ts.mean_payoff, ts.se_payoff);
    detail::mean_se(absn, ts.mean_absorption, ts.se_absorption);
    detail::mean_se(kls, ts.mean_kl, ts.se_kl);
    ts.eta_hit_frac = static_cast<double>(eta_hits) / n;
    out.per_type.push_back(std::move(ts));
  }
  return out;
}

}  // namespace reputeq

#endif  // REPUTEQ_SIMULATE_HPP
