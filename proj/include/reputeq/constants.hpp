#ifndef REPUTEQ_CONSTANTS_HPP
#define REPUTEQ_CONSTANTS_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "reputeq/errors.hpp"
#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"

namespace reputeq {

// Every constant the equilibrium construction needs, derived deterministically
// from the game parameters.  Rationals are kept exact so the transition system
// can run in exact mode.
struct DerivedConstants {
  Rat gstar;
  BigInt n_hat, k_hat;  // smallest-denominator rational in (gamma*, gamma)
  BigInt n, k;          // scaled so that n/(k-1) < gamma as well
  Rat gamma_tilde, gamma_hat;
  Rat eta_star;
  Rat lambda;
  double a8_margin = 0;  // log of the selection check value at lambda
  std::vector<long long> kj;  // per type; meaningful for indices >= 2 (theta_3 up)
  long long Kcap = 0;         // sum of kj
  long long T = 0;            // belief-growth horizon constant
  long long S = 0;            // Class-1 escape horizon constant
  long long t_clamp = 0;      // exact clamp-run length from eta = pi_1
  long long Ncap = 0;         // ceil(1/(1-gamma))
  long long Mcap = 0;         // Class-2 count cap: Kcap + ceil(log(1/pi_1)/log(1/sqrt(g*))) + 1
  Rat Y;                      // lower-bound seed for p^H along Class-1 paths
  bool a2_ok = false;
  bool a25_ok = false;
  std::string delta_failure;      // empty when both flags hold
  double delta_threshold = 0;     // bisection estimate of the feasible cutoff

  bool delta_ok() const { return a2_ok && a25_ok; }
};

namespace detail {

inline BigInt rat_ceil(const Rat& a) {
  BigInt n = numerator(a), d = denominator(a);
  if (n >= 0) return BigInt((n + d - 1) / d);
  return BigInt(-((-n) / d));
}

inline double pow_int(double base, long long e) {
  return std::pow(base, static_cast<double>(e));
}

// log of (1-lambda g*)^(1-gamma_hat) (1+lambda(1-g*))^gamma_hat.
inline double a8_log_margin(double lambda, double gstar, double gamma_hat) {
  return (1 - gamma_hat) * std::log(1 - lambda * gstar) +
         gamma_hat * std::log(1 + lambda * (1 - gstar));
}

struct DeltaCheck {
  bool a2_ok, a25_ok;
  std::string failure;
};

inline DeltaCheck check_delta(double delta, double n, double k,
                              double gamma_tilde, long long T, long long N) {
  DeltaCheck r{true, true, ""};
  double s_n = 1 - std::pow(delta, n);
  double expr1 = s_n / (1 - std::pow(delta, k));
  double expr2 = std::pow(delta, k - n - 1) * s_n / (1 - std::pow(delta, k - 1));
  double lo = std::min(expr1, expr2), hi = std::max(expr1, expr2);
  if (!(lo < gamma_tilde && gamma_tilde < hi)) {
    r.a2_ok = false;
    r.failure = "trust-run weight check: gamma~ outside (" +
                std::to_string(lo) + ", " + std::to_string(hi) + ")";
  }
  double lhs1 = std::pow(delta, T + 1) * (1 - std::pow(delta, N + 1)) / (1 - delta);
  double lhs2 = 2 * std::pow(delta, T + N + 2);
  bool ok1 = lhs1 > static_cast<double>(N);
  bool ok2 = lhs2 > 1.0;
  if (!ok1 || !ok2) {
    r.a25_ok = false;
    // Cite the worse of the two by LHS/RHS ratio.
    double ratio1 = ok1 ? 2.0 : lhs1 / static_cast<double>(N);
    double ratio2 = ok2 ? 2.0 : lhs2;
    std::string msg =
        ratio2 <= ratio1
            ? "patience check: 2*delta^(T+N+2) = " + std::to_string(lhs2) +
                  " <= 1"
            : "patience check: delta^(T+1)*(1+...+delta^N) = " +
                  std::to_string(lhs1) + " <= N = " + std::to_string(N);
    r.failure = r.failure.empty() ? msg : r.failure + "; " + msg;
  }
  return r;
}

}  // namespace detail

inline DerivedConstants derive_constants(const GameSpec& spec,
                                         bool enforce_delta = true) {
  spec.validate();
  DerivedConstants cc;
  cc.gstar = spec.gstar();
  if (!(spec.gamma > cc.gstar && spec.gamma < 1))
    throw Error(ErrorKind::GammaOutOfRange, "gamma must lie in (gamma*, 1)");

  // Smallest-denominator rational strictly inside (gamma*, gamma), scaled by
  // the smallest j with n^ j / (k^ j - 1) < gamma.
  Fraction f = stern_brocot_min_denominator(cc.gstar, spec.gamma);
  cc.n_hat = f.num;
  cc.k_hat = f.den;
  Rat gap = spec.gamma * Rat(cc.k_hat) - Rat(cc.n_hat);  // > 0
  Rat q = spec.gamma / gap;
  BigInt j = detail::rat_floor(q) + 1;
  cc.n = cc.n_hat * j;
  cc.k = cc.k_hat * j;
  cc.gamma_tilde = (Rat(cc.n) / Rat(cc.k) + Rat(cc.n) / Rat(cc.k - 1)) / 2;
  cc.gamma_hat = (Rat(cc.n) / Rat(cc.k) + cc.gstar) / 2;

  const std::size_t m = spec.m();
  const Rat& pi1 = spec.prior[0];

  // Class-2 revelation counters k_j, smallest integers with
  // (1-g* pi_1) pi_j / k_j <= (1-g*) (pi_2+...+pi_{j-1} + pi_j/k_j).
  cc.kj.assign(m, 0);
  Rat mid_sum = 0;  // pi_2 + ... + pi_{j-1}
  for (std::size_t t = 2; t < m; ++t) {
    mid_sum += spec.prior[t - 1];
    Rat lhs = spec.prior[t] * cc.gstar * (1 - pi1);  // (A-B) pi_j with A-B = g*(1-pi_1)
    Rat kj_min = lhs / ((1 - cc.gstar) * mid_sum);
    BigInt kj = detail::rat_ceil(kj_min);
    if (kj < 1) kj = 1;
    cc.kj[t] = kj.convert_to<long long>();
    cc.Kcap += cc.kj[t];
  }

  // eta*: midpoint of the feasible band [max(g* pi_1, eta_min), pi_1).
  Rat eta_lo = cc.gstar * pi1;
  if (m >= 3) {
    Rat r;  // min over j>=3 of (pi_j/k_j)/(pi_2+...+pi_j)
    bool first = true;
    Rat tail = 0;
    for (std::size_t t = 2; t < m; ++t) {
      tail += spec.prior[t - 1];
      Rat cand = (spec.prior[t] / cc.kj[t]) / (tail + spec.prior[t]);
      if (first || cand < r) {
        r = cand;
        first = false;
      }
    }
    Rat eta_min = pi1 * (1 - r) / (1 - r * pi1);
    if (eta_min > eta_lo) eta_lo = eta_min;
  }
  cc.eta_star = (eta_lo + pi1) / 2;

  // lambda: largest power of ten below (1-sqrt(g*))/(2 g*), halved until the
  // selection inequality holds with log-margin >= 1e-6; if the interval is too
  // thin for that margin, the best positive-margin candidate is kept.
  const double gs = to_double(cc.gstar);
  const double ghat = to_double(cc.gamma_hat);
  const double bound = (1 - std::sqrt(gs)) / (2 * gs);
  Rat lam(1, 10);
  while (to_double(lam) >= bound) lam /= 10;
  Rat best_lam = 0;
  double best_margin = 0;
  bool found = false;
  for (int iter = 0; iter < 200; ++iter) {
    double margin = detail::a8_log_margin(to_double(lam), gs, ghat);
    if (margin >= 1e-6) {
      cc.lambda = lam;
      cc.a8_margin = margin;
      found = true;
      break;
    }
    if (margin > best_margin) {
      best_margin = margin;
      best_lam = lam;
    }
    lam /= 2;
  }
  if (!found) {
    if (!(best_margin > 0))
      throw Error(ErrorKind::ParameterOutOfRange,
                  "no feasible lambda for the belief-growth inequality");
    cc.lambda = best_lam;
    cc.a8_margin = best_margin;
  }

  const double lam_d = to_double(cc.lambda);
  const double up = std::log(1 + lam_d * (1 - gs));
  cc.T = static_cast<long long>(std::ceil(std::log(1 / to_double(pi1)) / up));
  const double clamp_ratio =
      to_double((1 - cc.eta_star) / (pi1 - cc.eta_star));
  cc.t_clamp = static_cast<long long>(std::ceil(std::log(clamp_ratio) / up));
  cc.S = static_cast<long long>(std::ceil(std::log(clamp_ratio) / cc.a8_margin));
  cc.Ncap = detail::rat_ceil(1 / (1 - spec.gamma)).convert_to<long long>();
  cc.Mcap = cc.Kcap +
            static_cast<long long>(std::ceil(std::log(1 / to_double(pi1)) /
                                             std::log(1 / std::sqrt(gs)))) +
            1;
  cc.Y = (spec.gamma - (1 - spec.gamma) * cc.gamma_tilde / (1 - cc.gamma_tilde)) *
         (1 - spec.thetas[0]) / (1 - spec.gamma * spec.thetas[0]) / 2;

  const double n_d = cc.n.convert_to<double>();
  const double k_d = cc.k.convert_to<double>();
  auto dc = detail::check_delta(to_double(spec.delta), n_d, k_d,
                                to_double(cc.gamma_tilde), cc.T, cc.Ncap);
  cc.a2_ok = dc.a2_ok;
  cc.a25_ok = dc.a25_ok;
  cc.delta_failure = dc.failure;
  if (!cc.delta_ok()) {
    double lo = to_double(spec.delta), hi = 1.0 - 1e-12;
    for (int it = 0; it < 60; ++it) {
      double mid = (lo + hi) / 2;
      auto probe = detail::check_delta(mid, n_d, k_d, to_double(cc.gamma_tilde),
                                       cc.T, cc.Ncap);
      (probe.a2_ok && probe.a25_ok ? hi : lo) = mid;
    }
    cc.delta_threshold = hi;
    if (enforce_delta)
      throw Error(ErrorKind::DeltaTooLow,
                  cc.delta_failure + "; estimated feasible delta >= " +
                      std::to_string(cc.delta_threshold));
  }
  return cc;
}

}  // namespace reputeq

#endif  // REPUTEQ_CONSTANTS_HPP
