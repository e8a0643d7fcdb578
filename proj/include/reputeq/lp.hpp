#ifndef REPUTEQ_LP_HPP
#define REPUTEQ_LP_HPP

#include <cmath>
#include <cstddef>
#include <optional>
#include <type_traits>
#include <vector>

#include "reputeq/errors.hpp"
#include "reputeq/game.hpp"
#include "reputeq/rational.hpp"

namespace reputeq {

template <class S>
struct lp_traits {
  static S feas_tol() { return S(0); }
  static S tie_tol() { return S(0); }
};
template <>
struct lp_traits<double> {
  static double feas_tol() { return 1e-9; }
  static double tie_tol() { return 1e-12; }
};

// Maximize objective . x subject to x >= 0, sum x = 1, A x <= rhs.
template <class S>
struct LinearProgram {
  std::vector<S> objective;
  std::vector<std::vector<S>> A;
  std::vector<S> rhs;
};

template <class S>
struct LpSolution {
  bool feasible = false;
  S value{};
  std::vector<S> x;                       // one optimizer
  std::vector<std::vector<S>> optima;     // all optimal vertices found
};

namespace detail {

// Solves M y = r exactly-ish by Gauss elimination; empty result if singular.
template <class S>
std::optional<std::vector<S>> solve_linear(std::vector<std::vector<S>> M,
                                           std::vector<S> r) {
  const std::size_t n = r.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && M[piv][col] == S(0)) ++piv;
    if constexpr (std::is_same_v<S, double>) {
      piv = col;
      for (std::size_t i = col + 1; i < n; ++i)
        if (std::abs(M[i][col]) > std::abs(M[piv][col])) piv = i;
      if (M[piv][col] == 0.0) return std::nullopt;
    } else {
      if (piv == n) return std::nullopt;
    }
    std::swap(M[piv], M[col]);
    std::swap(r[piv], r[col]);
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || M[i][col] == S(0)) continue;
      S f = M[i][col] / M[col][col];
      for (std::size_t jj = col; jj < n; ++jj) M[i][jj] -= f * M[col][jj];
      r[i] -= f * r[col];
    }
  }
  std::vector<S> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = r[i] / M[i][i];
  return y;
}

}  // namespace detail

// Enumerates basic feasible points: the simplex equality plus n-1 further
// tight rows chosen among the nonnegativity bounds and the inequality rows.
// Small dense programs only (n <= ~8).
template <class S>
LpSolution<S> solve_simplex_vertex_enum(const LinearProgram<S>& lp) {
  const std::size_t n = lp.objective.size();
  const std::size_t rows = n + lp.A.size();  // bounds first, then inequalities
  const S ftol = lp_traits<S>::feas_tol();
  const S ttol = lp_traits<S>::tie_tol();
  LpSolution<S> best;

  std::vector<std::size_t> pick;
  auto consider = [&](const std::vector<std::size_t>& tight) {
    std::vector<std::vector<S>> M;
    std::vector<S> r;
    M.push_back(std::vector<S>(n, S(1)));  // simplex equality
    r.push_back(S(1));
    for (std::size_t row : tight) {
      if (row < n) {
        std::vector<S> e(n, S(0));
        e[row] = S(1);
        M.push_back(e);
        r.push_back(S(0));
      } else {
        M.push_back(lp.A[row - n]);
        r.push_back(lp.rhs[row - n]);
      }
    }
    auto x = detail::solve_linear<S>(M, r);
    if (!x) return;
    for (const S& xi : *x)
      if (xi < -ftol) return;
    for (std::size_t i = 0; i < lp.A.size(); ++i) {
      S lhs = S(0);
      for (std::size_t jj = 0; jj < n; ++jj) lhs += lp.A[i][jj] * (*x)[jj];
      if (lhs > lp.rhs[i] + ftol) return;
    }
    S val = S(0);
    for (std::size_t jj = 0; jj < n; ++jj) val += lp.objective[jj] * (*x)[jj];
    if (!best.feasible || val > best.value + ttol) {
      best.feasible = true;
      best.value = val;
      best.x = *x;
      best.optima.clear();
      best.optima.push_back(*x);
    } else if (val >= best.value - ttol) {
      best.optima.push_back(*x);
      if (val > best.value) {
        best.value = val;
        best.x = *x;
      }
    }
  };

  // All (n-1)-subsets of the candidate tight rows.
  std::vector<std::size_t> idx(n > 0 ? n - 1 : 0);
  auto rec = [&](auto&& self, std::size_t start, std::size_t depth) -> void {
    if (depth == idx.size()) {
      consider(idx);
      return;
    }
    for (std::size_t row = start; row < rows; ++row) {
      idx[depth] = row;
      self(self, row + 1, depth + 1);
    }
  };
  if (n == 1) {
    consider({});
  } else {
    rec(rec, 0, 0);
  }
  return best;
}

// Payoff-bound program over outcome distributions (alpha_N, alpha_H, alpha_L):
// maximize (1-theta_j) a_H + a_L subject to the top type's cap and the
// trust constraint a_H >= gamma*/(1-gamma*) a_L.
template <class S>
LinearProgram<S> trust_lp(const S& theta_j, const S& theta_1, const S& gstar) {
  if (theta_1 > theta_j)
    throw Error(ErrorKind::TypeOrderViolation, "theta_1 must be the lowest cost");
  if (!(gstar > 0 && gstar < 1))
    throw Error(ErrorKind::ParameterOutOfRange, "gamma* must lie in (0,1)");
  LinearProgram<S> lp;
  lp.objective = {S(0), 1 - theta_j, S(1)};
  lp.A.push_back({S(0), 1 - theta_1, S(1)});
  lp.rhs.push_back(1 - theta_1);
  lp.A.push_back({S(0), S(-1), gstar / (1 - gstar)});
  lp.rhs.push_back(S(0));
  return lp;
}

template <class S>
struct TrustLpResult {
  S alpha_N, alpha_H, alpha_L;
  S value;
};

template <class S>
TrustLpResult<S> solve_trust_lp(const S& theta_j, const S& theta_1,
                                const S& gstar) {
  LinearProgram<S> lp = trust_lp(theta_j, theta_1, gstar);
  LpSolution<S> sol = solve_simplex_vertex_enum(lp);
  if (!sol.feasible)
    throw Error(ErrorKind::Infeasible, "trust LP has no feasible point");
  // Degenerate theta_j = theta_1 leaves a face of optima; prefer the vertex
  // with both constraints tight (max alpha_L, then alpha_H), which is the
  // closed-form optimizer in the nondegenerate case too.
  std::vector<S> pickd = sol.x;
  for (const auto& cand : sol.optima) {
    if (cand[2] > pickd[2] || (cand[2] == pickd[2] && cand[1] > pickd[1]))
      pickd = cand;
  }
  return TrustLpResult<S>{pickd[0], pickd[1], pickd[2], sol.value};
}

// Generalized payoff-bound program: maximize type j's payoff over joint
// distributions on
// A1 x A2, subject to the top type's cap and conditional best replies for
// every a2 in the support; solved per nonempty support subset of A2.
template <class S>
S solve_general_lp(const GeneralGame& g, std::size_t type_index) {
  AssumptionReport rep = check_assumptions(g);
  if (!rep.a1_ok || !rep.a3_ok)
    throw Error(ErrorKind::AssumptionViolation,
                rep.witnesses.empty() ? "A1/A3 fail" : rep.witnesses.front().detail);
  if (type_index >= g.n_types())
    throw Error(ErrorKind::ParameterOutOfRange, "type index out of range");
  const std::size_t na = g.n_a1();
  const std::size_t a1_bar = 0;
  const std::size_t a2_bar = rep.br2[a1_bar];
  const S cap = scalar_from<S>(g.u1[0][a1_bar][a2_bar]);

  bool any = false;
  S best{};
  const std::vector<std::vector<std::size_t>> supports = {{0}, {1}, {0, 1}};
  for (const auto& sup : supports) {
    // Variables: alpha(a1, a2) for a2 in sup, cell index i*|sup|+s.
    LinearProgram<S> lp;
    const std::size_t nv = na * sup.size();
    lp.objective.resize(nv);
    std::vector<S> cap_row(nv);
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t s = 0; s < sup.size(); ++s) {
        lp.objective[i * sup.size() + s] =
            scalar_from<S>(g.u1[type_index][i][sup[s]]);
        cap_row[i * sup.size() + s] = scalar_from<S>(g.u1[0][i][sup[s]]);
      }
    lp.A.push_back(cap_row);
    lp.rhs.push_back(cap);
    for (std::size_t s = 0; s < sup.size(); ++s) {
      std::size_t j_star = sup[s];
      std::size_t j_alt = 1 - j_star;
      std::vector<S> row(nv, S(0));
      for (std::size_t i = 0; i < na; ++i)
        row[i * sup.size() + s] =
            scalar_from<S>(g.u2[i][j_alt] - g.u2[i][j_star]);
      lp.A.push_back(row);
      lp.rhs.push_back(S(0));
    }
    LpSolution<S> sol = solve_simplex_vertex_enum(lp);
    if (sol.feasible && (!any || sol.value > best)) {
      any = true;
      best = sol.value;
    }
  }
  if (!any)
    throw Error(ErrorKind::Infeasible, "no support subset admits a feasible alpha");
  return best;
}

// Independent brute-force check: maximize over the simplex lattice with the
// given mesh, feasibility checked row by row.
template <class S>
struct GridResult {
  bool feasible = false;
  double value = 0;
};

inline GridResult<double> grid_oracle(const LinearProgram<double>& lp,
                                      double mesh) {
  if (!(mesh > 0) || mesh > 0.1)
    throw Error(ErrorKind::MeshOutOfRange, "mesh must lie in (0, 0.1]");
  const std::size_t n = lp.objective.size();
  const long long M = static_cast<long long>(std::llround(1.0 / mesh));
  GridResult<double> best;
  std::vector<long long> counts(n, 0);
  auto eval = [&]() {
    double val = 0;
    for (std::size_t i = 0; i < lp.A.size(); ++i) {
      double lhs = 0;
      for (std::size_t jj = 0; jj < n; ++jj)
        lhs += lp.A[i][jj] * (static_cast<double>(counts[jj]) / M);
      if (lhs > lp.rhs[i] + 1e-12) return;
    }
    for (std::size_t jj = 0; jj < n; ++jj)
      val += lp.objective[jj] * (static_cast<double>(counts[jj]) / M);
    if (!best.feasible || val > best.value) {
      best.feasible = true;
      best.value = val;
    }
  };
  auto rec = [&](auto&& self, std::size_t var, long long remaining) -> void {
    if (var + 1 == n) {
      counts[var] = remaining;
      eval();
      return;
    }
    for (long long k = 0; k <= remaining; ++k) {
      counts[var] = k;
      self(self, var + 1, remaining - k);
    }
  };
  rec(rec, 0, M);
  return best;
}

}  // namespace reputeq

#endif  // REPUTEQ_LP_HPP
