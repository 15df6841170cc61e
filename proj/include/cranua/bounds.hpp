// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <armadillo>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cranua/assignment.hpp"
#include "cranua/common.hpp"
#include "cranua/coupling.hpp"
#include "cranua/lp.hpp"

namespace cranua {

// Lower bounds and certificates for the user-assignment program: full
// enumeration of the Dantzig-Wolfe vertex set S_rho, the DW LP (exact and via
// column generation), the dual bound, analytic gap bounds, the two-domain
// closed-form solver and the exhaustive oracle.

namespace detail {

inline std::vector<std::vector<arma::uword>> all_combinations(arma::uword n, arma::uword k) {
  std::vector<std::vector<arma::uword>> out;
  if (k > n) return out;
  std::vector<arma::uword> cur(k);
  for (arma::uword i = 0; i < k; ++i) cur[i] = i;
  for (;;) {
    out.push_back(cur);
    // next combination in lexicographic order
    arma::sword i = static_cast<arma::sword>(k) - 1;
    while (i >= 0 && cur[i] == n - k + static_cast<arma::uword>(i)) --i;
    if (i < 0) break;
    ++cur[i];
    for (arma::uword j = static_cast<arma::uword>(i) + 1; j < k; ++j) cur[j] = cur[j - 1] + 1;
  }
  return out;
}

inline std::uint64_t binomial(arma::uword n, arma::uword k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (arma::uword i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Rank of a sorted index set among C(n, k) combinations in lexicographic order.
inline std::uint64_t combination_rank(arma::uword n, const std::vector<arma::uword>& set) {
  std::uint64_t rank = 0;
  arma::uword prev = 0;
  const arma::uword k = static_cast<arma::uword>(set.size());
  for (arma::uword i = 0; i < k; ++i) {
    for (arma::uword c = prev; c < set[i]; ++c) rank += binomial(n - c - 1, k - i - 1);
    prev = set[i] + 1;
  }
  return rank;
}

}  // namespace detail

// Complete enumeration of S_rho = { Q binary U_T x A : Q'1 = rho }. Columns
// may overlap; the assignment constraint X1 <= 1 enters the DW problem only
// through Gamma w <= 0.
struct ColumnSet {
  arma::uword num_users = 0;
  arma::uword num_domains = 0;
  std::vector<arma::uword> rho;
  std::uint64_t size = 0;  // S = prod_k C(U_T, rho_k)

  arma::vec alpha;          // alpha_j = tr(Q_j' Psi Q_j Omega)
  arma::Mat<int> qvec;      // column j is q_j = Q_j 1 - 1
  std::vector<std::vector<std::vector<arma::uword>>> domain_combos;  // per domain

  // Decode enumeration index -> per-domain combination indices (domain 0 most
  // significant, last domain fastest).
  std::vector<std::size_t> decode(std::uint64_t j) const {
    std::vector<std::size_t> idx(num_domains);
    for (arma::uword k = num_domains; k-- > 0;) {
      const std::uint64_t nk = domain_combos[k].size();
      idx[k] = static_cast<std::size_t>(j % nk);
      j /= nk;
    }
    return idx;
  }

  std::vector<std::vector<arma::uword>> member(std::uint64_t j) const {
    auto idx = decode(j);
    std::vector<std::vector<arma::uword>> q(num_domains);
    for (arma::uword k = 0; k < num_domains; ++k) q[k] = domain_combos[k][idx[k]];
    return q;
  }

  std::uint64_t rank_of(const std::vector<std::vector<arma::uword>>& member) const {
    std::uint64_t j = 0;
    for (arma::uword k = 0; k < num_domains; ++k)
      j = j * domain_combos[k].size() + detail::combination_rank(num_users, member[k]);
    return j;
  }
};

inline ColumnSet enumerate_columns(const arma::mat& psi, const std::vector<arma::uword>& rho,
                                   std::uint64_t cap = 1000000) {
  ColumnSet cs;
  cs.num_users = psi.n_rows;
  cs.num_domains = static_cast<arma::uword>(rho.size());
  cs.rho = rho;
  if (psi.n_rows != psi.n_cols) throw DimensionError("enumerate_columns: psi must be square");

  std::uint64_t s = 1;
  for (arma::uword k = 0; k < cs.num_domains; ++k) {
    const std::uint64_t nk = detail::binomial(cs.num_users, rho[k]);
    if (nk == 0) throw InfeasibleError("enumerate_columns: rho_k exceeds U_T");
    if (s > std::numeric_limits<std::uint64_t>::max() / nk)
      throw TooLargeError("enumerate_columns: |S_rho| exceeds cap");
    s *= nk;
    if (s > cap) throw TooLargeError("enumerate_columns: |S_rho| exceeds cap");
  }
  cs.size = s;

  cs.domain_combos.resize(cs.num_domains);
  for (arma::uword k = 0; k < cs.num_domains; ++k)
    cs.domain_combos[k] = detail::all_combinations(cs.num_users, rho[k]);

  cs.alpha.set_size(s);
  cs.qvec.set_size(cs.num_users, s);

  std::vector<std::size_t> odo(cs.num_domains, 0);
  for (std::uint64_t j = 0; j < s; ++j) {
    double a = 0.0;
    for (arma::uword k = 0; k < cs.num_domains; ++k) {
      const auto& sk = cs.domain_combos[k][odo[k]];
      for (arma::uword l = 0; l < cs.num_domains; ++l) {
        if (l == k) continue;
        const auto& sl = cs.domain_combos[l][odo[l]];
        for (arma::uword u : sk)
          for (arma::uword v : sl) a += psi(u, v);
      }
    }
    cs.alpha(j) = a;
    arma::Col<int> q(cs.num_users);
    q.fill(-1);
    for (arma::uword k = 0; k < cs.num_domains; ++k)
      for (arma::uword u : cs.domain_combos[k][odo[k]]) q(u) += 1;
    cs.qvec.col(j) = q;

    for (arma::uword k = cs.num_domains; k-- > 0;) {  // odometer, last domain fastest
      if (++odo[k] < cs.domain_combos[k].size()) break;
      odo[k] = 0;
    }
  }
  return cs;
}

struct DwSolution {
  double value = 0.0;
  std::vector<std::pair<std::uint64_t, double>> w;  // nonzero weights only
  std::vector<std::uint64_t> active;                // T_L for CGM, support for full solve
  arma::uword iterations = 0;                       // columns priced in by CGM
};

// (P_DW): min alpha'w s.t. Gamma w <= 0, 1'w = 1, w >= 0, solved outright.
inline DwSolution solve_dw_full(const ColumnSet& cols) {
  const std::uint64_t s = cols.size;
  LpProblem p;
  p.c = cols.alpha;
  p.G = arma::conv_to<arma::mat>::from(cols.qvec);
  p.h.zeros(cols.num_users);
  p.E.ones(1, s);
  p.d = arma::vec{1.0};
  LpSolution sol = solve_lp(p);
  if (sol.status == LpStatus::Infeasible)
    throw InfeasibleError("solve_dw_full: no assignment-feasible convex combination (sum rho > U_T)");
  if (sol.status != LpStatus::Optimal) throw SolverError("solve_dw_full: LP did not reach optimality");

  DwSolution dw;
  dw.value = sol.objective;
  for (std::uint64_t j = 0; j < s; ++j)
    if (sol.x(j) > 1e-12) {
      dw.w.emplace_back(j, sol.x(j));
      dw.active.push_back(j);
    }
  return dw;
}

namespace detail {

// m0 column-disjoint members of S_rho obtained by rotating the domain order
// over consecutive user blocks; any one of them makes the RMP feasible.
inline std::vector<std::uint64_t> default_initial_columns(const ColumnSet& cols, arma::uword m0) {
  std::uint64_t total = 0;
  for (auto r : cols.rho) total += r;
  if (total > cols.num_users)
    throw InfeasibleError("solve_dw_cgm: sum rho > U_T, restricted master cannot be made feasible");

  std::vector<std::uint64_t> t0;
  const arma::uword na = cols.num_domains;
  for (arma::uword shift = 0; shift < na && t0.size() < m0; ++shift) {
    std::vector<std::vector<arma::uword>> member(na);
    arma::uword next = 0;
    for (arma::uword step = 0; step < na; ++step) {
      const arma::uword k = (step + shift) % na;
      for (arma::uword i = 0; i < cols.rho[k]; ++i) member[k].push_back(next++);
    }
    const std::uint64_t rank = cols.rank_of(member);
    if (std::find(t0.begin(), t0.end(), rank) == t0.end()) t0.push_back(rank);
  }
  // Pad with the lowest-index unused columns if more were requested.
  for (std::uint64_t j = 0; t0.size() < std::min<std::uint64_t>(m0, cols.size) && j < cols.size; ++j)
    if (std::find(t0.begin(), t0.end(), j) == t0.end()) t0.push_back(j);
  return t0;
}

}  // namespace detail

// Algorithm "DW solution via CGM". Solves the restricted master over the
// active columns, reads the duals (mu*, pi*), prices the inactive columns by
// reduced cost d_j = alpha_j + q_j'mu* - pi* and adds the most negative one
// until min_j d_j >= -1e-9 or every column is active. Exact: the final value
// matches solve_dw_full.
inline DwSolution solve_dw_cgm(const ColumnSet& cols, arma::uword m0 = 0,
                               const std::optional<std::vector<std::uint64_t>>& t0_override = {}) {
  if (m0 == 0) m0 = cols.num_domains;
  std::vector<std::uint64_t> active =
      t0_override ? *t0_override : detail::default_initial_columns(cols, m0);
  if (active.empty()) throw ConfigError("solve_dw_cgm: empty initial column set");
  std::vector<char> is_active(cols.size, 0);
  for (auto j : active) is_active[j] = 1;

  DwSolution dw;
  LpSolution rmp;
  for (;;) {
    const std::size_t m = active.size();
    LpProblem p;
    p.c.set_size(m);
    p.G.set_size(cols.num_users, m);
    for (std::size_t t = 0; t < m; ++t) {
      p.c(t) = cols.alpha(active[t]);
      p.G.col(t) = arma::conv_to<arma::vec>::from(cols.qvec.col(active[t]));
    }
    p.h.zeros(cols.num_users);
    p.E.ones(1, m);
    p.d = arma::vec{1.0};
    rmp = solve_lp(p);
    if (rmp.status == LpStatus::Infeasible)
      throw InfeasibleError("solve_dw_cgm: restricted master infeasible");
    if (rmp.status != LpStatus::Optimal) throw SolverError("solve_dw_cgm: RMP not optimal");

    if (active.size() == cols.size) break;

    const arma::vec& mu = rmp.mu;
    const double pi = rmp.pi(0);
    double best_d = std::numeric_limits<double>::infinity();
    std::uint64_t best_j = cols.size;
    for (std::uint64_t j = 0; j < cols.size; ++j) {
      if (is_active[j]) continue;
      double d = cols.alpha(j) - pi;
      for (arma::uword u = 0; u < cols.num_users; ++u) d += cols.qvec(u, j) * mu(u);
      if (d < best_d) {
        best_d = d;
        best_j = j;
      }
    }
    if (best_d >= -1e-9) break;
    active.push_back(best_j);
    is_active[best_j] = 1;
    dw.iterations += 1;
  }

  dw.value = rmp.objective;
  dw.active = active;
  for (std::size_t t = 0; t < active.size(); ++t)
    if (rmp.x(t) > 1e-12) dw.w.emplace_back(active[t], rmp.x(t));
  std::sort(dw.w.begin(), dw.w.end());
  return dw;
}

struct DualSolution {
  double value = 0.0;
  arma::vec lambda;  // multipliers of the assignment rows, >= 0
};

// (D7): min alpha'w s.t. Gamma w <= 0, 1'w >= 1, w >= 0. Equals d(lambda*) of
// the Lagrangian dual by strong LP duality; lambda* is read off the Gamma-row
// multipliers.
inline DualSolution solve_dual(const ColumnSet& cols) {
  const std::uint64_t s = cols.size;
  LpProblem p;
  p.c = cols.alpha;
  p.G.set_size(cols.num_users + 1, s);
  p.G.rows(0, cols.num_users - 1) = arma::conv_to<arma::mat>::from(cols.qvec);
  p.G.row(cols.num_users) = -arma::ones<arma::rowvec>(s);
  p.h.zeros(cols.num_users + 1);
  p.h(cols.num_users) = -1.0;
  LpSolution sol = solve_lp(p);
  if (sol.status == LpStatus::Infeasible)
    throw InfeasibleError("solve_dual: infeasible (sum rho > U_T)");
  if (sol.status != LpStatus::Optimal) throw SolverError("solve_dual: LP did not reach optimality");
  DualSolution ds;
  ds.value = sol.objective;
  ds.lambda = sol.mu.head(cols.num_users);
  return ds;
}

inline double loading_eta(const std::vector<arma::uword>& rho) {
  double total = 0.0, sq = 0.0;
  for (auto r : rho) {
    total += static_cast<double>(r);
    sq += static_cast<double>(r) * static_cast<double>(r);
  }
  return total * total - sq;  // sum_k sum_{l != k} rho_k rho_l
}

struct DwGapBounds {
  double tight = 0.0;  // eta sigma_max - min_j alpha_j
  double loose = 0.0;  // eta (sigma_max - sigma_min)
  double eta = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};

inline DwGapBounds dw_gap_bounds(const arma::mat& psi, const std::vector<arma::uword>& rho,
                                 const ColumnSet& cols) {
  DwGapBounds b;
  b.eta = loading_eta(rho);
  arma::vec sv = arma::svd(psi);
  b.sigma_max = sv.max();
  b.sigma_min = sv.min();
  b.tight = b.eta * b.sigma_max - cols.alpha.min();
  b.loose = b.eta * (b.sigma_max - b.sigma_min);
  return b;
}

inline double duality_gap_bound(const arma::mat& psi, const std::vector<arma::uword>& rho,
                                const arma::vec& lambda) {
  arma::vec sv = arma::svd(psi);
  double total_rho = 0.0;
  for (auto r : rho) total_rho += static_cast<double>(r);
  return loading_eta(rho) * (sv.max() - sv.min()) + arma::accu(lambda) - total_rho * lambda.min();
}

struct OracleResult {
  Assignment assignment;
  double f = 0.0;
};

inline std::uint64_t count_feasible_assignments(arma::uword num_users,
                                                const std::vector<arma::uword>& rho) {
  std::uint64_t count = 1;
  arma::uword left = num_users;
  for (auto r : rho) {
    if (r > left) return 0;
    const std::uint64_t c = detail::binomial(left, r);
    if (c != 0 && count > std::numeric_limits<std::uint64_t>::max() / c)
      return std::numeric_limits<std::uint64_t>::max();
    count *= c;
    left -= r;
  }
  return count;
}

// Global minimizer of Problem 1 by full enumeration of the feasible set.
// Deterministic tie-break: enumeration is lexicographic over the served index
// lists (domain-major) and the first minimizer encountered wins.
inline OracleResult exhaustive_oracle(const arma::mat& psi, const std::vector<arma::uword>& rho,
                                      std::uint64_t cap = 10000000) {
  const arma::uword ut = psi.n_rows;
  if (psi.n_rows != psi.n_cols) throw DimensionError("exhaustive_oracle: psi must be square");
  const std::uint64_t count = count_feasible_assignments(ut, rho);
  if (count == 0) throw InfeasibleError("exhaustive_oracle: no feasible assignment");
  if (count > cap) throw TooLargeError("exhaustive_oracle: feasible set exceeds cap");

  const std::size_t na = rho.size();
  std::vector<std::vector<arma::uword>> current(na), best;
  std::vector<char> used(ut, 0);
  double best_f = std::numeric_limits<double>::infinity();

  Assignment probe;
  probe.num_users = ut;

  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == na) {
      probe.served = current;
      const double f = total_leakage_vector(psi, probe);
      if (f < best_f) {
        best_f = f;
        best = current;
      }
      return;
    }
    std::vector<arma::uword> avail;
    for (arma::uword u = 0; u < ut; ++u)
      if (!used[u]) avail.push_back(u);
    for (const auto& combo : detail::all_combinations(static_cast<arma::uword>(avail.size()), rho[k])) {
      current[k].clear();
      for (arma::uword idx : combo) {
        current[k].push_back(avail[idx]);
        used[avail[idx]] = 1;
      }
      rec(k + 1);
      for (arma::uword idx : combo) used[avail[idx]] = 0;
    }
  };
  rec(0);

  OracleResult out;
  out.assignment.num_users = ut;
  out.assignment.served = best;
  out.f = best_f;
  return out;
}

// Two-domain full-load exact solver: with x_2 = 1 - x_1 the objective is
// x' PsiBar 1 - x' PsiBar x over 1'x = rho, minimized by scanning all
// C(U_T, rho) candidates. Ties break toward the lexicographically lowest
// served index list, matching the oracle's enumeration order.
inline OracleResult solve_two_domain_exact(const arma::mat& psi,
                                           const std::vector<arma::uword>& rho) {
  const arma::uword ut = psi.n_rows;
  if (rho.size() != 2) throw UnsupportedError("solve_two_domain_exact: needs exactly two domains");
  if (ut % 2 != 0 || rho[0] != rho[1] || rho[0] + rho[1] != ut)
    throw UnsupportedError("solve_two_domain_exact: needs full equal loading rho = U_T/2");

  const arma::mat psi_bar = psi + psi.t();
  const arma::vec row_tot = psi_bar * arma::ones(ut);

  // (x, 1-x) and (1-x, x) are the same split, so only the representative with
  // user 0 in the first block is scanned; that is also the one the oracle's
  // enumeration order settles on.
  double best_alpha = std::numeric_limits<double>::infinity();
  std::vector<arma::uword> best;
  for (const auto& tail : detail::all_combinations(ut - 1, rho[0] - 1)) {
    std::vector<arma::uword> combo = {0};
    for (arma::uword u : tail) combo.push_back(u + 1);
    double a = 0.0;
    for (arma::uword u : combo) {
      a += row_tot(u);
      for (arma::uword v : combo) a -= psi_bar(u, v);
    }
    if (a < best_alpha) {
      best_alpha = a;
      best = combo;
    }
  }

  OracleResult out;
  out.assignment.num_users = ut;
  out.assignment.served.resize(2);
  out.assignment.served[0] = best;
  std::vector<char> in_first(ut, 0);
  for (arma::uword u : best) in_first[u] = 1;
  for (arma::uword u = 0; u < ut; ++u)
    if (!in_first[u]) out.assignment.served[1].push_back(u);
  out.f = total_leakage_vector(psi, out.assignment);
  return out;
}

// One-stop bundle for reporting: BCD value, oracle, DW (full + CGM), dual and
// the analytic gap certificates.
struct BoundsReport {
  double f_bcd = 0.0;
  std::optional<double> f_oracle;
  double f_dw = 0.0;
  double f_dual = 0.0;
  double eta = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double lemma2_bound_tight = 0.0;
  double lemma2_bound_loose = 0.0;
  double lemma3_bound = 0.0;
  double f_dw_cgm = 0.0;
  arma::uword cgm_iterations = 0;
};

inline BoundsReport compute_bounds_report(const arma::mat& psi, const std::vector<arma::uword>& rho,
                                          double f_bcd, std::uint64_t column_cap = 1000000,
                                          std::uint64_t oracle_cap = 10000000) {
  BoundsReport r;
  r.f_bcd = f_bcd;
  ColumnSet cols = enumerate_columns(psi, rho, column_cap);
  DwSolution full = solve_dw_full(cols);
  DwSolution cgm = solve_dw_cgm(cols);
  DualSolution dual = solve_dual(cols);
  DwGapBounds gaps = dw_gap_bounds(psi, rho, cols);
  r.f_dw = full.value;
  r.f_dw_cgm = cgm.value;
  r.cgm_iterations = cgm.iterations;
  r.f_dual = dual.value;
  r.eta = gaps.eta;
  r.sigma_max = gaps.sigma_max;
  r.sigma_min = gaps.sigma_min;
  r.lemma2_bound_tight = gaps.tight;
  r.lemma2_bound_loose = gaps.loose;
  r.lemma3_bound = duality_gap_bound(psi, rho, dual.lambda);
  if (count_feasible_assignments(psi.n_rows, rho) <= oracle_cap)
    r.f_oracle = exhaustive_oracle(psi, rho, oracle_cap).f;
  return r;
}

}  // namespace cranua
