// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <armadillo>
#include <functional>
#include <vector>

#include "cranua/assignment.hpp"
#include "cranua/common.hpp"
#include "cranua/coupling.hpp"

namespace cranua {

// Block-coordinate descent over the per-domain assignment vectors x_k with
// exact per-block solves. The per-block problem min r'x s.t. 1'x = rho,
// 0 <= x <= omega satisfies the integrality property, so the LP collapses to
// picking the rho feasible indices with smallest residual.

// Residual of domain k given the other blocks. Uses the symmetrized coupling
// psi_sym = Psi + Psi': the objective terms linear in x_k are
// x_k' Psi (sum_{l!=k} x_l) + (sum_{l!=k} x_l)' Psi x_k, and dropping the
// transpose half would break the monotone descent of the sweep.
inline arma::vec residual(const arma::mat& psi_sym,
                          const std::vector<std::vector<arma::uword>>& blocks, std::size_t k) {
  if (psi_sym.n_rows != psi_sym.n_cols) throw DimensionError("residual: psi_sym must be square");
  arma::vec others(psi_sym.n_rows, arma::fill::zeros);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    if (l == k) continue;
    for (arma::uword u : blocks[l]) others(u) += 1.0;
  }
  return psi_sym * others;
}

// omega_k = 1 - sum_{l != k} x_l.
inline arma::uvec feasible_mask(const std::vector<std::vector<arma::uword>>& blocks, std::size_t k,
                                arma::uword num_users) {
  arma::uvec omega(num_users, arma::fill::ones);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    if (l == k) continue;
    for (arma::uword u : blocks[l]) omega(u) = 0;
  }
  return omega;
}

// Exact minimizer of r'x s.t. 1'x = rho, 0 <= x <= omega, x binary.
// Deterministic tie-break: lowest index wins.
inline std::vector<arma::uword> solve_block_assignment(const arma::vec& r, const arma::uvec& omega,
                                                       arma::uword rho) {
  if (r.n_elem != omega.n_elem) throw DimensionError("solve_block_assignment: size mismatch");
  std::vector<arma::uword> cand;
  for (arma::uword u = 0; u < omega.n_elem; ++u)
    if (omega(u)) cand.push_back(u);
  if (cand.size() < rho) throw InfeasibleError("solve_block_assignment: fewer feasible slots than rho");
  std::stable_sort(cand.begin(), cand.end(),
                   [&](arma::uword a, arma::uword b) { return r(a) < r(b); });
  cand.resize(rho);
  std::sort(cand.begin(), cand.end());
  return cand;
}

struct BcdResult {
  Assignment assignment;
  std::vector<double> f_history;  // f(x_init), then one entry per block update
  arma::uword sweeps = 0;
  bool converged = false;
};

// Observer invoked after every block update (intermediate assignment + f).
using BcdObserver = std::function<void(const Assignment&, double)>;

// Algorithm "UA via BCD": fixed Gauss-Seidel sweep order k = 1..A, early stop
// when a full sweep changes nothing. A block update is only applied when it
// strictly lowers the block cost; on ties the incumbent stays, which keeps
// runs reproducible and f_history exactly non-increasing.
inline BcdResult run_bcd(const arma::mat& psi, const std::vector<arma::uword>& rho,
                         const Assignment& x_init, arma::uword max_outer = 100,
                         const BcdObserver& observer = {}) {
  if (max_outer < 1) throw ConfigError("run_bcd: max_outer must be >= 1");
  x_init.validate(rho);
  if (psi.n_rows != x_init.num_users) throw DimensionError("run_bcd: psi size mismatch");

  const arma::mat psi_sym = psi + psi.t();
  const std::size_t na = rho.size();
  Assignment cur = x_init;

  BcdResult res;
  res.f_history.push_back(total_leakage_vector(psi, cur));

  for (arma::uword n = 0; n < max_outer; ++n) {
    bool changed = false;
    for (std::size_t k = 0; k < na; ++k) {
      const arma::vec r = residual(psi_sym, cur.served, k);
      const arma::uvec omega = feasible_mask(cur.served, k, cur.num_users);
      auto pick = solve_block_assignment(r, omega, rho[k]);

      double old_cost = 0.0, new_cost = 0.0;
      for (arma::uword u : cur.served[k]) old_cost += r(u);
      for (arma::uword u : pick) new_cost += r(u);
      if (new_cost < old_cost) {
        cur.served[k] = std::move(pick);
        changed = true;
      }
      res.f_history.push_back(total_leakage_vector(psi, cur));
      if (observer) observer(cur, res.f_history.back());
    }
    res.sweeps = n + 1;
    if (!changed) {
      res.converged = true;
      break;
    }
  }
  res.assignment = std::move(cur);
  return res;
}

}  // namespace cranua
