// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <armadillo>
#include <cstddef>
#include <vector>

#include "cranua/common.hpp"

namespace cranua {

// Dense two-phase tableau simplex with Bland's rule. Problem sizes in this
// project are tiny (a few tens of rows, up to ~1e6 columns in the full DW
// master), so robustness and exact dual certificates matter more than speed.
//
//   minimize    c'x
//   subject to  G x <= h
//               E x  = d
//               x   >= 0
//
// Dual convention:  max -h'mu + d'pi  s.t.  -G'mu + E'pi <= c,  mu >= 0.
// At optimality c'x* = -h'mu* + d'pi* and the reduced-cost vector is
// c + G'mu* - E'pi* >= 0.

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpProblem {
  arma::vec c;
  arma::mat G;
  arma::vec h;
  arma::mat E;
  arma::vec d;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  arma::vec x;
  double objective = 0.0;
  arma::vec mu;  // duals of the G rows, >= 0
  arma::vec pi;  // duals of the E rows
};

namespace detail {

inline constexpr double kLpFeasTol = 1e-9;
inline constexpr double kLpOptTol = 1e-9;

class SimplexTableau {
 public:
  SimplexTableau(const LpProblem& p)
      : n_(p.c.n_elem), mg_(p.G.n_rows), me_(p.E.n_rows), m_(mg_ + me_) {
    if (p.G.n_rows > 0 && p.G.n_cols != n_) throw DimensionError("lp: G column count mismatch");
    if (p.E.n_rows > 0 && p.E.n_cols != n_) throw DimensionError("lp: E column count mismatch");
    if (p.h.n_elem != mg_) throw DimensionError("lp: h length mismatch");
    if (p.d.n_elem != me_) throw DimensionError("lp: d length mismatch");
    if (!p.c.is_finite() || (mg_ && (!p.G.is_finite() || !p.h.is_finite())) ||
        (me_ && (!p.E.is_finite() || !p.d.is_finite())))
      throw ConfigError("lp: non-finite coefficients");

    ncols_ = n_ + mg_ + m_;  // structural + slack + artificial
    art0_ = n_ + mg_;
    T_.zeros(m_ + 2, ncols_ + 1);
    sign_.assign(m_, 1.0);
    basis_.assign(m_, 0);

    for (std::size_t i = 0; i < m_; ++i) {
      const bool ineq = i < mg_;
      const arma::rowvec row = ineq ? arma::rowvec(p.G.row(i)) : arma::rowvec(p.E.row(i - mg_));
      double rhs = ineq ? p.h(i) : p.d(i - mg_);
      double s = rhs < 0.0 ? -1.0 : 1.0;
      sign_[i] = s;
      for (std::size_t j = 0; j < n_; ++j) T_(i, j) = s * row(j);
      if (ineq) T_(i, n_ + i) = s;  // slack
      T_(i, art0_ + i) = 1.0;
      T_(i, ncols_) = s * rhs;
      basis_[i] = art0_ + i;
    }
    // Phase-2 objective row (row m_): reduced costs start at c (basis cost 0).
    for (std::size_t j = 0; j < n_; ++j) T_(m_, j) = p.c(j);
    // Phase-1 objective row (row m_+1): minimize sum of artificials.
    for (std::size_t j = 0; j < ncols_; ++j) {
      if (j >= art0_) continue;
      double acc = 0.0;
      for (std::size_t i = 0; i < m_; ++i) acc += T_(i, j);
      T_(m_ + 1, j) = -acc;
    }
    double rhs_sum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) rhs_sum += T_(i, ncols_);
    T_(m_ + 1, ncols_) = -rhs_sum;
  }

  LpSolution run(const LpProblem& p) {
    LpSolution sol;
    if (m_ > 0) {
      simplex(m_ + 1, /*allow_artificial=*/true);
      double rhs_scale = 1.0;
      if (mg_ > 0) rhs_scale += arma::accu(arma::abs(p.h));
      if (me_ > 0) rhs_scale += arma::accu(arma::abs(p.d));
      if (-T_(m_ + 1, ncols_) > 1e-7 * rhs_scale) {
        sol.status = LpStatus::Infeasible;
        return sol;
      }
      evict_artificials();
    }
    if (!simplex(m_, /*allow_artificial=*/false)) {
      sol.status = LpStatus::Unbounded;
      return sol;
    }

    sol.status = LpStatus::Optimal;
    sol.x.zeros(n_);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.x(basis_[i]) = T_(i, ncols_);
    sol.objective = arma::dot(p.c, sol.x);

    // Simplex multipliers of the standardized rows come off the artificial
    // columns: rc(a_i) = 0 - y_i. Map back through the row sign flips.
    sol.mu.zeros(mg_);
    sol.pi.zeros(me_);
    for (std::size_t i = 0; i < m_; ++i) {
      double y = -T_(m_, art0_ + i);
      if (i < mg_) {
        double mu = -sign_[i] * y;
        sol.mu(i) = mu < 0.0 && mu > -1e-7 ? 0.0 : mu;
      } else {
        sol.pi(i - mg_) = sign_[i] * y;
      }
    }
    return sol;
  }

 private:
  void pivot(std::size_t r, std::size_t j) {
    const double piv = T_(r, j);
    T_.row(r) /= piv;
    for (std::size_t i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      const double f = T_(i, j);
      if (f != 0.0) T_.row(i) -= f * T_.row(r);
    }
    basis_[r] = j;
  }

  // Bland's rule in both choices: lowest-index entering column, lowest basic
  // index among tied leaving rows. Returns false on unboundedness.
  bool simplex(std::size_t objrow, bool allow_artificial) {
    for (;;) {
      std::size_t enter = ncols_;
      const std::size_t limit = allow_artificial ? ncols_ : art0_;
      for (std::size_t j = 0; j < limit; ++j) {
        if (T_(objrow, j) < -kLpOptTol) {
          enter = j;
          break;
        }
      }
      if (enter == ncols_) return true;

      std::size_t leave = m_;
      double best_ratio = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (T_(i, enter) <= kLpFeasTol) continue;
        const double ratio = T_(i, ncols_) / T_(i, enter);
        if (leave == m_ || ratio < best_ratio - kLpFeasTol ||
            (std::abs(ratio - best_ratio) <= kLpFeasTol && basis_[i] < basis_[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  // Pivot basic artificials onto structural/slack columns; rows that admit no
  // such pivot are redundant and keep a zero-valued artificial.
  void evict_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < art0_) continue;
      for (std::size_t j = 0; j < art0_; ++j) {
        if (std::abs(T_(i, j)) > 1e-9) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  std::size_t n_, mg_, me_, m_, ncols_, art0_;
  arma::mat T_;
  std::vector<double> sign_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p) {
  detail::SimplexTableau tab(p);
  return tab.run(p);
}

}  // namespace cranua
