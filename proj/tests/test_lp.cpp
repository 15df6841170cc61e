// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <vector>

#include "cranua/lp.hpp"
#include "cranua/rng.hpp"

using namespace cranua;

namespace {

// Independent check: enumerate candidate vertices of {Gx <= h, Ex = d, x >= 0}
// by making n constraints tight at a time; only valid for bounded polytopes.
double vertex_enum_min(const LpProblem& p) {
  const arma::uword n = p.c.n_elem;
  // stack inequalities: G rows then -x_i <= 0
  arma::mat rows(p.G.n_rows + n, n);
  arma::vec rhs(p.G.n_rows + n);
  if (p.G.n_rows) {
    rows.rows(0, p.G.n_rows - 1) = p.G;
    rhs.head(p.G.n_rows) = p.h;
  }
  for (arma::uword i = 0; i < n; ++i) {
    rows.row(p.G.n_rows + i).zeros();
    rows(p.G.n_rows + i, i) = -1.0;
    rhs(p.G.n_rows + i) = 0.0;
  }
  const arma::uword me = p.E.n_rows;
  REQUIRE(me <= n);
  const arma::uword pick = n - me;

  double best = std::numeric_limits<double>::infinity();
  std::vector<arma::uword> idx(pick);
  std::function<void(arma::uword, arma::uword)> rec = [&](arma::uword start, arma::uword depth) {
    if (depth == pick) {
      arma::mat a(n, n);
      arma::vec b(n);
      for (arma::uword r = 0; r < me; ++r) {
        a.row(r) = p.E.row(r);
        b(r) = p.d(r);
      }
      for (arma::uword r = 0; r < pick; ++r) {
        a.row(me + r) = rows.row(idx[r]);
        b(me + r) = rhs(idx[r]);
      }
      arma::vec x;
      if (!arma::solve(x, a, b, arma::solve_opts::no_approx)) return;
      if (!x.is_finite()) return;
      // feasibility
      for (arma::uword r = 0; r < rows.n_rows; ++r)
        if (arma::dot(rows.row(r), x) > rhs(r) + 1e-7) return;
      for (arma::uword r = 0; r < me; ++r)
        if (std::abs(arma::dot(p.E.row(r), x) - p.d(r)) > 1e-7) return;
      best = std::min(best, arma::dot(p.c, x));
      return;
    }
    for (arma::uword i = start; i < rows.n_rows; ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

void check_certificates(const LpProblem& p, const LpSolution& s) {
  // primal feasibility
  if (p.G.n_rows) {
    const arma::vec slack = p.h - p.G * s.x;
    REQUIRE(slack.min() > -1e-8);
  }
  if (p.E.n_rows) REQUIRE(arma::abs(p.E * s.x - p.d).max() < 1e-8);
  REQUIRE(s.x.min() > -1e-10);
  // strong duality
  double dual_obj = 0.0;
  if (p.G.n_rows) dual_obj -= arma::dot(p.h, s.mu);
  if (p.E.n_rows) dual_obj += arma::dot(p.d, s.pi);
  REQUIRE(std::abs(dual_obj - s.objective) < 1e-7 * (1.0 + std::abs(s.objective)));
  // dual feasibility + complementary slackness
  arma::vec rc = p.c;
  if (p.G.n_rows) rc += p.G.t() * s.mu;
  if (p.E.n_rows) rc -= p.E.t() * s.pi;
  REQUIRE(rc.min() > -1e-6);
  if (p.G.n_rows) REQUIRE(s.mu.min() > -1e-12);
  for (arma::uword j = 0; j < s.x.n_elem; ++j) REQUIRE(std::abs(s.x(j) * rc(j)) < 1e-6);
  if (p.G.n_rows) {
    const arma::vec slack = p.h - p.G * s.x;
    for (arma::uword i = 0; i < p.G.n_rows; ++i) REQUIRE(std::abs(s.mu(i) * slack(i)) < 1e-6);
  }
}

}  // namespace

TEST_CASE("unconstrained nonnegative variable sits at zero") {
  LpProblem p;
  p.c = arma::vec{1.0};
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE(s.objective == 0.0);
  REQUIRE(s.x(0) == 0.0);
}

TEST_CASE("single box constraint gives unit dual") {
  LpProblem p;
  p.c = arma::vec{-1.0};
  p.G.ones(1, 1);
  p.h = arma::vec{1.0};
  LpSolution s = solve_lp(p);
  REQUIRE(s.status == LpStatus::Optimal);
  REQUIRE_THAT(s.x(0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(s.mu(0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  check_certificates(p, s);
}

TEST_CASE("simplex over the probability simplex picks the cheapest vertex") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const arma::uword n = 2 + rng.bounded(6);
    LpProblem p;
    p.c.set_size(n);
    for (arma::uword j = 0; j < n; ++j) p.c(j) = rng.uniform(-3.0, 3.0);
    p.E.ones(1, n);
    p.d = arma::vec{1.0};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(p.c.min(), 1e-9));
    REQUIRE_THAT(s.x(p.c.index_min()), Catch::Matchers::WithinAbs(1.0, 1e-9));
    check_certificates(p, s);
  }
}

TEST_CASE("status detection") {
  LpProblem infeas;
  infeas.c = arma::vec{0.0};
  infeas.G.ones(1, 1);
  infeas.h = arma::vec{-1.0};
  REQUIRE(solve_lp(infeas).status == LpStatus::Infeasible);

  LpProblem unb;
  unb.c = arma::vec{-1.0};
  REQUIRE(solve_lp(unb).status == LpStatus::Unbounded);
}

TEST_CASE("random bounded LPs match vertex enumeration") {
  Rng rng(42);
  int optimal_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const arma::uword n = 2 + rng.bounded(5);  // up to 6 variables
    const arma::uword extra = rng.bounded(4);
    LpProblem p;
    p.c.set_size(n);
    for (arma::uword j = 0; j < n; ++j) p.c(j) = rng.uniform(-2.0, 2.0);
    // box keeps the polytope bounded; extra rows cut it
    p.G.zeros(n + extra, n);
    p.h.set_size(n + extra);
    for (arma::uword i = 0; i < n; ++i) {
      p.G(i, i) = 1.0;
      p.h(i) = rng.uniform(0.5, 3.0);
    }
    for (arma::uword i = 0; i < extra; ++i) {
      for (arma::uword j = 0; j < n; ++j) p.G(n + i, j) = rng.uniform(-1.0, 1.0);
      p.h(n + i) = rng.uniform(0.0, 2.0);  // x = 0 stays feasible
    }
    if (trial % 2 == 0) {
      p.E.set_size(1, n);
      for (arma::uword j = 0; j < n; ++j) p.E(0, j) = rng.uniform(0.2, 1.0);
      p.d = arma::vec{0.0};
      // pass through a feasible interior-ish point so the equality can hold
      arma::vec x0(n);
      for (arma::uword j = 0; j < n; ++j) x0(j) = rng.uniform(0.0, 0.4);
      p.d(0) = arma::dot(p.E.row(0), x0);
    }
    LpSolution s = solve_lp(p);
    if (s.status != LpStatus::Optimal) continue;  // equality may be cut off by extras
    ++optimal_seen;
    const double oracle = vertex_enum_min(p);
    REQUIRE_THAT(s.objective, Catch::Matchers::WithinAbs(oracle, 1e-7));
    check_certificates(p, s);
  }
  REQUIRE(optimal_seen >= 40);
}
