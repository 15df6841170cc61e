// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "cranua/precoding.hpp"
#include "cranua/rng.hpp"

using namespace cranua;

namespace {

arma::cx_mat random_channel(Rng& rng, arma::uword rows, arma::uword cols, double scale = 1.0) {
  arma::cx_mat h(rows, cols);
  for (arma::uword r = 0; r < rows; ++r)
    for (arma::uword c = 0; c < cols; ++c)
      h(r, c) = scale * arma::cx_double(rng.normal(), rng.normal()) / std::sqrt(2.0);
  return h;
}

double zf_residual(const arma::cx_mat& h, const arma::cx_mat& v, double beta) {
  const arma::uword n = h.n_rows;
  return arma::norm(h * v - beta * arma::eye<arma::cx_mat>(n, n), "fro") / beta;
}

}  // namespace

TEST_CASE("identity channel with no victims returns the identity precoder") {
  const arma::uword mn = 4;
  ZfResult zf = zero_forcing_precoder(arma::eye<arma::cx_mat>(mn, mn), {});
  REQUIRE(arma::abs(zf.v - arma::eye<arma::cx_mat>(mn, mn)).max() < 1e-9);
  REQUIRE_THAT(zf.beta, Catch::Matchers::WithinAbs(1.0, 1e-9));
  REQUIRE(zf.eps > 0.0);  // R = 0 still gets a positive regularizer
}

TEST_CASE("zero-forcing contract on random instances") {
  Rng rng(61);
  for (int t = 0; t < 100; ++t) {
    const arma::uword mn = 2 + rng.bounded(7);
    const arma::uword users = 1 + rng.bounded(mn);
    std::vector<arma::cx_mat> inter;
    const arma::uword victims = rng.bounded(3);
    for (arma::uword k = 0; k < victims; ++k)
      inter.push_back(random_channel(rng, 1 + rng.bounded(4), mn, rng.uniform(0.1, 2.0)));
    ZfResult zf = zero_forcing_precoder(random_channel(rng, users, mn), inter);
    // the two halves of the precoder contract
    REQUIRE(std::abs(arma::norm(zf.v, "fro") - std::sqrt(static_cast<double>(users))) < 1e-10);
    // residual checked against the caller's copy of the channel
  }
  // residual check with retained channels
  for (int t = 0; t < 100; ++t) {
    const arma::uword mn = 2 + rng.bounded(7);
    const arma::uword users = 1 + rng.bounded(mn);
    const arma::cx_mat h = random_channel(rng, users, mn);
    std::vector<arma::cx_mat> inter;
    if (rng.bounded(2)) inter.push_back(random_channel(rng, 2, mn));
    ZfResult zf = zero_forcing_precoder(h, inter);
    REQUIRE(zf_residual(h, zf.v, zf.beta) < 1e-8);
  }
}

TEST_CASE("degenerate inputs raise typed errors") {
  Rng rng(67);
  const arma::cx_mat h = random_channel(rng, 2, 4);
  SECTION("dependent rows") {
    arma::cx_mat dup(3, 4);
    dup.row(0) = h.row(0);
    dup.row(1) = h.row(1);
    dup.row(2) = h.row(0);
    REQUIRE_THROWS_AS(zero_forcing_precoder(dup, {}), RankDeficientError);
  }
  SECTION("more users than antennas") {
    REQUIRE_THROWS_AS(zero_forcing_precoder(random_channel(rng, 5, 4), {}), RankDeficientError);
  }
  SECTION("victim width mismatch") {
    REQUIRE_THROWS_AS(zero_forcing_precoder(h, {random_channel(rng, 2, 3)}), DimensionError);
  }
}

TEST_CASE("leakage is nulled when the loads fit the array") {
  // A = 2, M = 4, N = 2, rho = 4 per domain: 4 ZF rows + 4 victim rows = MN
  Rng rng(71);
  for (int t = 0; t < 20; ++t) {
    const arma::uword mn = 8, rho = 4;
    const arma::cx_mat h_own = random_channel(rng, rho, mn);
    const arma::cx_mat h_victim = random_channel(rng, rho, mn, rng.uniform(0.2, 1.5));
    ZfResult zf = zero_forcing_precoder(h_own, {h_victim});
    const arma::cx_mat r_true = h_victim.t() * h_victim;
    const double leak = arma::trace(zf.v.t() * r_true * zf.v).real();
    const double r_norm = arma::norm(r_true, 2);
    REQUIRE(leak <= 1e-8 * r_norm * static_cast<double>(rho));
    REQUIRE(zf_residual(h_own, zf.v, zf.beta) < 1e-8);
  }
}

TEST_CASE("returned precoder minimizes the victim power over the ZF manifold") {
  Rng rng(73);
  for (int t = 0; t < 20; ++t) {
    const arma::uword mn = 3 + rng.bounded(5);
    const arma::uword users = 1 + rng.bounded(mn - 1);
    const arma::cx_mat h = random_channel(rng, users, mn);
    std::vector<arma::cx_mat> inter = {random_channel(rng, 1 + rng.bounded(3), mn)};
    ZfResult zf = zero_forcing_precoder(h, inter);

    arma::cx_mat r = inter[0].t() * inter[0] + zf.eps * arma::eye<arma::cx_mat>(mn, mn);
    const arma::cx_mat nullspace = arma::null(h);  // feasible directions keep H V fixed
    if (nullspace.n_cols == 0) continue;
    const double base = arma::trace(zf.v.t() * r * zf.v).real();
    for (int probe = 0; probe < 5; ++probe) {
      arma::cx_mat w = random_channel(rng, nullspace.n_cols, users);
      for (double step : {0.1, -0.1, 0.01, -0.01}) {
        const arma::cx_mat v2 = zf.v + step * nullspace * w;
        const double val = arma::trace(v2.t() * r * v2).real();
        REQUIRE(val >= base - 1e-6 * (1.0 + base));
      }
    }
  }
}

TEST_CASE("global zero-forcing across all arrays") {
  DeploymentConfig cfg;
  cfg.A = 2;
  cfg.N = 1;
  cfg.M = 2;
  cfg.U = 3;
  cfg.tx_power_dbm = arma::vec(2, arma::fill::value(15.0));
  cfg.seed = 5;
  const Scenario s = generate_scenario(cfg);

  SECTION("full loading still zero-forces every cross term") {
    // served = A*M*N = 4 users out of 6
    Assignment a;
    a.num_users = 6;
    a.served = {{0, 1}, {3, 4}};
    PrecoderSet prec = global_zf_precoder(s, a);
    REQUIRE(prec.global);
    const auto& users = prec.users[0];
    for (std::size_t i = 0; i < users.size(); ++i)
      for (std::size_t j = 0; j < users.size(); ++j) {
        const double g =
            std::norm(arma::as_scalar(s.stacked_row(users[i]) * prec.V[0].col(j)));
        if (i == j)
          REQUIRE_THAT(g, Catch::Matchers::WithinRel(prec.beta(0) * prec.beta(0), 1e-8));
        else
          REQUIRE(g <= 1e-10 * prec.beta(0) * prec.beta(0));
      }
  }
  SECTION("single served user has no cross terms at all") {
    Assignment a;
    a.num_users = 6;
    a.served = {{2}, {}};
    PrecoderSet prec = global_zf_precoder(s, a);
    REQUIRE(prec.users[0].size() == 1);
    REQUIRE(zf_residual(arma::cx_mat(s.stacked_row(2)), prec.V[0], prec.beta(0)) < 1e-8);
  }
  SECTION("overloaded request is infeasible") {
    Assignment a;
    a.num_users = 6;
    a.served = {{0, 1, 2}, {3, 4, 5}};  // 6 > A*M*N = 4
    REQUIRE_THROWS_AS(global_zf_precoder(s, a), InfeasibleError);
  }
}

TEST_CASE("per-domain precoder sets cover the served users") {
  DeploymentConfig cfg;
  cfg.A = 2;
  cfg.N = 2;
  cfg.M = 2;
  cfg.U = 4;
  cfg.tx_power_dbm = arma::vec(2, arma::fill::value(15.0));
  cfg.seed = 6;
  const Scenario s = generate_scenario(cfg);
  Assignment a;
  a.num_users = 8;
  a.served = {{0, 2}, {4, 5, 7}};
  PrecoderSet prec = make_domain_precoders(s, a, true);
  REQUIRE(prec.V[0].n_cols == 2);
  REQUIRE(prec.V[1].n_cols == 3);
  const auto dom = prec.serving_of(8);
  REQUIRE(dom[2] == 0);
  REQUIRE(dom[7] == 1);
  REQUIRE(dom[1] == -1);
  for (arma::uword i = 0; i < 2; ++i) {
    arma::cx_mat h(a.served[i].size(), s.M * s.N);
    for (std::size_t t = 0; t < a.served[i].size(); ++t) h.row(t) = s.channel_row(i, a.served[i][t]);
    REQUIRE(zf_residual(h, prec.V[i], prec.beta(i)) < 1e-8);
  }
}
