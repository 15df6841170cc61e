// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstring>
#include <numeric>

#include "cranua/scenario.hpp"

using namespace cranua;

namespace {

DeploymentConfig small_config() {
  DeploymentConfig cfg;
  cfg.A = 2;
  cfg.N = 2;
  cfg.M = 2;
  cfg.U = 3;
  cfg.tx_power_dbm = arma::vec(2, arma::fill::value(15.0));
  cfg.seed = 99;
  return cfg;
}

bool bitwise_equal(const arma::cx_mat& a, const arma::cx_mat& b) {
  return a.n_rows == b.n_rows && a.n_cols == b.n_cols &&
         std::memcmp(a.memptr(), b.memptr(), a.n_elem * sizeof(arma::cx_double)) == 0;
}

double spearman(std::vector<double> x, std::vector<double> y) {
  auto ranks = [](std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = static_cast<double>(i);
    return r;
  };
  auto rx = ranks(x);
  auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = (n - 1) / 2.0;
  double num = 0.0, dx = 0.0, dy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - mx);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - mx) * (ry[i] - mx);
  }
  return num / std::sqrt(dx * dy);
}

}  // namespace

TEST_CASE("identical seeds give bit-identical scenarios") {
  const DeploymentConfig cfg = small_config();
  const Scenario a = generate_scenario(cfg);
  const Scenario b = generate_scenario(cfg);
  REQUIRE(std::memcmp(a.user_pos.memptr(), b.user_pos.memptr(),
                      a.user_pos.n_elem * sizeof(double)) == 0);
  for (arma::uword i = 0; i < cfg.A; ++i)
    for (arma::uword j = 0; j < cfg.A; ++j) REQUIRE(bitwise_equal(a.channels[i][j], b.channels[i][j]));
  for (arma::uword u = 0; u < cfg.num_users(); ++u) {
    REQUIRE(a.mobility[u].direction_rad == b.mobility[u].direction_rad);
    REQUIRE(a.mobility[u].speed_mps == b.mobility[u].speed_mps);
  }

  DeploymentConfig other = cfg;
  other.seed = 100;
  const Scenario c = generate_scenario(other);
  REQUIRE_FALSE(bitwise_equal(a.channels[0][0], c.channels[0][0]));
}

TEST_CASE("channel dimensions and geometry invariants") {
  const DeploymentConfig cfg = small_config();
  const Scenario s = generate_scenario(cfg);
  for (arma::uword i = 0; i < cfg.A; ++i)
    for (arma::uword j = 0; j < cfg.A; ++j) {
      REQUIRE(s.channels[i][j].n_rows == cfg.U);
      REQUIRE(s.channels[i][j].n_cols == cfg.M * cfg.N);
      REQUIRE(s.channels[i][j].is_finite());
    }
  const double width = static_cast<double>(s.area_cols) * cfg.delta_m;
  const double height = static_cast<double>(s.area_rows) * cfg.delta_m;
  for (arma::uword u = 0; u < cfg.num_users(); ++u) {
    REQUIRE(s.user_pos(u, 0) >= 0.0);
    REQUIRE(s.user_pos(u, 0) <= width);
    REQUIRE(s.user_pos(u, 1) >= 0.0);
    REQUIRE(s.user_pos(u, 1) <= height);
    // users spawn inside their own domain tile
    const arma::uword i = s.initial_domain(u);
    REQUIRE(static_cast<arma::uword>(s.user_pos(u, 0) / cfg.delta_m) == i % s.area_cols);
  }
}

TEST_CASE("huge Rician K collapses the channel onto the LoS term") {
  DeploymentConfig cfg = small_config();
  cfg.rician_k_db = 600.0;
  cfg.shadowing_sigma_db = 0.0;
  const Scenario s = generate_scenario(cfg);
  for (arma::uword u = 0; u < cfg.num_users(); ++u) {
    for (arma::uword r = 0; r < cfg.A * cfg.N; ++r) {
      const LinkState& link = s.links[u * cfg.A * cfg.N + r];
      const double dx = s.user_pos(u, 0) - s.rrh_pos(r, 0);
      const double dy = s.user_pos(u, 1) - s.rrh_pos(r, 1);
      const double amp =
          detail::pathloss_amplitude(std::sqrt(dx * dx + dy * dy), cfg.pathloss_exponent);
      const arma::cx_rowvec expected =
          amp * std::polar(1.0, link.los_phase) * detail::steering_row(cfg.M, std::atan2(dy, dx));
      const arma::cx_rowvec actual =
          s.channels[r / cfg.N][s.initial_domain(u)].row(u % cfg.U).subvec((r % cfg.N) * cfg.M,
                                                                           (r % cfg.N + 1) * cfg.M - 1);
      REQUIRE(arma::abs(actual - expected).max() < 1e-12 * amp);
    }
  }
}

TEST_CASE("zero transmit correlation gives the identity square root") {
  REQUIRE(arma::abs(detail::toeplitz_corr_sqrt(4, 0.0) - arma::eye<arma::cx_mat>(4, 4)).max() <
          1e-12);
}

TEST_CASE("mobility") {
  const DeploymentConfig cfg = small_config();
  const Scenario s = generate_scenario(cfg);

  SECTION("dt = 0 returns unchanged channels") {
    const Scenario t = advance_mobility(s, cfg, 0.0);
    REQUIRE(bitwise_equal(t.channels[0][0], s.channels[0][0]));
    REQUIRE(std::memcmp(t.user_pos.memptr(), s.user_pos.memptr(),
                        s.user_pos.n_elem * sizeof(double)) == 0);
  }
  SECTION("zero speed keeps channels for any dt") {
    Scenario frozen = s;
    for (auto& m : frozen.mobility) m.speed_mps = 0.0;
    const Scenario t = advance_mobility(frozen, cfg, 5000.0);
    for (arma::uword i = 0; i < cfg.A; ++i)
      for (arma::uword j = 0; j < cfg.A; ++j) REQUIRE(bitwise_equal(t.channels[i][j], frozen.channels[i][j]));
  }
  SECTION("40 km/h for one second moves 100/9 meters") {
    Scenario fast = s;
    fast.mobility[0].speed_mps = 40.0 / 3.6;
    fast.mobility[0].direction_rad = 0.0;
    fast.user_pos(0, 0) = 10.0;  // away from the reflecting boundary
    fast.user_pos(0, 1) = 50.0;
    const Scenario t = advance_mobility(fast, cfg, 1000.0);
    REQUIRE_THAT(t.user_pos(0, 0) - fast.user_pos(0, 0),
                 Catch::Matchers::WithinAbs(40.0 / 3.6, 1e-12));
    REQUIRE(t.user_pos(0, 1) == fast.user_pos(0, 1));
  }
  SECTION("negative dt is rejected") {
    REQUIRE_THROWS_AS(advance_mobility(s, cfg, -1.0), ConfigError);
  }
}

TEST_CASE("snr of user") {
  DeploymentConfig cfg = small_config();
  const Scenario s = generate_scenario(cfg);
  cfg.tx_power_dbm.fill(0.0);
  cfg.noise_power_dbm = 0.0;
  REQUIRE_THAT(snr_of_user(s, cfg, 0), Catch::Matchers::WithinAbs(1.0, 1e-12));
  cfg.tx_power_dbm.fill(10.0);
  REQUIRE_THAT(snr_of_user(s, cfg, 0), Catch::Matchers::WithinAbs(10.0, 1e-9));
  cfg.tx_power_dbm(1) = -3.0;
  REQUIRE_THAT(snr_of_user(s, cfg, cfg.U), Catch::Matchers::WithinAbs(std::pow(10.0, -0.3), 1e-9));
  REQUIRE_THROWS_AS(snr_of_user(s, cfg, cfg.num_users()), DimensionError);
}

TEST_CASE("expected channel gain decays with distance") {
  std::vector<double> dist, gain;
  for (std::uint64_t seed = 0; dist.size() < 1000; ++seed) {
    DeploymentConfig cfg = small_config();
    cfg.seed = 1000 + seed;
    const Scenario s = generate_scenario(cfg);
    for (arma::uword u = 0; u < cfg.num_users(); ++u)
      for (arma::uword r = 0; r < cfg.A * cfg.N; ++r) {
        const double dx = s.user_pos(u, 0) - s.rrh_pos(r, 0);
        const double dy = s.user_pos(u, 1) - s.rrh_pos(r, 1);
        dist.push_back(std::sqrt(dx * dx + dy * dy));
        const arma::cx_rowvec h = s.channels[r / cfg.N][s.initial_domain(u)].row(u % cfg.U).subvec(
            (r % cfg.N) * cfg.M, (r % cfg.N + 1) * cfg.M - 1);
        gain.push_back(std::pow(arma::norm(h), 2.0));
      }
  }
  dist.resize(1000);
  gain.resize(1000);
  REQUIRE(spearman(dist, gain) < 0.0);
}

TEST_CASE("scattered component reproduces the configured transmit covariance") {
  const arma::uword m = 4;
  const double rho_c = 0.5;
  const arma::cx_mat sqrt_corr = detail::toeplitz_corr_sqrt(m, rho_c);
  Rng rng(2024);
  arma::cx_mat acc(m, m, arma::fill::zeros);
  const int samples = 100000;
  arma::rowvec pos = {13.0, 87.0};
  for (int t = 0; t < samples; ++t) {
    LinkState link;
    link.scat_angle.set_size(detail::kScatterPaths);
    for (arma::uword p = 0; p < detail::kScatterPaths; ++p)
      link.scat_angle(p) = rng.uniform(0.0, detail::kTwoPi);
    link.scat_phase.set_size(m, detail::kScatterPaths);
    for (arma::uword a = 0; a < m; ++a)
      for (arma::uword p = 0; p < detail::kScatterPaths; ++p)
        link.scat_phase(a, p) = rng.uniform(0.0, detail::kTwoPi);
    const arma::cx_rowvec h = detail::scatter_row(link, pos, m) * sqrt_corr;
    acc += h.t() * h;
  }
  acc /= samples;
  arma::mat target(m, m);
  for (arma::uword a = 0; a < m; ++a)
    for (arma::uword b = 0; b < m; ++b)
      target(a, b) = std::pow(rho_c, static_cast<double>(a > b ? a - b : b - a));
  const double err = arma::norm(acc - arma::conv_to<arma::cx_mat>::from(target), "fro") /
                     arma::norm(target, "fro");
  REQUIRE(err < 0.05);
}

TEST_CASE("config json parsing") {
  nlohmann::json j = {{"A", 2}, {"N", 2}, {"M", 4}, {"U", 8}};
  SECTION("defaults fill in") {
    DeploymentConfig cfg = config_from_json(j);
    REQUIRE(cfg.delta_m == 100.0);
    REQUIRE(cfg.tx_power_dbm.n_elem == 2);
    REQUIRE(cfg.tx_power_dbm(0) == 15.0);
    REQUIRE(cfg.tx_correlation == 0.5);
  }
  SECTION("unknown fields are rejected") {
    j["bogus"] = 1;
    REQUIRE_THROWS_AS(config_from_json(j), ConfigError);
  }
  SECTION("missing dimensions are rejected") {
    nlohmann::json bad = {{"A", 2}, {"N", 2}, {"M", 4}};
    REQUIRE_THROWS_AS(config_from_json(bad), ConfigError);
  }
  SECTION("non-positive dimensions are rejected") {
    j["U"] = 0;
    REQUIRE_THROWS_AS(config_from_json(j), ConfigError);
  }
  SECTION("per-domain power array") {
    j["tx_power_dbm"] = {10.0, 20.0};
    DeploymentConfig cfg = config_from_json(j);
    REQUIRE(cfg.tx_power_dbm(1) == 20.0);
    j["tx_power_dbm"] = {10.0};
    REQUIRE_THROWS_AS(config_from_json(j), ConfigError);
  }
  SECTION("correlation domain check") {
    j["tx_correlation"] = 1.0;
    REQUIRE_THROWS_AS(config_from_json(j), ConfigError);
  }
}
