// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <algorithm>
#include <armadillo>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cranua/common.hpp"
#include "cranua/rng.hpp"

namespace cranua {

// Deployment generator: tiled area with one antenna domain per Delta x Delta
// tile, fixed radio-head grids, uniform user drops, and spatially correlated
// Rician channels (Kronecker transmit correlation, pathloss, log-normal
// shadowing). All randomness flows from the 64-bit seed; a Scenario is a pure
// function of (config, seed).

struct DeploymentConfig {
  arma::uword A = 0;  // antenna domains
  arma::uword N = 0;  // radio-heads per domain
  arma::uword M = 0;  // antennas per radio-head
  arma::uword U = 0;  // users per domain
  double delta_m = 100.0;
  arma::vec tx_power_dbm;  // per domain
  double noise_power_dbm = -95.0;
  double rician_k_db = 10.0;
  double shadowing_sigma_db = 4.0;
  double pathloss_exponent = 3.0;
  double tx_correlation = 0.5;
  std::uint64_t seed = 1;

  arma::uword num_users() const { return A * U; }
  arma::uword antennas_per_domain() const { return M * N; }

  void validate() const {
    if (A < 1 || N < 1 || M < 1 || U < 1)
      throw ConfigError("config: A, N, M, U must all be >= 1");
    if (!(delta_m > 0.0)) throw ConfigError("config: delta_m must be positive");
    if (tx_power_dbm.n_elem != A) throw ConfigError("config: tx_power_dbm must have one entry per domain");
    if (!tx_power_dbm.is_finite() || !std::isfinite(noise_power_dbm) ||
        !std::isfinite(shadowing_sigma_db) || !std::isfinite(pathloss_exponent))
      throw ConfigError("config: powers and channel parameters must be finite");
    if (!(tx_correlation >= 0.0 && tx_correlation < 1.0))
      throw ConfigError("config: tx_correlation must lie in [0, 1)");
  }
};

namespace detail {

inline constexpr arma::uword kScatterPaths = 16;
// Spatial decorrelation scale of the scattered field, in meters. The cited
// parametrization does not pin a carrier; channels here decorrelate over
// ~1 m, which keeps millisecond-scale CSI aging mild while 100 ms of motion
// at vehicular speed reshuffles the fast fading.
inline constexpr double kScatterDecorrM = 1.0;
inline constexpr double kMinLinkDistM = 1.0;
inline constexpr double kPathlossInterceptDb = 30.0;
inline constexpr double kMaxSpeedKmh = 40.0;
inline constexpr double kTwoPi = 6.283185307179586476925287;

}  // namespace detail

struct MobilityState {
  double direction_rad = 0.0;
  double speed_mps = 0.0;
};

// Frozen per-(user, radio-head) fading state; channels are re-synthesized
// from it deterministically at any user position (mobility keeps large-scale
// fading and scatterer geometry fixed within a drop).
struct LinkState {
  double shadow_amp = 1.0;
  double los_phase = 0.0;
  arma::vec scat_angle;   // one propagation direction per path
  arma::mat scat_phase;   // antennas x paths
};

struct Scenario {
  arma::uword A = 0, N = 0, M = 0, U = 0;
  double delta_m = 0.0;
  arma::uword area_cols = 0, area_rows = 0;

  arma::mat cp_pos;    // A x 2
  arma::mat rrh_pos;   // (A*N) x 2
  arma::mat user_pos;  // U_T x 2
  std::vector<MobilityState> mobility;
  std::vector<LinkState> links;  // index u * (A*N) + r
  arma::cx_mat tx_corr_sqrt;     // M x M

  // channels[i][j]: U x (M*N), row n = channel from domain i's array to user j_n.
  std::vector<std::vector<arma::cx_mat>> channels;

  arma::uword num_users() const { return A * U; }
  arma::uword initial_domain(arma::uword user) const { return user / U; }

  arma::cx_rowvec channel_row(arma::uword domain, arma::uword user) const {
    return channels[domain][initial_domain(user)].row(user % U);
  }

  // Channel from the union of all arrays (global-ZF view), 1 x (A*M*N).
  arma::cx_rowvec stacked_row(arma::uword user) const {
    arma::cx_rowvec out(A * M * N);
    for (arma::uword i = 0; i < A; ++i)
      out.subvec(i * M * N, (i + 1) * M * N - 1) = channel_row(i, user);
    return out;
  }
};

namespace detail {

inline arma::cx_mat toeplitz_corr_sqrt(arma::uword m, double r) {
  arma::mat corr(m, m);
  for (arma::uword a = 0; a < m; ++a)
    for (arma::uword b = 0; b < m; ++b)
      corr(a, b) = std::pow(r, static_cast<double>(a > b ? a - b : b - a));
  arma::vec eval;
  arma::mat evec;
  if (!arma::eig_sym(eval, evec, corr)) throw SolverError("scenario: correlation eigendecomposition failed");
  eval.transform([](double v) { return v > 0.0 ? std::sqrt(v) : 0.0; });
  return arma::conv_to<arma::cx_mat>::from(evec * arma::diagmat(eval) * evec.t());
}

inline double pathloss_amplitude(double dist_m, double exponent) {
  const double d = std::max(dist_m, kMinLinkDistM);
  const double pl_db = kPathlossInterceptDb + 10.0 * exponent * std::log10(d);
  return std::pow(10.0, -pl_db / 20.0);
}

// Half-wavelength ULA steering toward the user, unit-modulus entries.
inline arma::cx_rowvec steering_row(arma::uword m, double angle_rad) {
  arma::cx_rowvec a(m);
  const double c = std::cos(angle_rad);
  for (arma::uword t = 0; t < m; ++t)
    a(t) = std::polar(1.0, M_PI * static_cast<double>(t) * c);
  return a;
}

// Scattered field as a sum of plane waves with frozen directions and phases:
// continuous in position, unit variance, independent across antennas.
inline arma::cx_rowvec scatter_row(const LinkState& link, const arma::rowvec& user_pos,
                                   arma::uword m) {
  const arma::uword paths = link.scat_angle.n_elem;
  arma::cx_rowvec g(m, arma::fill::zeros);
  const double wavenum = kTwoPi / kScatterDecorrM;
  const double norm = 1.0 / std::sqrt(static_cast<double>(paths));
  for (arma::uword p = 0; p < paths; ++p) {
    const double proj =
        wavenum * (std::cos(link.scat_angle(p)) * user_pos(0) + std::sin(link.scat_angle(p)) * user_pos(1));
    for (arma::uword a = 0; a < m; ++a) g(a) += std::polar(norm, proj + link.scat_phase(a, p));
  }
  return g;
}

inline arma::cx_rowvec link_channel(const Scenario& s, const DeploymentConfig& cfg, arma::uword user,
                                    arma::uword rrh) {
  const LinkState& link = s.links[user * s.A * s.N + rrh];
  const arma::rowvec up = s.user_pos.row(user);
  const arma::rowvec rp = s.rrh_pos.row(rrh);
  const double dx = up(0) - rp(0), dy = up(1) - rp(1);
  const double dist = std::sqrt(dx * dx + dy * dy);
  const double amp = pathloss_amplitude(dist, cfg.pathloss_exponent) * link.shadow_amp;

  const double k_lin = db_to_linear(cfg.rician_k_db);
  const double w_los = std::sqrt(k_lin / (k_lin + 1.0));
  const double w_scat = std::sqrt(1.0 / (k_lin + 1.0));

  arma::cx_rowvec los = std::polar(1.0, link.los_phase) * steering_row(s.M, std::atan2(dy, dx));
  arma::cx_rowvec scat = scatter_row(link, up, s.M) * s.tx_corr_sqrt;
  return amp * (w_los * los + w_scat * scat);
}

inline void synthesize_channels(Scenario& s, const DeploymentConfig& cfg) {
  const arma::uword mn = s.M * s.N;
  s.channels.assign(s.A, std::vector<arma::cx_mat>(s.A));
  for (arma::uword i = 0; i < s.A; ++i)
    for (arma::uword j = 0; j < s.A; ++j) s.channels[i][j].set_size(s.U, mn);
  for (arma::uword u = 0; u < s.num_users(); ++u) {
    const arma::uword j = s.initial_domain(u);
    const arma::uword n = u % s.U;
    for (arma::uword i = 0; i < s.A; ++i)
      for (arma::uword nr = 0; nr < s.N; ++nr)
        s.channels[i][j].row(n).subvec(nr * s.M, (nr + 1) * s.M - 1) =
            detail::link_channel(s, cfg, u, i * s.N + nr);
  }
}

inline double reflect_into(double x, double lo, double hi) {
  const double span = hi - lo;
  if (span <= 0.0) return lo;
  double t = std::fmod(x - lo, 2.0 * span);
  if (t < 0.0) t += 2.0 * span;
  return lo + (t <= span ? t : 2.0 * span - t);
}

}  // namespace detail

inline Scenario generate_scenario(const DeploymentConfig& cfg) {
  cfg.validate();
  Scenario s;
  s.A = cfg.A;
  s.N = cfg.N;
  s.M = cfg.M;
  s.U = cfg.U;
  s.delta_m = cfg.delta_m;
  s.area_cols = static_cast<arma::uword>(std::ceil(std::sqrt(static_cast<double>(cfg.A))));
  s.area_rows = (cfg.A + s.area_cols - 1) / s.area_cols;

  // Fixed geometry: one domain per tile, centered square radio-head grid.
  s.cp_pos.set_size(cfg.A, 2);
  s.rrh_pos.set_size(cfg.A * cfg.N, 2);
  const arma::uword grid_cols = static_cast<arma::uword>(std::ceil(std::sqrt(static_cast<double>(cfg.N))));
  const arma::uword grid_rows = (cfg.N + grid_cols - 1) / grid_cols;
  for (arma::uword i = 0; i < cfg.A; ++i) {
    const double ox = static_cast<double>(i % s.area_cols) * cfg.delta_m;
    const double oy = static_cast<double>(i / s.area_cols) * cfg.delta_m;
    s.cp_pos(i, 0) = ox + cfg.delta_m / 2.0;
    s.cp_pos(i, 1) = oy + cfg.delta_m / 2.0;
    for (arma::uword n = 0; n < cfg.N; ++n) {
      const arma::uword gx = n % grid_cols;
      const arma::uword gy = n / grid_cols;
      s.rrh_pos(i * cfg.N + n, 0) = ox + cfg.delta_m * (static_cast<double>(gx) + 0.5) / grid_cols;
      s.rrh_pos(i * cfg.N + n, 1) = oy + cfg.delta_m * (static_cast<double>(gy) + 0.5) / grid_rows;
    }
  }

  Rng rng(cfg.seed);
  Rng pos_rng = rng.fork(1);
  Rng fade_rng = rng.fork(2);

  s.user_pos.set_size(cfg.num_users(), 2);
  s.mobility.resize(cfg.num_users());
  for (arma::uword u = 0; u < cfg.num_users(); ++u) {
    const arma::uword i = u / cfg.U;
    const double ox = static_cast<double>(i % s.area_cols) * cfg.delta_m;
    const double oy = static_cast<double>(i / s.area_cols) * cfg.delta_m;
    s.user_pos(u, 0) = ox + pos_rng.uniform01() * cfg.delta_m;
    s.user_pos(u, 1) = oy + pos_rng.uniform01() * cfg.delta_m;
    s.mobility[u].direction_rad = pos_rng.uniform(0.0, detail::kTwoPi);
    s.mobility[u].speed_mps = pos_rng.uniform(0.0, detail::kMaxSpeedKmh / 3.6);
  }

  const double shadow_sigma = cfg.shadowing_sigma_db;
  s.links.resize(cfg.num_users() * cfg.A * cfg.N);
  for (arma::uword u = 0; u < cfg.num_users(); ++u) {
    for (arma::uword r = 0; r < cfg.A * cfg.N; ++r) {
      LinkState& link = s.links[u * cfg.A * cfg.N + r];
      link.shadow_amp = std::pow(10.0, shadow_sigma * fade_rng.normal() / 20.0);
      link.los_phase = fade_rng.uniform(0.0, detail::kTwoPi);
      link.scat_angle.set_size(detail::kScatterPaths);
      for (arma::uword p = 0; p < detail::kScatterPaths; ++p)
        link.scat_angle(p) = fade_rng.uniform(0.0, detail::kTwoPi);
      link.scat_phase.set_size(cfg.M, detail::kScatterPaths);
      for (arma::uword a = 0; a < cfg.M; ++a)
        for (arma::uword p = 0; p < detail::kScatterPaths; ++p)
          link.scat_phase(a, p) = fade_rng.uniform(0.0, detail::kTwoPi);
    }
  }

  s.tx_corr_sqrt = detail::toeplitz_corr_sqrt(cfg.M, cfg.tx_correlation);
  detail::synthesize_channels(s, cfg);
  return s;
}

// Moves every user along its frozen direction at its frozen speed and
// re-synthesizes channels at the new positions. Shadowing, LoS phases and
// scatterer geometry stay fixed, so dt -> 0 recovers the original channels
// continuously. Users reflect off the area boundary.
inline Scenario advance_mobility(const Scenario& s, const DeploymentConfig& cfg, double dt_ms) {
  if (dt_ms < 0.0) throw ConfigError("advance_mobility: dt must be >= 0");
  if (dt_ms == 0.0) return s;
  Scenario out = s;
  const double dt = dt_ms / 1000.0;
  const double width = static_cast<double>(s.area_cols) * s.delta_m;
  const double height = static_cast<double>(s.area_rows) * s.delta_m;
  for (arma::uword u = 0; u < s.num_users(); ++u) {
    const double step = s.mobility[u].speed_mps * dt;
    out.user_pos(u, 0) = detail::reflect_into(
        s.user_pos(u, 0) + step * std::cos(s.mobility[u].direction_rad), 0.0, width);
    out.user_pos(u, 1) = detail::reflect_into(
        s.user_pos(u, 1) + step * std::sin(s.mobility[u].direction_rad), 0.0, height);
  }
  detail::synthesize_channels(out, cfg);
  return out;
}

// SNR_{j_n} = p_j / sigma^2 of the user's (initial) serving domain, linear.
inline double snr_of_user(const Scenario& s, const DeploymentConfig& cfg, arma::uword user) {
  if (user >= s.num_users()) throw DimensionError("snr_of_user: user index out of range");
  return db_to_linear(cfg.tx_power_dbm(s.initial_domain(user)) - cfg.noise_power_dbm);
}

// --- JSON config (exact field names, unknown fields rejected) -------------

inline DeploymentConfig config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "A",          "N",          "M",          "U",           "delta_m",       "tx_power_dbm",
      "noise_power_dbm", "rician_k_db", "shadowing_sigma_db", "pathloss_exponent", "tx_correlation", "seed"};
  if (!j.is_object()) throw ConfigError("config: top-level JSON must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("config: unknown field '" + it.key() + "'");
  }
  for (const char* req : {"A", "N", "M", "U"})
    if (!j.contains(req)) throw ConfigError(std::string("config: missing required field '") + req + "'");

  DeploymentConfig cfg;
  try {
    auto dim = [&](const char* name) {
      const auto& v = j.at(name);
      if (!v.is_number_integer() || v.get<long long>() < 1)
        throw ConfigError(std::string("config: field '") + name + "' must be a positive integer");
      return static_cast<arma::uword>(v.get<long long>());
    };
    cfg.A = dim("A");
    cfg.N = dim("N");
    cfg.M = dim("M");
    cfg.U = dim("U");
    if (j.contains("delta_m")) cfg.delta_m = j.at("delta_m").get<double>();
    if (j.contains("noise_power_dbm")) cfg.noise_power_dbm = j.at("noise_power_dbm").get<double>();
    if (j.contains("rician_k_db")) cfg.rician_k_db = j.at("rician_k_db").get<double>();
    if (j.contains("shadowing_sigma_db")) cfg.shadowing_sigma_db = j.at("shadowing_sigma_db").get<double>();
    if (j.contains("pathloss_exponent")) cfg.pathloss_exponent = j.at("pathloss_exponent").get<double>();
    if (j.contains("tx_correlation")) cfg.tx_correlation = j.at("tx_correlation").get<double>();
    if (j.contains("seed")) {
      const auto& v = j.at("seed");
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("config: seed must be a non-negative integer");
      cfg.seed = v.get<std::uint64_t>();
    }
    if (j.contains("tx_power_dbm")) {
      const auto& v = j.at("tx_power_dbm");
      if (v.is_array()) {
        cfg.tx_power_dbm.set_size(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) cfg.tx_power_dbm(i) = v.at(i).get<double>();
      } else {
        cfg.tx_power_dbm = arma::vec(cfg.A, arma::fill::value(v.get<double>()));
      }
    } else {
      cfg.tx_power_dbm = arma::vec(cfg.A, arma::fill::value(15.0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

inline DeploymentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace cranua
