// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <armadillo>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cranua/assignment.hpp"
#include "cranua/common.hpp"

namespace cranua {

// Interference-coupling matrix Psi. Entry (u, v) is the power user u's
// transmission leaks onto user v; rows and columns follow the fixed global
// user ordering (domain-major, then user index). Same-domain pairs are zeroed
// at construction: intra-domain interference is handled by precoding and does
// not enter the assignment objective.
struct CouplingMatrix {
  arma::mat psi;
  arma::mat psi_sym;
  std::vector<arma::uword> domain_of;
};

// gain(u, v) = |h_{dom(u),v} v_u|^2, tx_power(u) = transmit power behind user
// u's stream. Users without a precoder column must carry zero gain rows.
inline CouplingMatrix make_coupling_from_gains(const arma::mat& gain, const arma::vec& tx_power,
                                               const std::vector<arma::uword>& domain_of) {
  const arma::uword ut = gain.n_rows;
  if (gain.n_cols != ut) throw DimensionError("coupling: gain matrix must be square");
  if (tx_power.n_elem != ut) throw DimensionError("coupling: power vector length mismatch");
  if (domain_of.size() != ut) throw DimensionError("coupling: domain map length mismatch");

  CouplingMatrix cm;
  cm.domain_of = domain_of;
  cm.psi.zeros(ut, ut);
  for (arma::uword u = 0; u < ut; ++u) {
    for (arma::uword v = 0; v < ut; ++v) {
      if (domain_of[u] == domain_of[v]) continue;
      double val = tx_power(u) * gain(u, v);
      if (!(val >= 0.0)) throw DimensionError("coupling: negative or non-finite coefficient");
      cm.psi(u, v) = val;
    }
  }
  cm.psi_sym = cm.psi + cm.psi.t();
  return cm;
}

namespace detail {

inline std::vector<int> serving_map_checked(const arma::mat& psi, const Assignment& a) {
  if (psi.n_rows != psi.n_cols) throw DimensionError("leakage: psi must be square");
  if (a.num_users != psi.n_rows) throw InfeasibleError("leakage: assignment size mismatch");
  return a.serving_domain();
}

}  // namespace detail

// Total leakage f = sum_k sum_{l!=k} x_k' Psi x_l, accumulated in a
// fixed row-major order over user pairs so repeated evaluations of the same
// assignment are bit-identical.
inline double total_leakage_vector(const arma::mat& psi, const Assignment& a) {
  const auto dom = detail::serving_map_checked(psi, a);
  const arma::uword ut = psi.n_rows;
  double f = 0.0;
  for (arma::uword u = 0; u < ut; ++u) {
    if (dom[u] < 0) continue;
    for (arma::uword v = 0; v < ut; ++v) {
      if (dom[v] < 0 || dom[v] == dom[u]) continue;
      f += psi(u, v);
    }
  }
  return f;
}

// Matrix route of Proposition 1: f = tr(X' Psi X Omega), Omega = 11' - I.
inline double total_leakage_matrix(const arma::mat& psi, const Assignment& a) {
  (void)detail::serving_map_checked(psi, a);
  const arma::uword na = a.num_domains();
  arma::mat x = a.to_matrix();
  arma::mat omega = arma::ones(na, na) - arma::eye(na, na);
  return arma::trace(x.t() * psi * x * omega);
}

// Leakage seen by one served user from all other-domain streams.
inline double per_user_leakage(const arma::mat& psi, const Assignment& a, arma::uword user) {
  const auto dom = detail::serving_map_checked(psi, a);
  if (user >= a.num_users || dom[user] < 0) throw UserNotServedError("per_user_leakage: user not served");
  double g = 0.0;
  for (arma::uword u = 0; u < psi.n_rows; ++u) {
    if (dom[u] < 0 || dom[u] == dom[user]) continue;
    g += psi(u, user);
  }
  return g;
}

// --- CSV serialization (row-major, header carries user ids) ---------------

inline void write_coupling_csv(std::ostream& os, const arma::mat& psi) {
  os << "user";
  for (arma::uword v = 0; v < psi.n_cols; ++v) os << "," << v;
  os << "\n";
  for (arma::uword u = 0; u < psi.n_rows; ++u) {
    os << u;
    for (arma::uword v = 0; v < psi.n_cols; ++v) os << "," << fmt_g9(psi(u, v));
    os << "\n";
  }
}

inline void write_coupling_csv(const std::string& path, const arma::mat& psi) {
  std::ofstream os(path);
  if (!os) throw ConfigError("coupling: cannot open " + path + " for writing");
  write_coupling_csv(os, psi);
}

// Accepts both the header form produced above and a raw numeric matrix.
inline arma::mat read_coupling_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("coupling: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_checked = false;
  bool has_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (!header_checked) {
      header_checked = true;
      has_header = line.rfind("user", 0) == 0;
      if (has_header) continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first && has_header) {
        first = false;
        continue;
      }
      first = false;
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("coupling: bad CSV cell '" + cell + "' in " + path);
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("coupling: empty CSV " + path);
  const std::size_t n = rows.size();
  arma::mat psi(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    if (rows[u].size() != n) throw ConfigError("coupling: CSV is not a square matrix");
    for (std::size_t v = 0; v < n; ++v) psi(u, v) = rows[u][v];
  }
  if (psi.min() < 0.0 || !psi.is_finite()) throw ConfigError("coupling: CSV entries must be finite and >= 0");
  return psi;
}

}  // namespace cranua
