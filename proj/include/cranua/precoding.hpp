// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <armadillo>
#include <vector>

#include "cranua/assignment.hpp"
#include "cranua/common.hpp"
#include "cranua/scenario.hpp"

namespace cranua {

// Per-domain zero-forcing, leakage-minimizing precoding:
//
//   V* = sqrt(U') R^-1 H^H (H R^-1 H^H)^-1 / || R^-1 H^H (H R^-1 H^H)^-1 ||_F
//
// with R the aggregate channel Gram matrix toward the victims plus a small
// regularizer. V* minimizes tr(V^H R V) subject to H V = beta I; beta is not
// chosen, it is what the power normalization ||V||_F = sqrt(U') leaves on the
// diagonal of H V.

struct ZfResult {
  arma::cx_mat v;  // MN x U'
  double beta = 0.0;
  double eps = 0.0;  // regularizer actually added to R
};

inline ZfResult zero_forcing_precoder(const arma::cx_mat& h_intra,
                                      const std::vector<arma::cx_mat>& h_inter) {
  const arma::uword users = h_intra.n_rows;
  const arma::uword ant = h_intra.n_cols;
  if (users == 0) throw DimensionError("zero_forcing_precoder: empty intra channel");
  if (users > ant) throw RankDeficientError("zero_forcing_precoder: more users than antennas");
  if (arma::rank(h_intra) < users)
    throw RankDeficientError("zero_forcing_precoder: intra channel rows are dependent");

  arma::cx_mat r(ant, ant, arma::fill::zeros);
  for (const auto& hj : h_inter) {
    if (hj.n_cols != ant) throw DimensionError("zero_forcing_precoder: inter channel width mismatch");
    r += hj.t() * hj;
  }
  // The closed form assumes R invertible; it is singular whenever the victim
  // rows span less than the full array (including the A = 1 case, R = 0).
  const double trace_r = arma::trace(r).real();
  const double eps = 1e-9 * (trace_r > 0.0 ? trace_r / static_cast<double>(ant) : 1.0);
  r += eps * arma::eye<arma::cx_mat>(ant, ant);

  arma::cx_mat ri_ht = arma::solve(r, h_intra.t());
  arma::cx_mat gram = h_intra * ri_ht;  // U' x U'
  arma::cx_mat m;
  if (!arma::solve(m, gram.st(), ri_ht.st())) // m.st() = ri_ht * gram^-1
    throw RankDeficientError("zero_forcing_precoder: intra Gram matrix is singular");
  m = m.st();

  // The regularized solve can leave ~1e-7 of constraint residual when R has a
  // large dynamic range; re-project onto {H M = I} through the well-conditioned
  // intra Gram matrix.
  const arma::cx_mat hh = h_intra * h_intra.t();
  for (int pass = 0; pass < 2; ++pass)
    m += h_intra.t() * arma::solve(hh, arma::eye<arma::cx_mat>(users, users) - h_intra * m);

  const double norm = arma::norm(m, "fro");
  if (!(norm > 0.0) || !m.is_finite())
    throw RankDeficientError("zero_forcing_precoder: degenerate closed form");
  const double scale = std::sqrt(static_cast<double>(users));

  ZfResult out;
  out.v = (scale / norm) * m;
  out.beta = scale / norm;
  out.eps = eps;
  return out;
}

// Set of precoders covering the served users. For per-domain sets, V[i] has
// one column per served user of domain i over that domain's MN antennas. The
// global set stacks all arrays into one (index 0).
struct PrecoderSet {
  bool global = false;
  std::vector<arma::cx_mat> V;
  std::vector<std::vector<arma::uword>> users;  // column -> global user id
  arma::vec beta;
  arma::vec regularization_eps;

  // Serving domain per user (-1 = idle); for the global set, every served
  // user maps to pseudo-domain 0.
  std::vector<int> serving_of(arma::uword num_users) const {
    std::vector<int> dom(num_users, -1);
    for (std::size_t k = 0; k < users.size(); ++k)
      for (arma::uword u : users[k]) dom[u] = static_cast<int>(k);
    return dom;
  }
};

// Builds per-domain precoders for the served sets of `assignment`. When
// `null_inter_domain` is set, each domain additionally steers its columns away
// from the users served by the other domains (the R term of the closed form);
// otherwise R is just the regularizer and the result is plain intra-domain ZF.
inline PrecoderSet make_domain_precoders(const Scenario& s, const Assignment& assignment,
                                         bool null_inter_domain) {
  const arma::uword na = assignment.num_domains();
  if (na != s.A) throw DimensionError("make_domain_precoders: domain count mismatch");
  PrecoderSet out;
  out.V.resize(na);
  out.users = assignment.served;
  out.beta.zeros(na);
  out.regularization_eps.zeros(na);
  for (arma::uword i = 0; i < na; ++i) {
    const auto& own = assignment.served[i];
    if (own.empty()) continue;
    arma::cx_mat h_intra(own.size(), s.M * s.N);
    for (std::size_t t = 0; t < own.size(); ++t) h_intra.row(t) = s.channel_row(i, own[t]);
    std::vector<arma::cx_mat> h_inter;
    if (null_inter_domain) {
      for (arma::uword j = 0; j < na; ++j) {
        if (j == i || assignment.served[j].empty()) continue;
        arma::cx_mat hj(assignment.served[j].size(), s.M * s.N);
        for (std::size_t t = 0; t < assignment.served[j].size(); ++t)
          hj.row(t) = s.channel_row(i, assignment.served[j][t]);
        h_inter.push_back(std::move(hj));
      }
    }
    ZfResult zf = zero_forcing_precoder(h_intra, h_inter);
    out.V[i] = std::move(zf.v);
    out.beta(i) = zf.beta;
    out.regularization_eps(i) = zf.eps;
  }
  return out;
}

// Joint zero-forcing over the union of all radio-heads: one virtual array of
// A*M*N antennas serving every assigned user, nulling all cross terms.
inline PrecoderSet global_zf_precoder(const Scenario& s, const Assignment& assignment) {
  std::vector<arma::uword> served;
  for (const auto& blk : assignment.served) served.insert(served.end(), blk.begin(), blk.end());
  std::sort(served.begin(), served.end());
  if (served.size() > s.A * s.M * s.N)
    throw InfeasibleError("global_zf_precoder: more served users than total antennas");
  if (served.empty()) throw InfeasibleError("global_zf_precoder: empty assignment");

  arma::cx_mat h(served.size(), s.A * s.M * s.N);
  for (std::size_t t = 0; t < served.size(); ++t) h.row(t) = s.stacked_row(served[t]);
  ZfResult zf = zero_forcing_precoder(h, {});

  PrecoderSet out;
  out.global = true;
  out.V.push_back(std::move(zf.v));
  out.users.push_back(std::move(served));
  out.beta = arma::vec{zf.beta};
  out.regularization_eps = arma::vec{zf.eps};
  return out;
}

}  // namespace cranua
