// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <armadillo>
#include <vector>

#include "cranua/assignment.hpp"
#include "cranua/rng.hpp"

namespace testutil {

// Dense nonnegative coupling matrix with zero diagonal.
inline arma::mat random_psi(cranua::Rng& rng, arma::uword ut) {
  arma::mat psi(ut, ut);
  for (arma::uword u = 0; u < ut; ++u)
    for (arma::uword v = 0; v < ut; ++v) psi(u, v) = u == v ? 0.0 : rng.uniform01();
  return psi;
}

// Loading with every rho_k >= 1 and sum <= ut.
inline std::vector<arma::uword> random_rho(cranua::Rng& rng, arma::uword ut, arma::uword domains) {
  std::vector<arma::uword> rho(domains, 1);
  arma::uword left = ut - domains;
  for (arma::uword k = 0; k < domains && left > 0; ++k) {
    const arma::uword extra = rng.bounded(left + 1);
    rho[k] += extra;
    left -= extra;
  }
  return rho;
}

// Feasible assignment drawn uniformly-ish: shuffled users cut into blocks.
inline cranua::Assignment random_assignment(cranua::Rng& rng, arma::uword ut,
                                            const std::vector<arma::uword>& rho) {
  std::vector<arma::uword> perm(ut);
  for (arma::uword u = 0; u < ut; ++u) perm[u] = u;
  for (arma::uword u = ut; u > 1; --u) std::swap(perm[u - 1], perm[rng.bounded(u)]);
  cranua::Assignment a;
  a.num_users = ut;
  a.served.resize(rho.size());
  arma::uword next = 0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    for (arma::uword t = 0; t < rho[k]; ++t) a.served[k].push_back(perm[next++]);
    std::sort(a.served[k].begin(), a.served[k].end());
  }
  return a;
}

// Independent leakage route: literal quadruple sum over ordered domain
// pairs, used as the oracle the library evaluators are checked against.
inline double leakage_quadruple_sum(const arma::mat& psi, const cranua::Assignment& a) {
  double f = 0.0;
  for (std::size_t k = 0; k < a.served.size(); ++k)
    for (std::size_t l = 0; l < a.served.size(); ++l) {
      if (l == k) continue;
      for (arma::uword u : a.served[k])
        for (arma::uword v : a.served[l]) f += psi(u, v);
    }
  return f;
}

inline cranua::Assignment first_fit_assignment(arma::uword ut, const std::vector<arma::uword>& rho) {
  cranua::Assignment a;
  a.num_users = ut;
  a.served.resize(rho.size());
  arma::uword next = 0;
  for (std::size_t k = 0; k < rho.size(); ++k)
    for (arma::uword t = 0; t < rho[k]; ++t) a.served[k].push_back(next++);
  return a;
}

}  // namespace testutil
