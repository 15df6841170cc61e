// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <armadillo>
#include <vector>

#include "cranua/coupling.hpp"
#include "cranua/precoding.hpp"
#include "cranua/scenario.hpp"

namespace cranua {

// psi_{i_m, j_n} = p_i |h_{i,j_n} v_{i_m}|^2 for every stream in the precoder
// set against every potential victim. tx_power_per_stream(k) is the per-user
// transmit power of serving group k; domain_of keys the zeroed blocks (initial
// domains for the UA surrogate, serving domains for achieved-leakage reports).
inline CouplingMatrix coupling_matrix(const Scenario& s, const PrecoderSet& prec,
                                      const arma::vec& tx_power_per_stream,
                                      const std::vector<arma::uword>& domain_of) {
  const arma::uword ut = s.num_users();
  if (tx_power_per_stream.n_elem != prec.users.size())
    throw DimensionError("coupling_matrix: power vector / precoder group mismatch");

  arma::mat gain(ut, ut, arma::fill::zeros);
  arma::vec power(ut, arma::fill::zeros);
  for (std::size_t k = 0; k < prec.users.size(); ++k) {
    for (std::size_t m = 0; m < prec.users[k].size(); ++m) {
      const arma::uword u = prec.users[k][m];
      if (u >= ut) throw DimensionError("coupling_matrix: precoder user out of range");
      power(u) = tx_power_per_stream(k);
      const arma::cx_vec col = prec.V[k].col(m);
      for (arma::uword v = 0; v < ut; ++v) {
        if (v == u) continue;
        const arma::cx_rowvec row =
            prec.global ? s.stacked_row(v) : s.channel_row(static_cast<arma::uword>(k), v);
        gain(u, v) = std::norm(arma::as_scalar(row * col));
      }
    }
  }
  return make_coupling_from_gains(gain, power, domain_of);
}

inline std::vector<arma::uword> initial_domain_map(const Scenario& s) {
  std::vector<arma::uword> dom(s.num_users());
  for (arma::uword u = 0; u < s.num_users(); ++u) dom[u] = s.initial_domain(u);
  return dom;
}

// Default keying: zero blocks on the initial domains (the UA surrogate).
inline CouplingMatrix coupling_matrix(const Scenario& s, const PrecoderSet& prec,
                                      const arma::vec& tx_power_per_stream) {
  return coupling_matrix(s, prec, tx_power_per_stream, initial_domain_map(s));
}

}  // namespace cranua
