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

// Binary user-to-domain assignment X (U_T x A), stored as per-domain sorted
// user lists. Column k of X is the assignment vector x_k; its support is
// served[k]. The loading vector rho is recovered as the per-domain counts.
struct Assignment {
  arma::uword num_users = 0;
  std::vector<std::vector<arma::uword>> served;

  arma::uword num_domains() const { return static_cast<arma::uword>(served.size()); }

  std::vector<arma::uword> rho() const {
    std::vector<arma::uword> out;
    out.reserve(served.size());
    for (const auto& s : served) out.push_back(static_cast<arma::uword>(s.size()));
    return out;
  }

  // Serving domain per user, or -1 when idle.
  std::vector<int> serving_domain() const {
    std::vector<int> dom(num_users, -1);
    for (std::size_t k = 0; k < served.size(); ++k)
      for (arma::uword u : served[k]) {
        if (u >= num_users) throw InfeasibleError("assignment: user index out of range");
        if (dom[u] >= 0) throw InfeasibleError("assignment: user assigned to more than one domain");
        dom[u] = static_cast<int>(k);
      }
    return dom;
  }

  bool is_served(arma::uword user) const {
    for (const auto& s : served)
      for (arma::uword u : s)
        if (u == user) return true;
    return false;
  }

  arma::mat to_matrix() const {
    arma::mat x(num_users, num_domains(), arma::fill::zeros);
    auto dom = serving_domain();  // validates the assignment constraint
    (void)dom;
    for (std::size_t k = 0; k < served.size(); ++k)
      for (arma::uword u : served[k]) x(u, static_cast<arma::uword>(k)) = 1.0;
    return x;
  }

  // Checks both Problem-1 constraints: X'1 = rho and X 1 <= 1.
  void validate(const std::vector<arma::uword>& expected_rho) const {
    if (expected_rho.size() != served.size())
      throw InfeasibleError("assignment: loading vector length mismatch");
    for (std::size_t k = 0; k < served.size(); ++k)
      if (served[k].size() != expected_rho[k])
        throw InfeasibleError("assignment: loading constraint violated");
    (void)serving_domain();
  }
};

}  // namespace cranua
