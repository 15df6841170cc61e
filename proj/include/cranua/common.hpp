// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace cranua {

inline constexpr const char* kVersion = "0.1.0";

// Error hierarchy. Every failure mode surfaces as a typed exception with a
// message; nothing returns silent garbage.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct RankDeficientError : Error {
  using Error::Error;
};
struct InfeasibleError : Error {
  using Error::Error;
};
struct UnsupportedError : Error {
  using Error::Error;
};
struct TooLargeError : Error {
  using Error::Error;
};
struct UserNotServedError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Fixed 9-significant-digit ASCII rendering; all CLI/CSV numbers go through
// this so replayed runs diff clean.
inline std::string fmt_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::string(buf);
}

}  // namespace cranua
