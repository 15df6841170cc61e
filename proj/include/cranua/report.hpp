// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cranua/bounds.hpp"
#include "cranua/common.hpp"
#include "cranua/eval.hpp"

namespace cranua {

// Output-file plumbing: the rates/mobility/bounds CSV schemas and the run
// manifest that makes every CLI invocation replayable.

inline std::string rho_field(const std::vector<arma::uword>& rho) {
  bool uniform = true;
  for (auto r : rho)
    if (r != rho.front()) uniform = false;
  std::string out;
  if (uniform) return std::to_string(rho.front());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (i) out += ";";
    out += std::to_string(rho[i]);
  }
  return out;
}

inline void write_rates_csv(std::ostream& os, const std::vector<RateReport>& rows) {
  os << "scheme,drop,snr_db,rho,sum_rate_bps_hz,leakage,iters\n";
  for (const auto& r : rows) {
    os << r.scheme << "," << r.drop << "," << fmt_g9(r.snr_db) << "," << rho_field(r.rho) << ","
       << fmt_g9(r.sum_rate_bps_hz) << "," << fmt_g9(r.leakage) << "," << r.iters << "\n";
  }
}

inline void write_mobility_csv(std::ostream& os, const std::vector<DegradationRow>& rows) {
  os << "tau_ms,mean_sum_rate_bps_hz,degradation_pct\n";
  for (const auto& r : rows)
    os << fmt_g9(r.tau_ms) << "," << fmt_g9(r.mean_sum_rate_bps_hz) << ","
       << fmt_g9(r.degradation_pct) << "\n";
}

inline nlohmann::json bounds_report_json(const BoundsReport& r) {
  nlohmann::json j;
  j["f_bcd"] = r.f_bcd;
  if (r.f_oracle)
    j["f_oracle"] = *r.f_oracle;
  else
    j["f_oracle"] = nullptr;
  j["f_dw"] = r.f_dw;
  j["f_dual"] = r.f_dual;
  j["eta"] = r.eta;
  j["sigma_max"] = r.sigma_max;
  j["sigma_min"] = r.sigma_min;
  j["lemma2_bound_tight"] = r.lemma2_bound_tight;
  j["lemma2_bound_loose"] = r.lemma2_bound_loose;
  j["lemma3_bound"] = r.lemma3_bound;
  j["f_dw_cgm"] = r.f_dw_cgm;
  j["cgm_iterations"] = r.cgm_iterations;
  return j;
}

// Table-I-shaped CSV: one labeled row per quantity, one column per drop plus
// the mean. Error rows are relative to the oracle optimum:
// Error(DW)% = 100 (f_oracle - f_dw) / f_oracle, Error(Prop)% likewise.
inline void write_bounds_csv(std::ostream& os, const std::vector<BoundsReport>& reports) {
  auto emit = [&](const std::string& label, auto getter) {
    os << label;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : reports) {
      const auto v = getter(r);
      os << ",";
      if (v) {
        os << fmt_g9(*v);
        sum += *v;
        ++n;
      }
    }
    os << ",";
    if (n) os << fmt_g9(sum / static_cast<double>(n));
    os << "\n";
  };
  os << "row";
  for (std::size_t d = 0; d < reports.size(); ++d) os << ",drop_" << d;
  os << ",mean\n";
  using OptD = std::optional<double>;
  emit("Prop", [](const BoundsReport& r) -> OptD { return r.f_bcd; });
  emit("Opt", [](const BoundsReport& r) -> OptD { return r.f_oracle; });
  emit("DW", [](const BoundsReport& r) -> OptD { return r.f_dw; });
  emit("Dual", [](const BoundsReport& r) -> OptD { return r.f_dual; });
  emit("Error_DW_pct", [](const BoundsReport& r) -> OptD {
    if (!r.f_oracle || *r.f_oracle == 0.0) return std::nullopt;
    return 100.0 * (*r.f_oracle - r.f_dw) / *r.f_oracle;
  });
  emit("Error_Prop_pct", [](const BoundsReport& r) -> OptD {
    if (!r.f_oracle || *r.f_oracle == 0.0) return std::nullopt;
    return 100.0 * (r.f_bcd - *r.f_oracle) / *r.f_oracle;
  });
}

struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string tool_version = kVersion;
  std::string timestamp_utc;
  std::vector<std::string> args;  // full flag set, enough to replay the run
};

inline std::string utc_now_string() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["subcommand"] = m.subcommand;
  j["config_path"] = m.config_path;
  j["seed"] = m.seed;
  j["out_dir"] = m.out_dir;
  j["tool_version"] = m.tool_version;
  j["timestamp_utc"] = m.timestamp_utc;
  j["args"] = m.args;
  std::ofstream os(path);
  if (!os) throw ConfigError("manifest: cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
}

inline RunManifest read_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("manifest: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("manifest: JSON parse error: ") + e.what());
  }
  RunManifest m;
  m.subcommand = j.at("subcommand").get<std::string>();
  m.config_path = j.value("config_path", std::string{});
  m.seed = j.at("seed").get<std::uint64_t>();
  m.out_dir = j.value("out_dir", std::string{});
  m.tool_version = j.value("tool_version", std::string{});
  m.timestamp_utc = j.value("timestamp_utc", std::string{});
  m.args = j.at("args").get<std::vector<std::string>>();
  return m;
}

}  // namespace cranua
