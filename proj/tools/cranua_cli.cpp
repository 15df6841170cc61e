// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cranua/bcd.hpp"
#include "cranua/bounds.hpp"
#include "cranua/coupling.hpp"
#include "cranua/eval.hpp"
#include "cranua/report.hpp"
#include "cranua/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(std::stod(cell));
  }
  return out;
}

std::vector<arma::uword> parse_rho(const std::string& text, arma::uword num_domains) {
  std::vector<arma::uword> rho;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    const long long v = std::stoll(cell);
    if (v < 0) throw cranua::ConfigError("rho entries must be >= 0");
    rho.push_back(static_cast<arma::uword>(v));
  }
  if (rho.empty()) throw cranua::ConfigError("empty rho list");
  if (rho.size() == 1 && num_domains > 1) rho.assign(num_domains, rho.front());
  if (num_domains > 0 && rho.size() != num_domains)
    throw cranua::ConfigError("rho list length must be 1 or match the domain count");
  return rho;
}

std::vector<cranua::Scheme> parse_schemes(const std::string& text) {
  if (text == "all")
    return {cranua::Scheme::ProposedUa, cranua::Scheme::Distance, cranua::Scheme::IlmFixed,
            cranua::Scheme::GlobalZf};
  std::vector<cranua::Scheme> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    out.push_back(cranua::scheme_from_string(cell));
  }
  if (out.empty()) throw cranua::ConfigError("empty scheme list");
  return out;
}

cranua::SinrMode parse_sinr_mode(const std::string& text) {
  if (text == "achieved") return cranua::SinrMode::Achieved;
  if (text == "idealized") return cranua::SinrMode::Idealized;
  throw cranua::ConfigError("sinr mode must be 'achieved' or 'idealized'");
}

std::vector<arma::uword> default_rho(const cranua::DeploymentConfig& cfg) {
  return std::vector<arma::uword>(cfg.A, std::max<arma::uword>(cfg.U / 2, 1));
}

void ensure_outdir(const std::string& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw cranua::ConfigError("cannot create output directory " + out);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw cranua::ConfigError("cannot open " + path + " for writing");
  os << content;
}

// Replay-friendly argv: original flags with --out replaced and the effective
// seed pinned.
cranua::RunManifest make_manifest(const std::string& subcommand, const std::string& config_path,
                                  std::uint64_t seed, const std::string& out,
                                  const std::vector<std::string>& raw_args) {
  cranua::RunManifest m;
  m.subcommand = subcommand;
  m.config_path = config_path;
  m.seed = seed;
  m.out_dir = out;
  m.timestamp_utc = cranua::utc_now_string();
  bool have_seed = false;
  for (std::size_t i = 0; i < raw_args.size(); ++i) {
    if (raw_args[i] == "--out") {
      ++i;
      continue;
    }
    if (raw_args[i] == "--seed") have_seed = true;
    m.args.push_back(raw_args[i]);
  }
  if (!have_seed) {
    m.args.push_back("--seed");
    m.args.push_back(std::to_string(seed));
  }
  return m;
}

int dispatch(const std::vector<std::string>& args);

int cmd_rates(const std::vector<std::string>& args) {
  CLI::App app{"Monte Carlo sum-rate experiment"};
  std::string config_path, out = ".", schemes_text = "proposed_ua", snr_text, rho_text,
              mode_text = "achieved";
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned drops = 1;
  app.add_option("--config", config_path, "deployment config JSON")->required();
  app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out, "output directory");
  app.add_option("--drops", drops, "Monte Carlo drops");
  app.add_option("--schemes", schemes_text, "comma list or 'all'");
  app.add_option("--snr-grid", snr_text, "comma list of tx powers (dBm)");
  app.add_option("--rho", rho_text, "loading per domain (single value or comma list)");
  app.add_option("--sinr-mode", mode_text, "achieved | idealized");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  cranua::DeploymentConfig cfg = cranua::load_config(config_path);
  if (seed_set) cfg.seed = seed;
  const auto rho = rho_text.empty() ? default_rho(cfg) : parse_rho(rho_text, cfg.A);
  cranua::PipelineOptions opts;
  opts.sinr_mode = parse_sinr_mode(mode_text);

  const auto rows = cranua::run_monte_carlo(cfg, parse_schemes(schemes_text), drops,
                                            parse_double_list(snr_text), rho, opts);
  ensure_outdir(out);
  std::ostringstream csv;
  cranua::write_rates_csv(csv, rows);
  write_text_file(out + "/rates.csv", csv.str());
  cranua::write_manifest(out + "/manifest.json",
                         make_manifest("rates", config_path, cfg.seed, out, args));
  return kExitOk;
}

int cmd_bounds(const std::vector<std::string>& args) {
  CLI::App app{"Leakage bounds: BCD vs oracle vs DW vs dual"};
  std::string config_path, psi_path, out = ".", rho_text;
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned drops = 1;
  std::uint64_t column_cap = 1000000, oracle_cap = 10000000;
  app.add_option("--config", config_path, "deployment config JSON");
  app.add_option("--psi-file", psi_path, "raw coupling matrix CSV (bypasses the radio layer)");
  app.add_option("--rho", rho_text, "loading per domain");
  app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out, "output directory");
  app.add_option("--drops", drops, "Monte Carlo drops (config mode)");
  app.add_option("--column-cap", column_cap, "max |S_rho| for enumeration");
  app.add_option("--oracle-cap", oracle_cap, "max feasible assignments for exhaustive search");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  if (config_path.empty() == psi_path.empty())
    throw cranua::ConfigError("bounds: exactly one of --config / --psi-file is required");

  std::vector<cranua::BoundsReport> reports;
  std::vector<std::vector<double>> histories;
  ensure_outdir(out);

  auto write_history = [&](std::size_t idx, const std::vector<double>& h) {
    std::ostringstream os;
    os << "update,f\n";
    for (std::size_t i = 0; i < h.size(); ++i) os << i << "," << cranua::fmt_g9(h[i]) << "\n";
    write_text_file(out + "/bcd_history_drop" + std::to_string(idx) + ".csv", os.str());
  };

  auto report_for_psi = [&](const arma::mat& psi, const std::vector<arma::uword>& rho) {
    // first-fit feasible start for the BCD value
    cranua::Assignment x0;
    x0.num_users = psi.n_rows;
    x0.served.resize(rho.size());
    arma::uword next = 0;
    for (std::size_t k = 0; k < rho.size(); ++k)
      for (arma::uword t = 0; t < rho[k]; ++t) x0.served[k].push_back(next++);
    cranua::BcdResult bcd = cranua::run_bcd(psi, rho, x0);
    histories.push_back(bcd.f_history);
    return cranua::compute_bounds_report(psi, rho, bcd.f_history.back(), column_cap, oracle_cap);
  };

  std::uint64_t effective_seed = seed;
  if (!psi_path.empty()) {
    const arma::mat psi = cranua::read_coupling_csv(psi_path);
    if (rho_text.empty()) throw cranua::ConfigError("bounds: --rho is required with --psi-file");
    const auto rho = parse_rho(rho_text, 0);
    reports.push_back(report_for_psi(psi, rho));
  } else {
    cranua::DeploymentConfig cfg = cranua::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    effective_seed = cfg.seed;
    const auto rho = rho_text.empty() ? default_rho(cfg) : parse_rho(rho_text, cfg.A);
    for (unsigned d = 0; d < drops; ++d) {
      cranua::DeploymentConfig c = cfg;
      c.seed = cranua::drop_seed(cfg.seed, d);
      try {
        const cranua::Scenario s = cranua::generate_scenario(c);
        cranua::Assignment full;
        full.num_users = s.num_users();
        full.served.resize(s.A);
        for (arma::uword u = 0; u < s.num_users(); ++u)
          full.served[s.initial_domain(u)].push_back(u);
        cranua::PrecoderSet v0 = cranua::make_domain_precoders(s, full, true);
        arma::vec share(s.A);
        for (arma::uword i = 0; i < s.A; ++i)
          share(i) = cranua::dbm_to_watt(c.tx_power_dbm(i)) / static_cast<double>(s.U);
        cranua::CouplingMatrix psi =
            cranua::coupling_matrix(s, v0, share, cranua::initial_domain_map(s));

        cranua::Assignment x0 = cranua::initial_assignment(s, rho);
        cranua::BcdResult bcd = cranua::run_bcd(psi.psi, rho, x0);
        reports.push_back(cranua::compute_bounds_report(psi.psi, rho, bcd.f_history.back(),
                                                        column_cap, oracle_cap));
        histories.push_back(bcd.f_history);
      } catch (const cranua::TooLargeError& e) {
        std::cerr << "bounds: drop " << d << " skipped: " << e.what() << "\n";
        continue;
      }
    }
    if (reports.empty()) throw cranua::SolverError("bounds: no drop produced a report");
  }

  for (std::size_t d = 0; d < reports.size(); ++d) {
    std::ostringstream name;
    name << out << "/bounds_report_drop" << d << ".json";
    write_text_file(name.str(), cranua::bounds_report_json(reports[d]).dump(2) + "\n");
    write_history(d, histories[d]);
  }
  std::ostringstream csv;
  cranua::write_bounds_csv(csv, reports);
  write_text_file(out + "/bounds_table.csv", csv.str());
  cranua::write_manifest(out + "/manifest.json",
                         make_manifest("bounds", config_path, effective_seed, out, args));
  return kExitOk;
}

int cmd_mobility(const std::vector<std::string>& args) {
  CLI::App app{"Outdated-CSI degradation experiment"};
  std::string config_path, out = ".", tau_text = "0,1,10,100", rho_text, mode_text = "achieved";
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned drops = 1;
  double snr_target_db = 12.0;
  app.add_option("--config", config_path, "deployment config JSON")->required();
  app.add_option("--tau-ms", tau_text, "comma list of CSI ages in ms");
  app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--out", out, "output directory");
  app.add_option("--drops", drops, "Monte Carlo drops");
  app.add_option("--rho", rho_text, "loading per domain");
  app.add_option("--snr-target-db", snr_target_db, "mean served SNR the noise floor is calibrated to");
  app.add_option("--sinr-mode", mode_text, "achieved | idealized");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  cranua::DeploymentConfig cfg = cranua::load_config(config_path);
  if (seed_set) cfg.seed = seed;
  const auto rho = rho_text.empty() ? default_rho(cfg) : parse_rho(rho_text, cfg.A);
  cranua::PipelineOptions opts;
  opts.sinr_mode = parse_sinr_mode(mode_text);

  const auto rows =
      cranua::run_outdated_csi(cfg, parse_double_list(tau_text), drops, rho, opts, snr_target_db);
  ensure_outdir(out);
  std::ostringstream csv;
  cranua::write_mobility_csv(csv, rows);
  write_text_file(out + "/mobility.csv", csv.str());
  cranua::write_manifest(out + "/manifest.json",
                         make_manifest("mobility", config_path, cfg.seed, out, args));
  return kExitOk;
}

int cmd_replay(const std::vector<std::string>& args) {
  CLI::App app{"Re-run a recorded manifest bit-exactly"};
  std::string manifest_path, out;
  app.add_option("manifest", manifest_path, "manifest.json of a previous run")->required();
  app.add_option("--out", out, "output directory for the replay")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  }

  const cranua::RunManifest m = cranua::read_manifest(manifest_path);
  std::vector<std::string> replay_args = {m.subcommand};
  replay_args.insert(replay_args.end(), m.args.begin(), m.args.end());
  replay_args.push_back("--out");
  replay_args.push_back(out);
  return dispatch(replay_args);
}

int dispatch(const std::vector<std::string>& args) {
  if (args.empty()) {
    std::cerr << "usage: cranua_cli <rates|bounds|mobility|replay> [options]\n";
    return kExitConfig;
  }
  const std::string sub = args.front();
  const std::vector<std::string> rest(args.begin() + 1, args.end());
  if (sub == "rates") return cmd_rates(rest);
  if (sub == "bounds") return cmd_bounds(rest);
  if (sub == "mobility") return cmd_mobility(rest);
  if (sub == "replay") return cmd_replay(rest);
  if (sub == "--help" || sub == "-h") {
    std::cout << "usage: cranua_cli <rates|bounds|mobility|replay> [options]\n"
              << "  rates     Monte Carlo sum-rate table (CSV)\n"
              << "  bounds    leakage bounds table + per-drop JSON reports\n"
              << "  mobility  outdated-CSI degradation table\n"
              << "  replay    re-run a recorded manifest\n";
    return kExitOk;
  }
  std::cerr << "unknown subcommand '" << sub << "'\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const CLI::CallForHelp&) {
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cranua::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const cranua::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
