// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dolhodge/theorem_engine.hpp"

namespace dolhodge {

using Json = nlohmann::json;

enum class Command { verify_theorem, verify_lemmas, wp_metric, rescale_demo, convergence, spectrum };

Command parse_command(const std::string& name);
std::string command_name(Command c);

// Resolved run configuration. q = -1 selects q from the sign of the degree.
struct RunConfig {
  Command command = Command::verify_theorem;
  Complex tau{0.0, 1.0};
  int degree = 2;
  std::vector<Complex> twist;   // default pi / Im(tau), one direction
  Eigen::MatrixXcd rescale;     // default 0.3 id
  double rescale_quartic = 0.0;
  int n_side = 48;
  int stencil_order = 4;
  int q = -1;
  std::vector<Complex> s0;      // default origin
  double eta = 1e-2;
  std::string output_path;
  std::string csv_path = "convergence.csv";
  std::uint64_t seed = 0x5EED;
  double residual_tol = 5e-3;
  double serre_tol = 1e-2;
  std::vector<int> n_list{16, 24, 32, 48};
  std::vector<double> eta_list{4e-2, 2e-2, 1e-2};
  double wp_step = 0.05;
  int wp_side = 5;
  bool timing = false;
};

// Keys accepted in config files and --set flags.
const std::vector<std::string>& config_keys();

// Validates a flat JSON object; unknown keys and ill-typed values throw ConfigError
// naming the key.
RunConfig load_config(const Json& raw);
// File (optional), then key=value overrides (values parsed as JSON, else as strings),
// then the command name.
RunConfig load_config(const std::string& path, const std::vector<std::string>& sets, const std::string& command);

Json config_to_json(const RunConfig& cfg);
FamilySpec family_of(const RunConfig& cfg);
int resolved_q(const RunConfig& cfg);

struct RunResult {
  int exit_code = 0;
  Json report;
  std::string csv;  // convergence only
};

// Runs one command. Library exceptions propagate; cli_main maps them to exit codes.
RunResult run(const RunConfig& cfg);

// Keys sorted, shortest round-trip floats, trailing newline. Empty path writes to stdout.
std::string format_report(const Json& report);
void emit_report(const Json& report, const std::string& path);

Json error_object(int code, const std::string& kind, const std::string& message);

// Exit codes: 0 pass, 1 tolerance failure, 2 invalid config, 3 rank jump, 4 solver or I/O.
int cli_main(int argc, char** argv);

}  // namespace dolhodge
