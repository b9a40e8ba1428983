// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dolhodge/cli.hpp"

using namespace dolhodge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("dolhodge_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI through the shell; args are passed verbatim.
Outcome run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out = scratch_dir() / "stdout.txt";
  const fs::path err = scratch_dir() / "stderr.txt";
  const std::string cmd = "cd '" + scratch_dir().string() + "' && " + env + " '" + DOLHODGE_CLI_PATH + "' " + args +
                          " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

}  // namespace

TEST_CASE("minimal config applies the documented defaults") {
  const RunConfig cfg = load_config(Json{{"command", "verify-theorem"}});
  CHECK(cfg.command == Command::verify_theorem);
  CHECK(cfg.tau == Complex(0.0, 1.0));
  CHECK(cfg.degree == 2);
  CHECK(cfg.n_side == 48);
  CHECK(cfg.stencil_order == 4);
  CHECK(cfg.eta == 1e-2);
  CHECK(cfg.seed == 0x5EEDu);
  REQUIRE(cfg.twist.size() == 1);
  CHECK(cfg.twist[0] == Complex(kPi, 0.0));
  CHECK(cfg.rescale(0, 0) == Complex(0.3, 0.0));
  CHECK(resolved_q(cfg) == 0);
  CHECK(resolved_q(load_config(Json{{"degree", -2}})) == 1);
}

TEST_CASE("config validation names the offending key") {
  auto message = [](const Json& raw) {
    try {
      load_config(raw);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(Json{{"bogus", 1}}).find("bogus") != std::string::npos);
  CHECK(message(Json{{"n_side", "large"}}).find("n_side") != std::string::npos);
  CHECK(message(Json{{"n_side", 7}}).find("n_side") != std::string::npos);
  CHECK(message(Json{{"eta", -1.0}}).find("eta") != std::string::npos);
  CHECK(message(Json{{"q", 2}}).find("q") != std::string::npos);
  CHECK(message(Json{{"twist", Json::array({Json::array({1.0, 0.0})})}, {"s0", Json::array()}}).find("s0") !=
        std::string::npos);
  CHECK(message(Json{{"rescale", Json::array({Json::array({0.0, 1.0})})}}).find("rescale") != std::string::npos);
  CHECK(message(Json{{"command", "plot"}}).find("command") != std::string::npos);
  CHECK(message(Json{{"seed", -3}}).find("seed") != std::string::npos);
}

TEST_CASE("config round trips through its JSON echo") {
  const Json raw{{"command", "convergence"},
                 {"degree", -1},
                 {"twist", Json::array({Json::array({1.0, 0.5}), Json::array({0.0, -2.0})})},
                 {"rescale", Json::array({Json::array({Json::array({0.3, 0.0}), Json::array({0.1, 0.2})}),
                                          Json::array({Json::array({0.1, -0.2}), Json::array({0.5, 0.0})})})},
                 {"s0", Json::array({Json::array({0.01, 0.0}), 0.02})},
                 {"seed", "0x10"},
                 {"n_list", {8, 10, 12}}};
  const RunConfig cfg = load_config(raw);
  CHECK(cfg.seed == 16u);
  CHECK(cfg.rescale(0, 1) == Complex(0.1, 0.2));
  CHECK(cfg.s0[1] == Complex(0.02, 0.0));
  const Json echo = config_to_json(cfg);
  CHECK(config_to_json(load_config(echo)) == echo);
  CHECK(echo["q"] == 1);
}

TEST_CASE("--set overrides file keys and parses JSON values") {
  const fs::path file = scratch_dir() / "cfg.json";
  std::ofstream(file) << R"({"command": "spectrum", "degree": 3, "n_side": 16})";
  const RunConfig cfg = load_config(file.string(), {"degree=-1", "twist=[[0.5, 0.25]]"}, "");
  CHECK(cfg.command == Command::spectrum);
  CHECK(cfg.degree == -1);
  CHECK(cfg.n_side == 16);
  CHECK(cfg.twist[0] == Complex(0.5, 0.25));
  CHECK(load_config(file.string(), {}, "wp-metric").command == Command::wp_metric);
  CHECK_THROWS_AS(load_config((scratch_dir() / "missing.json").string(), {}, ""), ConfigError);
  CHECK_THROWS_AS(load_config("", {"degree"}, ""), ConfigError);
}

TEST_CASE("report serialization is canonical") {
  const Json rep{{"b", 0.1}, {"a", Json::array({1.0 / 3.0, 2.0})}, {"c", nullptr}};
  const std::string text = format_report(rep);
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(text.find("0.3333333333333333") != std::string::npos);
  CHECK(Json::parse(text)["a"][0].get<double>() == 1.0 / 3.0);
  CHECK(text.back() == '\n');
  const Json err = error_object(2, "invalid_config", "unknown config key: x");
  CHECK(err["error"]["code"] == 2);
}

TEST_CASE("exit code contract") {
  SUBCASE("unknown key") {
    const Outcome o = run_cli("verify-theorem --set bogus=1");
    CHECK(o.code == 2);
    const Json e = Json::parse(o.err);
    CHECK(e["error"]["code"] == 2);
    CHECK(e["error"]["message"].get<std::string>().find("bogus") != std::string::npos);
  }
  SUBCASE("unknown command") { CHECK(run_cli("frobnicate").code == 2); }
  SUBCASE("positional arguments beyond the command") { CHECK(run_cli("spectrum extra").code == 2); }
  SUBCASE("bad thread count") {
    const Outcome o = run_cli("spectrum --set n_side=16", "DOLHODGE_THREADS=0");
    CHECK(o.code == 2);
    CHECK(o.err.find("DOLHODGE_THREADS") != std::string::npos);
  }
  SUBCASE("degree zero is a rank jump") {
    const Outcome o = run_cli("verify-theorem --set degree=0 --set n_side=16");
    CHECK(o.code == 3);
    CHECK(Json::parse(o.err)["error"]["kind"] == "rank_jump");
  }
  SUBCASE("unwritable output") {
    const Outcome o = run_cli("wp-metric --set output_path='\"/nonexistent/dir/r.json\"'");
    CHECK(o.code == 4);
    CHECK(Json::parse(o.err)["error"]["kind"] == "io_failure");
  }
  SUBCASE("tolerance failure") {
    const Outcome o = run_cli("verify-theorem --set n_side=16 --set residual_tol=1e-12");
    CHECK(o.code == 1);
    CHECK(Json::parse(o.out)["pass"] == false);
    CHECK(Json::parse(o.err)["error"]["code"] == 1);
  }
}

TEST_CASE("wp-metric reports pi squared") {
  const Outcome o = run_cli("wp-metric --set n_side=16");
  REQUIRE(o.code == 0);
  const Json rep = Json::parse(o.out);
  CHECK(std::abs(rep["value"][0][0][0].get<double>() - kPi * kPi) <= 1e-10);
  CHECK(rep["max_deviation"].get<double>() <= 1e-12);
  CHECK(rep["wall_time_s"].is_null());
  CHECK(rep["library_version"] == library_version());
  CHECK(rep["config"]["n_side"] == 16);
}

TEST_CASE("verify-theorem report schema") {
  const Outcome o = run_cli("verify-theorem --set n_side=24 --set degree=-2");
  REQUIRE(o.code == 0);
  const Json rep = Json::parse(o.out);
  for (const char* key : {"config", "lhs", "T1", "T2", "T3", "T4", "residual_abs", "residual_rel", "pass",
                          "wall_time_s", "library_version"})
    CHECK(rep.contains(key));
  CHECK(rep["q"] == 1);
  CHECK(rep["rank"] == 2);
  // [k][l][rho][sigma][re, im]
  CHECK(rep["lhs"].size() == 1);
  CHECK(rep["lhs"][0][0].size() == 2);
  CHECK(rep["lhs"][0][0][1].size() == 2);
  CHECK(rep["lhs"][0][0][1][0].size() == 2);
  CHECK(rep["T3"][0][0][0][0][0] == 0.0);
  CHECK(rep["residual_rel"].get<double>() <= 5e-3);
}

TEST_CASE("convergence writes the CSV") {
  const Outcome o = run_cli(
      "convergence --set n_list=[12,16,20] --set eta_list=[0.04,0.02,0.01] --set csv_path='\"conv.csv\"'");
  CHECK((o.code == 0 || o.code == 1));
  const std::string csv = slurp(scratch_dir() / "conv.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "N,eta,residual_rel,order_fit");
  int count = 1;
  while (std::getline(lines, line)) {
    ++count;
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
  }
  CHECK(count == 3 * 3 + 1);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  for (const std::string cmd : {"verify-theorem --set n_side=16", "spectrum --set n_side=16 --set degree=-2",
                                "verify-lemmas --set n_side=16"}) {
    const Outcome a = run_cli(cmd, "DOLHODGE_THREADS=1");
    const Outcome b = run_cli(cmd, "DOLHODGE_THREADS=4");
    const Outcome c = run_cli(cmd, "DOLHODGE_THREADS=4");
    CHECK(a.code == b.code);
    CHECK(!a.out.empty());
    CHECK(a.out == b.out);
    CHECK(b.out == c.out);
  }
}
