// Copyright (c) 2026 The dolhodge Authors
// SPDX-License-Identifier: Apache-2.0

#include "dolhodge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dolhodge/parallel.hpp"

namespace dolhodge {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::pair<Command, std::string>>& command_table() {
  static const std::vector<std::pair<Command, std::string>> table{
      {Command::verify_theorem, "verify-theorem"}, {Command::verify_lemmas, "verify-lemmas"},
      {Command::wp_metric, "wp-metric"},           {Command::rescale_demo, "rescale-demo"},
      {Command::convergence, "convergence"},       {Command::spectrum, "spectrum"}};
  return table;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& what) {
  throw ConfigError("invalid value for " + key + ": " + what);
}

double as_real(const std::string& key, const Json& v) {
  if (!v.is_number()) bad_value(key, "expected a number");
  return v.get<double>();
}

int as_int(const std::string& key, const Json& v) {
  if (!v.is_number_integer()) bad_value(key, "expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < -1000000 || x > 1000000) bad_value(key, "out of range");
  return int(x);
}

Complex as_complex(const std::string& key, const Json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  bad_value(key, "expected [re, im]");
}

std::vector<Complex> as_complex_list(const std::string& key, const Json& v) {
  if (!v.is_array()) bad_value(key, "expected a list of [re, im]");
  std::vector<Complex> out;
  for (const auto& e : v) out.push_back(as_complex(key, e));
  return out;
}

// Flat row-major list of m^2 entries, or a list of m rows.
Eigen::MatrixXcd as_matrix(const std::string& key, const Json& v) {
  if (!v.is_array() || v.empty()) bad_value(key, "expected a row-major matrix");
  std::vector<Complex> flat;
  const bool rows = v[0].is_array() && !v[0].empty() && v[0][0].is_array();
  if (rows) {
    for (const auto& row : v) {
      if (row.size() != v.size()) bad_value(key, "matrix rows must have equal length");
      for (const auto& e : as_complex_list(key, row)) flat.push_back(e);
    }
  } else {
    flat = as_complex_list(key, v);
  }
  const auto m = Eigen::Index(std::llround(std::sqrt(double(flat.size()))));
  if (m * m != Eigen::Index(flat.size())) bad_value(key, "expected a square matrix");
  Eigen::MatrixXcd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = flat[std::size_t(i * m + j)];
  return a;
}

std::uint64_t as_seed(const std::string& key, const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) bad_value(key, "must be non-negative");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    try {
      std::size_t used = 0;
      const auto x = std::stoull(s, &used, 0);
      if (used == s.size() && !s.empty() && s[0] != '-') return x;
    } catch (const std::exception&) {
    }
  }
  bad_value(key, "expected a non-negative integer");
}

Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

Json matrix_json(const Eigen::MatrixXcd& a) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(complex_json(a(i, j)));
    out.push_back(row);
  }
  return out;
}

Json vector_json(const Eigen::VectorXcd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

// [k][l][rho][sigma] -> [re, im]
Json tensor_json(const CurvatureTensor& r) {
  Json out = Json::array();
  for (int k = 0; k < r.base_dim; ++k) {
    Json row = Json::array();
    for (int l = 0; l < r.base_dim; ++l) row.push_back(matrix_json(r(k, l)));
    out.push_back(row);
  }
  return out;
}

Json curvature_json(const CurvatureReport& r) {
  Json j;
  j["q"] = r.q;
  j["s0"] = vector_json(r.s0);
  j["eta"] = r.eta;
  j["rank"] = r.rank;
  j["lhs"] = tensor_json(r.lhs);
  j["T1"] = tensor_json(r.terms.t1);
  j["T2"] = tensor_json(r.terms.t2);
  j["T3"] = tensor_json(r.terms.t3);
  j["T4"] = tensor_json(r.terms.t4);
  j["per_term_norms"] = {{"T1", r.terms.t1.norm()},
                         {"T2", r.terms.t2.norm()},
                         {"T3", r.terms.t3.norm()},
                         {"T4", r.terms.t4.norm()}};
  j["continuum"] = tensor_json(r.continuum);
  j["residual_abs"] = r.residual_abs;
  j["residual_rel"] = r.residual_rel;
  j["lhs_continuum_error"] = r.lhs_continuum_error;
  j["rhs_continuum_error"] = r.rhs_continuum_error;
  j["hermitian_defect"] = r.hermitian_defect;
  j["phi"] = matrix_json(r.phi);
  j["holomorphy_residual"] = r.holomorphy_residual;
  j["normalization_defect"] = r.normalization_defect;
  j["node_condition"] = r.node_condition;
  j["pass"] = r.pass;
  return j;
}

Json spectrum_json(const SideSpectrum& s) {
  Json j;
  j["q"] = s.q;
  j["eigenvalues"] = std::vector<double>(s.eigenvalues.data(), s.eigenvalues.data() + s.eigenvalues.size());
  j["null_count"] = s.null_count;
  j["spurious_count"] = s.spurious_count;
  j["harmonic_count"] = s.harmonic_count;
  j["gap"] = s.gap;
  j["dense"] = s.dense;
  j["iterations"] = s.iterations;
  return j;
}

BasePoint base_point(const RunConfig& cfg, int m) {
  BasePoint s = BasePoint::Zero(m);
  for (std::size_t k = 0; k < cfg.s0.size(); ++k) s(Eigen::Index(k)) = cfg.s0[k];
  return s;
}

EngineOptions engine_options(const RunConfig& cfg) {
  EngineOptions opts;
  opts.frame.seed = cfg.seed;
  opts.frame.hodge.seed = cfg.seed;
  opts.residual_tol = cfg.residual_tol;
  return opts;
}

std::string csv_number(double x) { return Json(x).dump(); }

std::string convergence_csv(const ConvergenceTable& table) {
  std::string out = "N,eta,residual_rel,order_fit\n";
  for (const auto& row : table.rows)
    out += std::to_string(row.n_side) + "," + csv_number(row.eta) + "," + csv_number(row.residual_rel) + "," +
           csv_number(row.order_fit) + "\n";
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

void check_threads_env() {
  const char* env = std::getenv("DOLHODGE_THREADS");
  if (!env) return;
  const std::string s(env);
  std::size_t used = 0;
  long n = 0;
  try {
    n = std::stol(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty() || n <= 0)
    throw ConfigError("DOLHODGE_THREADS must be a positive integer, got '" + s + "'");
}

}  // namespace

Command parse_command(const std::string& name) {
  for (const auto& [c, n] : command_table())
    if (n == name) return c;
  throw ConfigError("invalid value for command: unknown command '" + name + "'");
}

std::string command_name(Command c) {
  for (const auto& [cc, n] : command_table())
    if (cc == c) return n;
  return "unknown";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "command",    "tau_re",    "tau_im",       "degree", "twist",    "rescale",     "rescale_quartic",
      "n_side",     "stencil_order", "q",        "s0",     "eta",      "output_path", "csv_path",
      "seed",       "residual_tol",  "serre_tol", "n_list", "eta_list", "wp_step",     "wp_side",
      "timing"};
  return keys;
}

RunConfig load_config(const Json& raw) {
  if (!raw.is_object()) throw ConfigError("config must be a JSON object");
  const auto& keys = config_keys();
  for (const auto& item : raw.items())
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      throw ConfigError("unknown config key: " + item.key());

  RunConfig cfg;
  auto has = [&](const char* key) { return raw.contains(key); };
  if (has("command")) {
    if (!raw["command"].is_string()) bad_value("command", "expected a string");
    cfg.command = parse_command(raw["command"].get<std::string>());
  }
  if (has("tau_re")) cfg.tau.real(as_real("tau_re", raw["tau_re"]));
  if (has("tau_im")) cfg.tau.imag(as_real("tau_im", raw["tau_im"]));
  if (!(cfg.tau.imag() > 0.0)) bad_value("tau_im", "must be positive");
  if (has("degree")) cfg.degree = as_int("degree", raw["degree"]);
  if (has("twist")) {
    cfg.twist = as_complex_list("twist", raw["twist"]);
    if (cfg.twist.empty() || cfg.twist.size() > 2) bad_value("twist", "expected 1 or 2 entries");
  } else {
    cfg.twist = {Complex(kPi / cfg.tau.imag(), 0.0)};
  }
  const auto m = Eigen::Index(cfg.twist.size());
  if (has("rescale")) {
    cfg.rescale = as_matrix("rescale", raw["rescale"]);
    if (cfg.rescale.rows() != m) bad_value("rescale", "size must match twist");
    if ((cfg.rescale - cfg.rescale.adjoint()).norm() > 1e-14 * (1.0 + cfg.rescale.norm()))
      bad_value("rescale", "must be Hermitian");
  } else {
    cfg.rescale = 0.3 * Eigen::MatrixXcd::Identity(m, m);
  }
  if (has("rescale_quartic")) cfg.rescale_quartic = as_real("rescale_quartic", raw["rescale_quartic"]);
  if (has("n_side")) cfg.n_side = as_int("n_side", raw["n_side"]);
  if (cfg.n_side < 8 || cfg.n_side % 2 != 0) bad_value("n_side", "must be even and at least 8");
  if (has("stencil_order")) cfg.stencil_order = as_int("stencil_order", raw["stencil_order"]);
  if (cfg.stencil_order != 2 && cfg.stencil_order != 4) bad_value("stencil_order", "must be 2 or 4");
  if (has("q")) {
    cfg.q = as_int("q", raw["q"]);
    if (cfg.q < -1 || cfg.q > 1) bad_value("q", "must be 0 or 1");
  }
  if (has("s0")) {
    cfg.s0 = as_complex_list("s0", raw["s0"]);
    if (Eigen::Index(cfg.s0.size()) != m) bad_value("s0", "length must match twist");
  } else {
    cfg.s0.assign(std::size_t(m), Complex(0.0, 0.0));
  }
  if (has("eta")) cfg.eta = as_real("eta", raw["eta"]);
  if (!(cfg.eta > 0.0 && cfg.eta <= 0.5)) bad_value("eta", "must lie in (0, 0.5]");
  if (has("output_path")) {
    if (!raw["output_path"].is_string()) bad_value("output_path", "expected a string");
    cfg.output_path = raw["output_path"].get<std::string>();
  }
  if (has("csv_path")) {
    if (!raw["csv_path"].is_string()) bad_value("csv_path", "expected a string");
    cfg.csv_path = raw["csv_path"].get<std::string>();
  }
  if (has("seed")) cfg.seed = as_seed("seed", raw["seed"]);
  if (has("residual_tol")) cfg.residual_tol = as_real("residual_tol", raw["residual_tol"]);
  if (!(cfg.residual_tol > 0.0)) bad_value("residual_tol", "must be positive");
  if (has("serre_tol")) cfg.serre_tol = as_real("serre_tol", raw["serre_tol"]);
  if (!(cfg.serre_tol > 0.0)) bad_value("serre_tol", "must be positive");
  if (has("n_list")) {
    const Json& v = raw["n_list"];
    if (!v.is_array()) bad_value("n_list", "expected a list of integers");
    cfg.n_list.clear();
    for (const auto& e : v) {
      const int n = as_int("n_list", e);
      if (n < 8 || n % 2 != 0) bad_value("n_list", "entries must be even and at least 8");
      cfg.n_list.push_back(n);
    }
  }
  if (cfg.n_list.size() < 3) bad_value("n_list", "needs at least 3 entries");
  if (has("eta_list")) {
    const Json& v = raw["eta_list"];
    if (!v.is_array()) bad_value("eta_list", "expected a list of numbers");
    cfg.eta_list.clear();
    for (const auto& e : v) {
      const double x = as_real("eta_list", e);
      if (!(x > 0.0 && x <= 0.5)) bad_value("eta_list", "entries must lie in (0, 0.5]");
      cfg.eta_list.push_back(x);
    }
  }
  if (cfg.eta_list.size() < 3) bad_value("eta_list", "needs at least 3 entries");
  if (has("wp_step")) cfg.wp_step = as_real("wp_step", raw["wp_step"]);
  if (!(cfg.wp_step > 0.0)) bad_value("wp_step", "must be positive");
  if (has("wp_side")) cfg.wp_side = as_int("wp_side", raw["wp_side"]);
  if (cfg.wp_side < 1 || cfg.wp_side > 51) bad_value("wp_side", "must lie in [1, 51]");
  if (has("timing")) {
    if (!raw["timing"].is_boolean()) bad_value("timing", "expected true or false");
    cfg.timing = raw["timing"].get<bool>();
  }
  family_of(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& sets, const std::string& command) {
  Json raw = Json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("invalid value for config: cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    raw = Json::parse(buf.str(), nullptr, false);
    if (raw.is_discarded()) throw ConfigError("invalid value for config: " + path + " is not valid JSON");
    if (!raw.is_object()) throw ConfigError("invalid value for config: " + path + " is not a JSON object");
  }
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("invalid --set '" + s + "': expected key=value");
    const std::string key = s.substr(0, eq);
    const std::string text = s.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    raw[key] = value;
  }
  if (!command.empty()) raw["command"] = command;
  return load_config(raw);
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["command"] = command_name(cfg.command);
  j["tau_re"] = cfg.tau.real();
  j["tau_im"] = cfg.tau.imag();
  j["degree"] = cfg.degree;
  Json twist = Json::array();
  for (const auto& c : cfg.twist) twist.push_back(complex_json(c));
  j["twist"] = twist;
  Json rescale = Json::array();
  for (Eigen::Index i = 0; i < cfg.rescale.rows(); ++i)
    for (Eigen::Index k = 0; k < cfg.rescale.cols(); ++k) rescale.push_back(complex_json(cfg.rescale(i, k)));
  j["rescale"] = rescale;
  j["rescale_quartic"] = cfg.rescale_quartic;
  j["n_side"] = cfg.n_side;
  j["stencil_order"] = cfg.stencil_order;
  j["q"] = resolved_q(cfg);
  Json s0 = Json::array();
  for (const auto& c : cfg.s0) s0.push_back(complex_json(c));
  j["s0"] = s0;
  j["eta"] = cfg.eta;
  j["output_path"] = cfg.output_path;
  j["csv_path"] = cfg.csv_path;
  j["seed"] = cfg.seed;
  j["residual_tol"] = cfg.residual_tol;
  j["serre_tol"] = cfg.serre_tol;
  j["n_list"] = cfg.n_list;
  j["eta_list"] = cfg.eta_list;
  j["wp_step"] = cfg.wp_step;
  j["wp_side"] = cfg.wp_side;
  j["timing"] = cfg.timing;
  return j;
}

FamilySpec family_of(const RunConfig& cfg) {
  const TorusGrid grid = build_grid(cfg.tau, cfg.n_side, cfg.stencil_order);
  Eigen::VectorXcd twist(Eigen::Index(cfg.twist.size()));
  for (std::size_t k = 0; k < cfg.twist.size(); ++k) twist(Eigen::Index(k)) = cfg.twist[k];
  return make_family(grid, cfg.degree, twist, cfg.rescale, cfg.rescale_quartic);
}

int resolved_q(const RunConfig& cfg) {
  if (cfg.q >= 0) return cfg.q;
  return cfg.degree < 0 ? 1 : 0;
}

RunResult run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const FamilySpec spec = family_of(cfg);
  const BasePoint s0 = base_point(cfg, spec.base_dim());
  const int q = resolved_q(cfg);
  const EngineOptions opts = engine_options(cfg);

  RunResult result;
  Json& rep = result.report;
  bool pass = false;
  switch (cfg.command) {
    case Command::verify_theorem: {
      const CurvatureReport r = verify_theorem(spec, s0, q, cfg.eta, opts);
      rep = curvature_json(r);
      rep["residual_tol"] = cfg.residual_tol;
      pass = r.pass;
      break;
    }
    case Command::verify_lemmas: {
      const LemmaReport r = lemma_suite(spec, s0, cfg.eta, q, opts);
      rep["q"] = r.q;
      rep["eta"] = r.eta;
      rep["tol_fd"] = r.tol_fd;
      rep["tol_holo"] = r.tol_holo;
      Json items = Json::object();
      for (const auto& it : r.items)
        items[it.name] = {{"value", it.value},
                          {"tolerance", it.tolerance},
                          {"structural", it.structural},
                          {"s_dominated", it.s_dominated},
                          {"pass", it.pass}};
      rep["items"] = items;
      pass = r.pass;
      break;
    }
    case Command::wp_metric: {
      const WpReport r = wp_report(spec, s0, cfg.wp_step, cfg.wp_side);
      rep["value"] = matrix_json(r.values.front());
      rep["points"] = int(r.points.size());
      rep["max_deviation"] = r.max_deviation;
      rep["min_eigenvalue"] = r.min_eigenvalue;
      rep["constant"] = r.constant;
      pass = r.constant;
      break;
    }
    case Command::rescale_demo: {
      const RescaleReport r = rescale_demo(spec, s0, q, cfg.eta, opts);
      rep["original"] = curvature_json(r.original);
      rep["rescaled"] = curvature_json(r.rescaled);
      rep["phi_after"] = r.phi_after;
      rep["t4_after"] = r.t4_after;
      rep["shift_error"] = r.shift_error;
      rep["shift_tolerance"] = 10.0 * cfg.eta * cfg.eta;
      pass = r.pass;
      break;
    }
    case Command::convergence: {
      const ConvergenceTable t = convergence_study(spec, s0, q, cfg.n_list, cfg.eta_list, opts);
      rep["q"] = t.q;
      rep["stencil_order"] = t.stencil_order;
      rep["spatial_order"] = t.spatial_order;
      rep["eta_order"] = t.eta_order;
      Json rows = Json::array();
      for (const auto& row : t.rows)
        rows.push_back({{"N", row.n_side},
                        {"eta", row.eta},
                        {"residual_rel", row.residual_rel},
                        {"lhs_continuum_error", row.lhs_continuum_error},
                        {"rhs_continuum_error", row.rhs_continuum_error},
                        {"order_fit", row.order_fit}});
      rep["rows"] = rows;
      result.csv = convergence_csv(t);
      write_file(cfg.csv_path, result.csv);
      pass = t.pass;
      break;
    }
    case Command::spectrum: {
      const FiberComplex fc(spec, s0, opts.frame.hodge);
      const SideSpectrum& s_0 = fc.spectrum(0);
      const SideSpectrum& s_1 = fc.spectrum(1);
      rep["q0"] = spectrum_json(s_0);
      rep["q1"] = spectrum_json(s_1);
      rep["h0"] = s_0.harmonic_count;
      rep["h1"] = s_1.harmonic_count;
      rep["index"] = s_0.harmonic_count - s_1.harmonic_count;
      pass = s_0.harmonic_count - s_1.harmonic_count == cfg.degree;
      break;
    }
  }
  rep["command"] = command_name(cfg.command);
  rep["config"] = config_to_json(cfg);
  rep["library_version"] = library_version();
  rep["pass"] = pass;
  if (cfg.timing)
    rep["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  else
    rep["wall_time_s"] = nullptr;
  result.exit_code = pass ? 0 : 1;
  return result;
}

std::string format_report(const Json& report) {
  return report.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

void emit_report(const Json& report, const std::string& path) {
  const std::string text = format_report(report);
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("write to stdout failed");
  } else {
    write_file(path, text);
  }
}

Json error_object(int code, const std::string& kind, const std::string& message) {
  return Json{{"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
}

int cli_main(int argc, char** argv) {
  CLI::App app{"dolhodge: curvature of direct images of line bundles over flat elliptic curves"};
  std::string command;
  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("command", command,
                 "verify-theorem | verify-lemmas | wp-metric | rescale-demo | convergence | spectrum")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--set", sets, "key=value override, value parsed as JSON")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  auto fail = [](int code, const std::string& kind, const std::string& message) {
    std::cerr << error_object(code, kind, message).dump() << "\n";
    return code;
  };

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(2, "invalid_config", e.what());
  }

  try {
    check_threads_env();
    const RunConfig cfg = load_config(config_path, sets, command);
    const RunResult result = run(cfg);
    emit_report(result.report, cfg.output_path);
    if (result.exit_code == 1) return fail(1, "tolerance_failure", command_name(cfg.command) + " did not pass");
    return result.exit_code;
  } catch (const ConfigError& e) {
    return fail(2, "invalid_config", e.what());
  } catch (const RankJumpError& e) {
    return fail(3, "rank_jump", e.what());
  } catch (const SolverError& e) {
    return fail(4, "solver_failure", e.what());
  } catch (const IoError& e) {
    return fail(4, "io_failure", e.what());
  } catch (const std::exception& e) {
    return fail(4, "solver_failure", e.what());
  }
}

}  // namespace dolhodge
