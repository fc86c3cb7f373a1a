#include "wentzell/config.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "wentzell/errors.hpp"
#include "wentzell/io.hpp"

namespace wentzell {

namespace {

const char* kSections[] = {"domain",       "time",   "control_region", "coefficients",
                           "target",       "nonlinearity", "solver",  "bounds",
                           "run"};

struct RawConfig {
  // section -> key -> value; consumption tracked so leftovers are rejected
  std::map<std::string, std::map<std::string, std::string>> kv;
  std::set<std::pair<std::string, std::string>> consumed;

  bool has(const std::string& sec, const std::string& key) const {
    auto s = kv.find(sec);
    return s != kv.end() && s->second.count(key) > 0;
  }

  std::string take(const std::string& sec, const std::string& key) {
    consumed.insert({sec, key});
    return kv.at(sec).at(key);
  }

  void finish() const {
    for (const auto& [sec, keys] : kv) {
      bool known_section = false;
      for (const char* s : kSections) known_section |= (sec == s);
      if (!known_section) fail(Errc::config, "unknown config section [" + sec + "]");
      for (const auto& [key, value] : keys) {
        if (!consumed.count({sec, key})) {
          fail(Errc::config, "unknown config key '" + key + "' in section [" + sec + "]");
        }
      }
    }
  }
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::string section;
  size_t pos = 0;
  int lineno = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++lineno;
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(Errc::config, "unterminated section header at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail(Errc::config, "empty section name at line " + std::to_string(lineno));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::config, "expected key = value at line " + std::to_string(lineno));
    if (section.empty()) fail(Errc::config, "key outside any section at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(Errc::config, "empty key at line " + std::to_string(lineno));
    if (raw.kv[section].count(key)) {
      fail(Errc::config, "duplicate key '" + key + "' in section [" + section + "]");
    }
    raw.kv[section][key] = value;
  }
  return raw;
}

double to_double(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(Errc::config, where + ": not a number: '" + v + "'");
  }
}

long long to_int(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(Errc::config, where + ": not an integer: '" + v + "'");
  }
}

std::uint64_t to_uint64(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    fail(Errc::config, where + ": not an unsigned integer: '" + v + "'");
  }
}

std::vector<double> to_double_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < v.size()) {
    size_t comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    const std::string tok = trim(v.substr(pos, comma - pos));
    if (!tok.empty()) out.push_back(to_double(tok, where));
    pos = comma + 1;
  }
  return out;
}

double take_double(RawConfig& raw, const std::string& sec, const std::string& key, double dflt) {
  return raw.has(sec, key) ? to_double(raw.take(sec, key), sec + "." + key) : dflt;
}

long long take_int(RawConfig& raw, const std::string& sec, const std::string& key, long long dflt) {
  return raw.has(sec, key) ? to_int(raw.take(sec, key), sec + "." + key) : dflt;
}

std::string take_string(RawConfig& raw, const std::string& sec, const std::string& key,
                        const std::string& dflt) {
  return raw.has(sec, key) ? raw.take(sec, key) : dflt;
}

void reject_in_1d(const RawConfig& raw, const std::string& sec, const std::string& key) {
  if (raw.has(sec, key)) {
    fail(Errc::config, sec + "." + key + " requires dim = 2");
  }
}

void check_file_exists(const std::string& path, const std::string& where) {
  if (!std::filesystem::exists(path)) {
    fail(Errc::config, where + ": referenced file does not exist: " + path);
  }
}

ExperimentConfig::CoeffSpec take_coeff(RawConfig& raw, const std::string& key) {
  ExperimentConfig::CoeffSpec spec;
  const bool has_const = raw.has("coefficients", key);
  const bool has_csv = raw.has("coefficients", key + "_csv");
  if (has_const && has_csv) {
    fail(Errc::config, "coefficients." + key + " and " + key + "_csv are exclusive");
  }
  if (has_csv) {
    spec.csv = raw.take("coefficients", key + "_csv");
    check_file_exists(spec.csv, "coefficients." + key + "_csv");
  } else if (has_const) {
    spec.value = to_double(raw.take("coefficients", key), "coefficients." + key);
  }
  return spec;
}

ScalarField scalar_field_from_spec(const ExperimentConfig::CoeffSpec& spec, int n_nodes,
                                   const std::string& what) {
  if (spec.csv.empty()) return constant_scalar_field(n_nodes, spec.value);
  ScalarField f;
  for (const auto& row : read_numeric_rows(spec.csv)) {
    if (static_cast<int>(row.size()) != n_nodes) {
      fail(Errc::config, what + ": each row of " + spec.csv + " needs " + std::to_string(n_nodes) +
                             " values");
    }
    f.samples.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), n_nodes));
  }
  if (f.samples.empty()) fail(Errc::config, what + ": " + spec.csv + " holds no rows");
  return f;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  RawConfig raw = tokenize(text);
  ExperimentConfig cfg;

  cfg.dim = static_cast<int>(take_int(raw, "domain", "dim", 1));
  if (cfg.dim != 1 && cfg.dim != 2) fail(Errc::config, "domain.dim must be 1 or 2");
  cfg.extent[0] = take_double(raw, "domain", "extent_x", 1.0);
  cfg.cells[0] = static_cast<int>(take_int(raw, "domain", "cells_x", 64));
  if (cfg.dim == 2) {
    cfg.extent[1] = take_double(raw, "domain", "extent_y", 1.0);
    cfg.cells[1] = static_cast<int>(take_int(raw, "domain", "cells_y", 4));
  } else {
    reject_in_1d(raw, "domain", "extent_y");
    reject_in_1d(raw, "domain", "cells_y");
  }

  cfg.T_seconds = take_double(raw, "time", "T_seconds", 1.0);
  cfg.steps = static_cast<int>(take_int(raw, "time", "steps", 128));
  cfg.theta = take_double(raw, "time", "theta", 0.5);

  cfg.omega.lo[0] = take_double(raw, "control_region", "lo_x", 0.3);
  cfg.omega.hi[0] = take_double(raw, "control_region", "hi_x", 0.7);
  if (cfg.dim == 2) {
    cfg.omega.lo[1] = take_double(raw, "control_region", "lo_y", 0.3);
    cfg.omega.hi[1] = take_double(raw, "control_region", "hi_y", 0.7);
  } else {
    reject_in_1d(raw, "control_region", "lo_y");
    reject_in_1d(raw, "control_region", "hi_y");
  }

  cfg.diffusion_bulk = take_double(raw, "coefficients", "diffusion_bulk", 1.0);
  cfg.diffusion_boundary = take_double(raw, "coefficients", "diffusion_boundary", 1.0);
  cfg.a = take_coeff(raw, "a");
  cfg.b = take_coeff(raw, "b");
  cfg.B_gamma = take_coeff(raw, "B_gamma");
  cfg.B_const[0] = take_double(raw, "coefficients", "B_x", 0.0);
  if (cfg.dim == 2) {
    cfg.B_const[1] = take_double(raw, "coefficients", "B_y", 0.0);
  } else {
    reject_in_1d(raw, "coefficients", "B_y");
  }
  cfg.B_csv = take_string(raw, "coefficients", "B_csv", "");
  if (!cfg.B_csv.empty()) {
    if (cfg.B_const[0] != 0.0 || cfg.B_const[1] != 0.0) {
      fail(Errc::config, "coefficients.B_csv and constant drift keys are exclusive");
    }
    check_file_exists(cfg.B_csv, "coefficients.B_csv");
  }

  cfg.target.kind = take_string(raw, "target", "kind", "gaussian");
  const std::string& kind = cfg.target.kind;
  auto reject_target_key = [&](const char* key, const char* wanted) {
    if (raw.has("target", key)) {
      fail(Errc::config, std::string("target.") + key + " applies only to kind = " + wanted);
    }
  };
  if (kind == "zero") {
    reject_target_key("amplitude", "constant | gaussian | sine");
  } else if (kind == "constant" || kind == "gaussian" || kind == "sine") {
    cfg.target.amplitude = take_double(raw, "target", "amplitude", 1.0);
  } else if (kind == "csv") {
    reject_target_key("amplitude", "constant | gaussian | sine");
    cfg.target.path = take_string(raw, "target", "path", "");
    if (cfg.target.path.empty()) fail(Errc::config, "target.path is required for kind = csv");
    check_file_exists(cfg.target.path, "target.path");
  } else {
    fail(Errc::config, "target.kind must be zero | constant | gaussian | sine | csv");
  }
  if (kind == "gaussian") {
    cfg.target.center[0] = take_double(raw, "target", "center_x", 0.5);
    cfg.target.width = take_double(raw, "target", "width", 0.1);
    if (cfg.dim == 2) {
      cfg.target.center[1] = take_double(raw, "target", "center_y", 0.5);
    } else {
      reject_in_1d(raw, "target", "center_y");
    }
  } else {
    reject_target_key("center_x", "gaussian");
    reject_target_key("center_y", "gaussian");
    reject_target_key("width", "gaussian");
  }
  if (kind == "sine") {
    cfg.target.mode[0] = static_cast<int>(take_int(raw, "target", "mode_x", 1));
    if (cfg.dim == 2) {
      cfg.target.mode[1] = static_cast<int>(take_int(raw, "target", "mode_y", 1));
    } else {
      reject_in_1d(raw, "target", "mode_y");
    }
  } else {
    reject_target_key("mode_x", "sine");
    reject_target_key("mode_y", "sine");
  }
  if (kind != "csv") reject_target_key("path", "csv");

  cfg.nonlin.F_shape = take_string(raw, "nonlinearity", "F_shape", "none");
  cfg.nonlin.F_gain = take_double(raw, "nonlinearity", "F_gain", 0.0);
  cfg.nonlin.F_arg = take_string(raw, "nonlinearity", "F_arg", "state");
  cfg.nonlin.F_lipschitz = take_double(raw, "nonlinearity", "F_lipschitz", 0.0);
  cfg.nonlin.G_shape = take_string(raw, "nonlinearity", "G_shape", "none");
  cfg.nonlin.G_gain = take_double(raw, "nonlinearity", "G_gain", 0.0);
  cfg.nonlin.G_arg = take_string(raw, "nonlinearity", "G_arg", "trace");
  cfg.nonlin.G_lipschitz = take_double(raw, "nonlinearity", "G_lipschitz", 0.0);

  cfg.eps_rel = take_double(raw, "solver", "eps_rel", 0.1);
  if (raw.has("solver", "eps_rel_sweep")) {
    cfg.eps_rel_sweep = to_double_list(raw.take("solver", "eps_rel_sweep"), "solver.eps_rel_sweep");
  }
  cfg.tol_rel = take_double(raw, "solver", "tol_rel", 1e-6);
  cfg.max_iters = static_cast<int>(take_int(raw, "solver", "max_iters", 5000));
  cfg.power_iters = static_cast<int>(take_int(raw, "solver", "power_iters", 20));
  cfg.fp_tol = take_double(raw, "solver", "fp_tol", 1e-6);
  cfg.fp_max_iters = static_cast<int>(take_int(raw, "solver", "fp_max_iters", 50));

  cfg.kappa = take_string(raw, "bounds", "kappa", "calibrate");
  if (cfg.kappa != "calibrate") {
    const double v = to_double(cfg.kappa, "bounds.kappa");
    cfg.kappa = format_double(v);  // canonical numeric form
  }

  cfg.seed = raw.has("run", "seed") ? to_uint64(raw.take("run", "seed"), "run.seed") : 1;
  cfg.output_dir = take_string(raw, "run", "output_dir", "out");
  if (cfg.output_dir.empty()) fail(Errc::config, "run.output_dir must not be empty");

  raw.finish();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  auto kv = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };

  out += "[domain]\n";
  kv("dim", std::to_string(cfg.dim));
  kv("extent_x", format_double(cfg.extent[0]));
  kv("cells_x", std::to_string(cfg.cells[0]));
  if (cfg.dim == 2) {
    kv("extent_y", format_double(cfg.extent[1]));
    kv("cells_y", std::to_string(cfg.cells[1]));
  }

  out += "\n[time]\n";
  kv("T_seconds", format_double(cfg.T_seconds));
  kv("steps", std::to_string(cfg.steps));
  kv("theta", format_double(cfg.theta));

  out += "\n[control_region]\n";
  kv("lo_x", format_double(cfg.omega.lo[0]));
  kv("hi_x", format_double(cfg.omega.hi[0]));
  if (cfg.dim == 2) {
    kv("lo_y", format_double(cfg.omega.lo[1]));
    kv("hi_y", format_double(cfg.omega.hi[1]));
  }

  out += "\n[coefficients]\n";
  kv("diffusion_bulk", format_double(cfg.diffusion_bulk));
  kv("diffusion_boundary", format_double(cfg.diffusion_boundary));
  auto coeff = [&](const char* key, const ExperimentConfig::CoeffSpec& spec) {
    if (spec.csv.empty()) {
      kv(key, format_double(spec.value));
    } else {
      kv(std::string(key) + "_csv", spec.csv);
    }
  };
  coeff("a", cfg.a);
  coeff("b", cfg.b);
  if (cfg.B_csv.empty()) {
    kv("B_x", format_double(cfg.B_const[0]));
    if (cfg.dim == 2) kv("B_y", format_double(cfg.B_const[1]));
  } else {
    kv("B_csv", cfg.B_csv);
  }
  coeff("B_gamma", cfg.B_gamma);

  out += "\n[target]\n";
  kv("kind", cfg.target.kind);
  if (cfg.target.kind == "constant" || cfg.target.kind == "gaussian" || cfg.target.kind == "sine") {
    kv("amplitude", format_double(cfg.target.amplitude));
  }
  if (cfg.target.kind == "gaussian") {
    kv("center_x", format_double(cfg.target.center[0]));
    if (cfg.dim == 2) kv("center_y", format_double(cfg.target.center[1]));
    kv("width", format_double(cfg.target.width));
  }
  if (cfg.target.kind == "sine") {
    kv("mode_x", std::to_string(cfg.target.mode[0]));
    if (cfg.dim == 2) kv("mode_y", std::to_string(cfg.target.mode[1]));
  }
  if (cfg.target.kind == "csv") kv("path", cfg.target.path);

  out += "\n[nonlinearity]\n";
  kv("F_shape", cfg.nonlin.F_shape);
  kv("F_gain", format_double(cfg.nonlin.F_gain));
  kv("F_arg", cfg.nonlin.F_arg);
  kv("F_lipschitz", format_double(cfg.nonlin.F_lipschitz));
  kv("G_shape", cfg.nonlin.G_shape);
  kv("G_gain", format_double(cfg.nonlin.G_gain));
  kv("G_arg", cfg.nonlin.G_arg);
  kv("G_lipschitz", format_double(cfg.nonlin.G_lipschitz));

  out += "\n[solver]\n";
  kv("eps_rel", format_double(cfg.eps_rel));
  if (!cfg.eps_rel_sweep.empty()) {
    std::string list;
    for (size_t i = 0; i < cfg.eps_rel_sweep.size(); ++i) {
      if (i) list += ",";
      list += format_double(cfg.eps_rel_sweep[i]);
    }
    kv("eps_rel_sweep", list);
  }
  kv("tol_rel", format_double(cfg.tol_rel));
  kv("max_iters", std::to_string(cfg.max_iters));
  kv("power_iters", std::to_string(cfg.power_iters));
  kv("fp_tol", format_double(cfg.fp_tol));
  kv("fp_max_iters", std::to_string(cfg.fp_max_iters));

  out += "\n[bounds]\n";
  kv("kappa", cfg.kappa);

  out += "\n[run]\n";
  kv("seed", std::to_string(cfg.seed));
  kv("output_dir", cfg.output_dir);

  return out;
}

bool kappa_is_calibrate(const ExperimentConfig& cfg) { return cfg.kappa == "calibrate"; }

double kappa_value(const ExperimentConfig& cfg) {
  if (kappa_is_calibrate(cfg)) {
    fail(Errc::config, "bounds.kappa = calibrate requires a sweep; give a numeric kappa");
  }
  return to_double(cfg.kappa, "bounds.kappa");
}

Grid build_grid(const ExperimentConfig& cfg) {
  std::vector<double> extents(cfg.extent.begin(), cfg.extent.begin() + cfg.dim);
  std::vector<int> counts(cfg.cells.begin(), cfg.cells.begin() + cfg.dim);
  return make_grid(extents, counts);
}

TimeSchedule build_schedule(const ExperimentConfig& cfg) {
  return make_schedule(cfg.T_seconds, cfg.steps, cfg.theta);
}

CoefficientSet build_coefficients(const ExperimentConfig& cfg, const Grid& g,
                                  const TimeSchedule& sched) {
  CoefficientSet c;
  c.A = Eigen::VectorXd::Constant(g.n_bulk(), cfg.diffusion_bulk);
  c.A_gamma = Eigen::VectorXd::Constant(g.n_bdry(), cfg.diffusion_boundary);
  c.a = scalar_field_from_spec(cfg.a, g.n_bulk(), "coefficients.a");
  c.b = scalar_field_from_spec(cfg.b, g.n_bdry(), "coefficients.b");
  c.B_gamma = scalar_field_from_spec(cfg.B_gamma, g.n_bdry(), "coefficients.B_gamma");

  if (cfg.B_csv.empty()) {
    Eigen::VectorXd v(g.dim);
    for (int ax = 0; ax < g.dim; ++ax) v[ax] = cfg.B_const[ax];
    c.B = constant_vector_field(g.n_bulk(), g.dim, v);
  } else {
    // each row holds n_bulk*dim values, x components first, then y
    const int nb = g.n_bulk();
    for (const auto& row : read_numeric_rows(cfg.B_csv)) {
      if (static_cast<int>(row.size()) != nb * g.dim) {
        fail(Errc::config, "coefficients.B_csv: each row needs " + std::to_string(nb * g.dim) +
                               " values (x block, then y block)");
      }
      Eigen::MatrixXd m(nb, g.dim);
      for (int ax = 0; ax < g.dim; ++ax) {
        m.col(ax) = Eigen::Map<const Eigen::VectorXd>(row.data() + ax * nb, nb);
      }
      c.B.samples.push_back(std::move(m));
    }
    if (c.B.samples.empty()) fail(Errc::config, "coefficients.B_csv holds no rows");
  }

  validate_coefficients(g, sched, c);
  return c;
}

StatePair build_target(const ExperimentConfig& cfg, const Grid& g) {
  const auto& t = cfg.target;
  if (t.kind == "csv") return read_state_csv(t.path, g);

  auto value_at = [&](const double* x) -> double {
    if (t.kind == "zero") return 0.0;
    if (t.kind == "constant") return t.amplitude;
    if (t.kind == "gaussian") {
      if (!(t.width > 0.0)) fail(Errc::config, "target.width must be positive");
      double r2 = 0.0;
      for (int ax = 0; ax < g.dim; ++ax) {
        const double d = x[ax] - t.center[ax];
        r2 += d * d;
      }
      return t.amplitude * std::exp(-r2 / (2.0 * t.width * t.width));
    }
    // sine
    const double pi = 3.14159265358979323846;
    double v = t.amplitude;
    for (int ax = 0; ax < g.dim; ++ax) {
      v *= std::sin(pi * t.mode[ax] * x[ax] / g.extent[ax]);
    }
    return v;
  };

  StatePair u = zero_state(g);
  double x[2] = {0, 0};
  for (int c = 0; c < g.n_bulk(); ++c) {
    for (int ax = 0; ax < g.dim; ++ax) x[ax] = g.bulk_coord(c, ax);
    u.bulk[c] = value_at(x);
  }
  for (int i = 0; i < g.n_bdry(); ++i) {
    for (int ax = 0; ax < g.dim; ++ax) x[ax] = g.bdry_coord(i, ax);
    u.bdry[i] = value_at(x);
  }
  return u;
}

Box build_control_box(const ExperimentConfig& cfg) { return cfg.omega; }

Nonlinearity build_nonlinearity(const ExperimentConfig& cfg) {
  auto shape_of = [](const std::string& s, const char* which) -> NonlinShape {
    if (s == "none") return NonlinShape::none;
    if (s == "linear") return NonlinShape::linear;
    if (s == "sine") return NonlinShape::sine;
    if (s == "tanh") return NonlinShape::tanh;
    if (s == "ramp") return NonlinShape::ramp;
    fail(Errc::config, std::string(which) + " must be none | linear | sine | tanh | ramp");
  };
  auto bulk_arg = [&](const std::string& s) -> int {
    if (s == "state") return 0;
    if (s == "grad_x") return 1;
    if (s == "grad_y") {
      if (cfg.dim != 2) fail(Errc::config, "nonlinearity.F_arg = grad_y requires dim = 2");
      return 2;
    }
    fail(Errc::config, "nonlinearity.F_arg must be state | grad_x | grad_y");
  };
  auto bdry_arg = [](const std::string& s) -> int {
    if (s == "trace") return 0;
    if (s == "tangential") return 1;
    fail(Errc::config, "nonlinearity.G_arg must be trace | tangential");
  };

  NonlinearTerm F{shape_of(cfg.nonlin.F_shape, "nonlinearity.F_shape"), cfg.nonlin.F_gain,
                  bulk_arg(cfg.nonlin.F_arg)};
  NonlinearTerm G{shape_of(cfg.nonlin.G_shape, "nonlinearity.G_shape"), cfg.nonlin.G_gain,
                  bdry_arg(cfg.nonlin.G_arg)};
  return make_nonlinearity(F, G, cfg.nonlin.F_lipschitz, cfg.nonlin.G_lipschitz, cfg.dim);
}

MinimizeOptions build_minimize_options(const ExperimentConfig& cfg) {
  MinimizeOptions opts;
  opts.tol_rel = cfg.tol_rel;
  opts.max_iters = cfg.max_iters;
  opts.power_iters = cfg.power_iters;
  opts.seed = cfg.seed;
  return opts;
}

std::vector<double> sweep_eps_rel(const ExperimentConfig& cfg) {
  if (!cfg.eps_rel_sweep.empty()) return cfg.eps_rel_sweep;
  return {0.5, 0.2, 0.1, 0.05, 0.02};
}

}  // namespace wentzell
