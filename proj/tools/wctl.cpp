#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wentzell/adjoint.hpp"
#include "wentzell/bounds.hpp"
#include "wentzell/carleman.hpp"
#include "wentzell/config.hpp"
#include "wentzell/control.hpp"
#include "wentzell/errors.hpp"
#include "wentzell/forward.hpp"
#include "wentzell/io.hpp"
#include "wentzell/operators.hpp"
#include "wentzell/semilinear.hpp"

using namespace wentzell;

namespace {

struct Inputs {
  ExperimentConfig cfg;
  Grid grid;
  TimeSchedule sched;
  CoefficientSet coeffs;
  StatePair target;
  Box omega;
  double target_norm = 0;
};

// Everything that can reject the config happens here, before any artifact
// directory is created.
Inputs build_inputs(const std::string& path) {
  Inputs in;
  in.cfg = load_config(path);
  in.grid = build_grid(in.cfg);
  in.sched = build_schedule(in.cfg);
  in.coeffs = build_coefficients(in.cfg, in.grid, in.sched);
  in.target = build_target(in.cfg, in.grid);
  in.omega = build_control_box(in.cfg);
  in.target_norm = norm_mu(in.grid, in.target);
  return in;
}

double positive_radius(const Inputs& in) {
  const double eps = in.cfg.eps_rel * in.target_norm;
  if (!(eps > 0.0)) {
    fail(Errc::config, "eps_rel times the target norm must be positive; steering to the zero "
                       "target needs no control");
  }
  return eps;
}

class Timer {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

struct Emitter {
  std::string dir;
  nlohmann::json manifest;

  Emitter(const Inputs& in, const std::string& command) : dir(in.cfg.output_dir) {
    try {
      std::filesystem::create_directories(dir);
    } catch (const std::filesystem::filesystem_error& e) {
      fail(Errc::config, std::string("cannot create output directory: ") + e.what());
    }
    manifest["version"] = "0.1.0";
    manifest["command"] = command;
    manifest["config_hash"] = to_hex(fnv1a64(serialize_config(in.cfg)));
    manifest["seed"] = in.cfg.seed;
    manifest["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                        std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION);
    manifest["artifacts"] = nlohmann::json::array();
    write(in, "config.resolved", serialize_config(in.cfg));
  }

  std::string path(const std::string& name) const { return dir + "/" + name; }

  void write(const Inputs&, const std::string& name, const std::string& content) {
    write_text_file(path(name), content);
    manifest["artifacts"].push_back(name);
  }

  void note(const std::string& name) { manifest["artifacts"].push_back(name); }

  void finish(double total_ms) {
    manifest["wall_ms"]["total"] = total_ms;
    write_text_file(path("manifest.json"), manifest.dump(2) + "\n");
  }
};

BoundValue record_bound(const Inputs& in, double eps, double kappa, RunRecord& rec) {
  BoundInputs bi;
  bi.T = in.cfg.T_seconds;
  bi.eps = eps;
  bi.sups = coefficient_sup_norms(in.coeffs);
  bi.target = sobolev_norms(in.grid, in.target);
  bi.kappa = kappa;
  const BoundValue b = eval_cost_bound(bi);
  rec.bound = b.value;
  rec.bound_overflow = b.overflow;
  rec.kappa = kappa;
  return b;
}

int run_solve(const Inputs& in) {
  Timer timer;
  const DiscreteOperatorSet ops = assemble(in.grid, in.coeffs, in.sched);
  // the target spec doubles as the initial state for plain forward runs
  const StatePair terminal = uncontrolled_terminal(ops, in.target);

  Emitter out(in, "solve");
  write_state_csv(out.path("terminal.csv"), in.grid, terminal);
  out.note("terminal.csv");
  out.manifest["initial_mu_norm"] = in.target_norm;
  out.manifest["terminal_mu_norm"] = norm_mu(in.grid, terminal);
  out.finish(timer.ms());
  std::cout << "terminal mu-norm " << format_double(norm_mu(in.grid, terminal)) << "\n";
  return 0;
}

int run_control(const Inputs& in) {
  Timer timer;
  const double eps = positive_radius(in);
  const DiscreteOperatorSet ops = assemble(in.grid, in.coeffs, in.sched);
  const Eigen::VectorXd mask = control_mask(in.grid, in.omega);
  const StatePair y1 = reduce_target(ops, zero_state(in.grid), in.target);
  const ControlSolution sol = minimize_J(ops, mask, y1, eps, build_minimize_options(in.cfg));

  RunRecord rec;
  rec.eps = eps;
  rec.cost = sol.cost;
  rec.target_gap = sol.target_gap;
  rec.iterations = sol.iterations;
  if (!kappa_is_calibrate(in.cfg)) record_bound(in, eps, kappa_value(in.cfg), rec);
  rec.wall_ms = timer.ms();

  Emitter out(in, "control");
  write_control_csv(out.path("control.csv"), in.grid, sol.control);
  out.note("control.csv");
  write_state_csv(out.path("terminal.csv"), in.grid, sol.terminal);
  out.note("terminal.csv");
  write_records_csv(out.path("records.csv"), {rec});
  out.note("records.csv");
  write_records_jsonl(out.path("records.jsonl"), {rec});
  out.note("records.jsonl");
  out.finish(timer.ms());
  std::cout << "cost " << format_double(sol.cost) << " target_gap " << format_double(sol.target_gap)
            << " iterations " << sol.iterations << "\n";
  return 0;
}

int run_bound(const Inputs& in) {
  Timer timer;
  const double eps = positive_radius(in);
  const double kappa = kappa_value(in.cfg);

  BoundInputs bi;
  bi.T = in.cfg.T_seconds;
  bi.eps = eps;
  bi.sups = coefficient_sup_norms(in.coeffs);
  bi.target = sobolev_norms(in.grid, in.target);
  bi.kappa = kappa;

  const double N = eval_N(bi.T, bi.sups);
  const double M = eval_M(bi.sups, bi.target);
  const BoundValue bound = eval_cost_bound(bi);
  const BoundValue obs = eval_obs_constant(bi.T, bi.sups, kappa);
  const DeltaBreakdown delta = choose_delta(bi, kappa);
  const double L = eval_L(delta.S, std::min(delta.delta, bi.T));

  std::string body = "# bound v1\n# name,value\n";
  auto row = [&body](const char* name, double v) {
    body += std::string(name) + "," + format_double(v) + "\n";
  };
  row("N", N);
  row("M", M);
  row("eps", eps);
  row("kappa", kappa);
  row("bound", bound.value);
  body += std::string("bound_overflow,") + (bound.overflow ? "1" : "0") + "\n";
  row("obs_constant", obs.value);
  body += std::string("obs_overflow,") + (obs.overflow ? "1" : "0") + "\n";
  row("delta", delta.delta);
  row("cap_T", delta.cap_T);
  row("cap_h2", delta.cap_h2);
  row("K1", delta.K1);
  row("K2", delta.K2);
  row("S", delta.S);
  row("L_delta", L);

  Emitter out(in, "bound");
  out.write(in, "bound.csv", body);
  out.finish(timer.ms());
  std::cout << body;
  return 0;
}

int run_sweep(const Inputs& in, bool force_calibrate, const char* command) {
  Timer timer;
  const DiscreteOperatorSet ops = assemble(in.grid, in.coeffs, in.sched);
  const Eigen::VectorXd mask = control_mask(in.grid, in.omega);
  const StatePair y1 = reduce_target(ops, zero_state(in.grid), in.target);
  if (!(in.target_norm > 0.0)) fail(Errc::config, "sweep needs a nonzero target");

  std::vector<RunRecord> records;
  for (double frac : sweep_eps_rel(in.cfg)) {
    Timer cell;
    const double eps = frac * in.target_norm;
    if (!(eps > 0.0)) fail(Errc::config, "sweep radii must be positive");
    const ControlSolution sol = minimize_J(ops, mask, y1, eps, build_minimize_options(in.cfg));
    RunRecord rec;
    rec.eps = eps;
    rec.cost = sol.cost;
    rec.target_gap = sol.target_gap;
    rec.iterations = sol.iterations;
    rec.wall_ms = cell.ms();
    records.push_back(rec);
  }

  const CoefficientSupNorms sups = coefficient_sup_norms(in.coeffs);
  const SobolevNorms norms = sobolev_norms(in.grid, in.target);
  const double N = eval_N(in.cfg.T_seconds, sups);
  const double M = eval_M(sups, norms);
  double kappa;
  if (force_calibrate || kappa_is_calibrate(in.cfg)) {
    std::vector<SweepRecord> sw;
    for (const auto& r : records) sw.push_back({r.eps, r.cost});
    kappa = calibrate_kappa(sw, N, M, norms.l2);
  } else {
    kappa = kappa_value(in.cfg);
  }
  for (auto& rec : records) record_bound(in, rec.eps, kappa, rec);

  Emitter out(in, command);
  write_records_csv(out.path("records.csv"), records);
  out.note("records.csv");
  write_records_jsonl(out.path("records.jsonl"), records);
  out.note("records.jsonl");
  emit_plotdata(out.path("plotdata.csv"), records);
  out.note("plotdata.csv");
  if (force_calibrate || kappa_is_calibrate(in.cfg)) {
    std::string body = "# kappa v1\n# kappa,N,M,target_l2\n";
    body += format_double(kappa) + "," + format_double(N) + "," + format_double(M) + "," +
            format_double(norms.l2) + "\n";
    out.write(in, "kappa.csv", body);
  }
  out.manifest["kappa"] = kappa;
  out.finish(timer.ms());
  std::cout << "sweep of " << records.size() << " radii, kappa " << format_double(kappa) << "\n";
  return 0;
}

int run_carleman_check(const Inputs& in) {
  Timer timer;
  const Eigen::VectorXd mask = control_mask(in.grid, in.omega);

  // The ratio diagnostic assumes the potential-free adjoint so the residual
  // terms of the estimate vanish; the observability constant uses the full
  // coefficient set.
  CoefficientSet pure;
  pure.A = in.coeffs.A;
  pure.A_gamma = in.coeffs.A_gamma;
  pure.a = constant_scalar_field(in.grid.n_bulk(), 0.0);
  pure.b = constant_scalar_field(in.grid.n_bdry(), 0.0);
  pure.B = constant_vector_field(in.grid.n_bulk(), in.grid.dim, Eigen::VectorXd::Zero(in.grid.dim));
  pure.B_gamma = constant_scalar_field(in.grid.n_bdry(), 0.0);
  const DiscreteOperatorSet ops_pure = assemble(in.grid, pure, in.sched);

  const double T = in.cfg.T_seconds;
  std::mt19937_64 gen(in.cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::string carleman_body = "# carleman v1\n# sample,s,lambda,ratio\n";
  const double lambda = 2.0, m = 2.0;
  const double s_base[] = {4.0, 8.0, 16.0};
  for (int sample = 0; sample < 5; ++sample) {
    StatePair phiT = zero_state(in.grid);
    for (int c = 0; c < in.grid.n_bulk(); ++c) phiT.bulk[c] = normal(gen);
    for (int i = 0; i < in.grid.n_bdry(); ++i) phiT.bdry[i] = normal(gen);
    for (double sb : s_base) {
      const double s = sb * (T + T * T);
      const CarlemanWeights w = build_weights(in.grid, in.omega, m, lambda, s, T);
      const double ratio = carleman_ratio(ops_pure, w, mask, phiT);
      carleman_body += std::to_string(sample) + "," + format_double(s) + "," +
                       format_double(lambda) + "," + format_double(ratio) + "\n";
    }
  }

  std::string obs_body = "# obs v1\n# T,obs_constant\n";
  ObsConstantOptions obs_opts;
  obs_opts.seed = in.cfg.seed;
  // The step count scales with the horizon so dt stays fixed: growing dt at a
  // fixed step count leaves stiff modes unresolved and inflates the constant.
  for (double Tv : {0.5 * T, T, 2.0 * T}) {
    const int steps_v = std::max(2, static_cast<int>(in.cfg.steps * Tv / T + 0.5));
    const TimeSchedule sched_v = make_schedule(Tv, steps_v, in.cfg.theta);
    const DiscreteOperatorSet ops_v = assemble(in.grid, in.coeffs, sched_v);
    const double c = empirical_obs_constant(ops_v, mask, obs_opts);
    obs_body += format_double(Tv) + "," + format_double(c) + "\n";
  }

  Emitter out(in, "carleman-check");
  out.write(in, "carleman.csv", carleman_body);
  out.write(in, "obs.csv", obs_body);
  out.finish(timer.ms());
  std::cout << carleman_body << obs_body;
  return 0;
}

int run_semilinear(const Inputs& in) {
  Timer timer;
  const double eps = positive_radius(in);
  const Nonlinearity nl = build_nonlinearity(in.cfg);

  CoefficientSet base;
  base.A = in.coeffs.A;
  base.A_gamma = in.coeffs.A_gamma;
  base.a = constant_scalar_field(in.grid.n_bulk(), 0.0);
  base.b = constant_scalar_field(in.grid.n_bdry(), 0.0);
  base.B = constant_vector_field(in.grid.n_bulk(), in.grid.dim, Eigen::VectorXd::Zero(in.grid.dim));
  base.B_gamma = constant_scalar_field(in.grid.n_bdry(), 0.0);

  PicardOptions opts;
  opts.tol_fp = in.cfg.fp_tol;
  opts.max_iters = in.cfg.fp_max_iters;
  opts.minimize = build_minimize_options(in.cfg);

  auto history_csv = [](const std::vector<PicardRecord>& history) {
    std::string body = "# picard v1\n# iteration,fp_residual,cost,target_gap\n";
    for (const auto& h : history) {
      body += std::to_string(h.iteration) + "," + format_double(h.fp_residual) + "," +
              format_double(h.cost) + "," + format_double(h.target_gap) + "\n";
    }
    return body;
  };

  PicardResult res;
  try {
    res = picard_control(in.grid, base, in.sched, in.omega, zero_state(in.grid), in.target, eps, nl,
                         opts);
  } catch (const PicardNonConvergence& e) {
    // leave the residual history behind before reporting the failure
    Emitter out(in, "semilinear");
    out.write(in, "history.csv", history_csv(e.history()));
    out.finish(timer.ms());
    throw;
  }

  RunRecord rec;
  rec.eps = eps;
  rec.cost = res.solution.cost;
  rec.target_gap = res.nonlinear_gap;
  rec.iterations = res.iterations;
  if (!kappa_is_calibrate(in.cfg)) {
    const SobolevNorms norms = sobolev_norms(in.grid, in.target);
    const BoundValue b = eval_semilinear_bound(in.cfg.T_seconds, eps, nl.L_F, nl.L_G, norms,
                                               kappa_value(in.cfg));
    rec.bound = b.value;
    rec.bound_overflow = b.overflow;
    rec.kappa = kappa_value(in.cfg);
  }
  rec.wall_ms = timer.ms();

  Emitter out(in, "semilinear");
  out.write(in, "history.csv", history_csv(res.history));
  write_control_csv(out.path("control.csv"), in.grid, res.solution.control);
  out.note("control.csv");
  write_state_csv(out.path("terminal.csv"), in.grid, res.nonlinear_terminal);
  out.note("terminal.csv");
  write_records_csv(out.path("records.csv"), {rec});
  out.note("records.csv");
  write_records_jsonl(out.path("records.jsonl"), {rec});
  out.note("records.jsonl");
  out.finish(timer.ms());
  std::cout << "picard iterations " << res.iterations << " nonlinear gap "
            << format_double(res.nonlinear_gap) << " (eps " << format_double(eps) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimal-norm approximate controls for heat equations with dynamic boundary "
               "conditions"};
  app.require_subcommand(1);

  std::string config_path;
  const char* names[] = {"solve", "control", "bound", "sweep", "carleman-check", "semilinear",
                         "calibrate"};
  const char* blurbs[] = {
      "uncontrolled forward solve from the target spec as initial state",
      "single minimal-norm control solve",
      "evaluate the cost/observability bound formulas",
      "epsilon sweep with optional kappa calibration",
      "Carleman ratio and empirical observability diagnostics",
      "fixed-point control of the semilinear system",
      "epsilon sweep that always recalibrates kappa"};
  for (int i = 0; i < 7; ++i) {
    auto* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("config", config_path, "experiment config file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const Inputs in = build_inputs(config_path);
    if (app.got_subcommand("solve")) return run_solve(in);
    if (app.got_subcommand("control")) return run_control(in);
    if (app.got_subcommand("bound")) return run_bound(in);
    if (app.got_subcommand("sweep")) return run_sweep(in, false, "sweep");
    if (app.got_subcommand("carleman-check")) return run_carleman_check(in);
    if (app.got_subcommand("semilinear")) return run_semilinear(in);
    if (app.got_subcommand("calibrate")) return run_sweep(in, true, "calibrate");
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
