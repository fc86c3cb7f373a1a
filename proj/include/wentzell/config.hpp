#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wentzell/coefficients.hpp"
#include "wentzell/operators.hpp"
#include "wentzell/semilinear.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// Experiment description parsed from a sectioned key = value file.  Parsing
/// is strict: unknown sections or keys, duplicate keys, keys that do not
/// apply to the declared dimension or target kind, and missing referenced
/// files are all rejected.  serialize_config emits a canonical form, so
/// parse -> serialize -> parse is idempotent and the config hash is stable.
struct ExperimentConfig {
  // [domain]
  int dim = 1;
  std::array<double, 2> extent{1.0, 1.0};
  std::array<int, 2> cells{64, 4};

  // [time]
  double T_seconds = 1.0;
  int steps = 128;
  double theta = 0.5;

  // [control_region]
  Box omega{{0.3, 0.3}, {0.7, 0.7}};

  // [coefficients]; a value applies when the matching csv path is empty
  struct CoeffSpec {
    double value = 0.0;
    std::string csv;
  };
  double diffusion_bulk = 1.0;
  double diffusion_boundary = 1.0;
  CoeffSpec a, b, B_gamma;
  std::array<double, 2> B_const{0.0, 0.0};
  std::string B_csv;

  // [target]
  struct TargetSpec {
    std::string kind = "gaussian";  // zero | constant | gaussian | sine | csv
    double amplitude = 1.0;
    std::array<double, 2> center{0.5, 0.5};
    double width = 0.1;
    std::array<int, 2> mode{1, 1};
    std::string path;
  };
  TargetSpec target;

  // [nonlinearity]
  struct NonlinSpec {
    std::string F_shape = "none";
    double F_gain = 0.0;
    std::string F_arg = "state";  // state | grad_x | grad_y
    double F_lipschitz = 0.0;
    std::string G_shape = "none";
    double G_gain = 0.0;
    std::string G_arg = "trace";  // trace | tangential
    double G_lipschitz = 0.0;
  };
  NonlinSpec nonlin;

  // [solver]
  double eps_rel = 0.1;  // radius as a fraction of the target mu-norm
  std::vector<double> eps_rel_sweep;
  double tol_rel = 1e-6;
  int max_iters = 5000;
  int power_iters = 20;
  double fp_tol = 1e-6;
  int fp_max_iters = 50;

  // [bounds]: "calibrate" or a number
  std::string kappa = "calibrate";

  // [run]
  std::uint64_t seed = 1;
  std::string output_dir = "out";
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

inline bool operator==(const ExperimentConfig& x, const ExperimentConfig& y) {
  return serialize_config(x) == serialize_config(y);
}

bool kappa_is_calibrate(const ExperimentConfig& cfg);
double kappa_value(const ExperimentConfig& cfg);  // config error when calibrating

/// Builders: each validates through the owning module's constructors.
Grid build_grid(const ExperimentConfig& cfg);
TimeSchedule build_schedule(const ExperimentConfig& cfg);
CoefficientSet build_coefficients(const ExperimentConfig& cfg, const Grid& g,
                                  const TimeSchedule& sched);
StatePair build_target(const ExperimentConfig& cfg, const Grid& g);
Box build_control_box(const ExperimentConfig& cfg);
Nonlinearity build_nonlinearity(const ExperimentConfig& cfg);
MinimizeOptions build_minimize_options(const ExperimentConfig& cfg);

/// Sweep radii as fractions of the target norm; falls back to the standard
/// five-point ladder when the config lists none.
std::vector<double> sweep_eps_rel(const ExperimentConfig& cfg);

}  // namespace wentzell
