#pragma once

#include <string>
#include <vector>

#include "wentzell/control.hpp"
#include "wentzell/operators.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// Pointwise shapes available for the bulk and boundary nonlinearities.  Each
/// vanishes at 0 and is globally Lipschitz with constant |gain|.
enum class NonlinShape { none, linear, sine, tanh, ramp };

/// One nonlinear source term: `shape` applied to a single scalar argument,
/// scaled by `gain`.  arg selects the argument: 0 is the state value, 1..dim
/// are bulk gradient components (on the boundary, 1 is the tangential
/// derivative).
struct NonlinearTerm {
  NonlinShape shape = NonlinShape::none;
  double gain = 0.0;
  int arg = 0;
};

struct Nonlinearity {
  NonlinearTerm F;  // bulk source F(y, grad y)
  NonlinearTerm G;  // boundary source G(trace, tangential derivative)
  double L_F = 0.0;
  double L_G = 0.0;
};

/// Validates argument selectors, F(0,0) = G(0,0) = 0, and the declared
/// Lipschitz constants against finite-difference slopes on a probe grid
/// (estimates above 1.05x the declaration are rejected).
Nonlinearity make_nonlinearity(const NonlinearTerm& F, const NonlinearTerm& G, double L_F,
                               double L_G, int dim);

/// Potential form of the nonlinearity, F(s,p) = F1(s,p) s + F2(s,p).p, with
/// F1 = integral of dF/ds(ts, tp) dt over [0,1] and F2 likewise in p, by
/// 16-point Gauss-Legendre segments of central finite differences.  Bounds
/// |F1|, |F2| <= L_F (and the G analogues <= L_G) hold by construction.
struct Decomposition {
  Nonlinearity nl;
  int dim = 1;

  double F1(double s, const Eigen::VectorXd& p) const;
  Eigen::VectorXd F2(double s, const Eigen::VectorXd& p) const;
  double G1(double s, double q) const;
  double G2(double s, double q) const;
};

/// Builds the decomposition and verifies the reconstruction identity
/// F1 s + F2.p = F to 1e-8 and the sup bounds to 1% on a probe grid.
Decomposition build_decomposition(const Nonlinearity& nl, int dim);

/// Space-time potentials frozen along a trajectory: a = F1(y, grad y),
/// B = F2(y, grad y), b = G1(trace, q), B_gamma = G2(trace, q), one sample
/// per node time.  Diffusivities come from `base`.  Samples that repeat the
/// initial one bitwise collapse to a single time-constant sample.
CoefficientSet freeze_potentials(const Grid& g, const CoefficientSet& base,
                                 const Decomposition& dec, const SpaceTimeField& traj);

struct PicardOptions {
  double tol_fp = 1e-6;  // fixed-point residual in the L2(0,T;H1) norm
  int max_iters = 50;
  double damping = 1.0;  // iterate <- damping*new + (1-damping)*old
  MinimizeOptions minimize;
};

struct PicardRecord {
  int iteration = 0;
  double fp_residual = 0;
  double cost = 0;
  double target_gap = 0;  // through the frozen linear dynamics
};

struct PicardResult {
  ControlSolution solution;
  SpaceTimeField trajectory;  // converged linearized trajectory, node frames
  StatePair nonlinear_terminal;
  double nonlinear_gap = 0;  // through the true nonlinear dynamics
  int iterations = 0;
  std::vector<PicardRecord> history;
};

class PicardNonConvergence : public Error {
 public:
  PicardNonConvergence(const std::string& msg, std::vector<PicardRecord> history)
      : Error(Errc::convergence, msg), history_(std::move(history)) {}
  const std::vector<PicardRecord>& history() const { return history_; }

 private:
  std::vector<PicardRecord> history_;
};

/// Fixed-point construction of an approximate control for the semilinear
/// system: freeze the nonlinearity into potentials along the current
/// trajectory, solve the linear control problem, advance, repeat.  `base`
/// must carry zero potentials (the nonlinearity supplies them).  After
/// convergence the control is verified through the true nonlinear dynamics;
/// a terminal gap above eps*(1+1e-2) is an error.
PicardResult picard_control(const Grid& g, const CoefficientSet& base, const TimeSchedule& sched,
                            const Box& omega, const StatePair& y0, const StatePair& y1, double eps,
                            const Nonlinearity& nl, const PicardOptions& opts = {});

/// Theta-scheme sweep of the semilinear system with the nonlinear term
/// resolved per step by fixed-point iteration on the implicit stage.
SpaceTimeField solve_forward_nonlinear(const Grid& g, const CoefficientSet& base,
                                       const TimeSchedule& sched, const Nonlinearity& nl,
                                       const StatePair& y0, const SpaceTimeField& control);

}  // namespace wentzell
