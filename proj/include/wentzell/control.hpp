#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wentzell/errors.hpp"
#include "wentzell/operators.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// One application of the duality Gramian: adjoint sweep from phi_T, restrict
/// the per-step observation states to the control region, feed them back as a
/// control in the forward sweep from zero, return the terminal state.
/// Symmetric positive semidefinite in the mu inner product by construction.
StatePair gramian_apply(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                        const StatePair& phi_T);

/// prox_{t ||.||_mu}(z): block soft threshold (1 - t/||z||_mu)_+ z.
StatePair prox_mu_norm(const Grid& g, const StatePair& z, double t);

/// Largest Gramian eigenvalue by mu-weighted power iteration.
double gramian_spectral_bound(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                              int iters, std::uint64_t seed);

struct MinimizeOptions {
  double tol_rel = 1e-6;  // residual/certificate tolerance, relative
  double tol_abs = 0.0;
  int max_iters = 5000;
  int power_iters = 20;
  std::uint64_t seed = 0x2545f4914f6cdd1dULL;
  std::optional<StatePair> init;  // FISTA start, defaults to zero
};

struct ControlSolution {
  StatePair phiT_hat;      // minimizer of the dual functional
  SpaceTimeField control;  // nt masked bulk frames at the control sample times
  StatePair terminal;      // terminal state reached from zero with `control`
  double eps = 0;
  double cost = 0;        // sqrt(sum_n dt ||v^n||^2_omega)
  double target_gap = 0;  // ||terminal - target||_mu, <= eps (1 + tol_rel)
  double J_value = 0;     // equals -cost^2/2 at the minimizer
  double residual = 0;    // ||Lambda phi - Y1 + eps phi/||phi|| ||_mu
  double L_estimate = 0;
  int iterations = 0;
  std::vector<double> J_history;  // nonincreasing (monotone accelerated scheme)
};

/// Thrown when the iteration budget runs out; carries the best iterate.
class MinimizeNonConvergence : public Error {
 public:
  MinimizeNonConvergence(const std::string& msg, ControlSolution best)
      : Error(Errc::convergence, msg), best_(std::move(best)) {}
  const ControlSolution& best() const { return best_; }

 private:
  ControlSolution best_;
};

/// Minimal-mu-norm approximate control toward target `y1` (a reduced target:
/// start state zero) with radius eps, by accelerated proximal gradient on the
/// dual functional J(phi) = 1/2 <Lambda phi, phi> + eps ||phi|| - <y1, phi>.
/// ||y1|| <= eps short-circuits to the zero control in zero iterations.
ControlSolution minimize_J(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                           const StatePair& y1, double eps, const MinimizeOptions& opts = {});

/// Reduced target: y1 minus the free (uncontrolled) terminal state of y0.
StatePair reduce_target(const DiscreteOperatorSet& ops, const StatePair& y0, const StatePair& y1);

}  // namespace wentzell
