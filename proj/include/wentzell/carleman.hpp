#pragma once

#include <Eigen/Dense>

#include "wentzell/operators.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// Carleman weight bundle. eta0 is sampled on all grid nodes in [bulk; bdry]
/// order; boundary entries are exactly zero by construction. xi and alpha are
/// evaluated lazily through eval_weights.
struct CarlemanWeights {
  Eigen::VectorXd eta0;   // size n_total
  double eta0_max = 1.0;  // sup of the continuous profile, not of the samples
  double m = 2.0;         // must stay > 1 so alpha > 0
  double lambda = 2.0;
  double s = 1.0;
  double T = 1.0;
};

/// Piecewise-sine Morse profile on all grid nodes: along each axis
/// sin(pi x/(2c)) left of the control-region center c, mirrored on the right,
/// amplitude 1; axes multiply in 2D. Positive at every cell center, zero at
/// boundary nodes, gradient vanishes only at the center point.
Eigen::VectorXd build_morse(const Grid& g, const Box& omega);

CarlemanWeights build_weights(const Grid& g, const Box& omega, double m, double lambda,
                              double s, double T);

struct WeightValue {
  double xi = 0;
  double alpha = 0;
};

/// xi = e^{lambda(m sup eta0 + eta0(x))}/(t(T-t)) and
/// alpha = (e^{2 lambda m sup eta0} - e^{lambda(m sup eta0 + eta0(x))})/(t(T-t)).
WeightValue eval_weights(const CarlemanWeights& w, int node, double t);

/// Ratio of the weighted whole-domain mass of the adjoint solution to its
/// weighted mass over the control region. The shared s^3 lambda^4 prefactor
/// cancels; weights are computed relative to the space-time minimum of alpha
/// so the quotient survives in double precision at large s.
double carleman_ratio(const DiscreteOperatorSet& ops, const CarlemanWeights& w,
                      const Eigen::VectorXd& mask, const StatePair& phiT);

struct ObsConstantOptions {
  int dense_limit = 400;  // unknowns above this switch to power iteration
  int power_iters = 50;
  unsigned long long seed = 0x9e3779b97f4a7c15ULL;
};

/// Largest generalized Rayleigh quotient |Phi(0)|_mu^2 / <Lambda PhiT, PhiT>_mu
/// over nonzero adjoint data: dense pencil eigensolve for small problems,
/// shifted generalized power iteration otherwise. The shift is the same
/// Hutchinson trace estimate in both branches so they agree to roundoff.
double empirical_obs_constant(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                              const ObsConstantOptions& opts = {});

}  // namespace wentzell
