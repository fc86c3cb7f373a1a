#pragma once

#include "wentzell/operators.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// Backward sweep with the exact transposes of the forward step matrices in
/// the mu-weighted pairing, so that for every control v and terminal datum
/// Phi_T:  <Y(T;0,v), Phi_T>_mu = sum_n dt <v^n, phi^n>_omega  holds to
/// roundoff, where phi^n are the per-step `samples` frames.
///
/// `nodes` holds the adjoint trajectory at the nt+1 node times (last frame is
/// Phi_T itself); `samples` holds the nt duality-exact observation states at
/// the control sample times.
struct AdjointSolution {
  SpaceTimeField nodes;
  SpaceTimeField samples;
};

AdjointSolution solve_adjoint(const DiscreteOperatorSet& ops, const StatePair& phi_T);

/// Restriction to the control region: bulk block masked, boundary block
/// zeroed, frame by frame.
SpaceTimeField observation(const SpaceTimeField& f, const Eigen::VectorXd& mask);

}  // namespace wentzell
