#pragma once

#include "wentzell/operators.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// Theta-scheme sweep of  (M - theta dt (K-D)) Y^{n+1}
///   = (M + (1-theta) dt (K-D)) Y^n + dt M P v^n.
/// `control`, when given, holds one frame per step (bulk block only is read);
/// frames are expected to vanish outside the control mask.  Returns nt+1
/// frames at the node times.
SpaceTimeField solve_forward(const DiscreteOperatorSet& ops, const StatePair& y0,
                             const SpaceTimeField* control = nullptr);

/// Terminal state only, without storing the trajectory.
StatePair forward_terminal(const DiscreteOperatorSet& ops, const StatePair& y0,
                           const SpaceTimeField* control = nullptr);

inline StatePair uncontrolled_terminal(const DiscreteOperatorSet& ops, const StatePair& y0) {
  return forward_terminal(ops, y0, nullptr);
}

}  // namespace wentzell
