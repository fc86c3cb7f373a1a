#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <memory>
#include <vector>

#include "wentzell/coefficients.hpp"
#include "wentzell/grid.hpp"
#include "wentzell/schedule.hpp"

namespace wentzell {

struct Box {
  std::array<double, 2> lo{0, 0};
  std::array<double, 2> hi{0, 0};
};

struct StepCache;  // factorizations, built lazily by the solvers

/// Weighted semi-discrete system  M dY/dt = K Y - D(t) Y + M P_omega v.
/// Ordering: bulk block first, boundary block second.  K is the symmetric
/// negative-semidefinite diffusion + trace-coupling matrix with constants in
/// its kernel (exact discrete conservation); D carries drift and reaction and
/// is stored once per distinct time sample.
struct DiscreteOperatorSet {
  Grid grid;
  TimeSchedule schedule;
  Eigen::VectorXd mass;
  Eigen::SparseMatrix<double> stiffness;
  std::vector<Eigen::SparseMatrix<double>> drift;
  std::vector<int> drift_index;  // time node -> entry of drift
  CoefficientSupNorms sups;
  bool upwinded = false;
  mutable std::shared_ptr<StepCache> cache;

  int n() const { return grid.n_total(); }
  const Eigen::SparseMatrix<double>& D(int node) const { return drift[drift_index[node]]; }
  bool time_constant() const { return drift.size() == 1; }
};

DiscreteOperatorSet assemble(const Grid& g, const CoefficientSet& coeffs,
                             const TimeSchedule& sched);

/// 0/1 mask over bulk nodes for the control region.  The region must be a
/// nonempty open interval/rectangle whose closure keeps at least one cell
/// width away from the boundary on every axis.
Eigen::VectorXd control_mask(const Grid& g, const Box& omega);

}  // namespace wentzell
