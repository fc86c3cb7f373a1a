#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wentzell/grid.hpp"
#include "wentzell/schedule.hpp"

namespace wentzell {

/// A nodal scalar field with either one sample (time-constant, broadcast to
/// every step) or nt+1 samples at the schedule's node times.
struct ScalarField {
  std::vector<Eigen::VectorXd> samples;
  bool time_constant() const { return samples.size() == 1; }
  const Eigen::VectorXd& at(int n) const { return samples[time_constant() ? 0 : n]; }
};

/// Same sampling convention for a bulk vector field; each sample is
/// n_bulk x dim.
struct VectorField {
  std::vector<Eigen::MatrixXd> samples;
  bool time_constant() const { return samples.size() == 1; }
  const Eigen::MatrixXd& at(int n) const { return samples[time_constant() ? 0 : n]; }
};

/// Coefficients of the coupled system: bulk diffusivity A and surface
/// diffusivity A_Gamma (static, per node, >= 1e-8), bulk reaction a, boundary
/// reaction b, bulk drift B, and the signed tangential boundary drift
/// B_Gamma (inert in 1D where the boundary has no tangential direction).
struct CoefficientSet {
  Eigen::VectorXd A;
  Eigen::VectorXd A_gamma;
  ScalarField a;
  ScalarField b;
  VectorField B;
  ScalarField B_gamma;
};

/// Sup norms feeding the cost/observability evaluators.  B norms are
/// pointwise Euclidean.
struct CoefficientSupNorms {
  double a = 0, b = 0, B = 0, B_gamma = 0;
};

ScalarField constant_scalar_field(int n_nodes, double value);
VectorField constant_vector_field(int n_nodes, int dim, const Eigen::VectorXd& value);

CoefficientSet constant_coefficients(const Grid& g, double A, double A_gamma, double a, double b,
                                     const Eigen::VectorXd& B, double B_gamma);

/// Shape/positivity/finiteness checks; sample counts must be 1 or nt+1.
void validate_coefficients(const Grid& g, const TimeSchedule& sched, const CoefficientSet& c);

CoefficientSupNorms coefficient_sup_norms(const CoefficientSet& c);

bool coefficients_time_constant(const CoefficientSet& c);

}  // namespace wentzell
