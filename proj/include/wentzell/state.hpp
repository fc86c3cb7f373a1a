#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wentzell/grid.hpp"

namespace wentzell {

/// Coupled bulk/boundary state (y, y_Gamma).  The two blocks are independent
/// vectors; the product measure weighs the bulk block by cell volumes and the
/// boundary block by arclength weights.
struct StatePair {
  Eigen::VectorXd bulk;
  Eigen::VectorXd bdry;
};

StatePair zero_state(const Grid& g);
void check_shape(const Grid& g, const StatePair& u, const char* where);

double inner_product_mu(const Grid& g, const StatePair& u, const StatePair& v);
double norm_mu(const Grid& g, const StatePair& u);

inline StatePair operator+(const StatePair& a, const StatePair& b) {
  return {a.bulk + b.bulk, a.bdry + b.bdry};
}
inline StatePair operator-(const StatePair& a, const StatePair& b) {
  return {a.bulk - b.bulk, a.bdry - b.bdry};
}
inline StatePair operator*(double s, const StatePair& a) { return {s * a.bulk, s * a.bdry}; }

struct SobolevNorms {
  double l2 = 0;
  double h1 = 0;
  double h2 = 0;
};

/// Discrete L2/H1/H2 norms of a pair.  H1 adds the bulk gradient, the
/// tangential boundary gradient and the boundary L2 term; H2 uses the bulk
/// Laplacian and the Laplace-Beltrami term instead of the gradients.
/// Near-boundary bulk stencils reach through the trace value at distance h/2,
/// so bulk/trace mismatch is visible to the H1 seminorm; with that link
/// l2 <= C_eq * h1 with C_eq = 3 * max(1, diam(Omega)) on these grids.
SobolevNorms sobolev_norms(const Grid& g, const StatePair& u);

/// Nodal finite differences used by the norms and by potential freezing.
/// Interior: centered; first/last cell per axis: 3-point nonuniform formulas
/// through the boundary trace (h/2 to the face, h to the next cell).
Eigen::MatrixXd bulk_gradient(const Grid& g, const StatePair& u);    // n_bulk x dim
Eigen::VectorXd bulk_laplacian(const Grid& g, const StatePair& u);   // n_bulk
Eigen::VectorXd bdry_tangential_gradient(const Grid& g, const Eigen::VectorXd& ub);
Eigen::VectorXd bdry_laplace_beltrami(const Grid& g, const Eigen::VectorXd& ub);

/// Time-sampled field: one StatePair per time.  Trajectories carry node times
/// 0 = t_0 < ... < t_nt = T; control fields carry per-step sample times
/// (midpoints or right endpoints) and one frame per step.
struct SpaceTimeField {
  Eigen::VectorXd times;
  std::vector<StatePair> frames;
};

/// sqrt of the trapezoidal time integral of the squared H1 norms of a-b.
double space_time_h1_distance(const Grid& g, const SpaceTimeField& a, const SpaceTimeField& b);

}  // namespace wentzell
