#pragma once

#include <Eigen/Dense>
#include <vector>

namespace wentzell {

/// Tensor grid on (0,Lx) or (0,Lx)x(0,Ly).
///
/// Bulk unknowns live at cell centers with the cell volume as quadrature
/// weight.  Boundary unknowns live at the domain endpoints (1D) or at the
/// perimeter vertices of the tensor grid (2D), ordered as one closed cycle
/// starting at (0,0) and running bottom, right, top, left.  Boundary weights
/// are trapezoidal arclengths; corners get (hx+hy)/2.
struct Grid {
  int dim = 0;
  std::array<double, 2> extent{0, 0};
  std::array<int, 2> cells{0, 0};
  std::array<double, 2> spacing{0, 0};

  Eigen::MatrixXd bulk_coord;   // n_bulk x dim, cell centers
  Eigen::VectorXd cell_volume;  // n_bulk
  Eigen::MatrixXd bdry_coord;   // n_bdry x dim, cycle order in 2D
  Eigen::VectorXd bdry_weight;  // n_bdry, arclength (1D: counting weight 1)
  Eigen::VectorXd bdry_seg;     // 2D only: arc segment node k -> k+1 (cyclic)
  std::vector<char> bdry_corner;  // 2D only: 1 at the four corners

  // One record per boundary face of a boundary cell.  The face trace value is
  // the boundary node itself in 1D and the average of the two endpoint
  // vertices v0, v1 in 2D.  dist is the distance cell center -> face.
  struct BoundaryFace {
    int cell;
    int v0;
    int v1;  // -1 in 1D
    double area;
    double dist;
    int axis;  // normal axis
    int side;  // -1 low side, +1 high side
  };
  std::vector<BoundaryFace> faces;

  int n_bulk() const { return static_cast<int>(cell_volume.size()); }
  int n_bdry() const { return static_cast<int>(bdry_weight.size()); }
  int n_total() const { return n_bulk() + n_bdry(); }

  int bulk_index(int i, int j = 0) const { return j * cells[0] + i; }

  /// Face record for a boundary cell side, or nullptr when that side is
  /// interior.  side is -1/+1 along `axis`.
  const BoundaryFace* boundary_face(int cell, int axis, int side) const;

  double domain_volume() const;
  double boundary_measure() const;
};

/// Build a grid.  extents/counts have one entry per axis (1 or 2 axes);
/// counts must be >= 4 per axis and extents positive.
Grid make_grid(const std::vector<double>& extents, const std::vector<int>& counts);

}  // namespace wentzell
