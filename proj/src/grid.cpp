#include "wentzell/grid.hpp"

#include <cmath>

#include "wentzell/errors.hpp"

namespace wentzell {

const Grid::BoundaryFace* Grid::boundary_face(int cell, int axis, int side) const {
  for (const auto& f : faces)
    if (f.cell == cell && f.axis == axis && f.side == side) return &f;
  return nullptr;
}

double Grid::domain_volume() const {
  double v = extent[0];
  if (dim == 2) v *= extent[1];
  return v;
}

double Grid::boundary_measure() const {
  if (dim == 1) return 2.0;
  return 2.0 * (extent[0] + extent[1]);
}

static Grid make_grid_1d(double length, int n) {
  Grid g;
  g.dim = 1;
  g.extent = {length, 0.0};
  g.cells = {n, 0};
  const double h = length / n;
  g.spacing = {h, 0.0};

  g.bulk_coord.resize(n, 1);
  g.cell_volume.resize(n);
  for (int i = 0; i < n; ++i) {
    g.bulk_coord(i, 0) = (i + 0.5) * h;
    g.cell_volume(i) = h;
  }

  g.bdry_coord.resize(2, 1);
  g.bdry_coord(0, 0) = 0.0;
  g.bdry_coord(1, 0) = length;
  g.bdry_weight = Eigen::VectorXd::Ones(2);

  g.faces.push_back({0, 0, -1, 1.0, 0.5 * h, 0, -1});
  g.faces.push_back({n - 1, 1, -1, 1.0, 0.5 * h, 0, +1});
  return g;
}

static Grid make_grid_2d(double lx, double ly, int nx, int ny) {
  Grid g;
  g.dim = 2;
  g.extent = {lx, ly};
  g.cells = {nx, ny};
  const double hx = lx / nx, hy = ly / ny;
  g.spacing = {hx, hy};

  const int nb = nx * ny;
  g.bulk_coord.resize(nb, 2);
  g.cell_volume.resize(nb);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = g.bulk_index(i, j);
      g.bulk_coord(k, 0) = (i + 0.5) * hx;
      g.bulk_coord(k, 1) = (j + 0.5) * hy;
      g.cell_volume(k) = hx * hy;
    }

  // Perimeter vertex cycle: bottom (0,0)->(lx,0), right ->(lx,ly),
  // top ->(0,ly), left ->(0,0).  Corners appear once.
  const int ng = 2 * (nx + ny);
  g.bdry_coord.resize(ng, 2);
  g.bdry_seg.resize(ng);
  g.bdry_corner.assign(ng, 0);
  int k = 0;
  for (int i = 0; i < nx; ++i, ++k) {
    g.bdry_coord.row(k) << i * hx, 0.0;
    g.bdry_seg(k) = hx;
  }
  for (int j = 0; j < ny; ++j, ++k) {
    g.bdry_coord.row(k) << lx, j * hy;
    g.bdry_seg(k) = hy;
  }
  for (int i = 0; i < nx; ++i, ++k) {
    g.bdry_coord.row(k) << lx - i * hx, ly;
    g.bdry_seg(k) = hx;
  }
  for (int j = 0; j < ny; ++j, ++k) {
    g.bdry_coord.row(k) << 0.0, ly - j * hy;
    g.bdry_seg(k) = hy;
  }
  g.bdry_corner[0] = g.bdry_corner[nx] = g.bdry_corner[nx + ny] = g.bdry_corner[2 * nx + ny] = 1;

  g.bdry_weight.resize(ng);
  for (int v = 0; v < ng; ++v) {
    const int prev = (v + ng - 1) % ng;
    g.bdry_weight(v) = 0.5 * (g.bdry_seg(prev) + g.bdry_seg(v));
  }

  // Boundary faces; vertex indices follow the cycle layout above.
  for (int i = 0; i < nx; ++i)
    g.faces.push_back({g.bulk_index(i, 0), i, i + 1, hx, 0.5 * hy, 1, -1});
  for (int j = 0; j < ny; ++j)
    g.faces.push_back({g.bulk_index(nx - 1, j), nx + j, nx + j + 1, hy, 0.5 * hx, 0, +1});
  for (int i = 0; i < nx; ++i)
    g.faces.push_back(
        {g.bulk_index(i, ny - 1), nx + ny + (nx - i - 1), nx + ny + (nx - i), hx, 0.5 * hy, 1, +1});
  for (int j = 0; j < ny; ++j)
    g.faces.push_back({g.bulk_index(0, j), 2 * nx + ny + (ny - j - 1),
                       (2 * nx + ny + (ny - j)) % ng, hy, 0.5 * hx, 0, -1});
  return g;
}

Grid make_grid(const std::vector<double>& extents, const std::vector<int>& counts) {
  if (extents.size() != counts.size() || extents.empty() || extents.size() > 2)
    fail(Errc::geometry, "grid: need 1 or 2 axes with matching extents/counts");
  for (size_t ax = 0; ax < extents.size(); ++ax) {
    if (!(extents[ax] > 0.0) || !std::isfinite(extents[ax]))
      fail(Errc::geometry, "grid: extent must be positive and finite on axis " + std::to_string(ax));
    if (counts[ax] < 4)
      fail(Errc::geometry, "grid: need at least 4 cells per axis, got " + std::to_string(counts[ax]));
  }
  if (extents.size() == 1) return make_grid_1d(extents[0], counts[0]);
  return make_grid_2d(extents[0], extents[1], counts[0], counts[1]);
}

}  // namespace wentzell
