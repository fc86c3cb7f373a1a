#include "wentzell/state.hpp"

#include <cmath>
#include <string>

#include "wentzell/errors.hpp"

namespace wentzell {

StatePair zero_state(const Grid& g) {
  return {Eigen::VectorXd::Zero(g.n_bulk()), Eigen::VectorXd::Zero(g.n_bdry())};
}

void check_shape(const Grid& g, const StatePair& u, const char* where) {
  if (u.bulk.size() != g.n_bulk() || u.bdry.size() != g.n_bdry())
    fail(Errc::config, std::string(where) + ": state shape (" + std::to_string(u.bulk.size()) +
                           "," + std::to_string(u.bdry.size()) + ") does not match grid (" +
                           std::to_string(g.n_bulk()) + "," + std::to_string(g.n_bdry()) + ")");
}

double inner_product_mu(const Grid& g, const StatePair& u, const StatePair& v) {
  check_shape(g, u, "inner_product_mu");
  check_shape(g, v, "inner_product_mu");
  return u.bulk.dot(g.cell_volume.cwiseProduct(v.bulk)) +
         u.bdry.dot(g.bdry_weight.cwiseProduct(v.bdry));
}

double norm_mu(const Grid& g, const StatePair& u) {
  return std::sqrt(inner_product_mu(g, u, u));
}

// Face trace seen from a boundary cell: the boundary node itself in 1D, the
// average of the face's endpoint vertices in 2D.
static double face_trace(const Grid::BoundaryFace& f, const Eigen::VectorXd& ub) {
  if (f.v1 < 0) return ub(f.v0);
  return 0.5 * (ub(f.v0) + ub(f.v1));
}

namespace {

// 3-point nonuniform first/second derivative at x0 with neighbors at -dm, +dp.
struct Stencil3 {
  double cm, c0, cp;
};
Stencil3 d1_nonuniform(double dm, double dp) {
  return {-dp / (dm * (dm + dp)), (dp - dm) / (dp * dm), dm / (dp * (dm + dp))};
}
Stencil3 d2_nonuniform(double dm, double dp) {
  return {2.0 / (dm * (dm + dp)), -2.0 / (dm * dp), 2.0 / (dp * (dm + dp))};
}

// Runs one axis line of a bulk field, writing the derivative of given order.
template <typename Out>
void axis_derivative(const Grid& g, const StatePair& u, int axis, int order, Out&& out) {
  const int n_axis = g.cells[axis];
  const int n_lines = g.dim == 1 ? 1 : g.cells[1 - axis];
  const double h = g.spacing[axis];
  const Stencil3 lo = order == 1 ? d1_nonuniform(0.5 * h, h) : d2_nonuniform(0.5 * h, h);
  const Stencil3 hi = order == 1 ? d1_nonuniform(h, 0.5 * h) : d2_nonuniform(h, 0.5 * h);

  for (int line = 0; line < n_lines; ++line) {
    auto cell = [&](int i) {
      if (g.dim == 1) return i;
      return axis == 0 ? g.bulk_index(i, line) : g.bulk_index(line, i);
    };
    const auto* f_lo = g.boundary_face(cell(0), axis, -1);
    const auto* f_hi = g.boundary_face(cell(n_axis - 1), axis, +1);
    const double t_lo = face_trace(*f_lo, u.bdry);
    const double t_hi = face_trace(*f_hi, u.bdry);

    for (int i = 0; i < n_axis; ++i) {
      const int c = cell(i);
      double v;
      if (i == 0)
        v = lo.cm * t_lo + lo.c0 * u.bulk(c) + lo.cp * u.bulk(cell(1));
      else if (i == n_axis - 1)
        v = hi.cm * u.bulk(cell(i - 1)) + hi.c0 * u.bulk(c) + hi.cp * t_hi;
      else if (order == 1)
        v = (u.bulk(cell(i + 1)) - u.bulk(cell(i - 1))) / (2.0 * h);
      else
        v = (u.bulk(cell(i - 1)) - 2.0 * u.bulk(c) + u.bulk(cell(i + 1))) / (h * h);
      out(c, v);
    }
  }
}

}  // namespace

Eigen::MatrixXd bulk_gradient(const Grid& g, const StatePair& u) {
  check_shape(g, u, "bulk_gradient");
  Eigen::MatrixXd grad(g.n_bulk(), g.dim);
  for (int ax = 0; ax < g.dim; ++ax)
    axis_derivative(g, u, ax, 1, [&](int c, double v) { grad(c, ax) = v; });
  return grad;
}

Eigen::VectorXd bulk_laplacian(const Grid& g, const StatePair& u) {
  check_shape(g, u, "bulk_laplacian");
  Eigen::VectorXd lap = Eigen::VectorXd::Zero(g.n_bulk());
  for (int ax = 0; ax < g.dim; ++ax)
    axis_derivative(g, u, ax, 2, [&](int c, double v) { lap(c) += v; });
  return lap;
}

Eigen::VectorXd bdry_tangential_gradient(const Grid& g, const Eigen::VectorXd& ub) {
  const int ng = g.n_bdry();
  Eigen::VectorXd tg = Eigen::VectorXd::Zero(ng);
  if (g.dim == 1) return tg;  // 0-dimensional boundary: no tangential direction
  for (int k = 0; k < ng; ++k) {
    const int prev = (k + ng - 1) % ng, next = (k + 1) % ng;
    tg(k) = (ub(next) - ub(prev)) / (g.bdry_seg(prev) + g.bdry_seg(k));
  }
  return tg;
}

Eigen::VectorXd bdry_laplace_beltrami(const Grid& g, const Eigen::VectorXd& ub) {
  const int ng = g.n_bdry();
  Eigen::VectorXd lb = Eigen::VectorXd::Zero(ng);
  if (g.dim == 1) return lb;
  for (int k = 0; k < ng; ++k) {
    const int prev = (k + ng - 1) % ng, next = (k + 1) % ng;
    const double dm = g.bdry_seg(prev), dp = g.bdry_seg(k);
    lb(k) = 2.0 / (dm + dp) * ((ub(next) - ub(k)) / dp - (ub(k) - ub(prev)) / dm);
  }
  return lb;
}

SobolevNorms sobolev_norms(const Grid& g, const StatePair& u) {
  check_shape(g, u, "sobolev_norms");
  SobolevNorms out;
  const double bdry_l2 = u.bdry.dot(g.bdry_weight.cwiseProduct(u.bdry));
  out.l2 = std::sqrt(u.bulk.dot(g.cell_volume.cwiseProduct(u.bulk)) + bdry_l2);

  const Eigen::MatrixXd grad = bulk_gradient(g, u);
  double h1sq = bdry_l2;
  for (int ax = 0; ax < g.dim; ++ax)
    h1sq += grad.col(ax).dot(g.cell_volume.cwiseProduct(grad.col(ax)));
  const Eigen::VectorXd tg = bdry_tangential_gradient(g, u.bdry);
  h1sq += tg.dot(g.bdry_weight.cwiseProduct(tg));
  out.h1 = std::sqrt(h1sq);

  const Eigen::VectorXd lap = bulk_laplacian(g, u);
  const Eigen::VectorXd lb = bdry_laplace_beltrami(g, u.bdry);
  out.h2 = std::sqrt(lap.dot(g.cell_volume.cwiseProduct(lap)) +
                     lb.dot(g.bdry_weight.cwiseProduct(lb)) + bdry_l2);
  return out;
}

double space_time_h1_distance(const Grid& g, const SpaceTimeField& a, const SpaceTimeField& b) {
  if (a.frames.size() != b.frames.size() || a.times.size() != b.times.size())
    fail(Errc::config, "space_time_h1_distance: frame counts differ");
  const int n = static_cast<int>(a.frames.size());
  if (n < 2) fail(Errc::config, "space_time_h1_distance: need at least 2 frames");
  if ((a.times - b.times).cwiseAbs().maxCoeff() > 1e-12 * std::abs(a.times(n - 1)))
    fail(Errc::config, "space_time_h1_distance: time axes differ");
  double acc = 0;
  for (int k = 0; k < n; ++k) {
    const double wl = k > 0 ? 0.5 * (a.times(k) - a.times(k - 1)) : 0.0;
    const double wr = k + 1 < n ? 0.5 * (a.times(k + 1) - a.times(k)) : 0.0;
    const double h1 = sobolev_norms(g, a.frames[k] - b.frames[k]).h1;
    acc += (wl + wr) * h1 * h1;
  }
  return std::sqrt(acc);
}

}  // namespace wentzell
