#include "wentzell/operators.hpp"

#include <cmath>
#include <iostream>
#include <string>

#include "wentzell/errors.hpp"

namespace wentzell {

namespace {

using Trip = Eigen::Triplet<double>;

struct Stencil3 {
  double cm, c0, cp;
};
Stencil3 d1_nonuniform(double dm, double dp) {
  return {-dp / (dm * (dm + dp)), (dp - dm) / (dp * dm), dm / (dp * (dm + dp))};
}

void add_stiffness(const Grid& g, const Eigen::VectorXd& A, const Eigen::VectorXd& A_gamma,
                   std::vector<Trip>& t) {
  const int nb = g.n_bulk();

  // Interior bulk faces, flux form: conductance = A_face * area / dist.
  for (int ax = 0; ax < g.dim; ++ax) {
    const int n_axis = g.cells[ax];
    const int n_lines = g.dim == 1 ? 1 : g.cells[1 - ax];
    const double h = g.spacing[ax];
    const double area = g.dim == 1 ? 1.0 : g.spacing[1 - ax];
    for (int line = 0; line < n_lines; ++line) {
      auto cell = [&](int i) {
        if (g.dim == 1) return i;
        return ax == 0 ? g.bulk_index(i, line) : g.bulk_index(line, i);
      };
      for (int i = 0; i + 1 < n_axis; ++i) {
        const int c1 = cell(i), c2 = cell(i + 1);
        const double cond = 0.5 * (A(c1) + A(c2)) * area / h;
        t.emplace_back(c1, c1, -cond);
        t.emplace_back(c2, c2, -cond);
        t.emplace_back(c1, c2, cond);
        t.emplace_back(c2, c1, cond);
      }
    }
  }

  // Boundary faces: one-sided flux through the face trace at distance h/2.
  // The trace is the boundary node (1D) or the mean of the face's two
  // endpoint vertices (2D), each vertex receiving half of the face flux.
  for (const auto& f : g.faces) {
    const double cond = A(f.cell) * f.area / f.dist;
    const int nv = f.v1 < 0 ? 1 : 2;
    const double wtr = 1.0 / nv;  // trace weight per vertex
    const int vs[2] = {f.v0, f.v1};
    t.emplace_back(f.cell, f.cell, -cond);
    for (int q = 0; q < nv; ++q) {
      const int vcol = nb + vs[q];
      t.emplace_back(f.cell, vcol, cond * wtr);
      t.emplace_back(vcol, f.cell, cond * wtr);
      for (int r = 0; r < nv; ++r) t.emplace_back(vcol, nb + vs[r], -cond * wtr * wtr);
    }
  }

  // Laplace-Beltrami along the boundary cycle (2D only).
  if (g.dim == 2) {
    const int ng = g.n_bdry();
    for (int k = 0; k < ng; ++k) {
      const int next = (k + 1) % ng;
      const double cond = 0.5 * (A_gamma(k) + A_gamma(next)) / g.bdry_seg(k);
      t.emplace_back(nb + k, nb + k, -cond);
      t.emplace_back(nb + next, nb + next, -cond);
      t.emplace_back(nb + k, nb + next, cond);
      t.emplace_back(nb + next, nb + k, cond);
    }
  }
}

// Drift + reaction sample, mass-weighted.  Rows follow the nodal convention
// of bulk_gradient: centered differences inside, 3-point nonuniform stencils
// through the face trace at the first/last cell of each axis line.  Cells
// whose local Peclet number |B| h / A exceeds 2 fall back to first-order
// upwind differences.
void add_drift_reaction(const Grid& g, const Eigen::VectorXd& A, const Eigen::VectorXd& A_gamma,
                        const Eigen::VectorXd& a_s, const Eigen::VectorXd& b_s,
                        const Eigen::MatrixXd& B_s, const Eigen::VectorXd& Bg_s,
                        std::vector<Trip>& t, bool& upwinded) {
  const int nb = g.n_bulk();

  for (int c = 0; c < nb; ++c)
    if (a_s(c) != 0.0) t.emplace_back(c, c, g.cell_volume(c) * a_s(c));
  for (int k = 0; k < g.n_bdry(); ++k)
    if (b_s(k) != 0.0) t.emplace_back(nb + k, nb + k, g.bdry_weight(k) * b_s(k));

  for (int ax = 0; ax < g.dim; ++ax) {
    const int n_axis = g.cells[ax];
    const int n_lines = g.dim == 1 ? 1 : g.cells[1 - ax];
    const double h = g.spacing[ax];
    for (int line = 0; line < n_lines; ++line) {
      auto cell = [&](int i) {
        if (g.dim == 1) return i;
        return ax == 0 ? g.bulk_index(i, line) : g.bulk_index(line, i);
      };
      for (int i = 0; i < n_axis; ++i) {
        const int c = cell(i);
        const double beta = B_s(c, ax);
        if (beta == 0.0) continue;
        const double w = g.cell_volume(c) * beta;
        const bool upwind = std::abs(beta) * h / A(c) > 2.0;
        upwinded |= upwind;

        // Columns of the trace at the low/high face of this line, with their
        // averaging weights.
        auto trace_cols = [&](int side, auto&& emit) {
          const auto* f = g.boundary_face(cell(side < 0 ? 0 : n_axis - 1), ax, side);
          const int nv = f->v1 < 0 ? 1 : 2;
          const int vs[2] = {f->v0, f->v1};
          for (int q = 0; q < nv; ++q) emit(nb + vs[q], 1.0 / nv);
        };

        if (upwind) {
          if (beta > 0.0) {  // upstream on the low side
            if (i > 0) {
              t.emplace_back(c, c, w / h);
              t.emplace_back(c, cell(i - 1), -w / h);
            } else {
              t.emplace_back(c, c, w / (0.5 * h));
              trace_cols(-1, [&](int col, double wt) { t.emplace_back(c, col, -w / (0.5 * h) * wt); });
            }
          } else {
            if (i + 1 < n_axis) {
              t.emplace_back(c, cell(i + 1), w / h);
              t.emplace_back(c, c, -w / h);
            } else {
              trace_cols(+1, [&](int col, double wt) { t.emplace_back(c, col, w / (0.5 * h) * wt); });
              t.emplace_back(c, c, -w / (0.5 * h));
            }
          }
        } else if (i == 0) {
          const Stencil3 s = d1_nonuniform(0.5 * h, h);
          trace_cols(-1, [&](int col, double wt) { t.emplace_back(c, col, w * s.cm * wt); });
          t.emplace_back(c, c, w * s.c0);
          t.emplace_back(c, cell(1), w * s.cp);
        } else if (i == n_axis - 1) {
          const Stencil3 s = d1_nonuniform(h, 0.5 * h);
          t.emplace_back(c, cell(i - 1), w * s.cm);
          t.emplace_back(c, c, w * s.c0);
          trace_cols(+1, [&](int col, double wt) { t.emplace_back(c, col, w * s.cp * wt); });
        } else {
          t.emplace_back(c, cell(i + 1), w / (2.0 * h));
          t.emplace_back(c, cell(i - 1), -w / (2.0 * h));
        }
      }
    }
  }

  // Tangential boundary drift along the cycle (2D only).
  if (g.dim == 2) {
    const int ng = g.n_bdry();
    for (int k = 0; k < ng; ++k) {
      const double beta = Bg_s(k);
      if (beta == 0.0) continue;
      const int prev = (k + ng - 1) % ng, next = (k + 1) % ng;
      const double dm = g.bdry_seg(prev), dp = g.bdry_seg(k);
      const double w = g.bdry_weight(k) * beta;
      const bool upwind = std::abs(beta) * std::max(dm, dp) / A_gamma(k) > 2.0;
      upwinded |= upwind;
      if (upwind) {
        if (beta > 0.0) {
          t.emplace_back(nb + k, nb + k, w / dm);
          t.emplace_back(nb + k, nb + prev, -w / dm);
        } else {
          t.emplace_back(nb + k, nb + next, w / dp);
          t.emplace_back(nb + k, nb + k, -w / dp);
        }
      } else {
        const Stencil3 s = d1_nonuniform(dm, dp);
        t.emplace_back(nb + k, nb + prev, w * s.cm);
        t.emplace_back(nb + k, nb + k, w * s.c0);
        t.emplace_back(nb + k, nb + next, w * s.cp);
      }
    }
  }
}

bool same_sample(const CoefficientSet& c, int n, int m) {
  auto eq = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    return x.size() == y.size() && (x.array() == y.array()).all();
  };
  return eq(c.a.at(n), c.a.at(m)) && eq(c.b.at(n), c.b.at(m)) &&
         eq(c.B_gamma.at(n), c.B_gamma.at(m)) && c.B.at(n).rows() == c.B.at(m).rows() &&
         (c.B.at(n).array() == c.B.at(m).array()).all();
}

}  // namespace

DiscreteOperatorSet assemble(const Grid& g, const CoefficientSet& coeffs,
                             const TimeSchedule& sched) {
  validate_coefficients(g, sched, coeffs);

  DiscreteOperatorSet ops;
  ops.grid = g;
  ops.schedule = sched;
  ops.sups = coefficient_sup_norms(coeffs);

  const int n = g.n_total();
  ops.mass.resize(n);
  ops.mass.head(g.n_bulk()) = g.cell_volume;
  ops.mass.tail(g.n_bdry()) = g.bdry_weight;

  std::vector<Trip> kt;
  add_stiffness(g, coeffs.A, coeffs.A_gamma, kt);
  ops.stiffness.resize(n, n);
  ops.stiffness.setFromTriplets(kt.begin(), kt.end());

  const bool constant = coefficients_time_constant(coeffs);
  const int n_samples = constant ? 1 : sched.nt + 1;
  ops.drift_index.assign(sched.nt + 1, 0);

  bool warned = false;
  for (int s = 0; s < n_samples; ++s) {
    if (s > 0 && same_sample(coeffs, s, 0)) {
      ops.drift_index[s] = 0;
      continue;
    }
    std::vector<Trip> dt_;
    bool up = false;
    add_drift_reaction(g, coeffs.A, coeffs.A_gamma, coeffs.a.at(s), coeffs.b.at(s), coeffs.B.at(s),
                       coeffs.B_gamma.at(s), dt_, up);
    if (up && !warned) {
      std::cerr << "warning: cell Peclet number exceeds 2, switching affected cells to upwind "
                   "differences\n";
      warned = true;
    }
    ops.upwinded |= up;
    Eigen::SparseMatrix<double> D(n, n);
    D.setFromTriplets(dt_.begin(), dt_.end());
    ops.drift_index[s] = static_cast<int>(ops.drift.size());
    ops.drift.push_back(std::move(D));
  }

  // All samples equal to the first: collapse to the time-constant form so the
  // solvers factor one step matrix.
  if (ops.drift.size() == 1) ops.drift_index.assign(sched.nt + 1, 0);

  return ops;
}

Eigen::VectorXd control_mask(const Grid& g, const Box& omega) {
  for (int ax = 0; ax < g.dim; ++ax) {
    const double lo = omega.lo[ax], hi = omega.hi[ax];
    const double tol = 1e-12 * g.extent[ax];
    if (!(lo < hi))
      fail(Errc::geometry, "control region: empty interval on axis " + std::to_string(ax));
    if (lo < g.spacing[ax] - tol || hi > g.extent[ax] - g.spacing[ax] + tol)
      fail(Errc::geometry,
           "control region: closure must stay at least one cell away from the boundary on axis " +
               std::to_string(ax));
  }
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(g.n_bulk());
  for (int c = 0; c < g.n_bulk(); ++c) {
    bool in = true;
    for (int ax = 0; ax < g.dim; ++ax)
      in = in && g.bulk_coord(c, ax) > omega.lo[ax] && g.bulk_coord(c, ax) < omega.hi[ax];
    if (in) mask(c) = 1.0;
  }
  if (mask.sum() == 0.0) fail(Errc::geometry, "control region: contains no bulk nodes");
  return mask;
}

}  // namespace wentzell
