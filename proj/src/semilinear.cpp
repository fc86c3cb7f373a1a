#include "wentzell/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "stepper.hpp"
#include "wentzell/adjoint.hpp"
#include "wentzell/errors.hpp"
#include "wentzell/forward.hpp"

namespace wentzell {

namespace {

// Symmetric half of the 16-point Gauss-Legendre rule on [-1, 1].
constexpr int kGlPoints = 8;
constexpr double kGlNode[kGlPoints] = {
    0.09501250983763744, 0.28160355077925891, 0.45801677765722739, 0.61787624440264375,
    0.75540440835500303, 0.86563120238783174, 0.94457502307323258, 0.98940093499164993};
constexpr double kGlWeight[kGlPoints] = {
    0.18945061045506850, 0.18260341504492359, 0.16915651939500254, 0.14959598881657673,
    0.12462897125553387, 0.09515851168249278, 0.06225352393864789, 0.02715245941175409};

double shape_value(NonlinShape s, double x) {
  switch (s) {
    case NonlinShape::none:
      return 0.0;
    case NonlinShape::linear:
      return x;
    case NonlinShape::sine:
      return std::sin(x);
    case NonlinShape::tanh:
      return std::tanh(x);
    case NonlinShape::ramp:
      return std::clamp(x, -1.0, 1.0);
  }
  fail(Errc::config, "unknown nonlinearity shape");
}

double term_value(const NonlinearTerm& t, double s, const Eigen::VectorXd& p) {
  if (t.shape == NonlinShape::none) return 0.0;
  const double x = t.arg == 0 ? s : p[t.arg - 1];
  return t.gain * shape_value(t.shape, x);
}

double fd_slope(const NonlinearTerm& t, double u) {
  const double h = 6.0e-6 * (1.0 + std::abs(u));
  return t.gain * (shape_value(t.shape, u + h) - shape_value(t.shape, u - h)) / (2.0 * h);
}

// Integral mean of the slope along the ray through u, int_0^1 f'(tau u) dtau,
// one Gauss-Legendre panel per smooth segment; only the ramp has a kink, at
// |argument| = 1.
double integral_mean_slope(const NonlinearTerm& t, double u) {
  double breaks[3] = {0.0, 1.0, 1.0};
  int nseg = 1;
  if (t.shape == NonlinShape::ramp && std::abs(u) > 1.0) {
    breaks[1] = 1.0 / std::abs(u);
    breaks[2] = 1.0;
    nseg = 2;
  }
  double total = 0.0;
  for (int seg = 0; seg < nseg; ++seg) {
    const double mid = 0.5 * (breaks[seg] + breaks[seg + 1]);
    const double half = 0.5 * (breaks[seg + 1] - breaks[seg]);
    for (int q = 0; q < kGlPoints; ++q) {
      total += half * kGlWeight[q] *
               (fd_slope(t, (mid + half * kGlNode[q]) * u) + fd_slope(t, (mid - half * kGlNode[q]) * u));
    }
  }
  return total;
}

void check_term(const NonlinearTerm& t, int max_arg, const char* which) {
  if (!std::isfinite(t.gain)) fail(Errc::config, std::string(which) + ": gain must be finite");
  if (t.arg < 0 || t.arg > max_arg) fail(Errc::config, std::string(which) + ": argument selector out of range");
  const Eigen::VectorXd zero_p = Eigen::VectorXd::Zero(std::max(max_arg, 1));
  if (term_value(t, 0.0, zero_p) != 0.0) {
    fail(Errc::config, std::string(which) + ": nonlinearity must vanish at zero");
  }
}

void check_lipschitz(const NonlinearTerm& t, double declared, const char* which) {
  if (!(declared >= 0.0) || !std::isfinite(declared)) {
    fail(Errc::config, std::string(which) + ": Lipschitz constant must be finite and nonnegative");
  }
  if (t.shape == NonlinShape::none) return;
  double slope = 0.0;
  for (int i = 0; i <= 120; ++i) {
    const double u = -3.0 + 6.0 * i / 120.0;
    slope = std::max(slope, std::abs(fd_slope(t, u)));
  }
  if (slope > 1.05 * declared) {
    fail(Errc::config, std::string(which) + ": finite-difference slope " + std::to_string(slope) +
                           " exceeds the declared Lipschitz constant");
  }
}

bool same_bits(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return x.size() == y.size() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

bool same_bits(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x.rows() == y.rows() && x.cols() == y.cols() &&
         std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
}

template <typename Field>
void collapse_constant(Field& f) {
  for (size_t i = 1; i < f.samples.size(); ++i) {
    if (!same_bits(f.samples[i], f.samples[0])) return;
  }
  f.samples.resize(1);
}

bool potentials_equal(const CoefficientSet& x, const CoefficientSet& y) {
  if (x.a.samples.size() != y.a.samples.size() || x.b.samples.size() != y.b.samples.size() ||
      x.B.samples.size() != y.B.samples.size() || x.B_gamma.samples.size() != y.B_gamma.samples.size()) {
    return false;
  }
  for (size_t i = 0; i < x.a.samples.size(); ++i)
    if (!same_bits(x.a.samples[i], y.a.samples[i])) return false;
  for (size_t i = 0; i < x.b.samples.size(); ++i)
    if (!same_bits(x.b.samples[i], y.b.samples[i])) return false;
  for (size_t i = 0; i < x.B.samples.size(); ++i)
    if (!same_bits(x.B.samples[i], y.B.samples[i])) return false;
  for (size_t i = 0; i < x.B_gamma.samples.size(); ++i)
    if (!same_bits(x.B_gamma.samples[i], y.B_gamma.samples[i])) return false;
  return true;
}

// Mass-weighted nonlinear source N(Y): cell volumes times F(y, grad y) on the
// bulk block, arclength weights times G(trace, tangential) on the boundary.
Eigen::VectorXd nonlinear_source(const Grid& g, const Nonlinearity& nl, const Eigen::VectorXd& y) {
  const int nb = g.n_bulk(), ng = g.n_bdry();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(nb + ng);
  if (nl.F.shape == NonlinShape::none && nl.G.shape == NonlinShape::none) return out;

  StatePair u{y.head(nb), y.tail(ng)};
  if (nl.F.shape != NonlinShape::none) {
    const Eigen::MatrixXd grads = bulk_gradient(g, u);
    for (int c = 0; c < nb; ++c) {
      out[c] = g.cell_volume[c] * term_value(nl.F, u.bulk[c], grads.row(c).transpose());
    }
  }
  if (nl.G.shape != NonlinShape::none) {
    const Eigen::VectorXd q = bdry_tangential_gradient(g, u.bdry);
    Eigen::VectorXd qi(1);
    for (int i = 0; i < ng; ++i) {
      qi[0] = q[i];
      out[nb + i] = g.bdry_weight[i] * term_value(nl.G, u.bdry[i], qi);
    }
  }
  return out;
}

}  // namespace

Nonlinearity make_nonlinearity(const NonlinearTerm& F, const NonlinearTerm& G, double L_F,
                               double L_G, int dim) {
  if (dim < 1 || dim > 2) fail(Errc::config, "nonlinearity: dimension must be 1 or 2");
  check_term(F, dim, "bulk nonlinearity");
  check_term(G, 1, "boundary nonlinearity");
  check_lipschitz(F, L_F, "bulk nonlinearity");
  check_lipschitz(G, L_G, "boundary nonlinearity");
  return Nonlinearity{F, G, L_F, L_G};
}

double Decomposition::F1(double s, const Eigen::VectorXd& p) const {
  (void)p;
  if (nl.F.shape == NonlinShape::none || nl.F.arg != 0) return 0.0;
  return integral_mean_slope(nl.F, s);
}

Eigen::VectorXd Decomposition::F2(double s, const Eigen::VectorXd& p) const {
  (void)s;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  if (nl.F.shape != NonlinShape::none && nl.F.arg >= 1) {
    out[nl.F.arg - 1] = integral_mean_slope(nl.F, p[nl.F.arg - 1]);
  }
  return out;
}

double Decomposition::G1(double s, double q) const {
  (void)q;
  if (nl.G.shape == NonlinShape::none || nl.G.arg != 0) return 0.0;
  return integral_mean_slope(nl.G, s);
}

double Decomposition::G2(double s, double q) const {
  (void)s;
  if (nl.G.shape == NonlinShape::none || nl.G.arg != 1) return 0.0;
  return integral_mean_slope(nl.G, q);
}

Decomposition build_decomposition(const Nonlinearity& nl, int dim) {
  if (dim < 1 || dim > 2) fail(Errc::config, "decomposition: dimension must be 1 or 2");
  Decomposition dec{nl, dim};

  const double s_probe[] = {-1.7, -0.6, 0.0, 0.4, 1.3};
  const double p_probe[] = {-1.4, 0.0, 0.9};
  const double slack = 1e-12;

  Eigen::VectorXd p(dim);
  const int np = dim == 1 ? 3 : 9;
  for (double s : s_probe) {
    for (int ip = 0; ip < np; ++ip) {
      p[0] = p_probe[ip % 3];
      if (dim == 2) p[1] = p_probe[ip / 3];

      const double f1 = dec.F1(s, p);
      const Eigen::VectorXd f2 = dec.F2(s, p);
      const double value = term_value(nl.F, s, p);
      if (std::abs(f1 * s + f2.dot(p) - value) > 1e-8 * (1.0 + std::abs(value))) {
        fail(Errc::solver, "potential decomposition does not reconstruct the bulk nonlinearity");
      }
      if (std::abs(f1) > 1.01 * nl.L_F + slack || f2.norm() > 1.01 * nl.L_F + slack) {
        fail(Errc::solver, "bulk potential decomposition exceeds the Lipschitz bound");
      }

      const double q = p[0];
      const double g1 = dec.G1(s, q), g2 = dec.G2(s, q);
      Eigen::VectorXd qv(1);
      qv[0] = q;
      const double gval = term_value(nl.G, s, qv);
      if (std::abs(g1 * s + g2 * q - gval) > 1e-8 * (1.0 + std::abs(gval))) {
        fail(Errc::solver, "potential decomposition does not reconstruct the boundary nonlinearity");
      }
      if (std::abs(g1) > 1.01 * nl.L_G + slack || std::abs(g2) > 1.01 * nl.L_G + slack) {
        fail(Errc::solver, "boundary potential decomposition exceeds the Lipschitz bound");
      }
    }
  }
  return dec;
}

CoefficientSet freeze_potentials(const Grid& g, const CoefficientSet& base,
                                 const Decomposition& dec, const SpaceTimeField& traj) {
  if (traj.frames.empty()) fail(Errc::config, "potential freeze needs a nonempty trajectory");
  const int nb = g.n_bulk(), ng = g.n_bdry();
  const size_t nf = traj.frames.size();

  CoefficientSet out;
  out.A = base.A;
  out.A_gamma = base.A_gamma;
  out.a.samples.resize(nf);
  out.b.samples.resize(nf);
  out.B.samples.resize(nf);
  out.B_gamma.samples.resize(nf);

  for (size_t n = 0; n < nf; ++n) {
    const StatePair& fr = traj.frames[n];
    check_shape(g, fr, "potential freeze");
    const Eigen::MatrixXd grads = bulk_gradient(g, fr);
    const Eigen::VectorXd q = bdry_tangential_gradient(g, fr.bdry);

    Eigen::VectorXd av(nb), bv(ng), gv(ng);
    Eigen::MatrixXd Bv(nb, g.dim);
    for (int c = 0; c < nb; ++c) {
      const Eigen::VectorXd p = grads.row(c).transpose();
      av[c] = dec.F1(fr.bulk[c], p);
      Bv.row(c) = dec.F2(fr.bulk[c], p).transpose();
    }
    for (int i = 0; i < ng; ++i) {
      bv[i] = dec.G1(fr.bdry[i], q[i]);
      gv[i] = dec.G2(fr.bdry[i], q[i]);
    }
    out.a.samples[n] = std::move(av);
    out.b.samples[n] = std::move(bv);
    out.B.samples[n] = std::move(Bv);
    out.B_gamma.samples[n] = std::move(gv);
  }

  const CoefficientSupNorms sups = coefficient_sup_norms(out);
  if (std::max(sups.a, sups.B) > 1.01 * dec.nl.L_F + 1e-12 ||
      std::max(sups.b, sups.B_gamma) > 1.01 * dec.nl.L_G + 1e-12) {
    fail(Errc::solver, "frozen potential exceeded the declared Lipschitz bound");
  }

  collapse_constant(out.a);
  collapse_constant(out.b);
  collapse_constant(out.B);
  collapse_constant(out.B_gamma);
  return out;
}

PicardResult picard_control(const Grid& g, const CoefficientSet& base, const TimeSchedule& sched,
                            const Box& omega, const StatePair& y0, const StatePair& y1, double eps,
                            const Nonlinearity& nl, const PicardOptions& opts) {
  const CoefficientSupNorms base_sups = coefficient_sup_norms(base);
  if (base_sups.a != 0.0 || base_sups.b != 0.0 || base_sups.B != 0.0 || base_sups.B_gamma != 0.0) {
    fail(Errc::config, "semilinear base coefficients must carry no potentials");
  }
  if (!(opts.damping > 0.0) || opts.damping > 1.0) fail(Errc::config, "damping must lie in (0, 1]");
  if (opts.max_iters < 1) fail(Errc::config, "fixed-point iteration budget must be positive");

  const Decomposition dec = build_decomposition(nl, g.dim);
  const Eigen::VectorXd mask = control_mask(g, omega);

  const DiscreteOperatorSet ops0 = assemble(g, base, sched);
  SpaceTimeField traj = solve_forward(ops0, y0);

  PicardResult result;
  CoefficientSet prev;
  bool converged = false;

  for (int k = 0; k < opts.max_iters; ++k) {
    CoefficientSet coeffs = freeze_potentials(g, base, dec, traj);
    if (k > 0 && potentials_equal(coeffs, prev)) {
      converged = true;
      break;
    }

    const DiscreteOperatorSet ops = assemble(g, coeffs, sched);
    const StatePair target = reduce_target(ops, y0, y1);
    ControlSolution sol = minimize_J(ops, mask, target, eps, opts.minimize);
    SpaceTimeField next = solve_forward(ops, y0, &sol.control);
    if (opts.damping != 1.0) {
      for (size_t n = 0; n < next.frames.size(); ++n) {
        next.frames[n] = opts.damping * next.frames[n] + (1.0 - opts.damping) * traj.frames[n];
      }
    }

    const double residual = space_time_h1_distance(g, next, traj);
    result.history.push_back({k + 1, residual, sol.cost, sol.target_gap});
    result.solution = std::move(sol);
    result.iterations = k + 1;
    traj = std::move(next);
    prev = std::move(coeffs);

    if (residual <= opts.tol_fp) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    const double last = result.history.empty() ? 0.0 : result.history.back().fp_residual;
    throw PicardNonConvergence("fixed-point iteration did not reach " + std::to_string(opts.tol_fp) +
                                   " within " + std::to_string(opts.max_iters) +
                                   " iterations (last residual " + std::to_string(last) + ")",
                               std::move(result.history));
  }

  result.trajectory = std::move(traj);
  const SpaceTimeField nl_traj =
      solve_forward_nonlinear(g, base, sched, nl, y0, result.solution.control);
  result.nonlinear_terminal = nl_traj.frames.back();
  result.nonlinear_gap = norm_mu(g, result.nonlinear_terminal - y1);
  if (result.nonlinear_gap > eps * (1.0 + 1e-2)) {
    fail(Errc::convergence,
         "control verified poorly through the nonlinear dynamics: linear gap " +
             std::to_string(result.solution.target_gap) + ", nonlinear gap " +
             std::to_string(result.nonlinear_gap) + ", radius " + std::to_string(eps));
  }
  return result;
}

SpaceTimeField solve_forward_nonlinear(const Grid& g, const CoefficientSet& base,
                                       const TimeSchedule& sched, const Nonlinearity& nl,
                                       const StatePair& y0, const SpaceTimeField& control) {
  const DiscreteOperatorSet ops = assemble(g, base, sched);
  check_shape(g, y0, "nonlinear forward");
  if (control.frames.size() != static_cast<size_t>(sched.nt)) {
    fail(Errc::config, "nonlinear forward: control must carry one frame per step");
  }

  auto& cache = step_cache(ops);
  const int nb = g.n_bulk(), n = ops.n(), nt = sched.nt;
  const double dt = sched.dt();
  const double theta = sched.theta;

  SpaceTimeField out;
  out.times.resize(nt + 1);
  out.frames.resize(nt + 1);

  Eigen::VectorXd y(n);
  y.head(nb) = y0.bulk;
  y.tail(n - nb) = y0.bdry;
  out.times(0) = 0.0;
  out.frames[0] = {y.head(nb), y.tail(n - nb)};

  const int max_inner = 50;
  Eigen::VectorXd rhs(n), stage(n);
  for (int step = 0; step < nt; ++step) {
    rhs.noalias() = cache.expl[ops.drift_index[step]] * y;
    rhs.head(nb) += dt * g.cell_volume.cwiseProduct(control.frames[step].bulk);
    rhs -= ((1.0 - theta) * dt) * nonlinear_source(g, nl, y);

    Eigen::VectorXd z = y;
    bool settled = false;
    for (int inner = 0; inner < max_inner; ++inner) {
      stage = rhs - (theta * dt) * nonlinear_source(g, nl, z);
      Eigen::VectorXd z_new = cache.lu[ops.drift_index[step + 1]]->solve(stage);
      if (!z_new.allFinite()) {
        fail(Errc::solver, "nonlinear forward: nonfinite stage at step " + std::to_string(step + 1));
      }
      const double diff = (z_new - z).lpNorm<Eigen::Infinity>();
      z = std::move(z_new);
      if (diff <= 1e-12 * (1.0 + z.lpNorm<Eigen::Infinity>())) {
        settled = true;
        break;
      }
    }
    if (!settled) {
      fail(Errc::convergence,
           "nonlinear stage fixed point stalled at step " + std::to_string(step + 1));
    }
    y = std::move(z);
    out.times(step + 1) = sched.node_time(step + 1);
    out.frames[step + 1] = {y.head(nb), y.tail(n - nb)};
  }
  return out;
}

}  // namespace wentzell
