#include "wentzell/carleman.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "wentzell/adjoint.hpp"
#include "wentzell/control.hpp"
#include "wentzell/errors.hpp"
#include "wentzell/forward.hpp"

namespace wentzell {

namespace {

// exp(-746) underflows; below this the space-time weight is an exact zero.
constexpr double kLogFloor = -745.0;

double axis_profile(double x, double extent, double center) {
  const double pi = 3.14159265358979323846;
  if (x <= center) return std::sin(pi * x / (2.0 * center));
  return std::sin(pi * (extent - x) / (2.0 * (extent - center)));
}

StatePair unpack(const Grid& g, const Eigen::VectorXd& x) {
  StatePair s;
  s.bulk = x.head(g.n_bulk());
  s.bdry = x.tail(g.n_bdry());
  return s;
}

Eigen::VectorXd pack(const StatePair& s) {
  Eigen::VectorXd x(s.bulk.size() + s.bdry.size());
  x << s.bulk, s.bdry;
  return x;
}

}  // namespace

Eigen::VectorXd build_morse(const Grid& g, const Box& omega) {
  double center[2] = {0, 0};
  for (int ax = 0; ax < g.dim; ++ax) {
    if (!(omega.lo[ax] < omega.hi[ax])) fail(Errc::geometry, "control region must have positive extent");
    center[ax] = 0.5 * (omega.lo[ax] + omega.hi[ax]);
    if (center[ax] < g.spacing[ax] || center[ax] > g.extent[ax] - g.spacing[ax]) {
      fail(Errc::geometry, "control-region center lies within one cell of the boundary");
    }
  }

  Eigen::VectorXd eta0 = Eigen::VectorXd::Zero(g.n_total());
  for (int c = 0; c < g.n_bulk(); ++c) {
    double val = 1.0;
    for (int ax = 0; ax < g.dim; ++ax) {
      val *= axis_profile(g.bulk_coord(c, ax), g.extent[ax], center[ax]);
    }
    eta0[c] = val;
  }
  return eta0;
}

CarlemanWeights build_weights(const Grid& g, const Box& omega, double m, double lambda,
                              double s, double T) {
  if (!(m > 1.0) || !std::isfinite(m)) fail(Errc::config, "weight exponent m must exceed 1");
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) fail(Errc::config, "lambda must be at least 1");
  if (!(s >= 1.0) || !std::isfinite(s)) fail(Errc::config, "s must be at least 1");
  if (!(T > 0.0) || !std::isfinite(T)) fail(Errc::config, "horizon must be positive and finite");

  CarlemanWeights w;
  w.eta0 = build_morse(g, omega);
  w.eta0_max = 1.0;
  w.m = m;
  w.lambda = lambda;
  w.s = s;
  w.T = T;
  return w;
}

WeightValue eval_weights(const CarlemanWeights& w, int node, double t) {
  if (node < 0 || node >= w.eta0.size()) fail(Errc::config, "weight node index out of range");
  if (!(t > 0.0) || !(t < w.T)) fail(Errc::config, "weights are defined on the open time interval only");

  const double tau = t * (w.T - t);
  const double e_node = w.lambda * (w.m * w.eta0_max + w.eta0[node]);
  WeightValue v;
  v.xi = std::exp(e_node) / tau;
  v.alpha = (std::exp(2.0 * w.lambda * w.m * w.eta0_max) - std::exp(e_node)) / tau;
  return v;
}

double carleman_ratio(const DiscreteOperatorSet& ops, const CarlemanWeights& w,
                      const Eigen::VectorXd& mask, const StatePair& phiT) {
  const Grid& g = ops.grid;
  check_shape(g, phiT, "carleman ratio terminal state");
  if (w.eta0.size() != g.n_total()) fail(Errc::config, "weights were built for a different grid");
  if (mask.size() != g.n_bulk()) fail(Errc::config, "mask size does not match the grid");
  if (norm_mu(g, phiT) == 0.0) fail(Errc::config, "carleman ratio needs a nonzero terminal state");

  const AdjointSolution adj = solve_adjoint(ops, phiT);
  const int nt = ops.schedule.nt;
  const double dt = ops.schedule.dt();
  const double T = ops.schedule.T;

  // alpha(x,t) = num_alpha(x)/(t(T-t)); the minimum over the evaluation set
  // sits at the largest eta0 and the largest t(T-t).
  const double peak = std::exp(2.0 * w.lambda * w.m * w.eta0_max);
  Eigen::VectorXd e_node(g.n_total()), num_alpha(g.n_total());
  for (int i = 0; i < g.n_total(); ++i) {
    e_node[i] = w.lambda * (w.m * w.eta0_max + w.eta0[i]);
    num_alpha[i] = peak - std::exp(e_node[i]);
  }
  const double num_alpha_min = num_alpha.minCoeff();
  double tau_max = 0.0;
  for (int n = 1; n < nt; ++n) {
    const double t = ops.schedule.node_time(n);
    tau_max = std::max(tau_max, t * (T - t));
  }
  const double alpha_min = num_alpha_min / tau_max;

  double domain_sum = 0.0;
  double omega_sum = 0.0;
  for (int n = 1; n < nt; ++n) {
    const double t = ops.schedule.node_time(n);
    const double tau = t * (T - t);
    const double log_tau = std::log(tau);
    const StatePair& phi = adj.nodes.frames[n];
    for (int c = 0; c < g.n_bulk(); ++c) {
      const double lw = 3.0 * (e_node[c] - log_tau) - 2.0 * w.s * (num_alpha[c] / tau - alpha_min);
      if (lw < kLogFloor) continue;
      const double cell = g.cell_volume[c] * std::exp(lw) * phi.bulk[c] * phi.bulk[c];
      domain_sum += cell;
      if (mask[c] != 0.0) omega_sum += cell;
    }
    for (int i = 0; i < g.n_bdry(); ++i) {
      const int node = g.n_bulk() + i;
      const double lw = 3.0 * (e_node[node] - log_tau) - 2.0 * w.s * (num_alpha[node] / tau - alpha_min);
      if (lw < kLogFloor) continue;
      domain_sum += g.bdry_weight[i] * std::exp(lw) * phi.bdry[i] * phi.bdry[i];
    }
  }

  if (omega_sum == 0.0) {
    fail(Errc::solver, "adjoint solution vanished on the control region, observation degenerate");
  }
  const double ratio = (dt * domain_sum) / (dt * omega_sum);
  if (!std::isfinite(ratio)) fail(Errc::solver, "carleman ratio is not finite");
  return ratio;
}

namespace {

// Quadratic-form apply for the numerator of the observability quotient:
// x -> M S M^{-1} (M E x) where E is the adjoint propagator and S the
// zero-control forward propagator, so x^T A x = |Phi(0)|_mu^2.
Eigen::VectorXd numerator_apply(const DiscreteOperatorSet& ops, const Eigen::VectorXd& x) {
  const StatePair phi0 = solve_adjoint(ops, unpack(ops.grid, x)).nodes.frames.front();
  const StatePair forwarded = uncontrolled_terminal(ops, phi0);
  Eigen::VectorXd out = pack(forwarded);
  out.array() *= ops.mass.array();
  return out;
}

// x -> M Lambda x + sigma x, the (shifted) denominator form.
Eigen::VectorXd denominator_apply(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                                  double sigma, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = pack(gramian_apply(ops, mask, unpack(ops.grid, x)));
  out.array() *= ops.mass.array();
  out += sigma * x;
  return out;
}

Eigen::VectorXd rademacher(std::mt19937_64& gen, int n) {
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) z[i] = (gen() & 1ULL) ? 1.0 : -1.0;
  return z;
}

Eigen::VectorXd conjugate_gradient(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                                   double sigma, const Eigen::VectorXd& rhs) {
  const int n = static_cast<int>(rhs.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const double target = 1e-24 * rhs.squaredNorm();
  const int maxit = std::max(200, 4 * n);
  for (int k = 0; k < maxit && rr > target; ++k) {
    const Eigen::VectorXd ap = denominator_apply(ops, mask, sigma, p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) fail(Errc::solver, "observability pencil lost positive definiteness");
    const double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (rr > 1e-16 * rhs.squaredNorm()) fail(Errc::solver, "observability pencil solve stalled");
  return x;
}

}  // namespace

double empirical_obs_constant(const DiscreteOperatorSet& ops, const Eigen::VectorXd& mask,
                              const ObsConstantOptions& opts) {
  const Grid& g = ops.grid;
  if (mask.size() != g.n_bulk()) fail(Errc::config, "mask size does not match the grid");
  if (mask.cwiseAbs().sum() == 0.0) fail(Errc::geometry, "observation region is empty");

  const int n = g.n_total();
  std::mt19937_64 gen(opts.seed);

  // Trace-scale shift shared verbatim by both branches; the dense path could
  // use the exact trace but then the two routes would disagree.
  double trace_est = 0.0;
  const int probes = 16;
  for (int k = 0; k < probes; ++k) {
    const Eigen::VectorXd z = rademacher(gen, n);
    Eigen::VectorXd gz = pack(gramian_apply(ops, mask, unpack(g, z)));
    gz.array() *= ops.mass.array();
    trace_est += z.dot(gz);
  }
  trace_est /= probes;
  const double sigma = std::max(1e-12 * trace_est / n, 1e-300);

  if (n <= opts.dense_limit) {
    Eigen::MatrixXd A(n, n), B(n, n);
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e[j] = 1.0;
      A.col(j) = numerator_apply(ops, e);
      B.col(j) = denominator_apply(ops, mask, sigma, e);
    }
    A = 0.5 * (A + A.transpose()).eval();
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) fail(Errc::solver, "dense pencil eigensolve failed");
    return solver.eigenvalues().maxCoeff();
  }

  Eigen::VectorXd x = rademacher(gen, n);
  x.normalize();
  for (int k = 0; k < opts.power_iters; ++k) {
    const Eigen::VectorXd ax = numerator_apply(ops, x);
    Eigen::VectorXd z = conjugate_gradient(ops, mask, sigma, ax);
    const double nz = z.norm();
    if (nz == 0.0) fail(Errc::solver, "power iteration collapsed to zero");
    x = z / nz;
  }
  const double num = x.dot(numerator_apply(ops, x));
  const double den = x.dot(denominator_apply(ops, mask, sigma, x));
  if (!(den > 0.0)) fail(Errc::solver, "observability pencil lost positive definiteness");
  return num / den;
}

}  // namespace wentzell
