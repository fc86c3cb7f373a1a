#pragma once

// Dense reference implementations used only by the tests.  Everything here is
// built from the assembled matrices with dense linear algebra, independently
// of the sparse solver sweeps, so agreement is a two-route check.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "wentzell/operators.hpp"
#include "wentzell/state.hpp"

namespace oracle {

inline Eigen::VectorXd pack(const wentzell::StatePair& s) {
  Eigen::VectorXd x(s.bulk.size() + s.bdry.size());
  x << s.bulk, s.bdry;
  return x;
}

inline wentzell::StatePair unpack(const wentzell::Grid& g, const Eigen::VectorXd& x) {
  wentzell::StatePair s;
  s.bulk = x.head(g.n_bulk());
  s.bdry = x.tail(g.n_bdry());
  return s;
}

// Dense theta-scheme step matrices per time node:
//   imp(k) = M - theta dt (K - D_k),  expl(k) = M + (1-theta) dt (K - D_k).
struct DenseSystem {
  Eigen::VectorXd mass;
  std::vector<Eigen::MatrixXd> imp;
  std::vector<Eigen::MatrixXd> expl;
  double dt = 0;
  int nt = 0;
};

inline DenseSystem dense_system(const wentzell::DiscreteOperatorSet& ops) {
  DenseSystem sys;
  sys.mass = ops.mass;
  sys.dt = ops.schedule.dt();
  sys.nt = ops.schedule.nt;
  const Eigen::MatrixXd K = Eigen::MatrixXd(ops.stiffness);
  const Eigen::MatrixXd Mm = ops.mass.asDiagonal();
  const double th = ops.schedule.theta;
  sys.imp.resize(sys.nt + 1);
  sys.expl.resize(sys.nt + 1);
  for (int k = 0; k <= sys.nt; ++k) {
    const Eigen::MatrixXd G = K - Eigen::MatrixXd(ops.D(k));
    sys.imp[k] = Mm - th * sys.dt * G;
    sys.expl[k] = Mm + (1.0 - th) * sys.dt * G;
  }
  return sys;
}

// Free propagator over the full horizon: y(T) = S y(0) with
// S = A_nt^{-1} E_{nt-1} ... A_1^{-1} E_0.
inline Eigen::MatrixXd dense_propagator(const DenseSystem& sys) {
  const int n = static_cast<int>(sys.mass.size());
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < sys.nt; ++k) {
    S = (sys.imp[k + 1].partialPivLu().solve(sys.expl[k] * S)).eval();
  }
  return S;
}

// Control-to-terminal maps R_n, terminal = sum_n R_n dt M P v^n, built by the
// backward recursion R_{nt-1} = A_nt^{-1}, R_n = R_{n+1} E_{n+1} A_{n+1}^{-1}.
inline std::vector<Eigen::MatrixXd> dense_input_maps(const DenseSystem& sys) {
  const int nt = sys.nt;
  std::vector<Eigen::MatrixXd> R(nt);
  R[nt - 1] = sys.imp[nt].partialPivLu().solve(
      Eigen::MatrixXd::Identity(sys.mass.size(), sys.mass.size()));
  for (int n = nt - 2; n >= 0; --n) {
    R[n] = R[n + 1] * sys.expl[n + 1] * sys.imp[n + 1].partialPivLu().solve(
        Eigen::MatrixXd::Identity(sys.mass.size(), sys.mass.size()));
  }
  return R;
}

// Dense duality Gramian in state coordinates: Lambda = sum_n dt R_n MP R_n^T M
// with MP the masked bulk-volume diagonal.  <Lambda x, x>_mu is the squared
// observation cost, so M Lambda is symmetric PSD.
inline Eigen::MatrixXd dense_gramian(const wentzell::DiscreteOperatorSet& ops,
                                     const Eigen::VectorXd& mask) {
  const DenseSystem sys = dense_system(ops);
  const int n = static_cast<int>(sys.mass.size());
  const int nb = ops.grid.n_bulk();
  Eigen::VectorXd mp = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < nb; ++c)
    if (mask[c] != 0.0) mp[c] = ops.grid.cell_volume[c];
  const std::vector<Eigen::MatrixXd> R = dense_input_maps(sys);
  const Eigen::MatrixXd Mm = sys.mass.asDiagonal();
  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < sys.nt; ++k) {
    lambda += sys.dt * R[k] * mp.asDiagonal() * R[k].transpose() * Mm;
  }
  return lambda;
}

// Continuous-in-time terminal state for time-constant coefficients:
// y(T) = expm(T M^{-1}(K - D)) y(0).  Reference for step-size convergence.
inline wentzell::StatePair expm_terminal(const wentzell::DiscreteOperatorSet& ops,
                                         const wentzell::StatePair& y0) {
  if (!ops.time_constant()) throw std::logic_error("expm oracle needs constant coefficients");
  const Eigen::MatrixXd G = Eigen::MatrixXd(ops.stiffness) - Eigen::MatrixXd(ops.D(0));
  const Eigen::MatrixXd A =
      ops.schedule.T * ops.mass.cwiseInverse().asDiagonal().toDenseMatrix() * G;
  const Eigen::MatrixXd E = A.exp();
  return unpack(ops.grid, E * pack(y0));
}

struct KktSolution {
  Eigen::VectorXd phi;  // dual minimizer in state coordinates
  double nu = 0;        // eps / |phi|_mu
  double cost = 0;      // sqrt(<Lambda phi, phi>_mu)
  double gap = 0;       // |Lambda phi - y1|_mu, equals eps at the solution
};

// Dense KKT reference for the dual problem: find nu > 0 with
// nu |(Lambda + nu I)^{-1} y1|_mu = eps by bisection (the left side is
// strictly increasing in nu), then read off the minimizer.
inline KktSolution dense_kkt(const wentzell::DiscreteOperatorSet& ops,
                             const Eigen::VectorXd& mask, const wentzell::StatePair& y1,
                             double eps) {
  const Eigen::MatrixXd lambda = dense_gramian(ops, mask);
  const int n = static_cast<int>(lambda.rows());
  const Eigen::VectorXd rhs = pack(y1);
  const Eigen::VectorXd mu = ops.mass;
  auto mu_norm = [&mu](const Eigen::VectorXd& v) { return std::sqrt(v.dot(mu.cwiseProduct(v))); };

  const double ny1 = mu_norm(rhs);
  if (ny1 <= eps) throw std::logic_error("dense_kkt expects |y1| > eps");

  auto phi_of = [&](double nu) -> Eigen::VectorXd {
    Eigen::MatrixXd A = lambda;
    A.diagonal().array() += nu;
    return A.partialPivLu().solve(rhs);
  };
  auto g = [&](double nu) { return nu * mu_norm(phi_of(nu)); };

  double lo = 1e-300, hi = 1.0;
  while (g(hi) < eps) {
    hi *= 2.0;
    if (hi > 1e300) throw std::logic_error("dense_kkt bracket failed");
  }
  while (g(lo) > eps) lo *= 0.5;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < eps)
      lo = mid;
    else
      hi = mid;
  }

  KktSolution out;
  out.nu = 0.5 * (lo + hi);
  out.phi = phi_of(out.nu);
  const Eigen::VectorXd lphi = lambda * out.phi;
  out.cost = std::sqrt(std::max(0.0, out.phi.dot(mu.cwiseProduct(lphi))));
  out.gap = mu_norm(lphi - rhs);
  return out;
}

// Dense observability pencil: largest eigenvalue of (E^T M E, M Lambda + s I)
// with E the adjoint propagator.  Duality gives E^T M E = M S M^{-1} S^T M,
// so only the forward propagator is needed.  The shift sigma is part of the
// pencil definition, so the oracle reproduces the library's probe-based
// trace scale; the assembly and eigensolve stay independent.
inline double dense_obs_constant(const wentzell::DiscreteOperatorSet& ops,
                                 const Eigen::VectorXd& mask,
                                 std::uint64_t seed = 0x9e3779b97f4a7c15ULL) {
  const DenseSystem sys = dense_system(ops);
  const int n = static_cast<int>(sys.mass.size());
  const Eigen::MatrixXd S = dense_propagator(sys);
  const Eigen::MatrixXd Mm = sys.mass.asDiagonal();
  const Eigen::MatrixXd Minv = sys.mass.cwiseInverse().asDiagonal();
  Eigen::MatrixXd A = Mm * S * Minv * S.transpose() * Mm;
  Eigen::MatrixXd B = Mm * dense_gramian(ops, mask);
  std::mt19937_64 gen(seed);
  double trace_est = 0.0;
  const int probes = 16;
  for (int k = 0; k < probes; ++k) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = (gen() & 1ULL) ? 1.0 : -1.0;
    trace_est += z.dot(B * z);
  }
  trace_est /= probes;
  const double sigma = std::max(1e-12 * trace_est / n, 1e-300);
  B.diagonal().array() += sigma;
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      A, B, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) throw std::logic_error("oracle pencil solve failed");
  return solver.eigenvalues().maxCoeff();
}

}  // namespace oracle
