#include "wentzell/coefficients.hpp"

#include <cmath>
#include <string>

#include "wentzell/errors.hpp"

namespace wentzell {

namespace {
constexpr double kDiffusivityFloor = 1e-8;

void check_samples(const ScalarField& f, int n_nodes, int nt, const char* name) {
  if (f.samples.size() != 1 && f.samples.size() != static_cast<size_t>(nt + 1))
    fail(Errc::config, std::string("coefficients: ") + name + " must have 1 or nt+1 samples");
  for (const auto& s : f.samples) {
    if (s.size() != n_nodes)
      fail(Errc::config, std::string("coefficients: ") + name + " sample has wrong node count");
    if (!s.allFinite()) fail(Errc::config, std::string("coefficients: ") + name + " has nonfinite entries");
  }
}
}  // namespace

ScalarField constant_scalar_field(int n_nodes, double value) {
  return {{Eigen::VectorXd::Constant(n_nodes, value)}};
}

VectorField constant_vector_field(int n_nodes, int dim, const Eigen::VectorXd& value) {
  Eigen::MatrixXd s(n_nodes, dim);
  for (int ax = 0; ax < dim; ++ax) s.col(ax).setConstant(value(ax));
  return {{s}};
}

CoefficientSet constant_coefficients(const Grid& g, double A, double A_gamma, double a, double b,
                                     const Eigen::VectorXd& B, double B_gamma) {
  if (B.size() != g.dim) fail(Errc::config, "coefficients: drift dimension does not match grid");
  CoefficientSet c;
  c.A = Eigen::VectorXd::Constant(g.n_bulk(), A);
  c.A_gamma = Eigen::VectorXd::Constant(g.n_bdry(), A_gamma);
  c.a = constant_scalar_field(g.n_bulk(), a);
  c.b = constant_scalar_field(g.n_bdry(), b);
  c.B = constant_vector_field(g.n_bulk(), g.dim, B);
  c.B_gamma = constant_scalar_field(g.n_bdry(), B_gamma);
  return c;
}

void validate_coefficients(const Grid& g, const TimeSchedule& sched, const CoefficientSet& c) {
  if (c.A.size() != g.n_bulk() || c.A_gamma.size() != g.n_bdry())
    fail(Errc::config, "coefficients: diffusivity node counts do not match grid");
  if (!c.A.allFinite() || !c.A_gamma.allFinite())
    fail(Errc::config, "coefficients: diffusivity has nonfinite entries");
  if (c.A.minCoeff() < kDiffusivityFloor || c.A_gamma.minCoeff() < kDiffusivityFloor)
    fail(Errc::config, "coefficients: diffusivity below positivity floor 1e-8");

  check_samples(c.a, g.n_bulk(), sched.nt, "a");
  check_samples(c.b, g.n_bdry(), sched.nt, "b");
  check_samples(c.B_gamma, g.n_bdry(), sched.nt, "B_gamma");

  if (c.B.samples.size() != 1 && c.B.samples.size() != static_cast<size_t>(sched.nt + 1))
    fail(Errc::config, "coefficients: B must have 1 or nt+1 samples");
  for (const auto& s : c.B.samples) {
    if (s.rows() != g.n_bulk() || s.cols() != g.dim)
      fail(Errc::config, "coefficients: B sample has wrong shape");
    if (!s.allFinite()) fail(Errc::config, "coefficients: B has nonfinite entries");
  }
}

CoefficientSupNorms coefficient_sup_norms(const CoefficientSet& c) {
  CoefficientSupNorms s;
  for (const auto& v : c.a.samples) s.a = std::max(s.a, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
  for (const auto& v : c.b.samples) s.b = std::max(s.b, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
  for (const auto& v : c.B_gamma.samples)
    s.B_gamma = std::max(s.B_gamma, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
  for (const auto& m : c.B.samples)
    if (m.size()) s.B = std::max(s.B, m.rowwise().norm().maxCoeff());
  return s;
}

bool coefficients_time_constant(const CoefficientSet& c) {
  return c.a.time_constant() && c.b.time_constant() && c.B.time_constant() &&
         c.B_gamma.time_constant();
}

}  // namespace wentzell
