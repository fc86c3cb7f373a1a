#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "wentzell/forward.hpp"
#include "wentzell/semilinear.hpp"

using namespace wentzell;

namespace {

bool bits_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

bool bits_equal(const StatePair& a, const StatePair& b) {
  return bits_equal(a.bulk, b.bulk) && bits_equal(a.bdry, b.bdry);
}

// guarded sinc/tanhc so the references stay accurate near 0
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}
double tanhc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 3.0;
  return std::tanh(x) / x;
}

NonlinearTerm term(NonlinShape shape, double gain, int arg = 0) {
  NonlinearTerm t;
  t.shape = shape;
  t.gain = gain;
  t.arg = arg;
  return t;
}

const NonlinearTerm kOff = term(NonlinShape::none, 0.0);

StatePair bump_target(const Grid& g) {
  StatePair y1 = zero_state(g);
  for (int c = 0; c < g.n_bulk(); ++c) {
    const double x = g.bulk_coord(c, 0);
    y1.bulk(c) = std::exp(-50.0 * (x - 0.5) * (x - 0.5));
  }
  return y1;
}

CoefficientSet zero_potential_base(const Grid& g) {
  return constant_coefficients(g, 1.0, 1.0, 0.0, 0.0, Eigen::VectorXd::Zero(g.dim), 0.0);
}

}  // namespace

TEST_CASE("nonlinearity registration") {
  SUBCASE("argument selectors are bounded by the dimension") {
    CHECK_THROWS_AS(make_nonlinearity(term(NonlinShape::sine, 0.1, 2), kOff, 0.1, 0.0, 1), Error);
    CHECK_NOTHROW(make_nonlinearity(term(NonlinShape::sine, 0.1, 2), kOff, 0.1, 0.0, 2));
    CHECK_THROWS_AS(make_nonlinearity(kOff, term(NonlinShape::sine, 0.1, 2), 0.0, 0.1, 2), Error);
  }
  SUBCASE("a declared Lipschitz constant below the actual slope is rejected") {
    try {
      make_nonlinearity(term(NonlinShape::sine, 1.0), kOff, 0.5, 0.0, 1);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.errc() == Errc::config);
    }
  }
  SUBCASE("gains and negative gains register with matching constants") {
    CHECK_NOTHROW(make_nonlinearity(term(NonlinShape::sine, 0.1), kOff, 0.1, 0.0, 1));
    CHECK_NOTHROW(make_nonlinearity(term(NonlinShape::tanh, -0.3), kOff, 0.3, 0.0, 1));
    CHECK_NOTHROW(make_nonlinearity(kOff, term(NonlinShape::ramp, 0.4, 1), 0.0, 0.4, 2));
  }
  SUBCASE("non-finite gain is rejected") {
    CHECK_THROWS_AS(
        make_nonlinearity(term(NonlinShape::linear, std::nan("")), kOff, 1.0, 0.0, 1), Error);
  }
}

TEST_CASE("potential extraction closed forms") {
  const Eigen::VectorXd p0 = Eigen::VectorXd::Zero(1);
  SUBCASE("linear: the potential is the gain itself") {
    const auto dec = build_decomposition(
        make_nonlinearity(term(NonlinShape::linear, 0.7), kOff, 0.7, 0.0, 1), 1);
    for (double s : {-2.1, -0.3, 0.0, 0.9, 3.4}) {
      CHECK(dec.F1(s, p0) == doctest::Approx(0.7).epsilon(1e-9));
      CHECK(dec.F2(s, p0)(0) == 0.0);
    }
  }
  SUBCASE("sine of the state: F1 = gain sin(s)/s, one at the origin") {
    const auto dec =
        build_decomposition(make_nonlinearity(term(NonlinShape::sine, 1.0), kOff, 1.0, 0.0, 1), 1);
    for (double s : {0.0, 0.4, -1.3, 2.9}) {
      CHECK(dec.F1(s, p0) == doctest::Approx(sinc(s)).epsilon(1e-9));
    }
  }
  SUBCASE("tanh of the state") {
    const auto dec = build_decomposition(
        make_nonlinearity(term(NonlinShape::tanh, 2.0), kOff, 2.0, 0.0, 1), 1);
    for (double s : {0.0, -0.8, 1.6}) {
      CHECK(dec.F1(s, p0) == doctest::Approx(2.0 * tanhc(s)).epsilon(1e-9));
    }
  }
  SUBCASE("ramp: saturation gives gain/|s| past the kink") {
    const auto dec = build_decomposition(
        make_nonlinearity(term(NonlinShape::ramp, 1.5), kOff, 1.5, 0.0, 1), 1);
    CHECK(dec.F1(0.6, p0) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(dec.F1(2.0, p0) == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(dec.F1(-1.7, p0) == doctest::Approx(1.5 / 1.7).epsilon(1e-8));
  }
  SUBCASE("gradient argument routes to the drift slot") {
    const auto dec = build_decomposition(
        make_nonlinearity(term(NonlinShape::sine, 0.8, 1), kOff, 0.8, 0.0, 1), 1);
    Eigen::VectorXd p(1);
    for (double q : {0.0, 0.5, -1.9}) {
      p(0) = q;
      CHECK(dec.F1(1.3, p) == 0.0);
      CHECK(dec.F2(1.3, p)(0) == doctest::Approx(0.8 * sinc(q)).epsilon(1e-9));
    }
  }
  SUBCASE("boundary term uses the same machinery") {
    const auto dec = build_decomposition(
        make_nonlinearity(kOff, term(NonlinShape::tanh, 0.5), 0.0, 0.5, 1), 1);
    CHECK(dec.G1(1.1, 0.3) == doctest::Approx(0.5 * tanhc(1.1)).epsilon(1e-9));
    CHECK(dec.G2(1.1, 0.3) == 0.0);
  }
  SUBCASE("reconstruction identity and sup bounds on a probe sweep") {
    const auto dec = build_decomposition(
        make_nonlinearity(term(NonlinShape::ramp, 1.2, 1), kOff, 1.2, 0.0, 1), 1);
    Eigen::VectorXd p(1);
    for (double s : {-1.7, -0.6, 0.0, 0.4, 1.3}) {
      for (double q : {-1.4, 0.0, 0.9, 2.5}) {
        p(0) = q;
        const double f = 1.2 * std::clamp(q, -1.0, 1.0);
        const double rebuilt = dec.F1(s, p) * s + dec.F2(s, p).dot(p);
        CHECK(std::abs(rebuilt - f) <= 1e-8 * (1.0 + std::abs(f)));
        CHECK(std::abs(dec.F1(s, p)) <= 1.2 * 1.01 + 1e-12);
        CHECK(std::abs(dec.F2(s, p)(0)) <= 1.2 * 1.01 + 1e-12);
      }
    }
  }
}

TEST_CASE("potential freezing along a trajectory") {
  const Grid g = make_grid({1.0}, {12});
  const TimeSchedule sched = make_schedule(0.5, 8, 0.5);
  const CoefficientSet base = zero_potential_base(g);
  const DiscreteOperatorSet ops = assemble(g, base, sched);
  StatePair y0 = bump_target(g);
  y0.bdry.setConstant(0.2);
  const SpaceTimeField traj = solve_forward(ops, y0, nullptr);

  SUBCASE("linear bulk term freezes to a near-constant reaction") {
    const auto dec = build_decomposition(
        make_nonlinearity(term(NonlinShape::linear, 0.4), kOff, 0.4, 0.0, 1), 1);
    const CoefficientSet frozen = freeze_potentials(g, base, dec, traj);
    for (const auto& sample : frozen.a.samples) {
      REQUIRE(sample.size() == g.n_bulk());
      for (int i = 0; i < sample.size(); ++i)
        CHECK(sample(i) == doctest::Approx(0.4).epsilon(1e-8));
    }
    for (const auto& sample : frozen.B.samples) CHECK(sample.cwiseAbs().maxCoeff() == 0.0);
    for (const auto& sample : frozen.b.samples) CHECK(sample.cwiseAbs().maxCoeff() == 0.0);
    CHECK(bits_equal(frozen.A, base.A));
    CHECK(bits_equal(frozen.A_gamma, base.A_gamma));
  }
  SUBCASE("boundary tanh freezes into the boundary reaction") {
    const auto dec = build_decomposition(
        make_nonlinearity(kOff, term(NonlinShape::tanh, 0.5), 0.0, 0.5, 1), 1);
    const CoefficientSet frozen = freeze_potentials(g, base, dec, traj);
    REQUIRE(!frozen.b.samples.empty());
    const Eigen::VectorXd& b0 = frozen.b.samples.front();
    REQUIRE(b0.size() == g.n_bdry());
    for (int i = 0; i < g.n_bdry(); ++i) {
      const double tr = traj.frames.front().bdry(i);
      CHECK(b0(i) == doctest::Approx(0.5 * tanhc(tr)).epsilon(1e-8));
    }
    for (const auto& sample : frozen.a.samples) CHECK(sample.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("a vanished nonlinearity collapses to one time-constant zero sample") {
    const auto dec = build_decomposition(make_nonlinearity(kOff, kOff, 0.0, 0.0, 1), 1);
    const CoefficientSet frozen = freeze_potentials(g, base, dec, traj);
    CHECK(frozen.a.time_constant());
    CHECK(frozen.B.time_constant());
    CHECK(frozen.b.time_constant());
    CHECK(frozen.B_gamma.time_constant());
    CHECK(frozen.a.samples.front().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("nonlinear sweep reduces to the linear one when both terms vanish") {
  const Grid g = make_grid({1.0}, {16});
  const TimeSchedule sched = make_schedule(0.4, 12, 0.5);
  const CoefficientSet base = zero_potential_base(g);
  const DiscreteOperatorSet ops = assemble(g, base, sched);
  const Nonlinearity off = make_nonlinearity(kOff, kOff, 0.0, 0.0, 1);
  StatePair y0 = bump_target(g);
  y0.bdry.setConstant(-0.3);

  SpaceTimeField control;
  control.times.resize(sched.nt);
  control.frames.reserve(sched.nt);
  for (int n = 0; n < sched.nt; ++n) {
    control.times(n) = sched.control_time(n);
    StatePair frame = zero_state(g);
    for (int c = g.n_bulk() / 3; c < 2 * g.n_bulk() / 3; ++c)
      frame.bulk(c) = 0.1 * std::sin(1.0 + 0.7 * n + 0.3 * c);
    control.frames.push_back(frame);
  }

  const SpaceTimeField linear = solve_forward(ops, y0, &control);
  const SpaceTimeField nonlinear = solve_forward_nonlinear(g, base, sched, off, y0, control);
  REQUIRE(linear.frames.size() == nonlinear.frames.size());
  for (std::size_t k = 0; k < linear.frames.size(); ++k)
    CHECK(bits_equal(linear.frames[k], nonlinear.frames[k]));
}

TEST_CASE("fixed-point control construction") {
  const Grid g = make_grid({1.0}, {32});
  const Box omega{{0.3, 0.0}, {0.7, 0.0}};
  const CoefficientSet base = zero_potential_base(g);
  const StatePair y0 = zero_state(g);
  const StatePair y1 = bump_target(g);

  SUBCASE("vanishing nonlinearity converges in one sweep to the linear control") {
    const TimeSchedule sched = make_schedule(0.4, 12, 0.5);
    const Nonlinearity off = make_nonlinearity(kOff, kOff, 0.0, 0.0, 1);
    const DiscreteOperatorSet ops = assemble(g, base, sched);
    const Eigen::VectorXd mask = control_mask(g, omega);
    const double eps = 0.3 * norm_mu(g, y1);

    PicardOptions po;
    po.minimize.tol_rel = 1e-8;
    po.minimize.max_iters = 20000;
    const PicardResult res = picard_control(g, base, sched, omega, y0, y1, eps, off, po);
    const ControlSolution direct = minimize_J(ops, mask, y1, eps, po.minimize);

    CHECK(res.iterations == 1);
    CHECK(res.history.size() == 1);
    REQUIRE(res.solution.control.frames.size() == direct.control.frames.size());
    for (std::size_t k = 0; k < direct.control.frames.size(); ++k)
      CHECK(bits_equal(res.solution.control.frames[k], direct.control.frames[k]));
    CHECK(bits_equal(res.solution.terminal, direct.terminal));
    CHECK(bits_equal(res.nonlinear_terminal, res.solution.terminal));
    CHECK(res.nonlinear_gap == res.solution.target_gap);
  }
  SUBCASE("small sine nonlinearity converges with a certified nonlinear gap") {
    const TimeSchedule sched = make_schedule(1.0, 48, 0.5);
    const Nonlinearity nl =
        make_nonlinearity(term(NonlinShape::sine, 0.1), kOff, 0.1, 0.0, 1);
    const double eps = 0.25 * norm_mu(g, y1);

    PicardOptions po;
    po.tol_fp = 1e-6;
    po.minimize.tol_rel = 1e-7;
    po.minimize.max_iters = 20000;
    const PicardResult res = picard_control(g, base, sched, omega, y0, y1, eps, nl, po);
    CHECK(res.iterations <= 50);
    REQUIRE(!res.history.empty());
    CHECK(res.history.back().fp_residual <= 1e-6);
    CHECK(res.nonlinear_gap <= eps * 1.01);
    // the control lives on the control region only
    for (const auto& frame : res.solution.control.frames) {
      CHECK(frame.bdry.cwiseAbs().maxCoeff() == 0.0);
      for (int c = 0; c < g.n_bulk(); ++c) {
        const double x = g.bulk_coord(c, 0);
        if (x <= omega.lo[0] || x >= omega.hi[0]) CHECK(frame.bulk(c) == 0.0);
      }
    }
  }
  SUBCASE("an exhausted iteration budget raises a typed report with history") {
    const TimeSchedule sched = make_schedule(0.3, 12, 0.5);
    const Nonlinearity nl =
        make_nonlinearity(term(NonlinShape::sine, 0.5), kOff, 0.5, 0.0, 1);
    PicardOptions po;
    po.tol_fp = 1e-14;  // unreachable on purpose
    po.max_iters = 2;
    po.minimize.tol_rel = 1e-6;
    po.minimize.max_iters = 20000;
    const double eps = 0.5 * norm_mu(g, y1);
    try {
      picard_control(g, base, sched, omega, y0, y1, eps, nl, po);
      FAIL("expected a non-convergence report");
    } catch (const PicardNonConvergence& e) {
      CHECK(e.errc() == Errc::convergence);
      CHECK(e.history().size() == 2);
      CHECK(e.history().front().iteration == 1);
      CHECK(e.history().back().fp_residual > 1e-14);
    }
  }
  SUBCASE("the base coefficients must not smuggle in potentials") {
    const TimeSchedule sched = make_schedule(0.4, 8, 0.5);
    const CoefficientSet loaded =
        constant_coefficients(g, 1.0, 1.0, 0.3, 0.0, Eigen::VectorXd::Zero(1), 0.0);
    const Nonlinearity off = make_nonlinearity(kOff, kOff, 0.0, 0.0, 1);
    try {
      picard_control(g, loaded, sched, omega, y0, y1, 0.5 * norm_mu(g, y1), off);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.errc() == Errc::config);
    }
  }
  SUBCASE("damping must lie in (0,1]") {
    const TimeSchedule sched = make_schedule(0.4, 8, 0.5);
    const Nonlinearity off = make_nonlinearity(kOff, kOff, 0.0, 0.0, 1);
    for (double d : {0.0, -0.5, 1.5}) {
      PicardOptions po;
      po.damping = d;
      CHECK_THROWS_AS(
          picard_control(g, base, sched, omega, y0, y1, 0.5 * norm_mu(g, y1), off, po), Error);
    }
  }
}
