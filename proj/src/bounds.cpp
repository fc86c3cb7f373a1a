#include "wentzell/bounds.hpp"

#include <cmath>
#include <limits>

#include "wentzell/errors.hpp"

namespace wentzell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest exponent exp() can take without overflowing a double.
constexpr double kMaxExp = 709.0;

BoundValue exp_times(double exponent, double factor) {
  BoundValue out;
  if (factor == 0.0) {
    out.value = 0.0;
    return out;
  }
  const double log_value = exponent + std::log(factor);
  if (log_value > kMaxExp) {
    out.value = kInf;
    out.overflow = true;
    return out;
  }
  out.value = std::exp(log_value);
  return out;
}

void check_horizon(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) fail(Errc::config, "horizon must be positive and finite");
}

void check_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(Errc::config, "eps must be positive and finite");
}

}  // namespace

double eval_N(double T, const CoefficientSupNorms& s) {
  check_horizon(T);
  const double sq = s.B * s.B + s.B_gamma * s.B_gamma;
  return 1.0 + 1.0 / T + T * (s.a + s.b + sq) + std::pow(s.a, 2.0 / 3.0) +
         std::pow(s.b, 2.0 / 3.0) + sq;
}

double eval_M(const CoefficientSupNorms& s, const SobolevNorms& target) {
  const double sq = s.B * s.B + s.B_gamma * s.B_gamma;
  return s.a + s.b + sq + (s.a + s.b) * target.l2 + (s.B + s.B_gamma) * target.h1 + target.h2;
}

BoundValue eval_cost_bound(const BoundInputs& in) {
  check_eps(in.eps);
  if (in.target.l2 == 0.0) return BoundValue{0.0, false};
  const double N = eval_N(in.T, in.sups);
  const double M = eval_M(in.sups, in.target);
  return exp_times(in.kappa * (N + M / in.eps), in.target.l2);
}

BoundValue eval_obs_constant(double T, const CoefficientSupNorms& s, double kappa_obs) {
  check_horizon(T);
  const double sq = s.B * s.B + s.B_gamma * s.B_gamma;
  const double expo = 1.0 + 1.0 / T + T * (s.a + s.b + s.B + s.B_gamma) + sq +
                      std::pow(s.a, 2.0 / 3.0) + std::pow(s.b, 2.0 / 3.0);
  return exp_times(kappa_obs * expo, 1.0);
}

DeltaBreakdown choose_delta(const BoundInputs& in, double calibrated_C) {
  check_horizon(in.T);
  check_eps(in.eps);
  if (!(calibrated_C > 0.0)) fail(Errc::config, "calibrated constant must be positive");

  DeltaBreakdown out;
  out.S = in.sups.a + in.sups.b + in.sups.B * in.sups.B + in.sups.B_gamma * in.sups.B_gamma;
  out.cap_T = in.T;

  out.cap_h2 =
      in.target.h2 > 0.0 ? in.eps / (3.0 * calibrated_C * in.target.h2) : kInf;

  const double react = in.sups.a + in.sups.b;
  if (react > 0.0 && in.target.l2 > 0.0) {
    const double arg = std::log1p(in.eps / (3.0 * react * in.target.l2));
    out.K1 = out.S > 0.0 ? arg / out.S : kInf;
  } else {
    out.K1 = kInf;
  }

  const double drift_sq = in.sups.B * in.sups.B + in.sups.B_gamma * in.sups.B_gamma;
  if (drift_sq > 0.0 && in.target.h1 > 0.0) {
    const double arg = std::log1p(in.eps / (3.0 * drift_sq * in.target.h1));
    out.K2 = out.S > 0.0 ? arg / out.S : kInf;
  } else {
    out.K2 = kInf;
  }

  out.delta = std::min(std::min(out.cap_T, out.cap_h2), std::min(out.K1, out.K2));
  return out;
}

double eval_L(double S, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) fail(Errc::config, "delta must be finite and nonnegative");
  if (S < 0.0) fail(Errc::config, "S must be nonnegative");
  if (S == 0.0) return delta;
  return std::expm1(delta * S) / S;
}

// The frozen potentials obey |a|, |B| <= L_F in the bulk and |b|, |Bg| <= L_G
// on the boundary, so the semilinear constants reuse the linear templates at
// those worst-case sup norms.
CoefficientSupNorms lipschitz_sups(double L_F, double L_G) {
  if (!(L_F >= 0.0) || !(L_G >= 0.0) || !std::isfinite(L_F) || !std::isfinite(L_G))
    fail(Errc::config, "Lipschitz constants must be nonnegative and finite");
  CoefficientSupNorms s;
  s.a = L_F;
  s.B = L_F;
  s.b = L_G;
  s.B_gamma = L_G;
  return s;
}

double eval_semilinear_N1(double T, double L_F, double L_G) {
  return eval_N(T, lipschitz_sups(L_F, L_G));
}

double eval_semilinear_M1(double L_F, double L_G, const SobolevNorms& target) {
  return eval_M(lipschitz_sups(L_F, L_G), target);
}

BoundValue eval_semilinear_bound(double T, double eps, double L_F, double L_G,
                                 const SobolevNorms& target, double kappa) {
  check_eps(eps);
  if (target.l2 == 0.0) return BoundValue{0.0, false};
  const double N1 = eval_semilinear_N1(T, L_F, L_G);
  const double M1 = eval_semilinear_M1(L_F, L_G, target);
  return exp_times(kappa * (N1 + M1 / eps), target.l2);
}

double calibrate_kappa(const std::vector<SweepRecord>& records, double N, double M,
                       double target_l2) {
  if (records.empty()) fail(Errc::config, "kappa calibration needs at least one sweep record");
  if (!(target_l2 > 0.0)) fail(Errc::config, "kappa calibration needs a nonzero target");
  if (!(N > 0.0) || M < 0.0) fail(Errc::config, "kappa calibration needs N > 0 and M >= 0");

  double kappa = 0.0;
  for (const auto& r : records) {
    check_eps(r.eps);
    if (!(r.cost >= 0.0) || !std::isfinite(r.cost)) {
      fail(Errc::config, "kappa calibration saw a non-finite cost");
    }
    if (r.cost == 0.0) continue;
    const double denom = N + M / r.eps;
    kappa = std::max(kappa, std::log(r.cost / target_l2) / denom);
  }

  // log/exp roundoff can leave the extremal record a hair above the bound;
  // round kappa up by ulps until the envelope verifies.
  auto envelopes = [&](double k) {
    for (const auto& r : records) {
      if (r.cost == 0.0) continue;
      const BoundValue b = exp_times(k * (N + M / r.eps), target_l2);
      if (!b.overflow && b.value < r.cost) return false;
    }
    return true;
  };
  for (int tries = 0; tries < 100 && !envelopes(kappa); ++tries) {
    kappa = std::nextafter(kappa, kInf);
  }
  return kappa;
}

}  // namespace wentzell
