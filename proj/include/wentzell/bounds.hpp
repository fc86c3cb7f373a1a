#pragma once

#include <vector>

#include "wentzell/coefficients.hpp"
#include "wentzell/state.hpp"

namespace wentzell {

/// Inputs of the explicit cost-of-control evaluators: horizon, radius,
/// coefficient sup norms and the target's Sobolev norms, plus the calibration
/// factor kappa in the exponent.
struct BoundInputs {
  double T = 1.0;
  double eps = 0.1;
  CoefficientSupNorms sups;
  SobolevNorms target;
  double kappa = 1.0;
};

/// N = 1 + 1/T + T(|a| + |b| + |B|^2 + |Bg|^2) + |a|^{2/3} + |b|^{2/3}
///       + |B|^2 + |Bg|^2.
double eval_N(double T, const CoefficientSupNorms& s);

/// M = |a| + |b| + |B|^2 + |Bg|^2 + (|a| + |b|) l2 + (|B| + |Bg|) h1 + h2.
double eval_M(const CoefficientSupNorms& s, const SobolevNorms& target);

struct BoundValue {
  double value = 0;
  bool overflow = false;  // exponent exceed double range; value is +inf
};

/// exp(kappa (N + M/eps)) * l2, in log space so overflow is flagged, not NaN.
BoundValue eval_cost_bound(const BoundInputs& in);

/// Observability constant evaluator: exp(kappa_obs (1 + 1/T
///   + T(|a| + |b| + |B| + |Bg|) + |B|^2 + |Bg|^2 + |a|^{2/3} + |b|^{2/3})).
/// Note the first drift powers inside the T(...) term; the cost exponent N
/// carries squares there by design.
BoundValue eval_obs_constant(double T, const CoefficientSupNorms& s, double kappa_obs = 1.0);

/// Waiting-time selection delta = min{T, eps/(3 C h2), K1, K2} with
///   S  = |a| + |b| + |B|^2 + |Bg|^2,
///   K1 = ln(1 + eps/(3 (|a| + |b|) l2)) / S,
///   K2 = ln(1 + eps/(3 (|B|^2 + |Bg|^2) h1)) / S;
/// vanishing denominators mean the candidate is +infinity.
struct DeltaBreakdown {
  double delta = 0;
  double cap_T = 0;
  double cap_h2 = 0;  // eps/(3 C h2)
  double K1 = 0;
  double K2 = 0;
  double S = 0;
};
DeltaBreakdown choose_delta(const BoundInputs& in, double calibrated_C);

/// L(delta) = (e^{delta S} - 1)/S, continuously extended to delta at S = 0.
double eval_L(double S, double delta);

/// Semilinear analogues with Lipschitz constants in place of sup norms.
double eval_semilinear_N1(double T, double L_F, double L_G);
double eval_semilinear_M1(double L_F, double L_G, const SobolevNorms& target);
BoundValue eval_semilinear_bound(double T, double eps, double L_F, double L_G,
                                 const SobolevNorms& target, double kappa);

struct SweepRecord {
  double eps = 0;
  double cost = 0;
};

/// Smallest kappa >= 0 with exp(kappa (N + M/eps_r)) l2 >= cost_r for every
/// record: the max of ln(cost/l2)/(N + M/eps) over the sweep, clamped at 0.
double calibrate_kappa(const std::vector<SweepRecord>& records, double N, double M,
                       double target_l2);

}  // namespace wentzell
