#pragma once

namespace wentzell {

/// Uniform theta-scheme time grid on [0,T].  theta is 1/2 (trapezoidal,
/// controls sampled at step midpoints) or 1 (implicit Euler, controls sampled
/// at right endpoints).
struct TimeSchedule {
  double T = 0;
  int nt = 0;
  double theta = 0.5;

  double dt() const { return T / nt; }
  double node_time(int n) const { return T * n / nt; }
  double control_time(int n) const {
    return theta == 1.0 ? node_time(n + 1) : 0.5 * (node_time(n) + node_time(n + 1));
  }
};

TimeSchedule make_schedule(double T, int nt, double theta);

}  // namespace wentzell
