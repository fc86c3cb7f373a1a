#include "wentzell/schedule.hpp"

#include <cmath>
#include <string>

#include "wentzell/errors.hpp"

namespace wentzell {

TimeSchedule make_schedule(double T, int nt, double theta) {
  if (!(T > 0.0) || !std::isfinite(T)) fail(Errc::config, "schedule: T must be positive");
  if (nt < 2) fail(Errc::config, "schedule: need nt >= 2 steps, got " + std::to_string(nt));
  if (theta != 0.5 && theta != 1.0)
    fail(Errc::config, "schedule: theta must be 0.5 or 1, got " + std::to_string(theta));
  return {T, nt, theta};
}

}  // namespace wentzell
