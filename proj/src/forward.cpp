#include "wentzell/forward.hpp"

#include <string>

#include "stepper.hpp"
#include "wentzell/errors.hpp"

namespace wentzell {

namespace {

void check_control(const DiscreteOperatorSet& ops, const SpaceTimeField* control) {
  if (!control) return;
  if (control->frames.size() != static_cast<size_t>(ops.schedule.nt))
    fail(Errc::config, "forward: control must carry one frame per step");
  for (const auto& f : control->frames)
    if (f.bulk.size() != ops.grid.n_bulk())
      fail(Errc::config, "forward: control frame does not match the bulk node count");
}

template <typename OnFrame>
void sweep(const DiscreteOperatorSet& ops, const StatePair& y0, const SpaceTimeField* control,
           OnFrame&& on_frame) {
  check_shape(ops.grid, y0, "forward");
  check_control(ops, control);
  auto& cache = step_cache(ops);
  const int nb = ops.grid.n_bulk(), n = ops.n(), nt = ops.schedule.nt;
  const double dt = ops.schedule.dt();

  Eigen::VectorXd y(n);
  y.head(nb) = y0.bulk;
  y.tail(n - nb) = y0.bdry;
  on_frame(0, y);

  Eigen::VectorXd rhs(n);
  for (int step = 0; step < nt; ++step) {
    rhs.noalias() = cache.expl[ops.drift_index[step]] * y;
    if (control)
      rhs.head(nb) += dt * ops.grid.cell_volume.cwiseProduct(control->frames[step].bulk);
    y = cache.lu[ops.drift_index[step + 1]]->solve(rhs);
    if (!y.allFinite())
      fail(Errc::solver, "forward: nonfinite state after step " + std::to_string(step + 1) +
                             " (t = " + std::to_string(ops.schedule.node_time(step + 1)) + ")");
    on_frame(step + 1, y);
  }
}

}  // namespace

SpaceTimeField solve_forward(const DiscreteOperatorSet& ops, const StatePair& y0,
                             const SpaceTimeField* control) {
  const int nb = ops.grid.n_bulk(), nt = ops.schedule.nt;
  SpaceTimeField out;
  out.times.resize(nt + 1);
  out.frames.resize(nt + 1);
  sweep(ops, y0, control, [&](int step, const Eigen::VectorXd& y) {
    out.times(step) = ops.schedule.node_time(step);
    out.frames[step] = {y.head(nb), y.tail(y.size() - nb)};
  });
  return out;
}

StatePair forward_terminal(const DiscreteOperatorSet& ops, const StatePair& y0,
                           const SpaceTimeField* control) {
  const int nb = ops.grid.n_bulk(), nt = ops.schedule.nt;
  StatePair out;
  sweep(ops, y0, control, [&](int step, const Eigen::VectorXd& y) {
    if (step == nt) out = {y.head(nb), y.tail(y.size() - nb)};
  });
  return out;
}

}  // namespace wentzell
