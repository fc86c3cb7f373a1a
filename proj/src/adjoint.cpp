#include "wentzell/adjoint.hpp"

#include <string>

#include "stepper.hpp"
#include "wentzell/errors.hpp"

namespace wentzell {

AdjointSolution solve_adjoint(const DiscreteOperatorSet& ops, const StatePair& phi_T) {
  check_shape(ops.grid, phi_T, "adjoint");
  auto& cache = step_cache(ops);
  const int nb = ops.grid.n_bulk(), n = ops.n(), nt = ops.schedule.nt;

  AdjointSolution out;
  out.nodes.times.resize(nt + 1);
  out.nodes.frames.resize(nt + 1);
  out.samples.times.resize(nt);
  out.samples.frames.resize(nt);
  for (int k = 0; k <= nt; ++k) out.nodes.times(k) = ops.schedule.node_time(k);
  for (int k = 0; k < nt; ++k) out.samples.times(k) = ops.schedule.control_time(k);

  Eigen::VectorXd g(n);
  g.head(nb) = ops.mass.head(nb).cwiseProduct(phi_T.bulk);
  g.tail(n - nb) = ops.mass.tail(n - nb).cwiseProduct(phi_T.bdry);
  out.nodes.frames[nt] = phi_T;

  for (int step = nt - 1; step >= 0; --step) {
    const Eigen::VectorXd w = cache.lu_t[ops.drift_index[step + 1]]->solve(g);
    if (!w.allFinite())
      fail(Errc::solver, "adjoint: nonfinite state at step " + std::to_string(step));
    out.samples.frames[step] = {w.head(nb), w.tail(n - nb)};
    g.noalias() = cache.expl_t[ops.drift_index[step]] * w;
    out.nodes.frames[step] = {g.head(nb).cwiseQuotient(ops.mass.head(nb)),
                              g.tail(n - nb).cwiseQuotient(ops.mass.tail(n - nb))};
  }
  return out;
}

SpaceTimeField observation(const SpaceTimeField& f, const Eigen::VectorXd& mask) {
  SpaceTimeField out;
  out.times = f.times;
  out.frames.reserve(f.frames.size());
  for (const auto& fr : f.frames) {
    if (fr.bulk.size() != mask.size())
      fail(Errc::config, "observation: mask length does not match the bulk block");
    out.frames.push_back({fr.bulk.cwiseProduct(mask), Eigen::VectorXd::Zero(fr.bdry.size())});
  }
  return out;
}

}  // namespace wentzell
