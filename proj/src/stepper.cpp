#include "stepper.hpp"

#include <string>

#include "wentzell/errors.hpp"

namespace wentzell {

StepCache& step_cache(const DiscreteOperatorSet& ops) {
  if (ops.cache) return *ops.cache;
  auto cache = std::make_shared<StepCache>();
  const int n = ops.n();
  const double dt = ops.schedule.dt(), theta = ops.schedule.theta;

  Eigen::SparseMatrix<double> mass(n, n);
  mass.setIdentity();
  mass.diagonal() = ops.mass;

  for (size_t d = 0; d < ops.drift.size(); ++d) {
    Eigen::SparseMatrix<double> gen = ops.stiffness - ops.drift[d];
    cache->imp.push_back((mass - theta * dt * gen).pruned());
    cache->expl.push_back((mass + (1.0 - theta) * dt * gen).pruned());
    cache->expl_t.push_back(Eigen::SparseMatrix<double>(cache->expl.back().transpose()));

    auto lu = std::make_unique<StepCache::Lu>();
    lu->compute(cache->imp.back());
    if (lu->info() != Eigen::Success)
      fail(Errc::solver, "step matrix factorization failed for drift sample " + std::to_string(d));
    cache->lu.push_back(std::move(lu));

    auto lu_t = std::make_unique<StepCache::Lu>();
    lu_t->compute(Eigen::SparseMatrix<double>(cache->imp.back().transpose()));
    if (lu_t->info() != Eigen::Success)
      fail(Errc::solver,
           "transposed step matrix factorization failed for drift sample " + std::to_string(d));
    cache->lu_t.push_back(std::move(lu_t));
  }

  ops.cache = std::move(cache);
  return *ops.cache;
}

}  // namespace wentzell
