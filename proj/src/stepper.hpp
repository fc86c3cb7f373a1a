#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <vector>

#include "wentzell/operators.hpp"

namespace wentzell {

// Step matrices of the theta scheme and their factorizations, one set per
// distinct drift sample.  Shared by the forward and adjoint sweeps via the
// operator set's lazy cache so repeated solves reuse the factorizations.
struct StepCache {
  using Sparse = Eigen::SparseMatrix<double>;
  using Lu = Eigen::SparseLU<Sparse>;

  std::vector<Sparse> imp;    // M - theta dt (K - D)
  std::vector<Sparse> expl;   // M + (1-theta) dt (K - D)
  std::vector<Sparse> expl_t;
  std::vector<std::unique_ptr<Lu>> lu;    // of imp
  std::vector<std::unique_ptr<Lu>> lu_t;  // of imp^T
};

StepCache& step_cache(const DiscreteOperatorSet& ops);

}  // namespace wentzell
