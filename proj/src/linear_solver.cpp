#include "hvi/linear_solver.hpp"

#include <algorithm>
#include <string>
#include <type_traits>

namespace hvi {

SpdSolver::SpdSolver(const Eigen::SparseMatrix<double>& a, int direct_limit)
    : matrix_(a), direct_(a.rows() <= direct_limit) {
  if (direct_) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->analyzePattern(matrix_);
  } else {
    cg_ = std::make_unique<std::remove_reference_t<decltype(*cg_)>>();
    cg_->setTolerance(kCgTolerance);
    cg_->setMaxIterations(std::max<Eigen::Index>(1000, 10 * a.rows()));
  }
  refactor(a);
}

void SpdSolver::refactor(const Eigen::SparseMatrix<double>& a) {
  matrix_ = a;
  if (direct_) {
    ldlt_->factorize(matrix_);
    if (ldlt_->info() != Eigen::Success) {
      throw LinearSolveError("sparse LDL^T factorization failed (matrix not positive definite?)", {});
    }
    const auto d = ldlt_->vectorD();
    if (d.size() > 0 && d.minCoeff() <= 0.0) {
      throw LinearSolveError("sparse LDL^T: non-positive pivot, matrix is not positive definite", {});
    }
  } else {
    cg_->compute(matrix_);
  }
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& rhs) const {
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    last_residual_ = 0.0;
    return Eigen::VectorXd::Zero(rhs.size());
  }
  Eigen::VectorXd x;
  std::vector<double> history;
  if (direct_) {
    x = ldlt_->solve(rhs);
    // One step of iterative refinement keeps the residual at rounding level.
    const Eigen::VectorXd r = rhs - matrix_ * x;
    x += ldlt_->solve(r);
  } else {
    x = cg_->solve(rhs);
    history.push_back(cg_->error());
    if (cg_->info() != Eigen::Success) {
      throw LinearSolveError("conjugate gradient did not reach tolerance after " +
                                 std::to_string(cg_->iterations()) + " iterations",
                             history);
    }
  }
  last_residual_ = (rhs - matrix_ * x).norm() / bnorm;
  history.push_back(last_residual_);
  if (!(last_residual_ <= 1e-10)) {
    throw LinearSolveError("linear solve residual " + std::to_string(last_residual_) +
                               " above 1e-10",
                           history);
  }
  return x;
}

}  // namespace hvi
