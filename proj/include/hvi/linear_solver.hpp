#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include <memory>
#include <stdexcept>
#include <vector>

namespace hvi {

class LinearSolveError : public std::runtime_error {
 public:
  LinearSolveError(const std::string& what, std::vector<double> residual_history)
      : std::runtime_error(what), residual_history(std::move(residual_history)) {}
  std::vector<double> residual_history;
};

/// Symmetric positive definite solve. Direct sparse LDL^T up to
/// `direct_limit` unknowns, diagonally preconditioned CG beyond.
class SpdSolver {
 public:
  static constexpr int kDirectLimit = 20000;
  static constexpr double kCgTolerance = 1e-11;

  SpdSolver() = default;
  explicit SpdSolver(const Eigen::SparseMatrix<double>& a, int direct_limit = kDirectLimit);

  /// Re-factorizes a matrix with the sparsity pattern of the first one.
  void refactor(const Eigen::SparseMatrix<double>& a);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  /// ||A x - b|| / ||b|| of the most recent solve (0 when b = 0).
  double last_relative_residual() const { return last_residual_; }
  bool is_direct() const { return direct_; }
  int size() const { return static_cast<int>(matrix_.rows()); }

 private:
  Eigen::SparseMatrix<double> matrix_;
  bool direct_ = true;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  std::unique_ptr<Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                           Eigen::DiagonalPreconditioner<double>>>
      cg_;
  mutable double last_residual_ = 0.0;
};

}  // namespace hvi
