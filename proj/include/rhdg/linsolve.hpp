// Dense factorization, sparse operator storage, and the Krylov solvers used
// for the condensed skeleton systems.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace rhdg {

// LU with partial pivoting plus an explicit singularity check
// (pivot threshold 1e-14 relative to the largest entry).
class DenseFactorization {
 public:
  explicit DenseFactorization(const Eigen::MatrixXd& a);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd matrix_;  // kept for iterative refinement
};

DenseFactorization factor_dense(const Eigen::MatrixXd& a);
Eigen::VectorXd solve_dense(const DenseFactorization& f, const Eigen::VectorXd& rhs);

// Square sparse operator assembled from (row, col, value) triplets; duplicate
// entries are summed at finalize() and none remain afterwards.
class SparseOperator {
 public:
  explicit SparseOperator(int dim);

  void add(int row, int col, double value);
  void finalize();
  bool finalized() const { return finalized_; }

  int dim() const { return dim_; }
  std::int64_t nonzeros() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd dense() const;

  double max_abs() const;
  double inf_norm() const;  // max absolute row sum
  /// max |A - A^T| over all entries (for symmetry diagnostics).
  double max_asymmetry() const;

 private:
  void require_finalized() const;

  int dim_;
  bool finalized_ = false;
  std::vector<Eigen::Triplet<double>> pending_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> mat_;
};

struct KrylovStats {
  int iterations = 0;
  double residual = 0.0;  // recomputed, relative to ||rhs||
};

// Both Krylov solvers restart on recomputed true residuals and accept once
// ||b - Ax|| <= tol * ||b||, or once the normwise backward error
// ||b - Ax|| / (||b|| + ||A||_inf ||x||) drops below tol (the rounding floor
// of residual evaluation itself; same criterion as the dense factorization).

/// Conjugate gradients with Jacobi preconditioning for symmetric positive
/// definite operators; detected negative curvature throws with a hint to
/// increase tau0 (the operator is then not positive definite).
Eigen::VectorXd cg(const SparseOperator& op, const Eigen::VectorXd& rhs, double tol,
                   int maxiter, KrylovStats* stats = nullptr);

/// Transpose-free QMR with Jacobi row scaling, for the nonsymmetric systems.
Eigen::VectorXd krylov_nonsym(const SparseOperator& op, const Eigen::VectorXd& rhs,
                              double tol, int maxiter, KrylovStats* stats = nullptr);

}  // namespace rhdg
