#include "rhdg/linsolve.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace rhdg {

DenseFactorization::DenseFactorization(const Eigen::MatrixXd& a) : matrix_(a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("factor_dense: matrix must be square");
  if (a.rows() == 0) throw std::invalid_argument("factor_dense: empty matrix");
  lu_.compute(a);
  const double scale = a.cwiseAbs().maxCoeff();
  const Eigen::VectorXd pivots = lu_.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < pivots.size(); ++i) {
    if (std::abs(pivots[i]) <= 1e-14 * scale)
      throw std::runtime_error("factor_dense: matrix singular to tolerance at pivot " +
                               std::to_string(i));
  }
}

Eigen::VectorXd DenseFactorization::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = lu_.solve(rhs);
  // One step of iterative refinement keeps the residual at working accuracy
  // even for ill-conditioned skeleton systems.
  x += lu_.solve(rhs - matrix_ * x);
  return x;
}

Eigen::MatrixXd DenseFactorization::solve(const Eigen::MatrixXd& rhs) const {
  Eigen::MatrixXd x = lu_.solve(rhs);
  x += lu_.solve(rhs - matrix_ * x);
  return x;
}

DenseFactorization factor_dense(const Eigen::MatrixXd& a) { return DenseFactorization(a); }

Eigen::VectorXd solve_dense(const DenseFactorization& f, const Eigen::VectorXd& rhs) {
  return f.solve(rhs);
}

SparseOperator::SparseOperator(int dim) : dim_(dim) {
  if (dim < 0) throw std::invalid_argument("SparseOperator: negative dimension");
}

void SparseOperator::add(int row, int col, double value) {
  if (finalized_) throw std::logic_error("SparseOperator: add after finalize");
  if (row < 0 || row >= dim_ || col < 0 || col >= dim_)
    throw std::out_of_range("SparseOperator: index out of range");
  pending_.emplace_back(row, col, value);
}

void SparseOperator::finalize() {
  if (finalized_) return;
  mat_.resize(dim_, dim_);
  mat_.setFromTriplets(pending_.begin(), pending_.end());
  mat_.makeCompressed();
  pending_.clear();
  pending_.shrink_to_fit();
  finalized_ = true;
}

void SparseOperator::require_finalized() const {
  if (!finalized_) throw std::logic_error("SparseOperator: not finalized");
}

std::int64_t SparseOperator::nonzeros() const {
  require_finalized();
  return mat_.nonZeros();
}

Eigen::VectorXd SparseOperator::apply(const Eigen::VectorXd& x) const {
  require_finalized();
  if (x.size() != dim_) throw std::invalid_argument("SparseOperator: size mismatch");
  return mat_ * x;
}

Eigen::VectorXd SparseOperator::diagonal() const {
  require_finalized();
  return mat_.diagonal();
}

Eigen::MatrixXd SparseOperator::dense() const {
  require_finalized();
  return Eigen::MatrixXd(mat_);
}

double SparseOperator::max_abs() const {
  require_finalized();
  double m = 0.0;
  for (int r = 0; r < mat_.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat_, r); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

double SparseOperator::inf_norm() const {
  require_finalized();
  double m = 0.0;
  for (int r = 0; r < mat_.outerSize(); ++r) {
    double row = 0.0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat_, r); it; ++it)
      row += std::abs(it.value());
    m = std::max(m, row);
  }
  return m;
}

double SparseOperator::max_asymmetry() const {
  require_finalized();
  const Eigen::SparseMatrix<double, Eigen::RowMajor> diff =
      mat_ - Eigen::SparseMatrix<double, Eigen::RowMajor>(mat_.transpose());
  double m = 0.0;
  for (int r = 0; r < diff.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(diff, r); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

namespace {

std::string residual_string(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", value);
  return buf;
}

// Shared acceptance test: plain relative residual, or the normwise backward
// error once the residual-evaluation rounding floor is reached.
struct ResidualTarget {
  double tol;
  double bnorm;
  double anorm;
  bool accept(double rnorm, double xnorm) const {
    return rnorm <= tol * bnorm || rnorm <= tol * (bnorm + anorm * xnorm);
  }
};

}  // namespace

Eigen::VectorXd cg(const SparseOperator& op, const Eigen::VectorXd& rhs, double tol,
                   int maxiter, KrylovStats* stats) {
  const int n = op.dim();
  if (rhs.size() != n) throw std::invalid_argument("cg: size mismatch");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (stats) *stats = {};
  if (bnorm == 0.0) return x;

  const Eigen::VectorXd diag = op.diagonal();
  for (int i = 0; i < n; ++i) {
    if (diag[i] <= 0.0)
      throw std::runtime_error(
          "cg: non-positive diagonal entry " + std::to_string(i) +
          " (operator is not positive definite; increase tau0 for s=1 systems)");
  }
  const ResidualTarget target{tol, bnorm, op.inf_norm()};

  int it = 0;
  double true_res = bnorm;
  while (it < maxiter) {
    // Restarting on the recomputed residual defeats the drift between the
    // recurrence residual and the true one near the rounding floor.
    Eigen::VectorXd r = rhs - op.apply(x);
    true_res = r.norm();
    if (target.accept(true_res, x.norm())) {
      if (stats) *stats = {it, true_res / bnorm};
      return x;
    }
    Eigen::VectorXd z = r.cwiseQuotient(diag);
    Eigen::VectorXd p = z;
    double rz = r.dot(z);
    const double inner_target = 0.05 * tol * bnorm;
    while (it < maxiter) {
      const Eigen::VectorXd q = op.apply(p);
      const double pq = p.dot(q);
      if (pq <= 0.0)
        throw std::runtime_error(
            "cg: negative curvature at iteration " + std::to_string(it) +
            " (operator is not positive definite; increase tau0 for s=1 systems)");
      const double alpha = rz / pq;
      x += alpha * p;
      r -= alpha * q;
      ++it;
      if (r.norm() <= inner_target) break;
      z = r.cwiseQuotient(diag);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
  }
  true_res = (rhs - op.apply(x)).norm();
  if (target.accept(true_res, x.norm())) {
    if (stats) *stats = {it, true_res / bnorm};
    return x;
  }
  throw std::runtime_error("cg: no convergence in " + std::to_string(maxiter) +
                           " iterations (relative residual " +
                           residual_string(true_res / bnorm) + ")");
}

Eigen::VectorXd krylov_nonsym(const SparseOperator& op, const Eigen::VectorXd& rhs,
                              double tol, int maxiter, KrylovStats* stats) {
  const int n = op.dim();
  if (rhs.size() != n) throw std::invalid_argument("krylov_nonsym: size mismatch");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = rhs.norm();
  if (stats) *stats = {};
  if (bnorm == 0.0) return x;

  // Jacobi row scaling.
  Eigen::VectorXd scale = op.diagonal().cwiseAbs();
  const double smax = scale.maxCoeff();
  for (int i = 0; i < n; ++i)
    if (scale[i] <= 1e-300 * smax || scale[i] == 0.0) scale[i] = 1.0;
  const auto precond = [&scale](const Eigen::VectorXd& v) {
    return Eigen::VectorXd(v.cwiseQuotient(scale));
  };
  const auto apply = [&op, &precond](const Eigen::VectorXd& v) {
    return precond(op.apply(v));
  };
  const ResidualTarget target{tol, bnorm, op.inf_norm()};

  int it = 0;
  while (true) {
    Eigen::VectorXd r_orig = rhs - op.apply(x);
    if (target.accept(r_orig.norm(), x.norm())) {
      if (stats) *stats = {it, r_orig.norm() / bnorm};
      return x;
    }
    if (it >= maxiter)
      throw std::runtime_error(
          "krylov_nonsym: no convergence in " + std::to_string(maxiter) +
          " iterations (relative residual " + residual_string(r_orig.norm() / bnorm) +
          ")");

    // TFQMR sweep for the correction system A d = r.
    const Eigen::VectorXd b = precond(r_orig);
    Eigen::VectorXd d_total = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd w = b, y1 = b;
    Eigen::VectorXd v = apply(y1);
    Eigen::VectorXd u1 = v;
    Eigen::VectorXd y2 = Eigen::VectorXd::Zero(n), u2 = y2, d = y2;
    const Eigen::VectorXd rtilde = b;
    double theta = 0.0, eta = 0.0;
    double tau = b.norm();
    double rho = tau * tau;
    const double inner_target = 0.05 * tol * bnorm * tau / r_orig.norm();
    bool progressed = false;

    while (it < maxiter) {
      const double sigma = rtilde.dot(v);
      if (sigma == 0.0 || rho == 0.0) break;  // breakdown: restart outer sweep
      const double alpha = rho / sigma;
      for (int half = 0; half < 2; ++half) {
        if (half == 1) {
          y2 = y1 - alpha * v;
          u2 = apply(y2);
        }
        const int m = 2 * it - 1 + half;
        w -= alpha * (half == 0 ? u1 : u2);
        d = (half == 0 ? y1 : y2) + ((theta * theta) * eta / alpha) * d;
        theta = w.norm() / tau;
        const double c = 1.0 / std::sqrt(1.0 + theta * theta);
        tau *= theta * c;
        eta = c * c * alpha;
        d_total += eta * d;
        progressed = true;
        if (tau * std::sqrt(static_cast<double>(m + 2)) <= inner_target) break;
      }
      ++it;
      if (tau * std::sqrt(2.0 * it + 2.0) <= inner_target) break;
      const double rho_next = rtilde.dot(w);
      if (rho_next == 0.0) break;
      const double beta = rho_next / rho;
      rho = rho_next;
      y1 = w + beta * y2;
      u1 = apply(y1);
      v = u1 + beta * (u2 + beta * v);
    }
    if (!progressed)
      throw std::runtime_error("krylov_nonsym: breakdown at iteration " +
                               std::to_string(it));
    x += d_total;
  }
}

}  // namespace rhdg
