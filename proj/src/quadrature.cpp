#include "rhdg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rhdg {

namespace {

// Golub-Welsch: eigen-decomposition of the symmetric tridiagonal recurrence
// matrix of the Jacobi polynomials for (1-x)^alpha (1+x)^beta.
QuadratureRule golub_welsch(int n, double alpha, double beta) {
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  diag[0] = (beta - alpha) / (ab + 2.0);
  for (int m = 1; m < n; ++m) {
    const double d = 2.0 * m + ab;
    diag[m] = (beta * beta - alpha * alpha) / (d * (d + 2.0));
    sub[m - 1] = std::sqrt(4.0 * m * (m + alpha) * (m + beta) * (m + ab) /
                           (d * d * (d + 1.0) * (d - 1.0)));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("quadrature: tridiagonal eigensolve failed");

  const double mu0 = std::pow(2.0, ab + 1.0) * std::beta(alpha + 1.0, beta + 1.0);
  QuadratureRule rule;
  rule.points = es.eigenvalues();
  rule.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > 20)
    throw std::invalid_argument("gauss_legendre: point count must be in [1,20]");
  QuadratureRule rule = golub_welsch(n, 0.0, 0.0);
  // Enforce the symmetry of the rule exactly.
  for (int i = 0, j = n - 1; i < j; ++i, --j) {
    const double p = 0.5 * (rule.points[i] - rule.points[j]);
    rule.points[i] = p;
    rule.points[j] = -p;
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.weights[i] = w;
    rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1 || n > 64)
    throw std::invalid_argument("gauss_jacobi: point count must be in [1,64]");
  if (alpha <= -1.0 || beta <= -1.0)
    throw std::invalid_argument("gauss_jacobi: weight exponents must exceed -1");
  return golub_welsch(n, alpha, beta);
}

TriQuadratureRule tri_quadrature(int degree) {
  if (degree < 0 || degree > 20)
    throw std::invalid_argument("tri_quadrature: degree must be in [0,20]");
  const int n = degree / 2 + 1;
  const QuadratureRule gl = gauss_legendre(n);
  const QuadratureRule gj = gauss_jacobi(n, 1.0, 0.0);

  TriQuadratureRule rule;
  rule.exactness = degree;
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  int q = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j, ++q) {
      const double a = gl.points[i];
      const double b = gj.points[j];
      rule.points(q, 0) = 0.25 * (1.0 + a) * (1.0 - b);
      rule.points(q, 1) = 0.5 * (1.0 + b);
      rule.weights[q] = gl.weights[i] * gj.weights[j] / 8.0;
    }
  }
  return rule;
}

}  // namespace rhdg
