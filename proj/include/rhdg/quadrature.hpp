// Gauss quadrature on the reference interval [-1,1] and a collapsed tensor
// rule on the reference triangle {x >= 0, y >= 0, x + y <= 1}.

#pragma once

#include <Eigen/Dense>

namespace rhdg {

// One-dimensional rule on [-1,1].
struct QuadratureRule {
  Eigen::VectorXd points;
  Eigen::VectorXd weights;

  int size() const { return static_cast<int>(points.size()); }
};

// Rule on the reference triangle.
struct TriQuadratureRule {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  Eigen::VectorXd weights;
  int exactness = 0;  // integrates all monomials of total degree <= exactness

  int size() const { return static_cast<int>(weights.size()); }
};

/// n-point Gauss-Legendre rule, exact for degree <= 2n-1, points symmetric
/// about 0. Requires 1 <= n <= 20.
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1,1];
/// the weight function is folded into the returned weights.
QuadratureRule gauss_jacobi(int n, double alpha, double beta);

/// Rule on the reference triangle, exact for all bivariate monomials of total
/// degree <= degree (0 <= degree <= 20). Collapsed Gauss-Legendre x
/// Gauss-Jacobi(1,0) tensor product, available at any degree.
TriQuadratureRule tri_quadrature(int degree);

}  // namespace rhdg
