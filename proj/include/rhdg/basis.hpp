// Polynomial bases: orthonormal Legendre (modal) and Lagrange (nodal) bases
// on the reference edge [-1,1], an orthonormalized monomial basis on the
// reference triangle, the edge L2 projection, and the Gauss-point evaluation
// of the projected edge mass.

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "rhdg/quadrature.hpp"

namespace rhdg {

// --- Edge bases on [-1,1] --------------------------------------------------

/// Values of the orthonormal Legendre basis of P^degree at t; entry m is
/// sqrt((2m+1)/2) P_m(t), so the exact Gram matrix is the identity.
Eigen::VectorXd edge_basis_values(int degree, double t);

/// Batch version: one row per point, one column per basis function.
Eigen::MatrixXd edge_basis_values(int degree, const Eigen::VectorXd& t);

/// Equispaced Lagrange nodes on [-1,1] including the endpoints (a single node
/// at 0 for degree 0). Node 0 sits at t = -1, node `degree` at t = +1.
Eigen::VectorXd edge_nodal_points(int degree);

/// Values of the Lagrange basis on the equispaced nodes at t.
Eigen::VectorXd edge_nodal_values(int degree, double t);
Eigen::MatrixXd edge_nodal_values(int degree, const Eigen::VectorXd& t);

/// L2([-1,1]) projection onto P^degree in the orthonormal Legendre basis,
/// from samples of the function at the points of `rule`. The rule must be
/// exact for degree + (polynomial degree of the sampled function).
Eigen::VectorXd project_edge(const QuadratureRule& rule,
                             const Eigen::VectorXd& values, int degree);

/// k-point Gauss-Legendre quadrature of the product of two edge functions of
/// degree <= k, given by orthonormal-Legendre coefficients. Coincides with
/// the exact integral of the product of the degree-(k-1) L2 projections of
/// the two factors.
double reduced_edge_mass(int k, const Eigen::VectorXd& f_coeffs,
                         const Eigen::VectorXd& g_coeffs);

// --- Element basis on the reference triangle -------------------------------

// Monomials of total degree <= degree, orthonormalized on the reference
// triangle through the Cholesky factor of the monomial Gram matrix. Entry 0
// is the constant sqrt(2); the basis is graded by total degree.
class TriBasis {
 public:
  explicit TriBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(coeff_.rows()); }

  /// Values of all basis functions at a reference point.
  Eigen::VectorXd values(const Eigen::Vector2d& p) const;

  /// Reference gradients; row i is (d/dx, d/dy) of basis function i.
  Eigen::MatrixXd gradients(const Eigen::Vector2d& p) const;

  /// Reference second derivatives; row i is (d2/dxx, d2/dxy, d2/dyy).
  Eigen::MatrixXd hessians(const Eigen::Vector2d& p) const;

 private:
  Eigen::VectorXd monomials(const Eigen::Vector2d& p) const;

  int degree_;
  Eigen::MatrixXd coeff_;  // lower triangular; basis = coeff_ * monomials
  std::vector<std::array<int, 2>> exponents_;
};

}  // namespace rhdg
