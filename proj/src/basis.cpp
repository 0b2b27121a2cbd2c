#include "rhdg/basis.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace rhdg {

Eigen::VectorXd edge_basis_values(int degree, double t) {
  if (degree < 0) throw std::invalid_argument("edge_basis_values: negative degree");
  Eigen::VectorXd v(degree + 1);
  double p_prev = 0.0;
  double p = 1.0;  // P_0
  v[0] = std::sqrt(0.5);
  for (int m = 1; m <= degree; ++m) {
    const double p_next = ((2.0 * m - 1.0) * t * p - (m - 1.0) * p_prev) / m;
    p_prev = p;
    p = p_next;
    v[m] = std::sqrt((2.0 * m + 1.0) / 2.0) * p;
  }
  return v;
}

Eigen::MatrixXd edge_basis_values(int degree, const Eigen::VectorXd& t) {
  Eigen::MatrixXd out(t.size(), degree + 1);
  for (Eigen::Index q = 0; q < t.size(); ++q)
    out.row(q) = edge_basis_values(degree, t[q]).transpose();
  return out;
}

Eigen::VectorXd edge_nodal_points(int degree) {
  if (degree < 0) throw std::invalid_argument("edge_nodal_points: negative degree");
  if (degree == 0) return Eigen::VectorXd::Zero(1);
  return Eigen::VectorXd::LinSpaced(degree + 1, -1.0, 1.0);
}

Eigen::VectorXd edge_nodal_values(int degree, double t) {
  const Eigen::VectorXd nodes = edge_nodal_points(degree);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(degree + 1);
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; j <= degree; ++j)
      if (j != i) v[i] *= (t - nodes[j]) / (nodes[i] - nodes[j]);
  return v;
}

Eigen::MatrixXd edge_nodal_values(int degree, const Eigen::VectorXd& t) {
  Eigen::MatrixXd out(t.size(), degree + 1);
  for (Eigen::Index q = 0; q < t.size(); ++q)
    out.row(q) = edge_nodal_values(degree, t[q]).transpose();
  return out;
}

Eigen::VectorXd project_edge(const QuadratureRule& rule,
                             const Eigen::VectorXd& values, int degree) {
  if (values.size() != rule.points.size())
    throw std::invalid_argument("project_edge: sample count does not match the rule");
  const Eigen::MatrixXd phi = edge_basis_values(degree, rule.points);
  return phi.transpose() * (rule.weights.array() * values.array()).matrix();
}

double reduced_edge_mass(int k, const Eigen::VectorXd& f_coeffs,
                         const Eigen::VectorXd& g_coeffs) {
  if (k < 1 || k > 20) throw std::invalid_argument("reduced_edge_mass: k must be in [1,20]");
  if (f_coeffs.size() > k + 1 || g_coeffs.size() > k + 1)
    throw std::invalid_argument("reduced_edge_mass: coefficient degree exceeds k");
  const QuadratureRule rule = gauss_legendre(k);
  const Eigen::VectorXd f =
      edge_basis_values(static_cast<int>(f_coeffs.size()) - 1, rule.points) * f_coeffs;
  const Eigen::VectorXd g =
      edge_basis_values(static_cast<int>(g_coeffs.size()) - 1, rule.points) * g_coeffs;
  return (rule.weights.array() * f.array() * g.array()).sum();
}

TriBasis::TriBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > 10)
    throw std::invalid_argument("TriBasis: degree must be in [0,10]");
  for (int d = 0; d <= degree; ++d)
    for (int j = 0; j <= d; ++j) exponents_.push_back({d - j, j});

  const int n = static_cast<int>(exponents_.size());
  const TriQuadratureRule quad = tri_quadrature(2 * degree);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int q = 0; q < quad.size(); ++q) {
    const Eigen::VectorXd mono = monomials(quad.points.row(q).transpose());
    gram.noalias() += quad.weights[q] * mono * mono.transpose();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("TriBasis: monomial Gram matrix not positive definite");
  coeff_ = Eigen::MatrixXd::Identity(n, n);
  llt.matrixL().solveInPlace(coeff_);
}

Eigen::VectorXd TriBasis::monomials(const Eigen::Vector2d& p) const {
  Eigen::VectorXd m(exponents_.size());
  for (std::size_t i = 0; i < exponents_.size(); ++i)
    m[i] = std::pow(p.x(), exponents_[i][0]) * std::pow(p.y(), exponents_[i][1]);
  return m;
}

Eigen::VectorXd TriBasis::values(const Eigen::Vector2d& p) const {
  return coeff_ * monomials(p);
}

Eigen::MatrixXd TriBasis::gradients(const Eigen::Vector2d& p) const {
  Eigen::MatrixXd dm(exponents_.size(), 2);
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    const int a = exponents_[i][0];
    const int b = exponents_[i][1];
    dm(i, 0) = a == 0 ? 0.0 : a * std::pow(p.x(), a - 1) * std::pow(p.y(), b);
    dm(i, 1) = b == 0 ? 0.0 : b * std::pow(p.x(), a) * std::pow(p.y(), b - 1);
  }
  return coeff_ * dm;
}

Eigen::MatrixXd TriBasis::hessians(const Eigen::Vector2d& p) const {
  Eigen::MatrixXd dm(exponents_.size(), 3);
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    const int a = exponents_[i][0];
    const int b = exponents_[i][1];
    dm(i, 0) = a < 2 ? 0.0 : a * (a - 1) * std::pow(p.x(), a - 2) * std::pow(p.y(), b);
    dm(i, 1) = (a == 0 || b == 0)
                   ? 0.0
                   : a * b * std::pow(p.x(), a - 1) * std::pow(p.y(), b - 1);
    dm(i, 2) = b < 2 ? 0.0 : b * (b - 1) * std::pow(p.x(), a) * std::pow(p.y(), b - 2);
  }
  return coeff_ * dm;
}

}  // namespace rhdg
