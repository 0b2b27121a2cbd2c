#include "rhdg/crfem.hpp"

#include <cmath>
#include <stdexcept>

#include "rhdg/linsolve.hpp"
#include "rhdg/quadrature.hpp"

namespace rhdg {

namespace {

constexpr int kDenseDofLimit = 3000;

// Gradients of the barycentric coordinates of a triangle (rows 0..2).
Eigen::Matrix<double, 3, 2> barycentric_gradients(const ElementMap& map) {
  Eigen::Matrix<double, 3, 2> ref;
  ref << -1.0, -1.0, 1.0, 0.0, 0.0, 1.0;
  return ref * map.inv_jac;
}

}  // namespace

CrSolution solve_cr(const Mesh& mesh, const ScalarField& f, int load_exactness) {
  const int ne = mesh.num_edges();
  std::vector<int> dof(ne, -1);
  int dim = 0;
  for (int e = 0; e < ne; ++e)
    if (!mesh.edges[e].boundary) dof[e] = dim++;

  SparseOperator op(dim);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
  const TriQuadratureRule vrule = tri_quadrature(load_exactness);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = element_map(mesh, t);
    const double area = 0.5 * map.det;
    const Eigen::Matrix<double, 3, 2> lam_grad = barycentric_gradients(map);

    // Basis for side i: 1 - 2 lambda_opposite(i); opposite vertex is (i+2)%3.
    Eigen::Matrix<double, 3, 2> theta_grad;
    for (int i = 0; i < 3; ++i) theta_grad.row(i) = -2.0 * lam_grad.row((i + 2) % 3);

    for (int i = 0; i < 3; ++i) {
      const int gi = dof[mesh.triangle_edges[t][i]];
      if (gi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int gj = dof[mesh.triangle_edges[t][j]];
        if (gj >= 0) op.add(gi, gj, area * theta_grad.row(i).dot(theta_grad.row(j)));
      }
      if (f) {
        double fe = 0.0;
        for (int q = 0; q < vrule.size(); ++q) {
          const Eigen::Vector2d ref = vrule.points.row(q).transpose();
          const double theta = 1.0 - 2.0 * (i == 0   ? ref.y()          // lambda_2
                                            : i == 1 ? 1.0 - ref.x() - ref.y()
                                                     : ref.x());
          fe += vrule.weights[q] * map.det * f(map.to_physical(ref)) * theta;
        }
        rhs[gi] += fe;
      }
    }
  }
  op.finalize();

  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  if (dim > 0) {
    if (dim < kDenseDofLimit) {
      x = factor_dense(op.dense()).solve(rhs);
    } else {
      const int maxiter =
          static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(dim))));
      x = cg(op, rhs, 1e-12, maxiter);
    }
  }

  CrSolution sol;
  sol.edge_values = Eigen::VectorXd::Zero(ne);
  for (int e = 0; e < ne; ++e)
    if (dof[e] >= 0) sol.edge_values[e] = x[dof[e]];
  return sol;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> cr_interpolate(const Mesh& mesh,
                                                        const Eigen::VectorXd& edge_means) {
  if (edge_means.size() != mesh.num_edges())
    throw std::invalid_argument("cr_interpolate: one mean per edge required");
  Eigen::Matrix<double, Eigen::Dynamic, 3> coeffs(mesh.num_triangles(), 3);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = element_map(mesh, t);
    const Eigen::Matrix<double, 3, 2> lam_grad = barycentric_gradients(map);
    double a = 0.0;
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
      const int opp = (i + 2) % 3;
      const double m = edge_means[mesh.triangle_edges[t][i]];
      // lambda_opp(x) is affine with gradient lam_grad.row(opp) and value 1
      // at vertex opp.
      const Eigen::Vector2d v = mesh.nodes[mesh.triangles[t][opp]];
      const double lam0 = 1.0 - lam_grad.row(opp).dot(v);
      a += m * (1.0 - 2.0 * lam0);
      grad -= 2.0 * m * lam_grad.row(opp).transpose();
    }
    coeffs(t, 0) = a;
    coeffs(t, 1) = grad.x();
    coeffs(t, 2) = grad.y();
  }
  return coeffs;
}

double compare_edge_means(const Mesh& mesh, const HdgSolution& hdg, const CrSolution& cr) {
  if (hdg.k != 1 || hdg.scheme != Scheme::reduced ||
      hdg.hybrid != TraceContinuity::discontinuous || hdg.s != 1.0)
    throw std::invalid_argument(
        "compare_edge_means: requires k=1, reduced scheme, discontinuous traces, s=1");
  if (static_cast<int>(hdg.trace.size()) != mesh.num_edges() ||
      cr.edge_values.size() != mesh.num_edges())
    throw std::invalid_argument("compare_edge_means: solutions built on a different mesh");

  double worst = 0.0;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const double m_hdg = trace_mean(hdg, e);
    const double m_cr = cr.edge_values[e];
    worst = std::max(worst, std::abs(m_hdg - m_cr) / (1.0 + std::abs(m_cr)));
  }
  return worst;
}

}  // namespace rhdg
