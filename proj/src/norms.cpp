#include "rhdg/norms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "rhdg/quadrature.hpp"

namespace rhdg {

ErrorReport error_report(const Mesh& mesh, const HdgSolution& sol,
                         const ExactSolution& exact, const SchemeConfig& config,
                         int quad_exactness) {
  if (!exact.value || !exact.gradient || !exact.hessian)
    throw std::invalid_argument("error_report: exact solution needs value, gradient, hessian");
  const int k = sol.k;
  const int exactness = quad_exactness > 0 ? quad_exactness : 2 * k + 6;
  const TriQuadratureRule vrule = tri_quadrature(std::min(exactness, 20));
  const QuadratureRule erule = gauss_legendre(std::min(exactness / 2 + 1, 20));
  const TriBasis basis(k);
  const int nk = basis.size();

  // Reference evaluations are shared by all elements.
  Eigen::MatrixXd vol_values(vrule.size(), nk);
  std::vector<Eigen::MatrixXd> vol_grads(vrule.size());
  std::vector<Eigen::MatrixXd> vol_hess(vrule.size());
  for (int q = 0; q < vrule.size(); ++q) {
    const Eigen::Vector2d p = vrule.points.row(q).transpose();
    vol_values.row(q) = basis.values(p).transpose();
    vol_grads[q] = basis.gradients(p);
    vol_hess[q] = basis.hessians(p);
  }

  const MeshQualityReport quality = quality_report(mesh);

  double l2 = 0.0, h1 = 0.0, h2 = 0.0, jump = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = element_map(mesh, t);
    const Eigen::VectorXd& c = sol.element[t];
    const double hk2 = quality.diameter[t] * quality.diameter[t];

    for (int q = 0; q < vrule.size(); ++q) {
      const double w = vrule.weights[q] * map.det;
      const Eigen::Vector2d x = map.to_physical(vrule.points.row(q).transpose());

      const double ev = exact.value(x) - vol_values.row(q).dot(c);
      l2 += w * ev * ev;

      const Eigen::Vector2d gh = (vol_grads[q] * map.inv_jac).transpose() * c;
      const Eigen::Vector2d eg = exact.gradient(x) - gh;
      h1 += w * eg.squaredNorm();

      const Eigen::Vector3d hc = vol_hess[q].transpose() * c;  // ref xx, xy, yy
      Eigen::Matrix2d href;
      href << hc[0], hc[1], hc[1], hc[2];
      const Eigen::Matrix2d hphys = map.inv_jac.transpose() * href * map.inv_jac;
      const Eigen::Matrix2d eh = exact.hessian(x) - hphys;
      h2 += w * hk2 *
            (eh(0, 0) * eh(0, 0) + 2.0 * eh(0, 1) * eh(0, 1) + eh(1, 1) * eh(1, 1));
    }

    // Jump seminorm: per side, project the error-pair mismatch onto P^{k-1}
    // along the edge. The exact traces cancel pointwise, so the integrand is
    // the polynomial uhat_h - u_h|_e.
    for (int side = 0; side < 3; ++side) {
      const int ge = mesh.triangle_edges[t][side];
      Eigen::VectorXd mismatch(erule.size());
      for (int q = 0; q < erule.size(); ++q) {
        const double tq = erule.points[q];
        const Eigen::Vector2d x = mesh.edge_point(ge, tq);
        const double v = basis.values(map.to_reference(x)).dot(c);
        mismatch[q] = trace_value(sol, ge, tq) - v;
      }
      const Eigen::VectorXd proj = project_edge(erule, mismatch, k - 1);
      // h_e^{-1} * (h_e/2) * sum of squared orthonormal coefficients.
      jump += 0.5 * proj.squaredNorm();
    }
  }

  ErrorReport report;
  report.l2 = std::sqrt(l2);
  report.h1_broken = std::sqrt(h1);
  report.h2_weighted = std::sqrt(h2);
  report.jump = std::sqrt(jump);
  report.energy = std::sqrt(h1 + h2 + jump);
  report.h = quality.max_diameter;
  report.skeleton_dofs = sol.skeleton_dofs;

  const ScalarField g = config.dirichlet;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edges[e].boundary) continue;
    double mean_g = 0.0;
    if (g) {
      for (int q = 0; q < erule.size(); ++q)
        mean_g += 0.5 * erule.weights[q] * g(mesh.edge_point(e, erule.points[q]));
    }
    report.boundary_mean_mismatch =
        std::max(report.boundary_mean_mismatch, std::abs(trace_mean(sol, e) - mean_g));
  }
  return report;
}

std::vector<double> fit_orders(const std::vector<std::pair<double, double>>& h_and_error) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> orders(h_and_error.size(), nan);
  for (std::size_t i = 1; i < h_and_error.size(); ++i) {
    const auto& [h0, e0] = h_and_error[i - 1];
    const auto& [h1, e1] = h_and_error[i];
    if (e0 <= 0.0 || e1 <= 0.0 || h0 <= 0.0 || h1 <= 0.0 || h0 == h1) continue;
    orders[i] = std::log(e0 / e1) / std::log(h0 / h1);
  }
  return orders;
}

double fit_order_least_squares(const std::vector<std::pair<double, double>>& h_and_error) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& [h, e] : h_and_error) {
    if (h <= 0.0 || e <= 0.0) continue;
    const double x = std::log(h), y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_order_least_squares: need at least two points");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0)
    throw std::invalid_argument("fit_order_least_squares: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace rhdg
