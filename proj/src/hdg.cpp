#include "rhdg/hdg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rhdg {

namespace {

constexpr int kDenseDofLimit = 3000;
constexpr double kSolverTol = 1e-12;

void validate(const SchemeConfig& config) {
  if (config.k < 1 || config.k > 7)
    throw std::invalid_argument("SchemeConfig: k must be in [1,7]");
  if (config.tau_coefficient() <= 0.0)
    throw std::invalid_argument("SchemeConfig: tau0 must be positive");
  if (config.hybrid == TraceContinuity::continuous && config.hybrid_degree() < 1)
    throw std::invalid_argument(
        "SchemeConfig: continuous traces need hybrid degree >= 1 (k >= 2 for the "
        "reduced scheme)");
}

Eigen::VectorXd trace_basis_at(TraceContinuity cont, int degree, double t) {
  return cont == TraceContinuity::continuous ? edge_nodal_values(degree, t)
                                             : edge_basis_values(degree, t);
}

// Reference coordinates of the three triangle corners.
const Eigen::Vector2d kRefCorner[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

// Everything that depends on the configuration but not on the element:
// basis, rules, and reference-point evaluations (edge quadrature points in
// the global edge parameterization, for both traversal directions).
struct Workspace {
  explicit Workspace(const SchemeConfig& config)
      : basis(config.k),
        vol(tri_quadrature(config.volume_rule_exactness())),
        edge_rule(gauss_legendre(config.scheme == Scheme::reduced ? config.k
                                                                  : config.k + 1)) {
    const int nq = vol.size();
    vol_values.resize(nq, basis.size());
    vol_ref_grads.reserve(nq);
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d p = vol.points.row(q).transpose();
      vol_values.row(q) = basis.values(p).transpose();
      vol_ref_grads.push_back(basis.gradients(p));
    }

    const int l = config.hybrid_degree();
    const int eq = edge_rule.size();
    trace_values.resize(eq, l + 1);
    for (int q = 0; q < eq; ++q)
      trace_values.row(q) =
          trace_basis_at(config.hybrid, l, edge_rule.points[q]).transpose();

    for (int side = 0; side < 3; ++side) {
      for (int fwd = 0; fwd < 2; ++fwd) {
        const Eigen::Vector2d from = fwd ? kRefCorner[side] : kRefCorner[(side + 1) % 3];
        const Eigen::Vector2d to = fwd ? kRefCorner[(side + 1) % 3] : kRefCorner[side];
        auto& sv = side_values[side][fwd];
        auto& sg = side_ref_grads[side][fwd];
        sv.resize(eq, basis.size());
        sg.reserve(eq);
        for (int q = 0; q < eq; ++q) {
          const Eigen::Vector2d ref =
              from + 0.5 * (edge_rule.points[q] + 1.0) * (to - from);
          sv.row(q) = basis.values(ref).transpose();
          sg.push_back(basis.gradients(ref));
        }
      }
    }
  }

  TriBasis basis;
  TriQuadratureRule vol;
  Eigen::MatrixXd vol_values;
  std::vector<Eigen::MatrixXd> vol_ref_grads;
  QuadratureRule edge_rule;
  Eigen::MatrixXd trace_values;
  Eigen::MatrixXd side_values[3][2];
  std::vector<Eigen::MatrixXd> side_ref_grads[3][2];
};

LocalSystem local_assemble_ws(const SchemeConfig& config, const Mesh& mesh, int element,
                              const Workspace& ws) {
  const int nk = ws.basis.size();
  const int per_edge = config.hybrid_degree() + 1;

  LocalSystem sys;
  sys.element = element;
  sys.per_edge = per_edge;
  sys.edge_ids = mesh.triangle_edges[element];
  sys.uu = Eigen::MatrixXd::Zero(nk, nk);
  sys.ue = Eigen::MatrixXd::Zero(nk, 3 * per_edge);
  sys.eu = Eigen::MatrixXd::Zero(3 * per_edge, nk);
  sys.ee = Eigen::MatrixXd::Zero(3 * per_edge, 3 * per_edge);
  sys.load = Eigen::VectorXd::Zero(nk);

  const ElementMap map = element_map(mesh, element);

  for (int q = 0; q < ws.vol.size(); ++q) {
    const double w = ws.vol.weights[q] * map.det;
    const Eigen::MatrixXd grad = ws.vol_ref_grads[q] * map.inv_jac;  // nk x 2
    sys.uu.noalias() += w * grad * grad.transpose();
    if (config.source) {
      const Eigen::Vector2d x =
          map.to_physical(ws.vol.points.row(q).transpose());
      sys.load.noalias() += (w * config.source(x)) * ws.vol_values.row(q).transpose();
    }
  }

  const double tau_coeff = config.tau_coefficient();
  for (int side = 0; side < 3; ++side) {
    const int ge = sys.edge_ids[side];
    const double h_e = mesh.edge_length(ge);
    const double tau = tau_coeff / h_e;
    const Eigen::Vector2d normal = outward_normal(mesh, element, side);
    const int fwd = mesh.triangle_edge_signs[element][side] > 0 ? 1 : 0;
    const auto& sv = ws.side_values[side][fwd];
    const auto& sg = ws.side_ref_grads[side][fwd];
    const int c0 = side * per_edge;

    for (int q = 0; q < ws.edge_rule.size(); ++q) {
      const double w = 0.5 * ws.edge_rule.weights[q] * h_e;
      const Eigen::VectorXd phi = sv.row(q).transpose();
      const Eigen::VectorXd nd = (sg[q] * map.inv_jac) * normal;
      const Eigen::VectorXd psi = ws.trace_values.row(q).transpose();

      // <n . grad u, vhat - v>
      sys.uu.noalias() -= w * phi * nd.transpose();
      sys.eu.block(c0, 0, per_edge, nk).noalias() += w * psi * nd.transpose();
      // s <n . grad v, uhat - u>
      sys.uu.noalias() -= (w * config.s) * nd * phi.transpose();
      sys.ue.block(0, c0, nk, per_edge).noalias() += (w * config.s) * nd * psi.transpose();
      // tau (uhat - u)(vhat - v); under the k-point rule this is the reduced
      // (projected) stabilization, under the (k+1)-point rule the full one.
      sys.uu.noalias() += (w * tau) * phi * phi.transpose();
      sys.ue.block(0, c0, nk, per_edge).noalias() -= (w * tau) * phi * psi.transpose();
      sys.eu.block(c0, 0, per_edge, nk).noalias() -= (w * tau) * psi * phi.transpose();
      sys.ee.block(c0, c0, per_edge, per_edge).noalias() +=
          (w * tau) * psi * psi.transpose();
    }
  }
  return sys;
}

// Trace coefficients of the Dirichlet datum on a boundary edge: the L2
// projection for the modal basis, nodal interpolation for the Lagrange one.
Eigen::VectorXd boundary_trace_coeffs(const SchemeConfig& config, const Mesh& mesh,
                                      int edge) {
  const int l = config.hybrid_degree();
  if (!config.dirichlet) return Eigen::VectorXd::Zero(l + 1);
  if (config.hybrid == TraceContinuity::continuous) {
    const Eigen::VectorXd nodes = edge_nodal_points(l);
    Eigen::VectorXd coeffs(l + 1);
    for (int i = 0; i <= l; ++i)
      coeffs[i] = config.dirichlet(mesh.edge_point(edge, nodes[i]));
    return coeffs;
  }
  const QuadratureRule rule = gauss_legendre(std::min(l + 4, 20));
  Eigen::VectorXd values(rule.size());
  for (int q = 0; q < rule.size(); ++q)
    values[q] = config.dirichlet(mesh.edge_point(edge, rule.points[q]));
  return project_edge(rule, values, l);
}

std::string config_tag(const SchemeConfig& config) {
  std::ostringstream os;
  os << "k=" << config.k << ", scheme="
     << (config.scheme == Scheme::reduced ? "reduced" : "standard")
     << ", hybrid="
     << (config.hybrid == TraceContinuity::continuous ? "continuous" : "discontinuous")
     << ", s=" << config.s << ", tau0=" << config.tau_coefficient();
  return os.str();
}

}  // namespace

ElementMap element_map(const Mesh& mesh, int element) {
  const auto& tri = mesh.triangles[element];
  ElementMap map;
  map.origin = mesh.nodes[tri[0]];
  map.jac.col(0) = mesh.nodes[tri[1]] - map.origin;
  map.jac.col(1) = mesh.nodes[tri[2]] - map.origin;
  map.det = map.jac.determinant();
  if (map.det <= 0.0)
    throw std::runtime_error("element_map: degenerate or inverted triangle " +
                             std::to_string(element));
  map.inv_jac = map.jac.inverse();
  return map;
}

Eigen::Vector2d outward_normal(const Mesh& mesh, int element, int side) {
  const auto& tri = mesh.triangles[element];
  const Eigen::Vector2d d = mesh.nodes[tri[(side + 1) % 3]] - mesh.nodes[tri[side]];
  return Eigen::Vector2d(d.y(), -d.x()).normalized();
}

LocalSystem local_assemble(const SchemeConfig& config, const Mesh& mesh, int element) {
  validate(config);
  if (element < 0 || element >= mesh.num_triangles())
    throw std::invalid_argument("local_assemble: element index out of range");
  const Workspace ws(config);
  return local_assemble_ws(config, mesh, element, ws);
}

CondensedLocal condense(const LocalSystem& local) {
  CondensedLocal out;
  try {
    const DenseFactorization f(local.uu);
    out.recover_mat = f.solve(local.ue);
    out.recover_vec = f.solve(local.load);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("condense: singular element block on element " +
                             std::to_string(local.element) +
                             " (degenerate geometry or tau0 too small): " + e.what());
  }
  out.schur = local.ee - local.eu * out.recover_mat;
  out.load = -local.eu * out.recover_vec;
  return out;
}

SkeletonSystem assemble_skeleton(const SchemeConfig& config, const Mesh& mesh) {
  validate(config);
  if (mesh.num_triangles() == 0)
    throw std::invalid_argument("assemble_skeleton: empty mesh");

  const int l = config.hybrid_degree();
  const int per_edge = l + 1;
  const int ne = mesh.num_edges();

  std::vector<Eigen::VectorXi> edge_dofs(ne, Eigen::VectorXi::Constant(per_edge, -1));
  std::vector<Eigen::VectorXd> edge_fixed(ne, Eigen::VectorXd::Zero(per_edge));
  int dofs = 0;

  if (config.hybrid == TraceContinuity::discontinuous) {
    for (int e = 0; e < ne; ++e) {
      if (mesh.edges[e].boundary) {
        edge_fixed[e] = boundary_trace_coeffs(config, mesh, e);
      } else {
        for (int m = 0; m < per_edge; ++m) edge_dofs[e][m] = dofs++;
      }
    }
  } else {
    std::vector<bool> on_boundary(mesh.num_nodes(), false);
    for (const Edge& e : mesh.edges)
      if (e.boundary) on_boundary[e.a] = on_boundary[e.b] = true;

    std::vector<int> vertex_dof(mesh.num_nodes(), -1);
    for (int v = 0; v < mesh.num_nodes(); ++v)
      if (!on_boundary[v]) vertex_dof[v] = dofs++;

    const auto vertex_value = [&](int v) {
      return config.dirichlet ? config.dirichlet(mesh.nodes[v]) : 0.0;
    };
    const Eigen::VectorXd nodes = edge_nodal_points(l);
    for (int e = 0; e < ne; ++e) {
      const Edge& edge = mesh.edges[e];
      // Endpoint coefficients are the shared vertex values.
      if (vertex_dof[edge.a] >= 0)
        edge_dofs[e][0] = vertex_dof[edge.a];
      else
        edge_fixed[e][0] = vertex_value(edge.a);
      if (vertex_dof[edge.b] >= 0)
        edge_dofs[e][l] = vertex_dof[edge.b];
      else
        edge_fixed[e][l] = vertex_value(edge.b);
      for (int m = 1; m < l; ++m) {
        if (edge.boundary) {
          edge_fixed[e][m] = config.dirichlet
                                 ? config.dirichlet(mesh.edge_point(e, nodes[m]))
                                 : 0.0;
        } else {
          edge_dofs[e][m] = dofs++;
        }
      }
    }
  }

  SkeletonSystem sys{SparseOperator(dofs), Eigen::VectorXd::Zero(dofs), dofs,
                     {},                   {},                          std::move(edge_dofs),
                     std::move(edge_fixed), config};
  sys.recover_mat.reserve(mesh.num_triangles());
  sys.recover_vec.reserve(mesh.num_triangles());

  const Workspace ws(config);
  std::vector<int> gidx(3 * per_edge);
  std::vector<double> gfix(3 * per_edge);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const LocalSystem local = local_assemble_ws(config, mesh, t, ws);
    const CondensedLocal cond = condense(local);

    for (int side = 0; side < 3; ++side) {
      const int ge = local.edge_ids[side];
      for (int m = 0; m < per_edge; ++m) {
        gidx[side * per_edge + m] = sys.edge_dofs[ge][m];
        gfix[side * per_edge + m] = sys.edge_fixed[ge][m];
      }
    }
    for (int i = 0; i < 3 * per_edge; ++i) {
      if (gidx[i] < 0) continue;
      sys.rhs[gidx[i]] += cond.load[i];
      for (int j = 0; j < 3 * per_edge; ++j) {
        if (gidx[j] >= 0)
          sys.op.add(gidx[i], gidx[j], cond.schur(i, j));
        else
          sys.rhs[gidx[i]] -= cond.schur(i, j) * gfix[j];
      }
    }
    sys.recover_mat.push_back(cond.recover_mat);
    sys.recover_vec.push_back(cond.recover_vec);
  }
  sys.op.finalize();
  return sys;
}

HdgSolution solve(const SkeletonSystem& sys, const Mesh& mesh) {
  const SchemeConfig& config = sys.config;
  HdgSolution sol;
  sol.k = config.k;
  sol.scheme = config.scheme;
  sol.hybrid = config.hybrid;
  sol.s = config.s;
  sol.tau0 = config.tau_coefficient();
  sol.skeleton_dofs = sys.dofs;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.dofs);
  try {
    if (sys.dofs == 0) {
      sol.solver = "none";
    } else if (sys.dofs < kDenseDofLimit) {
      const DenseFactorization f(sys.op.dense());
      x = f.solve(sys.rhs);
      sol.solver = "dense";
    } else {
      const int maxiter =
          static_cast<int>(std::ceil(20.0 * std::sqrt(static_cast<double>(sys.dofs))));
      KrylovStats stats;
      if (config.s == 1.0) {
        x = cg(sys.op, sys.rhs, kSolverTol, maxiter, &stats);
        sol.solver = "cg";
      } else {
        x = krylov_nonsym(sys.op, sys.rhs, kSolverTol, maxiter, &stats);
        sol.solver = "tfqmr";
      }
      sol.solver_iterations = stats.iterations;
    }
    const double bnorm = sys.rhs.norm();
    if (sys.dofs > 0 && bnorm > 0.0) {
      // Plain relative residual, or the normwise backward error at the
      // rounding floor of residual evaluation.
      const double res = (sys.op.apply(x) - sys.rhs).norm();
      if (res > kSolverTol * bnorm &&
          res > kSolverTol * (bnorm + sys.op.inf_norm() * x.norm()))
        throw std::runtime_error("skeleton residual exceeds tolerance");
    }
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(
        "hdg solve failed (" + config_tag(config) + "): " + e.what() +
        (config.s == 1.0 ? " [a larger tau0 may restore positive definiteness]" : ""));
  }

  const int per_edge = config.hybrid_degree() + 1;
  const auto trace_coeff = [&](int edge, int m) {
    const int g = sys.edge_dofs[edge][m];
    return g >= 0 ? x[g] : sys.edge_fixed[edge][m];
  };

  sol.element.resize(mesh.num_triangles());
  Eigen::VectorXd uhat(3 * per_edge);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int side = 0; side < 3; ++side) {
      const int ge = mesh.triangle_edges[t][side];
      for (int m = 0; m < per_edge; ++m)
        uhat[side * per_edge + m] = trace_coeff(ge, m);
    }
    sol.element[t] = sys.recover_vec[t] - sys.recover_mat[t] * uhat;
  }

  sol.trace.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    sol.trace[e].resize(per_edge);
    for (int m = 0; m < per_edge; ++m) sol.trace[e][m] = trace_coeff(e, m);
  }
  return sol;
}

HdgSolution solve(const SchemeConfig& config, const Mesh& mesh) {
  return solve(assemble_skeleton(config, mesh), mesh);
}

double element_value(const Mesh& mesh, const TriBasis& basis, const HdgSolution& sol,
                     int element, const Eigen::Vector2d& x) {
  const ElementMap map = element_map(mesh, element);
  return basis.values(map.to_reference(x)).dot(sol.element[element]);
}

Eigen::Vector2d element_gradient(const Mesh& mesh, const TriBasis& basis,
                                 const HdgSolution& sol, int element,
                                 const Eigen::Vector2d& x) {
  const ElementMap map = element_map(mesh, element);
  const Eigen::MatrixXd grad = basis.gradients(map.to_reference(x)) * map.inv_jac;
  return grad.transpose() * sol.element[element];
}

double trace_value(const HdgSolution& sol, int edge, double t) {
  const int l = static_cast<int>(sol.trace[edge].size()) - 1;
  return trace_basis_at(sol.hybrid, l, t).dot(sol.trace[edge]);
}

double trace_mean(const HdgSolution& sol, int edge) {
  const int l = static_cast<int>(sol.trace[edge].size()) - 1;
  const QuadratureRule rule = gauss_legendre(l / 2 + 1);
  double mean = 0.0;
  for (int q = 0; q < rule.size(); ++q)
    mean += 0.5 * rule.weights[q] * trace_value(sol, edge, rule.points[q]);
  return mean;
}

Eigen::Vector2d numerical_flux(const Mesh& mesh, const HdgSolution& sol, int element,
                               int edge, const Eigen::Vector2d& point) {
  int side = -1;
  for (int s = 0; s < 3; ++s)
    if (mesh.triangle_edges[element][s] == edge) side = s;
  if (side < 0)
    throw std::invalid_argument("numerical_flux: edge does not bound the element");

  const Eigen::Vector2d a = mesh.nodes[mesh.edges[edge].a];
  const Eigen::Vector2d b = mesh.nodes[mesh.edges[edge].b];
  const double h_e = (b - a).norm();
  const Eigen::Vector2d d = (b - a) / h_e;
  const Eigen::Vector2d rel = point - mesh.edge_midpoint(edge);
  const double off = std::abs(d.x() * rel.y() - d.y() * rel.x());
  const double t = 2.0 * rel.dot(d) / h_e;
  if (off > 1e-9 * h_e || std::abs(t) > 1.0 + 1e-9)
    throw std::invalid_argument("numerical_flux: point is not on the edge");

  const TriBasis basis(sol.k);
  const double tau = sol.tau0 / h_e;
  const double u = element_value(mesh, basis, sol, element, point);
  const double uhat = trace_value(sol, edge, t);
  const Eigen::Vector2d n = outward_normal(mesh, element, side);
  return element_gradient(mesh, basis, sol, element, point) + tau * (uhat - u) * n;
}

double local_conservation_residual(const Mesh& mesh, const HdgSolution& sol,
                                   const SchemeConfig& config, int element) {
  const TriBasis basis(sol.k);
  const ElementMap map = element_map(mesh, element);

  // Flux side with an independent exact rule (integrands are polynomials of
  // degree <= k along each edge).
  const QuadratureRule erule = gauss_legendre(sol.k + 2);
  double flux = 0.0;
  for (int side = 0; side < 3; ++side) {
    const int ge = mesh.triangle_edges[element][side];
    const double h_e = mesh.edge_length(ge);
    const double tau = sol.tau0 / h_e;
    const Eigen::Vector2d n = outward_normal(mesh, element, side);
    for (int q = 0; q < erule.size(); ++q) {
      const double t = erule.points[q];
      const Eigen::Vector2d x = mesh.edge_point(ge, t);
      const double u = element_value(mesh, basis, sol, element, x);
      const double uhat = trace_value(sol, ge, t);
      const Eigen::Vector2d grad = element_gradient(mesh, basis, sol, element, x);
      flux += 0.5 * erule.weights[q] * h_e * (grad.dot(n) + tau * (uhat - u));
    }
  }

  // Load side with the assembly quadrature: the balance is an identity of the
  // discrete system, so both sides must see the same load functional.
  const TriQuadratureRule vrule = tri_quadrature(config.volume_rule_exactness());
  double load = 0.0;
  if (config.source) {
    for (int q = 0; q < vrule.size(); ++q) {
      const Eigen::Vector2d x = map.to_physical(vrule.points.row(q).transpose());
      load += vrule.weights[q] * map.det * config.source(x);
    }
  }
  return std::abs(flux + load) / (1.0 + std::abs(load));
}

}  // namespace rhdg
