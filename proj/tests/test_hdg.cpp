#include <cmath>
#include <random>

#include <doctest.h>

#include "rhdg/hdg.hpp"
#include "rhdg/mesh.hpp"
#include "rhdg/study.hpp"

using namespace rhdg;

namespace {

const Mesh& two_triangle_square() {
  static const Mesh mesh = read_mesh("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n");
  return mesh;
}

// Independent local assembler: high-order edge quadrature everywhere and the
// reduced stabilization built from explicit projection matrices (monomial
// moments, mass-matrix solves); the standard scheme keeps the full products.
LocalSystem oracle_local(const SchemeConfig& config, const Mesh& mesh, int element) {
  const int k = config.k;
  const bool reduced = config.scheme == Scheme::reduced;
  const TriBasis basis(k);
  const int nk = basis.size();
  const int per_edge = config.hybrid_degree() + 1;
  const ElementMap map = element_map(mesh, element);

  LocalSystem sys;
  sys.element = element;
  sys.per_edge = per_edge;
  sys.edge_ids = mesh.triangle_edges[element];
  sys.uu = Eigen::MatrixXd::Zero(nk, nk);
  sys.ue = Eigen::MatrixXd::Zero(nk, 3 * per_edge);
  sys.eu = Eigen::MatrixXd::Zero(3 * per_edge, nk);
  sys.ee = Eigen::MatrixXd::Zero(3 * per_edge, 3 * per_edge);
  sys.load = Eigen::VectorXd::Zero(nk);

  const TriQuadratureRule vrule = tri_quadrature(2 * k + 2);
  for (int q = 0; q < vrule.size(); ++q) {
    const Eigen::Vector2d p = vrule.points.row(q).transpose();
    const Eigen::MatrixXd grad = basis.gradients(p) * map.inv_jac;
    sys.uu += vrule.weights[q] * map.det * grad * grad.transpose();
  }

  const QuadratureRule erule = gauss_legendre(k + 3);
  const int nq = erule.size();
  // Monomial moment matrix of P^{k-1} on [-1,1].
  Eigen::MatrixXd mono(nq, k);
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < k; ++i) mono(q, i) = std::pow(erule.points[q], i);
  Eigen::MatrixXd moments = Eigen::MatrixXd::Zero(k, k);
  for (int q = 0; q < nq; ++q)
    moments += erule.weights[q] * mono.row(q).transpose() * mono.row(q);
  const Eigen::LDLT<Eigen::MatrixXd> moments_f(moments);
  const auto project = [&](const Eigen::MatrixXd& samples) {
    if (!reduced) return samples;  // full stabilization keeps the raw traces
    // samples: nq x m function values -> nq x m values of the projections
    const Eigen::MatrixXd rhs =
        mono.transpose() * erule.weights.asDiagonal() * samples;
    return Eigen::MatrixXd(mono * moments_f.solve(rhs));
  };

  const double tau_coeff = config.tau_coefficient();
  for (int side = 0; side < 3; ++side) {
    const int ge = sys.edge_ids[side];
    const double h_e = mesh.edge_length(ge);
    const double tau = tau_coeff / h_e;
    const Eigen::Vector2d n = outward_normal(mesh, element, side);

    Eigen::MatrixXd phi(nq, nk), nd(nq, nk), psi(nq, per_edge);
    for (int q = 0; q < nq; ++q) {
      const Eigen::Vector2d x = mesh.edge_point(ge, erule.points[q]);
      const Eigen::Vector2d ref = map.to_reference(x);
      phi.row(q) = basis.values(ref).transpose();
      nd.row(q) = ((basis.gradients(ref) * map.inv_jac) * n).transpose();
      psi.row(q) = edge_basis_values(per_edge - 1, erule.points[q]).transpose();
    }
    const Eigen::MatrixXd pphi = project(phi);
    const Eigen::MatrixXd ppsi = project(psi);

    const Eigen::MatrixXd w = (0.5 * h_e) * erule.weights.asDiagonal();
    sys.uu -= phi.transpose() * w * nd;                    // <n.grad u, -v>
    sys.eu.block(side * per_edge, 0, per_edge, nk) += psi.transpose() * w * nd;
    sys.uu -= config.s * nd.transpose() * w * phi;         // s<n.grad v, -u>
    sys.ue.block(0, side * per_edge, nk, per_edge) += config.s * nd.transpose() * w * psi;
    sys.uu += tau * pphi.transpose() * w * pphi;           // projected stabilization
    sys.ue.block(0, side * per_edge, nk, per_edge) -= tau * pphi.transpose() * w * ppsi;
    sys.eu.block(side * per_edge, 0, per_edge, nk) -= tau * ppsi.transpose() * w * pphi;
    sys.ee.block(side * per_edge, side * per_edge, per_edge, per_edge) +=
        tau * ppsi.transpose() * w * ppsi;
  }
  return sys;
}

double block_distance(const LocalSystem& a, const LocalSystem& b) {
  double d = (a.uu - b.uu).cwiseAbs().maxCoeff();
  d = std::max(d, (a.ue - b.ue).cwiseAbs().maxCoeff());
  d = std::max(d, (a.eu - b.eu).cwiseAbs().maxCoeff());
  d = std::max(d, (a.ee - b.ee).cwiseAbs().maxCoeff());
  return d;
}

double block_scale(const LocalSystem& a) {
  return std::max({a.uu.cwiseAbs().maxCoeff(), a.ue.cwiseAbs().maxCoeff(),
                   a.eu.cwiseAbs().maxCoeff(), a.ee.cwiseAbs().maxCoeff()});
}

// Dense assembly of the full (uncondensed) saddle system over element dofs
// plus interior trace dofs; Dirichlet traces are eliminated into the load.
struct FullSaddle {
  Eigen::MatrixXd mat;
  Eigen::VectorXd rhs;
  int elem_dofs = 0;
  std::vector<int> edge_offset;  // -1 on boundary edges
};

FullSaddle build_full_saddle(const SchemeConfig& config, const Mesh& mesh,
                             const SkeletonSystem& sys) {
  const int per_edge = config.hybrid_degree() + 1;
  const TriBasis basis(config.k);
  const int nk = basis.size();

  FullSaddle full;
  full.elem_dofs = nk * mesh.num_triangles();
  full.edge_offset.assign(mesh.num_edges(), -1);
  int dim = full.elem_dofs;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!mesh.edges[e].boundary) {
      full.edge_offset[e] = dim;
      dim += per_edge;
    }
  full.mat = Eigen::MatrixXd::Zero(dim, dim);
  full.rhs = Eigen::VectorXd::Zero(dim);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const LocalSystem local = local_assemble(config, mesh, t);
    const int ut = nk * t;
    full.mat.block(ut, ut, nk, nk) += local.uu;
    full.rhs.segment(ut, nk) += local.load;
    for (int side = 0; side < 3; ++side) {
      const int ge = local.edge_ids[side];
      const int col = full.edge_offset[ge];
      const auto ue = local.ue.block(0, side * per_edge, nk, per_edge);
      const auto eu = local.eu.block(side * per_edge, 0, per_edge, nk);
      const auto ee = local.ee.block(side * per_edge, side * per_edge, per_edge, per_edge);
      if (col >= 0) {
        full.mat.block(ut, col, nk, per_edge) += ue;
        full.mat.block(col, ut, per_edge, nk) += eu;
        full.mat.block(col, col, per_edge, per_edge) += ee;
      } else {
        const Eigen::VectorXd fixed = sys.edge_fixed[ge];
        full.rhs.segment(ut, nk) -= ue * fixed;
        // Trace test rows on Dirichlet edges are dropped.
      }
    }
  }
  return full;
}

}  // namespace

TEST_SUITE("hdg") {

TEST_CASE("local system: symmetry at s=1 and annihilation of matched constants") {
  const Mesh& mesh = two_triangle_square();
  for (int k : {1, 2, 3}) {
    SchemeConfig config;
    config.k = k;
    const LocalSystem local = local_assemble(config, mesh, 0);

    const int nk = local.uu.rows();
    const int nh = local.ee.rows();
    Eigen::MatrixXd full(nk + nh, nk + nh);
    full << local.uu, local.ue, local.eu, local.ee;
    const double scale = full.cwiseAbs().maxCoeff();
    CHECK((full - full.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * scale);

    // The matched constant state (u = c, uhat = c) is in the kernel of the
    // local bilinear form.
    Eigen::VectorXd state = Eigen::VectorXd::Zero(nk + nh);
    state[0] = 1.0 / std::sqrt(2.0);  // element constant 1
    const int per_edge = local.per_edge;
    for (int side = 0; side < 3; ++side)
      state[nk + side * per_edge] = std::sqrt(2.0);  // modal constant 1
    CHECK((full * state).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("reduced stabilization by Gauss points equals explicit projection") {
  const Mesh mesh = generate_unit_square(2, 0.2, 17);
  for (int k : {1, 2, 3}) {
    for (double s : {1.0, -1.0, 0.0}) {
      for (const Scheme scheme : {Scheme::reduced, Scheme::standard}) {
        SchemeConfig config;
        config.k = k;
        config.s = s;
        config.scheme = scheme;
        for (int t : {0, 3}) {
          const LocalSystem fast = local_assemble(config, mesh, t);
          const LocalSystem slow = oracle_local(config, mesh, t);
          CHECK(block_distance(fast, slow) <= 1e-12 * block_scale(slow));
        }
      }
    }
  }
}

TEST_CASE("condensation: recovery satisfies the element block row exactly") {
  const Mesh mesh = generate_unit_square(2, 0.15, 5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  for (int k : {1, 2}) {
    SchemeConfig config;
    config.k = k;
    config.source = [](const Eigen::Vector2d& x) { return x.x() - x.y(); };
    const LocalSystem local = local_assemble(config, mesh, 1);
    const CondensedLocal cond = condense(local);

    Eigen::VectorXd uhat(local.ee.rows());
    for (int i = 0; i < uhat.size(); ++i) uhat[i] = coeff(rng);
    const Eigen::VectorXd u = cond.recover_vec - cond.recover_mat * uhat;
    const double scale = local.uu.cwiseAbs().maxCoeff();
    CHECK((local.uu * u + local.ue * uhat - local.load).cwiseAbs().maxCoeff() <=
          1e-12 * scale);

    // Schur complement of a symmetric matrix stays symmetric (s = 1).
    CHECK((cond.schur - cond.schur.transpose()).cwiseAbs().maxCoeff() <=
          1e-12 * cond.schur.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("condensation reports the element of a singular block") {
  LocalSystem broken;
  broken.element = 17;
  broken.per_edge = 1;
  broken.uu = Eigen::MatrixXd::Zero(3, 3);
  broken.ue = Eigen::MatrixXd::Zero(3, 3);
  broken.eu = Eigen::MatrixXd::Zero(3, 3);
  broken.ee = Eigen::MatrixXd::Zero(3, 3);
  broken.load = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_WITH_AS(condense(broken), doctest::Contains("element 17"),
                       std::runtime_error);
}

TEST_CASE("skeleton dimensions on the one-cell square") {
  const Mesh mesh = generate_unit_square(1, 0.0);
  SchemeConfig reduced;
  reduced.k = 1;
  CHECK(assemble_skeleton(reduced, mesh).dofs == 1);

  SchemeConfig standard;
  standard.k = 1;
  standard.scheme = Scheme::standard;
  CHECK(assemble_skeleton(standard, mesh).dofs == 2);

  // Discontinuous traces: interior edges x (hybrid degree + 1).
  const Mesh finer = generate_unit_square(3, 0.1, 8);
  for (int k : {1, 2, 3}) {
    SchemeConfig config;
    config.k = k;
    CHECK(assemble_skeleton(config, finer).dofs == finer.num_interior_edges() * k);
  }
}

TEST_CASE("continuous traces share vertex dofs") {
  const Mesh mesh = generate_unit_square(2, 0.0);
  SchemeConfig config;
  config.k = 2;
  config.hybrid = TraceContinuity::continuous;
  // One interior vertex, no edge-interior dofs at trace degree 1.
  CHECK(assemble_skeleton(config, mesh).dofs == 1);

  config.k = 3;  // trace degree 2: one midpoint dof per interior edge
  CHECK(assemble_skeleton(config, mesh).dofs == 1 + mesh.num_interior_edges());

  SchemeConfig bad;
  bad.k = 1;
  bad.hybrid = TraceContinuity::continuous;
  CHECK_THROWS_AS(assemble_skeleton(bad, mesh), std::invalid_argument);
}

TEST_CASE("zero data gives the zero solution") {
  const Mesh mesh = generate_unit_square(2, 0.1, 3);
  SchemeConfig config;
  config.k = 2;
  const HdgSolution sol = solve(config, mesh);
  for (const auto& c : sol.element) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
  for (const auto& c : sol.trace) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("polynomial solutions are reproduced through boundary data") {
  const Problem linear = make_problem("linear");
  const Problem poly = make_problem("poly-patch");

  // u = x + y on the two-triangle mesh, k = 1.
  {
    SchemeConfig config;
    config.k = 1;
    config.source = linear.source;
    config.dirichlet = linear.dirichlet;
    const HdgSolution sol = solve(config, two_triangle_square());
    const TriBasis basis(1);
    for (const Eigen::Vector2d& x :
         {Eigen::Vector2d(0.6, 0.2), Eigen::Vector2d(0.2, 0.7)}) {
      const int t = x.x() > x.y() ? 0 : 1;
      CHECK(element_value(two_triangle_square(), basis, sol, t, x) ==
            doctest::Approx(x.x() + x.y()).epsilon(1e-10));
    }
  }

  // u = x^2 + y^2, k = 2, perturbed mesh: exact to coefficient level.
  {
    const Mesh mesh = generate_unit_square(3, 0.2, 11);
    SchemeConfig config;
    config.k = 2;
    config.source = poly.source;
    config.dirichlet = poly.dirichlet;
    CHECK(patch_exactness_error(mesh, config, poly.exact) <= 1e-9);
  }
}

TEST_CASE("condensed and uncondensed routes give the same solution") {
  const Mesh mesh = generate_unit_square(2, 0.2, 13);
  const Problem poly = make_problem("poly-patch");
  for (int k : {1, 2}) {
    for (double s : {1.0, -1.0}) {
      SchemeConfig config;
      config.k = k;
      config.s = s;
      config.scheme = k == 1 && s == 1.0 ? Scheme::standard : Scheme::reduced;
      config.source = poly.source;
      config.dirichlet = poly.dirichlet;

      const SkeletonSystem sys = assemble_skeleton(config, mesh);
      const HdgSolution sol = solve(sys, mesh);

      const FullSaddle full = build_full_saddle(config, mesh, sys);
      const Eigen::VectorXd z = full.mat.partialPivLu().solve(full.rhs);

      const TriBasis basis(k);
      const int nk = basis.size();
      double worst = 0.0;
      for (int t = 0; t < mesh.num_triangles(); ++t)
        worst = std::max(
            worst, (z.segment(nk * t, nk) - sol.element[t]).cwiseAbs().maxCoeff());
      const int per_edge = config.hybrid_degree() + 1;
      for (int e = 0; e < mesh.num_edges(); ++e)
        if (full.edge_offset[e] >= 0)
          worst = std::max(worst, (z.segment(full.edge_offset[e], per_edge) -
                                   sol.trace[e])
                                      .cwiseAbs()
                                      .maxCoeff());
      CHECK(worst <= 1e-10);

      // The recovered pair satisfies the uncondensed system.
      Eigen::VectorXd pair(full.mat.rows());
      for (int t = 0; t < mesh.num_triangles(); ++t)
        pair.segment(nk * t, nk) = sol.element[t];
      for (int e = 0; e < mesh.num_edges(); ++e)
        if (full.edge_offset[e] >= 0) pair.segment(full.edge_offset[e], per_edge) = sol.trace[e];
      CHECK((full.mat * pair - full.rhs).norm() <= 1e-10 * (1.0 + full.rhs.norm()));
    }
  }
}

TEST_CASE("numerical flux: constants vanish, linears are exact, random re-check") {
  const Mesh& mesh = two_triangle_square();
  const Problem linear = make_problem("linear");

  SchemeConfig config;
  config.k = 1;
  config.source = linear.source;
  config.dirichlet = linear.dirichlet;
  const HdgSolution sol = solve(config, mesh);

  // u = x + y is reproduced, so the flux is its gradient (1,1) with no jump.
  const Eigen::Vector2d mid = mesh.edge_midpoint(mesh.triangle_edges[0][0]);
  const Eigen::Vector2d flux =
      numerical_flux(mesh, sol, 0, mesh.triangle_edges[0][0], mid);
  CHECK(flux.x() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(flux.y() == doctest::Approx(1.0).epsilon(1e-9));

  // Constant solution: zero flux.
  SchemeConfig cconf;
  cconf.k = 1;
  cconf.dirichlet = [](const Eigen::Vector2d&) { return 4.0; };
  const HdgSolution csol = solve(cconf, mesh);
  const Eigen::Vector2d cflux =
      numerical_flux(mesh, csol, 1, mesh.triangle_edges[1][1],
                     mesh.edge_point(mesh.triangle_edges[1][1], 0.37));
  CHECK(cflux.norm() <= 1e-12);

  // Random converged solution: direct re-evaluation from the coefficients.
  const Mesh rmesh = generate_unit_square(3, 0.2, 6);
  SchemeConfig rconf;
  rconf.k = 2;
  rconf.source = make_problem("sinsin").source;
  const HdgSolution rsol = solve(rconf, rmesh);
  const int element = 7;
  const int edge = rmesh.triangle_edges[element][2];
  const double tq = -0.41;
  const Eigen::Vector2d x = rmesh.edge_point(edge, tq);
  const Eigen::Vector2d got = numerical_flux(rmesh, rsol, element, edge, x);

  const TriBasis basis(2);
  const double eps = 1e-6;
  Eigen::Vector2d fd_grad(
      (element_value(rmesh, basis, rsol, element, x + Eigen::Vector2d(eps, 0)) -
       element_value(rmesh, basis, rsol, element, x - Eigen::Vector2d(eps, 0))) /
          (2 * eps),
      (element_value(rmesh, basis, rsol, element, x + Eigen::Vector2d(0, eps)) -
       element_value(rmesh, basis, rsol, element, x - Eigen::Vector2d(0, eps))) /
          (2 * eps));
  int side = -1;
  for (int s2 = 0; s2 < 3; ++s2)
    if (rmesh.triangle_edges[element][s2] == edge) side = s2;
  const double tau = rsol.tau0 / rmesh.edge_length(edge);
  const double jump = edge_basis_values(1, tq).dot(rsol.trace[edge]) -
                      element_value(rmesh, basis, rsol, element, x);
  const Eigen::Vector2d expected =
      fd_grad + tau * jump * outward_normal(rmesh, element, side);
  CHECK((got - expected).norm() <= 1e-5);

  // Off-edge points are rejected.
  CHECK_THROWS_AS(numerical_flux(rmesh, rsol, element, edge,
                                 x + Eigen::Vector2d(0.05, 0.05)),
                  std::invalid_argument);
}

TEST_CASE("local conservation holds element-wise and under refinement") {
  const Problem sinsin = make_problem("sinsin");
  Mesh mesh = generate_unit_square(2, 0.2, 19);
  for (int level = 0; level < 3; ++level) {
    if (level > 0) mesh = refine_uniform(mesh);
    SchemeConfig config;
    config.k = level == 0 ? 3 : 1;
    config.source = sinsin.source;
    const HdgSolution sol = solve(config, mesh);
    CHECK(conservation_max_residual(mesh, sol, config) <= 1e-10);
  }

  // Zero data: identically zero residual.
  SchemeConfig zero;
  zero.k = 1;
  const HdgSolution zsol = solve(zero, two_triangle_square());
  CHECK(local_conservation_residual(two_triangle_square(), zsol, zero, 0) == 0.0);
}

TEST_CASE("condensed operator is symmetric for s=1") {
  const Mesh mesh = generate_unit_square(3, 0.2, 23);
  for (int k : {1, 2, 3}) {
    SchemeConfig config;
    config.k = k;
    config.source = make_problem("sinsin").source;
    CHECK(skeleton_asymmetry(config, mesh) <= 1e-12);
  }
}

TEST_CASE("s=-1 energy identity over random discrete pairs") {
  const Mesh mesh = generate_unit_square(3, 0.15, 29);
  for (int k : {1, 2, 3})
    CHECK(coercivity_identity_deviation(mesh, k, 10.0 * k * k, 25, 31) <= 1e-11);
  CHECK(coercivity_identity_deviation(mesh, 1, 0.1, 25, 37) <= 1e-11);
}

TEST_CASE("s=-1 solves succeed with tiny stabilization") {
  const Mesh mesh = generate_unit_square(4, 0.15, 41);
  SchemeConfig config;
  config.k = 1;
  config.s = -1.0;
  config.tau0 = 0.1;
  config.source = make_problem("sinsin").source;
  const HdgSolution sol = solve(config, mesh);
  CHECK(sol.skeleton_dofs == mesh.num_interior_edges());
}

}  // TEST_SUITE
