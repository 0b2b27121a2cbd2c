#include <cmath>

#include <doctest.h>

#include "rhdg/norms.hpp"
#include "rhdg/study.hpp"

using namespace rhdg;

namespace {

// Discrete representation of a smooth function: element coefficients by
// projection (exact for polynomials of degree <= k) and traces by the
// degree-(k-1) edge projection.
HdgSolution interpolate_as_solution(const Mesh& mesh, const SchemeConfig& config,
                                    const std::function<double(const Eigen::Vector2d&)>& u) {
  const TriBasis basis(config.k);
  const TriQuadratureRule vrule = tri_quadrature(2 * config.k + 6);
  const QuadratureRule erule = gauss_legendre(config.k + 4);

  HdgSolution sol;
  sol.k = config.k;
  sol.scheme = config.scheme;
  sol.hybrid = config.hybrid;
  sol.s = config.s;
  sol.tau0 = config.tau_coefficient();
  sol.element.resize(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = element_map(mesh, t);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    for (int q = 0; q < vrule.size(); ++q) {
      const Eigen::Vector2d p = vrule.points.row(q).transpose();
      c += vrule.weights[q] * u(map.to_physical(p)) * basis.values(p);
    }
    sol.element[t] = c;
  }
  sol.trace.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    Eigen::VectorXd values(erule.size());
    for (int q = 0; q < erule.size(); ++q)
      values[q] = u(mesh.edge_point(e, erule.points[q]));
    sol.trace[e] = project_edge(erule, values, config.hybrid_degree());
  }
  return sol;
}

}  // namespace

TEST_SUITE("norms") {

TEST_CASE("an exactly represented polynomial gives vanishing errors") {
  const Problem poly = make_problem("poly-patch");
  const Mesh mesh = generate_unit_square(3, 0.2, 21);
  SchemeConfig config;
  config.k = 2;
  config.dirichlet = poly.dirichlet;
  const HdgSolution sol = interpolate_as_solution(mesh, config, poly.exact.value);
  const ErrorReport report = error_report(mesh, sol, poly.exact, config);
  CHECK(report.l2 <= 1e-10);
  CHECK(report.h1_broken <= 1e-10);
  CHECK(report.h2_weighted <= 1e-10);
  CHECK(report.jump <= 1e-10);
  CHECK(report.energy <= 1e-10);
}

TEST_CASE("the zero solution against sin sin has L2 error exactly one half") {
  const Problem sinsin = make_problem("sinsin");
  const Mesh mesh = generate_unit_square(6, 0.0);
  SchemeConfig config;
  config.k = 1;
  const HdgSolution zero = solve(config, mesh);  // f = 0, g = 0
  const ErrorReport report = error_report(mesh, zero, sinsin.exact, config);
  CHECK(report.l2 == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("energy norm squares to the sum of its parts") {
  const Problem sinsin = make_problem("sinsin");
  const Mesh mesh = generate_unit_square(4, 0.15, 33);
  for (int k : {1, 2}) {
    SchemeConfig config;
    config.k = k;
    config.source = sinsin.source;
    const HdgSolution sol = solve(config, mesh);
    const ErrorReport r = error_report(mesh, sol, sinsin.exact, config);
    const double sum = r.h1_broken * r.h1_broken + r.h2_weighted * r.h2_weighted +
                       r.jump * r.jump;
    CHECK(std::abs(r.energy * r.energy - sum) <= 1e-12 * r.energy * r.energy);
    CHECK(r.l2 >= 0.0);
    CHECK(r.boundary_mean_mismatch <= 1e-12);
  }
}

TEST_CASE("every seminorm is absolutely homogeneous in the discrete pair") {
  const Problem sinsin = make_problem("sinsin");
  const Mesh mesh = generate_unit_square(3, 0.1, 12);
  SchemeConfig config;
  config.k = 2;
  config.source = sinsin.source;
  HdgSolution sol = solve(config, mesh);

  // Against the zero exact solution the report measures the pair itself.
  ExactSolution zero;
  zero.value = [](const Eigen::Vector2d&) { return 0.0; };
  zero.gradient = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  zero.hessian = [](const Eigen::Vector2d&) { return Eigen::Matrix2d::Zero().eval(); };

  SchemeConfig plain;
  plain.k = 2;
  const ErrorReport base = error_report(mesh, sol, zero, plain);
  const double c = -2.5;
  for (auto& v : sol.element) v *= c;
  for (auto& v : sol.trace) v *= c;
  const ErrorReport scaled = error_report(mesh, sol, zero, plain);
  CHECK(scaled.l2 == doctest::Approx(std::abs(c) * base.l2).epsilon(1e-12));
  CHECK(scaled.h1_broken == doctest::Approx(std::abs(c) * base.h1_broken).epsilon(1e-12));
  CHECK(scaled.h2_weighted ==
        doctest::Approx(std::abs(c) * base.h2_weighted).epsilon(1e-12));
  CHECK(scaled.jump == doctest::Approx(std::abs(c) * base.jump).epsilon(1e-12));
  CHECK(scaled.energy == doctest::Approx(std::abs(c) * base.energy).epsilon(1e-12));
}

TEST_CASE("raising the quadrature exactness barely moves the reported errors") {
  const Problem sinsin = make_problem("sinsin");
  const Mesh mesh = refine_uniform(generate_unit_square(4, 0.15, 27));
  SchemeConfig config;
  config.k = 2;
  config.source = sinsin.source;
  const HdgSolution sol = solve(config, mesh);
  const ErrorReport a = error_report(mesh, sol, sinsin.exact, config, 2 * config.k + 6);
  const ErrorReport b = error_report(mesh, sol, sinsin.exact, config, 2 * config.k + 10);
  CHECK(std::abs(a.l2 - b.l2) / b.l2 < 1e-3);
  CHECK(std::abs(a.h1_broken - b.h1_broken) / b.h1_broken < 1e-3);
  CHECK(std::abs(a.energy - b.energy) / b.energy < 1e-3);
}

TEST_CASE("per-step orders follow the ratio formula") {
  // Errors (1e-2, 2.5e-3) under halving: order 2 exactly.
  const std::vector<std::pair<double, double>> halving = {{0.2, 1e-2}, {0.1, 2.5e-3}};
  const std::vector<double> orders = fit_orders(halving);
  CHECK(std::isnan(orders[0]));
  CHECK(orders[1] == doctest::Approx(2.0).epsilon(1e-12));

  // Constant errors: order 0.
  const std::vector<double> flat =
      fit_orders({{0.2, 3e-3}, {0.1, 3e-3}, {0.05, 3e-3}});
  CHECK(flat[1] == doctest::Approx(0.0));
  CHECK(flat[2] == doctest::Approx(0.0));

  // Vanishing errors are marked undefined.
  const std::vector<double> marked = fit_orders({{0.2, 1e-3}, {0.1, 0.0}});
  CHECK(std::isnan(marked[1]));

  // The formula recovers the generating exponent: with the mesh-size ratio
  // r = (e1/e2)^(1/p) the fitted order is p, here p = 2.48 for the error
  // pair 6.7399e-3 -> 1.5971e-3.
  const double p = 2.48;
  const double r = std::pow(6.7399e-3 / 1.5971e-3, 1.0 / p);
  const std::vector<double> roundtrip =
      fit_orders({{0.1, 6.7399e-3}, {0.1 / r, 1.5971e-3}});
  CHECK(roundtrip[1] == doctest::Approx(p).epsilon(1e-12));

  CHECK_THROWS_AS(fit_order_least_squares({{0.1, 1e-3}}), std::invalid_argument);
  CHECK(fit_order_least_squares({{0.2, 4e-2}, {0.1, 1e-2}, {0.05, 2.5e-3}}) ==
        doctest::Approx(2.0).epsilon(1e-12));
}

}  // TEST_SUITE
