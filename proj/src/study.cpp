#include "rhdg/study.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rhdg/crfem.hpp"
#include "rhdg/quadrature.hpp"

namespace rhdg {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), format, v);
  return buf;
}

std::string order_or(const double v, const char* blank) {
  return std::isnan(v) ? blank : fmt("%.2f", v);
}

std::vector<Mesh> mesh_levels(int base_n, double perturb, std::uint64_t seed, int levels) {
  std::vector<Mesh> meshes;
  meshes.push_back(generate_unit_square(base_n, perturb, seed));
  for (int l = 1; l < levels; ++l) meshes.push_back(refine_uniform(meshes.back()));
  return meshes;
}

}  // namespace

Problem make_problem(const std::string& id) {
  Problem p;
  p.id = id;
  if (id == "sinsin") {
    p.exact.value = [](const Eigen::Vector2d& x) {
      return std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    p.exact.gradient = [](const Eigen::Vector2d& x) {
      return Eigen::Vector2d(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                             kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
    p.exact.hessian = [](const Eigen::Vector2d& x) {
      const double ss = std::sin(kPi * x.x()) * std::sin(kPi * x.y());
      const double cc = std::cos(kPi * x.x()) * std::cos(kPi * x.y());
      Eigen::Matrix2d h;
      h << -kPi * kPi * ss, kPi * kPi * cc, kPi * kPi * cc, -kPi * kPi * ss;
      return h;
    };
    p.source = [](const Eigen::Vector2d& x) {
      return 2.0 * kPi * kPi * std::sin(kPi * x.x()) * std::sin(kPi * x.y());
    };
    p.dirichlet = {};  // homogeneous
  } else if (id == "poly-patch") {
    p.exact.value = [](const Eigen::Vector2d& x) { return x.squaredNorm(); };
    p.exact.gradient = [](const Eigen::Vector2d& x) { return Eigen::Vector2d(2.0 * x); };
    p.exact.hessian = [](const Eigen::Vector2d&) {
      return Eigen::Matrix2d(2.0 * Eigen::Matrix2d::Identity());
    };
    p.source = [](const Eigen::Vector2d&) { return -4.0; };
    p.dirichlet = p.exact.value;
  } else if (id == "linear") {
    p.exact.value = [](const Eigen::Vector2d& x) { return x.x() + x.y(); };
    p.exact.gradient = [](const Eigen::Vector2d&) { return Eigen::Vector2d(1.0, 1.0); };
    p.exact.hessian = [](const Eigen::Vector2d&) { return Eigen::Matrix2d(Eigen::Matrix2d::Zero()); };
    p.source = [](const Eigen::Vector2d&) { return 0.0; };
    p.dirichlet = p.exact.value;
  } else {
    throw std::invalid_argument("make_problem: unknown problem id '" + id + "'");
  }
  return p;
}

std::vector<StudyRow> run_study(const StudyConfig& config) {
  if (config.levels < 2)
    throw std::invalid_argument("run_study: at least two levels are needed for orders");
  if (config.ks.empty()) throw std::invalid_argument("run_study: empty degree list");
  const Problem problem = make_problem(config.problem);
  const std::vector<Mesh> meshes =
      mesh_levels(config.base_n, config.perturb, config.seed, config.levels);

  std::vector<StudyRow> rows;
  for (const int k : config.ks) {
    SchemeConfig sc;
    sc.k = k;
    sc.scheme = config.scheme;
    sc.hybrid = config.hybrid;
    sc.s = config.s;
    sc.tau0 = config.tau0;
    sc.source = problem.source;
    sc.dirichlet = problem.dirichlet;

    std::vector<std::pair<double, double>> l2s, h1s, energies;
    std::vector<StudyRow> block;
    for (int level = 0; level < config.levels; ++level) {
      try {
        const HdgSolution sol = solve(sc, meshes[level]);
        const ErrorReport err = error_report(meshes[level], sol, problem.exact, sc);
        StudyRow row;
        row.k = k;
        row.scheme = config.scheme == Scheme::reduced ? "reduced" : "standard";
        row.level = level + 1;
        row.h = err.h;
        row.dofs_skeleton = err.skeleton_dofs;
        row.l2 = err.l2;
        row.h1 = err.h1_broken;
        row.energy = err.energy;
        block.push_back(row);
        l2s.emplace_back(err.h, err.l2);
        h1s.emplace_back(err.h, err.h1_broken);
        energies.emplace_back(err.h, err.energy);
      } catch (const std::exception& e) {
        throw std::runtime_error("run_study: level " + std::to_string(level + 1) +
                                 ", k=" + std::to_string(k) + ": " + e.what());
      }
    }
    const std::vector<double> ol2 = fit_orders(l2s);
    const std::vector<double> oh1 = fit_orders(h1s);
    const std::vector<double> oen = fit_orders(energies);
    for (int level = 0; level < config.levels; ++level) {
      block[level].l2_order = ol2[level];
      block[level].h1_order = oh1[level];
      block[level].energy_order = oen[level];
      rows.push_back(block[level]);
    }
  }
  return rows;
}

std::string to_csv(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  out << "k,scheme,level,h,dofs_skeleton,l2,l2_order,h1,h1_order,energy,energy_order\n";
  for (const StudyRow& r : rows) {
    out << r.k << ',' << r.scheme << ',' << r.level << ',' << fmt("%.6e", r.h) << ','
        << r.dofs_skeleton << ',' << fmt("%.6e", r.l2) << ',' << order_or(r.l2_order, "")
        << ',' << fmt("%.6e", r.h1) << ',' << order_or(r.h1_order, "") << ','
        << fmt("%.6e", r.energy) << ',' << order_or(r.energy_order, "") << '\n';
  }
  return out.str();
}

std::string to_markdown(const std::vector<StudyRow>& rows) {
  std::ostringstream out;
  int current_k = -1;
  std::string current_scheme;
  for (const StudyRow& r : rows) {
    if (r.k != current_k || r.scheme != current_scheme) {
      current_k = r.k;
      current_scheme = r.scheme;
      const int l = r.scheme == "reduced" ? r.k - 1 : r.k;
      out << "\n### P" << r.k << "P" << l << " (" << r.scheme << ")\n\n";
      out << "| l | h | dofs | L2 error | order | H1 error | order | energy | order |\n";
      out << "|---|---|------|----------|-------|----------|-------|--------|-------|\n";
    }
    out << "| " << r.level << " | " << fmt("%.4e", r.h) << " | " << r.dofs_skeleton
        << " | " << fmt("%.4E", r.l2) << " | " << order_or(r.l2_order, "--") << " | "
        << fmt("%.4E", r.h1) << " | " << order_or(r.h1_order, "--") << " | "
        << fmt("%.4E", r.energy) << " | " << order_or(r.energy_order, "--") << " |\n";
  }
  return out.str();
}

double quadrature_identity_deviation(int kmax, int pairs_per_k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  double worst = 0.0;
  for (int k = 1; k <= kmax; ++k) {
    const QuadratureRule ref = gauss_legendre(k + 2);
    // Monomial Gram of P^{k-1} on [-1,1] under the reference rule.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
    Eigen::MatrixXd mono(ref.size(), k);
    for (int q = 0; q < ref.size(); ++q)
      for (int i = 0; i < k; ++i) mono(q, i) = std::pow(ref.points[q], i);
    for (int q = 0; q < ref.size(); ++q)
      gram.noalias() += ref.weights[q] * mono.row(q).transpose() * mono.row(q);
    const Eigen::LDLT<Eigen::MatrixXd> gram_f(gram);

    const Eigen::MatrixXd phi = edge_basis_values(k, ref.points);
    for (int pair = 0; pair < pairs_per_k; ++pair) {
      Eigen::VectorXd fc(k + 1), gc(k + 1);
      for (int i = 0; i <= k; ++i) {
        fc[i] = coeff(rng);
        gc[i] = coeff(rng);
      }
      const double fast = reduced_edge_mass(k, fc, gc);

      // Explicit projections in the monomial basis.
      const Eigen::VectorXd fv = phi * fc;
      const Eigen::VectorXd gv = phi * gc;
      const Eigen::VectorXd pf =
          gram_f.solve(mono.transpose() * (ref.weights.array() * fv.array()).matrix());
      const Eigen::VectorXd pg =
          gram_f.solve(mono.transpose() * (ref.weights.array() * gv.array()).matrix());
      double exact = 0.0;
      for (int q = 0; q < ref.size(); ++q)
        exact += ref.weights[q] * (mono.row(q) * pf)(0) * (mono.row(q) * pg)(0);

      worst = std::max(worst, std::abs(fast - exact) / (1.0 + std::abs(exact)));
    }
  }
  return worst;
}

double conservation_max_residual(const Mesh& mesh, const HdgSolution& sol,
                                 const SchemeConfig& config) {
  double worst = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t)
    worst = std::max(worst, local_conservation_residual(mesh, sol, config, t));
  return worst;
}

double skeleton_asymmetry(const SchemeConfig& config, const Mesh& mesh) {
  const SkeletonSystem sys = assemble_skeleton(config, mesh);
  const double scale = sys.op.max_abs();
  return scale > 0.0 ? sys.op.max_asymmetry() / scale : 0.0;
}

double coercivity_identity_deviation(const Mesh& mesh, int k, double tau0, int pairs,
                                     std::uint64_t seed) {
  SchemeConfig config;
  config.k = k;
  config.scheme = Scheme::reduced;
  config.s = -1.0;
  config.tau0 = tau0;

  std::vector<LocalSystem> locals;
  locals.reserve(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t)
    locals.push_back(local_assemble(config, mesh, t));

  const TriBasis basis(k);
  const int nk = basis.size();
  const int per_edge = config.hybrid_degree() + 1;
  const TriQuadratureRule vrule = tri_quadrature(2 * k);
  const QuadratureRule erule = gauss_legendre(std::min(k + 3, 20));

  // Monomial Gram of P^{k-1} on [-1,1] for the explicit projection route.
  Eigen::MatrixXd mono(erule.size(), k);
  for (int q = 0; q < erule.size(); ++q)
    for (int i = 0; i < k; ++i) mono(q, i) = std::pow(erule.points[q], i);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k, k);
  for (int q = 0; q < erule.size(); ++q)
    gram.noalias() += erule.weights[q] * mono.row(q).transpose() * mono.row(q);
  const Eigen::LDLT<Eigen::MatrixXd> gram_f(gram);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  double worst = 0.0;

  for (int pair = 0; pair < pairs; ++pair) {
    std::vector<Eigen::VectorXd> v(mesh.num_triangles());
    for (auto& c : v) {
      c.resize(nk);
      for (int i = 0; i < nk; ++i) c[i] = coeff(rng);
    }
    std::vector<Eigen::VectorXd> vhat(mesh.num_edges(),
                                      Eigen::VectorXd::Zero(per_edge));
    for (int e = 0; e < mesh.num_edges(); ++e)
      if (!mesh.edges[e].boundary)
        for (int m = 0; m < per_edge; ++m) vhat[e][m] = coeff(rng);

    double lhs = 0.0, seminorm = 0.0, stab = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const LocalSystem& loc = locals[t];
      Eigen::VectorXd hat(3 * per_edge);
      for (int side = 0; side < 3; ++side)
        hat.segment(side * per_edge, per_edge) = vhat[loc.edge_ids[side]];
      lhs += v[t].dot(loc.uu * v[t]) + v[t].dot(loc.ue * hat) +
             hat.dot(loc.eu * v[t]) + hat.dot(loc.ee * hat);

      const ElementMap map = element_map(mesh, t);
      for (int q = 0; q < vrule.size(); ++q) {
        const Eigen::MatrixXd grad =
            basis.gradients(vrule.points.row(q).transpose()) * map.inv_jac;
        seminorm += vrule.weights[q] * map.det * (grad.transpose() * v[t]).squaredNorm();
      }
      for (int side = 0; side < 3; ++side) {
        const int ge = loc.edge_ids[side];
        const double h_e = mesh.edge_length(ge);
        Eigen::VectorXd mismatch(erule.size());
        for (int q = 0; q < erule.size(); ++q) {
          const double tq = erule.points[q];
          const Eigen::Vector2d x = mesh.edge_point(ge, tq);
          const double trace = basis.values(map.to_reference(x)).dot(v[t]);
          const double hat_val =
              edge_basis_values(per_edge - 1, tq).dot(vhat[ge]);
          mismatch[q] = hat_val - trace;
        }
        const Eigen::VectorXd proj = gram_f.solve(
            mono.transpose() * (erule.weights.array() * mismatch.array()).matrix());
        const double norm2 = (0.5 * h_e) * proj.dot(gram * proj);
        stab += config.tau_coefficient() / h_e * norm2;
      }
    }
    const double rhs = seminorm + stab;
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300));
  }
  return worst;
}

double patch_exactness_error(const Mesh& mesh, const SchemeConfig& config,
                             const ExactSolution& exact) {
  const HdgSolution sol = solve(config, mesh);
  const TriBasis basis(config.k);
  const TriQuadratureRule rule = tri_quadrature(2 * config.k);
  double worst = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map = element_map(mesh, t);
    Eigen::VectorXd ref_coeffs = Eigen::VectorXd::Zero(basis.size());
    for (int q = 0; q < rule.size(); ++q) {
      const Eigen::Vector2d p = rule.points.row(q).transpose();
      ref_coeffs += rule.weights[q] * exact.value(map.to_physical(p)) * basis.values(p);
    }
    worst = std::max(worst, (sol.element[t] - ref_coeffs).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<CheckResult> run_checks(const std::string& suite) {
  std::vector<CheckResult> results;
  const auto add = [&results](const std::string& name, double measured, double threshold,
                              const std::string& detail) {
    results.push_back({name, measured <= threshold, measured, threshold, detail});
  };

  if (suite == "quadrature-identity") {
    add("quadrature-identity", quadrature_identity_deviation(5, 1000, 12345), 1e-12,
        "k=1..5, 1000 random pairs each");
  } else if (suite == "conservation") {
    const Problem prob = make_problem("sinsin");
    Mesh mesh = generate_unit_square(14, 0.15, 42);
    mesh = refine_uniform(refine_uniform(mesh));
    for (int k = 1; k <= 3; ++k) {
      SchemeConfig sc;
      sc.k = k;
      sc.source = prob.source;
      const HdgSolution sol = solve(sc, mesh);
      add("conservation-k" + std::to_string(k),
          conservation_max_residual(mesh, sol, sc), 1e-10, "sinsin, level 3");
    }
  } else if (suite == "cr-equivalence") {
    const Problem sinsin = make_problem("sinsin");
    const ScalarField one = [](const Eigen::Vector2d&) { return 1.0; };
    Mesh mesh = generate_unit_square(14, 0.15, 42);
    for (int level = 1; level <= 3; ++level) {
      if (level > 1) mesh = refine_uniform(mesh);
      double worst = 0.0;
      for (const ScalarField& f : {one, sinsin.source}) {
        const CrSolution cr = solve_cr(mesh, f);
        for (const double tau0 : {1.0, 10.0, 100.0}) {
          SchemeConfig sc;
          sc.k = 1;
          sc.tau0 = tau0;
          sc.source = f;
          worst = std::max(worst, compare_edge_means(mesh, solve(sc, mesh), cr));
        }
      }
      add("cr-equivalence-level" + std::to_string(level), worst, 1e-9,
          "f in {1, sinsin load}, tau0 in {1,10,100}");
    }
  } else if (suite == "symmetry") {
    const Mesh mesh = refine_uniform(generate_unit_square(14, 0.15, 42));
    const Problem prob = make_problem("sinsin");
    for (int k = 1; k <= 3; ++k) {
      SchemeConfig sc;
      sc.k = k;
      sc.source = prob.source;
      add("symmetry-k" + std::to_string(k), skeleton_asymmetry(sc, mesh), 1e-12,
          "condensed operator, s=1, level 2");
    }
  } else if (suite == "coercivity-s-neg") {
    const Mesh mesh = generate_unit_square(6, 0.15, 7);
    for (int k = 1; k <= 3; ++k) {
      add("coercivity-s-neg-k" + std::to_string(k),
          coercivity_identity_deviation(mesh, k, 10.0 * k * k, 100, 99), 1e-11,
          "100 random discrete pairs");
    }
  } else if (suite == "patch-exactness") {
    const Mesh mesh = refine_uniform(generate_unit_square(4, 0.2, 3));
    const Problem linear = make_problem("linear");
    const Problem poly = make_problem("poly-patch");
    for (int k = 1; k <= 3; ++k) {
      SchemeConfig sc;
      sc.k = k;
      sc.source = linear.source;
      sc.dirichlet = linear.dirichlet;
      add("patch-exactness-linear-k" + std::to_string(k),
          patch_exactness_error(mesh, sc, linear.exact), 1e-9, "u = x + y");
    }
    for (int k = 2; k <= 3; ++k) {
      SchemeConfig sc;
      sc.k = k;
      sc.source = poly.source;
      sc.dirichlet = poly.dirichlet;
      add("patch-exactness-quadratic-k" + std::to_string(k),
          patch_exactness_error(mesh, sc, poly.exact), 1e-9, "u = x^2 + y^2");
    }
  } else {
    throw std::invalid_argument("run_checks: unknown suite '" + suite + "'");
  }
  return results;
}

}  // namespace rhdg
