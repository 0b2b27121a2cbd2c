// Convergence-study driver: manufactured problems, the refinement protocol,
// per-level error rows with orders, and CSV/Markdown emission. Also the named
// invariant-check suites used by the command-line tool and the test gate.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rhdg/hdg.hpp"
#include "rhdg/norms.hpp"

namespace rhdg {

struct Problem {
  std::string id;
  ExactSolution exact;
  ScalarField source;
  ScalarField dirichlet;
};

/// Built-in manufactured problems: "sinsin" (sin(pi x) sin(pi y), zero
/// boundary data), "poly-patch" (x^2 + y^2), "linear" (x + y).
Problem make_problem(const std::string& id);

struct StudyConfig {
  std::vector<int> ks = {1, 2, 3};
  Scheme scheme = Scheme::reduced;
  TraceContinuity hybrid = TraceContinuity::discontinuous;
  double s = 1.0;
  double tau0 = -1.0;  // <= 0: per-k default 10 k^2
  int levels = 4;
  int base_n = 14;
  double perturb = 0.15;
  std::uint64_t seed = 42;
  std::string problem = "sinsin";
};

struct StudyRow {
  int k = 0;
  std::string scheme;
  int level = 0;
  double h = 0.0;
  int dofs_skeleton = 0;
  double l2 = 0.0, l2_order = 0.0;
  double h1 = 0.0, h1_order = 0.0;
  double energy = 0.0, energy_order = 0.0;  // orders are NaN on the first level
};

/// One solve per level on successively refined meshes (base mesh at base_n,
/// then uniform refinement), exactly `levels` rows per k.
std::vector<StudyRow> run_study(const StudyConfig& config);

/// CSV with the exact column set
/// k,scheme,level,h,dofs_skeleton,l2,l2_order,h1,h1_order,energy,energy_order
/// and blank order fields on each first level.
std::string to_csv(const std::vector<StudyRow>& rows);

/// Markdown tables, one per (k, scheme) block, with "--" order placeholders.
std::string to_markdown(const std::vector<StudyRow>& rows);

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// Named invariant suites: quadrature-identity, conservation, cr-equivalence,
/// symmetry, coercivity-s-neg, patch-exactness. Throws on unknown names.
std::vector<CheckResult> run_checks(const std::string& suite);

// Individual measurements backing the suites (also used by the test gate).

/// Max relative deviation of the k-point Gauss product quadrature from the
/// exact integral of the projected factors, over random coefficient pairs for
/// k = 1..kmax; the reference side uses a (k+2)-point rule and an explicit
/// monomial-basis projection.
double quadrature_identity_deviation(int kmax, int pairs_per_k, std::uint64_t seed);

/// Max local conservation residual over all elements.
double conservation_max_residual(const Mesh& mesh, const HdgSolution& sol,
                                 const SchemeConfig& config);

/// max |S - S^T| / max |S| of the condensed operator.
double skeleton_asymmetry(const SchemeConfig& config, const Mesh& mesh);

/// Max relative deviation of B(v, v) assembled from local blocks (s = -1)
/// from |v|_{1,h}^2 plus the projected-stabilization term, over random
/// discrete pairs.
double coercivity_identity_deviation(const Mesh& mesh, int k, double tau0, int pairs,
                                     std::uint64_t seed);

/// Max coefficient-wise error against the exact element expansion of a
/// polynomial solution imposed through its boundary trace.
double patch_exactness_error(const Mesh& mesh, const SchemeConfig& config,
                             const ExactSolution& exact);

}  // namespace rhdg
