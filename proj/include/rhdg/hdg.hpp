// Hybridized DG for the Poisson problem on triangles: element-local assembly
// of the reduced and standard bilinear forms, static condensation onto the
// skeleton unknowns, recovery of element unknowns, numerical flux, and the
// per-element conservation check.
//
// Element unknowns are degree-k polynomials (orthonormal basis mapped from
// the reference triangle); trace unknowns live edge-wise in the global edge
// parameterization, as an orthonormal Legendre basis (discontinuous traces)
// or an equispaced Lagrange basis with shared vertex values (continuous
// traces). The reduced scheme pairs degrees (k, k-1) and integrates every
// edge term with the k-point Gauss rule, which realizes the degree-(k-1)
// projection in the stabilization term without projection matrices; the
// standard scheme pairs (k, k) and uses the exact (k+1)-point rule.

#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rhdg/basis.hpp"
#include "rhdg/linsolve.hpp"
#include "rhdg/mesh.hpp"

namespace rhdg {

enum class Scheme { reduced, standard };
enum class TraceContinuity { discontinuous, continuous };

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

struct SchemeConfig {
  int k = 1;
  Scheme scheme = Scheme::reduced;
  TraceContinuity hybrid = TraceContinuity::discontinuous;
  double s = 1.0;          // adjoint-term coefficient; s = 1 is symmetric
  double tau0 = -1.0;      // stabilization tau = tau0 / h_e; <= 0 picks the default
  ScalarField source;      // f; empty means 0
  ScalarField dirichlet;   // g; empty means 0
  int volume_exactness = -1;  // volume quadrature degree; <= 0 picks 2k + 2

  int hybrid_degree() const { return scheme == Scheme::reduced ? k - 1 : k; }
  // Default stabilization scale. The full-jump penalty of the standard scheme
  // needs a larger constant to stay positive definite on jittered meshes.
  double tau_coefficient() const {
    if (tau0 > 0.0) return tau0;
    return (scheme == Scheme::reduced ? 10.0 : 20.0) * k * k;
  }
  int volume_rule_exactness() const {
    return volume_exactness > 0 ? volume_exactness : 2 * k + 2;
  }
};

// Affine map from the reference triangle onto a mesh triangle.
struct ElementMap {
  Eigen::Vector2d origin;
  Eigen::Matrix2d jac;
  Eigen::Matrix2d inv_jac;
  double det = 0.0;

  Eigen::Vector2d to_physical(const Eigen::Vector2d& ref) const {
    return origin + jac * ref;
  }
  Eigen::Vector2d to_reference(const Eigen::Vector2d& x) const {
    return inv_jac * (x - origin);
  }
};

ElementMap element_map(const Mesh& mesh, int element);

/// Outward unit normal of `element` on its local side `side`.
Eigen::Vector2d outward_normal(const Mesh& mesh, int element, int side);

// Element-local blocks of the bilinear form restricted to one triangle.
// Rows are test functions, columns trial functions; the trace dofs of the
// three sides are stacked side-by-side (per_edge entries each).
struct LocalSystem {
  Eigen::MatrixXd uu;    // element x element
  Eigen::MatrixXd ue;    // element x trace
  Eigen::MatrixXd eu;    // trace x element
  Eigen::MatrixXd ee;    // trace x trace
  Eigen::VectorXd load;  // (f, phi)_K
  int element = -1;
  int per_edge = 0;
  std::array<int, 3> edge_ids{};
};

LocalSystem local_assemble(const SchemeConfig& config, const Mesh& mesh, int element);

// Schur complement of the element block plus the data needed to recover the
// element unknowns from the trace unknowns: u = recover_vec - recover_mat * uhat.
struct CondensedLocal {
  Eigen::MatrixXd schur;
  Eigen::VectorXd load;
  Eigen::MatrixXd recover_mat;
  Eigen::VectorXd recover_vec;
};

CondensedLocal condense(const LocalSystem& local);

// Global condensed operator over the free skeleton dofs. Dirichlet trace
// coefficients are eliminated into the right-hand side; edge_dofs maps each
// per-edge coefficient to its skeleton index (-1 where fixed) and edge_fixed
// carries the fixed values.
struct SkeletonSystem {
  SparseOperator op;
  Eigen::VectorXd rhs;
  int dofs = 0;
  std::vector<Eigen::MatrixXd> recover_mat;  // per element
  std::vector<Eigen::VectorXd> recover_vec;
  std::vector<Eigen::VectorXi> edge_dofs;    // per edge, size l+1
  std::vector<Eigen::VectorXd> edge_fixed;
  SchemeConfig config;
};

SkeletonSystem assemble_skeleton(const SchemeConfig& config, const Mesh& mesh);

struct HdgSolution {
  int k = 1;
  Scheme scheme = Scheme::reduced;
  TraceContinuity hybrid = TraceContinuity::discontinuous;
  double s = 1.0;
  double tau0 = 0.0;  // effective value
  std::vector<Eigen::VectorXd> element;  // per-triangle coefficients
  std::vector<Eigen::VectorXd> trace;    // per-edge coefficients (Dirichlet data
                                         // on boundary edges)
  int skeleton_dofs = 0;
  std::string solver;
  int solver_iterations = 0;
};

/// Assembles, solves the condensed skeleton system (dense below 3000 dofs,
/// Jacobi-CG for s = 1 and TFQMR otherwise, tolerance 1e-12, at most
/// 20 sqrt(dofs) iterations), and recovers the element unknowns.
HdgSolution solve(const SchemeConfig& config, const Mesh& mesh);

/// Solves a pre-assembled skeleton system.
HdgSolution solve(const SkeletonSystem& system, const Mesh& mesh);

// Point evaluation of the discrete solution.
double element_value(const Mesh& mesh, const TriBasis& basis, const HdgSolution& sol,
                     int element, const Eigen::Vector2d& x);
Eigen::Vector2d element_gradient(const Mesh& mesh, const TriBasis& basis,
                                 const HdgSolution& sol, int element,
                                 const Eigen::Vector2d& x);
/// Trace value at parameter t in [-1,1] along edge e.
double trace_value(const HdgSolution& sol, int edge, double t);
/// Mean of the trace unknown over edge e.
double trace_mean(const HdgSolution& sol, int edge);

/// Numerical flux grad u_h + tau (uhat_h - u_h) n at a point of an edge of an
/// element, with n the outward normal of that element. Throws if the point
/// does not lie on the edge.
Eigen::Vector2d numerical_flux(const Mesh& mesh, const HdgSolution& sol, int element,
                               int edge, const Eigen::Vector2d& point);

/// Relative defect of the per-element balance -int_{dK} flux . n = int_K f,
/// |int_{dK} flux . n + int_K f| / (1 + |int_K f|). The load side uses the
/// assembly quadrature so the identity is checked against the discrete system
/// the solve actually satisfied; the flux side uses an independent exact rule.
double local_conservation_residual(const Mesh& mesh, const HdgSolution& sol,
                                   const SchemeConfig& config, int element);

}  // namespace rhdg
