// Crouzeix-Raviart nonconforming P1 solver for the homogeneous-Dirichlet
// Poisson problem, the associated interpolation from edge means, and the
// edge-mean comparison with the k=1 reduced symmetric trace solution.

#pragma once

#include <Eigen/Dense>

#include "rhdg/hdg.hpp"
#include "rhdg/mesh.hpp"

namespace rhdg {

struct CrSolution {
  // Value at the edge midpoint = mean over the edge (the function is affine
  // per triangle); zero on boundary edges.
  Eigen::VectorXd edge_values;
};

/// Nonconforming P1 solve of -Laplace u = f, u = 0 on the boundary. The load
/// is integrated with a rule exact to `load_exactness`; the default matches
/// the k=1 assembly default of the trace solver so the two discrete systems
/// share the load functional.
CrSolution solve_cr(const Mesh& mesh, const ScalarField& f, int load_exactness = 4);

/// The unique per-triangle affine functions whose three edge means match the
/// given per-edge data. Row t holds (a, b, c) of a + b x + c y on triangle t.
Eigen::Matrix<double, Eigen::Dynamic, 3> cr_interpolate(const Mesh& mesh,
                                                        const Eigen::VectorXd& edge_means);

/// Max over all edges of |mean(uhat_h) - mean(u_CR)| / (1 + |mean(u_CR)|).
/// Requires an HDG solution with k = 1, reduced scheme, discontinuous traces
/// and s = 1 on the same mesh.
double compare_edge_means(const Mesh& mesh, const HdgSolution& hdg, const CrSolution& cr);

}  // namespace rhdg
