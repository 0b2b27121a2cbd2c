// Mesh-dependent error norms against a known exact solution, and convergence
// order fitting. The energy norm squares to the sum of the broken H1
// seminorm, the h_K-weighted broken H2 seminorm, and the jump seminorm
// sum_K sum_{e in dK} h_e^{-1} || P_{k-1}(vhat - v) ||_{0,e}^2.

#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rhdg/hdg.hpp"
#include "rhdg/mesh.hpp"

namespace rhdg {

struct ExactSolution {
  std::function<double(const Eigen::Vector2d&)> value;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&)> gradient;
  std::function<Eigen::Matrix2d(const Eigen::Vector2d&)> hessian;
};

struct ErrorReport {
  double l2 = 0.0;           // || u - u_h ||_0
  double h1_broken = 0.0;    // | u - u_h |_{1,h}
  double h2_weighted = 0.0;  // ( sum_K h_K^2 | u - u_h |_{2,K}^2 )^{1/2}
  double jump = 0.0;         // trace-mismatch seminorm of the error pair
  double energy = 0.0;       // sqrt(h1^2 + h2^2 + jump^2)
  double boundary_mean_mismatch = 0.0;  // max_e |mean(uhat_h - g)| on the boundary
  double h = 0.0;
  int skeleton_dofs = 0;
};

/// All error norms by quadrature of the requested exactness (default 2k + 6).
ErrorReport error_report(const Mesh& mesh, const HdgSolution& sol,
                         const ExactSolution& exact, const SchemeConfig& config,
                         int quad_exactness = -1);

/// Per-step orders log(e_{i-1}/e_i) / log(h_{i-1}/h_i); the first entry and
/// any step with a non-positive error are NaN.
std::vector<double> fit_orders(const std::vector<std::pair<double, double>>& h_and_error);

/// Least-squares slope of log(error) against log(h).
double fit_order_least_squares(const std::vector<std::pair<double, double>>& h_and_error);

}  // namespace rhdg
