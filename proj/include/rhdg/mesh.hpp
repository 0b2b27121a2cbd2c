// Triangular meshes of polygonal domains: generation of (optionally
// perturbed) criss-cross meshes of the unit square, uniform red refinement,
// chunkiness/quality reporting, and a plain-text reader/writer.
//
// Conventions:
//  - triangles store node indices counterclockwise;
//  - every edge is oriented from its lower node index to the higher one;
//  - `left` is the triangle whose counterclockwise traversal runs a -> b,
//    `right` the one running b -> a; either may be absent on the boundary;
//  - triangle_edge_signs is +1 where the side direction agrees with a -> b.
// Edges and boundary flags are always derived from the triangles, never read
// from files.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rhdg {

struct Edge {
  int a = -1, b = -1;      // node ids, a < b
  int left = -1;           // triangle traversing a -> b, -1 if none
  int right = -1;          // triangle traversing b -> a, -1 if none
  bool boundary = false;
};

struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Edge> edges;  // sorted lexicographically by (a, b)
  std::vector<std::array<int, 3>> triangle_edges;
  std::vector<std::array<int, 3>> triangle_edge_signs;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_boundary_edges() const;
  int num_interior_edges() const { return num_edges() - num_boundary_edges(); }

  double signed_area(int t) const;
  double edge_length(int e) const;
  Eigen::Vector2d edge_midpoint(int e) const;
  /// Point on edge e at parameter t in [-1,1]; t = -1 is node a, t = +1 node b.
  Eigen::Vector2d edge_point(int e, double t) const;
};

struct MeshQualityReport {
  Eigen::VectorXd diameter;  // per-triangle h_K (longest side)
  Eigen::VectorXd inradius;  // per-triangle rho_K = 2 area / perimeter
  Eigen::VectorXd ratio;     // h_K / rho_K
  double max_ratio = 0.0;    // chunkiness estimate over the mesh
  double max_diameter = 0.0; // h
};

/// Criss-cross triangulation of [0,1]^2 with 2n^2 triangles (n^2 cells split
/// on alternating diagonals). Interior nodes are jittered by at most
/// perturb/n in each coordinate; a draw that would invert a triangle is
/// redrawn, failing after 100 attempts. perturb must lie in [0, 0.3).
Mesh generate_unit_square(int n, double perturb, std::uint64_t seed = 0);

/// Red refinement: each triangle split into 4 congruent children through the
/// edge midpoints. Halves the mesh size exactly.
Mesh refine_uniform(const Mesh& mesh);

MeshQualityReport quality_report(const Mesh& mesh);

// Text format: `N M` on the first line, then N lines `x y`, then M lines
// `i j k` of 0-based counterclockwise node indices.
Mesh read_mesh(std::istream& in);
Mesh read_mesh(const std::string& text);
void write_mesh(const Mesh& mesh, std::ostream& out);
std::string write_mesh(const Mesh& mesh);

}  // namespace rhdg
