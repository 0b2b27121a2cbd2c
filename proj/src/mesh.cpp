#include "rhdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace rhdg {

namespace {

double signed_area(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                   const Eigen::Vector2d& c) {
  const Eigen::Vector2d u = b - a;
  const Eigen::Vector2d v = c - a;
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

// Derives edges, incidences and orientation signs; validates the triangle
// soup (positive areas, at most two triangles per edge).
void finalize_mesh(Mesh& mesh) {
  const int nn = mesh.num_nodes();
  const int nt = mesh.num_triangles();

  for (int t = 0; t < nt; ++t) {
    for (int v : mesh.triangles[t])
      if (v < 0 || v >= nn)
        throw std::runtime_error("mesh: node index out of range in triangle " +
                                 std::to_string(t));
    if (mesh.signed_area(t) <= 0.0)
      throw std::runtime_error("mesh: triangle " + std::to_string(t) +
                               " has non-positive area");
  }

  struct Side {
    int a, b, tri, local;
    bool forward;  // side runs a -> b
  };
  std::vector<Side> sides;
  sides.reserve(3 * nt);
  for (int t = 0; t < nt; ++t) {
    for (int s = 0; s < 3; ++s) {
      const int u = mesh.triangles[t][s];
      const int v = mesh.triangles[t][(s + 1) % 3];
      sides.push_back({std::min(u, v), std::max(u, v), t, s, u < v});
    }
  }
  std::sort(sides.begin(), sides.end(), [](const Side& x, const Side& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });

  mesh.edges.clear();
  mesh.triangle_edges.assign(nt, {-1, -1, -1});
  mesh.triangle_edge_signs.assign(nt, {0, 0, 0});

  std::size_t i = 0;
  while (i < sides.size()) {
    std::size_t j = i + 1;
    while (j < sides.size() && sides[j].a == sides[i].a && sides[j].b == sides[i].b) ++j;
    if (j - i > 2)
      throw std::runtime_error("mesh: edge (" + std::to_string(sides[i].a) + "," +
                               std::to_string(sides[i].b) +
                               ") shared by more than two triangles");
    Edge e;
    e.a = sides[i].a;
    e.b = sides[i].b;
    const int id = static_cast<int>(mesh.edges.size());
    for (std::size_t s = i; s < j; ++s) {
      if (sides[s].forward) {
        if (e.left >= 0)
          throw std::runtime_error("mesh: inconsistent triangle orientation at edge (" +
                                   std::to_string(e.a) + "," + std::to_string(e.b) + ")");
        e.left = sides[s].tri;
      } else {
        if (e.right >= 0)
          throw std::runtime_error("mesh: inconsistent triangle orientation at edge (" +
                                   std::to_string(e.a) + "," + std::to_string(e.b) + ")");
        e.right = sides[s].tri;
      }
      mesh.triangle_edges[sides[s].tri][sides[s].local] = id;
      mesh.triangle_edge_signs[sides[s].tri][sides[s].local] = sides[s].forward ? 1 : -1;
    }
    e.boundary = (j - i == 1);
    mesh.edges.push_back(e);
    i = j;
  }
}

}  // namespace

int Mesh::num_boundary_edges() const {
  int n = 0;
  for (const Edge& e : edges) n += e.boundary ? 1 : 0;
  return n;
}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  return rhdg::signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
}

double Mesh::edge_length(int e) const {
  return (nodes[edges[e].b] - nodes[edges[e].a]).norm();
}

Eigen::Vector2d Mesh::edge_midpoint(int e) const {
  return 0.5 * (nodes[edges[e].a] + nodes[edges[e].b]);
}

Eigen::Vector2d Mesh::edge_point(int e, double t) const {
  return edge_midpoint(e) + 0.5 * t * (nodes[edges[e].b] - nodes[edges[e].a]);
}

Mesh generate_unit_square(int n, double perturb, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_unit_square: n must be >= 1");
  if (perturb < 0.0 || perturb >= 0.3)
    throw std::invalid_argument("generate_unit_square: perturb must be in [0, 0.3)");

  const auto node_id = [n](int i, int j) { return j * (n + 1) + i; };

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int p00 = node_id(i, j), p10 = node_id(i + 1, j);
      const int p01 = node_id(i, j + 1), p11 = node_id(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        triangles.push_back({p00, p10, p11});
        triangles.push_back({p00, p11, p01});
      } else {
        triangles.push_back({p00, p10, p01});
        triangles.push_back({p10, p11, p01});
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-perturb / n, perturb / n);

  for (int attempt = 0; attempt < 100; ++attempt) {
    Mesh mesh;
    mesh.nodes.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        Eigen::Vector2d p(static_cast<double>(i) / n, static_cast<double>(j) / n);
        if (perturb > 0.0 && i > 0 && i < n && j > 0 && j < n) {
          p.x() += jitter(rng);
          p.y() += jitter(rng);
        }
        mesh.nodes.push_back(p);
      }
    }
    mesh.triangles = triangles;

    bool ok = true;
    const double floor_area = 1e-12 / (n * n);
    for (int t = 0; t < mesh.num_triangles() && ok; ++t)
      ok = mesh.signed_area(t) > floor_area;
    if (!ok) continue;

    finalize_mesh(mesh);
    return mesh;
  }
  throw std::runtime_error(
      "generate_unit_square: jitter kept inverting triangles after 100 attempts");
}

Mesh refine_uniform(const Mesh& mesh) {
  Mesh fine;
  fine.nodes = mesh.nodes;
  fine.nodes.reserve(mesh.num_nodes() + mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) fine.nodes.push_back(mesh.edge_midpoint(e));

  const int base = mesh.num_nodes();
  fine.triangles.reserve(4 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const int m01 = base + mesh.triangle_edges[t][0];
    const int m12 = base + mesh.triangle_edges[t][1];
    const int m20 = base + mesh.triangle_edges[t][2];
    fine.triangles.push_back({tri[0], m01, m20});
    fine.triangles.push_back({tri[1], m12, m01});
    fine.triangles.push_back({tri[2], m20, m12});
    fine.triangles.push_back({m01, m12, m20});
  }
  finalize_mesh(fine);
  return fine;
}

MeshQualityReport quality_report(const Mesh& mesh) {
  const int nt = mesh.num_triangles();
  MeshQualityReport report;
  report.diameter.resize(nt);
  report.inradius.resize(nt);
  report.ratio.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    double perimeter = 0.0, longest = 0.0;
    for (int s = 0; s < 3; ++s) {
      const double len = (mesh.nodes[tri[(s + 1) % 3]] - mesh.nodes[tri[s]]).norm();
      perimeter += len;
      longest = std::max(longest, len);
    }
    const double area = mesh.signed_area(t);
    if (!(area > 0.0) || area <= 1e-14 * longest * longest)
      throw std::runtime_error("quality_report: degenerate triangle " + std::to_string(t));
    report.diameter[t] = longest;
    report.inradius[t] = 2.0 * area / perimeter;
    report.ratio[t] = report.diameter[t] / report.inradius[t];
    report.max_ratio = std::max(report.max_ratio, report.ratio[t]);
    report.max_diameter = std::max(report.max_diameter, report.diameter[t]);
  }
  return report;
}

namespace {

// Reads the next non-blank line; returns false at end of stream.
bool next_line(std::istream& in, std::string& line, int& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void parse_fail(const std::string& what, int lineno) {
  throw std::runtime_error("read_mesh: " + what + ", line " + std::to_string(lineno));
}

}  // namespace

Mesh read_mesh(std::istream& in) {
  std::string line;
  int lineno = 0;

  if (!next_line(in, line, lineno)) parse_fail("missing header", lineno + 1);
  long long nn = 0, nt = 0;
  {
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> nn >> nt) || (ss >> extra)) parse_fail("malformed counts", lineno);
    if (nn < 3 || nt < 1) parse_fail("malformed counts", lineno);
  }

  Mesh mesh;
  mesh.nodes.reserve(nn);
  for (long long i = 0; i < nn; ++i) {
    if (!next_line(in, line, lineno)) parse_fail("unexpected end of node list", lineno + 1);
    std::istringstream ss(line);
    double x, y;
    std::string extra;
    if (!(ss >> x >> y) || (ss >> extra)) parse_fail("malformed node coordinates", lineno);
    mesh.nodes.emplace_back(x, y);
  }

  mesh.triangles.reserve(nt);
  for (long long t = 0; t < nt; ++t) {
    if (!next_line(in, line, lineno))
      parse_fail("unexpected end of triangle list", lineno + 1);
    std::istringstream ss(line);
    long long i, j, k;
    std::string extra;
    if (!(ss >> i >> j >> k) || (ss >> extra)) parse_fail("malformed triangle", lineno);
    for (long long v : {i, j, k})
      if (v < 0 || v >= nn) parse_fail("node index out of range", lineno);
    mesh.triangles.push_back(
        {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)});
    if (mesh.signed_area(static_cast<int>(t)) <= 0.0)
      parse_fail("inverted or degenerate triangle", lineno);
  }

  finalize_mesh(mesh);
  return mesh;
}

Mesh read_mesh(const std::string& text) {
  std::istringstream in(text);
  return read_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << mesh.num_nodes() << ' ' << mesh.num_triangles() << '\n';
  char buf[64];
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", p.x(), p.y());
    out << buf;
  }
  for (const auto& tri : mesh.triangles)
    out << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
}

std::string write_mesh(const Mesh& mesh) {
  std::ostringstream out;
  write_mesh(mesh, out);
  return out.str();
}

}  // namespace rhdg
