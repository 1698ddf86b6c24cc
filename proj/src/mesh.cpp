// ============================================================================
// mesh.cpp - Structured unit-square triangulations, refinement and text I/O
// ============================================================================
#include "stokesdg/mesh.hpp"

#include "stokesdg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace stokesdg {

namespace {

constexpr double kBoundaryTol = 1e-12;

bool near(double a, double b) { return std::abs(a - b) <= kBoundaryTol; }

// Bitmask of the unit-square sides a point lies on: 1 x=0, 2 x=1, 4 y=0, 8 y=1.
unsigned boundary_sides(const Point& p) {
  unsigned s = 0;
  if (near(p.x, 0.0)) s |= 1u;
  if (near(p.x, 1.0)) s |= 2u;
  if (near(p.y, 0.0)) s |= 4u;
  if (near(p.y, 1.0)) s |= 8u;
  return s;
}

double length(const Point& a, const Point& b) { return std::hypot(b.x - a.x, b.y - a.y); }

} // namespace

bool on_unit_square_boundary(const Point& p) { return boundary_sides(p) != 0u; }

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = static_cast<int>(vertices_.size());
  if (nv < 3 || triangles_.empty())
    throw InvalidArgument("mesh", "Mesh", "a mesh needs at least 3 vertices and 1 triangle");

  boundary_.resize(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    boundary_[i] = on_unit_square_boundary(vertices_[i]);

  std::map<std::array<int, 2>, int> edge_index;
  std::vector<int> edge_use;
  triangle_edges_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv)
        throw InvalidArgument("mesh", "Mesh",
                              "triangle " + std::to_string(t) + " references vertex out of range");
    }
    if (!(signed_area(t) > 0.0))
      throw InvalidArgument("mesh", "Mesh",
                            "triangle " + std::to_string(t) + " has non-positive signed area");
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      const std::array<int, 2> key{std::min(a, b), std::max(a, b)};
      auto [it, inserted] = edge_index.try_emplace(key, static_cast<int>(edge_index.size()));
      if (inserted) edge_use.push_back(0);
      ++edge_use[it->second];
      triangle_edges_[t][k] = it->second;
    }
  }

  // Canonical ordering: the map iterates keys lexicographically; renumber so
  // that edge ids follow that order.
  std::vector<int> remap(edge_index.size());
  edges_.reserve(edge_index.size());
  for (const auto& [key, id] : edge_index) {
    remap[id] = static_cast<int>(edges_.size());
    Edge e;
    e.v = key;
    const int uses = edge_use[id];
    if (uses > 2)
      throw InvalidArgument("mesh", "Mesh", "edge shared by more than two triangles");
    if (uses == 1) {
      // A one-sided edge must lie along a single side of the square, otherwise
      // the triangulation has a hole or a hanging vertex.
      const unsigned common = boundary_sides(vertices_[key[0]]) & boundary_sides(vertices_[key[1]]);
      if (common == 0u)
        throw InvalidArgument("mesh", "Mesh",
                              "non-conforming mesh: interior edge (" + std::to_string(key[0]) +
                                  "," + std::to_string(key[1]) + ") belongs to one triangle");
      e.boundary = true;
    }
    edges_.push_back(e);
  }
  for (auto& te : triangle_edges_)
    for (auto& e : te) e = remap[e];
}

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

double Mesh::diameter(std::size_t t) const {
  const auto& tri = triangles_[t];
  const Point& a = vertices_[tri[0]];
  const Point& b = vertices_[tri[1]];
  const Point& c = vertices_[tri[2]];
  return std::max({length(a, b), length(b, c), length(c, a)});
}

Mesh unit_square_mesh(int n) {
  if (n < 1) throw InvalidArgument("mesh", "unit_square_mesh", "n must be >= 1, got " + std::to_string(n));
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});

  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

Mesh refine_uniform(const Mesh& mesh) {
  std::vector<Point> vertices = mesh.vertices();
  const int nv = static_cast<int>(vertices.size());
  for (const Edge& e : mesh.edges()) {
    const Point& a = vertices[e.v[0]];
    const Point& b = vertices[e.v[1]];
    vertices.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(4 * mesh.n_triangles());
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const auto& v = mesh.triangles()[t];
    const auto& te = mesh.triangle_edges(t);
    const int m01 = nv + te[0];
    const int m12 = nv + te[1];
    const int m20 = nv + te[2];
    triangles.push_back({v[0], m01, m20});
    triangles.push_back({m01, v[1], m12});
    triangles.push_back({m20, m12, v[2]});
    triangles.push_back({m01, m12, m20});
  }
  return Mesh(std::move(vertices), std::move(triangles));
}

MeshStatistics mesh_statistics(const Mesh& mesh) {
  MeshStatistics s;
  s.h = 0.0;
  s.h_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const double d = mesh.diameter(t);
    s.h = std::max(s.h, d);
    s.h_min = std::min(s.h_min, d);
    s.total_area += mesh.signed_area(t);
  }
  s.n_vertices = mesh.n_vertices();
  s.n_triangles = mesh.n_triangles();
  s.n_edges = mesh.n_edges();
  s.n_boundary_vertices = static_cast<std::size_t>(
      std::count(mesh.boundary_vertex_flags().begin(), mesh.boundary_vertex_flags().end(), true));
  return s;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const auto old_precision = out.precision();
  out << std::setprecision(17);
  out << "vertices " << mesh.n_vertices() << '\n';
  for (std::size_t i = 0; i < mesh.n_vertices(); ++i) {
    const Point& p = mesh.vertices()[i];
    out << p.x << ' ' << p.y << ' ' << (mesh.boundary_vertex_flags()[i] ? 1 : 0) << '\n';
  }
  out << "triangles " << mesh.n_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out.precision(old_precision);
}

namespace {

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    return true;
  }
  return false;
}

std::size_t read_header(std::istream& in, const std::string& keyword) {
  std::string line;
  if (!next_content_line(in, line))
    throw InvalidArgument("mesh", "read_mesh", "missing '" + keyword + "' header");
  std::istringstream ls(line);
  std::string word;
  long long count = -1;
  if (!(ls >> word >> count) || word != keyword || count < 0)
    throw InvalidArgument("mesh", "read_mesh", "malformed header, expected '" + keyword + " <N>'");
  return static_cast<std::size_t>(count);
}

} // namespace

Mesh read_mesh(std::istream& in) {
  std::string line;
  const std::size_t nv = read_header(in, "vertices");
  std::vector<Point> vertices(nv);
  std::vector<int> flags(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_content_line(in, line))
      throw InvalidArgument("mesh", "read_mesh", "unexpected end of vertex block");
    std::istringstream ls(line);
    if (!(ls >> vertices[i].x >> vertices[i].y >> flags[i]) || (flags[i] != 0 && flags[i] != 1))
      throw InvalidArgument("mesh", "read_mesh", "malformed vertex line: " + line);
  }
  const std::size_t nt = read_header(in, "triangles");
  std::vector<std::array<int, 3>> triangles(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    if (!next_content_line(in, line))
      throw InvalidArgument("mesh", "read_mesh", "unexpected end of triangle block");
    std::istringstream ls(line);
    if (!(ls >> triangles[t][0] >> triangles[t][1] >> triangles[t][2]))
      throw InvalidArgument("mesh", "read_mesh", "malformed triangle line: " + line);
  }
  if (next_content_line(in, line))
    throw InvalidArgument("mesh", "read_mesh", "trailing content after triangle block: " + line);

  Mesh mesh(std::move(vertices), std::move(triangles));
  for (std::size_t i = 0; i < nv; ++i) {
    if ((flags[i] == 1) != mesh.boundary_vertex_flags()[i])
      throw InvalidArgument("mesh", "read_mesh",
                            "boundary flag of vertex " + std::to_string(i) + " disagrees with its coordinates");
  }
  return mesh;
}

} // namespace stokesdg
