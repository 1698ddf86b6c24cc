// ============================================================================
// mesh.hpp - Conforming triangulations of the unit square
//
// Structured meshes split every cell of an n x n grid along the diagonal from
// (i/n, j/n) to ((i+1)/n, (j+1)/n). Uniform refinement splits each triangle
// into four congruent children through the edge midpoints, so refining the
// n-mesh reproduces the 2n-mesh up to numbering.
// ============================================================================
#pragma once

#include "stokesdg/types.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace stokesdg {

/// Undirected edge stored with v[0] < v[1].
struct Edge {
  std::array<int, 2> v{};
  bool boundary = false;
};

class Mesh {
public:
  /// Validates the triangulation and derives boundary flags and the edge table.
  /// Throws InvalidArgument if an invariant does not hold.
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const noexcept { return triangles_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<bool>& boundary_vertex_flags() const noexcept { return boundary_; }

  std::size_t n_vertices() const noexcept { return vertices_.size(); }
  std::size_t n_triangles() const noexcept { return triangles_.size(); }
  std::size_t n_edges() const noexcept { return edges_.size(); }

  /// Edge indices of triangle t, local edges ordered (0,1), (1,2), (2,0).
  const std::array<int, 3>& triangle_edges(std::size_t t) const { return triangle_edges_[t]; }

  /// Signed area of triangle t (positive for CCW orientation).
  double signed_area(std::size_t t) const;

  /// Longest edge of triangle t.
  double diameter(std::size_t t) const;

private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<bool> boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
};

/// True iff the point lies on the boundary of the unit square (tolerance 1e-12).
bool on_unit_square_boundary(const Point& p);

Mesh unit_square_mesh(int n);

Mesh refine_uniform(const Mesh& mesh);

struct MeshStatistics {
  double h = 0.0;     // max triangle diameter
  double h_min = 0.0; // min triangle diameter
  std::size_t n_vertices = 0;
  std::size_t n_triangles = 0;
  std::size_t n_edges = 0;
  std::size_t n_boundary_vertices = 0;
  double total_area = 0.0;
};

MeshStatistics mesh_statistics(const Mesh& mesh);

/// Plain-text format: "vertices N", N lines "x y b", "triangles M",
/// M lines "i j k". Lines starting with '#' are ignored on input.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

} // namespace stokesdg
