// ============================================================================
// spaces.hpp - Velocity/pressure finite element spaces on a triangulation
//
// Supported pairs (both with continuous P1 pressure):
//   TaylorHood  P2 velocity / P1 pressure
//   Mini        P1 + cubic bubble 27*l0*l1*l2 velocity / P1 pressure
//
// Scalar velocity nodes are numbered vertices first, then edge midpoints
// (TaylorHood) or triangle barycenters (Mini). Boundary nodes are eliminated:
// only interior nodes carry degrees of freedom. Velocity dofs are blocked by
// component, dof(c, node) = c * n_interior_nodes + interior_index(node).
// Pressure dofs are all mesh vertices; the zero-mean condition is imposed by
// the solvers, not here.
// ============================================================================
#pragma once

#include "stokesdg/mesh.hpp"
#include "stokesdg/types.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace stokesdg {

enum class ElementPair { TaylorHood, Mini };

std::string to_string(ElementPair pair);
/// Accepts "taylor-hood" / "taylorhood" / "th" and "mini".
ElementPair parse_element_pair(const std::string& name);

// ---------------------------------------------------------------------------
// Quadrature on the reference triangle {(xi, eta): xi, eta >= 0, xi + eta <= 1}
// ---------------------------------------------------------------------------

struct QuadratureRule {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights; // sum to 1/2
  int degree = 0;
};

/// 6-point rule, exact for polynomials of degree 4.
const QuadratureRule& quadrature_degree4();
/// 12-point rule, exact for polynomials of degree 6.
const QuadratureRule& quadrature_degree6();

// ---------------------------------------------------------------------------
// Reference shape functions
// ---------------------------------------------------------------------------

/// Values and reference gradients of the local scalar velocity basis
/// (6 functions for TaylorHood, 4 for Mini) at (xi, eta).
struct LocalBasis {
  std::array<double, 6> value{};
  std::array<std::array<double, 2>, 6> grad{};
  int size = 0;
};

LocalBasis velocity_shape_functions(ElementPair pair, double xi, double eta);
LocalBasis pressure_shape_functions(double xi, double eta);

/// Affine map of one triangle: x = v0 + J (xi, eta).
struct ElementGeometry {
  std::array<Point, 3> vertex{};
  double det = 0.0;                         // 2 * area
  std::array<double, 4> inv_transpose{};    // J^{-T} row-major
  Point map(double xi, double eta) const;
  std::array<double, 2> physical_gradient(const std::array<double, 2>& ref_grad) const;
};

ElementGeometry element_geometry(const Mesh& mesh, std::size_t t);

// ---------------------------------------------------------------------------
// Degree-of-freedom layout
// ---------------------------------------------------------------------------

class DiscreteSpaces {
public:
  DiscreteSpaces(std::shared_ptr<const Mesh> mesh, ElementPair pair);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  ElementPair pair() const noexcept { return pair_; }

  int local_scalar_count() const noexcept { return pair_ == ElementPair::TaylorHood ? 6 : 4; }
  int n_scalar_nodes() const noexcept { return static_cast<int>(node_points_.size()); }
  int n_interior_nodes() const noexcept { return n_interior_; }
  Index velocity_dof_count() const noexcept { return 2 * static_cast<Index>(n_interior_); }
  Index pressure_dof_count() const noexcept { return static_cast<Index>(mesh_->n_vertices()); }

  /// Global scalar node of local node k on triangle t.
  int scalar_node(std::size_t t, int k) const { return local_to_global_[t][k]; }
  /// Interior numbering of a scalar node, -1 for eliminated boundary nodes.
  int interior_index(int node) const { return interior_index_[node]; }
  /// Velocity dof of component c at local node k of triangle t, -1 if eliminated.
  Index velocity_dof(std::size_t t, int k, int c) const;
  Index pressure_dof(std::size_t t, int k) const { return mesh_->triangles()[t][k]; }

  const Point& node_point(int node) const { return node_points_[node]; }
  bool node_is_bubble(int node) const { return node_is_bubble_[node]; }
  const std::vector<int>& eliminated_nodes() const noexcept { return eliminated_; }

  /// Integrals of the P1 pressure basis functions, (integral of l_i).
  const Vector& pressure_mean_weights() const noexcept { return mean_weights_; }

private:
  std::shared_ptr<const Mesh> mesh_;
  ElementPair pair_;
  std::vector<std::array<int, 6>> local_to_global_;
  std::vector<Point> node_points_;
  std::vector<bool> node_is_bubble_;
  std::vector<int> interior_index_;
  std::vector<int> eliminated_;
  int n_interior_ = 0;
  Vector mean_weights_;
};

/// Nodal interpolant of g into X_h (boundary values dropped, bubble
/// coefficients zero).
Vector interpolate_velocity(const VectorField& g, const DiscreteSpaces& spaces);

/// P1 vertex interpolant of q, shifted to discrete mean zero.
Vector interpolate_pressure(const ScalarField& q, const DiscreteSpaces& spaces);

// ---------------------------------------------------------------------------
// Evaluation at the degree-6 quadrature points of every triangle
// ---------------------------------------------------------------------------

/// Physical quadrature points and weights, triangle-major, with the basis
/// tables needed to evaluate discrete functions there. Used for load vectors
/// and error norms with non-polynomial integrands.
class QuadratureSampler {
public:
  explicit QuadratureSampler(std::shared_ptr<const DiscreteSpaces> spaces);

  const DiscreteSpaces& spaces() const noexcept { return *spaces_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t points_per_triangle() const noexcept { return per_triangle_; }
  const std::vector<Point>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::vector<std::array<double, 2>> sample(const VectorField& g) const;
  std::vector<std::array<double, 2>> velocity_values(const Vector& coeffs) const;
  std::vector<double> pressure_values(const Vector& coeffs) const;

  /// sqrt(sum_q w_q |values_q - velocity(coeffs)_q|^2).
  double velocity_l2_distance(const Vector& coeffs,
                              const std::vector<std::array<double, 2>>& values) const;
  double l2_norm(const std::vector<std::array<double, 2>>& values) const;
  double pressure_l2_distance(const Vector& coeffs, const ScalarField& q) const;

  /// Load vector (g, phi_i) for every velocity dof.
  Vector load(const std::vector<std::array<double, 2>>& values) const;

private:
  std::shared_ptr<const DiscreteSpaces> spaces_;
  std::size_t per_triangle_ = 0;
  std::vector<Point> points_;
  std::vector<double> weights_;
  std::vector<LocalBasis> velocity_tables_; // per reference point
  std::vector<LocalBasis> pressure_tables_;
};

} // namespace stokesdg
