// ============================================================================
// spaces.cpp - Quadrature, shape functions, dof maps and interpolation
// ============================================================================
#include "stokesdg/spaces.hpp"

#include "stokesdg/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace stokesdg {

std::string to_string(ElementPair pair) {
  return pair == ElementPair::TaylorHood ? "taylor-hood" : "mini";
}

ElementPair parse_element_pair(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "taylor-hood" || s == "taylorhood" || s == "taylor_hood" || s == "th") return ElementPair::TaylorHood;
  if (s == "mini") return ElementPair::Mini;
  throw InvalidArgument("spaces", "parse_element_pair", "unknown element pair '" + name + "'");
}

// ---------------------------------------------------------------------------
// Quadrature (symmetric Dunavant rules, weights normalized to area 1/2)
// ---------------------------------------------------------------------------

namespace {

void add_orbit3(QuadratureRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  // barycentric (b, a, a) and its rotations; reference coords are (l1, l2)
  r.points.push_back({a, a});
  r.points.push_back({b, a});
  r.points.push_back({a, b});
  for (int i = 0; i < 3; ++i) r.weights.push_back(0.5 * w);
}

void add_orbit6(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  const std::array<std::array<double, 3>, 6> perms{{{a, b, c}, {a, c, b}, {b, a, c},
                                                    {b, c, a}, {c, a, b}, {c, b, a}}};
  for (const auto& l : perms) {
    r.points.push_back({l[1], l[2]});
    r.weights.push_back(0.5 * w);
  }
}

QuadratureRule make_degree4() {
  QuadratureRule r;
  r.degree = 4;
  add_orbit3(r, 0.445948490915965, 0.223381589678011);
  add_orbit3(r, 0.091576213509771, 0.109951743655322);
  return r;
}

QuadratureRule make_degree6() {
  QuadratureRule r;
  r.degree = 6;
  add_orbit3(r, 0.249286745170910, 0.116786275726379);
  add_orbit3(r, 0.063089014491502, 0.050844906370207);
  add_orbit6(r, 0.053145049844817, 0.310352451033784, 0.082851075618374);
  return r;
}

} // namespace

const QuadratureRule& quadrature_degree4() {
  static const QuadratureRule rule = make_degree4();
  return rule;
}

const QuadratureRule& quadrature_degree6() {
  static const QuadratureRule rule = make_degree6();
  return rule;
}

// ---------------------------------------------------------------------------
// Shape functions
// ---------------------------------------------------------------------------

LocalBasis velocity_shape_functions(ElementPair pair, double xi, double eta) {
  const std::array<double, 3> l{1.0 - xi - eta, xi, eta};
  const std::array<std::array<double, 2>, 3> dl{{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
  LocalBasis b;
  if (pair == ElementPair::TaylorHood) {
    b.size = 6;
    for (int i = 0; i < 3; ++i) {
      b.value[i] = l[i] * (2.0 * l[i] - 1.0);
      for (int d = 0; d < 2; ++d) b.grad[i][d] = (4.0 * l[i] - 1.0) * dl[i][d];
    }
    for (int e = 0; e < 3; ++e) {
      const int i = e;
      const int j = (e + 1) % 3;
      b.value[3 + e] = 4.0 * l[i] * l[j];
      for (int d = 0; d < 2; ++d) b.grad[3 + e][d] = 4.0 * (l[j] * dl[i][d] + l[i] * dl[j][d]);
    }
  } else {
    b.size = 4;
    for (int i = 0; i < 3; ++i) {
      b.value[i] = l[i];
      b.grad[i] = dl[i];
    }
    b.value[3] = 27.0 * l[0] * l[1] * l[2];
    for (int d = 0; d < 2; ++d)
      b.grad[3][d] = 27.0 * (l[1] * l[2] * dl[0][d] + l[0] * l[2] * dl[1][d] + l[0] * l[1] * dl[2][d]);
  }
  return b;
}

LocalBasis pressure_shape_functions(double xi, double eta) {
  LocalBasis b;
  b.size = 3;
  b.value[0] = 1.0 - xi - eta;
  b.value[1] = xi;
  b.value[2] = eta;
  b.grad[0] = {-1.0, -1.0};
  b.grad[1] = {1.0, 0.0};
  b.grad[2] = {0.0, 1.0};
  return b;
}

Point ElementGeometry::map(double xi, double eta) const {
  return {vertex[0].x + (vertex[1].x - vertex[0].x) * xi + (vertex[2].x - vertex[0].x) * eta,
          vertex[0].y + (vertex[1].y - vertex[0].y) * xi + (vertex[2].y - vertex[0].y) * eta};
}

std::array<double, 2> ElementGeometry::physical_gradient(const std::array<double, 2>& g) const {
  return {inv_transpose[0] * g[0] + inv_transpose[1] * g[1],
          inv_transpose[2] * g[0] + inv_transpose[3] * g[1]};
}

ElementGeometry element_geometry(const Mesh& mesh, std::size_t t) {
  ElementGeometry geo;
  const auto& tri = mesh.triangles()[t];
  for (int k = 0; k < 3; ++k) geo.vertex[k] = mesh.vertices()[tri[k]];
  const double j00 = geo.vertex[1].x - geo.vertex[0].x;
  const double j01 = geo.vertex[2].x - geo.vertex[0].x;
  const double j10 = geo.vertex[1].y - geo.vertex[0].y;
  const double j11 = geo.vertex[2].y - geo.vertex[0].y;
  geo.det = j00 * j11 - j01 * j10;
  // J^{-T} = (1/det) [[j11, -j10], [-j01, j00]]
  geo.inv_transpose = {j11 / geo.det, -j10 / geo.det, -j01 / geo.det, j00 / geo.det};
  return geo;
}

// ---------------------------------------------------------------------------
// DiscreteSpaces
// ---------------------------------------------------------------------------

DiscreteSpaces::DiscreteSpaces(std::shared_ptr<const Mesh> mesh, ElementPair pair)
    : mesh_(std::move(mesh)), pair_(pair) {
  if (!mesh_) throw InvalidArgument("spaces", "build_spaces", "null mesh");
  const Mesh& m = *mesh_;
  const int nv = static_cast<int>(m.n_vertices());

  node_points_ = m.vertices();
  node_is_bubble_.assign(node_points_.size(), false);
  std::vector<bool> on_boundary = m.boundary_vertex_flags();

  if (pair_ == ElementPair::TaylorHood) {
    for (const Edge& e : m.edges()) {
      const Point& a = m.vertices()[e.v[0]];
      const Point& b = m.vertices()[e.v[1]];
      node_points_.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
      node_is_bubble_.push_back(false);
      on_boundary.push_back(e.boundary);
    }
  } else {
    for (const auto& tri : m.triangles()) {
      const Point& a = m.vertices()[tri[0]];
      const Point& b = m.vertices()[tri[1]];
      const Point& c = m.vertices()[tri[2]];
      node_points_.push_back({(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0});
      node_is_bubble_.push_back(true);
      on_boundary.push_back(false);
    }
  }

  local_to_global_.resize(m.n_triangles());
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    auto& map = local_to_global_[t];
    map.fill(-1);
    for (int k = 0; k < 3; ++k) map[k] = m.triangles()[t][k];
    if (pair_ == ElementPair::TaylorHood) {
      for (int e = 0; e < 3; ++e) map[3 + e] = nv + m.triangle_edges(t)[e];
    } else {
      map[3] = nv + static_cast<int>(t);
    }
  }

  interior_index_.assign(node_points_.size(), -1);
  for (std::size_t i = 0; i < node_points_.size(); ++i) {
    if (on_boundary[i])
      eliminated_.push_back(static_cast<int>(i));
    else
      interior_index_[i] = n_interior_++;
  }

  mean_weights_ = Vector::Zero(nv);
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const double third_area = m.signed_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) mean_weights_[m.triangles()[t][k]] += third_area;
  }
}

Index DiscreteSpaces::velocity_dof(std::size_t t, int k, int c) const {
  const int ii = interior_index_[local_to_global_[t][k]];
  if (ii < 0) return -1;
  return static_cast<Index>(c) * n_interior_ + ii;
}

Vector interpolate_velocity(const VectorField& g, const DiscreteSpaces& spaces) {
  Vector coeffs = Vector::Zero(spaces.velocity_dof_count());
  const int n = spaces.n_interior_nodes();
  for (int node = 0; node < spaces.n_scalar_nodes(); ++node) {
    const int ii = spaces.interior_index(node);
    if (ii < 0 || spaces.node_is_bubble(node)) continue;
    const Point& p = spaces.node_point(node);
    const auto v = g(p.x, p.y);
    coeffs[ii] = v[0];
    coeffs[n + ii] = v[1];
  }
  return coeffs;
}

Vector interpolate_pressure(const ScalarField& q, const DiscreteSpaces& spaces) {
  const Mesh& m = spaces.mesh();
  Vector coeffs(static_cast<Index>(m.n_vertices()));
  for (std::size_t i = 0; i < m.n_vertices(); ++i) coeffs[static_cast<Index>(i)] = q(m.vertices()[i].x, m.vertices()[i].y);
  const Vector& w = spaces.pressure_mean_weights();
  coeffs.array() -= w.dot(coeffs) / w.sum();
  return coeffs;
}

// ---------------------------------------------------------------------------
// QuadratureSampler
// ---------------------------------------------------------------------------

QuadratureSampler::QuadratureSampler(std::shared_ptr<const DiscreteSpaces> spaces)
    : spaces_(std::move(spaces)) {
  const QuadratureRule& rule = quadrature_degree6();
  const Mesh& m = spaces_->mesh();
  per_triangle_ = rule.points.size();
  for (const auto& p : rule.points) {
    velocity_tables_.push_back(velocity_shape_functions(spaces_->pair(), p[0], p[1]));
    pressure_tables_.push_back(pressure_shape_functions(p[0], p[1]));
  }
  points_.reserve(per_triangle_ * m.n_triangles());
  weights_.reserve(per_triangle_ * m.n_triangles());
  for (std::size_t t = 0; t < m.n_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(m, t);
    for (std::size_t q = 0; q < per_triangle_; ++q) {
      points_.push_back(geo.map(rule.points[q][0], rule.points[q][1]));
      weights_.push_back(rule.weights[q] * geo.det);
    }
  }
}

std::vector<std::array<double, 2>> QuadratureSampler::sample(const VectorField& g) const {
  std::vector<std::array<double, 2>> out(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) out[i] = g(points_[i].x, points_[i].y);
  return out;
}

std::vector<std::array<double, 2>> QuadratureSampler::velocity_values(const Vector& coeffs) const {
  const DiscreteSpaces& s = *spaces_;
  const int nloc = s.local_scalar_count();
  std::vector<std::array<double, 2>> out(points_.size(), {0.0, 0.0});
  for (std::size_t t = 0; t < s.mesh().n_triangles(); ++t) {
    std::array<double, 6> c0{}, c1{};
    for (int k = 0; k < nloc; ++k) {
      const Index d0 = s.velocity_dof(t, k, 0);
      if (d0 < 0) continue;
      c0[k] = coeffs[d0];
      c1[k] = coeffs[s.velocity_dof(t, k, 1)];
    }
    for (std::size_t q = 0; q < per_triangle_; ++q) {
      const LocalBasis& b = velocity_tables_[q];
      double u0 = 0.0, u1 = 0.0;
      for (int k = 0; k < nloc; ++k) {
        u0 += c0[k] * b.value[k];
        u1 += c1[k] * b.value[k];
      }
      out[t * per_triangle_ + q] = {u0, u1};
    }
  }
  return out;
}

std::vector<double> QuadratureSampler::pressure_values(const Vector& coeffs) const {
  const DiscreteSpaces& s = *spaces_;
  std::vector<double> out(points_.size(), 0.0);
  for (std::size_t t = 0; t < s.mesh().n_triangles(); ++t) {
    for (std::size_t q = 0; q < per_triangle_; ++q) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += coeffs[s.pressure_dof(t, k)] * pressure_tables_[q].value[k];
      out[t * per_triangle_ + q] = v;
    }
  }
  return out;
}

double QuadratureSampler::velocity_l2_distance(const Vector& coeffs,
                                               const std::vector<std::array<double, 2>>& values) const {
  const auto uh = velocity_values(coeffs);
  double sum = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d0 = values[i][0] - uh[i][0];
    const double d1 = values[i][1] - uh[i][1];
    sum += weights_[i] * (d0 * d0 + d1 * d1);
  }
  return std::sqrt(sum);
}

double QuadratureSampler::l2_norm(const std::vector<std::array<double, 2>>& values) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i)
    sum += weights_[i] * (values[i][0] * values[i][0] + values[i][1] * values[i][1]);
  return std::sqrt(sum);
}

double QuadratureSampler::pressure_l2_distance(const Vector& coeffs, const ScalarField& q) const {
  const auto ph = pressure_values(coeffs);
  double sum = 0.0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = q(points_[i].x, points_[i].y) - ph[i];
    sum += weights_[i] * d * d;
  }
  return std::sqrt(sum);
}

Vector QuadratureSampler::load(const std::vector<std::array<double, 2>>& values) const {
  const DiscreteSpaces& s = *spaces_;
  const int nloc = s.local_scalar_count();
  Vector f = Vector::Zero(s.velocity_dof_count());
  for (std::size_t t = 0; t < s.mesh().n_triangles(); ++t) {
    for (int k = 0; k < nloc; ++k) {
      const Index d0 = s.velocity_dof(t, k, 0);
      if (d0 < 0) continue;
      const Index d1 = s.velocity_dof(t, k, 1);
      double a0 = 0.0, a1 = 0.0;
      for (std::size_t q = 0; q < per_triangle_; ++q) {
        const std::size_t i = t * per_triangle_ + q;
        const double wv = weights_[i] * velocity_tables_[q].value[k];
        a0 += wv * values[i][0];
        a1 += wv * values[i][1];
      }
      f[d0] += a0;
      f[d1] += a1;
    }
  }
  return f;
}

} // namespace stokesdg
