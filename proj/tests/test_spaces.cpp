#include "doctest.h"

#include "stokesdg/assembly.hpp"
#include "stokesdg/errors.hpp"
#include "stokesdg/spaces.hpp"

#include <cmath>
#include <memory>

using namespace stokesdg;

namespace {

std::shared_ptr<const DiscreteSpaces> make_spaces(int n, ElementPair pair) {
  return std::make_shared<const DiscreteSpaces>(std::make_shared<const Mesh>(unit_square_mesh(n)), pair);
}

// Exact integral of xi^a eta^b over the reference triangle: a! b! / (a+b+2)!.
double monomial_integral(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

} // namespace

TEST_CASE("element pair names") {
  CHECK(parse_element_pair("taylor-hood") == ElementPair::TaylorHood);
  CHECK(parse_element_pair("th") == ElementPair::TaylorHood);
  CHECK(parse_element_pair("mini") == ElementPair::Mini);
  CHECK(parse_element_pair(to_string(ElementPair::Mini)) == ElementPair::Mini);
  CHECK_THROWS_AS(parse_element_pair("p3p2"), InvalidArgument);
}

TEST_CASE("quadrature rules are exact to their degree") {
  for (const QuadratureRule* rule : {&quadrature_degree4(), &quadrature_degree6()}) {
    double wsum = 0.0;
    for (double w : rule->weights) wsum += w;
    CHECK(std::abs(wsum - 0.5) < 1e-14);
    for (int a = 0; a <= rule->degree; ++a)
      for (int b = 0; a + b <= rule->degree; ++b) {
        double s = 0.0;
        for (std::size_t q = 0; q < rule->points.size(); ++q)
          s += rule->weights[q] * std::pow(rule->points[q][0], a) * std::pow(rule->points[q][1], b);
        CHECK(std::abs(s - monomial_integral(a, b)) < 1e-13);
      }
  }
  CHECK(quadrature_degree4().points.size() == 6);
  CHECK(quadrature_degree6().points.size() == 12);
}

TEST_CASE("dof counts") {
  auto th1 = make_spaces(1, ElementPair::TaylorHood);
  CHECK(th1->n_interior_nodes() == 1);
  CHECK(th1->velocity_dof_count() == 2);
  CHECK(th1->pressure_dof_count() == 4);
  // The single interior node is the midpoint of the diagonal.
  for (int node = 0; node < th1->n_scalar_nodes(); ++node)
    if (th1->interior_index(node) >= 0) {
      CHECK(th1->node_point(node).x == doctest::Approx(0.5));
      CHECK(th1->node_point(node).y == doctest::Approx(0.5));
    }

  auto mini1 = make_spaces(1, ElementPair::Mini);
  CHECK(mini1->n_interior_nodes() == 2);
  CHECK(mini1->velocity_dof_count() == 4);
  CHECK(mini1->pressure_dof_count() == 4);

  for (int n : {2, 3, 4, 8}) {
    auto th = make_spaces(n, ElementPair::TaylorHood);
    // Interior lattice nodes of the 2n grid.
    CHECK(th->n_interior_nodes() == (2 * n - 1) * (2 * n - 1));
    CHECK(th->pressure_dof_count() == (n + 1) * (n + 1));
    auto mini = make_spaces(n, ElementPair::Mini);
    CHECK(mini->n_interior_nodes() == (n - 1) * (n - 1) + 2 * n * n);
  }
}

TEST_CASE("shared nodes map to identical global indices") {
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto s = make_spaces(3, pair);
    const Mesh& m = s->mesh();
    for (std::size_t t = 0; t < m.n_triangles(); ++t)
      for (int k = 0; k < s->local_scalar_count(); ++k) {
        const int node = s->scalar_node(t, k);
        // Reconstruct the node location from the element geometry.
        const ElementGeometry geo = element_geometry(m, t);
        static const double ref[6][2] = {{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}};
        Point expect;
        if (pair == ElementPair::Mini && k == 3)
          expect = geo.map(1.0 / 3.0, 1.0 / 3.0);
        else
          expect = geo.map(ref[k][0], ref[k][1]);
        CHECK(std::abs(s->node_point(node).x - expect.x) < 1e-14);
        CHECK(std::abs(s->node_point(node).y - expect.y) < 1e-14);
      }
  }
}

TEST_CASE("partition of unity at quadrature points") {
  for (const auto& p : quadrature_degree6().points) {
    const LocalBasis th = velocity_shape_functions(ElementPair::TaylorHood, p[0], p[1]);
    double s = 0.0, gx = 0.0, gy = 0.0;
    for (int k = 0; k < 6; ++k) {
      s += th.value[k];
      gx += th.grad[k][0];
      gy += th.grad[k][1];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK(std::abs(gx) < 1e-12);
    CHECK(std::abs(gy) < 1e-12);

    const LocalBasis mini = velocity_shape_functions(ElementPair::Mini, p[0], p[1]);
    CHECK(std::abs(mini.value[0] + mini.value[1] + mini.value[2] - 1.0) < 1e-12);
    const LocalBasis pr = pressure_shape_functions(p[0], p[1]);
    CHECK(std::abs(pr.value[0] + pr.value[1] + pr.value[2] - 1.0) < 1e-12);
  }
  // The bubble is 1 at the barycenter and vanishes on the edges.
  const LocalBasis c = velocity_shape_functions(ElementPair::Mini, 1.0 / 3.0, 1.0 / 3.0);
  CHECK(std::abs(c.value[3] - 1.0) < 1e-14);
  CHECK(velocity_shape_functions(ElementPair::Mini, 0.3, 0.0).value[3] == 0.0);
  CHECK(std::abs(velocity_shape_functions(ElementPair::Mini, 0.3, 0.7).value[3]) < 1e-15);
}

TEST_CASE("shape function gradients match finite differences") {
  const double h = 1e-6;
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    const double xi = 0.21, eta = 0.37;
    const LocalBasis b = velocity_shape_functions(pair, xi, eta);
    const LocalBasis bx1 = velocity_shape_functions(pair, xi + h, eta);
    const LocalBasis bx0 = velocity_shape_functions(pair, xi - h, eta);
    const LocalBasis by1 = velocity_shape_functions(pair, xi, eta + h);
    const LocalBasis by0 = velocity_shape_functions(pair, xi, eta - h);
    for (int k = 0; k < b.size; ++k) {
      CHECK(std::abs(b.grad[k][0] - (bx1.value[k] - bx0.value[k]) / (2 * h)) < 1e-8);
      CHECK(std::abs(b.grad[k][1] - (by1.value[k] - by0.value[k]) / (2 * h)) < 1e-8);
    }
  }
}

TEST_CASE("P1 mass matrix on one right triangle") {
  // Unit right triangle embedded as one half of the 1-mesh: assemble the
  // local pressure mass directly from the shape functions.
  const Mesh m = unit_square_mesh(1);
  const ElementGeometry geo = element_geometry(m, 0);
  const double area = 0.5 * geo.det;
  CHECK(area == doctest::Approx(0.5));
  double mloc[3][3] = {};
  const QuadratureRule& rule = quadrature_degree4();
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const LocalBasis b = pressure_shape_functions(rule.points[q][0], rule.points[q][1]);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) mloc[i][j] += rule.weights[q] * geo.det * b.value[i] * b.value[j];
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(mloc[i][j] - (i == j ? area / 6 : area / 12)) < 1e-15);

  // Global assembly on the 2-triangle mesh sums the two local matrices.
  auto sys = make_unit_square_system(1, ElementPair::TaylorHood);
  const DenseMatrix mp = DenseMatrix(sys->matrices().Mp);
  // Vertices 0 and 3 lie on the diagonal and belong to both triangles.
  CHECK(std::abs(mp(0, 0) - 2 * area / 6) < 1e-15);
  CHECK(std::abs(mp(3, 3) - 2 * area / 6) < 1e-15);
  CHECK(std::abs(mp(1, 1) - area / 6) < 1e-15);
  CHECK(std::abs(mp(0, 3) - 2 * area / 12) < 1e-15);
  CHECK(std::abs(mp(1, 2)) < 1e-15);
}

TEST_CASE("velocity basis vanishes at eliminated nodes") {
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto s = make_spaces(3, pair);
    const Mesh& m = s->mesh();
    // Every local node with a dof is interior; every eliminated node is on the boundary.
    for (int node : s->eliminated_nodes()) CHECK(on_unit_square_boundary(s->node_point(node)));
    for (int node = 0; node < s->n_scalar_nodes(); ++node)
      if (s->interior_index(node) >= 0) CHECK_FALSE(on_unit_square_boundary(s->node_point(node)));
    // Evaluating a random coefficient vector at boundary points of each triangle gives 0.
    Vector c = Vector::Random(s->velocity_dof_count());
    for (std::size_t t = 0; t < m.n_triangles(); ++t) {
      for (const auto& ref : std::vector<std::array<double, 2>>{{0, 0}, {1, 0}, {0, 1}, {0.5, 0}, {0.5, 0.5}, {0, 0.5}}) {
        const Point x = element_geometry(m, t).map(ref[0], ref[1]);
        if (!on_unit_square_boundary(x)) continue;
        const LocalBasis b = velocity_shape_functions(pair, ref[0], ref[1]);
        for (int comp = 0; comp < 2; ++comp) {
          double v = 0.0;
          for (int k = 0; k < b.size; ++k) {
            const Index d = s->velocity_dof(t, k, comp);
            if (d >= 0) v += c[d] * b.value[k];
          }
          CHECK(std::abs(v) < 1e-14);
        }
      }
    }
  }
}

TEST_CASE("velocity interpolation") {
  auto s = make_spaces(4, ElementPair::TaylorHood);
  VectorField zero = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
  CHECK(interpolate_velocity(zero, *s).norm() == 0.0);

  // Smooth field vanishing on the boundary: rate close to 3.
  VectorField g = [](double x, double y) {
    return std::array<double, 2>{std::sin(M_PI * x) * std::sin(M_PI * y), 0.0};
  };
  double prev = 0.0;
  std::vector<double> rates;
  for (int n : {4, 8, 16, 32}) {
    auto sp = make_spaces(n, ElementPair::TaylorHood);
    QuadratureSampler smp(sp);
    const double e = smp.velocity_l2_distance(interpolate_velocity(g, *sp), smp.sample(g));
    if (prev > 0.0) rates.push_back(std::log2(prev / e));
    prev = e;
  }
  for (double r : rates) CHECK(r >= 2.8);
}

TEST_CASE("P2 interpolation is exact on P2 fields vanishing on the boundary") {
  // The field is the piecewise P2 function of a random coefficient vector.
  auto s = make_spaces(3, ElementPair::TaylorHood);
  QuadratureSampler smp(s);
  Vector c = Vector::Random(s->velocity_dof_count());
  const Mesh& m = s->mesh();
  // The field: locate the triangle through barycentric coordinates.
  VectorField field = [&](double x, double y) {
    for (std::size_t t = 0; t < m.n_triangles(); ++t) {
      const ElementGeometry geo = element_geometry(m, t);
      const double dx = x - geo.vertex[0].x, dy = y - geo.vertex[0].y;
      const double xi = geo.inv_transpose[0] * dx + geo.inv_transpose[2] * dy;
      const double eta = geo.inv_transpose[1] * dx + geo.inv_transpose[3] * dy;
      if (xi < -1e-12 || eta < -1e-12 || xi + eta > 1 + 1e-12) continue;
      const LocalBasis b = velocity_shape_functions(ElementPair::TaylorHood, xi, eta);
      std::array<double, 2> v{0.0, 0.0};
      for (int k = 0; k < 6; ++k)
        for (int comp = 0; comp < 2; ++comp) {
          const Index d = s->velocity_dof(t, k, comp);
          if (d >= 0) v[comp] += c[d] * b.value[k];
        }
      return v;
    }
    return std::array<double, 2>{0.0, 0.0};
  };
  const Vector ci = interpolate_velocity(field, *s);
  CHECK((ci - c).norm() < 1e-12);
  CHECK(smp.velocity_l2_distance(ci, smp.sample(field)) < 1e-12);
}

TEST_CASE("pressure interpolation") {
  auto s = make_spaces(4, ElementPair::TaylorHood);
  CHECK(interpolate_pressure([](double, double) { return 3.5; }, *s).norm() < 1e-14);

  ScalarField affine = [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y; };
  const Vector pa = interpolate_pressure(affine, *s);
  CHECK(std::abs(s->pressure_mean_weights().dot(pa)) < 1e-14);
  // Mean of the affine field over the unit square is 1 + 1 - 1.5 = 0.5.
  QuadratureSampler smp(s);
  CHECK(smp.pressure_l2_distance(pa, [](double x, double y) { return 2.0 * x - 3.0 * y + 0.5; }) < 1e-13);

  ScalarField q = [](double x, double y) { return std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y); };
  double prev = 0.0;
  for (int n : {8, 16, 32, 64}) {
    auto sp = make_spaces(n, ElementPair::TaylorHood);
    QuadratureSampler sm(sp);
    const double e = sm.pressure_l2_distance(interpolate_pressure(q, *sp), q);
    if (prev > 0.0) CHECK(std::abs(std::log2(prev / e) - 2.0) <= 0.2);
    prev = e;
  }
}
