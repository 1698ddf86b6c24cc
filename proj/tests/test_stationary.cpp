#include "doctest.h"

#include "stokesdg/errors.hpp"
#include "stokesdg/stationary.hpp"

#include <cmath>
#include <random>

using namespace stokesdg;

namespace {

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

Vector random_zero_mean_pressure(const StokesSystem& sys, std::mt19937_64& rng) {
  Vector q = random_vector(sys.np(), rng);
  q.array() -= sys.pressure_mean(q) / sys.matrices().mp.sum();
  return q;
}

// Stream function psi = sin^2(pi x) sin^2(pi y) / pi, u = (d_y psi, -d_x psi).
VelocityField smooth_velocity() {
  VelocityField w;
  w.value = [](double x, double y) {
    const double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
    return std::array<double, 2>{sx * sx * std::sin(2 * M_PI * y), -std::sin(2 * M_PI * x) * sy * sy};
  };
  w.jacobian = [](double x, double y) {
    const double sx = std::sin(M_PI * x), sy = std::sin(M_PI * y);
    const double s2x = std::sin(2 * M_PI * x), s2y = std::sin(2 * M_PI * y);
    return std::array<double, 4>{M_PI * s2x * s2y, 2 * M_PI * sx * sx * std::cos(2 * M_PI * y),
                                 -2 * M_PI * std::cos(2 * M_PI * x) * sy * sy, -M_PI * s2x * s2y};
  };
  return w;
}

} // namespace

TEST_CASE("stationary solves with trivial data") {
  auto sys = make_unit_square_system(4, ElementPair::TaylorHood);
  const StokesSolution z = solve_stationary(Vector::Zero(sys->nu()), *sys);
  CHECK(z.u.norm() == 0.0);
  CHECK(z.p.norm() == 0.0);

  // f = grad q for a discrete zero-mean q: the pair (0, q) solves exactly.
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto s = make_unit_square_system(4, pair);
    std::mt19937_64 rng(2);
    const Vector q = random_zero_mean_pressure(*s, rng);
    const Vector load = s->matrices().G * q; // (grad q, phi_i)
    const StokesSolution sol = solve_stationary(load, *s);
    CHECK(sol.u.norm() <= 1e-10 * q.norm());
    CHECK((sol.p - q).norm() <= 1e-10 * q.norm());
    CHECK(std::abs(sol.multiplier) <= 1e-10);
  }
}

TEST_CASE("stationary solution invariants") {
  auto sys = make_unit_square_system(6, ElementPair::Mini);
  std::mt19937_64 rng(4);
  const StokesSolution s = solve_stationary(random_vector(sys->nu(), rng), *sys);
  CHECK((sys->matrices().B * s.u).norm() <= 1e-9);
  CHECK(std::abs(sys->pressure_mean(s.p)) <= 1e-10);
}

TEST_CASE("Ritz projection consistency") {
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto sys = make_unit_square_system(4, pair);
    std::mt19937_64 rng(9);
    const Vector w = leray_project(random_vector(sys->nu(), rng), *sys);
    const Vector phi = random_zero_mean_pressure(*sys, rng);
    const StokesSolution r = ritz_projection(w, phi, *sys);
    CHECK((r.u - w).norm() <= 1e-10 * w.norm());
    CHECK((r.p - phi).norm() <= 1e-10 * phi.norm());
    // idempotence
    const StokesSolution r2 = ritz_projection(r.u, r.p, *sys);
    CHECK((r2.u - r.u).norm() <= 1e-12 * std::max(1.0, r.u.norm()));

    // shift property R(u - v, p - q) = R(u, p) - v for (v, q) discrete
    const Vector u = random_vector(sys->nu(), rng);
    const Vector p = random_zero_mean_pressure(*sys, rng);
    const StokesSolution ru = ritz_projection(u, p, *sys);
    const StokesSolution rs = ritz_projection(Vector(u - w), Vector(p - phi), *sys);
    CHECK((rs.u - (ru.u - w)).norm() <= 1e-10 * ru.u.norm());
    CHECK((rs.p - (ru.p - phi)).norm() <= 1e-10 * std::max(1.0, ru.p.norm()));
  }
}

TEST_CASE("Ritz projection of a divergence-free field lands in V_h") {
  const VelocityField w = smooth_velocity();
  ScalarField phi = [](double x, double y) { return std::cos(M_PI * x) * y; };
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto sys = make_unit_square_system(8, pair);
    const StokesSolution r = ritz_projection(w, phi, *sys);
    CHECK((sys->matrices().B * r.u).norm() <= 1e-9);
  }
}

TEST_CASE("stationary and Ritz agree on discrete data") {
  // For a discrete pair (u, p) with u in V_h, the load K u - B^T p reproduces it.
  auto sys = make_unit_square_system(5, ElementPair::TaylorHood);
  std::mt19937_64 rng(13);
  const Vector u = leray_project(random_vector(sys->nu(), rng), *sys);
  const Vector p = random_zero_mean_pressure(*sys, rng);
  const Vector load = sys->matrices().K * u - sys->matrices().B.transpose() * p;
  const StokesSolution s = solve_stationary(load, *sys);
  const StokesSolution r = ritz_projection(u, p, *sys);
  CHECK((s.u - u).norm() <= 1e-9 * u.norm());
  CHECK((s.p - p).norm() <= 1e-9 * p.norm());
  CHECK((r.u - u).norm() <= 1e-9 * u.norm());
  CHECK((r.p - p).norm() <= 1e-9 * p.norm());
}

TEST_CASE("Mini Ritz projection converges at second order in L2") {
  const VelocityField w = smooth_velocity();
  ScalarField phi = [](double x, double y) { return std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y); };
  double prev = 0.0;
  for (int n : {8, 16, 32}) {
    auto sys = make_unit_square_system(n, ElementPair::Mini);
    const StokesSolution r = ritz_projection(w, phi, *sys);
    const double e = sys->sampler().velocity_l2_distance(r.u, sys->sampler().sample(w.value));
    if (prev > 0.0) CHECK(std::log2(prev / e) >= 1.8);
    prev = e;
  }
}

TEST_CASE("pressure recovery") {
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto sys = make_unit_square_system(4, pair);
    const auto& m = sys->matrices();
    CHECK(recover_pressure(Vector::Zero(sys->nu()), *sys).norm() == 0.0);

    const double beta = infsup_constant(*sys);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector q = random_zero_mean_pressure(*sys, rng);
      // w = M^{-1} B^T q satisfies (w, v) = (q, div v).
      const Vector w = sys->mass_factor().solve(m.B.transpose() * q);
      const Vector p = recover_pressure(w, *sys);
      CHECK((p - q).norm() <= 1e-9 * q.norm());
      // ||p|| <= ||grad (-Delta_h)^{-1} w|| / beta
      const Vector y = sys->stiffness_factor().solve(m.M * w);
      CHECK(sys->pressure_l2_norm(p) <= sys->h1_seminorm(y) / beta * (1 + 1e-10));
    }
    const Vector in_vh = leray_project(Vector::Ones(sys->nu()), *sys);
    CHECK_THROWS_AS(recover_pressure(in_vh, *sys), InvalidArgument);
  }
}

TEST_CASE("inf-sup constants") {
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    std::vector<double> beta, cpg;
    for (int n : {4, 8, 16, 32}) {
      auto sys = make_unit_square_system(n, pair);
      beta.push_back(infsup_constant(*sys));
      cpg.push_back(pressure_gradient_infsup(*sys));
      CHECK(beta.back() > 0.0);
      CHECK(cpg.back() > 0.0);
    }
    MESSAGE(to_string(pair) << " beta " << beta[0] << " " << beta[1] << " " << beta[2] << " " << beta[3]);
    MESSAGE(to_string(pair) << " C_pg " << cpg[0] << " " << cpg[1] << " " << cpg[2] << " " << cpg[3]);
    const auto spread = [](const std::vector<double>& v) {
      return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end()) - 1.0;
    };
    CHECK(spread(beta) < 0.2);
    CHECK(spread(cpg) < 0.3);
  }
}

TEST_CASE("inf-sup constant is deterministic") {
  auto a = make_unit_square_system(6, ElementPair::TaylorHood);
  auto b = make_unit_square_system(6, ElementPair::TaylorHood);
  CHECK(infsup_constant(*a) == infsup_constant(*b));
}

TEST_CASE("inf-sup eigenpair against dense enumeration") {
  // Dense oracle: beta^2 = min over zero-mean q of q^T B K^{-1} B^T q / q^T Mp q.
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    auto sys = make_unit_square_system(3, pair);
    const auto& m = sys->matrices();
    const DenseMatrix b = DenseMatrix(m.B);
    const DenseMatrix s = b * DenseMatrix(m.K).ldlt().solve(b.transpose());
    const DenseMatrix g = DenseMatrix(m.G);
    const DenseMatrix sg = g.transpose() * DenseMatrix(m.M).ldlt().solve(g);
    // Basis of zero-mean pressures: orthogonal complement of mp.
    Eigen::FullPivHouseholderQR<DenseMatrix> qr(DenseMatrix(m.mp));
    const DenseMatrix z = DenseMatrix(qr.matrixQ()).rightCols(sys->np() - 1);
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> e1(z.transpose() * s * z,
                                                             z.transpose() * DenseMatrix(m.Mp) * z);
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> e2(z.transpose() * sg * z,
                                                             z.transpose() * DenseMatrix(m.Kp) * z);
    CHECK(std::abs(infsup_constant(*sys) - std::sqrt(e1.eigenvalues()[0])) <= 1e-8);
    CHECK(std::abs(pressure_gradient_infsup(*sys) - std::sqrt(e2.eigenvalues()[0])) <= 1e-8);
  }
}

TEST_CASE("pressure-gradient constant on the 2-triangle mesh") {
  // Mini on the 1-mesh: 4 velocity dofs, 3 zero-mean pressure directions.
  auto sys = make_unit_square_system(1, ElementPair::Mini);
  const auto& m = sys->matrices();
  const DenseMatrix g = DenseMatrix(m.G);
  const DenseMatrix mm = DenseMatrix(m.M);
  const auto ratio = [&](const Vector& l) {
    const Vector gl = g * l;
    return std::sqrt(gl.dot(mm.ldlt().solve(gl)) / l.dot(m.Kp * l));
  };
  // Brute force over the unit sphere of the zero-mean space (vertex values
  // modulo constants, parametrized by l0 = 0).
  double best = 1e300;
  Vector arg;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j < 800; ++j) {
      const double th = M_PI * i / 400.0, ph = 2 * M_PI * j / 800.0;
      Vector l(4);
      l << 0.0, std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      const double r = ratio(l);
      if (r < best) {
        best = r;
        arg = l;
      }
    }
  const double c = pressure_gradient_infsup(*sys);
  CHECK(c <= best + 1e-12);
  CHECK(best - c <= 1e-3 * c); // grid resolution of the enumeration
  // Dense generalized eigenproblem on the same space closes the gap.
  DenseMatrix z = DenseMatrix::Zero(4, 3);
  z(1, 0) = z(2, 1) = z(3, 2) = 1.0;
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> es(z.transpose() * g.transpose() * mm.ldlt().solve(g) * z,
                                                           z.transpose() * DenseMatrix(m.Kp) * z);
  CHECK(std::abs(std::sqrt(es.eigenvalues()[0]) - c) <= 1e-8);
}
