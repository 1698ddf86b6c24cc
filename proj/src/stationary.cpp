// ============================================================================
// stationary.cpp - Stationary Stokes, Ritz projection, inf-sup estimators
// ============================================================================
#include "stokesdg/stationary.hpp"

#include "stokesdg/errors.hpp"

#include <cmath>
#include <sstream>

namespace stokesdg {

StokesSolution solve_stationary(const Vector& load, const StokesSystem& sys) {
  if (load.size() != sys.nu()) throw InvalidArgument("stationary", "solve_stationary", "load has wrong size");
  const SaddleSolution s = sys.solve_stokes_saddle(load);
  return {s.u, s.p, s.multiplier};
}

std::pair<Vector, Vector> ritz_data(const VelocityField& w, const ScalarField& phi, const StokesSystem& sys) {
  const DiscreteSpaces& spaces = sys.spaces();
  const Mesh& mesh = spaces.mesh();
  const QuadratureRule& rule = quadrature_degree6();
  const int nloc = spaces.local_scalar_count();

  std::vector<LocalBasis> vel, pres;
  for (const auto& p : rule.points) {
    vel.push_back(velocity_shape_functions(spaces.pair(), p[0], p[1]));
    pres.push_back(pressure_shape_functions(p[0], p[1]));
  }

  Vector f = Vector::Zero(sys.nu());
  Vector g = Vector::Zero(sys.np());
  for (std::size_t t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double wq = rule.weights[q] * geo.det;
      const Point x = geo.map(rule.points[q][0], rule.points[q][1]);
      const auto jac = w.jacobian(x.x, x.y);
      const double ph = phi(x.x, x.y);
      const double div = jac[0] + jac[3];
      for (int k = 0; k < nloc; ++k) {
        const auto gk = geo.physical_gradient(vel[q].grad[k]);
        for (int c = 0; c < 2; ++c) {
          const Index d = spaces.velocity_dof(t, k, c);
          if (d < 0) continue;
          // (grad w_c, grad phi_k) - (phi, d_c phi_k)
          f[d] += wq * (jac[2 * c] * gk[0] + jac[2 * c + 1] * gk[1] - ph * gk[c]);
        }
      }
      for (int i = 0; i < 3; ++i) g[spaces.pressure_dof(t, i)] += wq * div * pres[q].value[i];
    }
  }
  return {std::move(f), std::move(g)};
}

StokesSolution ritz_projection_from_data(const Vector& f, const Vector& g, const StokesSystem& sys) {
  const SaddleSolution s = sys.solve_stokes_saddle(f, g);
  return {s.u, s.p, s.multiplier};
}

StokesSolution ritz_projection(const VelocityField& w, const ScalarField& phi, const StokesSystem& sys) {
  const auto [f, g] = ritz_data(w, phi, sys);
  return ritz_projection_from_data(f, g, sys);
}

StokesSolution ritz_projection(const Vector& w, const Vector& phi, const StokesSystem& sys) {
  const auto& m = sys.matrices();
  const Vector f = m.K * w - m.B.transpose() * phi;
  const Vector g = m.B * w;
  return ritz_projection_from_data(f, g, sys);
}

Vector recover_pressure(const Vector& w, const StokesSystem& sys) {
  if (w.size() != sys.nu()) throw InvalidArgument("stationary", "recover_pressure", "vector has wrong size");
  const double wn = sys.l2_norm(w);
  if (wn == 0.0) return Vector::Zero(sys.np());
  const Vector mw = sys.matrices().M * w;
  // M x - B^T mu = M w, B x = 0  =>  x = P_h w and B^T(-mu) = M (w - x).
  const SaddleSolution s = sys.solve_leray_saddle(mw);
  const double proj = sys.l2_norm(s.u);
  if (proj > 1e-8 * wn) {
    std::ostringstream msg;
    msg << "argument is not orthogonal to V_h, ||P_h w|| / ||w|| = " << proj / wn;
    throw InvalidArgument("stationary", "recover_pressure", msg.str());
  }
  Vector p = -s.p;
  const Vector target = mw - sys.matrices().M * s.u;
  const double res = (target - sys.matrices().B.transpose() * p).norm();
  if (res > 1e-9 * std::max(target.norm(), 1e-300))
    throw NumericalFailure("stationary", "recover_pressure", "pressure residual " + std::to_string(res));
  return p;
}

EigenResult infsup_eigenpair(const StokesSystem& sys) {
  const auto& m = sys.matrices();
  EigenProblem problem;
  problem.size = sys.np();
  problem.apply_s = [&sys, &m](const Vector& q) -> Vector {
    return m.B * sys.stiffness_factor().solve(m.B.transpose() * q);
  };
  problem.apply_t = [&m](const Vector& q) -> Vector { return m.Mp * q; };
  // K v - B^T q = 0, B v = Mp y + mp c, mean(q) = 0  =>  q = S^{-1} Mp y on zero-mean pressures.
  problem.apply_inverse = [&sys, &m](const Vector& y) -> Vector {
    return sys.solve_stokes_saddle(Vector::Zero(sys.nu()), m.Mp * y).p;
  };
  try {
    return smallest_generalized_eigenvalue(problem);
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("stationary", "infsup_constant", e.what());
  }
}

double infsup_constant(const StokesSystem& sys) { return std::sqrt(infsup_eigenpair(sys).eigenvalue); }

EigenResult pressure_gradient_eigenpair(const StokesSystem& sys) {
  const auto& m = sys.matrices();
  EigenProblem problem;
  problem.size = sys.np();
  problem.apply_s = [&sys, &m](const Vector& l) -> Vector {
    return m.G.transpose() * sys.mass_factor().solve(m.G * l);
  };
  problem.apply_t = [&m](const Vector& l) -> Vector { return m.Kp * l; };
  // G = -B^T, so G^T M^{-1} G = B M^{-1} B^T and the inverse is a Leray-type saddle solve.
  problem.apply_inverse = [&sys, &m](const Vector& y) -> Vector {
    return sys.solve_leray_saddle(Vector::Zero(sys.nu()), m.Kp * y).p;
  };
  // Kp vanishes on constants; keep the basis free of them.
  problem.project = [&m](Vector& l) { l.array() -= m.mp.dot(l) / m.mp.sum(); };
  try {
    return smallest_generalized_eigenvalue(problem);
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("stationary", "pressure_gradient_infsup", e.what());
  }
}

double pressure_gradient_infsup(const StokesSystem& sys) {
  return std::sqrt(pressure_gradient_eigenpair(sys).eigenvalue);
}

InfSupReport infsup_report(const StokesSystem& sys, int level) {
  InfSupReport r;
  r.pair = sys.spaces().pair();
  r.level = level;
  r.h = mesh_statistics(sys.spaces().mesh()).h;
  r.infsup_beta = infsup_constant(sys);
  r.c_pg = pressure_gradient_infsup(sys);
  return r;
}

} // namespace stokesdg
