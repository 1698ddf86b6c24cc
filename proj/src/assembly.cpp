// ============================================================================
// assembly.cpp - Element loops and discrete operators
// ============================================================================
#include "stokesdg/assembly.hpp"

#include "stokesdg/errors.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

namespace stokesdg {

namespace {

SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& trips) {
  SparseMatrix a(rows, cols);
  a.setFromTriplets(trips.begin(), trips.end());
  a.prune(0.0);
  a.makeCompressed();
  return a;
}

} // namespace

AssembledSystem assemble(const DiscreteSpaces& spaces) {
  const Mesh& mesh = spaces.mesh();
  const ElementPair pair = spaces.pair();
  const int nloc = spaces.local_scalar_count();
  const Index nu = spaces.velocity_dof_count();
  const Index np = spaces.pressure_dof_count();

  // The Mini mass matrix pairs two cubic bubbles (degree 6).
  const QuadratureRule& rule = quadrature_degree4();
  const QuadratureRule& mass_rule = pair == ElementPair::Mini ? quadrature_degree6() : quadrature_degree4();

  std::vector<LocalBasis> vel, pres, vel_mass, pres_mass;
  for (const auto& p : rule.points) {
    vel.push_back(velocity_shape_functions(pair, p[0], p[1]));
    pres.push_back(pressure_shape_functions(p[0], p[1]));
  }
  for (const auto& p : mass_rule.points) {
    vel_mass.push_back(velocity_shape_functions(pair, p[0], p[1]));
    pres_mass.push_back(pressure_shape_functions(p[0], p[1]));
  }

  std::vector<Triplet> tm, tk, tb, tmp, tkp, tg;
  const std::size_t nt = mesh.n_triangles();
  tm.reserve(nt * 2 * nloc * nloc);
  tk.reserve(nt * 2 * nloc * nloc);
  tb.reserve(nt * 2 * 3 * nloc);
  tg.reserve(nt * 2 * 3 * nloc);
  tmp.reserve(nt * 9);
  tkp.reserve(nt * 9);

  AssembledSystem sys;
  sys.mp = Vector::Zero(np);

  for (std::size_t t = 0; t < nt; ++t) {
    const ElementGeometry geo = element_geometry(mesh, t);
    double ms[6][6] = {}, ks[6][6] = {};
    double bl[3][2][6] = {}; // (l_i, d_c phi_k)
    double gl[6][2][3] = {}; // (phi_k, d_c l_j)
    double mpl[3][3] = {}, kpl[3][3] = {};
    double mean[3] = {};

    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * geo.det;
      std::array<std::array<double, 2>, 6> gv;
      std::array<std::array<double, 2>, 3> gp;
      for (int k = 0; k < nloc; ++k) gv[k] = geo.physical_gradient(vel[q].grad[k]);
      for (int i = 0; i < 3; ++i) gp[i] = geo.physical_gradient(pres[q].grad[i]);
      for (int k = 0; k < nloc; ++k)
        for (int l = 0; l < nloc; ++l) ks[k][l] += w * (gv[k][0] * gv[l][0] + gv[k][1] * gv[l][1]);
      for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 2; ++c)
          for (int k = 0; k < nloc; ++k) {
            bl[i][c][k] += w * pres[q].value[i] * gv[k][c];
            gl[k][c][i] += w * vel[q].value[k] * gp[i][c];
          }
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) kpl[i][j] += w * (gp[i][0] * gp[j][0] + gp[i][1] * gp[j][1]);
    }
    for (std::size_t q = 0; q < mass_rule.points.size(); ++q) {
      const double w = mass_rule.weights[q] * geo.det;
      for (int k = 0; k < nloc; ++k)
        for (int l = 0; l < nloc; ++l) ms[k][l] += w * vel_mass[q].value[k] * vel_mass[q].value[l];
      for (int i = 0; i < 3; ++i) {
        mean[i] += w * pres_mass[q].value[i];
        for (int j = 0; j < 3; ++j) mpl[i][j] += w * pres_mass[q].value[i] * pres_mass[q].value[j];
      }
    }

    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < nloc; ++k) {
        const Index rk = spaces.velocity_dof(t, k, c);
        if (rk < 0) continue;
        for (int l = 0; l < nloc; ++l) {
          const Index cl = spaces.velocity_dof(t, l, c);
          if (cl < 0) continue;
          tm.emplace_back(rk, cl, ms[k][l]);
          tk.emplace_back(rk, cl, ks[k][l]);
        }
        for (int i = 0; i < 3; ++i) {
          const Index pi = spaces.pressure_dof(t, i);
          tb.emplace_back(pi, rk, bl[i][c][k]);
          tg.emplace_back(rk, pi, gl[k][c][i]);
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      const Index pi = spaces.pressure_dof(t, i);
      sys.mp[pi] += mean[i];
      for (int j = 0; j < 3; ++j) {
        const Index pj = spaces.pressure_dof(t, j);
        tmp.emplace_back(pi, pj, mpl[i][j]);
        tkp.emplace_back(pi, pj, kpl[i][j]);
      }
    }
  }

  sys.M = from_triplets(nu, nu, tm);
  sys.K = from_triplets(nu, nu, tk);
  sys.B = from_triplets(np, nu, tb);
  sys.G = from_triplets(nu, np, tg);
  sys.Mp = from_triplets(np, np, tmp);
  sys.Kp = from_triplets(np, np, tkp);
  return sys;
}

SparseMatrix saddle_matrix(const SparseMatrix& a, const SparseMatrix& b, const Vector& mp) {
  const Index nu = a.rows();
  const Index np = b.rows();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * b.nonZeros() + 2 * np));
  for (Index r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  for (Index r = 0; r < b.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(b, r); it; ++it) {
      trips.emplace_back(nu + it.row(), it.col(), -it.value());
      trips.emplace_back(it.col(), nu + it.row(), -it.value());
    }
  for (Index i = 0; i < np; ++i) {
    if (mp[i] == 0.0) continue;
    trips.emplace_back(nu + i, nu + np, mp[i]);
    trips.emplace_back(nu + np, nu + i, mp[i]);
  }
  SparseMatrix s(nu + np + 1, nu + np + 1);
  s.setFromTriplets(trips.begin(), trips.end());
  s.makeCompressed();
  return s;
}

// ---------------------------------------------------------------------------
// StokesSystem
// ---------------------------------------------------------------------------

StokesSystem::StokesSystem(std::shared_ptr<const DiscreteSpaces> spaces)
    : spaces_(std::move(spaces)), sys_(assemble(*spaces_)), sampler_(spaces_) {}

const Factorization& StokesSystem::mass_factor() const {
  std::call_once(mass_once_, [this] { mass_ = std::make_unique<Factorization>(sys_.M); });
  return *mass_;
}

const Factorization& StokesSystem::stiffness_factor() const {
  std::call_once(stiff_once_, [this] { stiff_ = std::make_unique<Factorization>(sys_.K); });
  return *stiff_;
}

const Factorization& StokesSystem::leray_factor() const {
  std::call_once(leray_once_,
                 [this] { leray_ = std::make_unique<Factorization>(saddle_matrix(sys_.M, sys_.B, sys_.mp)); });
  return *leray_;
}

const Factorization& StokesSystem::stokes_factor() const {
  std::call_once(stokes_once_,
                 [this] { stokes_ = std::make_unique<Factorization>(saddle_matrix(sys_.K, sys_.B, sys_.mp)); });
  return *stokes_;
}

SaddleSolution StokesSystem::solve_saddle(const Factorization& f, const Vector& rhs_u, const Vector& g) const {
  const Index n_u = nu();
  const Index n_p = np();
  Vector rhs = Vector::Zero(n_u + n_p + 1);
  rhs.head(n_u) = rhs_u;
  if (g.size() > 0) rhs.segment(n_u, n_p) = -g;
  const Vector x = f.solve(rhs);
  return {x.head(n_u), x.segment(n_u, n_p), x[n_u + n_p]};
}

SaddleSolution StokesSystem::solve_leray_saddle(const Vector& f, const Vector& g) const {
  return solve_saddle(leray_factor(), f, g);
}

SaddleSolution StokesSystem::solve_stokes_saddle(const Vector& f, const Vector& g) const {
  return solve_saddle(stokes_factor(), f, g);
}

std::shared_ptr<StokesSystem> make_unit_square_system(int n, ElementPair pair) {
  auto mesh = std::make_shared<const Mesh>(unit_square_mesh(n));
  auto spaces = std::make_shared<const DiscreteSpaces>(mesh, pair);
  return std::make_shared<StokesSystem>(spaces);
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

Vector apply_discrete_laplacian(const Vector& z, const StokesSystem& sys) {
  const Vector rhs = -(sys.matrices().K * z);
  Vector d = sys.mass_factor().solve(rhs);
  const double res = sys.mass_factor().relative_residual(d, rhs);
  if (res > 1e-10)
    throw NumericalFailure("assembly", "apply_discrete_laplacian",
                           "mass solve residual " + std::to_string(res) + " exceeds 1e-10");
  return d;
}

Vector leray_project_load(const Vector& f, const StokesSystem& sys) {
  if (f.size() != sys.nu()) throw InvalidArgument("assembly", "leray_project", "load has wrong size");
  return sys.solve_leray_saddle(f).u;
}

Vector leray_project(const Vector& v, const StokesSystem& sys) {
  if (v.size() != sys.nu()) throw InvalidArgument("assembly", "leray_project", "vector has wrong size");
  return leray_project_load(sys.matrices().M * v, sys);
}

Vector apply_stokes_operator(const Vector& u, const StokesSystem& sys) {
  const double div = (sys.matrices().B * u).norm();
  if (div > 1e-9 * std::max(1.0, u.norm()))
    throw InvalidArgument("assembly", "apply_stokes_operator",
                          "argument is not discretely divergence free, ||B u|| = " + std::to_string(div));
  return leray_project_load(sys.matrices().K * u, sys);
}

EigenResult laplacian_min_eigenpair(const StokesSystem& sys, const EigenOptions& options) {
  const auto& m = sys.matrices();
  EigenProblem problem;
  problem.size = sys.nu();
  problem.apply_s = [&m](const Vector& x) -> Vector { return m.K * x; };
  problem.apply_t = [&m](const Vector& x) -> Vector { return m.M * x; };
  problem.apply_inverse = [&sys, &m](const Vector& y) -> Vector { return sys.stiffness_factor().solve(m.M * y); };
  return smallest_generalized_eigenvalue(problem, options);
}

EigenResult stokes_min_eigenpair(const StokesSystem& sys, const EigenOptions& options) {
  const auto& m = sys.matrices();
  EigenProblem problem;
  problem.size = sys.nu();
  problem.apply_s = [&m](const Vector& x) -> Vector { return m.K * x; };
  problem.apply_t = [&m](const Vector& x) -> Vector { return m.M * x; };
  problem.apply_inverse = [&sys, &m](const Vector& y) -> Vector {
    return sys.solve_stokes_saddle(m.M * y, Vector()).u;
  };
  // K x - lambda M x lies in range(B^T) exactly when its Leray projection
  // vanishes; measure that against the projection of K x.
  problem.residual = [&sys, &m](const Vector& x, double lambda) {
    const Vector kx = m.K * x;
    const Vector r = leray_project_load(kx - lambda * (m.M * x), sys);
    const double d = sys.l2_norm(leray_project_load(kx, sys));
    return d > 0.0 ? sys.l2_norm(r) / d : sys.l2_norm(r);
  };
  return smallest_generalized_eigenvalue(problem, options);
}

void write_matrix_coordinate(std::ostream& out, const SparseMatrix& a) {
  const auto old = out.precision();
  out << std::setprecision(17);
  out << "matrix " << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  for (Index r = 0; r < a.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  out.precision(old);
}

} // namespace stokesdg
