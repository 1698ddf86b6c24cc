// ============================================================================
// assembly.hpp - Global matrices and the discrete operators Delta_h, P_h, A_h
//
// Bilinear forms (phi_j velocity basis, l_i pressure basis):
//   M   (phi_i, phi_j)            K   (grad phi_i, grad phi_j)
//   B   (l_i, div phi_j)          G   (grad l_j, phi_i)   [= -B^T]
//   Mp  (l_i, l_j)                Kp  (grad l_i, grad l_j)
//   mp  integral of l_i
//
// Saddle systems are posed with the physical pressure sign:
//   [ A   -B^T  0  ] [u]   [ F ]
//   [ -B   0    mp ] [p] = [-g ]      (B u = g, mean(p) = 0)
//   [ 0   mp^T  0  ] [c]   [ 0 ]
// ============================================================================
#pragma once

#include "stokesdg/linalg.hpp"
#include "stokesdg/spaces.hpp"
#include "stokesdg/types.hpp"

#include <iosfwd>
#include <memory>
#include <mutex>

namespace stokesdg {

struct AssembledSystem {
  SparseMatrix M;
  SparseMatrix K;
  SparseMatrix B;
  SparseMatrix Mp;
  SparseMatrix Kp;
  SparseMatrix G;
  Vector mp;
};

AssembledSystem assemble(const DiscreteSpaces& spaces);

/// [[A, -B^T, 0], [-B, 0, mp], [0, mp^T, 0]].
SparseMatrix saddle_matrix(const SparseMatrix& a, const SparseMatrix& b, const Vector& mp);

struct SaddleSolution {
  Vector u;
  Vector p;
  double multiplier = 0.0;
};

/// Assembled matrices of one (mesh, element pair) together with lazily built,
/// shared factorizations. Immutable from the outside; all const member
/// functions may be called concurrently.
class StokesSystem {
public:
  explicit StokesSystem(std::shared_ptr<const DiscreteSpaces> spaces);
  StokesSystem(const StokesSystem&) = delete;
  StokesSystem& operator=(const StokesSystem&) = delete;

  const DiscreteSpaces& spaces() const noexcept { return *spaces_; }
  const std::shared_ptr<const DiscreteSpaces>& spaces_ptr() const noexcept { return spaces_; }
  const AssembledSystem& matrices() const noexcept { return sys_; }
  const QuadratureSampler& sampler() const noexcept { return sampler_; }
  Index nu() const noexcept { return sys_.M.rows(); }
  Index np() const noexcept { return sys_.Mp.rows(); }

  const Factorization& mass_factor() const;
  const Factorization& stiffness_factor() const;
  const Factorization& leray_factor() const;  // saddle with A = M
  const Factorization& stokes_factor() const; // saddle with A = K

  /// M u - B^T p = F, B u = g (g empty means 0), mean(p) = 0.
  SaddleSolution solve_leray_saddle(const Vector& f, const Vector& g = Vector()) const;
  /// K u - B^T p = F, B u = g, mean(p) = 0.
  SaddleSolution solve_stokes_saddle(const Vector& f, const Vector& g = Vector()) const;

  double l2_inner(const Vector& u, const Vector& v) const { return u.dot(sys_.M * v); }
  double l2_norm(const Vector& u) const { return std::sqrt(std::max(0.0, l2_inner(u, u))); }
  double h1_seminorm(const Vector& u) const { return std::sqrt(std::max(0.0, u.dot(sys_.K * u))); }
  double pressure_l2_norm(const Vector& p) const { return std::sqrt(std::max(0.0, p.dot(sys_.Mp * p))); }
  double pressure_gradient_norm(const Vector& p) const { return std::sqrt(std::max(0.0, p.dot(sys_.Kp * p))); }
  double pressure_mean(const Vector& p) const { return sys_.mp.dot(p); }

  Vector load(const VectorField& f) const { return sampler_.load(sampler_.sample(f)); }

private:
  SaddleSolution solve_saddle(const Factorization& f, const Vector& rhs_u, const Vector& g) const;

  std::shared_ptr<const DiscreteSpaces> spaces_;
  AssembledSystem sys_;
  QuadratureSampler sampler_;

  mutable std::once_flag mass_once_, stiff_once_, leray_once_, stokes_once_;
  mutable std::unique_ptr<Factorization> mass_, stiff_, leray_, stokes_;
};

/// Builds mesh, spaces and system for unit_square_mesh(n).
std::shared_ptr<StokesSystem> make_unit_square_system(int n, ElementPair pair);

/// d = Delta_h z, i.e. M d = -K z.
Vector apply_discrete_laplacian(const Vector& z, const StokesSystem& sys);

/// L2 projection onto V_h of the discrete function with coefficients v.
Vector leray_project(const Vector& v, const StokesSystem& sys);
/// L2 projection onto V_h of the functional F (F_i = (f, phi_i)).
Vector leray_project_load(const Vector& f, const StokesSystem& sys);

/// A_h u = P_h(-Delta_h u) for u in V_h. Throws InvalidArgument when
/// ||B u||_2 > 1e-9 max(1, ||u||_2).
Vector apply_stokes_operator(const Vector& u, const StokesSystem& sys);

/// Smallest eigenpair of the (K, M) pencil on X_h (discrete Laplacian).
EigenResult laplacian_min_eigenpair(const StokesSystem& sys, const EigenOptions& options = {});
/// Smallest eigenpair of A_h on V_h (constrained (K, M) pencil).
EigenResult stokes_min_eigenpair(const StokesSystem& sys, const EigenOptions& options = {});

/// Coordinate dump: header "matrix <rows> <cols> <nnz>", then "i j value".
void write_matrix_coordinate(std::ostream& out, const SparseMatrix& a);

} // namespace stokesdg
