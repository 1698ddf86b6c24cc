// ============================================================================
// linalg.hpp - Sparse direct solves and smallest generalized eigenpairs
// ============================================================================
#pragma once

#include "stokesdg/types.hpp"

#include <Eigen/SparseLU>

#include <functional>
#include <memory>
#include <optional>

namespace stokesdg {

/// Sparse LU factorization with COLAMD ordering and partial pivoting. Works
/// for SPD as well as symmetric indefinite (saddle point) and nonsymmetric
/// matrices. Immutable after construction; concurrent solve() calls are safe.
class Factorization {
public:
  explicit Factorization(const SparseMatrix& a);

  Index size() const noexcept { return n_; }

  /// Solves A x = b. One step of iterative refinement is applied when the
  /// relative residual exceeds 1e-12.
  Vector solve(const Vector& b) const;

  /// ||A x - b||_2 / ||b||_2 (0 for b = 0).
  double relative_residual(const Vector& x, const Vector& b) const;

private:
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor>;
  Index n_ = 0;
  ColMajor matrix_;
  std::unique_ptr<Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>> lu_;
};

Vector factor_solve(const SparseMatrix& a, const Vector& b);

struct ComplexSolution {
  Vector re;
  Vector im;
};

/// Solves ((a + i b) M + K)(x_re + i x_im) = f_re + i f_im through the real
/// block system [[aM+K, -bM], [bM, aM+K]]. M and K may be augmented
/// (saddle point) matrices.
ComplexSolution solve_complex_shifted(double a, double b, const SparseMatrix& m, const SparseMatrix& k,
                                      const Vector& f_re, const Vector& f_im);
inline ComplexSolution solve_complex_shifted(double a, double b, const SparseMatrix& m,
                                             const SparseMatrix& k, const Vector& f) {
  return solve_complex_shifted(a, b, m, k, f, Vector::Zero(f.size()));
}

/// Real 2n x 2n block matrix [[aM+K, -bM], [bM, aM+K]].
SparseMatrix complex_shift_block(double a, double b, const SparseMatrix& m, const SparseMatrix& k);

struct EigenResult {
  double eigenvalue = 0.0;
  Vector eigenvector;   // T-normalized
  double residual = 0.0; // relative residual as measured by the problem
  int iterations = 0;   // applications of the inverse operator
};

struct EigenOptions {
  double tolerance = 1e-8;
  int max_iterations = 500;
  int krylov_dimension = 60;
  unsigned seed = 20240917u;
};

/// Matrix-free description of the pencil S x = lambda T x on a constraint
/// subspace. apply_inverse(y) must return the x in the constraint space
/// with S x = T y + (constraint forces), i.e. the constrained solve.
struct EigenProblem {
  Index size = 0;
  std::function<Vector(const Vector&)> apply_s;
  std::function<Vector(const Vector&)> apply_t;
  std::function<Vector(const Vector&)> apply_inverse;
  /// Relative residual of a candidate pair. Defaults to
  /// ||S x - lambda T x|| / ||S x||, which is only appropriate without
  /// constraints.
  std::function<double(const Vector&, double)> residual;
  /// Optional in-place removal of components in the kernel of T (for
  /// semidefinite T), applied to every new basis vector.
  std::function<void(Vector&)> project;
};

/// Smallest eigenvalue by Lanczos iteration on the inverse operator
/// S^{-1} T (inverse iteration accelerated over its Krylov space), with
/// restarts from the current Ritz vector. Throws NumericalFailure if the
/// residual does not reach the tolerance within max_iterations.
EigenResult smallest_generalized_eigenvalue(const EigenProblem& problem, const EigenOptions& options = {});

/// Sparse convenience form. With a constraint matrix C (full row rank), the
/// inverse is the saddle solve [[S, C^T], [C, 0]] and residuals are measured
/// after removing the component in range(C^T).
EigenResult smallest_generalized_eigenvalue(const SparseMatrix& s, const SparseMatrix& t,
                                            const SparseMatrix* constraints = nullptr,
                                            const EigenOptions& options = {});

/// Builds the symmetric block matrix [[a, b^T], [b, c]] from sparse blocks.
SparseMatrix block_matrix_2x2(const SparseMatrix& a, const SparseMatrix& bt, const SparseMatrix& b,
                              const SparseMatrix& c);

} // namespace stokesdg
