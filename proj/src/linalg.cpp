// ============================================================================
// linalg.cpp - Sparse LU wrapper, complex-shifted solves, Lanczos eigensolver
// ============================================================================
#include "stokesdg/linalg.hpp"

#include "stokesdg/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

namespace stokesdg {

// ---------------------------------------------------------------------------
// Factorization
// ---------------------------------------------------------------------------

Factorization::Factorization(const SparseMatrix& a) : n_(a.rows()), matrix_(a) {
  if (a.rows() != a.cols())
    throw InvalidArgument("linalg", "factor_solve", "matrix is not square");
  matrix_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(matrix_);
  lu_->factorize(matrix_);
  if (lu_->info() != Eigen::Success) {
    // SparseLU reports the failing pivot column in its message.
    throw NumericalFailure("linalg", "factor_solve",
                           "factorization failed (n=" + std::to_string(n_) + "): " + lu_->lastErrorMessage());
  }
}

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != n_) throw InvalidArgument("linalg", "factor_solve", "right-hand side has wrong size");
  Vector x = lu_->solve(b);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Vector::Zero(n_);
  Vector r = b - matrix_ * x;
  if (r.norm() > 1e-12 * bnorm) x += lu_->solve(r);
  return x;
}

double Factorization::relative_residual(const Vector& x, const Vector& b) const {
  const double bnorm = b.norm();
  const double rnorm = (b - matrix_ * x).norm();
  return bnorm == 0.0 ? rnorm : rnorm / bnorm;
}

Vector factor_solve(const SparseMatrix& a, const Vector& b) { return Factorization(a).solve(b); }

// ---------------------------------------------------------------------------
// Block assembly helpers
// ---------------------------------------------------------------------------

namespace {

void append_block(std::vector<Triplet>& trips, const SparseMatrix& m, Index row0, Index col0, double scale) {
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it)
      trips.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

} // namespace

SparseMatrix block_matrix_2x2(const SparseMatrix& a, const SparseMatrix& bt, const SparseMatrix& b,
                              const SparseMatrix& c) {
  const Index n = a.rows();
  const Index m = b.rows();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.nonZeros() + bt.nonZeros() + b.nonZeros() + c.nonZeros()));
  append_block(trips, a, 0, 0, 1.0);
  append_block(trips, bt, 0, n, 1.0);
  append_block(trips, b, n, 0, 1.0);
  append_block(trips, c, n, n, 1.0);
  SparseMatrix out(n + m, n + m);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

SparseMatrix complex_shift_block(double a, double b, const SparseMatrix& m, const SparseMatrix& k) {
  const Index n = m.rows();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(4 * (m.nonZeros() + k.nonZeros())));
  for (int blk = 0; blk < 2; ++blk) {
    const Index off = blk * n;
    append_block(trips, m, off, off, a);
    append_block(trips, k, off, off, 1.0);
  }
  if (b != 0.0) {
    append_block(trips, m, 0, n, -b);
    append_block(trips, m, n, 0, b);
  }
  SparseMatrix out(2 * n, 2 * n);
  out.setFromTriplets(trips.begin(), trips.end());
  out.prune(0.0);
  out.makeCompressed();
  return out;
}

namespace {

// Estimate of ||A^{-1}||_2 ||A||_2 by a few power steps on A^T A and its inverse.
double condition_estimate(const Factorization& f, const SparseMatrix& a) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  Vector x(a.rows());
  for (Index i = 0; i < x.size(); ++i) x[i] = dist(rng);
  x.normalize();
  double inv_norm = 0.0;
  for (int it = 0; it < 6; ++it) {
    Vector y = f.solve(x);
    inv_norm = y.norm();
    if (inv_norm == 0.0) break;
    x = y / inv_norm;
  }
  x.setOnes();
  x.normalize();
  double fwd_norm = 0.0;
  for (int it = 0; it < 6; ++it) {
    Vector y = a * x;
    fwd_norm = y.norm();
    if (fwd_norm == 0.0) break;
    x = y / fwd_norm;
  }
  return inv_norm * fwd_norm;
}

} // namespace

ComplexSolution solve_complex_shifted(double a, double b, const SparseMatrix& m, const SparseMatrix& k,
                                      const Vector& f_re, const Vector& f_im) {
  const Index n = m.rows();
  if (k.rows() != n || f_re.size() != n || f_im.size() != n)
    throw InvalidArgument("linalg", "solve_complex_shifted", "dimension mismatch");
  const SparseMatrix block = complex_shift_block(a, b, m, k);
  Vector rhs(2 * n);
  rhs << f_re, f_im;

  std::unique_ptr<Factorization> fact;
  try {
    fact = std::make_unique<Factorization>(block);
  } catch (const NumericalFailure& e) {
    std::ostringstream msg;
    msg << "shift z = " << a << " + " << b << "i is (numerically) an eigenvalue: " << e.what();
    throw NumericalFailure("linalg", "solve_complex_shifted", msg.str());
  }
  const Vector x = fact->solve(rhs);
  const double res = fact->relative_residual(x, rhs);
  if (!(res <= 1e-9)) {
    std::ostringstream msg;
    msg << "near-singular shift z = " << a << " + " << b << "i, relative residual " << res
        << ", condition estimate " << condition_estimate(*fact, block);
    throw NumericalFailure("linalg", "solve_complex_shifted", msg.str());
  }
  return {x.head(n), x.tail(n)};
}

// ---------------------------------------------------------------------------
// Smallest generalized eigenvalue
// ---------------------------------------------------------------------------

EigenResult smallest_generalized_eigenvalue(const EigenProblem& problem, const EigenOptions& options) {
  const Index n = problem.size;
  if (n <= 0) throw InvalidArgument("linalg", "smallest_generalized_eigenvalue", "empty problem");

  auto residual_of = [&](const Vector& x, double lambda) {
    if (problem.residual) return problem.residual(x, lambda);
    const Vector sx = problem.apply_s(x);
    const double denom = sx.norm();
    const double r = (sx - lambda * problem.apply_t(x)).norm();
    return denom > 0.0 ? r / denom : r;
  };
  auto t_norm = [&](const Vector& x) { return std::sqrt(std::max(0.0, x.dot(problem.apply_t(x)))); };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> dist;
  Vector start(n);
  for (Index i = 0; i < n; ++i) start[i] = dist(rng);

  int applications = 0;
  Vector pending = problem.apply_inverse(start);
  ++applications;
  if (problem.project) problem.project(pending);
  double best_lambda = 0.0;
  double best_residual = std::numeric_limits<double>::infinity();

  // T-orthonormal basis, its T-images and its images under S^{-1} T.
  std::vector<Vector> q, tq, img;
  const int kdim = static_cast<int>(std::min<Index>(std::max(options.krylov_dimension, 10), n));
  const int keep = std::min(20, kdim / 2);

  auto orthogonalize = [&](Vector& w) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t i = 0; i < q.size(); ++i) w -= tq[i].dot(w) * q[i];
    if (problem.project) problem.project(w);
  };

  int since_check = 0;
  while (applications < options.max_iterations) {
    const double scale = t_norm(pending);
    orthogonalize(pending);
    const Vector tp = problem.apply_t(pending);
    const double b = std::sqrt(std::max(0.0, pending.dot(tp)));
    const bool exhausted = q.size() > 0 && (!(b > 1e-10 * scale) || static_cast<Index>(q.size()) >= n);
    if (q.empty() && !(b > 0.0))
      throw NumericalFailure("linalg", "smallest_generalized_eigenvalue", "start vector has zero T-norm");

    if (!exhausted) {
      q.push_back(pending / b);
      tq.push_back(tp / b);
      img.push_back(problem.apply_inverse(q.back()));
      ++applications;
      pending = img.back();
      ++since_check;
    }
    const int m = static_cast<int>(q.size());
    if (!(exhausted || since_check >= 5 || m >= kdim || applications >= options.max_iterations)) continue;
    since_check = 0;

    // Rayleigh-Ritz for S^{-1} T on span(q); the largest Ritz values
    // approximate the reciprocals of the smallest eigenvalues.
    DenseMatrix h(m, m);
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) h(i, k) = tq[i].dot(img[k]);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (h + h.transpose()));
    const double theta = es.eigenvalues()[m - 1];
    const Eigen::VectorXd y = es.eigenvectors().col(m - 1);
    Vector ritz = Vector::Zero(n);
    for (int i = 0; i < m; ++i) ritz += y[i] * q[i];
    const double rn = t_norm(ritz);
    ritz /= rn;
    const double lambda = 1.0 / theta;
    const double res = residual_of(ritz, lambda);
    if (res < best_residual) {
      best_residual = res;
      best_lambda = lambda;
    }
    if (res <= options.tolerance) return {lambda, ritz, res, applications};

    if (exhausted || m >= kdim) {
      // Thick restart: keep the leading Ritz vectors together with their images.
      const int r = std::min(keep, m);
      std::vector<Vector> q2, tq2, img2;
      for (int c = 0; c < r; ++c) {
        const Eigen::VectorXd yc = es.eigenvectors().col(m - 1 - c);
        Vector v = Vector::Zero(n), tv = Vector::Zero(n), iv = Vector::Zero(n);
        for (int i = 0; i < m; ++i) {
          v += yc[i] * q[i];
          tv += yc[i] * tq[i];
          iv += yc[i] * img[i];
        }
        q2.push_back(std::move(v));
        tq2.push_back(std::move(tv));
        img2.push_back(std::move(iv));
      }
      q = std::move(q2);
      tq = std::move(tq2);
      img = std::move(img2);
      pending = img[0];
      if (exhausted) {
        // The kept space is invariant up to rounding; continue from a fresh
        // direction so the iteration cannot stall.
        Vector fresh(n);
        for (Index i = 0; i < n; ++i) fresh[i] = dist(rng);
        pending = problem.apply_inverse(fresh);
        ++applications;
        if (problem.project) problem.project(pending);
      }
    }
  }
  std::ostringstream msg;
  msg << "no convergence after " << applications << " iterations, last residual " << best_residual
      << " (eigenvalue estimate " << best_lambda << ")";
  throw NumericalFailure("linalg", "smallest_generalized_eigenvalue", msg.str());
}

EigenResult smallest_generalized_eigenvalue(const SparseMatrix& s, const SparseMatrix& t,
                                            const SparseMatrix* constraints, const EigenOptions& options) {
  const Index n = s.rows();
  if (s.cols() != n || t.rows() != n || t.cols() != n)
    throw InvalidArgument("linalg", "smallest_generalized_eigenvalue", "S and T must be square and equal size");

  EigenProblem problem;
  problem.size = n;
  problem.apply_s = [&s](const Vector& x) -> Vector { return s * x; };
  problem.apply_t = [&t](const Vector& x) -> Vector { return t * x; };

  std::shared_ptr<Factorization> inverse;
  std::shared_ptr<Factorization> range_proj;
  if (constraints == nullptr) {
    inverse = std::make_shared<Factorization>(s);
    problem.apply_inverse = [inverse, &t](const Vector& y) -> Vector { return inverse->solve(t * y); };
  } else {
    const SparseMatrix& c = *constraints;
    if (c.cols() != n) throw InvalidArgument("linalg", "smallest_generalized_eigenvalue", "constraint width mismatch");
    const Index m = c.rows();
    const SparseMatrix ct = c.transpose();
    SparseMatrix zero(m, m);
    inverse = std::make_shared<Factorization>(block_matrix_2x2(s, ct, c, zero));
    problem.apply_inverse = [inverse, &t, n, m](const Vector& y) -> Vector {
      Vector rhs = Vector::Zero(n + m);
      rhs.head(n) = t * y;
      return inverse->solve(rhs).head(n);
    };
    SparseMatrix cct = (c * ct).pruned();
    range_proj = std::make_shared<Factorization>(cct);
    problem.residual = [&s, &t, &c, range_proj](const Vector& x, double lambda) {
      const Vector sx = s * x;
      Vector r = sx - lambda * (t * x);
      const Vector mu = range_proj->solve(c * r);
      r -= c.transpose() * mu;
      const double d = sx.norm();
      return d > 0.0 ? r.norm() / d : r.norm();
    };
  }
  return smallest_generalized_eigenvalue(problem, options);
}

} // namespace stokesdg
