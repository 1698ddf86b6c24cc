#include "doctest.h"

#include "stokesdg/errors.hpp"
#include "stokesdg/linalg.hpp"

#include <complex>
#include <random>

using namespace stokesdg;

namespace {

SparseMatrix sparse(const DenseMatrix& d) { return d.sparseView(); }

// Plain Gaussian elimination with partial pivoting.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gauss(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a,
                                                Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b) {
  const Index n = a.rows();
  for (Index k = 0; k < n; ++k) {
    Index piv = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    a.row(k).swap(a.row(piv));
    std::swap(b[k], b[piv]);
    for (Index i = k + 1; i < n; ++i) {
      const Scalar l = a(i, k) / a(k, k);
      a.row(i) -= l * a.row(k);
      b[i] -= l * b[k];
    }
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x(n);
  for (Index i = n - 1; i >= 0; --i) {
    Scalar s = b[i];
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
    x[i] = s / a(i, i);
  }
  return x;
}

} // namespace

TEST_CASE("factor_solve on trivial systems") {
  SparseMatrix id(5, 5);
  id.setIdentity();
  const Vector b = Vector::LinSpaced(5, -2.0, 3.0);
  CHECK((factor_solve(id, b) - b).norm() == 0.0);

  DenseMatrix d = DenseMatrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) d(i, i) = i + 1.0;
  const Vector x = factor_solve(sparse(d), Vector::Ones(5));
  for (int i = 0; i < 5; ++i) CHECK(std::abs(x[i] - 1.0 / (i + 1)) < 1e-15);
}

TEST_CASE("factor_solve matches dense elimination on a random SPD matrix") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist;
  DenseMatrix a(50, 50);
  for (Index i = 0; i < 50; ++i)
    for (Index j = 0; j < 50; ++j) a(i, j) = dist(rng);
  const DenseMatrix spd = a.transpose() * a + DenseMatrix::Identity(50, 50);
  Vector b(50);
  for (Index i = 0; i < 50; ++i) b[i] = dist(rng);
  const Vector x = factor_solve(sparse(spd), b);
  const Vector ref = gauss<double>(spd, b);
  CHECK((x - ref).norm() <= 1e-9 * ref.norm());
  CHECK((spd * x - b).norm() <= 1e-10 * b.norm());
}

TEST_CASE("factorization reuse equals independent solves") {
  DenseMatrix d(3, 3);
  d << 4, 1, 0, 1, 3, 1, 0, 1, 2;
  const Factorization f(sparse(d));
  const Vector b1 = Vector::Ones(3), b2 = Vector::LinSpaced(3, 1, 3);
  CHECK((f.solve(b1) - factor_solve(sparse(d), b1)).norm() <= 1e-14);
  CHECK((f.solve(b2) - factor_solve(sparse(d), b2)).norm() <= 1e-14);
  // determinism
  CHECK((f.solve(b2) - f.solve(b2)).norm() == 0.0);
}

TEST_CASE("symmetric indefinite saddle matrix") {
  DenseMatrix d(3, 3);
  d << 2, 0, 1, 0, 2, 1, 1, 1, 0;
  const Vector b(Vector::LinSpaced(3, 1, 3));
  const Vector x = factor_solve(sparse(d), b);
  CHECK((d * x - b).norm() < 1e-13);
}

TEST_CASE("singular matrix is reported") {
  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 1;
  SparseMatrix s = sparse(d);
  CHECK_THROWS_AS(Factorization{s}, NumericalFailure);
  try {
    Factorization f(s);
  } catch (const NumericalFailure& e) {
    CHECK(std::string(e.what()).find("linalg::factor_solve") == 0);
  }
}

TEST_CASE("complex shifted solves") {
  DenseMatrix m(3, 3), k(3, 3);
  m << 2, 1, 0, 1, 4, 1, 0, 1, 2;
  m /= 6.0;
  k << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  const Vector f_re = Vector::LinSpaced(3, 1, 2), f_im = Vector::LinSpaced(3, -1, 0.5);

  SUBCASE("real shift") {
    const ComplexSolution s = solve_complex_shifted(1.5, 0.0, sparse(m), sparse(k), f_re);
    CHECK(s.im.norm() <= 1e-12);
    const Vector ref = gauss<double>(1.5 * m + k, f_re);
    CHECK((s.re - ref).norm() < 1e-12);
  }
  SUBCASE("zero data") {
    const ComplexSolution s = solve_complex_shifted(-0.3, 2.0, sparse(m), sparse(k), Vector::Zero(3));
    CHECK(s.re.norm() == 0.0);
    CHECK(s.im.norm() == 0.0);
  }
  SUBCASE("dense complex oracle") {
    using C = std::complex<double>;
    const C z(-0.7, 3.1);
    Eigen::MatrixXcd a = z * m.cast<C>() + k.cast<C>();
    Eigen::VectorXcd f(3);
    for (int i = 0; i < 3; ++i) f[i] = C(f_re[i], f_im[i]);
    const Eigen::VectorXcd ref = gauss<C>(a, f);
    const ComplexSolution s = solve_complex_shifted(z.real(), z.imag(), sparse(m), sparse(k), f_re, f_im);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(s.re[i] - ref[i].real()) < 1e-13);
      CHECK(std::abs(s.im[i] - ref[i].imag()) < 1e-13);
    }
  }
}

TEST_CASE("smallest generalized eigenvalue") {
  SparseMatrix id(3, 3);
  id.setIdentity();
  CHECK(std::abs(smallest_generalized_eigenvalue(id, id).eigenvalue - 1.0) < 1e-12);

  DenseMatrix d = DenseMatrix::Zero(3, 3);
  d(0, 0) = 3;
  d(1, 1) = 1;
  d(2, 2) = 2;
  const EigenResult r = smallest_generalized_eigenvalue(sparse(d), id);
  CHECK(std::abs(r.eigenvalue - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(r.eigenvector[1]) - 1.0) < 1e-10);
  CHECK(r.residual <= 1e-8);

  SUBCASE("random pencil against a dense solver") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> dist;
    DenseMatrix a(60, 60), b(60, 60);
    for (Index i = 0; i < 60; ++i)
      for (Index j = 0; j < 60; ++j) {
        a(i, j) = dist(rng);
        b(i, j) = dist(rng);
      }
    const DenseMatrix s = a.transpose() * a + 0.1 * DenseMatrix::Identity(60, 60);
    const DenseMatrix t = b.transpose() * b / 60.0 + DenseMatrix::Identity(60, 60);
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(s, t);
    const EigenResult e = smallest_generalized_eigenvalue(sparse(s), sparse(t));
    CHECK(std::abs(e.eigenvalue - ges.eigenvalues()[0]) <= 1e-8 * ges.eigenvalues()[0]);
    const Vector sx = s * e.eigenvector;
    CHECK((sx - e.eigenvalue * t * e.eigenvector).norm() <= 1e-8 * sx.norm());
  }

  SUBCASE("constraint subspace") {
    // Constrain x0 = x1 on diag(1, 5, 2, 7): on {x0 = x1} the pencil restricted
    // to span{(1,1,0,0)/sqrt2, e2, e3} has eigenvalues {3, 2, 7}.
    DenseMatrix s = DenseMatrix::Zero(4, 4);
    s.diagonal() << 1, 5, 2, 7;
    DenseMatrix c(1, 4);
    c << 1, -1, 0, 0;
    SparseMatrix t(4, 4);
    t.setIdentity();
    SparseMatrix cs = sparse(c);
    const EigenResult e = smallest_generalized_eigenvalue(sparse(s), t, &cs);
    CHECK(std::abs(e.eigenvalue - 2.0) < 1e-10);
    CHECK(std::abs((c * e.eigenvector)(0)) < 1e-12);
  }
}
