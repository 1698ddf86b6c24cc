// ============================================================================
// types.hpp - Common numeric aliases and field callables
// ============================================================================
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <functional>

namespace stokesdg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

/// Compressed sparse row storage. Column indices are sorted within each row
/// once the matrix is compressed.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using ScalarField = std::function<double(double x, double y)>;
using VectorField = std::function<std::array<double, 2>(double x, double y)>;

/// Jacobian entries ordered (du1/dx, du1/dy, du2/dx, du2/dy).
using JacobianField = std::function<std::array<double, 4>(double x, double y)>;

/// A velocity field together with its Jacobian, as needed by the Stokes
/// Ritz projection (the load involves grad w).
struct VelocityField {
  VectorField value;
  JacobianField jacobian;
};

} // namespace stokesdg
