// ============================================================================
// timedg.hpp - Time grids, dG(w) temporal bases and the fully discrete solver
//
// On every interval I_m = (t_{m-1}, t_m] a discrete function is
//   u(t) = sum_j u^{m,j} phi_j((t - t_{m-1}) / tau_m),   phi_j(xi) = P_j(2 xi - 1)
// with P_j the Legendre polynomials. Intervals are right-closed: at a node t_m
// the value of interval m (the left limit u_m^-) is returned.
//
// Local system on I_m (rows: test mode i; Gamma, Theta the temporal matrices):
//   sum_j (Gamma_ij M + tau_m Theta_ij K) u^j - tau_m Theta_ii B^T p^i
//       = int_{I_m} (f, phi_i v) + phi_i(0) M u_{m-1}^-
//   -tau_m Theta_ii B u^i = 0,   mean(p^i) = 0
// ============================================================================
#pragma once

#include "stokesdg/assembly.hpp"
#include "stokesdg/types.hpp"

#include "json.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace stokesdg {

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [0, 1]
// ---------------------------------------------------------------------------

struct GaussRule {
  std::vector<double> nodes;   // in (0, 1), increasing
  std::vector<double> weights; // sum to 1
};

/// n-point rule, exact for polynomials of degree 2n - 1.
GaussRule gauss_legendre(int n);

// ---------------------------------------------------------------------------
// Time grid
// ---------------------------------------------------------------------------

/// Constants of the three grid assumptions:
///   1. tau_min >= c * tau^grading_beta
///   2. 1/kappa <= tau_m / tau_{m+1} <= kappa
///   3. tau <= T / 4
struct GridAssumptions {
  double kappa = 4.0;
  double c = 1.0;
  double grading_beta = 1.0;
};

class TimeGrid {
public:
  /// Validates strict monotonicity only; see make_time_grid for the
  /// assumption checks.
  explicit TimeGrid(std::vector<double> nodes);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  int intervals() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  double final_time() const noexcept { return nodes_.back(); }
  /// Start, end and length of interval m (1-based).
  double start(int m) const { return nodes_[m - 1]; }
  double end(int m) const { return nodes_[m]; }
  double tau(int m) const { return nodes_[m] - nodes_[m - 1]; }
  double tau_max() const noexcept { return tau_max_; }
  double tau_min() const noexcept { return tau_min_; }
  /// Largest of tau_m/tau_{m+1} and tau_{m+1}/tau_m (1 for a single interval).
  double max_adjacent_ratio() const noexcept { return max_ratio_; }

  /// Interval m with t in (t_{m-1}, t_m]; throws InvalidArgument outside (0, T].
  int locate(double t) const;

private:
  std::vector<double> nodes_;
  double tau_max_ = 0.0;
  double tau_min_ = 0.0;
  double max_ratio_ = 1.0;
};

/// Checks the three assumptions in order and throws GridAssumptionError for
/// the first one violated.
void check_grid_assumptions(const TimeGrid& grid, const GridAssumptions& a = {});

/// Nodes t_m = T (m/M)^grading, m = 0..M, checked against the assumptions.
TimeGrid make_time_grid(double T, int M, double grading = 1.0, const GridAssumptions& a = {});

// ---------------------------------------------------------------------------
// Temporal basis
// ---------------------------------------------------------------------------

class TemporalBasis {
public:
  /// degree must be 0 or 1.
  explicit TemporalBasis(int degree);

  int degree() const noexcept { return degree_; }
  int size() const noexcept { return degree_ + 1; }

  double value(int j, double xi) const;
  /// d/dxi phi_j(xi).
  double derivative(int j, double xi) const;

  /// Gamma_ij = int_0^1 phi_j' phi_i + phi_j(0) phi_i(0).
  const DenseMatrix& gamma() const noexcept { return gamma_; }
  /// Theta_ij = int_0^1 phi_j phi_i = delta_ij / (2j + 1).
  const DenseMatrix& theta() const noexcept { return theta_; }
  const Vector& left_trace() const noexcept { return left_; }
  const Vector& right_trace() const noexcept { return right_; }

private:
  int degree_;
  DenseMatrix gamma_;
  DenseMatrix theta_;
  Vector left_;
  Vector right_;
};

// ---------------------------------------------------------------------------
// Space-time functions
// ---------------------------------------------------------------------------

/// Piecewise polynomial (in time) velocity/pressure pair. u[m-1][j] holds the
/// velocity mode j on interval m; p likewise. initial is P_h u_0 (the value
/// u_0^- used by the first jump).
struct SpaceTimeSolution {
  TimeGrid grid{std::vector<double>{0.0, 1.0}};
  int degree = 0;
  std::vector<std::vector<Vector>> u;
  std::vector<std::vector<Vector>> p;
  Vector initial;

  int intervals() const noexcept { return grid.intervals(); }
};

/// Zero velocity and pressure modes on the given grid.
SpaceTimeSolution zero_space_time(const TimeGrid& grid, int degree, Index nu, Index np);

struct Snapshot {
  Vector u;
  Vector p;
};

/// Value at t in (0, T] (right-closed intervals).
Snapshot evaluate(const SpaceTimeSolution& sol, double t);
/// Value on interval m at local coordinate xi in [0, 1].
Snapshot evaluate_local(const SpaceTimeSolution& sol, int m, double xi);
/// Time derivative of the velocity on interval m at xi.
Vector velocity_time_derivative(const SpaceTimeSolution& sol, int m, double xi);

/// u_{m-1}^+ and u_{m-1}^- for m = 1..M (u_0^- = initial).
Vector right_limit(const SpaceTimeSolution& sol, int node);
Vector left_limit(const SpaceTimeSolution& sol, int node);

/// Jumps [u]_{m-1} = u_{m-1}^+ - u_{m-1}^-, m = 1..M, with [u]_0 = u_0^+ - P_h u_0.
std::vector<Vector> jumps(const SpaceTimeSolution& sol);

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

/// Space-time load: load(t)_i = (f(t), phi_i).
struct Forcing {
  std::function<Vector(double)> load;

  bool is_zero() const { return !load; }
};

struct DgOptions {
  /// Replace f by P_h f (the velocity is unchanged, the pressure is not).
  bool project_load = false;
  /// Number of distinct step sizes whose factorization is kept.
  std::size_t cache_size = 4;
};

/// P_h of the nodal interpolant of u0.
Vector initial_datum(const VectorField& u0, const StokesSystem& sys);

/// Fully discrete dG(w) solve. initial must be P_h u_0 (coefficients in V_h);
/// its size must match the system.
SpaceTimeSolution dg_solve(const Forcing& f, const Vector& initial, const TimeGrid& grid,
                           const StokesSystem& sys, const TemporalBasis& basis, const DgOptions& options = {});

/// Time-integrated load of interval m tested with each temporal mode:
/// entry i is int_{I_m} f phi_i dt, by Gauss-Legendre with w + 3 points.
std::vector<Vector> interval_loads(const Forcing& f, const TimeGrid& grid, int m, const TemporalBasis& basis,
                                   const StokesSystem& sys, bool project_load);

/// Residual of the space-time equations against every discrete test function
/// (v, q), computed by time quadrature of the evaluated solution. Returns
/// ||r|| / max(||rhs||, ||u||-based scale).
double galerkin_residual(const SpaceTimeSolution& sol, const Forcing& f, const Vector& u0_load,
                         const StokesSystem& sys, const TemporalBasis& basis);

/// B((u, p), (v, q)) by the sum-of-intervals (primal) expression.
double bilinear_form_primal(const SpaceTimeSolution& a, const SpaceTimeSolution& b, const StokesSystem& sys,
                            const TemporalBasis& basis);
/// B((u, p), (v, q)) by the integrated-by-parts (dual) expression.
double bilinear_form_dual(const SpaceTimeSolution& a, const SpaceTimeSolution& b, const StokesSystem& sys,
                          const TemporalBasis& basis);

/// L2-in-time projection of a coefficient trajectory: mode j of interval m is
/// (2j+1) int_0^1 g(t(xi)) phi_j(xi) dxi, by Gauss-Legendre with w + 2 points.
/// Only the velocity slots are filled; pressure modes are empty.
SpaceTimeSolution temporal_project(const std::function<Vector(double)>& g, const TimeGrid& grid,
                                   const TemporalBasis& basis);

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// "dof_index,value" lines, 17 significant digits.
void write_snapshot_csv(std::ostream& out, const Vector& values);

/// Per-interval norms: velocity L2 at both traces, jump L2, pressure L2 and
/// pressure gradient at the right end.
nlohmann::json trajectory_summary(const SpaceTimeSolution& sol, const StokesSystem& sys);

} // namespace stokesdg
