// ============================================================================
// diagnostics.hpp - Resolvent sector scans, smoothing profiles and discrete
//                   maximal regularity functionals (velocity and pressure)
// ============================================================================
#pragma once

#include "stokesdg/assembly.hpp"
#include "stokesdg/timedg.hpp"

#include <complex>
#include <string>
#include <vector>

namespace stokesdg {

// ---------------------------------------------------------------------------
// Resolvent
// ---------------------------------------------------------------------------

struct ResolventSolution {
  Vector u_re;
  Vector u_im;
  Vector p_re;
  Vector p_im;

  /// ||u||_{L2} of the complex velocity.
  double velocity_norm(const StokesSystem& sys) const;
};

/// Solves z (u, v) + (grad u, grad v) - (p, div v) + (div u, q) = (f, v)
/// for the load F_i = (f, phi_i), i.e. u = (z + A_h)^{-1} P_h f. Throws
/// NumericalFailure (with a condition estimate) when z is too close to -spec(A_h).
ResolventSolution resolvent_solve(std::complex<double> z, const Vector& load, const StokesSystem& sys);

struct ResolventProbe {
  double theta = 0.75 * M_PI; // sector half-angle in (pi/2, pi)
  double nu = 0.0;            // shift in [0, lambda_0]
  int angles = 9;             // ray angles 0 .. theta, each used with both signs
  int magnitudes = 16;        // log-spaced |z + nu|
  double r_min = 1e-2;
  double r_max = 1e6;

  /// Sample points z = -nu + r exp(+-i phi). Throws InvalidArgument on a bad probe.
  std::vector<std::complex<double>> points() const;
};

struct SectorSample {
  std::complex<double> z;
  double phi = 0.0;
  double radius = 0.0;
  double ratio = 0.0; // |z + nu| ||u_h|| / ||P_h f||
};

struct SectorScan {
  double theta = 0.0;
  double nu = 0.0;
  std::vector<SectorSample> samples;
  double max_ratio = 0.0;
  double bound = 0.0; // 1 / cos(theta / 2)
};

/// Evaluates the resolvent ratio at every probe point. Solver failures are
/// rethrown annotated with the offending z.
SectorScan sector_scan(const ResolventProbe& probe, const Vector& load, const StokesSystem& sys, int jobs = 1);

// ---------------------------------------------------------------------------
// Time norms
// ---------------------------------------------------------------------------

/// Space-time forcing as a vector field per time.
using ForcingField = std::function<VectorField(double t)>;

/// Load functional of a forcing field, usable by dg_solve.
Forcing forcing_load(const ForcingField& f, const StokesSystem& sys);

/// Parses "inf"/"infinity" or a number >= 1.
double parse_exponent(const std::string& s);
std::string exponent_string(double s);

/// Interval-wise L^s norms of a scalar function of (m, xi): 10-point
/// Gauss-Legendre for s < infinity; max over those nodes and both endpoints
/// for s = infinity.
std::vector<double> interval_ls_norms(const std::function<double(int m, double xi)>& g, const TimeGrid& grid,
                                      double s);

/// (sum_m v_m^s)^{1/s}, or max_m v_m for s = infinity.
double aggregate_ls(const std::vector<double>& per_interval, double s);

/// (sum_m tau_m v_m^s)^{1/s}, or max_m v_m for s = infinity.
double aggregate_weighted_ls(const std::vector<double>& v, const TimeGrid& grid, double s);

/// ||P_h f||_{L^s(I;L2)} with f nodally interpolated and Leray-projected at
/// each quadrature time.
double projected_forcing_norm(const ForcingField& f, const TimeGrid& grid, const StokesSystem& sys, double s);

/// ||f||_{L^s(I;L2)} with the spatial norm by degree-6 quadrature.
double forcing_norm(const ForcingField& f, const TimeGrid& grid, const StokesSystem& sys, double s);

// ---------------------------------------------------------------------------
// Regularity functionals
// ---------------------------------------------------------------------------

struct RegularityFunctionals {
  double s = 0.0;

  // per interval m = 1..M
  std::vector<double> dt_u;    // ||d_t u||_{L^s(I_m;L2)}
  std::vector<double> a_h_u;   // ||A_h u||_{L^s(I_m;L2)}
  std::vector<double> delta_h_u; // ||Delta_h u||_{L^s(I_m;L2)}
  std::vector<double> grad_p;  // ||grad p||_{L^s(I_m;L2)}
  std::vector<double> jump;    // tau_m^{-1} ||[u]_{m-1}||_{L2}

  double dt_u_total = 0.0;     // (sum_m ||d_t u||^s_{L^s(I_m)})^{1/s}
  double a_h_u_total = 0.0;    // ||A_h u||_{L^s(I;L2)}
  double delta_h_u_total = 0.0;
  double grad_p_total = 0.0;
  double jump_total = 0.0;     // (sum_m tau_m ||tau_m^{-1}[u]_{m-1}||^s)^{1/s}
  double lhs = 0.0;            // dt_u_total + a_h_u_total + jump_total

  double projected_forcing = 0.0; // ||P_h f||_{L^s(I;L2)}
  double forcing = 0.0;           // ||f||_{L^s(I;L2)}
  double log_factor = 0.0;        // ln(T / tau), tau = max tau_m
  double ratio = 0.0;             // lhs / ||P_h f||
  double log_ratio = 0.0;         // lhs / (ln(T/tau) ||P_h f||)

  bool zero_initial = true; // hypothesis u_0 = 0 of the maximal regularity bounds
  bool zero_forcing = true;
};

/// Left-hand sides of the discrete maximal regularity estimates for a solved
/// trajectory driven by f. Ratios are computed whether or not the hypotheses
/// hold; zero_initial flags the u_0 = 0 requirement.
RegularityFunctionals max_reg_functionals(const SpaceTimeSolution& sol, const ForcingField& f, double s,
                                          const StokesSystem& sys);

struct PressureRegularity {
  double s = 0.0;
  std::vector<double> per_interval; // ||grad p||_{L^s(I_m;L2)}
  double grad_p = 0.0;              // ||grad p||_{L^s(I;L2)}
  double forcing = 0.0;             // ||f||_{L^s(I;L2)}
  double log_factor = 0.0;
  double log_ratio = 0.0;           // grad_p / (ln(T/tau) ||f||)
  bool zero_initial = true;
};

PressureRegularity pressure_regularity(const SpaceTimeSolution& sol, const ForcingField& f, double s,
                                       const StokesSystem& sys);

struct SmoothingProfile {
  std::vector<double> t;      // t_m
  std::vector<double> values; // t_m (||d_t u||_inf + ||A_h u||_inf + tau_m^{-1}||[u]_{m-1}||) / ||P_h u_0||
  double max = 0.0;
  double initial_norm = 0.0;  // ||P_h u_0||
};

/// Profile of an f = 0 trajectory.
SmoothingProfile smoothing_profile(const SpaceTimeSolution& sol, const StokesSystem& sys);
/// Runs the f = 0 problem from u0 (coefficients in V_h) and profiles it.
SmoothingProfile smoothing_profile(const Vector& u0, const TimeGrid& grid, const StokesSystem& sys,
                                   const TemporalBasis& basis);
/// u0 as a function: P_h of its nodal interpolant.
SmoothingProfile smoothing_profile(const VectorField& u0, const TimeGrid& grid, const StokesSystem& sys,
                                   const TemporalBasis& basis);

} // namespace stokesdg
