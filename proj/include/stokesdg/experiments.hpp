// ============================================================================
// experiments.hpp - Manufactured solutions, L-infinity(L2) errors and
//                   convergence studies
// ============================================================================
#pragma once

#include "stokesdg/stationary.hpp"
#include "stokesdg/timedg.hpp"

#include "json.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace stokesdg {

/// Closed-form solution of the transient Stokes problem on the unit square,
/// with u = curl psi (divergence free, zero trace) and f = u_t - Lap u + grad p.
struct ManufacturedSolution {
  std::string id;
  std::function<std::array<double, 2>(double t, double x, double y)> u;
  /// (du1/dx, du1/dy, du2/dx, du2/dy)
  std::function<std::array<double, 4>(double t, double x, double y)> grad_u;
  std::function<std::array<double, 2>(double t, double x, double y)> laplace_u;
  std::function<std::array<double, 2>(double t, double x, double y)> dt_u;
  std::function<double(double t, double x, double y)> p;
  std::function<std::array<double, 2>(double t, double x, double y)> grad_p;

  std::array<double, 2> f(double t, double x, double y) const;

  VectorField velocity_at(double t) const;
  VelocityField velocity_with_gradient_at(double t) const;
  ScalarField pressure_at(double t) const;
  VectorField forcing_at(double t) const;
};

/// "smooth": psi = sin^2(pi x) sin^2(pi y) (1 + t + sin 2 pi t) / pi,
///           p = sin(2 pi x) cos(2 pi y) (1 + sin 2 pi t)
/// "poly":   psi = x^2 (1-x)^2 y^2 (1-y)^2 (1 + t),  p = (x - 1/2)(1 + t)
ManufacturedSolution mms_catalog(const std::string& id);

/// Load (f(t), phi_i) of the manufactured forcing.
Forcing mms_forcing(const ManufacturedSolution& mms, const StokesSystem& sys);

/// Values of a reference field at the sampler points at time t.
using SampledField = std::function<std::vector<std::array<double, 2>>(double t)>;

SampledField sampled_velocity(const ManufacturedSolution& mms, const StokesSystem& sys);

/// Sample times of the L-infinity-in-time norm: 10 Gauss-Legendre nodes per
/// interval plus its right endpoint.
std::vector<double> linf_sample_times(const TimeGrid& grid);

struct ErrorSamples {
  std::vector<double> times;
  std::vector<double> errors;
  double max = 0.0;
};

/// ||u(t) - u_th(t)||_{L2} at every sample time (degree-6 quadrature).
ErrorSamples error_samples(const SpaceTimeSolution& sol, const SampledField& exact, const StokesSystem& sys);
double error_linf_l2(const SpaceTimeSolution& sol, const SampledField& exact, const StokesSystem& sys);
double error_linf_l2(const SpaceTimeSolution& sol, const ManufacturedSolution& exact, const StokesSystem& sys);

// ---------------------------------------------------------------------------
// Convergence studies
// ---------------------------------------------------------------------------

enum class StudyAxis { Space, Time, Ritz };

std::string to_string(StudyAxis axis);
/// "h" / "space", "tau" / "time", "ritz".
StudyAxis parse_study_axis(const std::string& s);

struct StudySpec {
  ElementPair element = ElementPair::TaylorHood;
  int w = 0;
  std::string mms = "smooth";
  double T = 1.0;
  std::vector<int> h_levels;
  std::vector<int> M_levels;
  double grading = 1.0;
  GridAssumptions assumptions;
  StudyAxis axis = StudyAxis::Time;
  std::string output_dir;
};

/// Parses a flat JSON study spec; unknown keys are rejected.
StudySpec parse_study_spec(const nlohmann::json& j);

struct ConvergenceRow {
  double resolution = 0.0; // h for space/ritz studies, tau for time studies
  int n = 0;
  int M = 0;
  double h = 0.0;
  double tau = 0.0;
  double error = 0.0;
  double pairwise_rate = 0.0; // NaN on the first row
};

struct ConvergenceReport {
  StudyAxis axis = StudyAxis::Time;
  std::vector<ConvergenceRow> rows;
  double fitted_rate = 0.0;
  bool complete = true;
  std::string failure; // message of the run that aborted the study
};

/// Least-squares slope of log(error) against log(resolution).
double fit_rate(const std::vector<double>& resolution, const std::vector<double>& error);

/// Runs the study. jobs > 1 runs resolutions concurrently; results are
/// assembled in input order.
ConvergenceReport convergence_study(const StudySpec& spec, int jobs = 1);

/// report.csv columns: axis,resolution,h,tau,error,pairwise_rate
std::string report_csv(const ConvergenceReport& r);
nlohmann::json report_json(const ConvergenceReport& r, const StudySpec& spec);

/// ||u(T) - R_h^S(u(T), p(T))||_{L2} on unit_square_mesh(n).
double ritz_error(const ManufacturedSolution& mms, double T, int n, ElementPair pair);

// ---------------------------------------------------------------------------
// Best approximation
// ---------------------------------------------------------------------------

struct BestApproxGap {
  double lhs = 0.0;                 // ||u - u_th||_{Linf(L2)}
  double rhs_projection_term = 0.0; // ||u - P_tau R_h^S(u, p)||_{Linf(L2)}
  double log_factor = 0.0;          // ln(T / tau)
  double ratio = 0.0;               // lhs / (log_factor * rhs)
};

/// P_tau R_h^S(u, p) as a space-time function.
SpaceTimeSolution projected_ritz(const ManufacturedSolution& exact, const StokesSystem& sys, const TimeGrid& grid,
                                 const TemporalBasis& basis);

BestApproxGap best_approx_gap(const SpaceTimeSolution& sol, const ManufacturedSolution& exact,
                              const StokesSystem& sys, const TimeGrid& grid, const TemporalBasis& basis);

/// Runs dg_solve for the manufactured solution (u0 = P_h i_h u(0)).
SpaceTimeSolution solve_mms(const ManufacturedSolution& mms, const StokesSystem& sys, const TimeGrid& grid,
                            const TemporalBasis& basis);

} // namespace stokesdg
