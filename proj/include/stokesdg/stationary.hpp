// ============================================================================
// stationary.hpp - Stationary Stokes solves, Stokes Ritz projection,
//                  pressure recovery and inf-sup estimators
// ============================================================================
#pragma once

#include "stokesdg/assembly.hpp"
#include "stokesdg/spaces.hpp"

namespace stokesdg {

/// Discrete velocity/pressure pair; the pressure has discrete mean zero.
struct StokesSolution {
  Vector u;
  Vector p;
  double multiplier = 0.0; // mean-value Lagrange multiplier, ~0 for consistent data
};

/// (grad u, grad v) - (p, div v) + (div u, q) = (f, v) for the load F = (f, phi_i).
StokesSolution solve_stationary(const Vector& load, const StokesSystem& sys);

/// Stokes Ritz projection of a continuous pair (w, phi):
///   (grad(w - R), grad v) - (phi - R^p, div v) = 0   for all v in X_h
///   (div(w - R), q)                            = 0   for all q in M_h
/// Loads are integrated with the degree-6 rule.
StokesSolution ritz_projection(const VelocityField& w, const ScalarField& phi, const StokesSystem& sys);

/// Ritz projection of a discrete pair given by coefficients.
StokesSolution ritz_projection(const Vector& w, const Vector& phi, const StokesSystem& sys);

/// Ritz projection from precomputed data F_i = (grad w, grad phi_i) - (phi, div phi_i)
/// and g_i = (div w, l_i).
StokesSolution ritz_projection_from_data(const Vector& f, const Vector& g, const StokesSystem& sys);

/// Assembles the Ritz data (F, g) of a continuous pair.
std::pair<Vector, Vector> ritz_data(const VelocityField& w, const ScalarField& phi, const StokesSystem& sys);

/// p_h in M_h with (w, v) = (p_h, div v) for all v in X_h, for w in V_h^perp.
/// Throws InvalidArgument if ||P_h w|| > 1e-8 ||w||.
Vector recover_pressure(const Vector& w, const StokesSystem& sys);

/// Inf-sup constant beta: sqrt of the smallest eigenvalue of
/// B K^{-1} B^T q = lambda Mp q on zero-mean pressures.
double infsup_constant(const StokesSystem& sys);
EigenResult infsup_eigenpair(const StokesSystem& sys);

/// Pressure-gradient constant: sqrt of the smallest eigenvalue of
/// G^T M^{-1} G l = lambda Kp l on zero-mean pressures.
double pressure_gradient_infsup(const StokesSystem& sys);
EigenResult pressure_gradient_eigenpair(const StokesSystem& sys);

struct InfSupReport {
  ElementPair pair = ElementPair::TaylorHood;
  int level = 0;
  double h = 0.0;
  double infsup_beta = 0.0;
  double c_pg = 0.0;
};

InfSupReport infsup_report(const StokesSystem& sys, int level);

} // namespace stokesdg
