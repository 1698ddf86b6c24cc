// ============================================================================
// diagnostics.cpp - Resolvent scans and regularity functionals
// ============================================================================
#include "stokesdg/diagnostics.hpp"

#include "stokesdg/errors.hpp"
#include "stokesdg/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

namespace stokesdg {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_exponent(double s, const char* op) {
  if (!(s >= 1.0)) throw InvalidArgument("diagnostics", op, "exponent s must be >= 1, got " + format_double(s));
}

// Velocity mass block embedded in the augmented saddle size.
SparseMatrix augmented_mass(const StokesSystem& sys) {
  const SparseMatrix& m = sys.matrices().M;
  const Index n = sys.nu() + sys.np() + 1;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index r = 0; r < m.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
  SparseMatrix out(n, n);
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

std::string complex_string(std::complex<double> z) {
  return format_double(z.real()) + (z.imag() < 0 ? " - " : " + ") + format_double(std::abs(z.imag())) + "i";
}

// Per-mode images of a linear spatial operator; values at (m, xi) are
// recombined with the temporal basis.
struct ModeImages {
  std::vector<std::vector<Vector>> modes;

  Vector at(const TemporalBasis& basis, int m, double xi) const {
    const auto& v = modes[m - 1];
    Vector out = basis.value(0, xi) * v[0];
    for (int j = 1; j < basis.size(); ++j) out += basis.value(j, xi) * v[j];
    return out;
  }
};

ModeImages map_modes(const std::vector<std::vector<Vector>>& modes, const std::function<Vector(const Vector&)>& op) {
  ModeImages out;
  out.modes.reserve(modes.size());
  for (const auto& interval : modes) {
    std::vector<Vector> v;
    v.reserve(interval.size());
    for (const auto& mode : interval) v.push_back(op(mode));
    out.modes.push_back(std::move(v));
  }
  return out;
}

// Values of t -> g(t) at the norm quadrature times of one interval.
double interval_norm(const std::function<double(double xi)>& g, double tau, double s) {
  static const GaussRule rule = gauss_legendre(10);
  if (std::isinf(s)) {
    double mx = std::max(g(0.0), g(1.0));
    for (double xi : rule.nodes) mx = std::max(mx, g(xi));
    return mx;
  }
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) acc += rule.weights[q] * std::pow(g(rule.nodes[q]), s);
  return std::pow(tau * acc, 1.0 / s);
}

} // namespace

// ---------------------------------------------------------------------------
// Resolvent
// ---------------------------------------------------------------------------

double ResolventSolution::velocity_norm(const StokesSystem& sys) const {
  return std::sqrt(std::max(0.0, sys.l2_inner(u_re, u_re) + sys.l2_inner(u_im, u_im)));
}

ResolventSolution resolvent_solve(std::complex<double> z, const Vector& load, const StokesSystem& sys) {
  if (load.size() != sys.nu()) throw InvalidArgument("diagnostics", "resolvent_solve", "load size mismatch");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidArgument("diagnostics", "resolvent_solve", "z must be finite");
  const auto& mats = sys.matrices();
  const Index nu = sys.nu(), np = sys.np();
  const SparseMatrix k = saddle_matrix(mats.K, mats.B, mats.mp);
  const SparseMatrix m = augmented_mass(sys);
  Vector rhs = Vector::Zero(nu + np + 1);
  rhs.head(nu) = load;
  ComplexSolution x;
  try {
    x = solve_complex_shifted(z.real(), z.imag(), m, k, rhs);
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("diagnostics", "resolvent_solve", "z = " + complex_string(z) + ": " + e.what());
  }
  ResolventSolution r{x.re.head(nu), x.im.head(nu), x.re.segment(nu, np), x.im.segment(nu, np)};
  const double div = std::hypot((mats.B * r.u_re).norm(), (mats.B * r.u_im).norm());
  const double scale = std::max(1.0, std::hypot(r.u_re.norm(), r.u_im.norm()));
  if (!(div <= 1e-8 * scale))
    throw NumericalFailure("diagnostics", "resolvent_solve",
                           "z = " + complex_string(z) + ": velocity not divergence free, ||B u|| = " + format_double(div));
  return r;
}

std::vector<std::complex<double>> ResolventProbe::points() const {
  if (!(theta > M_PI / 2 && theta < M_PI))
    throw InvalidArgument("diagnostics", "sector_scan", "theta must lie in (pi/2, pi)");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("diagnostics", "sector_scan", "nu must be >= 0");
  if (angles < 2 || magnitudes < 2) throw InvalidArgument("diagnostics", "sector_scan", "need >= 2 angles and magnitudes");
  if (!(r_min > 0.0 && r_max > r_min)) throw InvalidArgument("diagnostics", "sector_scan", "need 0 < r_min < r_max");
  std::vector<std::complex<double>> out;
  for (int a = 0; a < angles; ++a) {
    const double phi = theta * a / (angles - 1);
    for (int k = 0; k < magnitudes; ++k) {
      const double r = r_min * std::pow(r_max / r_min, static_cast<double>(k) / (magnitudes - 1));
      out.push_back(-nu + std::polar(r, phi));
      if (a > 0) out.push_back(-nu + std::polar(r, -phi));
    }
  }
  return out;
}

SectorScan sector_scan(const ResolventProbe& probe, const Vector& load, const StokesSystem& sys, int jobs) {
  const std::vector<std::complex<double>> zs = probe.points();
  const double f_norm = sys.l2_norm(leray_project_load(load, sys));
  if (!(f_norm > 0.0)) throw InvalidArgument("diagnostics", "sector_scan", "P_h f vanishes");

  SectorScan scan;
  scan.theta = probe.theta;
  scan.nu = probe.nu;
  scan.bound = 1.0 / std::cos(probe.theta / 2);
  scan.samples.resize(zs.size());
  std::vector<std::string> failures(zs.size());

  const auto run = [&](std::size_t i) {
    SectorSample& smp = scan.samples[i];
    smp.z = zs[i];
    const std::complex<double> shifted = zs[i] + probe.nu;
    smp.radius = std::abs(shifted);
    smp.phi = std::arg(shifted);
    try {
      smp.ratio = smp.radius * resolvent_solve(zs[i], load, sys).velocity_norm(sys) / f_norm;
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(zs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < zs.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < zs.size(); i = next++) run(i);
      });
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (!failures[i].empty())
      throw NumericalFailure("diagnostics", "sector_scan", "sample z = " + complex_string(zs[i]) + ": " + failures[i]);
    scan.max_ratio = std::max(scan.max_ratio, scan.samples[i].ratio);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Time norms
// ---------------------------------------------------------------------------

Forcing forcing_load(const ForcingField& f, const StokesSystem& sys) {
  return {[f, &sys](double t) { return sys.load(f(t)); }};
}

double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "Inf") return inf;
  double v = 0.0;
  std::size_t used = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw InvalidArgument("diagnostics", "parse_exponent", "bad exponent '" + s + "'");
  check_exponent(v, "parse_exponent");
  return v;
}

std::string exponent_string(double s) { return std::isinf(s) ? "inf" : format_double(s); }

std::vector<double> interval_ls_norms(const std::function<double(int m, double xi)>& g, const TimeGrid& grid,
                                      double s) {
  check_exponent(s, "interval_ls_norms");
  std::vector<double> out(grid.intervals());
  for (int m = 1; m <= grid.intervals(); ++m)
    out[m - 1] = interval_norm([&](double xi) { return g(m, xi); }, grid.tau(m), s);
  return out;
}

double aggregate_ls(const std::vector<double>& v, double s) {
  check_exponent(s, "aggregate_ls");
  if (std::isinf(s)) return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (double x : v) acc += std::pow(x, s);
  return std::pow(acc, 1.0 / s);
}

double aggregate_weighted_ls(const std::vector<double>& v, const TimeGrid& grid, double s) {
  check_exponent(s, "aggregate_weighted_ls");
  if (static_cast<int>(v.size()) != grid.intervals())
    throw InvalidArgument("diagnostics", "aggregate_weighted_ls", "one value per interval required");
  if (std::isinf(s)) return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  double acc = 0.0;
  for (int m = 1; m <= grid.intervals(); ++m) acc += grid.tau(m) * std::pow(v[m - 1], s);
  return std::pow(acc, 1.0 / s);
}

double projected_forcing_norm(const ForcingField& f, const TimeGrid& grid, const StokesSystem& sys, double s) {
  const auto g = [&](int m, double xi) {
    const double t = grid.start(m) + grid.tau(m) * xi;
    return sys.l2_norm(initial_datum(f(t), sys));
  };
  return aggregate_ls(interval_ls_norms(g, grid, s), s);
}

double forcing_norm(const ForcingField& f, const TimeGrid& grid, const StokesSystem& sys, double s) {
  const auto g = [&](int m, double xi) {
    const double t = grid.start(m) + grid.tau(m) * xi;
    return sys.sampler().l2_norm(sys.sampler().sample(f(t)));
  };
  return aggregate_ls(interval_ls_norms(g, grid, s), s);
}

// ---------------------------------------------------------------------------
// Regularity functionals
// ---------------------------------------------------------------------------

RegularityFunctionals max_reg_functionals(const SpaceTimeSolution& sol, const ForcingField& f, double s,
                                          const StokesSystem& sys) {
  check_exponent(s, "max_reg_functionals");
  const TimeGrid& grid = sol.grid;
  const TemporalBasis basis(sol.degree);
  RegularityFunctionals r;
  r.s = s;

  const ModeImages ah = map_modes(sol.u, [&](const Vector& v) { return apply_stokes_operator(v, sys); });
  const ModeImages dh = map_modes(sol.u, [&](const Vector& v) { return apply_discrete_laplacian(v, sys); });

  r.dt_u = interval_ls_norms(
      [&](int m, double xi) { return sys.l2_norm(velocity_time_derivative(sol, m, xi)); }, grid, s);
  r.a_h_u = interval_ls_norms([&](int m, double xi) { return sys.l2_norm(ah.at(basis, m, xi)); }, grid, s);
  r.delta_h_u = interval_ls_norms([&](int m, double xi) { return sys.l2_norm(dh.at(basis, m, xi)); }, grid, s);
  r.grad_p = interval_ls_norms(
      [&](int m, double xi) { return sys.pressure_gradient_norm(evaluate_local(sol, m, xi).p); }, grid, s);
  const std::vector<Vector> jmp = jumps(sol);
  r.jump.resize(jmp.size());
  for (int m = 1; m <= grid.intervals(); ++m) r.jump[m - 1] = sys.l2_norm(jmp[m - 1]) / grid.tau(m);

  r.dt_u_total = aggregate_ls(r.dt_u, s);
  r.a_h_u_total = aggregate_ls(r.a_h_u, s);
  r.delta_h_u_total = aggregate_ls(r.delta_h_u, s);
  r.grad_p_total = aggregate_ls(r.grad_p, s);
  r.jump_total = aggregate_weighted_ls(r.jump, grid, s);
  r.lhs = r.dt_u_total + r.a_h_u_total + r.jump_total;

  r.projected_forcing = projected_forcing_norm(f, grid, sys, s);
  r.forcing = forcing_norm(f, grid, sys, s);
  r.log_factor = std::log(grid.final_time() / grid.tau_max());
  r.ratio = r.projected_forcing > 0.0 ? r.lhs / r.projected_forcing : inf;
  r.log_ratio = r.projected_forcing > 0.0 && r.log_factor > 0.0 ? r.lhs / (r.log_factor * r.projected_forcing) : inf;
  r.zero_initial = sol.initial.size() == 0 || sol.initial.isZero(0.0);
  r.zero_forcing = r.forcing == 0.0;
  return r;
}

PressureRegularity pressure_regularity(const SpaceTimeSolution& sol, const ForcingField& f, double s,
                                       const StokesSystem& sys) {
  check_exponent(s, "pressure_regularity");
  const TimeGrid& grid = sol.grid;
  PressureRegularity r;
  r.s = s;
  r.per_interval = interval_ls_norms(
      [&](int m, double xi) { return sys.pressure_gradient_norm(evaluate_local(sol, m, xi).p); }, grid, s);
  r.grad_p = aggregate_ls(r.per_interval, s);
  r.forcing = forcing_norm(f, grid, sys, s);
  r.log_factor = std::log(grid.final_time() / grid.tau_max());
  if (r.grad_p == 0.0)
    r.log_ratio = 0.0;
  else
    r.log_ratio = r.forcing > 0.0 && r.log_factor > 0.0 ? r.grad_p / (r.log_factor * r.forcing) : inf;
  r.zero_initial = sol.initial.size() == 0 || sol.initial.isZero(0.0);
  return r;
}

SmoothingProfile smoothing_profile(const SpaceTimeSolution& sol, const StokesSystem& sys) {
  const TimeGrid& grid = sol.grid;
  const TemporalBasis basis(sol.degree);
  SmoothingProfile out;
  out.initial_norm = sys.l2_norm(sol.initial);
  out.t.assign(grid.nodes().begin() + 1, grid.nodes().end());
  out.values.assign(grid.intervals(), 0.0);
  if (out.initial_norm == 0.0) return out;

  const ModeImages ah = map_modes(sol.u, [&](const Vector& v) { return apply_stokes_operator(v, sys); });
  const auto dt = interval_ls_norms(
      [&](int m, double xi) { return sys.l2_norm(velocity_time_derivative(sol, m, xi)); }, grid, inf);
  const auto a = interval_ls_norms([&](int m, double xi) { return sys.l2_norm(ah.at(basis, m, xi)); }, grid, inf);
  const std::vector<Vector> jmp = jumps(sol);
  for (int m = 1; m <= grid.intervals(); ++m) {
    const double j = sys.l2_norm(jmp[m - 1]) / grid.tau(m);
    out.values[m - 1] = grid.end(m) * (dt[m - 1] + a[m - 1] + j) / out.initial_norm;
    out.max = std::max(out.max, out.values[m - 1]);
  }
  return out;
}

SmoothingProfile smoothing_profile(const Vector& u0, const TimeGrid& grid, const StokesSystem& sys,
                                   const TemporalBasis& basis) {
  if (u0.size() != sys.nu()) throw InvalidArgument("diagnostics", "smoothing_profile", "u0 size mismatch");
  return smoothing_profile(dg_solve(Forcing{}, u0, grid, sys, basis), sys);
}

SmoothingProfile smoothing_profile(const VectorField& u0, const TimeGrid& grid, const StokesSystem& sys,
                                   const TemporalBasis& basis) {
  return smoothing_profile(initial_datum(u0, sys), grid, sys, basis);
}

} // namespace stokesdg
