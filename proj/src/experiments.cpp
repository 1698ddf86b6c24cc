// ============================================================================
// experiments.cpp - Manufactured solutions and convergence studies
// ============================================================================
#include "stokesdg/experiments.hpp"

#include "stokesdg/errors.hpp"
#include "stokesdg/io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace stokesdg {

namespace {

using A2 = std::array<double, 2>;
using A4 = std::array<double, 4>;

constexpr double pi = M_PI;

ManufacturedSolution smooth_solution() {
  // psi = S(x) S(y) g(t) / pi with S = sin^2(pi .), S' = pi sin(2 pi .)
  const auto g = [](double t) { return 1.0 + t + std::sin(2 * pi * t); };
  const auto dg = [](double t) { return 1.0 + 2 * pi * std::cos(2 * pi * t); };
  const auto S = [](double x) { return std::sin(pi * x) * std::sin(pi * x); };
  ManufacturedSolution m;
  m.id = "smooth";
  m.u = [=](double t, double x, double y) -> A2 {
    return {S(x) * std::sin(2 * pi * y) * g(t), -std::sin(2 * pi * x) * S(y) * g(t)};
  };
  m.dt_u = [=](double t, double x, double y) -> A2 {
    return {S(x) * std::sin(2 * pi * y) * dg(t), -std::sin(2 * pi * x) * S(y) * dg(t)};
  };
  m.grad_u = [=](double t, double x, double y) -> A4 {
    const double sx = std::sin(2 * pi * x), sy = std::sin(2 * pi * y);
    return {pi * sx * sy * g(t), 2 * pi * S(x) * std::cos(2 * pi * y) * g(t),
            -2 * pi * std::cos(2 * pi * x) * S(y) * g(t), -pi * sx * sy * g(t)};
  };
  m.laplace_u = [=](double t, double x, double y) -> A2 {
    const double c = 2 * pi * pi * g(t);
    return {c * std::sin(2 * pi * y) * (2 * std::cos(2 * pi * x) - 1),
            -c * std::sin(2 * pi * x) * (2 * std::cos(2 * pi * y) - 1)};
  };
  m.p = [](double t, double x, double y) {
    return std::sin(2 * pi * x) * std::cos(2 * pi * y) * (1 + std::sin(2 * pi * t));
  };
  m.grad_p = [](double t, double x, double y) -> A2 {
    const double a = 2 * pi * (1 + std::sin(2 * pi * t));
    return {a * std::cos(2 * pi * x) * std::cos(2 * pi * y), -a * std::sin(2 * pi * x) * std::sin(2 * pi * y)};
  };
  return m;
}

ManufacturedSolution poly_solution() {
  // psi = a(x) a(y) (1 + t), a(x) = x^2 (1 - x)^2
  const auto a = [](double x) { return x * x * (1 - x) * (1 - x); };
  const auto a1 = [](double x) { return 2 * x * (1 - x) * (1 - 2 * x); };
  const auto a2 = [](double x) { return 2 * (1 - 6 * x + 6 * x * x); };
  const auto a3 = [](double x) { return 12 * (2 * x - 1); };
  ManufacturedSolution m;
  m.id = "poly";
  m.u = [=](double t, double x, double y) -> A2 { return {a(x) * a1(y) * (1 + t), -a1(x) * a(y) * (1 + t)}; };
  m.dt_u = [=](double, double x, double y) -> A2 { return {a(x) * a1(y), -a1(x) * a(y)}; };
  m.grad_u = [=](double t, double x, double y) -> A4 {
    const double s = 1 + t;
    return {a1(x) * a1(y) * s, a(x) * a2(y) * s, -a2(x) * a(y) * s, -a1(x) * a1(y) * s};
  };
  m.laplace_u = [=](double t, double x, double y) -> A2 {
    const double s = 1 + t;
    return {(a2(x) * a1(y) + a(x) * a3(y)) * s, -(a3(x) * a(y) + a1(x) * a2(y)) * s};
  };
  m.p = [](double t, double x, double) { return (x - 0.5) * (1 + t); };
  m.grad_p = [](double t, double, double) -> A2 { return {1 + t, 0.0}; };
  return m;
}

} // namespace

std::array<double, 2> ManufacturedSolution::f(double t, double x, double y) const {
  const A2 d = dt_u(t, x, y), l = laplace_u(t, x, y), g = grad_p(t, x, y);
  return {d[0] - l[0] + g[0], d[1] - l[1] + g[1]};
}

VectorField ManufacturedSolution::velocity_at(double t) const {
  return [u = u, t](double x, double y) { return u(t, x, y); };
}

VelocityField ManufacturedSolution::velocity_with_gradient_at(double t) const {
  return {velocity_at(t), [g = grad_u, t](double x, double y) { return g(t, x, y); }};
}

ScalarField ManufacturedSolution::pressure_at(double t) const {
  return [p = p, t](double x, double y) { return p(t, x, y); };
}

VectorField ManufacturedSolution::forcing_at(double t) const {
  return [self = *this, t](double x, double y) { return self.f(t, x, y); };
}

ManufacturedSolution mms_catalog(const std::string& id) {
  if (id == "smooth") return smooth_solution();
  if (id == "poly") return poly_solution();
  throw InvalidArgument("experiments", "mms_catalog", "unknown manufactured solution '" + id + "'");
}

Forcing mms_forcing(const ManufacturedSolution& mms, const StokesSystem& sys) {
  return {[mms, &sys](double t) { return sys.load(mms.forcing_at(t)); }};
}

SampledField sampled_velocity(const ManufacturedSolution& mms, const StokesSystem& sys) {
  return [mms, &sys](double t) { return sys.sampler().sample(mms.velocity_at(t)); };
}

std::vector<double> linf_sample_times(const TimeGrid& grid) {
  static const GaussRule g = gauss_legendre(10);
  std::vector<double> out;
  out.reserve(11 * grid.intervals());
  for (int m = 1; m <= grid.intervals(); ++m) {
    for (double xi : g.nodes) out.push_back(grid.start(m) + grid.tau(m) * xi);
    out.push_back(grid.end(m));
  }
  return out;
}

ErrorSamples error_samples(const SpaceTimeSolution& sol, const SampledField& exact, const StokesSystem& sys) {
  ErrorSamples e;
  e.times = linf_sample_times(sol.grid);
  e.errors.reserve(e.times.size());
  static const GaussRule g = gauss_legendre(10);
  std::size_t k = 0;
  for (int m = 1; m <= sol.intervals(); ++m) {
    // evaluate on the interval by local coordinate so that the right endpoint
    // belongs to interval m regardless of rounding in t
    for (int q = 0; q <= 10; ++q, ++k) {
      const double xi = q < 10 ? g.nodes[q] : 1.0;
      const Vector uh = evaluate_local(sol, m, xi).u;
      const double err = sys.sampler().velocity_l2_distance(uh, exact(e.times[k]));
      e.errors.push_back(err);
      e.max = std::max(e.max, err);
    }
  }
  return e;
}

double error_linf_l2(const SpaceTimeSolution& sol, const SampledField& exact, const StokesSystem& sys) {
  return error_samples(sol, exact, sys).max;
}

double error_linf_l2(const SpaceTimeSolution& sol, const ManufacturedSolution& exact, const StokesSystem& sys) {
  return error_linf_l2(sol, sampled_velocity(exact, sys), sys);
}

SpaceTimeSolution solve_mms(const ManufacturedSolution& mms, const StokesSystem& sys, const TimeGrid& grid,
                            const TemporalBasis& basis) {
  const Vector u0 = initial_datum(mms.velocity_at(0.0), sys);
  return dg_solve(mms_forcing(mms, sys), u0, grid, sys, basis);
}

// ---------------------------------------------------------------------------
// Studies
// ---------------------------------------------------------------------------

std::string to_string(StudyAxis axis) {
  switch (axis) {
  case StudyAxis::Space:
    return "h";
  case StudyAxis::Time:
    return "tau";
  case StudyAxis::Ritz:
    return "ritz";
  }
  return "?";
}

StudyAxis parse_study_axis(const std::string& s) {
  if (s == "h" || s == "space") return StudyAxis::Space;
  if (s == "tau" || s == "time") return StudyAxis::Time;
  if (s == "ritz") return StudyAxis::Ritz;
  throw InvalidArgument("experiments", "convergence_study", "unknown study_axis '" + s + "'");
}

StudySpec parse_study_spec(const nlohmann::json& j) {
  static const std::set<std::string> known{"element", "w",         "mms",   "T",           "h_levels",
                                           "M_levels", "grading",  "study_axis", "output_dir", "kappa",
                                           "C",        "grading_beta"};
  if (!j.is_object()) throw InvalidArgument("experiments", "convergence_study", "study spec must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw InvalidArgument("experiments", "convergence_study", "unknown key '" + key + "'");
  StudySpec s;
  try {
    if (j.contains("element")) s.element = parse_element_pair(j["element"].get<std::string>());
    if (j.contains("w")) s.w = j["w"].get<int>();
    if (j.contains("mms")) s.mms = j["mms"].get<std::string>();
    if (j.contains("T")) s.T = j["T"].get<double>();
    if (j.contains("h_levels")) s.h_levels = j["h_levels"].get<std::vector<int>>();
    if (j.contains("M_levels")) s.M_levels = j["M_levels"].get<std::vector<int>>();
    if (j.contains("grading")) s.grading = j["grading"].get<double>();
    if (j.contains("study_axis")) s.axis = parse_study_axis(j["study_axis"].get<std::string>());
    if (j.contains("output_dir")) s.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("kappa")) s.assumptions.kappa = j["kappa"].get<double>();
    if (j.contains("C")) s.assumptions.c = j["C"].get<double>();
    if (j.contains("grading_beta")) s.assumptions.grading_beta = j["grading_beta"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("experiments", "convergence_study", std::string("bad value in study spec: ") + e.what());
  }
  return s;
}

double fit_rate(const std::vector<double>& resolution, const std::vector<double>& error) {
  if (resolution.size() != error.size() || resolution.size() < 2)
    throw InvalidArgument("experiments", "fit_rate", "need at least two (resolution, error) pairs");
  const std::size_t n = resolution.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(resolution[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double ritz_error(const ManufacturedSolution& mms, double T, int n, ElementPair pair) {
  auto sys = make_unit_square_system(n, pair);
  const StokesSolution r = ritz_projection(mms.velocity_with_gradient_at(T), mms.pressure_at(T), *sys);
  return sys->sampler().velocity_l2_distance(r.u, sys->sampler().sample(mms.velocity_at(T)));
}

namespace {

void validate_levels(const std::vector<int>& levels, const char* name, bool need_sequence) {
  if (levels.empty()) throw InvalidArgument("experiments", "convergence_study", std::string(name) + " is empty");
  for (int v : levels)
    if (v < 1) throw InvalidArgument("experiments", "convergence_study", std::string(name) + " entries must be >= 1");
  if (need_sequence) {
    if (levels.size() < 3)
      throw InvalidArgument("experiments", "convergence_study", std::string(name) + " needs at least 3 levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
      if (levels[i] <= levels[i - 1])
        throw InvalidArgument("experiments", "convergence_study", std::string(name) + " must be increasing");
  } else if (levels.size() != 1) {
    throw InvalidArgument("experiments", "convergence_study",
                          std::string(name) + " must hold exactly one value for this study axis");
  }
}

} // namespace

ConvergenceReport convergence_study(const StudySpec& spec, int jobs) {
  const ManufacturedSolution mms = mms_catalog(spec.mms);
  if (!(spec.T > 0.0)) throw InvalidArgument("experiments", "convergence_study", "T must be positive");
  const TemporalBasis basis(spec.w);
  switch (spec.axis) {
  case StudyAxis::Space:
    validate_levels(spec.h_levels, "h_levels", true);
    validate_levels(spec.M_levels, "M_levels", false);
    break;
  case StudyAxis::Time:
    validate_levels(spec.h_levels, "h_levels", false);
    validate_levels(spec.M_levels, "M_levels", true);
    break;
  case StudyAxis::Ritz:
    validate_levels(spec.h_levels, "h_levels", true);
    break;
  }
  // validate every grid before any expensive work
  if (spec.axis != StudyAxis::Ritz)
    for (int M : spec.M_levels) make_time_grid(spec.T, M, spec.grading, spec.assumptions);

  const std::size_t count = spec.axis == StudyAxis::Time ? spec.M_levels.size() : spec.h_levels.size();
  ConvergenceReport report;
  report.axis = spec.axis;
  std::vector<ConvergenceRow> rows(count);
  std::vector<std::string> failures(count);

  const auto run = [&](std::size_t k) {
    ConvergenceRow& r = rows[k];
    r.n = spec.axis == StudyAxis::Time ? spec.h_levels[0] : spec.h_levels[k];
    r.h = std::sqrt(2.0) / r.n;
    try {
      if (spec.axis == StudyAxis::Ritz) {
        r.error = ritz_error(mms, spec.T, r.n, spec.element);
        r.resolution = r.h;
        return;
      }
      r.M = spec.axis == StudyAxis::Time ? spec.M_levels[k] : spec.M_levels[0];
      const TimeGrid grid = make_time_grid(spec.T, r.M, spec.grading, spec.assumptions);
      r.tau = grid.tau_max();
      auto sys = make_unit_square_system(r.n, spec.element);
      const SpaceTimeSolution sol = solve_mms(mms, *sys, grid, basis);
      r.error = error_linf_l2(sol, mms, *sys);
      r.resolution = spec.axis == StudyAxis::Time ? r.tau : r.h;
    } catch (const std::exception& e) {
      failures[k] = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (workers == 1) {
    for (std::size_t k = 0; k < count; ++k) run(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) run(k);
      });
    for (auto& t : pool) t.join();
  }

  for (std::size_t k = 0; k < count; ++k) {
    if (!failures[k].empty()) {
      report.complete = false;
      report.failure = failures[k];
      break;
    }
    report.rows.push_back(rows[k]);
  }
  for (std::size_t k = 0; k < report.rows.size(); ++k) {
    auto& r = report.rows[k];
    r.pairwise_rate = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                             : std::log(report.rows[k - 1].error / r.error) /
                                   std::log(report.rows[k - 1].resolution / r.resolution);
  }
  if (report.rows.size() >= 2) {
    std::vector<double> res, err;
    for (const auto& r : report.rows) {
      res.push_back(r.resolution);
      err.push_back(r.error);
    }
    report.fitted_rate = fit_rate(res, err);
  } else {
    report.fitted_rate = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

std::string report_csv(const ConvergenceReport& r) {
  std::ostringstream out;
  out << "axis,resolution,h,tau,error,pairwise_rate\n";
  for (const auto& row : r.rows)
    out << to_string(r.axis) << ',' << format_double(row.resolution) << ',' << format_double(row.h) << ','
        << format_double(row.tau) << ',' << format_double(row.error) << ','
        << (std::isnan(row.pairwise_rate) ? std::string() : format_double(row.pairwise_rate)) << '\n';
  return out.str();
}

nlohmann::json report_json(const ConvergenceReport& r, const StudySpec& spec) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j{{"resolution", row.resolution}, {"n", row.n}, {"M", row.M},
                     {"h", row.h},                   {"tau", row.tau}, {"error", row.error}};
    j["pairwise_rate"] = std::isnan(row.pairwise_rate) ? nlohmann::json(nullptr) : nlohmann::json(row.pairwise_rate);
    rows.push_back(j);
  }
  nlohmann::json out{{"axis", to_string(r.axis)},
                     {"element", to_string(spec.element)},
                     {"w", spec.w},
                     {"mms", spec.mms},
                     {"T", spec.T},
                     {"grading", spec.grading},
                     {"h_levels", spec.h_levels},
                     {"M_levels", spec.M_levels},
                     {"rows", rows},
                     {"complete", r.complete}};
  out["fitted_rate"] = std::isnan(r.fitted_rate) ? nlohmann::json(nullptr) : nlohmann::json(r.fitted_rate);
  if (!r.complete) out["failure"] = r.failure;
  out["environment"] = {{"compiler", __VERSION__},
                        {"cxx_standard", static_cast<long>(__cplusplus)},
                        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                        {"linear_solver", "Eigen::SparseLU (COLAMD)"}};
  return out;
}

// ---------------------------------------------------------------------------
// Best approximation
// ---------------------------------------------------------------------------

SpaceTimeSolution projected_ritz(const ManufacturedSolution& exact, const StokesSystem& sys, const TimeGrid& grid,
                                 const TemporalBasis& basis) {
  return temporal_project(
      [&](double t) {
        return ritz_projection(exact.velocity_with_gradient_at(t), exact.pressure_at(t), sys).u;
      },
      grid, basis);
}

BestApproxGap best_approx_gap(const SpaceTimeSolution& sol, const ManufacturedSolution& exact,
                              const StokesSystem& sys, const TimeGrid& grid, const TemporalBasis& basis) {
  if (sol.grid.nodes() != grid.nodes())
    throw InvalidArgument("experiments", "best_approx_gap", "solution lives on a different grid");
  BestApproxGap g;
  const SampledField u = sampled_velocity(exact, sys);
  g.lhs = error_linf_l2(sol, u, sys);
  g.rhs_projection_term = error_linf_l2(projected_ritz(exact, sys, grid, basis), u, sys);
  g.log_factor = std::log(grid.final_time() / grid.tau_max());
  const double denom = g.log_factor * g.rhs_projection_term;
  g.ratio = denom > 0.0 ? g.lhs / denom : (g.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return g;
}

} // namespace stokesdg
