// Acceptance suite: one PASS/FAIL line per criterion.
#include "stokesdg/diagnostics.hpp"
#include "stokesdg/errors.hpp"
#include "stokesdg/experiments.hpp"
#include "stokesdg/io.hpp"
#include "stokesdg/stationary.hpp"
#include "stokesdg/timedg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace stokesdg;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// pinned tolerances
constexpr double kTemporalLo = 0.85, kTemporalHi = 1.15;
constexpr double kSpatialLo = 1.8, kSpatialHi = 2.2;
constexpr double kMiniLo = 1.6, kMiniHi = 2.2;
constexpr double kRitzLo = 1.8, kRitzHi = 2.2;
constexpr double kBestApproxMax = 10.0;
constexpr double kSectorSlack = 1e-9;
constexpr int kSectorSamples = 200;
constexpr double kSmoothingSpread = 2.0;
constexpr double kGrowthFactor = 1.5;
constexpr double kBetaVariation = 0.20;
constexpr double kCpgVariation = 0.30;
constexpr double kGalerkinTol = 1e-9;
constexpr double kPrimalDualTol = 1e-11;
constexpr double kSteadyTol = 1e-9;
constexpr double kStructuralSeconds = 60.0;

constexpr unsigned kSeed = 20240917u;

int failures = 0;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void report(int id, bool pass, const std::string& name, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %2d: %s  %s: %s\n", id, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

void guarded(int id, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, name, std::string("aborted: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string rates(const ConvergenceReport& r) {
  std::ostringstream s;
  s << "fitted " << fmt(r.fitted_rate) << " (pairwise";
  for (std::size_t k = 1; k < r.rows.size(); ++k) s << ' ' << fmt(r.rows[k].pairwise_rate);
  s << ")";
  return s.str();
}

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// ---------------------------------------------------------------------------

void temporal_rate() {
  StudySpec s;
  s.axis = StudyAxis::Time;
  s.element = ElementPair::TaylorHood;
  s.w = 0;
  s.h_levels = {32};
  s.M_levels = {8, 16, 32, 64};
  const ConvergenceReport r = convergence_study(s);
  const bool pass = r.complete && r.fitted_rate >= kTemporalLo && r.fitted_rate <= kTemporalHi;
  report(1, pass, "temporal rate (taylor-hood, dG(0), n = 32)",
         rates(r) + ", required [" + fmt(kTemporalLo) + ", " + fmt(kTemporalHi) + "]");
}

void spatial_rate() {
  StudySpec s;
  s.axis = StudyAxis::Space;
  s.w = 1;
  s.h_levels = {4, 8, 16, 32};
  s.M_levels = {64};
  s.element = ElementPair::TaylorHood;
  const ConvergenceReport th = convergence_study(s);
  s.element = ElementPair::Mini;
  const ConvergenceReport mini = convergence_study(s);
  const bool th_ok = th.complete && th.fitted_rate >= kSpatialLo && th.fitted_rate <= kSpatialHi;
  const bool mini_ok = mini.complete && mini.fitted_rate >= kMiniLo && mini.fitted_rate <= kMiniHi;
  report(2, th_ok && mini_ok, "spatial rate (dG(1), M = 64)",
         "taylor-hood " + rates(th) + " in [" + fmt(kSpatialLo) + ", " + fmt(kSpatialHi) + "] " +
             (th_ok ? "yes" : "no") + "; mini " + rates(mini) + " in [" + fmt(kMiniLo) + ", " + fmt(kMiniHi) +
             "] " + (mini_ok ? "yes" : "no"));
}

void ritz_rate() {
  StudySpec s;
  s.axis = StudyAxis::Ritz;
  s.element = ElementPair::TaylorHood;
  s.h_levels = {4, 8, 16, 32};
  const ConvergenceReport r = convergence_study(s);
  const bool pass = r.complete && r.fitted_rate >= kRitzLo && r.fitted_rate <= kRitzHi;
  report(3, pass, "Ritz projection L2 rate (taylor-hood)",
         rates(r) + ", required [" + fmt(kRitzLo) + ", " + fmt(kRitzHi) + "]");
}

void best_approximation() {
  const ManufacturedSolution m = mms_catalog("smooth");
  const TemporalBasis basis(0);
  double worst = 0.0;
  std::string where;
  int runs = 0;
  for (int n : {8, 16, 32}) {
    auto sys = make_unit_square_system(n, ElementPair::TaylorHood);
    for (int M : {8, 16, 32, 64}) {
      const TimeGrid g = make_time_grid(1.0, M);
      const BestApproxGap gap = best_approx_gap(solve_mms(m, *sys, g, basis), m, *sys, g, basis);
      ++runs;
      if (!(gap.ratio <= worst)) {
        worst = gap.ratio;
        where = "n = " + std::to_string(n) + ", M = " + std::to_string(M);
      }
    }
  }
  report(4, worst <= kBestApproxMax, "best-approximation ratio",
         "max lhs/(ln(T/tau) rhs) = " + fmt(worst) + " at " + where + " over " + std::to_string(runs) +
             " runs, required <= " + fmt(kBestApproxMax));
}

void sector_bound() {
  auto sys = make_unit_square_system(8, ElementPair::TaylorHood);
  const double lambda0 = laplacian_min_eigenpair(*sys).eigenvalue;
  std::mt19937_64 rng(kSeed);
  const Vector random_load = random_vector(sys->nu(), rng);
  const Vector eigen_load = sys->matrices().M * leray_project(stokes_min_eigenpair(*sys).eigenvector, *sys);
  bool pass = true;
  std::ostringstream detail;
  const double bound = 1.0 / std::cos(3 * M_PI / 8);
  for (double nu : {0.0, lambda0}) {
    for (const auto& [name, load] : {std::pair<const char*, const Vector&>{"random", random_load},
                                     std::pair<const char*, const Vector&>{"eigenfunction", eigen_load}}) {
      ResolventProbe probe;
      probe.theta = 0.75 * M_PI;
      probe.nu = nu;
      const SectorScan scan = sector_scan(probe, load, *sys);
      bool finite = true;
      for (const auto& s : scan.samples) finite = finite && std::isfinite(s.ratio);
      const bool ok = finite && scan.samples.size() >= static_cast<std::size_t>(kSectorSamples) &&
                      scan.max_ratio <= bound + kSectorSlack;
      pass = pass && ok;
      detail << "nu = " << fmt(nu) << " " << name << ": max " << fmt(scan.max_ratio) << " (" << scan.samples.size()
             << " samples); ";
    }
  }
  detail << "bound 1/cos(3pi/8) = " << fmt(bound);
  report(5, pass, "resolvent sector bound (theta = 3pi/4, n = 8)", detail.str());
}

void smoothing() {
  auto sys = make_unit_square_system(8, ElementPair::TaylorHood);
  const TemporalBasis basis(0);
  std::mt19937_64 rng(kSeed);
  const Vector eig = leray_project(stokes_min_eigenpair(*sys).eigenvector, *sys);
  const Vector rnd = leray_project(random_vector(sys->nu(), rng), *sys);
  bool pass = true;
  std::ostringstream detail;
  for (const auto& [name, u0] : {std::pair<const char*, const Vector&>{"eigenfunction", eig},
                                 std::pair<const char*, const Vector&>{"random", rnd}}) {
    std::vector<double> maxima;
    for (int M : {8, 16, 32}) maxima.push_back(smoothing_profile(u0, make_time_grid(1.0, M), *sys, basis).max);
    const double med = median(maxima);
    bool ok = med > 0.0;
    for (double v : maxima) ok = ok && std::isfinite(v) && v < kSmoothingSpread * med && v > med / kSmoothingSpread;
    pass = pass && ok;
    detail << name << " maxima";
    for (double v : maxima) detail << ' ' << fmt(v);
    detail << " (median " << fmt(med) << "); ";
  }
  detail << "required within " << fmt(kSmoothingSpread) << "x of the median";
  report(6, pass, "smoothing profile bounded in M", detail.str());
}

struct RegularityScan {
  std::vector<RegularityFunctionals> by_s_inf, by_s_one, by_s_two;
  std::vector<PressureRegularity> p_inf, p_one;
};

RegularityScan regularity_scan() {
  auto sys = make_unit_square_system(8, ElementPair::TaylorHood);
  const ManufacturedSolution m = mms_catalog("smooth");
  const ForcingField f = [m](double t) { return m.forcing_at(t); };
  RegularityScan out;
  for (int M : {8, 16, 32, 64, 128}) {
    const SpaceTimeSolution sol =
        dg_solve(forcing_load(f, *sys), Vector::Zero(sys->nu()), make_time_grid(1.0, M), *sys, TemporalBasis(0));
    out.by_s_one.push_back(max_reg_functionals(sol, f, 1.0, *sys));
    out.by_s_two.push_back(max_reg_functionals(sol, f, 2.0, *sys));
    out.by_s_inf.push_back(max_reg_functionals(sol, f, kInf, *sys));
    out.p_one.push_back(pressure_regularity(sol, f, 1.0, *sys));
    out.p_inf.push_back(pressure_regularity(sol, f, kInf, *sys));
  }
  return out;
}

bool no_growth(const std::vector<double>& v, std::ostringstream& detail) {
  bool ok = true;
  for (double x : v) ok = ok && std::isfinite(x) && x > 0.0;
  ok = ok && v.back() <= kGrowthFactor * v.front();
  for (double x : v) detail << ' ' << fmt(x);
  return ok;
}

void max_regularity(const RegularityScan& scan) {
  std::ostringstream d;
  std::vector<double> one, inf, two;
  bool zero_initial = true;
  for (const auto& r : scan.by_s_one) one.push_back(r.log_ratio), zero_initial = zero_initial && r.zero_initial;
  for (const auto& r : scan.by_s_inf) inf.push_back(r.log_ratio);
  for (const auto& r : scan.by_s_two) two.push_back(r.ratio);
  d << "s = 1 log-ratios";
  bool pass = no_growth(one, d);
  d << "; s = inf log-ratios";
  pass = no_growth(inf, d) && pass;
  d << "; s = 2 ratios";
  pass = no_growth(two, d) && pass;
  d << "; M = 8..128, required last <= " << fmt(kGrowthFactor) << " x first";
  report(7, pass && zero_initial, "discrete maximal regularity", d.str());
}

void pressure_regularity_criterion(const RegularityScan& scan) {
  std::ostringstream d;
  std::vector<double> one, inf;
  for (const auto& r : scan.p_one) one.push_back(r.log_ratio);
  for (const auto& r : scan.p_inf) inf.push_back(r.log_ratio);
  d << "s = 1 log-ratios";
  bool pass = no_growth(one, d);
  d << "; s = inf log-ratios";
  pass = no_growth(inf, d) && pass;
  d << "; required last <= " << fmt(kGrowthFactor) << " x first";
  report(8, pass, "pressure regularity", d.str());
}

void infsup_uniformity() {
  bool pass = true;
  std::ostringstream d;
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    std::vector<double> beta, cpg;
    for (int n : {4, 8, 16, 32}) {
      auto sys = make_unit_square_system(n, pair);
      beta.push_back(infsup_constant(*sys));
      cpg.push_back(pressure_gradient_infsup(*sys));
    }
    const auto variation = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return (*hi - *lo) / *hi;
    };
    const bool positive = *std::min_element(beta.begin(), beta.end()) > 0 && *std::min_element(cpg.begin(), cpg.end()) > 0;
    const bool ok = positive && variation(beta) < kBetaVariation && variation(cpg) < kCpgVariation;
    pass = pass && ok;
    d << to_string(pair) << " beta";
    for (double v : beta) d << ' ' << fmt(v);
    d << " (var " << fmt(variation(beta)) << "), C_pg";
    for (double v : cpg) d << ' ' << fmt(v);
    d << " (var " << fmt(variation(cpg)) << "); ";
  }
  d << "n = 4..32, required var < " << fmt(kBetaVariation) << " / " << fmt(kCpgVariation);
  report(9, pass, "inf-sup uniformity", d.str());
}

void structural_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(kSeed);
  double galerkin = 0, primal_dual = 0, steady = 0, idempotence = 0, symmetry = 0;
  bool dissipative = true;
  for (ElementPair pair : {ElementPair::TaylorHood, ElementPair::Mini}) {
    for (int n : {4, 8}) {
      auto sys = make_unit_square_system(n, pair);
      const auto force = [](double t) {
        return VectorField([t](double x, double y) {
          return std::array<double, 2>{std::sin(M_PI * x) * std::sin(M_PI * y) * std::cos(3 * t), x * y * t + 0.5};
        });
      };
      const Forcing f{[&sys, force](double t) { return sys->load(force(t)); }};
      const Vector u0 = leray_project(random_vector(sys->nu(), rng), *sys);
      for (int w : {0, 1}) {
        const TemporalBasis basis(w);
        const SpaceTimeSolution s = dg_solve(f, u0, make_time_grid(1.0, 8), *sys, basis);
        galerkin = std::max(galerkin, galerkin_residual(s, f, sys->matrices().M * u0, *sys, basis));

        GridAssumptions loose;
        loose.kappa = 10;
        loose.c = 0.01;
        const TimeGrid g = make_time_grid(1.0, 8, 1.5, loose);
        SpaceTimeSolution a = zero_space_time(g, w, sys->nu(), sys->np());
        SpaceTimeSolution b = a;
        for (auto* st : {&a, &b}) {
          for (auto& modes : st->u)
            for (auto& v : modes) v = random_vector(sys->nu(), rng);
          for (auto& modes : st->p)
            for (auto& v : modes) v = random_vector(sys->np(), rng);
          st->initial = random_vector(sys->nu(), rng);
        }
        const double pr = bilinear_form_primal(a, b, *sys, basis);
        const double du = bilinear_form_dual(a, b, *sys, basis);
        primal_dual = std::max(primal_dual, std::abs(pr - du) / std::max(1.0, std::abs(pr)));

        const SpaceTimeSolution free = dg_solve(Forcing{}, u0, make_time_grid(1.0, 8), *sys, basis);
        dissipative = dissipative && sys->l2_norm(left_limit(free, 8)) <= sys->l2_norm(u0) * (1 + 1e-12);
      }
      // steady state under dG(0)
      const Vector load = sys->load(force(0.0));
      const StokesSolution st = solve_stationary(load, *sys);
      const SpaceTimeSolution ss =
          dg_solve(Forcing{[load](double) { return load; }}, st.u, make_time_grid(1.0, 8), *sys, TemporalBasis(0));
      for (int m = 1; m <= 8; ++m) {
        steady = std::max(steady, (ss.u[m - 1][0] - st.u).norm() / std::max(1.0, st.u.norm()));
        steady = std::max(steady, (ss.p[m - 1][0] - st.p).norm() / std::max(1.0, st.p.norm()));
      }
      // P_h idempotence and A_h symmetry
      const Vector v = random_vector(sys->nu(), rng);
      const Vector pv = leray_project(v, *sys);
      idempotence = std::max(idempotence, (leray_project(pv, *sys) - pv).norm() / pv.norm());
      const Vector x = leray_project(random_vector(sys->nu(), rng), *sys);
      const Vector y = leray_project(random_vector(sys->nu(), rng), *sys);
      const double axy = sys->l2_inner(apply_stokes_operator(x, *sys), y);
      const double xay = sys->l2_inner(x, apply_stokes_operator(y, *sys));
      symmetry = std::max(symmetry, std::abs(axy - xay) / std::max(std::abs(axy), 1.0));
    }
  }
  const double elapsed = seconds_since(t0);
  const bool pass = galerkin <= kGalerkinTol && primal_dual <= kPrimalDualTol && steady <= kSteadyTol &&
                    idempotence <= 1e-10 && symmetry <= 1e-10 && dissipative && elapsed < kStructuralSeconds;
  std::ostringstream d;
  d << "galerkin " << fmt(galerkin) << " (<= " << fmt(kGalerkinTol) << "), primal/dual " << fmt(primal_dual)
    << " (<= " << fmt(kPrimalDualTol) << "), steady state " << fmt(steady) << " (<= " << fmt(kSteadyTol)
    << "), P_h idempotence " << fmt(idempotence) << ", A_h symmetry " << fmt(symmetry) << ", energy dissipation "
    << (dissipative ? "yes" : "no") << ", " << fmt(elapsed) << " s (< " << fmt(kStructuralSeconds) << " s)";
  report(10, pass, "structural invariants (n <= 8)", d.str());
}

} // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  guarded(1, "temporal rate", temporal_rate);
  guarded(2, "spatial rate", spatial_rate);
  guarded(3, "Ritz projection L2 rate", ritz_rate);
  guarded(4, "best-approximation ratio", best_approximation);
  guarded(5, "resolvent sector bound", sector_bound);
  guarded(6, "smoothing profile", smoothing);
  RegularityScan scan;
  bool have_scan = false;
  try {
    scan = regularity_scan();
    have_scan = true;
  } catch (const std::exception& e) {
    report(7, false, "discrete maximal regularity", std::string("aborted: ") + e.what());
    report(8, false, "pressure regularity", std::string("aborted: ") + e.what());
  }
  if (have_scan) {
    guarded(7, "discrete maximal regularity", [&] { max_regularity(scan); });
    guarded(8, "pressure regularity", [&] { pressure_regularity_criterion(scan); });
  }
  guarded(9, "inf-sup uniformity", infsup_uniformity);
  guarded(10, "structural invariants", structural_suite);
  std::printf("%d of 10 criteria failed (%.1f s)\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
