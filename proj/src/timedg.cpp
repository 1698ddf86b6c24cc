// ============================================================================
// timedg.cpp - Time grids, temporal bases, dG(w) solver and P_tau
// ============================================================================
#include "stokesdg/timedg.hpp"

#include "stokesdg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace stokesdg {

namespace {

// Legendre P_n and its derivative at x in [-1, 1].
std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x, d1 = 1.0;
  for (int k = 1; k < n; ++k) {
    const double p2 = ((2 * k + 1) * x * p1 - k * p0) / (k + 1);
    d1 = (k + 1) * p1 + x * d1;
    p0 = p1;
    p1 = p2;
  }
  return {p1, d1};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

} // namespace

GaussRule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("timedg", "gauss_legendre", "need at least one point");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = legendre(n, x);
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double d = legendre(n, x).second;
    // map [-1, 1] -> [0, 1]; nodes come out decreasing in x
    r.nodes[n - 1 - i] = 0.5 * (x + 1.0);
    r.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * d * d);
  }
  return r;
}

// ---------------------------------------------------------------------------
// TimeGrid
// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 2) throw InvalidArgument("timedg", "make_time_grid", "need at least one interval");
  if (nodes_.front() != 0.0) throw InvalidArgument("timedg", "make_time_grid", "first node must be 0");
  tau_max_ = 0.0;
  tau_min_ = std::numeric_limits<double>::infinity();
  for (int m = 1; m < static_cast<int>(nodes_.size()); ++m) {
    const double t = tau(m);
    if (!(t > 0.0)) throw InvalidArgument("timedg", "make_time_grid", "nodes must be strictly increasing");
    tau_max_ = std::max(tau_max_, t);
    tau_min_ = std::min(tau_min_, t);
    if (m > 1) {
      const double r = tau(m - 1) / t;
      max_ratio_ = std::max(max_ratio_, std::max(r, 1.0 / r));
    }
  }
}

int TimeGrid::locate(double t) const {
  if (!(t > 0.0) || t > final_time())
    throw InvalidArgument("timedg", "evaluate", "time " + fmt(t) + " outside (0, " + fmt(final_time()) + "]");
  // first node >= t is t_m with t in (t_{m-1}, t_m]
  const auto it = std::lower_bound(nodes_.begin() + 1, nodes_.end(), t);
  return static_cast<int>(it - nodes_.begin());
}

void check_grid_assumptions(const TimeGrid& grid, const GridAssumptions& a) {
  const double slack = 1e-12;
  const double tau = grid.tau_max();
  const double bound = a.c * std::pow(tau, a.grading_beta);
  if (grid.tau_min() < bound * (1.0 - slack))
    throw GridAssumptionError(1, "tau_min = " + fmt(grid.tau_min()) + " < C tau^beta = " + fmt(bound));
  if (grid.max_adjacent_ratio() > a.kappa * (1.0 + slack))
    throw GridAssumptionError(2, "adjacent step ratio " + fmt(grid.max_adjacent_ratio()) + " exceeds kappa = " +
                                     fmt(a.kappa));
  if (tau > grid.final_time() / 4.0 * (1.0 + slack))
    throw GridAssumptionError(3, "tau = " + fmt(tau) + " > T/4 = " + fmt(grid.final_time() / 4.0));
}

TimeGrid make_time_grid(double T, int M, double grading, const GridAssumptions& a) {
  if (!(T > 0.0)) throw InvalidArgument("timedg", "make_time_grid", "final time must be positive");
  if (M < 1) throw InvalidArgument("timedg", "make_time_grid", "need M >= 1");
  if (!(grading >= 1.0)) throw InvalidArgument("timedg", "make_time_grid", "grading exponent must be >= 1");
  if (!(a.kappa >= 1.0) || !(a.c > 0.0) || !(a.grading_beta > 0.0))
    throw InvalidArgument("timedg", "make_time_grid", "need kappa >= 1, C > 0, beta > 0");
  std::vector<double> nodes(M + 1);
  for (int m = 0; m <= M; ++m)
    nodes[m] = grading == 1.0 ? T * m / M : T * std::pow(static_cast<double>(m) / M, grading);
  nodes[M] = T;
  TimeGrid grid(std::move(nodes));
  check_grid_assumptions(grid, a);
  return grid;
}

// ---------------------------------------------------------------------------
// TemporalBasis
// ---------------------------------------------------------------------------

TemporalBasis::TemporalBasis(int degree) : degree_(degree) {
  if (degree < 0 || degree > 1)
    throw InvalidArgument("timedg", "temporal_basis", "degree must be 0 or 1, got " + std::to_string(degree));
  const int n = size();
  const GaussRule g = gauss_legendre(n + 1);
  gamma_ = DenseMatrix::Zero(n, n);
  theta_ = DenseMatrix::Zero(n, n);
  left_.resize(n);
  right_.resize(n);
  for (int i = 0; i < n; ++i) {
    left_[i] = value(i, 0.0);
    right_[i] = value(i, 1.0);
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double gs = 0.0, ts = 0.0;
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        gs += g.weights[q] * derivative(j, g.nodes[q]) * value(i, g.nodes[q]);
        ts += g.weights[q] * value(j, g.nodes[q]) * value(i, g.nodes[q]);
      }
      gamma_(i, j) = gs + left_[j] * left_[i];
      theta_(i, j) = ts;
    }
}

double TemporalBasis::value(int j, double xi) const { return legendre(j, 2.0 * xi - 1.0).first; }

double TemporalBasis::derivative(int j, double xi) const { return 2.0 * legendre(j, 2.0 * xi - 1.0).second; }

// ---------------------------------------------------------------------------
// Space-time functions
// ---------------------------------------------------------------------------

SpaceTimeSolution zero_space_time(const TimeGrid& grid, int degree, Index nu, Index np) {
  SpaceTimeSolution s;
  s.grid = grid;
  s.degree = degree;
  s.u.assign(grid.intervals(), std::vector<Vector>(degree + 1, Vector::Zero(nu)));
  s.p.assign(grid.intervals(), std::vector<Vector>(degree + 1, Vector::Zero(np)));
  s.initial = Vector::Zero(nu);
  return s;
}

Snapshot evaluate_local(const SpaceTimeSolution& sol, int m, double xi) {
  if (m < 1 || m > sol.intervals()) throw InvalidArgument("timedg", "evaluate", "interval index out of range");
  Snapshot s;
  const auto& um = sol.u[m - 1];
  s.u = Vector::Zero(um[0].size());
  for (int j = 0; j <= sol.degree; ++j) s.u += legendre(j, 2.0 * xi - 1.0).first * um[j];
  if (!sol.p.empty() && !sol.p[m - 1].empty()) {
    const auto& pm = sol.p[m - 1];
    s.p = Vector::Zero(pm[0].size());
    for (int j = 0; j <= sol.degree; ++j) s.p += legendre(j, 2.0 * xi - 1.0).first * pm[j];
  }
  return s;
}

Snapshot evaluate(const SpaceTimeSolution& sol, double t) {
  const int m = sol.grid.locate(t);
  const double xi = (t - sol.grid.start(m)) / sol.grid.tau(m);
  return evaluate_local(sol, m, xi);
}

Vector velocity_time_derivative(const SpaceTimeSolution& sol, int m, double xi) {
  const auto& um = sol.u[m - 1];
  Vector d = Vector::Zero(um[0].size());
  for (int j = 0; j <= sol.degree; ++j) d += 2.0 * legendre(j, 2.0 * xi - 1.0).second * um[j];
  return d / sol.grid.tau(m);
}

Vector right_limit(const SpaceTimeSolution& sol, int node) {
  if (node < 0 || node >= sol.intervals()) throw InvalidArgument("timedg", "jumps", "node out of range");
  return evaluate_local(sol, node + 1, 0.0).u;
}

Vector left_limit(const SpaceTimeSolution& sol, int node) {
  if (node < 0 || node > sol.intervals()) throw InvalidArgument("timedg", "jumps", "node out of range");
  if (node == 0) return sol.initial;
  return evaluate_local(sol, node, 1.0).u;
}

std::vector<Vector> jumps(const SpaceTimeSolution& sol) {
  std::vector<Vector> out;
  out.reserve(sol.intervals());
  for (int m = 1; m <= sol.intervals(); ++m) out.push_back(right_limit(sol, m - 1) - left_limit(sol, m - 1));
  return out;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

Vector initial_datum(const VectorField& u0, const StokesSystem& sys) {
  return leray_project(interpolate_velocity(u0, sys.spaces()), sys);
}

std::vector<Vector> interval_loads(const Forcing& f, const TimeGrid& grid, int m, const TemporalBasis& basis,
                                   const StokesSystem& sys, bool project_load) {
  std::vector<Vector> out(basis.size(), Vector::Zero(sys.nu()));
  if (f.is_zero()) return out;
  const GaussRule g = gauss_legendre(basis.degree() + 3);
  const double tau = grid.tau(m);
  for (std::size_t q = 0; q < g.nodes.size(); ++q) {
    Vector load = f.load(grid.start(m) + tau * g.nodes[q]);
    if (load.size() != sys.nu()) throw InvalidArgument("timedg", "dg_solve", "load has wrong size");
    if (project_load) load = sys.matrices().M * leray_project_load(load, sys);
    for (int i = 0; i < basis.size(); ++i) out[i] += (tau * g.weights[q] * basis.value(i, g.nodes[q])) * load;
  }
  return out;
}

namespace {

SparseMatrix local_matrix(double tau, const StokesSystem& sys, const TemporalBasis& basis) {
  const auto& mat = sys.matrices();
  const Index nu = sys.nu(), np = sys.np();
  const int S = basis.size();
  const Index pbase = S * nu, cbase = S * (nu + np);
  const Index n = S * (nu + np + 1);
  std::vector<Triplet> trip;
  trip.reserve(S * S * (mat.M.nonZeros() + mat.K.nonZeros()) + 4 * S * mat.B.nonZeros() + 2 * S * np);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      const double g = basis.gamma()(i, j);
      const double th = tau * basis.theta()(i, j);
      if (g != 0.0)
        for (Index r = 0; r < mat.M.outerSize(); ++r)
          for (SparseMatrix::InnerIterator it(mat.M, r); it; ++it)
            trip.emplace_back(i * nu + r, j * nu + it.col(), g * it.value());
      if (th != 0.0)
        for (Index r = 0; r < mat.K.outerSize(); ++r)
          for (SparseMatrix::InnerIterator it(mat.K, r); it; ++it)
            trip.emplace_back(i * nu + r, j * nu + it.col(), th * it.value());
    }
    const double s = tau * basis.theta()(i, i);
    for (Index r = 0; r < mat.B.outerSize(); ++r)
      for (SparseMatrix::InnerIterator it(mat.B, r); it; ++it) {
        trip.emplace_back(pbase + i * np + r, i * nu + it.col(), -s * it.value());
        trip.emplace_back(i * nu + it.col(), pbase + i * np + r, -s * it.value());
      }
    for (Index k = 0; k < np; ++k) {
      trip.emplace_back(pbase + i * np + k, cbase + i, s * mat.mp[k]);
      trip.emplace_back(cbase + i, pbase + i * np + k, s * mat.mp[k]);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.prune(0.0);
  a.makeCompressed();
  return a;
}

struct FactorCache {
  std::vector<std::pair<double, std::shared_ptr<Factorization>>> entries; // most recent first
  std::size_t capacity = 4;

  const Factorization& get(double tau, const StokesSystem& sys, const TemporalBasis& basis) {
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (std::abs(entries[k].first - tau) <= 1e-13 * tau) {
        if (k > 0) std::rotate(entries.begin(), entries.begin() + k, entries.begin() + k + 1);
        return *entries.front().second;
      }
    }
    auto f = std::make_shared<Factorization>(local_matrix(tau, sys, basis));
    entries.insert(entries.begin(), {tau, std::move(f)});
    if (entries.size() > std::max<std::size_t>(capacity, 1)) entries.pop_back();
    return *entries.front().second;
  }
};

} // namespace

SpaceTimeSolution dg_solve(const Forcing& f, const Vector& initial, const TimeGrid& grid, const StokesSystem& sys,
                           const TemporalBasis& basis, const DgOptions& options) {
  if (initial.size() != sys.nu())
    throw InvalidArgument("timedg", "dg_solve", "initial datum has " + std::to_string(initial.size()) +
                                                    " entries, system has " + std::to_string(sys.nu()));
  const Index nu = sys.nu(), np = sys.np();
  const int S = basis.size();
  const Index pbase = S * nu;
  SpaceTimeSolution sol = zero_space_time(grid, basis.degree(), nu, np);
  sol.initial = initial;

  FactorCache cache;
  cache.capacity = options.cache_size;
  Vector prev = initial;
  const auto& M = sys.matrices().M;
  for (int m = 1; m <= grid.intervals(); ++m) {
    const double tau = grid.tau(m);
    const std::vector<Vector> loads = interval_loads(f, grid, m, basis, sys, options.project_load);
    Vector rhs = Vector::Zero(S * (nu + np + 1));
    const Vector mprev = M * prev;
    for (int i = 0; i < S; ++i) rhs.segment(i * nu, nu) = loads[i] + basis.left_trace()[i] * mprev;
    const Factorization& fac = cache.get(tau, sys, basis);
    const Vector x = fac.solve(rhs);
    const double res = fac.relative_residual(x, rhs);
    if (res > 1e-9)
      throw NumericalFailure("timedg", "dg_solve",
                             "interval " + std::to_string(m) + ": relative residual " + fmt(res));
    for (int j = 0; j < S; ++j) {
      sol.u[m - 1][j] = x.segment(j * nu, nu);
      sol.p[m - 1][j] = x.segment(pbase + j * np, np);
    }
    prev = Vector::Zero(nu);
    for (int j = 0; j < S; ++j) prev += basis.right_trace()[j] * sol.u[m - 1][j];
  }
  return sol;
}

double galerkin_residual(const SpaceTimeSolution& sol, const Forcing& f, const Vector& u0_load,
                         const StokesSystem& sys, const TemporalBasis& basis) {
  const auto& mat = sys.matrices();
  const int S = basis.size();
  const GaussRule g = gauss_legendre(S + 2);
  double r2 = 0.0, rhs2 = u0_load.squaredNorm();
  for (int m = 1; m <= sol.intervals(); ++m) {
    const double tau = sol.grid.tau(m);
    const std::vector<Vector> loads = interval_loads(f, sol.grid, m, basis, sys, false);
    // jump term tested with v^+_{m-1}
    const Vector jump_term = m == 1 ? Vector(mat.M * right_limit(sol, 0) - u0_load)
                                    : Vector(mat.M * (right_limit(sol, m - 1) - left_limit(sol, m - 1)));
    for (int i = 0; i < S; ++i) {
      Vector rv = -loads[i] + basis.value(i, 0.0) * jump_term;
      Vector rq = Vector::Zero(sys.np());
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double xi = g.nodes[q];
        const double w = tau * g.weights[q] * basis.value(i, xi);
        const Snapshot s = evaluate_local(sol, m, xi);
        const Vector dt = velocity_time_derivative(sol, m, xi);
        rv += w * (mat.M * dt + mat.K * s.u - mat.B.transpose() * s.p);
        rq += w * (mat.B * s.u);
      }
      r2 += rv.squaredNorm() + rq.squaredNorm();
      rhs2 += loads[i].squaredNorm();
    }
  }
  return rhs2 > 0.0 ? std::sqrt(r2 / rhs2) : std::sqrt(r2);
}

namespace {

void check_compatible(const SpaceTimeSolution& a, const SpaceTimeSolution& b, const char* op) {
  if (a.intervals() != b.intervals() || a.degree != b.degree || a.grid.nodes() != b.grid.nodes())
    throw InvalidArgument("timedg", op, "space-time functions live on different grids");
}

// Terms shared by both representations: spatial forms integrated in time.
double spatial_part(const SpaceTimeSolution& a, const SpaceTimeSolution& b, const StokesSystem& sys,
                    const GaussRule& g) {
  const auto& mat = sys.matrices();
  double sum = 0.0;
  for (int m = 1; m <= a.intervals(); ++m) {
    const double tau = a.grid.tau(m);
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const Snapshot sa = evaluate_local(a, m, g.nodes[q]);
      const Snapshot sb = evaluate_local(b, m, g.nodes[q]);
      sum += tau * g.weights[q] *
             (sa.u.dot(mat.K * sb.u) - sa.p.dot(mat.B * sb.u) + sb.p.dot(mat.B * sa.u));
    }
  }
  return sum;
}

} // namespace

double bilinear_form_primal(const SpaceTimeSolution& a, const SpaceTimeSolution& b, const StokesSystem& sys,
                            const TemporalBasis& basis) {
  check_compatible(a, b, "bilinear_form_primal");
  const auto& M = sys.matrices().M;
  const GaussRule g = gauss_legendre(basis.size() + 2);
  double sum = spatial_part(a, b, sys, g);
  for (int m = 1; m <= a.intervals(); ++m) {
    const double tau = a.grid.tau(m);
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const Vector dt = velocity_time_derivative(a, m, g.nodes[q]);
      sum += tau * g.weights[q] * dt.dot(M * evaluate_local(b, m, g.nodes[q]).u);
    }
    const Vector vplus = right_limit(b, m - 1);
    if (m >= 2)
      sum += (right_limit(a, m - 1) - left_limit(a, m - 1)).dot(M * vplus);
    else
      sum += right_limit(a, 0).dot(M * vplus);
  }
  return sum;
}

double bilinear_form_dual(const SpaceTimeSolution& a, const SpaceTimeSolution& b, const StokesSystem& sys,
                          const TemporalBasis& basis) {
  check_compatible(a, b, "bilinear_form_dual");
  const auto& M = sys.matrices().M;
  const GaussRule g = gauss_legendre(basis.size() + 2);
  const int n = a.intervals();
  double sum = spatial_part(a, b, sys, g);
  for (int m = 1; m <= n; ++m) {
    const double tau = a.grid.tau(m);
    for (std::size_t q = 0; q < g.nodes.size(); ++q) {
      const Vector dt = velocity_time_derivative(b, m, g.nodes[q]);
      sum -= tau * g.weights[q] * evaluate_local(a, m, g.nodes[q]).u.dot(M * dt);
    }
  }
  for (int m = 1; m <= n - 1; ++m)
    sum -= left_limit(a, m).dot(M * (right_limit(b, m) - left_limit(b, m)));
  sum += left_limit(a, n).dot(M * left_limit(b, n));
  return sum;
}

SpaceTimeSolution temporal_project(const std::function<Vector(double)>& g, const TimeGrid& grid,
                                   const TemporalBasis& basis) {
  const GaussRule rule = gauss_legendre(basis.degree() + 2);
  SpaceTimeSolution s;
  s.grid = grid;
  s.degree = basis.degree();
  s.u.resize(grid.intervals());
  s.p.resize(grid.intervals());
  for (int m = 1; m <= grid.intervals(); ++m) {
    auto& modes = s.u[m - 1];
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const Vector v = g(grid.start(m) + grid.tau(m) * rule.nodes[q]);
      if (modes.empty()) modes.assign(basis.size(), Vector::Zero(v.size()));
      for (int j = 0; j < basis.size(); ++j)
        modes[j] += ((2 * j + 1) * rule.weights[q] * basis.value(j, rule.nodes[q])) * v;
    }
  }
  s.initial = s.u.front().front() * 0.0;
  return s;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_snapshot_csv(std::ostream& out, const Vector& values) {
  out << "dof_index,value\n";
  char buf[64];
  for (Index i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    out << i << ',' << buf << '\n';
  }
}

nlohmann::json trajectory_summary(const SpaceTimeSolution& sol, const StokesSystem& sys) {
  nlohmann::json rows = nlohmann::json::array();
  const std::vector<Vector> jmp = jumps(sol);
  for (int m = 1; m <= sol.intervals(); ++m) {
    const Snapshot end = evaluate_local(sol, m, 1.0);
    rows.push_back({{"m", m},
                    {"t_start", sol.grid.start(m)},
                    {"t_end", sol.grid.end(m)},
                    {"tau", sol.grid.tau(m)},
                    {"velocity_l2_plus", sys.l2_norm(right_limit(sol, m - 1))},
                    {"velocity_l2_minus", sys.l2_norm(end.u)},
                    {"jump_l2", sys.l2_norm(jmp[m - 1])},
                    {"pressure_l2_end", sys.pressure_l2_norm(end.p)},
                    {"pressure_gradient_end", sys.pressure_gradient_norm(end.p)}});
  }
  return {{"degree", sol.degree},
          {"intervals", sol.intervals()},
          {"final_time", sol.grid.final_time()},
          {"tau_max", sol.grid.tau_max()},
          {"tau_min", sol.grid.tau_min()},
          {"initial_l2", sys.l2_norm(sol.initial)},
          {"per_interval", rows}};
}

} // namespace stokesdg
