// ============================================================================
// stokesdg_cli.cpp - Command-line driver
// ============================================================================
#include "stokesdg/diagnostics.hpp"
#include "stokesdg/errors.hpp"
#include "stokesdg/experiments.hpp"
#include "stokesdg/io.hpp"
#include "stokesdg/mesh.hpp"
#include "stokesdg/stationary.hpp"
#include "stokesdg/timedg.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stokesdg;

namespace {

constexpr unsigned default_seed = 20240917u;

struct Flags {
  std::string config;
  std::string out;
  int jobs = 0;
  std::optional<unsigned> seed;
  std::optional<int> n, M, w;
  std::optional<std::string> element, s, nu;
  std::optional<double> T, grading, theta;
};

const std::set<std::string> grid_keys{"T", "grading", "kappa", "C", "grading_beta"};

std::set<std::string> keys_for(const std::string& cmd) {
  std::set<std::string> k;
  const auto add = [&k](std::initializer_list<const char*> names) {
    for (const char* s : names) k.insert(s);
  };
  const auto add_grid = [&] { k.insert(grid_keys.begin(), grid_keys.end()); };
  add({"output_dir", "seed", "jobs"});
  if (cmd == "mesh") add({"n"});
  if (cmd == "infsup") add({"element", "h_levels", "n"});
  if (cmd == "stationary") add({"element", "n", "mms", "T"});
  if (cmd == "ritz") add({"element", "h_levels", "n", "mms", "T"});
  if (cmd == "solve") {
    add({"element", "n", "w", "M", "mms", "snapshots"});
    add_grid();
  }
  if (cmd == "resolvent") add({"element", "n", "theta", "nu", "angles", "magnitudes", "r_min", "r_max", "load"});
  if (cmd == "maxreg" || cmd == "pressure") {
    add({"element", "n", "w", "M", "M_levels", "mms", "s"});
    add_grid();
  }
  if (cmd == "smoothing") {
    add({"element", "n", "w", "M", "M_levels", "u0"});
    add_grid();
  }
  if (cmd == "convergence") {
    add({"element", "w", "mms", "h_levels", "M_levels", "study_axis"});
    add_grid();
  }
  if (cmd == "bestapprox") {
    add({"element", "w", "mms", "h_levels", "M_levels"});
    add_grid();
  }
  return k;
}

[[noreturn]] void bad(const std::string& cmd, const std::string& what) { throw InvalidArgument("cli", cmd, what); }

json load_config(const std::string& cmd, const Flags& f) {
  json j = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) bad(cmd, "cannot open config " + f.config);
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      bad(cmd, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad(cmd, "config must be a JSON object");
  }
  if (f.n) j["n"] = *f.n;
  if (f.M) j["M"] = *f.M;
  if (f.w) j["w"] = *f.w;
  if (f.element) j["element"] = *f.element;
  if (f.T) j["T"] = *f.T;
  if (f.grading) j["grading"] = *f.grading;
  if (f.theta) j["theta"] = *f.theta;
  if (f.s) j["s"] = *f.s;
  if (f.nu) j["nu"] = *f.nu;
  if (f.seed) j["seed"] = *f.seed;
  if (!f.out.empty()) j["output_dir"] = f.out;

  const std::set<std::string> allowed = keys_for(cmd);
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) bad(cmd, "unknown key '" + key + "'");
  return j;
}

template <class T> T get(const json& j, const std::string& cmd, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(cmd, "bad value for '" + key + "'");
  }
}

std::vector<int> int_levels(const json& j, const std::string& cmd, const std::string& key,
                            std::vector<int> fallback, const char* single = nullptr) {
  if (j.contains(key)) return get<std::vector<int>>(j, cmd, key, {});
  if (single && j.contains(single)) return {get<int>(j, cmd, single, 0)};
  return fallback;
}

std::vector<double> exponents(const json& j, const std::string& cmd, std::vector<double> fallback) {
  if (!j.contains("s")) return fallback;
  std::vector<std::string> items;
  const json& v = j.at("s");
  const auto text = [&](const json& e) { return e.is_string() ? e.get<std::string>() : e.dump(); };
  if (v.is_array()) {
    for (const auto& e : v) items.push_back(text(e));
  } else {
    std::stringstream ss(text(v));
    for (std::string part; std::getline(ss, part, ',');) items.push_back(part);
  }
  if (items.empty()) bad(cmd, "empty exponent list");
  std::vector<double> out;
  for (const auto& s : items) out.push_back(parse_exponent(s));
  return out;
}

GridAssumptions assumptions(const json& j, const std::string& cmd) {
  GridAssumptions a;
  a.kappa = get<double>(j, cmd, "kappa", a.kappa);
  a.c = get<double>(j, cmd, "C", a.c);
  a.grading_beta = get<double>(j, cmd, "grading_beta", a.grading_beta);
  return a;
}

ElementPair element(const json& j, const std::string& cmd) {
  return parse_element_pair(get<std::string>(j, cmd, "element", "taylor-hood"));
}

fs::path output_dir(const json& j, const std::string& cmd) { return get<std::string>(j, cmd, "output_dir", "."); }

unsigned seed(const json& j, const std::string& cmd) { return get<unsigned>(j, cmd, "seed", default_seed); }

void write_json(const fs::path& path, const json& j) { atomic_write(path, j.dump(2) + "\n"); }

std::string snapshot_csv(const Vector& v) {
  std::ostringstream out;
  write_snapshot_csv(out, v);
  return out.str();
}

std::string csv_line(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  return s + '\n';
}

std::string num(double v) { return format_double(v); }

// Runs body(k) for k in [0, count) on a bounded pool; rethrows the first
// failure in index order.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto run = [&](std::size_t k) {
    try {
      body(k);
    } catch (...) {
      errors[k] = std::current_exception();
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
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_mesh(const json& j) {
  const std::string cmd = "mesh";
  const int n = get<int>(j, cmd, "n", 4);
  const Mesh mesh = unit_square_mesh(n);
  fs::path out = output_dir(j, cmd);
  if (!out.has_extension()) out /= "mesh.txt";
  std::ostringstream text;
  write_mesh(text, mesh);
  atomic_write(out, text.str());
  const MeshStatistics s = mesh_statistics(mesh);
  std::cout << "mesh n=" << n << ": " << s.n_vertices << " vertices, " << s.n_triangles << " triangles, h = " << num(s.h)
            << " -> " << out.string() << '\n';
  return 0;
}

int cmd_infsup(const json& j, int jobs) {
  const std::string cmd = "infsup";
  const std::string which = get<std::string>(j, cmd, "element", "all");
  std::vector<ElementPair> pairs;
  if (which == "all")
    pairs = {ElementPair::TaylorHood, ElementPair::Mini};
  else
    pairs = {parse_element_pair(which)};
  const std::vector<int> levels = int_levels(j, cmd, "h_levels", {4, 8, 16, 32}, "n");
  std::vector<InfSupReport> reports(pairs.size() * levels.size());
  parallel_for(reports.size(), jobs, [&](std::size_t k) {
    const int n = levels[k % levels.size()];
    auto sys = make_unit_square_system(n, pairs[k / levels.size()]);
    reports[k] = infsup_report(*sys, n);
  });
  std::string csv = "element,n,h,beta,c_pg\n";
  json rows = json::array();
  for (const auto& r : reports) {
    csv += csv_line({to_string(r.pair), std::to_string(r.level), num(r.h), num(r.infsup_beta), num(r.c_pg)});
    rows.push_back({{"element", to_string(r.pair)}, {"n", r.level}, {"h", r.h}, {"beta", r.infsup_beta},
                    {"c_pg", r.c_pg}});
    std::cout << to_string(r.pair) << " n=" << r.level << ": beta = " << num(r.infsup_beta)
              << ", C_pg = " << num(r.c_pg) << '\n';
  }
  const fs::path dir = output_dir(j, cmd);
  atomic_write(dir / "infsup.csv", csv);
  write_json(dir / "infsup.json", {{"rows", rows}});
  return 0;
}

int cmd_stationary(const json& j) {
  const std::string cmd = "stationary";
  const ElementPair pair = element(j, cmd);
  const int n = get<int>(j, cmd, "n", 8);
  const double T = get<double>(j, cmd, "T", 1.0);
  const ManufacturedSolution m = mms_catalog(get<std::string>(j, cmd, "mms", "smooth"));
  auto sys = make_unit_square_system(n, pair);
  // stationary data of the manufactured pair at time T
  const VectorField f = [&m, T](double x, double y) {
    const auto lap = m.laplace_u(T, x, y);
    const auto gp = m.grad_p(T, x, y);
    return std::array<double, 2>{-lap[0] + gp[0], -lap[1] + gp[1]};
  };
  const StokesSolution st = solve_stationary(sys->load(f), *sys);
  const double eu = sys->sampler().velocity_l2_distance(st.u, sys->sampler().sample(m.velocity_at(T)));
  const double ep = sys->sampler().pressure_l2_distance(st.p, m.pressure_at(T));
  const fs::path dir = output_dir(j, cmd);
  atomic_write(dir / "velocity.csv", snapshot_csv(st.u));
  atomic_write(dir / "pressure.csv", snapshot_csv(st.p));
  write_json(dir / "stationary.json", {{"element", to_string(pair)},
                                       {"n", n},
                                       {"mms", m.id},
                                       {"T", T},
                                       {"velocity_l2_error", eu},
                                       {"pressure_l2_error", ep},
                                       {"divergence_l2", (sys->matrices().B * st.u).norm()}});
  std::cout << "stationary " << to_string(pair) << " n=" << n << ": ||u - u_h|| = " << num(eu)
            << ", ||p - p_h|| = " << num(ep) << '\n';
  return 0;
}

int run_study(const StudySpec& spec, const fs::path& dir, int jobs) {
  const ConvergenceReport r = convergence_study(spec, jobs);
  atomic_write(dir / "report.csv", report_csv(r));
  write_json(dir / "report.json", report_json(r, spec));
  for (const auto& row : r.rows)
    std::cout << to_string(r.axis) << " = " << num(row.resolution) << ": error " << num(row.error) << '\n';
  std::cout << "fitted rate " << num(r.fitted_rate) << '\n';
  if (!r.complete) throw NumericalFailure("experiments", "convergence_study", "study aborted: " + r.failure);
  return 0;
}

int cmd_ritz(const json& j, int jobs) {
  const std::string cmd = "ritz";
  StudySpec spec;
  spec.axis = StudyAxis::Ritz;
  spec.element = element(j, cmd);
  spec.mms = get<std::string>(j, cmd, "mms", "smooth");
  spec.T = get<double>(j, cmd, "T", 1.0);
  spec.h_levels = int_levels(j, cmd, "h_levels", {4, 8, 16, 32});
  return run_study(spec, output_dir(j, cmd), jobs);
}

int cmd_convergence(const json& j, int jobs) {
  json spec_json = j;
  spec_json.erase("seed");
  spec_json.erase("jobs");
  StudySpec spec = parse_study_spec(spec_json);
  const fs::path dir = spec.output_dir.empty() ? fs::path(".") : fs::path(spec.output_dir);
  return run_study(spec, dir, jobs);
}

TimeGrid grid_from(const json& j, const std::string& cmd, int M) {
  return make_time_grid(get<double>(j, cmd, "T", 1.0), M, get<double>(j, cmd, "grading", 1.0), assumptions(j, cmd));
}

int cmd_solve(const json& j) {
  const std::string cmd = "solve";
  const ElementPair pair = element(j, cmd);
  const int n = get<int>(j, cmd, "n", 8);
  const int w = get<int>(j, cmd, "w", 0);
  const TimeGrid grid = grid_from(j, cmd, get<int>(j, cmd, "M", 16));
  const TemporalBasis basis(w);
  const ManufacturedSolution m = mms_catalog(get<std::string>(j, cmd, "mms", "smooth"));
  const std::vector<double> snaps = get<std::vector<double>>(j, cmd, "snapshots", {grid.final_time()});
  for (double t : snaps)
    if (!(t > 0.0 && t <= grid.final_time())) bad(cmd, "snapshot times must lie in (0, T]");

  auto sys = make_unit_square_system(n, pair);
  const SpaceTimeSolution sol = solve_mms(m, *sys, grid, basis);
  const double err = error_linf_l2(sol, m, *sys);
  const fs::path dir = output_dir(j, cmd);
  json summary = trajectory_summary(sol, *sys);
  summary["element"] = to_string(pair);
  summary["n"] = n;
  summary["w"] = w;
  summary["mms"] = m.id;
  summary["velocity_error_linf_l2"] = err;
  json files = json::array();
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const Snapshot s = evaluate(sol, snaps[k]);
    const std::string stem = "snapshot_" + std::to_string(k);
    atomic_write(dir / (stem + "_velocity.csv"), snapshot_csv(s.u));
    atomic_write(dir / (stem + "_pressure.csv"), snapshot_csv(s.p));
    files.push_back({{"t", snaps[k]}, {"velocity", stem + "_velocity.csv"}, {"pressure", stem + "_pressure.csv"}});
  }
  summary["snapshots"] = files;
  write_json(dir / "trajectory.json", summary);
  std::cout << "solve " << to_string(pair) << " n=" << n << " M=" << grid.intervals() << " w=" << w
            << ": ||u - u_th||_Linf(L2) = " << num(err) << '\n';
  return 0;
}

int cmd_resolvent(const json& j, int jobs) {
  const std::string cmd = "resolvent";
  const ElementPair pair = element(j, cmd);
  const int n = get<int>(j, cmd, "n", 8);
  auto sys = make_unit_square_system(n, pair);
  ResolventProbe probe;
  probe.theta = get<double>(j, cmd, "theta", probe.theta);
  probe.angles = get<int>(j, cmd, "angles", probe.angles);
  probe.magnitudes = get<int>(j, cmd, "magnitudes", probe.magnitudes);
  probe.r_min = get<double>(j, cmd, "r_min", probe.r_min);
  probe.r_max = get<double>(j, cmd, "r_max", probe.r_max);

  std::optional<EigenResult> lap;
  const auto lambda0 = [&]() -> const EigenResult& {
    if (!lap) lap = laplacian_min_eigenpair(*sys);
    return *lap;
  };
  if (j.contains("nu")) {
    const json& v = j.at("nu");
    const std::string text = v.is_string() ? v.get<std::string>() : v.dump();
    if (text == "lambda0") {
      probe.nu = lambda0().eigenvalue;
    } else {
      try {
        std::size_t used = 0;
        probe.nu = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        bad(cmd, "nu must be a number or 'lambda0'");
      }
    }
  }

  const std::string load_kind = get<std::string>(j, cmd, "load", "eigenfunction");
  Vector load;
  if (load_kind == "eigenfunction") {
    load = sys->matrices().M * leray_project(stokes_min_eigenpair(*sys).eigenvector, *sys);
  } else if (load_kind == "random") {
    std::mt19937_64 rng(seed(j, cmd));
    std::normal_distribution<double> d;
    load.resize(sys->nu());
    for (Index i = 0; i < load.size(); ++i) load[i] = d(rng);
  } else if (load_kind == "smooth") {
    load = sys->load(mms_catalog("smooth").forcing_at(0.5));
  } else {
    bad(cmd, "load must be eigenfunction, random or smooth");
  }

  const SectorScan scan = sector_scan(probe, load, *sys, jobs);
  std::string csv = "re_z,im_z,phi,radius,ratio\n";
  for (const auto& s : scan.samples)
    csv += csv_line({num(s.z.real()), num(s.z.imag()), num(s.phi), num(s.radius), num(s.ratio)});
  const fs::path dir = output_dir(j, cmd);
  atomic_write(dir / "sector.csv", csv);
  json summary{{"element", to_string(pair)}, {"n", n},           {"theta", scan.theta},
               {"nu", scan.nu},             {"load", load_kind}, {"samples", scan.samples.size()},
               {"max_ratio", scan.max_ratio}, {"bound", scan.bound},
               {"within_bound", scan.max_ratio <= scan.bound + 1e-9}};
  if (lap) summary["lambda0_h"] = lap->eigenvalue;
  write_json(dir / "resolvent.json", summary);
  std::cout << "sector scan theta=" << num(scan.theta) << " nu=" << num(scan.nu) << ": max ratio "
            << num(scan.max_ratio) << " (bound " << num(scan.bound) << ", " << scan.samples.size() << " samples)\n";
  return 0;
}

struct TimeScan {
  ElementPair pair;
  int n;
  int w;
  std::vector<int> levels;
};

TimeScan time_scan(const json& j, const std::string& cmd, std::vector<int> fallback) {
  return {element(j, cmd), get<int>(j, cmd, "n", 8), get<int>(j, cmd, "w", 0),
          int_levels(j, cmd, "M_levels", std::move(fallback), "M")};
}

int cmd_maxreg(const json& j, int jobs, bool pressure) {
  const std::string cmd = pressure ? "pressure" : "maxreg";
  const TimeScan scan = time_scan(j, cmd, {8, 16, 32, 64, 128});
  const std::vector<double> ss =
      exponents(j, cmd, pressure ? std::vector<double>{1.0, INFINITY} : std::vector<double>{1.0, 2.0, INFINITY});
  const ManufacturedSolution m = mms_catalog(get<std::string>(j, cmd, "mms", "smooth"));
  const ForcingField f = [m](double t) { return m.forcing_at(t); };
  auto sys = make_unit_square_system(scan.n, scan.pair);
  const double h = std::sqrt(2.0) / scan.n;
  std::vector<TimeGrid> grids;
  for (int M : scan.levels) grids.push_back(grid_from(j, cmd, M));

  std::vector<std::vector<std::string>> lines(scan.levels.size());
  std::vector<json> rows(scan.levels.size());
  parallel_for(scan.levels.size(), jobs, [&](std::size_t k) {
    const SpaceTimeSolution sol =
        dg_solve(forcing_load(f, *sys), Vector::Zero(sys->nu()), grids[k], *sys, TemporalBasis(scan.w));
    json per_s = json::array();
    for (double s : ss) {
      if (pressure) {
        const PressureRegularity r = pressure_regularity(sol, f, s, *sys);
        lines[k].push_back(csv_line({cmd, num(h), std::to_string(scan.levels[k]), std::to_string(scan.w),
                                     exponent_string(s), num(r.grad_p), num(r.forcing), num(r.log_factor),
                                     num(r.log_ratio)}));
        per_s.push_back({{"s", exponent_string(s)}, {"grad_p", r.grad_p}, {"forcing", r.forcing},
                         {"log_factor", r.log_factor}, {"log_ratio", r.log_ratio}});
      } else {
        const RegularityFunctionals r = max_reg_functionals(sol, f, s, *sys);
        lines[k].push_back(csv_line({cmd, num(h), std::to_string(scan.levels[k]), std::to_string(scan.w),
                                     exponent_string(s), num(r.dt_u_total), num(r.a_h_u_total),
                                     num(r.delta_h_u_total), num(r.jump_total), num(r.grad_p_total), num(r.lhs),
                                     num(r.projected_forcing), num(r.log_factor), num(r.ratio), num(r.log_ratio),
                                     r.zero_initial ? "1" : "0"}));
        per_s.push_back({{"s", exponent_string(s)}, {"lhs", r.lhs}, {"projected_forcing", r.projected_forcing},
                         {"log_factor", r.log_factor}, {"ratio", r.ratio}, {"log_ratio", r.log_ratio},
                         {"zero_initial", r.zero_initial}});
      }
    }
    rows[k] = {{"M", scan.levels[k]}, {"tau", grids[k].tau_max()}, {"values", per_s}};
  });

  std::string csv = pressure ? "experiment,h,M,w,s,grad_p,forcing,log_factor,log_ratio\n"
                             : "experiment,h,M,w,s,dt_u,a_h_u,delta_h_u,jump,grad_p,lhs,projected_forcing,"
                               "log_factor,ratio,log_ratio,zero_initial\n";
  for (const auto& block : lines)
    for (const auto& l : block) csv += l;
  const fs::path dir = output_dir(j, cmd);
  atomic_write(dir / (cmd + ".csv"), csv);
  write_json(dir / (cmd + ".json"),
             {{"element", to_string(scan.pair)}, {"n", scan.n}, {"w", scan.w}, {"mms", m.id}, {"runs", rows}});
  for (const auto& r : rows) {
    std::cout << cmd << " M=" << r["M"].get<int>() << ':';
    for (const auto& v : r["values"]) std::cout << " s=" << v["s"].get<std::string>() << " log_ratio=" << num(v["log_ratio"].get<double>());
    std::cout << '\n';
  }
  return 0;
}

int cmd_smoothing(const json& j, int jobs) {
  const std::string cmd = "smoothing";
  const TimeScan scan = time_scan(j, cmd, {8, 16, 32});
  auto sys = make_unit_square_system(scan.n, scan.pair);
  const std::string kind = get<std::string>(j, cmd, "u0", "eigenfunction");
  Vector u0;
  if (kind == "eigenfunction") {
    u0 = leray_project(stokes_min_eigenpair(*sys).eigenvector, *sys);
  } else if (kind == "random") {
    std::mt19937_64 rng(seed(j, cmd));
    std::normal_distribution<double> d;
    Vector r(sys->nu());
    for (Index i = 0; i < r.size(); ++i) r[i] = d(rng);
    u0 = leray_project(r, *sys);
  } else if (kind == "mms") {
    u0 = initial_datum(mms_catalog("smooth").velocity_at(0.0), *sys);
  } else {
    bad(cmd, "u0 must be eigenfunction, random or mms");
  }
  std::vector<SmoothingProfile> profiles(scan.levels.size());
  std::vector<TimeGrid> grids;
  for (int M : scan.levels) grids.push_back(grid_from(j, cmd, M));
  parallel_for(scan.levels.size(), jobs,
               [&](std::size_t k) { profiles[k] = smoothing_profile(u0, grids[k], *sys, TemporalBasis(scan.w)); });
  std::string csv = "u0,M,m,t,value\n";
  json rows = json::array();
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    for (std::size_t m = 0; m < profiles[k].values.size(); ++m)
      csv += csv_line({kind, std::to_string(scan.levels[k]), std::to_string(m + 1), num(profiles[k].t[m]),
                       num(profiles[k].values[m])});
    rows.push_back({{"M", scan.levels[k]}, {"max", profiles[k].max}});
    std::cout << "smoothing u0=" << kind << " M=" << scan.levels[k] << ": max " << num(profiles[k].max) << '\n';
  }
  const fs::path dir = output_dir(j, cmd);
  atomic_write(dir / "smoothing.csv", csv);
  write_json(dir / "smoothing.json",
             {{"element", to_string(scan.pair)}, {"n", scan.n}, {"w", scan.w}, {"u0", kind}, {"runs", rows}});
  return 0;
}

int cmd_bestapprox(const json& j, int jobs) {
  const std::string cmd = "bestapprox";
  const ElementPair pair = element(j, cmd);
  const int w = get<int>(j, cmd, "w", 0);
  const ManufacturedSolution m = mms_catalog(get<std::string>(j, cmd, "mms", "smooth"));
  const std::vector<int> ns = int_levels(j, cmd, "h_levels", {8, 16, 32});
  const std::vector<int> Ms = int_levels(j, cmd, "M_levels", {8, 16, 32, 64});
  std::vector<TimeGrid> grids;
  for (int M : Ms) grids.push_back(grid_from(j, cmd, M));
  std::vector<std::shared_ptr<StokesSystem>> systems;
  for (int n : ns) systems.push_back(make_unit_square_system(n, pair));
  std::vector<BestApproxGap> gaps(ns.size() * Ms.size());
  parallel_for(gaps.size(), jobs, [&](std::size_t k) {
    const auto& sys = *systems[k / Ms.size()];
    const TimeGrid& g = grids[k % Ms.size()];
    const TemporalBasis basis(w);
    gaps[k] = best_approx_gap(solve_mms(m, sys, g, basis), m, sys, g, basis);
  });
  std::string csv = "n,M,h,tau,lhs,rhs_projection_term,log_factor,ratio\n";
  double worst = 0.0;
  for (std::size_t k = 0; k < gaps.size(); ++k) {
    const int n = ns[k / Ms.size()];
    const TimeGrid& g = grids[k % Ms.size()];
    csv += csv_line({std::to_string(n), std::to_string(g.intervals()), num(std::sqrt(2.0) / n), num(g.tau_max()),
                     num(gaps[k].lhs), num(gaps[k].rhs_projection_term), num(gaps[k].log_factor),
                     num(gaps[k].ratio)});
    worst = std::max(worst, gaps[k].ratio);
  }
  const fs::path dir = output_dir(j, cmd);
  atomic_write(dir / "bestapprox.csv", csv);
  write_json(dir / "bestapprox.json",
             {{"element", to_string(pair)}, {"w", w}, {"mms", m.id}, {"h_levels", ns}, {"M_levels", Ms},
              {"max_ratio", worst}});
  std::cout << "best approximation: max ratio " << num(worst) << " over " << gaps.size() << " runs\n";
  return 0;
}

int dispatch(const std::string& cmd, const Flags& f) {
  const json j = load_config(cmd, f);
  int jobs = f.jobs;
  if (jobs <= 0) jobs = get<int>(j, cmd, "jobs", 0);
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (cmd == "mesh") return cmd_mesh(j);
  if (cmd == "infsup") return cmd_infsup(j, jobs);
  if (cmd == "stationary") return cmd_stationary(j);
  if (cmd == "ritz") return cmd_ritz(j, jobs);
  if (cmd == "solve") return cmd_solve(j);
  if (cmd == "resolvent") return cmd_resolvent(j, jobs);
  if (cmd == "maxreg") return cmd_maxreg(j, jobs, false);
  if (cmd == "pressure") return cmd_maxreg(j, jobs, true);
  if (cmd == "smoothing") return cmd_smoothing(j, jobs);
  if (cmd == "convergence") return cmd_convergence(j, jobs);
  if (cmd == "bestapprox") return cmd_bestapprox(j, jobs);
  bad(cmd, "unknown subcommand");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient Stokes dG solver and diagnostics"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"mesh", "write the unit square mesh"},
      {"infsup", "inf-sup and pressure-gradient constants over refinement levels"},
      {"stationary", "stationary Stokes solve for manufactured data"},
      {"ritz", "Stokes Ritz projection convergence study"},
      {"solve", "fully discrete dG solve for a manufactured solution"},
      {"resolvent", "discrete resolvent sector scan"},
      {"maxreg", "discrete maximal regularity functionals"},
      {"smoothing", "smoothing profile of the homogeneous problem"},
      {"pressure", "pressure regularity functionals"},
      {"convergence", "convergence study from a study spec"},
      {"bestapprox", "best-approximation ratio scan"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON config file (flat keys)");
    sub->add_option("--out", flags.out, "output directory (mesh: file or directory)");
    sub->add_option("--jobs", flags.jobs, "worker threads (default: logical cores)");
    sub->add_option("--seed", flags.seed, "seed for randomized data");
    sub->add_option("--n", flags.n, "mesh subdivisions per side");
    sub->add_option("--M", flags.M, "number of time intervals");
    sub->add_option("--w", flags.w, "temporal degree (0 or 1)");
    sub->add_option("--element", flags.element, "taylor-hood | mini");
    sub->add_option("--T", flags.T, "final time");
    sub->add_option("--grading", flags.grading, "time grid grading exponent");
    sub->add_option("--s", flags.s, "time exponents, e.g. 1,2,inf");
    sub->add_option("--theta", flags.theta, "sector half-angle");
    sub->add_option("--nu", flags.nu, "sector shift (number or lambda0)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, flags);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: cli::" << cmd << ": " << e.what() << '\n';
    return 2;
  }
}
