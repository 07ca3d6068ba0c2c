#include "apmc/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "apmc/goldstein_taylor.hpp"
#include "apmc/radiative_transport.hpp"
#include "apmc/reference_solvers.hpp"

namespace apmc {

using nlohmann::json;

Norm parse_norm(std::string_view s) {
  if (s == "L1" || s == "l1") return Norm::L1;
  if (s == "Linf" || s == "linf") return Norm::Linf;
  throw std::invalid_argument("norm: expected L1 or Linf, got '" + std::string(s) + "'");
}

Field parse_field(std::string_view s) {
  if (s == "rho") return Field::rho;
  if (s == "j") return Field::j;
  throw std::invalid_argument("field: expected rho or j, got '" + std::string(s) + "'");
}

// ---- error norms -------------------------------------------------------------

namespace {

void require_same_grid(const SpatialGrid& a, const SpatialGrid& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("compute_error: grid mismatch");
}

double reduce(const std::vector<double>& diff, const SpatialGrid& grid, Norm norm) {
  double acc = 0.0;
  if (norm == Norm::L1) {
    for (double d : diff) acc += d;
    return acc * grid.cell_volume();
  }
  for (double d : diff) {
    if (std::isnan(d)) return d;
    acc = std::max(acc, d);
  }
  return acc;
}

}  // namespace

double compute_error(const GridFunction& a, const GridFunction& b, Norm norm) {
  require_same_grid(a.grid, b.grid);
  std::vector<double> diff(a.values.size());
  for (std::size_t c = 0; c < diff.size(); ++c) diff[c] = std::abs(a[c] - b[c]);
  return reduce(diff, a.grid, norm);
}

double compute_error(const Snapshot& a, const Snapshot& b, Norm norm, Field field) {
  if (field == Field::rho) return compute_error(a.rho, b.rho, norm);
  require_same_grid(a.jx.grid, b.jx.grid);
  const bool two_d = !a.jy.values.empty();
  std::vector<double> diff(a.jx.values.size());
  for (std::size_t c = 0; c < diff.size(); ++c) {
    const double dx = a.jx[c] - b.jx[c];
    const double dy = two_d ? a.jy[c] - b.jy[c] : 0.0;
    diff[c] = two_d ? std::hypot(dx, dy) : std::abs(dx);
  }
  return reduce(diff, a.jx.grid, norm);
}

double compute_error(const std::filesystem::path& run_csv, const std::filesystem::path& ref_csv,
                     Norm norm, Field field) {
  return compute_error(read_snapshot_csv(run_csv), read_snapshot_csv(ref_csv), norm, field);
}

// ---- CSV -------------------------------------------------------------------

void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& s) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const SpatialGrid& g = s.rho.grid;
  const bool two_d = g.dimension() == 2;
  std::fputs(two_d ? "x,y,rho,jx,jy\n" : "x,rho,j\n", f);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto p = g.center(c);
    if (two_d)
      std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p[0], p[1], s.rho[c], s.jx[c], s.jy[c]);
    else
      std::fprintf(f, "%.17g,%.17g,%.17g\n", p[0], s.rho[c], s.jx[c]);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("cannot write " + path.string());
}

namespace {

std::vector<double> parse_row(const std::string& line, std::size_t columns,
                              const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str()) throw std::invalid_argument(where + ": not a number: '" + cell + "'");
    out.push_back(v);
  }
  if (out.size() != columns) throw std::invalid_argument(where + ": wrong column count");
  return out;
}

/// Sorted distinct centre coordinates.
std::vector<double> distinct(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::pair<double, double> bounds_from_centres(const std::vector<double>& c, const std::string& where) {
  if (c.size() < 2) throw std::invalid_argument(where + ": need at least two cells per axis");
  const double h = (c.back() - c.front()) / static_cast<double>(c.size() - 1);
  return {c.front() - 0.5 * h, c.back() + 0.5 * h};
}

}  // namespace

Snapshot read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  const std::string where = path.string();
  if (!in) throw std::invalid_argument(where + ": cannot open");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  bool two_d;
  if (header == "x,rho,j") two_d = false;
  else if (header == "x,y,rho,jx,jy") two_d = true;
  else throw std::invalid_argument(where + ": unrecognised header '" + header + "'");
  const std::size_t columns = two_d ? 5 : 3;
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(parse_row(line, columns, where + ":" + std::to_string(rows.size() + 2)));
  }
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    xs.push_back(r[0]);
    if (two_d) ys.push_back(r[1]);
  }
  xs = distinct(xs);
  const auto [x0, x1] = bounds_from_centres(xs, where);
  SpatialGrid grid;
  if (two_d) {
    ys = distinct(ys);
    const auto [y0, y1] = bounds_from_centres(ys, where);
    grid = SpatialGrid::plane(x0, x1, xs.size(), y0, y1, ys.size());
  } else {
    grid = SpatialGrid::line(x0, x1, xs.size());
  }
  if (rows.size() != grid.cell_count())
    throw std::invalid_argument(where + ": rows do not form a uniform grid");
  Snapshot s;
  s.rho = GridFunction(grid);
  s.jx = GridFunction(grid);
  if (two_d) s.jy = GridFunction(grid);
  const double tol = 1e-9 * std::max(grid.dx(), grid.dy());
  for (std::size_t c = 0; c < rows.size(); ++c) {
    const auto& r = rows[c];
    const auto p = grid.center(c);
    if (std::abs(r[0] - p[0]) > tol || (two_d && std::abs(r[1] - p[1]) > tol))
      throw std::invalid_argument(where + ": rows do not form a uniform grid");
    s.rho[c] = r[two_d ? 2 : 1];
    s.jx[c] = r[two_d ? 3 : 2];
    if (two_d) s.jy[c] = r[4];
  }
  return s;
}

// ---- Fick flux ---------------------------------------------------------------

void fick_flux(const GridFunction& rho, double diffusion, const std::vector<double>& sigma_s,
               const BoundaryConditions& bc, GridFunction& jx, GridFunction& jy) {
  const SpatialGrid& g = rho.grid;
  const bool two_d = g.dimension() == 2;
  jx = GridFunction(g);
  jy = two_d ? GridFunction(g) : GridFunction();
  if (!two_d) jy.grid = g;
  const auto k = [&](std::size_t c) { return diffusion / sigma_s[c]; };
  const auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
  using K = BoundarySide::Kind;

  // Flux through the face between cell a and its neighbour along one axis;
  // `side` is used when the neighbour lies outside the domain.
  const auto face = [&](std::size_t a, std::optional<std::size_t> b, double h,
                        const BoundarySide& side, double sign) {
    if (b) return -harmonic(k(a), k(*b)) * sign * (rho[*b] - rho[a]) / h;
    switch (side.kind) {
      case K::dirichlet:
        return -k(a) * sign * (side.rho - rho[a]) / (0.5 * h);
      case K::reflecting:
      case K::periodic:
        return 0.0;
    }
    return 0.0;
  };

  const std::size_t nx = g.nx(), ny = two_d ? g.ny() : 1;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      std::optional<std::size_t> west, east;
      if (i > 0) west = g.index(i - 1, j);
      else if (bc.left.kind == K::periodic) west = g.index(nx - 1, j);
      if (i + 1 < nx) east = g.index(i + 1, j);
      else if (bc.right.kind == K::periodic) east = g.index(0, j);
      jx[c] = 0.5 * (face(c, east, g.dx(), bc.right, 1.0) + face(c, west, g.dx(), bc.left, -1.0));
      if (!two_d) continue;
      std::optional<std::size_t> south, north;
      if (j > 0) south = g.index(i, j - 1);
      else if (bc.bottom.kind == K::periodic) south = g.index(i, ny - 1);
      if (j + 1 < ny) north = g.index(i, j + 1);
      else if (bc.top.kind == K::periodic) north = g.index(i, 0);
      jy[c] = 0.5 * (face(c, north, g.dy(), bc.top, 1.0) + face(c, south, g.dy(), bc.bottom, -1.0));
    }
}

// ---- particle runs -----------------------------------------------------------

namespace {

/// Cells touching a dirichlet side.
std::vector<std::size_t> dirichlet_cells(const SpatialGrid& g, const BoundaryConditions& bc) {
  using K = BoundarySide::Kind;
  std::vector<std::size_t> out;
  const std::size_t nx = g.nx(), ny = g.dimension() == 2 ? g.ny() : 1;
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const bool edge = (i == 0 && bc.left.kind == K::dirichlet) ||
                        (i + 1 == nx && bc.right.kind == K::dirichlet) ||
                        (g.dimension() == 2 && j == 0 && bc.bottom.kind == K::dirichlet) ||
                        (g.dimension() == 2 && j + 1 == ny && bc.top.kind == K::dirichlet);
      if (edge) out.push_back(g.index(i, j));
    }
  return out;
}

/// Ghost layers deep enough that no particle crosses the whole ghost region
/// in one step.
std::size_t ghost_layers(const Scenario& s, const SpatialGrid& g, const CoefficientField& coef,
                         double dt) {
  double reach = 0.0;
  for (std::size_t c : dirichlet_cells(g, s.boundary)) {
    double e = 0.0;
    if (s.model == Model::gt) {
      const gt::GtParams p{coef.eps[c], dt};
      switch (s.scheme) {
        case Scheme::standard_mc: e = gt::standard_excursion(p); break;
        case Scheme::heat_walk: e = gt::heat_walk_excursion(dt); break;
        default: e = gt::apmc_excursion(p); break;
      }
    } else {
      const rt::LocalCoefficients lc{coef.eps[c], coef.sigma_s[c], coef.sigma_a[c]};
      switch (s.scheme) {
        case Scheme::standard_mc: e = rt::standard_excursion(lc, dt); break;
        case Scheme::heat_walk:
          e = rt::heat_walk_excursion(lc, dt, geometry_of(velocity_model(s.model)));
          break;
        // the micro-macro noise per axis is the APMC amplitude times sqrt(D) < 1
        default: e = rt::apmc_excursion(lc, dt, s.noise_speed); break;
      }
    }
    reach = std::max(reach, e);
  }
  const double h = g.dimension() == 2 ? std::min(g.dx(), g.dy()) : g.dx();
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(reach / h)));
}

struct Stepper {
  const Scenario& s;
  const SpatialGrid& grid;
  const CoefficientField& coef;
  BoundaryContext boundary;

  void operator()(ParticleEnsemble& ens, double dt, const StepContext& ctx) const {
    if (s.model == Model::gt) {
      const gt::GtParams p{coef.eps[0], dt};
      switch (s.scheme) {
        case Scheme::standard_mc: gt::standard_step(ens, p, ctx, &boundary); return;
        case Scheme::apmc: gt::apmc_step(ens, p, ctx, &boundary); return;
        case Scheme::heat_walk: gt::heat_random_walk_step(ens, dt, ctx, &boundary); return;
        default: break;
      }
    } else {
      const rt::RtParams p{dt, geometry_of(velocity_model(s.model)), &grid, &coef, s.noise_speed};
      switch (s.scheme) {
        case Scheme::standard_mc: rt::standard_step(ens, p, ctx, &boundary); return;
        case Scheme::apmc: rt::apmc_step(ens, p, ctx, &boundary); return;
        case Scheme::apmc_micromacro: rt::micro_macro_step(ens, p, ctx, &boundary); return;
        case Scheme::heat_walk: rt::heat_walk_step(ens, p, ctx, &boundary); return;
        default: break;
      }
    }
    throw std::logic_error("stepper: not a particle scheme");
  }
};

/// Density and flux of the current ensemble. The flux is Fick's law for the
/// limiting walk (its labels carry no flux) and NaN where eps = 0.
CellStats measure(const Scenario& s, const ParticleEnsemble& ens, const SpatialGrid& g,
                  const CoefficientField& coef) {
  const bool flux_defined =
      std::all_of(coef.eps.begin(), coef.eps.end(), [](double e) { return e > 0.0; });
  if (s.scheme != Scheme::heat_walk && flux_defined) return cell_stats(ens, g, coef.eps);
  CellStats st;
  st.rho = histogram_density(ens, g);
  st.accum_count = 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (s.scheme == Scheme::heat_walk) {
    GridFunction rho(g), jx, jy;
    rho.values = st.rho;
    fick_flux(rho, s.diffusion(), coef.sigma_s, s.boundary, jx, jy);
    st.jx = jx.values;
    if (g.dimension() == 2) st.jy = jy.values;
  } else {
    st.jx.assign(g.cell_count(), nan);
    if (g.dimension() == 2) st.jy.assign(g.cell_count(), nan);
  }
  return st;
}

Snapshot to_snapshot(double t, const CellStats& st, const SpatialGrid& g) {
  Snapshot snap;
  snap.time = t;
  snap.rho = GridFunction(g);
  snap.rho.values = st.rho;
  snap.jx = GridFunction(g);
  snap.jx.values = st.jx;
  if (g.dimension() == 2) {
    snap.jy = GridFunction(g);
    snap.jy.values = st.jy;
  } else {
    snap.jy.grid = g;
  }
  return snap;
}

/// Steps to reach `target` from `t`, at most dt each.
std::size_t segment_steps(double t, double target, double dt) {
  const double seg = target - t;
  if (!(seg > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(seg / dt - 1e-9));
}

}  // namespace

ReplicateResult run_replicate(const Scenario& s, std::size_t replicate) {
  s.validate();
  if (!is_particle_scheme(s.scheme)) throw std::invalid_argument("run_replicate: not a particle scheme");
  const std::uint64_t seed = replicate_seed(s.seed, replicate);
  const SpatialGrid grid = s.build_grid();
  const CoefficientField coef = s.coefficient_field(grid);
  const GridFunction rho0 = s.initial_density(grid);
  const VelocityModel vm = velocity_model(s.model);
  const double dt = s.dt.value(grid);

  const double mass = rho0.integral();
  ParticleEnsemble ens = mass > 0.0
                             ? sample_from_density(rho0, s.particles, vm, seed)
                             : sample_with_mass(rho0, *s.mass_reference / double(s.particles), vm, seed);

  ReplicateResult out;
  out.particle_mass = ens.particle_mass();
  out.ghost_layers = ghost_layers(s, grid, coef, dt);
  const Stepper step{s, grid, coef, {&grid, s.boundary, out.ghost_layers}};
  apply_boundary(ens, grid, s.boundary, out.ghost_layers, seed, 0);

  const bool averaging = s.time_average_start.has_value();
  const double avg_from = averaging ? *s.time_average_start : 0.0;
  CellStats acc;
  double t = 0.0;
  std::uint64_t epoch = 1;
  if (averaging && avg_from <= 0.0) time_average_accumulate(acc, measure(s, ens, grid, coef));
  for (double target : s.snapshot_times()) {
    const std::size_t n = segment_steps(t, target, dt);
    const double h = n ? (target - t) / double(n) : 0.0;
    const double t_start = t;
    for (std::size_t k = 1; k <= n; ++k) {
      step(ens, h, {seed, epoch++, s.workers});
      t = k == n ? target : t_start + double(k) * h;
      ++out.steps;
      if (averaging && t >= avg_from * (1.0 - 1e-12))
        time_average_accumulate(acc, measure(s, ens, grid, coef));
    }
    t = target;
    const bool use_avg = averaging && acc.accum_count > 0;
    out.snapshots.push_back(to_snapshot(t, use_avg ? acc : measure(s, ens, grid, coef), grid));
  }
  out.final_live_particles = ens.live_count();
  return out;
}

// ---- deterministic runs ------------------------------------------------------

std::vector<Snapshot> run_deterministic(const Scenario& s, Scheme scheme,
                                        const SolverOptions& o) {
  if (is_particle_scheme(scheme)) throw std::invalid_argument("run_deterministic: particle scheme");
  const SpatialGrid coarse = s.build_grid();
  GridSpec fine_spec = s.grid;
  fine_spec.nx *= o.refine;
  fine_spec.ny *= o.refine;
  const SpatialGrid fine = fine_spec.build();
  const CoefficientField coef = s.coefficient_field(fine);
  const GridFunction rho0 = s.initial_density(fine);
  const auto times = s.snapshot_times();

  std::vector<Snapshot> fine_out;
  const auto push = [&](double t, const GridFunction& rho, const GridFunction& jx,
                        const GridFunction& jy) { fine_out.push_back({t, rho, jx, jy}); };

  if (scheme == Scheme::kinetic_ref) {
    ref::KineticProblem problem{velocity_model(s.model), fine, coef, s.boundary, o.velocity_nodes};
    GridFunction none;
    none.grid = fine;
    if (o.steady) {
      ref::SteadyOptions so;
      so.interface = o.interface;
      const auto sol = ref::kinetic_steady_solve(problem, so);
      for (double t : times) push(t, sol.rho, sol.j, none);
    } else {
      ref::KineticState state = ref::equilibrium_state(problem, rho0);
      const double dt = o.dt_factor * ref::kinetic_max_dt(problem);
      for (double t : times) {
        ref::kinetic_upwind_advance(state, problem, t, dt);
        push(t, ref::density(state, fine), ref::flux(state, problem), none);
      }
    }
  } else {
    const auto problem = ref::diffusion_problem(fine, s.diffusion(), coef, s.boundary);
    const double dt = o.dt_factor * ref::heat_max_dt(problem);
    GridFunction rho = rho0, jx, jy;
    if (o.steady) {
      rho = ref::heat_fd_steady(problem, rho0, dt, o.steady_tolerance, o.steady_max_time);
      fick_flux(rho, s.diffusion(), coef.sigma_s, s.boundary, jx, jy);
      for (double t : times) push(t, rho, jx, jy);
    } else {
      double t_prev = 0.0;
      for (double t : times) {
        rho = ref::heat_fd_solve(problem, rho, t - t_prev, dt);
        t_prev = t;
        fick_flux(rho, s.diffusion(), coef.sigma_s, s.boundary, jx, jy);
        push(t, rho, jx, jy);
      }
    }
  }

  std::vector<Snapshot> out;
  for (const Snapshot& f : fine_out) {
    Snapshot c;
    c.time = f.time;
    c.rho = ref::restrict_to(f.rho, coarse);
    c.jx = ref::restrict_to(f.jx, coarse);
    if (coarse.dimension() == 2) c.jy = ref::restrict_to(f.jy, coarse);
    else c.jy.grid = coarse;
    out.push_back(std::move(c));
  }
  return out;
}

// ---- report ------------------------------------------------------------------

ErrorStats error_stats(std::vector<double> values) {
  ErrorStats st;
  st.values = std::move(values);
  const double n = static_cast<double>(st.values.size());
  if (st.values.empty()) return st;
  for (double v : st.values) st.mean += v / n;
  if (st.values.size() > 1) {
    double ss = 0.0;
    for (double v : st.values) ss += (v - st.mean) * (v - st.mean);
    st.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return st;
}

namespace {

/// JSON has no NaN; non-finite numbers become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json stats_json(const ErrorStats& st) {
  json values = json::array();
  for (double v : st.values) values.push_back(number(v));
  return {{"mean", number(st.mean)}, {"stderr", number(st.std_error)}, {"values", values}};
}

std::string time_tag(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

Snapshot mean_snapshot(const std::vector<std::vector<Snapshot>>& reps, std::size_t k) {
  Snapshot m = reps.front()[k];
  const double n = static_cast<double>(reps.size());
  for (std::size_t r = 1; r < reps.size(); ++r) {
    const Snapshot& s = reps[r][k];
    for (std::size_t c = 0; c < m.rho.values.size(); ++c) {
      m.rho[c] += s.rho[c];
      m.jx[c] += s.jx[c];
      if (!m.jy.values.empty()) m.jy[c] += s.jy[c];
    }
  }
  for (auto* f : {&m.rho, &m.jx, &m.jy})
    for (double& v : f->values) v /= n;
  return m;
}

}  // namespace

json to_json(const ComparisonReport& r) {
  json outputs = json::array();
  for (const auto& o : r.outputs)
    outputs.push_back({{"time", o.time},
                       {"rho", {{"L1", stats_json(o.rho_l1)}, {"Linf", stats_json(o.rho_linf)}}},
                       {"j", {{"L1", stats_json(o.j_l1)}, {"Linf", stats_json(o.j_linf)}}}});
  json j{{"scenario", r.scenario},
         {"scheme", r.scheme},
         {"reference_scheme", r.reference_scheme.empty() ? json(nullptr) : json(r.reference_scheme)},
         {"particles", r.particles},
         {"particle_mass", number(r.particle_mass)},
         {"replicates", r.replicates},
         {"replicate_seeds", r.replicate_seeds},
         {"final_live_particles", r.final_live_particles},
         {"dt", r.dt},
         {"steps", r.steps},
         {"runtime_seconds", r.runtime_seconds},
         {"outputs", outputs}};
  return j;
}

RunResult run_scenario(const Scenario& s, const RunOptions& options) {
  s.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  ComparisonReport& rep = result.report;
  rep.scenario = s.name;
  rep.scheme = to_string(s.scheme);
  rep.particles = s.particles;
  rep.dt = s.dt.value(s.build_grid());

  if (is_particle_scheme(s.scheme)) {
    for (std::size_t r = 0; r < s.replicates; ++r) {
      ReplicateResult rr = run_replicate(s, r);
      rep.particle_mass = rr.particle_mass;
      rep.steps = rr.steps;
      rep.final_live_particles.push_back(rr.final_live_particles);
      rep.replicate_seeds.push_back(replicate_seed(s.seed, r));
      result.replicates.push_back(std::move(rr.snapshots));
    }
  } else {
    // Deterministic runs have a single "replicate".
    result.replicates.push_back(run_deterministic(s, s.scheme, s.solver));
  }
  rep.replicates = result.replicates.size();
  const std::size_t n_times = s.snapshot_times().size();
  for (std::size_t k = 0; k < n_times; ++k) result.mean.push_back(mean_snapshot(result.replicates, k));

  if (s.reference) {
    rep.reference_scheme = to_string(s.reference->scheme);
    result.reference = run_deterministic(s, s.reference->scheme, s.reference->options);
    for (std::size_t k = 0; k < n_times; ++k) {
      std::vector<double> rl1, rli, jl1, jli;
      for (const auto& reps : result.replicates) {
        rl1.push_back(compute_error(reps[k], result.reference[k], Norm::L1, Field::rho));
        rli.push_back(compute_error(reps[k], result.reference[k], Norm::Linf, Field::rho));
        jl1.push_back(compute_error(reps[k], result.reference[k], Norm::L1, Field::j));
        jli.push_back(compute_error(reps[k], result.reference[k], Norm::Linf, Field::j));
      }
      rep.outputs.push_back({result.mean[k].time, error_stats(rl1), error_stats(rli),
                             error_stats(jl1), error_stats(jli)});
    }
  } else {
    for (std::size_t k = 0; k < n_times; ++k) rep.outputs.push_back({result.mean[k].time, {}, {}, {}, {}});
  }
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (options.out_dir) {
    const auto& dir = *options.out_dir;
    std::filesystem::create_directories(dir);
    json report = to_json(rep);
    for (std::size_t k = 0; k < n_times; ++k) {
      const std::string tag = time_tag(result.mean[k].time);
      const auto main = dir / (rep.scheme + "_t" + tag + ".csv");
      write_snapshot_csv(main, result.mean[k]);
      result.files.push_back(main);
      report["outputs"][k]["csv"] = main.filename().string();
      if (result.replicates.size() > 1) {
        json reps = json::array();
        for (std::size_t r = 0; r < result.replicates.size(); ++r) {
          const auto p = dir / (rep.scheme + "_r" + std::to_string(r) + "_t" + tag + ".csv");
          write_snapshot_csv(p, result.replicates[r][k]);
          result.files.push_back(p);
          reps.push_back(p.filename().string());
        }
        report["outputs"][k]["replicate_csv"] = reps;
      }
      if (s.reference) {
        const auto p = dir / ("reference_" + rep.reference_scheme + "_t" + tag + ".csv");
        write_snapshot_csv(p, result.reference[k]);
        result.files.push_back(p);
        report["outputs"][k]["reference_csv"] = p.filename().string();
      }
    }
    report["scenario_definition"] = json::parse(serialize_scenario(s));
    const auto rp = dir / "report.json";
    std::ofstream(rp) << report.dump(2) << '\n';
    result.files.push_back(rp);
  }
  return result;
}

}  // namespace apmc
