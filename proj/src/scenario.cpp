#include "apmc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace apmc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

/// Reads the keys of one JSON object and complains about anything left over.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "scenario" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return join(path_, key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = require(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const std::string& key) {
    const json& v = require(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) fail(path(key), "must be nonnegative");
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x >= 0 && x == std::floor(x) && x < 1.8e19) return static_cast<std::uint64_t>(x);
    }
    fail(path(key), "expected a nonnegative integer");
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    return has(key) ? count(key) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = require(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }

  const json& require(const std::string& key) {
    if (!has(key)) fail(path(key), "missing");
    return raw(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) fail(path(it.key()), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Enum, std::size_t N>
Enum lookup(const std::array<std::pair<const char*, Enum>, N>& table, std::string_view s,
            const std::string& path) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  std::string allowed;
  for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  fail(path, "unknown value '" + std::string(s) + "' (expected one of: " + allowed + ")");
}

template <class Enum, std::size_t N>
const char* name_of(const std::array<std::pair<const char*, Enum>, N>& table, Enum e) {
  for (const auto& [name, value] : table)
    if (value == e) return name;
  return "?";
}

constexpr std::array<std::pair<const char*, Model>, 3> kModels{
    {{"gt", Model::gt}, {"rt1d", Model::rt1d}, {"rt2d", Model::rt2d}}};
constexpr std::array<std::pair<const char*, Scheme>, 6> kSchemes{{
    {"standard_mc", Scheme::standard_mc},
    {"apmc", Scheme::apmc},
    {"apmc_micromacro", Scheme::apmc_micromacro},
    {"heat_walk", Scheme::heat_walk},
    {"kinetic_ref", Scheme::kinetic_ref},
    {"diffusion_ref", Scheme::diffusion_ref},
}};
constexpr std::array<std::pair<const char*, DtRule::Kind>, 3> kDtKinds{
    {{"absolute", DtRule::Kind::absolute}, {"dx", DtRule::Kind::dx}, {"dx2", DtRule::Kind::dx2}}};
constexpr std::array<std::pair<const char*, Shape::Kind>, 4> kShapes{{{"all", Shape::Kind::all},
                                                                      {"interval", Shape::Kind::interval},
                                                                      {"box", Shape::Kind::box},
                                                                      {"circle", Shape::Kind::circle}}};
constexpr std::array<std::pair<const char*, BoundarySide::Kind>, 3> kSides{
    {{"periodic", BoundarySide::Kind::periodic},
     {"dirichlet", BoundarySide::Kind::dirichlet},
     {"reflecting", BoundarySide::Kind::reflecting}}};
constexpr std::array<std::pair<const char*, rt::NoiseSpeed>, 2> kNoise{
    {{"unscaled", rt::NoiseSpeed::unscaled}, {"scaled", rt::NoiseSpeed::scaled}}};
constexpr std::array<std::pair<const char*, ref::InterfaceForm>, 2> kInterface{
    {{"conservative", ref::InterfaceForm::conservative},
     {"nonconservative", ref::InterfaceForm::nonconservative}}};

// ---- reading ---------------------------------------------------------------

Shape read_shape(ObjectReader& r) {
  Shape s;
  s.kind = lookup(kShapes, r.string("shape"), r.path("shape"));
  switch (s.kind) {
    case Shape::Kind::all:
      break;
    case Shape::Kind::interval:
      s.x0 = r.number("x0");
      s.x1 = r.number("x1");
      break;
    case Shape::Kind::box:
      s.x0 = r.number("x0");
      s.x1 = r.number("x1");
      s.y0 = r.number("y0");
      s.y1 = r.number("y1");
      break;
    case Shape::Kind::circle:
      s.cx = r.number("cx");
      s.cy = r.number("cy");
      s.r = r.number("r");
      break;
  }
  return s;
}

BoundarySide read_side(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  BoundarySide side;
  side.kind = lookup(kSides, r.string("kind"), r.path("kind"));
  if (side.kind == BoundarySide::Kind::dirichlet) side.rho = r.number("rho");
  r.finish();
  return side;
}

SolverOptions read_solver(ObjectReader& r) {
  SolverOptions o;
  o.refine = r.count("refine", o.refine);
  o.dt_factor = r.number("dt_factor", o.dt_factor);
  o.velocity_nodes = r.count("velocity_nodes", o.velocity_nodes);
  o.steady = r.boolean("steady", o.steady);
  if (r.has("interface"))
    o.interface = lookup(kInterface, r.string("interface"), r.path("interface"));
  o.steady_tolerance = r.number("steady_tolerance", o.steady_tolerance);
  o.steady_max_time = r.number("steady_max_time", o.steady_max_time);
  return o;
}

template <class Region, class Fill>
std::vector<Region> read_regions(ObjectReader& parent, const std::string& key, Fill fill) {
  std::vector<Region> out;
  if (!parent.has(key)) return out;
  const json& arr = parent.raw(key);
  const std::string path = parent.path(key);
  if (!arr.is_array()) fail(path, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    ObjectReader r(arr[i], indexed(path, i));
    Region region;
    region.shape = read_shape(r);
    fill(r, region);
    r.finish();
    out.push_back(region);
  }
  return out;
}

Scenario from_json(const json& root) {
  ObjectReader r(root, "");
  Scenario s;
  s.name = r.string("name", "");
  s.description = r.string("description", "");
  s.model = lookup(kModels, r.string("model"), "model");
  s.scheme = lookup(kSchemes, r.string("scheme"), "scheme");

  {
    ObjectReader g(r.require("grid"), "grid");
    s.grid.x0 = g.number("x0");
    s.grid.x1 = g.number("x1");
    s.grid.nx = g.count("nx");
    if (g.has("ny") || g.has("y0") || g.has("y1")) {
      s.grid.y0 = g.number("y0");
      s.grid.y1 = g.number("y1");
      s.grid.ny = g.count("ny");
    }
    g.finish();
  }
  {
    ObjectReader d(r.require("dt"), "dt");
    s.dt.kind = lookup(kDtKinds, d.string("rule"), "dt.rule");
    s.dt.c = d.number("c");
    d.finish();
  }
  s.final_time = r.number("final_time");
  if (r.has("output_times")) {
    const json& arr = r.raw("output_times");
    if (!arr.is_array()) fail("output_times", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      if (!arr[i].is_number()) fail(indexed("output_times", i), "expected a number");
      s.output_times.push_back(arr[i].get<double>());
    }
  }
  s.particles = r.count("particles");
  if (r.has("mass_reference")) s.mass_reference = r.number("mass_reference");
  s.seed = r.count("seed", s.seed);
  s.replicates = r.count("replicates", s.replicates);

  s.initial = read_regions<DensityRegion>(r, "initial", [](ObjectReader& rr, DensityRegion& d) {
    d.rho = rr.number("rho");
  });
  s.coefficients =
      read_regions<CoefficientRegion>(r, "coefficients", [](ObjectReader& rr, CoefficientRegion& c) {
        c.eps = rr.number("eps");
        c.sigma_s = rr.number("sigma_s", 1.0);
        c.sigma_a = rr.number("sigma_a", 0.0);
      });

  if (r.has("boundary")) {
    ObjectReader b(r.raw("boundary"), "boundary");
    BoundaryConditions bc = BoundaryConditions::all_periodic();
    if (b.has("left")) bc.left = read_side(b.raw("left"), "boundary.left");
    if (b.has("right")) bc.right = read_side(b.raw("right"), "boundary.right");
    if (b.has("bottom")) bc.bottom = read_side(b.raw("bottom"), "boundary.bottom");
    if (b.has("top")) bc.top = read_side(b.raw("top"), "boundary.top");
    b.finish();
    s.boundary = bc;
  }
  if (r.has("solver")) {
    ObjectReader o(r.raw("solver"), "solver");
    s.solver = read_solver(o);
    o.finish();
  }
  if (r.has("reference")) {
    ObjectReader o(r.raw("reference"), "reference");
    ReferenceSpec spec;
    spec.scheme = lookup(kSchemes, o.string("scheme"), "reference.scheme");
    spec.options = read_solver(o);
    o.finish();
    s.reference = spec;
  }
  if (r.has("time_average")) {
    ObjectReader o(r.raw("time_average"), "time_average");
    s.time_average_start = o.number("start_time");
    o.finish();
  }
  if (r.has("noise_speed")) s.noise_speed = lookup(kNoise, r.string("noise_speed"), "noise_speed");
  const std::uint64_t workers = r.count("workers", s.workers);
  if (workers > 4096) fail("workers", "at most 4096");
  s.workers = static_cast<unsigned>(workers);
  r.finish();
  return s;
}

// ---- writing ---------------------------------------------------------------

void write_shape(json& j, const Shape& s) {
  j["shape"] = name_of(kShapes, s.kind);
  switch (s.kind) {
    case Shape::Kind::all:
      break;
    case Shape::Kind::interval:
      j["x0"] = s.x0;
      j["x1"] = s.x1;
      break;
    case Shape::Kind::box:
      j["x0"] = s.x0;
      j["x1"] = s.x1;
      j["y0"] = s.y0;
      j["y1"] = s.y1;
      break;
    case Shape::Kind::circle:
      j["cx"] = s.cx;
      j["cy"] = s.cy;
      j["r"] = s.r;
      break;
  }
}

json side_json(const BoundarySide& side) {
  json j{{"kind", name_of(kSides, side.kind)}};
  if (side.kind == BoundarySide::Kind::dirichlet) j["rho"] = side.rho;
  return j;
}

void write_solver(json& j, const SolverOptions& o) {
  j["refine"] = o.refine;
  j["dt_factor"] = o.dt_factor;
  j["velocity_nodes"] = o.velocity_nodes;
  j["steady"] = o.steady;
  j["interface"] = name_of(kInterface, o.interface);
  j["steady_tolerance"] = o.steady_tolerance;
  j["steady_max_time"] = o.steady_max_time;
}

json to_json(const Scenario& s) {
  json j = json::object();
  j["name"] = s.name;
  j["description"] = s.description;
  j["model"] = to_string(s.model);
  j["scheme"] = to_string(s.scheme);
  json grid{{"x0", s.grid.x0}, {"x1", s.grid.x1}, {"nx", s.grid.nx}};
  if (s.grid.ny > 0) {
    grid["y0"] = s.grid.y0;
    grid["y1"] = s.grid.y1;
    grid["ny"] = s.grid.ny;
  }
  j["grid"] = grid;
  j["dt"] = {{"rule", name_of(kDtKinds, s.dt.kind)}, {"c", s.dt.c}};
  j["final_time"] = s.final_time;
  j["output_times"] = s.output_times;
  j["particles"] = s.particles;
  if (s.mass_reference) j["mass_reference"] = *s.mass_reference;
  j["seed"] = s.seed;
  j["replicates"] = s.replicates;
  json initial = json::array();
  for (const auto& d : s.initial) {
    json r = json::object();
    write_shape(r, d.shape);
    r["rho"] = d.rho;
    initial.push_back(r);
  }
  j["initial"] = initial;
  json coefs = json::array();
  for (const auto& c : s.coefficients) {
    json r = json::object();
    write_shape(r, c.shape);
    r["eps"] = c.eps;
    r["sigma_s"] = c.sigma_s;
    r["sigma_a"] = c.sigma_a;
    coefs.push_back(r);
  }
  j["coefficients"] = coefs;
  json bc{{"left", side_json(s.boundary.left)}, {"right", side_json(s.boundary.right)}};
  if (s.grid.ny > 0 || !(s.boundary.bottom == BoundarySide::periodic() &&
                         s.boundary.top == BoundarySide::periodic())) {
    bc["bottom"] = side_json(s.boundary.bottom);
    bc["top"] = side_json(s.boundary.top);
  }
  j["boundary"] = bc;
  json solver = json::object();
  write_solver(solver, s.solver);
  j["solver"] = solver;
  if (s.reference) {
    json ref{{"scheme", to_string(s.reference->scheme)}};
    write_solver(ref, s.reference->options);
    j["reference"] = ref;
  }
  if (s.time_average_start) j["time_average"] = {{"start_time", *s.time_average_start}};
  j["noise_speed"] = name_of(kNoise, s.noise_speed);
  j["workers"] = s.workers;
  return j;
}

// ---- validation helpers ----------------------------------------------------

void check_shape(const Shape& s, const std::string& path, int dim) {
  switch (s.kind) {
    case Shape::Kind::all:
      return;
    case Shape::Kind::interval:
      if (!(s.x1 > s.x0)) fail(path + ".x1", "must exceed x0");
      return;
    case Shape::Kind::box:
      if (dim != 2) fail(path + ".shape", "box needs a 2D grid");
      if (!(s.x1 > s.x0)) fail(path + ".x1", "must exceed x0");
      if (!(s.y1 > s.y0)) fail(path + ".y1", "must exceed y0");
      return;
    case Shape::Kind::circle:
      if (dim != 2) fail(path + ".shape", "circle needs a 2D grid");
      if (!(s.r > 0)) fail(path + ".r", "must be positive");
      return;
  }
}

void check_reference_scheme(Scheme scheme, Model model, const std::string& path) {
  if (scheme == Scheme::kinetic_ref && model == Model::rt2d)
    fail(path, "kinetic_ref solves 1D problems only");
}

void check_solver(const SolverOptions& o, const std::string& path) {
  if (o.refine < 1) fail(path + ".refine", "must be at least 1");
  if (!(o.dt_factor > 0 && o.dt_factor <= 1)) fail(path + ".dt_factor", "must lie in (0, 1]");
  if (o.velocity_nodes < 2) fail(path + ".velocity_nodes", "must be at least 2");
  if (!(o.steady_tolerance > 0)) fail(path + ".steady_tolerance", "must be positive");
  if (!(o.steady_max_time > 0)) fail(path + ".steady_max_time", "must be positive");
}

void check_deterministic(Scheme scheme, const SolverOptions& o, const Scenario& s,
                         const CoefficientField& coef, const std::string& path) {
  check_reference_scheme(scheme, s.model, path + ".scheme");
  if (scheme == Scheme::diffusion_ref)
    for (std::size_t c = 0; c < coef.size(); ++c)
      if (!(coef.sigma_s[c] > 0))
        fail("coefficients", "diffusion_ref needs sigma_s > 0 in every cell");
  if (scheme == Scheme::kinetic_ref) {
    for (std::size_t c = 0; c < coef.size(); ++c)
      if (!(coef.eps[c] > 0)) fail("coefficients", "kinetic_ref needs eps > 0 in every cell");
    if (o.steady) {
      const auto& bc = s.boundary;
      if (bc.left.kind == BoundarySide::Kind::periodic)
        fail(path + ".steady", "the steady kinetic solve needs non-periodic boundaries");
      if (bc.left.kind != BoundarySide::Kind::dirichlet &&
          bc.right.kind != BoundarySide::Kind::dirichlet)
        fail(path + ".steady", "the steady kinetic solve needs a dirichlet side");
    }
  }
}

}  // namespace

// ---- public ----------------------------------------------------------------

std::string to_string(Model m) { return name_of(kModels, m); }
std::string to_string(Scheme s) { return name_of(kSchemes, s); }
Model parse_model(std::string_view s) { return lookup(kModels, s, "model"); }
Scheme parse_scheme(std::string_view s) { return lookup(kSchemes, s, "scheme"); }

bool is_particle_scheme(Scheme s) {
  return s != Scheme::kinetic_ref && s != Scheme::diffusion_ref;
}

VelocityModel velocity_model(Model m) {
  switch (m) {
    case Model::gt:
      return VelocityModel::two_speed;
    case Model::rt1d:
      return VelocityModel::slab1d;
    case Model::rt2d:
      return VelocityModel::circle2d;
  }
  return VelocityModel::two_speed;
}

SpatialGrid GridSpec::build() const {
  if (ny > 0) return SpatialGrid::plane(x0, x1, nx, y0, y1, ny);
  return SpatialGrid::line(x0, x1, nx);
}

double DtRule::value(const SpatialGrid& grid) const {
  const double h = grid.dimension() == 2 ? std::min(grid.dx(), grid.dy()) : grid.dx();
  switch (kind) {
    case Kind::absolute:
      return c;
    case Kind::dx:
      return c * h;
    case Kind::dx2:
      return c * h * h;
  }
  return c;
}

bool Shape::contains(const std::array<double, 2>& p) const {
  switch (kind) {
    case Kind::all:
      return true;
    case Kind::interval:
      return p[0] >= x0 && p[0] < x1;
    case Kind::box:
      return p[0] >= x0 && p[0] < x1 && p[1] >= y0 && p[1] < y1;
    case Kind::circle:
      return std::hypot(p[0] - cx, p[1] - cy) < r;
  }
  return false;
}

GridFunction Scenario::initial_density(const SpatialGrid& g) const {
  GridFunction rho(g, 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    for (const auto& region : initial)
      if (region.shape.contains(g.center(c))) rho[c] = region.rho;
  return rho;
}

CoefficientField Scenario::coefficient_field(const SpatialGrid& g) const {
  CoefficientField f = CoefficientField::uniform(g, -1.0, 0.0, 0.0);
  for (std::size_t c = 0; c < g.cell_count(); ++c)
    for (const auto& region : coefficients)
      if (region.shape.contains(g.center(c))) {
        f.eps[c] = region.eps;
        f.sigma_s[c] = region.sigma_s;
        f.sigma_a[c] = region.sigma_a;
      }
  return f;
}

std::vector<double> Scenario::snapshot_times() const {
  if (output_times.empty()) return {final_time};
  return output_times;
}

double Scenario::diffusion() const {
  switch (model) {
    case Model::gt:
      return 1.0;
    case Model::rt1d:
      return rt::diffusion_coefficient(VelocityGeometry::slab1d);
    case Model::rt2d:
      return rt::diffusion_coefficient(VelocityGeometry::circle2d);
  }
  return 1.0;
}

void Scenario::validate() const {
  // grid
  if (grid.nx < 1) fail("grid.nx", "must be positive");
  if (!(grid.x1 > grid.x0)) fail("grid.x1", "must exceed grid.x0");
  if (model == Model::rt2d) {
    if (grid.ny < 1) fail("grid.ny", "rt2d needs a 2D grid (ny > 0)");
    if (!(grid.y1 > grid.y0)) fail("grid.y1", "must exceed grid.y0");
  } else if (grid.ny != 0) {
    fail("grid.ny", "only valid for rt2d");
  }
  const SpatialGrid g = build_grid();

  if (!(dt.c > 0)) fail("dt.c", "must be positive");
  const double step = dt.value(g);
  if (!(step > 0)) fail("dt", "evaluates to a nonpositive step");
  if (!(final_time > 0)) fail("final_time", "must be positive");
  for (std::size_t i = 0; i < output_times.size(); ++i) {
    const double t = output_times[i];
    if (!(t >= 0 && t <= final_time)) fail(indexed("output_times", i), "must lie in [0, final_time]");
    if (i > 0 && !(t > output_times[i - 1]))
      fail(indexed("output_times", i), "must be strictly increasing");
  }
  if (particles < 1) fail("particles", "must be positive");
  if (replicates < 1) fail("replicates", "must be at least 1");
  if (workers < 1) fail("workers", "must be at least 1");
  if (mass_reference && !(*mass_reference > 0)) fail("mass_reference", "must be positive");
  if (time_average_start && !(*time_average_start >= 0 && *time_average_start <= final_time))
    fail("time_average.start_time", "must lie in [0, final_time]");

  // regions
  const int dim = g.dimension();
  for (std::size_t i = 0; i < initial.size(); ++i) {
    check_shape(initial[i].shape, indexed("initial", i), dim);
    if (!(initial[i].rho >= 0)) fail(indexed("initial", i) + ".rho", "must be nonnegative");
  }
  if (coefficients.empty()) fail("coefficients", "at least one region is required");
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& c = coefficients[i];
    const std::string path = indexed("coefficients", i);
    check_shape(c.shape, path, dim);
    if (!(c.eps >= 0)) fail(path + ".eps", "must be nonnegative");
    if (!(c.sigma_s >= 0)) fail(path + ".sigma_s", "must be nonnegative");
    if (!(c.sigma_a >= 0)) fail(path + ".sigma_a", "must be nonnegative");
    if (model == Model::gt) {
      if (c.sigma_s != 1.0) fail(path + ".sigma_s", "the two-speed model has sigma_s = 1");
      if (c.sigma_a != 0.0) fail(path + ".sigma_a", "the two-speed model has no absorption");
      if (c.eps != coefficients.front().eps)
        fail(path + ".eps", "the two-speed model takes a single eps");
    }
  }
  const CoefficientField coef = coefficient_field(g);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    if (coef.eps[c] < 0) {
      const auto p = g.center(c);
      std::ostringstream os;
      os << "cell " << c << " (centre x=" << p[0];
      if (dim == 2) os << ", y=" << p[1];
      os << ") is not covered by any region";
      fail("coefficients", os.str());
    }
    if (coef.eps[c] == 0 && coef.sigma_s[c] == 0)
      fail("coefficients", "eps and sigma_s cannot both vanish (cell " + std::to_string(c) + ")");
  }

  // boundary
  if (dim == 1 && !(boundary.bottom == BoundarySide::periodic() &&
                    boundary.top == BoundarySide::periodic()))
    fail("boundary.bottom", "only valid for rt2d");
  try {
    boundary.validate(g);
  } catch (const std::invalid_argument& e) {
    fail("boundary", e.what());
  }

  // schemes
  check_solver(solver, "solver");
  if (scheme == Scheme::apmc_micromacro && model == Model::gt)
    fail("scheme", "apmc_micromacro is defined for rt1d and rt2d only");
  if (!is_particle_scheme(scheme)) check_deterministic(scheme, solver, *this, coef, "solver");
  if (scheme == Scheme::standard_mc) {
    double eps_min = std::numeric_limits<double>::infinity();
    for (double e : coef.eps) eps_min = std::min(eps_min, e);
    const double h = dim == 2 ? std::min(g.dx(), g.dy()) : g.dx();
    if (!(eps_min > 0)) fail("scheme", "standard_mc needs eps > 0 in every cell");
    if (step > eps_min * h * (1 + 1e-12)) {
      std::ostringstream os;
      os << "standard_mc resolves free flight only when dt <= eps*dx (dt = " << step
         << ", eps*dx = " << eps_min * h << "); use apmc for small eps";
      fail("dt", os.str());
    }
  }
  if (scheme == Scheme::heat_walk)
    for (double ss : coef.sigma_s)
      if (!(ss > 0)) fail("coefficients", "heat_walk needs sigma_s > 0 in every cell");
  if (reference) {
    if (is_particle_scheme(reference->scheme))
      fail("reference.scheme", "must be kinetic_ref or diffusion_ref");
    check_solver(reference->options, "reference");
    check_deterministic(reference->scheme, reference->options, *this, coef, "reference");
  }
  if (is_particle_scheme(scheme)) {
    const double mass = initial_density(g).integral();
    if (!(mass > 0) && !mass_reference)
      fail("mass_reference", "required when the initial data carry no mass");
  }
}

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
  }
  Scenario s = from_json(j);
  s.validate();
  return s;
}

std::string serialize_scenario(const Scenario& s, int indent) { return to_json(s).dump(indent); }

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

// ---- built-ins -------------------------------------------------------------

namespace {

Shape all() { return {}; }
Shape interval(double a, double b) {
  Shape s;
  s.kind = Shape::Kind::interval;
  s.x0 = a;
  s.x1 = b;
  return s;
}

Scenario gt_riemann(double eps) {
  Scenario s;
  s.model = Model::gt;
  s.scheme = Scheme::apmc;
  s.grid = {0.0, 2.0, 100};
  s.particles = 200000;
  s.initial = {{interval(0.0, 1.0), 2.0}, {interval(1.0, 2.0), 1.0}};
  s.coefficients = {{all(), eps, 1.0, 0.0}};
  s.boundary = {BoundarySide::dirichlet(2.0), BoundarySide::dirichlet(1.0), {}, {}};
  return s;
}

Scenario gt_diffusive() {
  Scenario s = gt_riemann(1e-5);
  s.name = "gt-riemann-diffusive";
  s.description = "Goldstein-Taylor Riemann problem, eps=1e-5, against the heat equation";
  s.dt = {DtRule::Kind::dx2, 0.4};
  s.final_time = 0.03;
  ReferenceSpec ref;
  ref.scheme = Scheme::diffusion_ref;
  ref.options.refine = 4;
  s.reference = ref;
  return s;
}

Scenario gt_hyperbolic() {
  Scenario s = gt_riemann(0.7);
  s.name = "gt-riemann-hyperbolic";
  s.description = "Goldstein-Taylor Riemann problem, eps=0.7, against the kinetic solver";
  s.dt = {DtRule::Kind::dx, 0.5};
  s.final_time = 0.25;
  ReferenceSpec ref;
  ref.scheme = Scheme::kinetic_ref;
  ref.options.refine = 16;
  s.reference = ref;
  return s;
}

Scenario rt_slab_ingress() {
  Scenario s;
  s.name = "rt-slab-ingress";
  s.description = "Slab with inflow f=1 at x=0, eps=1e-8, against the diffusion limit";
  s.model = Model::rt1d;
  s.scheme = Scheme::apmc;
  s.grid = {0.0, 1.0, 80};
  s.dt = {DtRule::Kind::dx2, 0.5};
  s.final_time = 0.15;
  s.output_times = {0.01, 0.05, 0.15};
  s.particles = 80000;  // 1000 per cell
  s.mass_reference = 1.0;
  s.coefficients = {{all(), 1e-8, 1.0, 0.0}};
  s.boundary = {BoundarySide::dirichlet(1.0), BoundarySide::dirichlet(0.0), {}, {}};
  ReferenceSpec ref;
  ref.scheme = Scheme::diffusion_ref;
  ref.options.refine = 4;
  s.reference = ref;
  return s;
}

Scenario rt_two_region() {
  Scenario s;
  s.name = "rt-two-region";
  s.description =
      "Absorbing layer [0,1] (eps=1) next to a scattering slab [1,11] (eps=0.01), "
      "inflow f=5 at x=0, time-averaged steady state";
  s.model = Model::rt1d;
  s.scheme = Scheme::apmc;
  s.grid = {0.0, 11.0, 88};  // dx = 0.125 puts the interface on a face
  s.dt = {DtRule::Kind::dx2, 0.5};
  s.final_time = 300.0;
  s.time_average_start = 150.0;
  s.particles = 8800;  // 100 per cell at unit density
  s.mass_reference = 11.0;
  s.coefficients = {{interval(0.0, 1.0), 1.0, 0.0, 1.0}, {interval(1.0, 11.0), 0.01, 1.0, 0.0}};
  s.boundary = {BoundarySide::dirichlet(5.0), BoundarySide::dirichlet(0.0), {}, {}};
  ReferenceSpec ref;
  ref.scheme = Scheme::kinetic_ref;
  ref.options.steady = true;
  ref.options.velocity_nodes = 32;
  s.reference = ref;
  return s;
}

Scenario rt_2d() {
  Scenario s;
  s.name = "rt-2d";
  s.description = "Disc of density 1 on a 0.125 background, eps 0.1 (x<1) and 0.01 (x>1)";
  s.model = Model::rt2d;
  s.scheme = Scheme::apmc;
  s.grid = {0.0, 2.0, 80, 0.0, 2.0, 80};
  s.dt = {DtRule::Kind::dx2, 1.0};
  s.final_time = 0.025;
  s.particles = 80 * 80 * 200;
  Shape disc;
  disc.kind = Shape::Kind::circle;
  disc.cx = 1.0;
  disc.cy = 1.0;
  disc.r = 0.2;
  s.initial = {{all(), 0.125}, {disc, 1.0}};
  Shape left;
  left.kind = Shape::Kind::box;
  left.x0 = 0.0;
  left.x1 = 1.0;
  left.y0 = 0.0;
  left.y1 = 2.0;
  s.coefficients = {{all(), 0.01, 1.0, 0.0}, {left, 0.1, 1.0, 0.0}};
  const auto d = BoundarySide::dirichlet(0.125);
  s.boundary = {d, d, d, d};
  ReferenceSpec ref;
  ref.scheme = Scheme::diffusion_ref;
  s.reference = ref;
  return s;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"gt-riemann-diffusive", "gt-riemann-hyperbolic", "rt-slab-ingress", "rt-two-region",
          "rt-2d"};
}

Scenario builtin_scenario(std::string_view name) {
  Scenario s;
  if (name == "gt-riemann-diffusive") s = gt_diffusive();
  else if (name == "gt-riemann-hyperbolic") s = gt_hyperbolic();
  else if (name == "rt-slab-ingress") s = rt_slab_ingress();
  else if (name == "rt-two-region") s = rt_two_region();
  else if (name == "rt-2d") s = rt_2d();
  else throw ScenarioError("builtin: no scenario named '" + std::string(name) + "'");
  s.validate();
  return s;
}

}  // namespace apmc
