#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apmc/ensemble.hpp"
#include "apmc/grid.hpp"
#include "apmc/radiative_transport.hpp"
#include "apmc/reference_solvers.hpp"

namespace apmc {

enum class Model { gt, rt1d, rt2d };
enum class Scheme { standard_mc, apmc, apmc_micromacro, heat_walk, kinetic_ref, diffusion_ref };

std::string to_string(Model m);
std::string to_string(Scheme s);
Model parse_model(std::string_view s);
Scheme parse_scheme(std::string_view s);
bool is_particle_scheme(Scheme s);
VelocityModel velocity_model(Model m);

/// Raised for malformed or inconsistent scenarios; the message starts with
/// the offending field path, e.g. "grid.nx: must be positive".
struct ScenarioError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GridSpec {
  double x0 = 0.0, x1 = 1.0;
  std::size_t nx = 1;
  // 2D only
  double y0 = 0.0, y1 = 1.0;
  std::size_t ny = 0;

  SpatialGrid build() const;
  bool operator==(const GridSpec&) const = default;
};

struct DtRule {
  enum class Kind { absolute, dx, dx2 };
  Kind kind = Kind::dx2;
  double c = 0.5;

  /// c, c*h or c*h^2 with h the smallest mesh spacing.
  double value(const SpatialGrid& grid) const;
  bool operator==(const DtRule&) const = default;
};

/// Region of the domain selected by cell centres.
struct Shape {
  enum class Kind { all, interval, box, circle };
  Kind kind = Kind::all;
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;  // interval, box
  double cx = 0.0, cy = 0.0, r = 0.0;           // circle

  bool contains(const std::array<double, 2>& p) const;
  bool operator==(const Shape&) const = default;
};

struct DensityRegion {
  Shape shape;
  double rho = 0.0;
  bool operator==(const DensityRegion&) const = default;
};

struct CoefficientRegion {
  Shape shape;
  double eps = 1.0;
  double sigma_s = 1.0;
  double sigma_a = 0.0;
  bool operator==(const CoefficientRegion&) const = default;
};

/// Settings of the deterministic solvers, whether they run as the main
/// scheme or as the reference.
struct SolverOptions {
  std::size_t refine = 1;          // fine cells per scenario cell (per axis)
  double dt_factor = 0.9;          // fraction of the explicit stability limit
  std::size_t velocity_nodes = 16; // slab quadrature for kinetic_ref
  bool steady = false;             // solve for the stationary state instead
  ref::InterfaceForm interface = ref::InterfaceForm::conservative;
  double steady_tolerance = 1e-8;  // relative change per unit time (diffusion)
  double steady_max_time = 1e4;
  bool operator==(const SolverOptions&) const = default;
};

struct ReferenceSpec {
  Scheme scheme = Scheme::diffusion_ref;
  SolverOptions options;
  bool operator==(const ReferenceSpec&) const = default;
};

struct Scenario {
  std::string name;
  std::string description;
  Model model = Model::gt;
  Scheme scheme = Scheme::apmc;
  GridSpec grid;
  DtRule dt;
  double final_time = 0.0;
  /// Snapshot times; empty means {final_time}.
  std::vector<double> output_times;
  std::size_t particles = 0;
  /// Total mass that `particles` particles would carry. Fixes the particle
  /// mass when the initial data are empty (mass entering through the
  /// boundaries); otherwise the initial mass is used.
  std::optional<double> mass_reference;
  std::uint64_t seed = 1;
  std::size_t replicates = 1;
  std::vector<DensityRegion> initial;
  std::vector<CoefficientRegion> coefficients;
  BoundaryConditions boundary = BoundaryConditions::all_periodic();
  SolverOptions solver;
  std::optional<ReferenceSpec> reference;
  /// Output snapshots average every step from this time on.
  std::optional<double> time_average_start;
  rt::NoiseSpeed noise_speed = rt::NoiseSpeed::unscaled;
  unsigned workers = 1;

  bool operator==(const Scenario&) const = default;

  /// Throws ScenarioError naming the first offending field.
  void validate() const;

  SpatialGrid build_grid() const { return grid.build(); }
  GridFunction initial_density(const SpatialGrid& g) const;
  CoefficientField coefficient_field(const SpatialGrid& g) const;
  std::vector<double> snapshot_times() const;
  /// D of the limiting diffusion equation: 1 (gt), 1/3 (rt1d), 1/2 (rt2d).
  double diffusion() const;
};

/// Strict JSON I/O: unknown keys, wrong types and bad values are rejected
/// with the field path in the message.
Scenario parse_scenario(std::string_view json_text);
std::string serialize_scenario(const Scenario& s, int indent = 2);
Scenario load_scenario_file(const std::string& path);

/// Built-in experiments.
std::vector<std::string> builtin_names();
Scenario builtin_scenario(std::string_view name);

}  // namespace apmc
