#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "apmc/grid.hpp"
#include "apmc/stochastics.hpp"

namespace apmc {

/// How a particle's velocity label is interpreted.
///   two_speed: v[0] in {+1,-1}, the Goldstein-Taylor sign.
///   slab1d:    v[0] in [-1,1], direction cosine.
///   circle2d:  (v[0], v[1]) on the unit circle.
enum class VelocityModel { two_speed, slab1d, circle2d };

VelocityGeometry geometry_of(VelocityModel model);
std::string to_string(VelocityModel model);

struct Particle {
  std::array<double, 2> x{0.0, 0.0};
  std::array<double, 2> v{0.0, 0.0};
  std::uint64_t id = 0;
  bool alive = true;
  /// Injected into a boundary ghost cell and not yet inside the domain.
  bool ghost = false;
};

/// Equal-weight particles. Ghost particles carry mass but are not counted
/// until they enter the domain.
class ParticleEnsemble {
 public:
  ParticleEnsemble() = default;
  ParticleEnsemble(VelocityModel model, double particle_mass);

  VelocityModel model() const { return model_; }
  double particle_mass() const { return particle_mass_; }

  std::vector<Particle>& particles() { return particles_; }
  const std::vector<Particle>& particles() const { return particles_; }

  /// Appends a particle with a fresh id and returns a reference to it.
  Particle& spawn(const std::array<double, 2>& x, const std::array<double, 2>& v,
                  bool ghost = false);
  std::uint64_t next_id() const { return next_id_; }

  /// Alive, non-ghost particles.
  std::size_t live_count() const;
  double total_mass() const { return particle_mass_ * static_cast<double>(live_count()); }

  /// Drops dead particles, preserving order.
  void compact();

 private:
  VelocityModel model_ = VelocityModel::two_speed;
  double particle_mass_ = 1.0;
  std::vector<Particle> particles_;
  std::uint64_t next_id_ = 0;
};

/// Draws a label from the equilibrium distribution of `model`
/// (equal +/- for two_speed, uniform on the velocity set otherwise).
std::array<double, 2> equilibrium_label(RngStream& stream, VelocityModel model);

/// N particles with mass integral(density)/N. Cells are chosen with
/// probability proportional to their mass (multinomial), positions are
/// uniform inside the cell and labels are equilibrium draws.
ParticleEnsemble sample_from_density(const GridFunction& density, std::size_t n_particles,
                                     VelocityModel model, std::uint64_t seed);

/// Same, but with a prescribed particle mass; used when the initial data
/// carries no mass but boundaries inject it. The particle count is
/// round(integral(density)/particle_mass).
ParticleEnsemble sample_with_mass(const GridFunction& density, double particle_mass,
                                  VelocityModel model, std::uint64_t seed);

/// Per-cell estimators. flux has two components in 2D (jy empty in 1D).
struct CellStats {
  std::vector<double> rho;
  std::vector<double> jx;
  std::vector<double> jy;
  std::size_t accum_count = 0;
};

/// rho_j = m_p * count_j / cell_volume over live particles. Throws
/// std::logic_error if a live particle lies outside the domain.
std::vector<double> histogram_density(const ParticleEnsemble& ensemble, const SpatialGrid& grid);

/// j_j = m_p * sum_{k in j} v_k / (cell_volume * eps_j); for two_speed this is
/// m_p (count_+ - count_-) / (dx eps_j). Throws std::domain_error when a
/// cell has eps_j == 0.
struct FluxEstimate {
  std::vector<double> jx;
  std::vector<double> jy;
};
FluxEstimate flux_estimate(const ParticleEnsemble& ensemble, const SpatialGrid& grid,
                           const std::vector<double>& eps);

CellStats cell_stats(const ParticleEnsemble& ensemble, const SpatialGrid& grid,
                     const std::vector<double>& eps);

/// Running arithmetic mean of rho and flux. An empty accumulator adopts
/// the shape of the first snapshot.
void time_average_accumulate(CellStats& accumulator, const CellStats& current);

struct BoundarySide {
  enum class Kind { periodic, dirichlet, reflecting };
  Kind kind = Kind::periodic;
  /// Prescribed density in the ghost region (dirichlet only).
  double rho = 0.0;

  static BoundarySide periodic() { return {Kind::periodic, 0.0}; }
  static BoundarySide dirichlet(double rho) { return {Kind::dirichlet, rho}; }
  static BoundarySide reflecting() { return {Kind::reflecting, 0.0}; }
  bool operator==(const BoundarySide&) const = default;
};

struct BoundaryConditions {
  BoundarySide left, right, bottom, top;

  static BoundaryConditions all_periodic();
  /// Throws std::invalid_argument on negative density or unpaired periodic sides.
  void validate(const SpatialGrid& grid) const;
  bool operator==(const BoundaryConditions&) const = default;
};

/// Boundary update run after every full step:
///  (a) wraps periodic axes, mirrors reflecting walls (flipping the normal
///      velocity component), and deletes particles outside a dirichlet side;
///      ghosts that reached the domain become live;
///  (b) refills `ghost_layers` cells beyond each dirichlet side with fresh
///      ghost particles at the prescribed density, uniform positions and
///      equilibrium labels. Fractional expected counts are resolved by a
///      Bernoulli draw so the injected mass is unbiased.
/// Randomness is keyed on (seed, epoch), see stochastics.hpp.
void apply_boundary(ParticleEnsemble& ensemble, const SpatialGrid& grid,
                    const BoundaryConditions& bc, std::size_t ghost_layers, std::uint64_t seed,
                    std::uint64_t epoch);

/// Expected number of particles injected per refill into one ghost cell.
double ghost_cell_expected_count(double rho, const SpatialGrid& grid, double particle_mass);

}  // namespace apmc
