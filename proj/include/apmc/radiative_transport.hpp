#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "apmc/ensemble.hpp"
#include "apmc/grid.hpp"
#include "apmc/stepping.hpp"

namespace apmc::rt {

/// Which speed enters the Brownian amplitude of the transport-diffusion
/// step. `unscaled` uses the direction V~ (the default); `scaled` uses the
/// drift velocity eps V~/(eps^2 + sigma_s dt) literally.
enum class NoiseSpeed { unscaled, scaled };

struct RtParams {
  double dt = 0.0;
  VelocityGeometry geometry = VelocityGeometry::slab1d;
  const SpatialGrid* grid = nullptr;
  const CoefficientField* coefficients = nullptr;
  NoiseSpeed noise = NoiseSpeed::unscaled;

  void validate() const;
};

/// Coefficients seen by one particle during one step.
struct LocalCoefficients {
  double eps = 1.0;
  double sigma_s = 0.0;
  double sigma_a = 0.0;
};

/// D = <v_x^2> over the velocity set: 1/3 for the slab, 1/2 for the circle.
double diffusion_coefficient(VelocityGeometry geometry);

// Per-particle quantities of the asymptotic-preserving scheme.
double apmc_drift_speed(const LocalCoefficients& c, double dt);  // eps/(eps^2+sigma_s dt)
double apmc_keep_weight(const LocalCoefficients& c, double dt);
double apmc_redraw_weight(const LocalCoefficients& c, double dt);
double apmc_absorb_probability(const LocalCoefficients& c, double dt);  // sa dt/(1+sa dt)

// Standard scheme probabilities.
double standard_resample_probability(const LocalCoefficients& c, double dt);
double standard_absorb_probability(const LocalCoefficients& c, double dt);

/// Transport-diffusion of one particle. The displacement is drift along the
/// direction plus a Brownian term along the same direction driven by a
/// single normal xi (rank-one diffusion tensor v (x) v).
std::array<double, 2> apmc_move(const std::array<double, 2>& x, const std::array<double, 2>& dir,
                                const LocalCoefficients& c, double dt, NoiseSpeed noise, double xi);

/// Micro-macro variant: same drift, isotropic noise with the
/// velocity-averaged coefficient D (one normal per space dimension).
std::array<double, 2> micro_macro_move(const std::array<double, 2>& x,
                                       const std::array<double, 2>& dir,
                                       const LocalCoefficients& c, double dt, double diffusion,
                                       int dimension, const std::array<double, 2>& xi);

/// Coefficients of the cell each particle occupies now (ghosts use the
/// nearest domain cell).
std::vector<std::size_t> current_cells(const ParticleEnsemble& ensemble, const SpatialGrid& grid);

// Sub-steps. `frozen_cells`, when non-empty, gives the cell whose
// coefficients each particle uses (indexed like ensemble.particles()).
StepCounts apmc_transport_diffusion(ParticleEnsemble& ensemble, const RtParams& p,
                                    const StepContext& ctx,
                                    std::span<const std::size_t> frozen_cells = {});
StepCounts micro_macro_transport(ParticleEnsemble& ensemble, const RtParams& p,
                                 const StepContext& ctx,
                                 std::span<const std::size_t> frozen_cells = {});
StepCounts apmc_collision(ParticleEnsemble& ensemble, const RtParams& p, const StepContext& ctx,
                          std::span<const std::size_t> frozen_cells = {});
StepCounts apmc_absorption(ParticleEnsemble& ensemble, const RtParams& p, const StepContext& ctx,
                           std::span<const std::size_t> frozen_cells = {});

/// Full steps. Coefficients are frozen at each particle's start-of-step
/// cell; the boundary update runs last.
StepCounts apmc_step(ParticleEnsemble& ensemble, const RtParams& p, const StepContext& ctx,
                     const BoundaryContext* boundary = nullptr);
StepCounts micro_macro_step(ParticleEnsemble& ensemble, const RtParams& p,
                            const StepContext& ctx, const BoundaryContext* boundary = nullptr);
StepCounts standard_step(ParticleEnsemble& ensemble, const RtParams& p, const StepContext& ctx,
                         const BoundaryContext* boundary = nullptr);
/// Limiting walk X += sqrt(2 (D/sigma_s) dt) xi with absorption factor
/// 1/(1 + sigma_a dt).
StepCounts heat_walk_step(ParticleEnsemble& ensemble, const RtParams& p, const StepContext& ctx,
                          const BoundaryContext* boundary = nullptr);

/// One-step excursion bounds over a set of coefficient values (drift plus
/// six noise standard deviations).
double apmc_excursion(const LocalCoefficients& c, double dt, NoiseSpeed noise);
double standard_excursion(const LocalCoefficients& c, double dt);
double heat_walk_excursion(const LocalCoefficients& c, double dt, VelocityGeometry geometry);

}  // namespace apmc::rt
