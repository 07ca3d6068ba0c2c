#pragma once

#include <utility>

#include "apmc/ensemble.hpp"
#include "apmc/stepping.hpp"

namespace apmc::gt {

/// Scaling parameter eps and time step dt of the two-speed model.
struct GtParams {
  double eps = 1.0;
  double dt = 0.0;

  /// Standard scheme: eps > 0, dt > 0.
  void validate_standard() const;
  /// Asymptotic-preserving scheme: eps >= 0, dt > 0.
  void validate_apmc() const;
};

/// Characteristic speeds +-eps/(eps^2 + dt) of the modified system.
/// Rejects eps == dt == 0.
std::pair<double, double> char_speeds(const GtParams& p);

/// Probability that a particle's label is redrawn in one standard collision
/// step: 1 - exp(-dt/eps^2).
double standard_resample_probability(const GtParams& p);

/// Weights of the implicit collision: keep = eps^2/(eps^2+dt),
/// redraw = dt/(eps^2+dt).
double apmc_keep_weight(const GtParams& p);
double apmc_redraw_weight(const GtParams& p);

/// Standard deviation of the Brownian part of the transport-diffusion
/// step, sqrt(2 dt^2/(eps^2 + dt)).
double apmc_noise_amplitude(const GtParams& p);

// Single-particle kernels with the normal draw supplied by the caller.
double apmc_move(double x, double label, const GtParams& p, double xi);
double heat_walk_move(double x, double dt, double xi);

/// Transport with speed label/eps, then exact-exponential collision.
StepCounts standard_step(ParticleEnsemble& ensemble, const GtParams& p, const StepContext& ctx,
                         const BoundaryContext* boundary = nullptr);

StepCounts apmc_transport_diffusion(ParticleEnsemble& ensemble, const GtParams& p,
                                    const StepContext& ctx);
StepCounts apmc_collision(ParticleEnsemble& ensemble, const GtParams& p, const StepContext& ctx);
/// transport-diffusion, collision, then the boundary update.
StepCounts apmc_step(ParticleEnsemble& ensemble, const GtParams& p, const StepContext& ctx,
                     const BoundaryContext* boundary = nullptr);

/// Limiting random walk X += sqrt(2 dt) xi; labels are left alone.
StepCounts heat_random_walk_step(ParticleEnsemble& ensemble, double dt, const StepContext& ctx,
                                 const BoundaryContext* boundary = nullptr);

/// Largest distance a particle is expected to travel in one step of each
/// scheme (drift plus six noise standard deviations). Used to size the
/// ghost layer behind dirichlet boundaries.
double standard_excursion(const GtParams& p);
double apmc_excursion(const GtParams& p);
double heat_walk_excursion(double dt);

}  // namespace apmc::gt
