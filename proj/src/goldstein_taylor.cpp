#include "apmc/goldstein_taylor.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "apmc/parallel.hpp"

namespace apmc::gt {

void GtParams::validate_standard() const {
  if (!(eps > 0.0)) throw std::invalid_argument("gt standard scheme: eps must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("gt standard scheme: dt must be > 0");
}

void GtParams::validate_apmc() const {
  if (!(eps >= 0.0)) throw std::invalid_argument("gt apmc: eps must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("gt apmc: dt must be > 0");
}

std::pair<double, double> char_speeds(const GtParams& p) {
  if (p.eps < 0.0 || p.dt < 0.0) throw std::invalid_argument("char_speeds: negative eps or dt");
  const double denom = p.eps * p.eps + p.dt;
  if (denom == 0.0) throw std::invalid_argument("char_speeds: eps and dt both zero");
  const double s = p.eps / denom;
  return {s, -s};
}

double standard_resample_probability(const GtParams& p) {
  return -std::expm1(-p.dt / (p.eps * p.eps));
}

double apmc_keep_weight(const GtParams& p) { return p.eps * p.eps / (p.eps * p.eps + p.dt); }
double apmc_redraw_weight(const GtParams& p) { return p.dt / (p.eps * p.eps + p.dt); }

double apmc_noise_amplitude(const GtParams& p) {
  // 2 dt * (dt/(eps^2+dt)) so that eps = 0 gives exactly sqrt(2 dt).
  return std::sqrt(2.0 * p.dt * (p.dt / (p.eps * p.eps + p.dt)));
}

double apmc_move(double x, double label, const GtParams& p, double xi) {
  const double speed = char_speeds(p).first;
  return x + p.dt * (speed * label) + apmc_noise_amplitude(p) * xi;
}

double heat_walk_move(double x, double dt, double xi) { return x + std::sqrt(2.0 * dt) * xi; }

namespace {

template <class Fn>
StepCounts for_each_particle(ParticleEnsemble& ens, unsigned workers, Fn&& fn) {
  auto& ps = ens.particles();
  std::atomic<std::size_t> resampled{0};
  parallel_for(ps.size(), workers, [&](std::size_t b, std::size_t e) {
    std::size_t local = 0;
    for (std::size_t k = b; k < e; ++k)
      if (ps[k].alive && fn(ps[k])) ++local;
    resampled += local;
  });
  return {resampled.load(), 0};
}

// Label redraw with probability `p_redraw`; returns true when redrawn.
bool maybe_redraw(Particle& q, double p_redraw, const StepContext& ctx) {
  RngStream coin = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::collision);
  if (!(uniform_unit(coin) < p_redraw)) return false;
  RngStream lab = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::direction);
  q.v[0] = uniform_unit(lab) < 0.5 ? 1.0 : -1.0;
  return true;
}

}  // namespace

StepCounts standard_step(ParticleEnsemble& ens, const GtParams& p, const StepContext& ctx,
                         const BoundaryContext* boundary) {
  p.validate_standard();
  const double step = p.dt / p.eps;
  const double p_redraw = standard_resample_probability(p);
  auto counts = for_each_particle(ens, ctx.workers, [&](Particle& q) {
    q.x[0] += step * q.v[0];
    return maybe_redraw(q, p_redraw, ctx);
  });
  finish_step(ens, ctx, boundary);
  return counts;
}

StepCounts apmc_transport_diffusion(ParticleEnsemble& ens, const GtParams& p,
                                    const StepContext& ctx) {
  p.validate_apmc();
  const double drift = char_speeds(p).first;
  const double amp = apmc_noise_amplitude(p);
  for_each_particle(ens, ctx.workers, [&](Particle& q) {
    RngStream s = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::transport);
    const double xi = standard_normal(s);
    q.x[0] = q.x[0] + p.dt * (drift * q.v[0]) + amp * xi;
    return false;
  });
  return {};
}

StepCounts apmc_collision(ParticleEnsemble& ens, const GtParams& p, const StepContext& ctx) {
  p.validate_apmc();
  const double p_redraw = apmc_redraw_weight(p);
  return for_each_particle(ens, ctx.workers,
                           [&](Particle& q) { return maybe_redraw(q, p_redraw, ctx); });
}

StepCounts apmc_step(ParticleEnsemble& ens, const GtParams& p, const StepContext& ctx,
                     const BoundaryContext* boundary) {
  StepCounts c = apmc_transport_diffusion(ens, p, ctx);
  c += apmc_collision(ens, p, ctx);
  finish_step(ens, ctx, boundary);
  return c;
}

StepCounts heat_random_walk_step(ParticleEnsemble& ens, double dt, const StepContext& ctx,
                                 const BoundaryContext* boundary) {
  if (!(dt > 0.0)) throw std::invalid_argument("heat_random_walk_step: dt must be > 0");
  const double amp = std::sqrt(2.0 * dt);
  for_each_particle(ens, ctx.workers, [&](Particle& q) {
    RngStream s = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::transport);
    q.x[0] = q.x[0] + amp * standard_normal(s);
    return false;
  });
  finish_step(ens, ctx, boundary);
  return {};
}

double standard_excursion(const GtParams& p) { return p.dt / p.eps; }

double apmc_excursion(const GtParams& p) {
  return p.dt * char_speeds(p).first + 6.0 * apmc_noise_amplitude(p);
}

double heat_walk_excursion(double dt) { return 6.0 * std::sqrt(2.0 * dt); }

}  // namespace apmc::gt
