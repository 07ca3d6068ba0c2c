#include "apmc/radiative_transport.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "apmc/parallel.hpp"

namespace apmc::rt {

void RtParams::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("rt: dt must be > 0");
  if (!grid || !coefficients) throw std::invalid_argument("rt: grid and coefficients required");
  coefficients->validate(*grid);
}

double diffusion_coefficient(VelocityGeometry geometry) {
  return geometry == VelocityGeometry::slab1d ? 1.0 / 3.0 : 0.5;
}

namespace {

double apmc_denominator(const LocalCoefficients& c, double dt) {
  const double s = c.eps * c.eps + c.sigma_s * dt;
  if (!(s > 0.0)) throw std::domain_error("rt apmc: eps^2 + sigma_s dt must be > 0");
  return s;
}

}  // namespace

double apmc_drift_speed(const LocalCoefficients& c, double dt) {
  return c.eps / apmc_denominator(c, dt);
}

double apmc_keep_weight(const LocalCoefficients& c, double dt) {
  if (c.sigma_s == 0.0) return 1.0;
  return c.eps * c.eps / apmc_denominator(c, dt);
}

double apmc_redraw_weight(const LocalCoefficients& c, double dt) {
  if (c.sigma_s == 0.0) return 0.0;
  return c.sigma_s * dt / apmc_denominator(c, dt);
}

double apmc_absorb_probability(const LocalCoefficients& c, double dt) {
  return c.sigma_a * dt / (1.0 + c.sigma_a * dt);
}

double standard_resample_probability(const LocalCoefficients& c, double dt) {
  if (c.sigma_s == 0.0) return 0.0;
  return -std::expm1(-c.sigma_s * dt / (c.eps * c.eps));
}

double standard_absorb_probability(const LocalCoefficients& c, double dt) {
  return -std::expm1(-c.sigma_a * dt);
}

std::array<double, 2> apmc_move(const std::array<double, 2>& x, const std::array<double, 2>& dir,
                                const LocalCoefficients& c, double dt, NoiseSpeed noise,
                                double xi) {
  const double s = apmc_denominator(c, dt);
  const double speed = c.eps / s;
  double amp = std::sqrt(2.0 * dt * (dt / s));
  if (noise == NoiseSpeed::scaled) amp *= speed;
  const double along = dt * speed + amp * xi;
  return {x[0] + along * dir[0], x[1] + along * dir[1]};
}

std::array<double, 2> micro_macro_move(const std::array<double, 2>& x,
                                       const std::array<double, 2>& dir,
                                       const LocalCoefficients& c, double dt, double diffusion,
                                       int dimension, const std::array<double, 2>& xi) {
  const double s = apmc_denominator(c, dt);
  const double speed = c.eps / s;
  const double amp = std::sqrt(2.0 * dt * (dt / s) * diffusion);
  std::array<double, 2> out{x[0] + dt * speed * dir[0] + amp * xi[0], x[1]};
  if (dimension == 2) out[1] = x[1] + dt * speed * dir[1] + amp * xi[1];
  return out;
}

std::vector<std::size_t> current_cells(const ParticleEnsemble& ens, const SpatialGrid& grid) {
  std::vector<std::size_t> cells(ens.particles().size());
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = grid.clamped_cell(ens.particles()[k].x);
  return cells;
}

namespace {

LocalCoefficients at(const CoefficientField& f, std::size_t cell) {
  return {f.eps[cell], f.sigma_s[cell], f.sigma_a[cell]};
}

// Applies fn(particle, coefficients) to every alive particle and counts the
// calls that return true.
template <class Fn>
std::size_t sweep(ParticleEnsemble& ens, const RtParams& p, unsigned workers,
                  std::span<const std::size_t> frozen, Fn&& fn) {
  auto& ps = ens.particles();
  if (!frozen.empty() && frozen.size() != ps.size())
    throw std::invalid_argument("rt: frozen cell list does not match ensemble");
  std::atomic<std::size_t> hits{0};
  parallel_for(ps.size(), workers, [&](std::size_t b, std::size_t e) {
    std::size_t local = 0;
    for (std::size_t k = b; k < e; ++k) {
      Particle& q = ps[k];
      if (!q.alive) continue;
      const std::size_t cell = frozen.empty() ? p.grid->clamped_cell(q.x) : frozen[k];
      if (fn(q, at(*p.coefficients, cell))) ++local;
    }
    hits += local;
  });
  return hits.load();
}

bool redraw(Particle& q, double probability, VelocityGeometry geometry, const StepContext& ctx) {
  RngStream coin = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::collision);
  if (!(uniform_unit(coin) < probability)) return false;
  RngStream dir = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::direction);
  q.v = uniform_direction(dir, geometry);
  return true;
}

bool absorb(Particle& q, double probability, const StepContext& ctx) {
  if (probability <= 0.0) return false;
  RngStream coin = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::absorption);
  if (!(uniform_unit(coin) < probability)) return false;
  q.alive = false;
  return true;
}

}  // namespace

StepCounts apmc_transport_diffusion(ParticleEnsemble& ens, const RtParams& p,
                                    const StepContext& ctx, std::span<const std::size_t> frozen) {
  p.validate();
  sweep(ens, p, ctx.workers, frozen, [&](Particle& q, const LocalCoefficients& c) {
    RngStream s = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::transport);
    q.x = apmc_move(q.x, q.v, c, p.dt, p.noise, standard_normal(s));
    return false;
  });
  return {};
}

StepCounts micro_macro_transport(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                                 std::span<const std::size_t> frozen) {
  p.validate();
  const double d = diffusion_coefficient(p.geometry);
  const int dim = p.grid->dimension();
  sweep(ens, p, ctx.workers, frozen, [&](Particle& q, const LocalCoefficients& c) {
    RngStream s = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::transport);
    q.x = micro_macro_move(q.x, q.v, c, p.dt, d, dim, standard_normal_pair(s));
    return false;
  });
  return {};
}

StepCounts apmc_collision(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                          std::span<const std::size_t> frozen) {
  p.validate();
  const std::size_t n = sweep(ens, p, ctx.workers, frozen, [&](Particle& q, const LocalCoefficients& c) {
    return redraw(q, apmc_redraw_weight(c, p.dt), p.geometry, ctx);
  });
  return {n, 0};
}

StepCounts apmc_absorption(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                           std::span<const std::size_t> frozen) {
  p.validate();
  const std::size_t n = sweep(ens, p, ctx.workers, frozen, [&](Particle& q, const LocalCoefficients& c) {
    return absorb(q, apmc_absorb_probability(c, p.dt), ctx);
  });
  return {0, n};
}

namespace {

template <class Transport>
StepCounts split_step(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                      const BoundaryContext* boundary, Transport&& transport) {
  p.validate();
  const auto frozen = current_cells(ens, *p.grid);
  StepCounts c = transport(ens, p, ctx, std::span<const std::size_t>(frozen));
  c += apmc_collision(ens, p, ctx, frozen);
  c += apmc_absorption(ens, p, ctx, frozen);
  finish_step(ens, ctx, boundary);
  return c;
}

}  // namespace

StepCounts apmc_step(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                     const BoundaryContext* boundary) {
  return split_step(ens, p, ctx, boundary,
                    [](auto& e, const auto& pp, const auto& cx, auto fr) {
                      return apmc_transport_diffusion(e, pp, cx, fr);
                    });
}

StepCounts micro_macro_step(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                            const BoundaryContext* boundary) {
  return split_step(ens, p, ctx, boundary,
                    [](auto& e, const auto& pp, const auto& cx, auto fr) {
                      return micro_macro_transport(e, pp, cx, fr);
                    });
}

StepCounts standard_step(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                         const BoundaryContext* boundary) {
  p.validate();
  const auto frozen = current_cells(ens, *p.grid);
  std::atomic<std::size_t> absorbed{0};
  const std::size_t resampled =
      sweep(ens, p, ctx.workers, frozen, [&](Particle& q, const LocalCoefficients& c) {
        if (!(c.eps > 0.0)) throw std::domain_error("rt standard scheme: eps must be > 0");
        q.x[0] += p.dt / c.eps * q.v[0];
        q.x[1] += p.dt / c.eps * q.v[1];
        const bool hit = redraw(q, standard_resample_probability(c, p.dt), p.geometry, ctx);
        if (absorb(q, standard_absorb_probability(c, p.dt), ctx)) ++absorbed;
        return hit;
      });
  finish_step(ens, ctx, boundary);
  return {resampled, absorbed.load()};
}

StepCounts heat_walk_step(ParticleEnsemble& ens, const RtParams& p, const StepContext& ctx,
                          const BoundaryContext* boundary) {
  p.validate();
  const double d = diffusion_coefficient(p.geometry);
  const int dim = p.grid->dimension();
  const auto frozen = current_cells(ens, *p.grid);
  std::atomic<std::size_t> absorbed{0};
  sweep(ens, p, ctx.workers, frozen, [&](Particle& q, const LocalCoefficients& c) {
    if (!(c.sigma_s > 0.0)) throw std::domain_error("rt heat walk: sigma_s must be > 0");
    RngStream s = particle_stream(ctx.seed, q.id, ctx.epoch, Slot::transport);
    const auto xi = standard_normal_pair(s);
    const double amp = std::sqrt(2.0 * d / c.sigma_s * p.dt);
    q.x[0] += amp * xi[0];
    if (dim == 2) q.x[1] += amp * xi[1];
    if (absorb(q, apmc_absorb_probability(c, p.dt), ctx)) ++absorbed;
    return false;
  });
  finish_step(ens, ctx, boundary);
  return {0, absorbed.load()};
}

double apmc_excursion(const LocalCoefficients& c, double dt, NoiseSpeed noise) {
  const double s = apmc_denominator(c, dt);
  const double speed = c.eps / s;
  double amp = std::sqrt(2.0 * dt * (dt / s));
  if (noise == NoiseSpeed::scaled) amp *= speed;
  return dt * speed + 6.0 * amp;
}

double standard_excursion(const LocalCoefficients& c, double dt) { return dt / c.eps; }

double heat_walk_excursion(const LocalCoefficients& c, double dt, VelocityGeometry geometry) {
  return 6.0 * std::sqrt(2.0 * diffusion_coefficient(geometry) / c.sigma_s * dt);
}

}  // namespace apmc::rt
