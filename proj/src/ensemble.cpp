#include "apmc/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace apmc {

VelocityGeometry geometry_of(VelocityModel model) {
  return model == VelocityModel::circle2d ? VelocityGeometry::circle2d : VelocityGeometry::slab1d;
}

std::string to_string(VelocityModel model) {
  switch (model) {
    case VelocityModel::two_speed: return "two_speed";
    case VelocityModel::slab1d: return "slab1d";
    case VelocityModel::circle2d: return "circle2d";
  }
  return "?";
}

ParticleEnsemble::ParticleEnsemble(VelocityModel model, double particle_mass)
    : model_(model), particle_mass_(particle_mass) {
  if (!(particle_mass > 0.0) || !std::isfinite(particle_mass))
    throw std::invalid_argument("ensemble: particle mass must be positive");
}

Particle& ParticleEnsemble::spawn(const std::array<double, 2>& x, const std::array<double, 2>& v,
                                  bool ghost) {
  Particle p;
  p.x = x;
  p.v = v;
  p.id = next_id_++;
  p.ghost = ghost;
  particles_.push_back(p);
  return particles_.back();
}

std::size_t ParticleEnsemble::live_count() const {
  return static_cast<std::size_t>(std::count_if(particles_.begin(), particles_.end(),
                                                [](const Particle& p) { return p.alive && !p.ghost; }));
}

void ParticleEnsemble::compact() {
  std::erase_if(particles_, [](const Particle& p) { return !p.alive; });
}

std::array<double, 2> equilibrium_label(RngStream& stream, VelocityModel model) {
  if (model == VelocityModel::two_speed) return {uniform_unit(stream) < 0.5 ? 1.0 : -1.0, 0.0};
  return uniform_direction(stream, geometry_of(model));
}

namespace {

std::array<double, 2> point_in_cell(const SpatialGrid& grid, long i, long j,
                                    const std::array<double, 2>& u) {
  const double x = grid.x0() + (static_cast<double>(i) + u[0]) * grid.dx();
  const double y = grid.dimension() == 2 ? grid.y0() + (static_cast<double>(j) + u[1]) * grid.dy()
                                         : 0.0;
  return {x, y};
}

ParticleEnsemble sample_impl(const GridFunction& density, std::size_t n, double mass,
                             VelocityModel model, std::uint64_t seed) {
  const SpatialGrid& grid = density.grid;
  std::vector<double> cdf(density.values.size());
  double acc = 0.0;
  for (std::size_t c = 0; c < cdf.size(); ++c) {
    acc += density[c];
    cdf[c] = acc;
  }
  ParticleEnsemble ens(model, mass);
  ens.particles().reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t id = ens.next_id();
    RngStream pick = particle_stream(seed, id, 0, Slot::cell_choice);
    const double target = uniform_unit(pick) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    auto c = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1));
    while (density[c] <= 0.0 && c > 0) --c;  // guard against target landing on a flat tail
    RngStream pos = particle_stream(seed, id, 0, Slot::inject_position);
    RngStream lab = particle_stream(seed, id, 0, Slot::direction);
    const auto u = uniform_pair(pos);
    const long i = static_cast<long>(c % grid.nx());
    const long j = static_cast<long>(c / grid.nx());
    ens.spawn(point_in_cell(grid, i, j, u), equilibrium_label(lab, model));
  }
  return ens;
}

void check_density(const GridFunction& density) {
  double total = 0.0;
  for (double d : density.values) {
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("sample_from_density: density must be finite and >= 0");
    total += d;
  }
  if (total <= 0.0) throw std::invalid_argument("sample_from_density: density is identically zero");
}

}  // namespace

ParticleEnsemble sample_from_density(const GridFunction& density, std::size_t n_particles,
                                     VelocityModel model, std::uint64_t seed) {
  if (n_particles == 0) throw std::invalid_argument("sample_from_density: N must be positive");
  check_density(density);
  const double mass = density.integral() / static_cast<double>(n_particles);
  return sample_impl(density, n_particles, mass, model, seed);
}

ParticleEnsemble sample_with_mass(const GridFunction& density, double particle_mass,
                                  VelocityModel model, std::uint64_t seed) {
  if (!(particle_mass > 0.0)) throw std::invalid_argument("sample_with_mass: mass must be positive");
  for (double d : density.values)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw std::invalid_argument("sample_with_mass: density must be finite and >= 0");
  const double total = density.integral();
  const auto n = static_cast<std::size_t>(std::llround(total / particle_mass));
  if (n == 0) return ParticleEnsemble(model, particle_mass);
  return sample_impl(density, n, particle_mass, model, seed);
}

std::vector<double> histogram_density(const ParticleEnsemble& ensemble, const SpatialGrid& grid) {
  std::vector<double> counts(grid.cell_count(), 0.0);
  for (const Particle& p : ensemble.particles()) {
    if (!p.alive || p.ghost) continue;
    const auto cell = grid.locate(p.x);
    if (!cell) throw std::logic_error("histogram_density: live particle outside the domain");
    counts[*cell] += 1.0;
  }
  const double scale = ensemble.particle_mass() / grid.cell_volume();
  for (double& c : counts) c *= scale;
  return counts;
}

FluxEstimate flux_estimate(const ParticleEnsemble& ensemble, const SpatialGrid& grid,
                           const std::vector<double>& eps) {
  if (eps.size() != grid.cell_count())
    throw std::invalid_argument("flux_estimate: eps field does not match grid");
  const bool two_d = grid.dimension() == 2;
  FluxEstimate f;
  f.jx.assign(grid.cell_count(), 0.0);
  if (two_d) f.jy.assign(grid.cell_count(), 0.0);
  for (const Particle& p : ensemble.particles()) {
    if (!p.alive || p.ghost) continue;
    const auto cell = grid.locate(p.x);
    if (!cell) throw std::logic_error("flux_estimate: live particle outside the domain");
    f.jx[*cell] += p.v[0];
    if (two_d) f.jy[*cell] += p.v[1];
  }
  const double m = ensemble.particle_mass() / grid.cell_volume();
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (eps[c] == 0.0) throw std::domain_error("flux_estimate: eps = 0, flux undefined");
    f.jx[c] *= m / eps[c];
    if (two_d) f.jy[c] *= m / eps[c];
  }
  return f;
}

CellStats cell_stats(const ParticleEnsemble& ensemble, const SpatialGrid& grid,
                     const std::vector<double>& eps) {
  CellStats s;
  s.rho = histogram_density(ensemble, grid);
  auto f = flux_estimate(ensemble, grid, eps);
  s.jx = std::move(f.jx);
  s.jy = std::move(f.jy);
  s.accum_count = 1;
  return s;
}

void time_average_accumulate(CellStats& acc, const CellStats& cur) {
  if (acc.accum_count == 0) {
    acc.rho.assign(cur.rho.size(), 0.0);
    acc.jx.assign(cur.jx.size(), 0.0);
    acc.jy.assign(cur.jy.size(), 0.0);
  }
  if (acc.rho.size() != cur.rho.size() || acc.jx.size() != cur.jx.size() ||
      acc.jy.size() != cur.jy.size())
    throw std::invalid_argument("time_average_accumulate: snapshot shape mismatch");
  ++acc.accum_count;
  const double w = 1.0 / static_cast<double>(acc.accum_count);
  auto blend = [w](std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t c = 0; c < a.size(); ++c) a[c] += (b[c] - a[c]) * w;
  };
  blend(acc.rho, cur.rho);
  blend(acc.jx, cur.jx);
  blend(acc.jy, cur.jy);
}

BoundaryConditions BoundaryConditions::all_periodic() {
  return {BoundarySide::periodic(), BoundarySide::periodic(), BoundarySide::periodic(),
          BoundarySide::periodic()};
}

void BoundaryConditions::validate(const SpatialGrid& grid) const {
  using K = BoundarySide::Kind;
  auto check = [](const BoundarySide& s) {
    if (s.kind == K::dirichlet && !(s.rho >= 0.0 && std::isfinite(s.rho)))
      throw std::invalid_argument("boundary: prescribed density must be finite and >= 0");
  };
  check(left);
  check(right);
  if ((left.kind == K::periodic) != (right.kind == K::periodic))
    throw std::invalid_argument("boundary: periodic x requires both left and right periodic");
  if (grid.dimension() == 2) {
    check(bottom);
    check(top);
    if ((bottom.kind == K::periodic) != (top.kind == K::periodic))
      throw std::invalid_argument("boundary: periodic y requires both bottom and top periodic");
  }
}

double ghost_cell_expected_count(double rho, const SpatialGrid& grid, double particle_mass) {
  return rho * grid.cell_volume() / particle_mass;
}

namespace {

using K = BoundarySide::Kind;

// Returns false if the particle left through a dirichlet side.
bool settle_axis(double& x, double& v, double lo, double hi, const BoundarySide& low_side,
                 const BoundarySide& high_side) {
  if (x >= lo && x < hi) return true;
  if (low_side.kind == K::periodic) {
    const double len = hi - lo;
    x = lo + std::fmod(x - lo, len);
    if (x < lo) x += len;
    if (x >= hi) x = lo;  // fmod rounding at the seam
    return true;
  }
  for (int guard = 0; guard < 64 && !(x >= lo && x < hi); ++guard) {
    const BoundarySide& side = x < lo ? low_side : high_side;
    if (side.kind == K::dirichlet) return false;
    x = x < lo ? 2.0 * lo - x : 2.0 * hi - x;
    v = -v;
    if (x == hi) x = std::nextafter(hi, lo);
  }
  return x >= lo && x < hi;
}

}  // namespace

void apply_boundary(ParticleEnsemble& ensemble, const SpatialGrid& grid,
                    const BoundaryConditions& bc, std::size_t ghost_layers, std::uint64_t seed,
                    std::uint64_t epoch) {
  const bool two_d = grid.dimension() == 2;
  for (Particle& p : ensemble.particles()) {
    if (!p.alive) continue;
    bool in = settle_axis(p.x[0], p.v[0], grid.x0(), grid.x1(), bc.left, bc.right);
    if (in && two_d) in = settle_axis(p.x[1], p.v[1], grid.y0(), grid.y1(), bc.bottom, bc.top);
    if (!in) {
      p.alive = false;
    } else {
      p.ghost = false;
    }
  }
  ensemble.compact();

  const long g = static_cast<long>(std::max<std::size_t>(1, ghost_layers));
  const long gl = bc.left.kind == K::dirichlet ? g : 0;
  const long gr = bc.right.kind == K::dirichlet ? g : 0;
  const long gb = two_d && bc.bottom.kind == K::dirichlet ? g : 0;
  const long gt = two_d && bc.top.kind == K::dirichlet ? g : 0;
  if (gl + gr + gb + gt == 0) return;

  const long nx = static_cast<long>(grid.nx());
  const long ny = static_cast<long>(grid.ny());
  const double m = ensemble.particle_mass();
  std::uint64_t serial = 0;
  for (long j = -gb; j < ny + gt; ++j) {
    for (long i = -gl; i < nx + gr; ++i) {
      if (i >= 0 && i < nx && j >= 0 && j < ny) continue;
      const BoundarySide& side = i < 0 ? bc.left : i >= nx ? bc.right : j < 0 ? bc.bottom : bc.top;
      const std::uint64_t cell_stream = kBoundaryStreamBase + serial++;
      if (side.kind != K::dirichlet || side.rho == 0.0) continue;
      const double expected = ghost_cell_expected_count(side.rho, grid, m);
      RngStream count_stream{seed, cell_stream, counter_for(epoch, Slot::inject_count)};
      auto n = static_cast<std::size_t>(std::floor(expected));
      if (uniform_unit(count_stream) < expected - std::floor(expected)) ++n;
      for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t id = ensemble.next_id();
        RngStream pos = particle_stream(seed, id, epoch, Slot::inject_position);
        RngStream lab = particle_stream(seed, id, epoch, Slot::inject_direction);
        ensemble.spawn(point_in_cell(grid, i, j, uniform_pair(pos)),
                       equilibrium_label(lab, ensemble.model()), true);
      }
    }
  }
}

}  // namespace apmc
