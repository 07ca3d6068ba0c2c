#include <cmath>
#include <numbers>

#include "apmc/radiative_transport.hpp"
#include "apmc/reference_solvers.hpp"
#include "doctest.h"

using namespace apmc;
using namespace apmc::rt;

namespace {

struct Setup {
  SpatialGrid grid;
  CoefficientField coef;
  RtParams params;

  Setup(SpatialGrid g, double eps, double ss, double sa, double dt,
        VelocityGeometry geom = VelocityGeometry::slab1d)
      : grid(std::move(g)), coef(CoefficientField::uniform(grid, eps, ss, sa)) {
    params = {dt, geom, &grid, &coef, NoiseSpeed::unscaled};
  }
  Setup(const Setup&) = delete;
};

ParticleEnsemble point_source(std::size_t n, VelocityModel model, std::array<double, 2> x,
                              std::uint64_t seed) {
  ParticleEnsemble ens(model, 1.0 / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    RngStream s = particle_stream(seed, k, 0, Slot::direction);
    ens.spawn(x, equilibrium_label(s, model));
  }
  return ens;
}

double sample_variance(const ParticleEnsemble& e, double x0, double* m4 = nullptr) {
  double mean = 0.0, var = 0.0, q = 0.0;
  const double n = static_cast<double>(e.live_count());
  for (const auto& p : e.particles()) mean += p.x[0] - x0;
  mean /= n;
  for (const auto& p : e.particles()) {
    const double d = p.x[0] - x0 - mean;
    var += d * d;
    q += d * d * d * d;
  }
  if (m4) *m4 = q / n;
  return var / (n - 1.0);
}

}  // namespace

TEST_CASE("diffusion coefficient") {
  CHECK(diffusion_coefficient(VelocityGeometry::slab1d) == doctest::Approx(1.0 / 3.0));
  CHECK(diffusion_coefficient(VelocityGeometry::circle2d) == doctest::Approx(0.5));
  std::vector<double> nodes, weights;
  ref::gauss_legendre(8, nodes, weights);
  double quad = 0.0;
  for (std::size_t m = 0; m < nodes.size(); ++m) quad += 0.5 * weights[m] * nodes[m] * nodes[m];
  CHECK(std::abs(quad - diffusion_coefficient(VelocityGeometry::slab1d)) <= 1e-12);
}

TEST_CASE("collision weights, absorption probability and drift bound") {
  CHECK(apmc_redraw_weight({1.0, 0.0, 0.0}, 0.1) == 0.0);
  CHECK(apmc_redraw_weight({0.0, 1.0, 0.0}, 0.1) == 1.0);
  CHECK(apmc_redraw_weight({0.1, 1.0, 0.0}, 0.01) == doctest::Approx(0.5));
  CHECK(apmc_absorb_probability({1.0, 1.0, 0.0}, 0.3) == 0.0);
  CHECK(apmc_absorb_probability({1.0, 1.0, 1.0}, 1.0) == doctest::Approx(0.5));
  CHECK(standard_resample_probability({0.1, 0.0, 0.0}, 0.1) == 0.0);
  for (int a = -30; a <= 5; ++a)
    for (double ss : {0.0, 0.5, 1.0, 7.0})
      for (double dt : {1e-5, 1e-3, 0.1}) {
        const LocalCoefficients c{std::pow(10.0, a / 5.0), ss, 0.0};
        CHECK(std::abs(apmc_keep_weight(c, dt) + apmc_redraw_weight(c, dt) - 1.0) <= 1e-15);
        if (ss > 0.0) CHECK(apmc_drift_speed(c, dt) <= (1.0 + 1e-15) / (2.0 * std::sqrt(ss * dt)));
      }
  CHECK_THROWS_AS(apmc_drift_speed({0.0, 0.0, 1.0}, 0.1), std::domain_error);
}

TEST_CASE("apmc move: drift, eps = 0 limit and the 2D noise direction") {
  const std::array<double, 2> o{0.0, 0.0};
  CHECK(apmc_move(o, {1.0, 0.0}, {1.0, 1.0, 0.0}, 1.0, NoiseSpeed::unscaled, 0.0)[0] ==
        doctest::Approx(0.5));
  for (double v : {1.0, -0.4, 0.05})
    for (double xi : {-1.1, 0.3}) {
      const auto y = apmc_move({0.2, 0.0}, {v, 0.0}, {0.0, 1.0, 0.0}, 0.01, NoiseSpeed::unscaled, xi);
      CHECK(y[0] == doctest::Approx(0.2 + std::sqrt(2.0 * 0.01 * v * v) * xi * (v > 0 ? 1 : -1)));
      CHECK(y[1] == 0.0);
    }
  // Per-step variance 2 dt V^2/sigma_s at eps = 0: forced draw xi = 1.
  for (double ss : {0.5, 2.0}) {
    const double v = 0.6, dt = 0.02;
    const double d = apmc_move(o, {v, 0.0}, {0.0, ss, 0.0}, dt, NoiseSpeed::unscaled, 1.0)[0];
    CHECK(d * d == doctest::Approx(2.0 * dt * v * v / ss).epsilon(1e-14));
  }
  // The scaled reading vanishes at eps = 0.
  CHECK(apmc_move(o, {1.0, 0.0}, {0.0, 1.0, 0.0}, 0.01, NoiseSpeed::scaled, 1.0)[0] == 0.0);

  RngStream s{4, 4, 0};
  for (int k = 0; k < 1000; ++k) {
    const auto dir = uniform_direction(s, VelocityGeometry::circle2d);
    const auto d = apmc_move(o, dir, {0.05, 1.0, 0.0}, 0.01, NoiseSpeed::unscaled, 2.0 * uniform_unit(s) - 1.0);
    CHECK(std::abs(d[0] * dir[1] - d[1] * dir[0]) <= 1e-15 * std::hypot(d[0], d[1]));
  }
}

TEST_CASE("standard step") {
  Setup s(SpatialGrid::line(-1.0, 1.0, 10), 0.1, 0.0, 0.0, 0.01);
  ParticleEnsemble one(VelocityModel::slab1d, 1.0);
  one.spawn({0.0, 0.0}, {1.0, 0.0});
  const auto c = standard_step(one, s.params, {1, 1, 1});
  CHECK(one.particles()[0].x[0] == doctest::Approx(0.1));
  CHECK(c.resampled == 0);

  const std::size_t n = 1'000'000;
  Setup a(SpatialGrid::line(-1.0, 1.0, 10), 1.0, 1.0, 1.0, std::numbers::ln2);
  CHECK(standard_absorb_probability({1.0, 1.0, 1.0}, std::numbers::ln2) == doctest::Approx(0.5));
  auto ens = point_source(n, VelocityModel::slab1d, {0.0, 0.0}, 2);
  // Short transport: each particle moves at most ln 2 < 1.
  const auto counts = standard_step(ens, a.params, {2, 1, 4});
  const double surv = ens.live_count() / static_cast<double>(n);
  CHECK(counts.absorbed + ens.live_count() == n);
  CHECK(std::abs(surv - 0.5) <= 3.0 * std::sqrt(0.25 / n));

  Setup z(SpatialGrid::line(-1.0, 1.0, 10), 0.0, 1.0, 0.0, 0.01);
  CHECK_THROWS_AS(standard_step(ens, z.params, {2, 2, 1}), std::domain_error);
}

TEST_CASE("apmc collision: redraw fraction, isotropy and density preservation") {
  const std::size_t n = 1'000'000;
  Setup half(SpatialGrid::line(0.0, 1.0, 20), 0.1, 1.0, 0.0, 0.01);
  auto ens = point_source(n, VelocityModel::slab1d, {0.5, 0.0}, 3);
  const auto counts = apmc_collision(ens, half.params, {3, 1, 4});
  CHECK(std::abs(counts.resampled / static_cast<double>(n) - 0.5) <= 3.0 * std::sqrt(0.25 / n));

  for (auto geom : {VelocityGeometry::slab1d, VelocityGeometry::circle2d}) {
    const bool two_d = geom == VelocityGeometry::circle2d;
    Setup all(two_d ? SpatialGrid::plane(0.0, 1.0, 4, 0.0, 1.0, 4) : SpatialGrid::line(0.0, 1.0, 4),
              0.0, 1.0, 0.0, 0.01, geom);
    ParticleEnsemble e(two_d ? VelocityModel::circle2d : VelocityModel::slab1d, 1.0 / n);
    for (std::size_t k = 0; k < n; ++k) e.spawn({0.3, 0.3}, {two_d ? 0.6 : 1.0, two_d ? 0.8 : 0.0});
    const auto before = histogram_density(e, all.grid);
    CHECK(apmc_collision(e, all.params, {9, 1, 4}).resampled == n);
    CHECK(histogram_density(e, all.grid) == before);
    double m0 = 0.0, m1 = 0.0;
    for (const auto& p : e.particles()) {
      m0 += p.v[0];
      m1 += p.v[1];
    }
    const double sd = std::sqrt(diffusion_coefficient(geom) / n);
    CHECK(std::abs(m0 / n) <= 3.0 * sd);
    if (two_d) CHECK(std::abs(m1 / n) <= 3.0 * sd);
  }

  Setup none(SpatialGrid::line(0.0, 1.0, 4), 0.5, 0.0, 0.0, 0.01);
  CHECK(apmc_collision(ens, none.params, {3, 2, 4}).resampled == 0);
}

TEST_CASE("apmc absorption: expected mass decays as (1 + sigma_a dt)^-n") {
  Setup none(SpatialGrid::line(0.0, 1.0, 4), 0.5, 1.0, 0.0, 0.1);
  auto e = point_source(1000, VelocityModel::slab1d, {0.5, 0.0}, 1);
  CHECK(apmc_absorption(e, none.params, {1, 1, 1}).absorbed == 0);

  Setup s(SpatialGrid::line(0.0, 1.0, 4), 0.5, 1.0, 1.0, 0.1);
  const std::size_t n = 1000, reps = 200;
  const int steps = 10;
  double total = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const std::uint64_t seed = replicate_seed(77, r);
    auto ens = point_source(n, VelocityModel::slab1d, {0.5, 0.0}, seed);
    for (int k = 1; k <= steps; ++k) {
      apmc_absorption(ens, s.params, {seed, static_cast<std::uint64_t>(k), 1});
      ens.compact();
    }
    total += ens.total_mass();
  }
  const double q = std::pow(1.0 + 0.1, -steps);
  const double sd = std::sqrt(q * (1.0 - q) / n / reps);
  CHECK(std::abs(total / reps - q) <= 3.0 * sd);
}

TEST_CASE("eps = 0 slab: position variance grows as 2 D t") {
  Setup s(SpatialGrid::line(-10.0, 10.0, 20), 0.0, 1.0, 0.0, 0.01);
  const std::size_t n = 200'000;
  auto ens = point_source(n, VelocityModel::slab1d, {0.0, 0.0}, 12);
  const int steps = 50;
  for (int k = 1; k <= steps; ++k) apmc_step(ens, s.params, {12, static_cast<std::uint64_t>(k), 4});
  double m4 = 0.0;
  const double var = sample_variance(ens, 0.0, &m4);
  const double expected = 2.0 / 3.0 * steps * 0.01;
  CHECK(std::abs(var - expected) <= 3.0 * std::sqrt((m4 - var * var) / n));
}

TEST_CASE("micro-macro transport") {
  const std::array<double, 2> o{0.0, 0.0};
  const double dt = 0.01;
  CHECK(micro_macro_move(o, {1.0, 0.0}, {0.0, 1.0, 0.0}, dt, 1.0 / 3.0, 1, {1.0, 5.0})[0] ==
        doctest::Approx(std::sqrt(2.0 * dt / 3.0)));
  for (double v : {-0.7, 0.2, 1.0}) {
    const LocalCoefficients c{0.3, 2.0, 0.0};
    CHECK(micro_macro_move(o, {v, 0.0}, c, dt, 1.0 / 3.0, 1, {0.0, 0.0})[0] ==
          doctest::Approx(apmc_move(o, {v, 0.0}, c, dt, NoiseSpeed::unscaled, 0.0)[0]));
  }

  // Long-run spreading rate agrees with the even-odd scheme.
  Setup s(SpatialGrid::line(-10.0, 10.0, 20), 0.0, 1.0, 0.0, dt);
  const std::size_t n = 200'000;
  auto a = point_source(n, VelocityModel::slab1d, {0.0, 0.0}, 31);
  auto b = a;
  for (int k = 1; k <= 40; ++k) {
    apmc_step(a, s.params, {31, static_cast<std::uint64_t>(k), 4});
    micro_macro_step(b, s.params, {32, static_cast<std::uint64_t>(k), 4});
  }
  double m4a = 0.0, m4b = 0.0;
  const double va = sample_variance(a, 0.0, &m4a), vb = sample_variance(b, 0.0, &m4b);
  const double sd = std::sqrt((m4a - va * va) / n + (m4b - vb * vb) / n);
  CHECK(std::abs(va - vb) <= 3.0 * sd);
}

TEST_CASE("coefficients are frozen at the start-of-step cell") {
  const auto grid = SpatialGrid::line(0.0, 1.0, 2);
  CoefficientField coef{{1.0, 0.01}, {1.0, 1.0}, {0.0, 0.0}};
  const RtParams p{0.01, VelocityGeometry::slab1d, &grid, &coef, NoiseSpeed::unscaled};
  ParticleEnsemble ens(VelocityModel::slab1d, 1.0);
  ens.spawn({0.4999, 0.0}, {1.0, 0.0});
  const std::uint64_t id = ens.particles()[0].id;
  RngStream st = particle_stream(7, id, 1, Slot::transport);
  const double xi = standard_normal(st);
  const auto expected = apmc_move({0.4999, 0.0}, {1.0, 0.0}, {1.0, 1.0, 0.0}, 0.01, NoiseSpeed::unscaled, xi);
  apmc_step(ens, p, {7, 1, 1});
  CHECK(ens.particles()[0].x[0] == expected[0]);
}

TEST_CASE("apmc step: periodic mass and agreement with the diffusion limit") {
  const auto grid = SpatialGrid::line(0.0, 1.0, 50);
  auto coef = CoefficientField::uniform(grid, 0.01, 1.0, 0.0);
  const double dt = 1e-3;
  const RtParams p{dt, VelocityGeometry::slab1d, &grid, &coef, NoiseSpeed::unscaled};
  GridFunction rho0(grid);
  for (std::size_t c = 0; c < 50; ++c) rho0[c] = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * grid.center(c)[0]);
  const std::size_t n = 200'000;
  auto ens = sample_from_density(rho0, n, VelocityModel::slab1d, 10);
  BoundaryContext bc{&grid, BoundaryConditions::all_periodic(), 1};
  const int steps = 100;
  for (int k = 1; k <= steps; ++k) apmc_step(ens, p, {10, static_cast<std::uint64_t>(k), 4}, &bc);
  CHECK(ens.live_count() == n);

  const auto prob = ref::diffusion_problem(grid, 1.0 / 3.0, coef, BoundaryConditions::all_periodic());
  const auto heat = ref::heat_fd_solve(prob, rho0, steps * dt, 0.5 * ref::heat_max_dt(prob));
  const auto h = histogram_density(ens, grid);
  double l1 = 0.0;
  for (std::size_t c = 0; c < 50; ++c) l1 += std::abs(h[c] - heat[c]) * grid.dx();
  CHECK(l1 <= 0.05);
}
