#include "apmc/reference_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace apmc::ref {

void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: need at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double dk = static_cast<double>(k);
        const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = dn * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
      p0 = p1;
      p1 = p2;
    }
    dp = n == 1 ? 1.0 : dn * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

VelocitySet velocity_set(VelocityModel model, std::size_t n) {
  VelocitySet v;
  if (model == VelocityModel::two_speed) {
    v.nodes = {-1.0, 1.0};
    v.weights = {0.5, 0.5};
    return v;
  }
  if (model != VelocityModel::slab1d)
    throw std::invalid_argument("kinetic solver: only two_speed and slab1d are supported");
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("kinetic solver: need an even node count");
  gauss_legendre(n, v.nodes, v.weights);
  for (double& w : v.weights) w *= 0.5;
  return v;
}

namespace {

void check_kinetic(const KineticProblem& p) {
  if (p.grid.dimension() != 1) throw std::invalid_argument("kinetic solver: 1D grids only");
  p.coefficients.validate(p.grid);
  for (double e : p.coefficients.eps)
    if (!(e > 0.0)) throw std::invalid_argument("kinetic solver: eps must be > 0 in every cell");
  p.boundary.validate(p.grid);
}

}  // namespace

KineticState equilibrium_state(const KineticProblem& problem, const GridFunction& rho) {
  check_kinetic(problem);
  if (!rho.grid.same_shape(problem.grid))
    throw std::invalid_argument("kinetic solver: initial data grid mismatch");
  KineticState s;
  s.velocities = velocity_set(problem.model, problem.velocity_nodes);
  s.g.resize(s.velocities.nodes.size());
  for (std::size_t m = 0; m < s.g.size(); ++m) {
    s.g[m].resize(rho.values.size());
    for (std::size_t c = 0; c < rho.values.size(); ++c) s.g[m][c] = s.velocities.weights[m] * rho[c];
  }
  return s;
}

GridFunction density(const KineticState& state, const SpatialGrid& grid) {
  GridFunction rho(grid);
  for (const auto& gm : state.g)
    for (std::size_t c = 0; c < gm.size(); ++c) rho[c] += gm[c];
  return rho;
}

GridFunction flux(const KineticState& state, const KineticProblem& problem) {
  GridFunction j(problem.grid);
  for (std::size_t m = 0; m < state.g.size(); ++m)
    for (std::size_t c = 0; c < j.values.size(); ++c)
      j[c] += state.velocities.nodes[m] * state.g[m][c] / problem.coefficients.eps[c];
  return j;
}

double kinetic_max_dt(const KineticProblem& problem) {
  check_kinetic(problem);
  const double dx = problem.grid.dx();
  const auto& cf = problem.coefficients;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < cf.size(); ++c) {
    best = std::min(best, cf.eps[c] * dx);
    const double rate = cf.sigma_s[c] / (cf.eps[c] * cf.eps[c]) + cf.sigma_a[c];
    if (rate > 0.0) best = std::min(best, 1.0 / rate);
  }
  return best;
}

void kinetic_upwind_advance(KineticState& state, const KineticProblem& problem, double t_end,
                            double dt) {
  const double limit = kinetic_max_dt(problem);
  if (!(dt > 0.0) || dt > limit * (1.0 + 1e-12))
    throw std::invalid_argument("kinetic_upwind: dt violates the CFL/relaxation bound");
  if (t_end <= state.time) return;
  const std::size_t steps = static_cast<std::size_t>(std::ceil((t_end - state.time) / dt - 1e-9));
  const double h = (t_end - state.time) / static_cast<double>(steps);

  using K = BoundarySide::Kind;
  const auto& cf = problem.coefficients;
  const auto& bc = problem.boundary;
  const std::size_t n = problem.grid.nx();
  const std::size_t nm = state.g.size();
  const double lam = h / problem.grid.dx();
  std::vector<double> face(n + 1), rho(n);
  const auto& nodes = state.velocities.nodes;
  const auto& w = state.velocities.weights;

  for (std::size_t step = 0; step < steps; ++step) {
    std::vector<std::vector<double>> next = state.g;
    for (std::size_t m = 0; m < nm; ++m) {
      const double mu = nodes[m];
      const auto& g = state.g[m];
      const std::size_t mirror = nm - 1 - m;
      // Interior faces.
      for (std::size_t f = 1; f < n; ++f) {
        const std::size_t up = mu > 0.0 ? f - 1 : f;
        face[f] = mu / cf.eps[up] * g[up];
      }
      // Left face.
      if (mu > 0.0) {
        double inflow = 0.0;
        if (bc.left.kind == K::periodic) inflow = mu / cf.eps[n - 1] * g[n - 1];
        else if (bc.left.kind == K::dirichlet) inflow = mu / cf.eps[0] * w[m] * bc.left.rho;
        else inflow = mu / cf.eps[0] * state.g[mirror][0];
        face[0] = inflow;
      } else {
        face[0] = mu / cf.eps[0] * g[0];
      }
      // Right face.
      if (mu < 0.0) {
        double inflow = 0.0;
        if (bc.right.kind == K::periodic) inflow = mu / cf.eps[0] * g[0];
        else if (bc.right.kind == K::dirichlet) inflow = mu / cf.eps[n - 1] * w[m] * bc.right.rho;
        else inflow = mu / cf.eps[n - 1] * state.g[mirror][n - 1];
        face[n] = inflow;
      } else {
        face[n] = mu / cf.eps[n - 1] * g[n - 1];
      }
      if (bc.left.kind == K::periodic) {
        // Same physical face, keep the two ends identical.
        const double shared = mu > 0.0 ? face[0] : face[n];
        face[0] = face[n] = shared;
      }
      for (std::size_t c = 0; c < n; ++c) next[m][c] = g[c] - lam * (face[c + 1] - face[c]);
    }
    std::fill(rho.begin(), rho.end(), 0.0);
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t c = 0; c < n; ++c) rho[c] += next[m][c];
    for (std::size_t m = 0; m < nm; ++m) {
      for (std::size_t c = 0; c < n; ++c) {
        const double relax = cf.sigma_s[c] / (cf.eps[c] * cf.eps[c]);
        double& gm = next[m][c];
        gm += h * (relax * (w[m] * rho[c] - gm) - cf.sigma_a[c] * gm);
      }
    }
    state.g = std::move(next);
    state.time += h;
  }
  state.time = t_end;
}

KineticSolution kinetic_upwind_solve(const KineticProblem& problem, const GridFunction& rho0,
                                     double t_end, double dt) {
  KineticState s = equilibrium_state(problem, rho0);
  kinetic_upwind_advance(s, problem, t_end, dt);
  return {density(s, problem.grid), flux(s, problem)};
}

KineticSolution kinetic_steady_solve(const KineticProblem& problem, const SteadyOptions& opt) {
  check_kinetic(problem);
  using K = BoundarySide::Kind;
  const auto& bc = problem.boundary;
  if (bc.left.kind == K::periodic || bc.right.kind == K::periodic)
    throw std::invalid_argument("kinetic_steady: periodic sides have no unique steady state");
  if (bc.left.kind != K::dirichlet && bc.right.kind != K::dirichlet)
    throw std::invalid_argument("kinetic_steady: need at least one dirichlet side");
  if (!(opt.optical_step > 0.0) || opt.min_subcells == 0)
    throw std::invalid_argument("kinetic_steady: bad sub-cell options");

  const VelocitySet vs = velocity_set(problem.model, problem.velocity_nodes);
  const std::size_t nm = vs.nodes.size();
  const auto& cf = problem.coefficients;
  const std::size_t nx = problem.grid.nx();
  const double dx = problem.grid.dx();
  const bool cons = opt.interface == InterfaceForm::conservative;

  // Sub-cells: owner grid cell and width.
  std::vector<std::size_t> owner;
  std::vector<double> width;
  for (std::size_t c = 0; c < nx; ++c) {
    const double tau = (cf.sigma_s[c] / cf.eps[c] + cf.eps[c] * cf.sigma_a[c]) * dx;
    const auto sub = std::max(opt.min_subcells, static_cast<std::size_t>(std::ceil(tau / opt.optical_step)));
    for (std::size_t k = 0; k < sub; ++k) {
      owner.push_back(c);
      width.push_back(dx / static_cast<double>(sub));
    }
  }
  const std::size_t nk = owner.size();
  const std::size_t n = (nk + 1) * nm;

  // Unknown u at faces: f/eps (conservative) or f (nonconservative); both
  // satisfy mu u' + (s_s/eps + eps s_a) u = (s_s/eps) <u> inside a cell.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(nk * nm * (2 * nm + 2) + nm);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  auto idx = [nm](std::size_t face, std::size_t m) { return static_cast<int>(face * nm + m); };
  int row = 0;
  auto boundary_rows = [&](const BoundarySide& side, std::size_t face, std::size_t cell, bool incoming_positive) {
    for (std::size_t m = 0; m < nm; ++m) {
      if ((vs.nodes[m] > 0.0) != incoming_positive) continue;
      trip.emplace_back(row, idx(face, m), 1.0);
      if (side.kind == K::dirichlet) {
        rhs[row] = cons ? side.rho / cf.eps[cell] : side.rho;
      } else {  // reflecting: incoming equals the mirrored outgoing direction
        trip.emplace_back(row, idx(face, nm - 1 - m), -1.0);
      }
      ++row;
    }
  };
  boundary_rows(bc.left, 0, 0, true);
  for (std::size_t k = 0; k < nk; ++k) {
    const std::size_t c = owner[k];
    const double st = cf.sigma_s[c] / cf.eps[c] + cf.eps[c] * cf.sigma_a[c];
    const double sc = cf.sigma_s[c] / cf.eps[c];
    const double h = width[k];
    for (std::size_t m = 0; m < nm; ++m) {
      const double mu = vs.nodes[m];
      trip.emplace_back(row, idx(k + 1, m), mu / h + 0.5 * st);
      trip.emplace_back(row, idx(k, m), -mu / h + 0.5 * st);
      if (sc > 0.0) {
        for (std::size_t q = 0; q < nm; ++q) {
          trip.emplace_back(row, idx(k + 1, q), -0.5 * sc * vs.weights[q]);
          trip.emplace_back(row, idx(k, q), -0.5 * sc * vs.weights[q]);
        }
      }
      ++row;
    }
  }
  boundary_rows(bc.right, nk, nx - 1, false);
  if (static_cast<std::size_t>(row) != n) throw std::logic_error("kinetic_steady: row count mismatch");

  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("kinetic_steady: factorisation failed");
  const Eigen::VectorXd u = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw std::runtime_error("kinetic_steady: solve failed");

  KineticSolution out{GridFunction(problem.grid), GridFunction(problem.grid)};
  for (std::size_t k = 0; k < nk; ++k) {
    const std::size_t c = owner[k];
    const double scale = cons ? cf.eps[c] : 1.0;
    double rho = 0.0, cur = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
      const double avg = 0.5 * (u[idx(k, m)] + u[idx(k + 1, m)]) * scale;
      rho += vs.weights[m] * avg;
      cur += vs.weights[m] * vs.nodes[m] * avg / cf.eps[c];
    }
    out.rho[c] += rho * width[k] / dx;
    out.j[c] += cur * width[k] / dx;
  }
  return out;
}

DiffusionProblem diffusion_problem(const SpatialGrid& grid, double diffusion,
                                   const CoefficientField& coefficients,
                                   const BoundaryConditions& boundary) {
  return {grid, diffusion, coefficients.sigma_s, coefficients.sigma_a, boundary};
}

namespace {

struct Stencil {
  // Face conductances (already divided by the squared spacing) per cell:
  // west, east, south, north; and boundary face values.
  std::vector<double> west, east, south, north;
};

double harmonic(double a, double b) { return a + b > 0.0 ? 2.0 * a * b / (a + b) : 0.0; }

Stencil build_stencil(const DiffusionProblem& p) {
  const SpatialGrid& g = p.grid;
  const std::size_t nc = g.cell_count();
  if (p.sigma_s.size() != nc || p.sigma_a.size() != nc)
    throw std::invalid_argument("heat_fd: coefficient size does not match grid");
  if (!(p.diffusion > 0.0)) throw std::invalid_argument("heat_fd: diffusion must be > 0");
  std::vector<double> k(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    if (!(p.sigma_s[c] > 0.0)) throw std::invalid_argument("heat_fd: sigma_s must be > 0");
    if (!(p.sigma_a[c] >= 0.0)) throw std::invalid_argument("heat_fd: sigma_a must be >= 0");
    k[c] = p.diffusion / p.sigma_s[c];
  }
  p.boundary.validate(g);
  using K = BoundarySide::Kind;
  const std::size_t nx = g.nx(), ny = g.ny();
  const double ix2 = 1.0 / (g.dx() * g.dx());
  const double iy2 = g.dimension() == 2 ? 1.0 / (g.dy() * g.dy()) : 0.0;
  Stencil s;
  s.west.assign(nc, 0.0);
  s.east.assign(nc, 0.0);
  s.south.assign(nc, 0.0);
  s.north.assign(nc, 0.0);
  auto side_coef = [](const BoundarySide& b, double kc, double inv2) {
    // Dirichlet value sits on the face, half a cell away.
    if (b.kind == K::dirichlet) return 2.0 * kc * inv2;
    return 0.0;
  };
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      if (i > 0) s.west[c] = harmonic(k[c], k[g.index(i - 1, j)]) * ix2;
      else if (p.boundary.left.kind == K::periodic) s.west[c] = harmonic(k[c], k[g.index(nx - 1, j)]) * ix2;
      else s.west[c] = side_coef(p.boundary.left, k[c], ix2);
      if (i + 1 < nx) s.east[c] = harmonic(k[c], k[g.index(i + 1, j)]) * ix2;
      else if (p.boundary.right.kind == K::periodic) s.east[c] = harmonic(k[c], k[g.index(0, j)]) * ix2;
      else s.east[c] = side_coef(p.boundary.right, k[c], ix2);
      if (g.dimension() == 2) {
        if (j > 0) s.south[c] = harmonic(k[c], k[g.index(i, j - 1)]) * iy2;
        else if (p.boundary.bottom.kind == K::periodic) s.south[c] = harmonic(k[c], k[g.index(i, ny - 1)]) * iy2;
        else s.south[c] = side_coef(p.boundary.bottom, k[c], iy2);
        if (j + 1 < ny) s.north[c] = harmonic(k[c], k[g.index(i, j + 1)]) * iy2;
        else if (p.boundary.top.kind == K::periodic) s.north[c] = harmonic(k[c], k[g.index(i, 0)]) * iy2;
        else s.north[c] = side_coef(p.boundary.top, k[c], iy2);
      }
    }
  }
  return s;
}

void heat_step(const DiffusionProblem& p, const Stencil& s, std::vector<double>& rho,
               std::vector<double>& next, double dt) {
  using K = BoundarySide::Kind;
  const SpatialGrid& g = p.grid;
  const std::size_t nx = g.nx(), ny = g.ny();
  const bool two_d = g.dimension() == 2;
  auto value = [&](long i, long j, std::size_t c, const BoundarySide& side) {
    // Neighbour value across a face; dirichlet faces supply the prescribed density.
    if (side.kind == K::dirichlet) return side.rho;
    if (side.kind == K::reflecting) return rho[c];
    const long ii = (i + static_cast<long>(nx)) % static_cast<long>(nx);
    const long jj = (j + static_cast<long>(ny)) % static_cast<long>(ny);
    return rho[g.index(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj))];
  };
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      const long li = static_cast<long>(i), lj = static_cast<long>(j);
      const double w = i > 0 ? rho[c - 1] : value(li - 1, lj, c, p.boundary.left);
      const double e = i + 1 < nx ? rho[c + 1] : value(li + 1, lj, c, p.boundary.right);
      double lap = s.west[c] * (w - rho[c]) + s.east[c] * (e - rho[c]);
      if (two_d) {
        const double so = j > 0 ? rho[c - nx] : value(li, lj - 1, c, p.boundary.bottom);
        const double no = j + 1 < ny ? rho[c + nx] : value(li, lj + 1, c, p.boundary.top);
        lap += s.south[c] * (so - rho[c]) + s.north[c] * (no - rho[c]);
      }
      next[c] = (rho[c] + dt * lap) * std::exp(-p.sigma_a[c] * dt);
    }
  }
  rho.swap(next);
}

}  // namespace

double heat_max_dt(const DiffusionProblem& p) {
  const Stencil s = build_stencil(p);
  double worst = 0.0;
  for (std::size_t c = 0; c < s.west.size(); ++c)
    worst = std::max(worst, s.west[c] + s.east[c] + s.south[c] + s.north[c]);
  return worst > 0.0 ? 1.0 / worst : std::numeric_limits<double>::infinity();
}

GridFunction heat_fd_solve(const DiffusionProblem& p, const GridFunction& rho0, double t_end,
                           double dt) {
  if (!rho0.grid.same_shape(p.grid)) throw std::invalid_argument("heat_fd: initial data grid mismatch");
  const Stencil s = build_stencil(p);
  if (!(dt > 0.0) || dt > heat_max_dt(p) * (1.0 + 1e-12))
    throw std::invalid_argument("heat_fd: dt exceeds the explicit stability bound");
  GridFunction out = rho0;
  if (t_end <= 0.0) return out;
  const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  std::vector<double> next(out.values.size());
  for (std::size_t n = 0; n < steps; ++n) heat_step(p, s, out.values, next, h);
  return out;
}

GridFunction heat_fd_steady(const DiffusionProblem& p, const GridFunction& rho0, double dt,
                            double tolerance, double max_time) {
  const Stencil s = build_stencil(p);
  if (!(dt > 0.0) || dt > heat_max_dt(p) * (1.0 + 1e-12))
    throw std::invalid_argument("heat_fd: dt exceeds the explicit stability bound");
  GridFunction out = rho0;
  std::vector<double> next(out.values.size());
  double t = 0.0;
  while (t < max_time) {
    const std::vector<double> before = out.values;
    const std::size_t chunk = std::max<std::size_t>(1, static_cast<std::size_t>(1.0 / dt));
    for (std::size_t n = 0; n < chunk; ++n) heat_step(p, s, out.values, next, dt);
    const double span = static_cast<double>(chunk) * dt;
    t += span;
    double change = 0.0, norm = 0.0;
    for (std::size_t c = 0; c < before.size(); ++c) {
      change += std::abs(out[c] - before[c]);
      norm += std::abs(out[c]);
    }
    if (norm > 0.0 && change / norm / span <= tolerance) break;
  }
  return out;
}

GridFunction restrict_to(const GridFunction& fine, const SpatialGrid& coarse) {
  const SpatialGrid& f = fine.grid;
  if (f.dimension() != coarse.dimension() || f.nx() % coarse.nx() != 0 || f.ny() % coarse.ny() != 0)
    throw std::invalid_argument("restrict_to: grids are not nested");
  const std::size_t rx = f.nx() / coarse.nx(), ry = f.ny() / coarse.ny();
  GridFunction out(coarse);
  for (std::size_t j = 0; j < f.ny(); ++j)
    for (std::size_t i = 0; i < f.nx(); ++i)
      out[coarse.index(i / rx, j / ry)] += fine[f.index(i, j)];
  const double inv = 1.0 / static_cast<double>(rx * ry);
  for (double& v : out.values) v *= inv;
  return out;
}

}  // namespace apmc::ref
