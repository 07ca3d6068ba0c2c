#pragma once

#include <cstddef>
#include <vector>

#include "apmc/ensemble.hpp"
#include "apmc/grid.hpp"

namespace apmc::ref {

/// Discrete-velocity kinetic problem on a 1D grid. Two-speed problems use
/// the nodes {+1,-1}; slab problems use Gauss-Legendre nodes on [-1,1].
struct KineticProblem {
  VelocityModel model = VelocityModel::two_speed;
  SpatialGrid grid;
  CoefficientField coefficients;
  BoundaryConditions boundary = BoundaryConditions::all_periodic();
  std::size_t velocity_nodes = 16;
};

/// Velocity discretisation: nodes mu_m and weights w_m with sum w_m = 1, so
/// that rho = sum_m g_m and the equilibrium is g_m = w_m rho.
struct VelocitySet {
  std::vector<double> nodes;
  std::vector<double> weights;
};
VelocitySet velocity_set(VelocityModel model, std::size_t nodes);

/// Gauss-Legendre nodes and weights on [-1,1] (weights sum to 2).
void gauss_legendre(std::size_t n, std::vector<double>& nodes, std::vector<double>& weights);

/// Per-node cell masses g[m][cell] (g_m = w_m f_m).
struct KineticState {
  VelocitySet velocities;
  std::vector<std::vector<double>> g;
  double time = 0.0;
};

KineticState equilibrium_state(const KineticProblem& problem, const GridFunction& rho);
GridFunction density(const KineticState& state, const SpatialGrid& grid);
/// j = sum_m mu_m g_m / eps per cell.
GridFunction flux(const KineticState& state, const KineticProblem& problem);

/// Largest stable step: min over cells of eps dx / max|mu| (transport) and
/// eps^2/sigma_s (relaxation).
double kinetic_max_dt(const KineticProblem& problem);

/// First-order upwind transport followed by explicit relaxation and
/// absorption, marched from state.time to t_end with steps of at most dt.
/// Throws std::invalid_argument when dt violates kinetic_max_dt.
void kinetic_upwind_advance(KineticState& state, const KineticProblem& problem, double t_end,
                            double dt);

struct KineticSolution {
  GridFunction rho;
  GridFunction j;
};
KineticSolution kinetic_upwind_solve(const KineticProblem& problem, const GridFunction& rho0,
                                     double t_end, double dt);

/// How the distribution behaves where eps jumps. `conservative` keeps the
/// particle flux (v/eps) f continuous, which is what a mass-conserving
/// particle method and kinetic_upwind_solve do. `nonconservative` keeps f
/// itself continuous, reading (v/eps) d_x f literally.
enum class InterfaceForm { conservative, nonconservative };

struct SteadyOptions {
  /// Largest sub-cell optical depth (sigma_s/eps + eps sigma_a) * h.
  double optical_step = 0.25;
  /// Sub-cells per grid cell, at least.
  std::size_t min_subcells = 8;
  InterfaceForm interface = InterfaceForm::conservative;
};

/// Stationary solution of the discrete-velocity problem, computed directly
/// (diamond differences on sub-cells, sparse LU) instead of by marching.
/// Needs at least one dirichlet side; periodic sides are rejected.
KineticSolution kinetic_steady_solve(const KineticProblem& problem,
                                     const SteadyOptions& options = {});

/// Diffusion-reaction problem d_t rho = D div((1/sigma_s) grad rho) - sigma_a rho
/// on a 1D or 2D grid. Dirichlet sides fix the value on the boundary face,
/// reflecting sides are zero-flux.
struct DiffusionProblem {
  SpatialGrid grid;
  double diffusion = 1.0;
  std::vector<double> sigma_s;
  std::vector<double> sigma_a;
  BoundaryConditions boundary = BoundaryConditions::all_periodic();
};

DiffusionProblem diffusion_problem(const SpatialGrid& grid, double diffusion,
                                   const CoefficientField& coefficients,
                                   const BoundaryConditions& boundary);

/// Largest step for which the explicit update keeps every diagonal entry
/// nonnegative.
double heat_max_dt(const DiffusionProblem& problem);

/// Explicit central differences with harmonic face averages of D/sigma_s;
/// absorption is applied exactly per step as exp(-sigma_a dt).
/// Throws std::invalid_argument when dt exceeds heat_max_dt.
GridFunction heat_fd_solve(const DiffusionProblem& problem, const GridFunction& rho0,
                           double t_end, double dt);

/// Steps from rho0 until the relative change per unit time falls below
/// `tolerance` (or max_time is reached). Returns the final profile.
GridFunction heat_fd_steady(const DiffusionProblem& problem, const GridFunction& rho0, double dt,
                            double tolerance, double max_time);

/// Averages a fine-grid function onto a grid whose cells are unions of
/// `factor` (per axis) fine cells.
GridFunction restrict_to(const GridFunction& fine, const SpatialGrid& coarse);

}  // namespace apmc::ref
