#pragma once

#include <cstddef>
#include <cstdint>

#include "apmc/ensemble.hpp"
#include "apmc/grid.hpp"

namespace apmc {

/// Where a step draws its randomness from and how many threads it may use.
/// epoch follows the layout in stochastics.hpp (time step n uses n + 1).
struct StepContext {
  std::uint64_t seed = 0;
  std::uint64_t epoch = 1;
  unsigned workers = 1;
};

/// Boundary treatment applied at the end of a full step.
struct BoundaryContext {
  const SpatialGrid* grid = nullptr;
  BoundaryConditions conditions = BoundaryConditions::all_periodic();
  std::size_t ghost_layers = 1;
};

/// Event counts of one (sub-)step, used by statistical tests and reports.
struct StepCounts {
  std::size_t resampled = 0;
  std::size_t absorbed = 0;

  StepCounts& operator+=(const StepCounts& o) {
    resampled += o.resampled;
    absorbed += o.absorbed;
    return *this;
  }
};

inline void finish_step(ParticleEnsemble& ensemble, const StepContext& ctx,
                        const BoundaryContext* boundary) {
  ensemble.compact();
  if (boundary && boundary->grid)
    apply_boundary(ensemble, *boundary->grid, boundary->conditions, boundary->ghost_layers,
                   ctx.seed, ctx.epoch);
}

}  // namespace apmc
