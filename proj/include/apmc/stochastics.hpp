#pragma once

#include <array>
#include <cstdint>

namespace apmc {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream_id, counter). Per-particle streams use the particle id as
/// stream_id, so draws do not depend on how particles are scheduled.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::uint64_t counter = 0;

  bool operator==(const RngStream&) const = default;
};

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// Each draw below consumes exactly one counter value.
double uniform_unit(RngStream& stream);
/// Two independent uniforms on [0,1) from one counter.
std::array<double, 2> uniform_pair(RngStream& stream);
double standard_normal(RngStream& stream);
/// Two independent N(0,1) draws from one counter (both Box-Muller branches).
std::array<double, 2> standard_normal_pair(RngStream& stream);

enum class VelocityGeometry { slab1d, circle2d };

/// Uniform direction on the velocity set: slab1d gives a scalar in [-1,1]
/// (second component 0), circle2d a unit vector.
std::array<double, 2> uniform_direction(RngStream& stream, VelocityGeometry geometry);

/// Seed of replicate `r` within the family of `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate);

// Per-step counter layout. Epoch 0 is initial sampling, epoch n+1 is time
// step n. Each sub-step owns a slot, so no two sub-steps share a counter.
enum class Slot : std::uint64_t {
  transport = 0,
  collision = 1,
  direction = 2,
  absorption = 3,
  inject_position = 4,
  inject_direction = 5,
  inject_count = 6,
  cell_choice = 7,
};
inline constexpr std::uint64_t kSlotsPerEpoch = 8;

constexpr std::uint64_t counter_for(std::uint64_t epoch, Slot slot) {
  return epoch * kSlotsPerEpoch + static_cast<std::uint64_t>(slot);
}

inline RngStream particle_stream(std::uint64_t seed, std::uint64_t particle_id,
                                 std::uint64_t epoch, Slot slot) {
  return RngStream{seed, particle_id, counter_for(epoch, slot)};
}

/// Stream ids at or above this value are reserved for boundary ghost cells.
inline constexpr std::uint64_t kBoundaryStreamBase = std::uint64_t{1} << 63;

}  // namespace apmc
