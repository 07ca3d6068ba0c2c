#include "apmc/stochastics.hpp"

#include <cmath>
#include <numbers>

namespace apmc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> block(const RngStream& s) {
  return philox4x32(
      {static_cast<std::uint32_t>(s.counter), static_cast<std::uint32_t>(s.counter >> 32),
       static_cast<std::uint32_t>(s.stream_id), static_cast<std::uint32_t>(s.stream_id >> 32)},
      {static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32)});
}

// 53 high bits of a 64-bit word mapped to [0,1).
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t w = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double uniform_unit(RngStream& stream) {
  const auto b = block(stream);
  ++stream.counter;
  return to_unit(b[0], b[1]);
}

std::array<double, 2> uniform_pair(RngStream& stream) {
  const auto b = block(stream);
  ++stream.counter;
  return {to_unit(b[0], b[1]), to_unit(b[2], b[3])};
}

std::array<double, 2> standard_normal_pair(RngStream& stream) {
  const auto b = block(stream);
  ++stream.counter;
  const double u1 = 1.0 - to_unit(b[0], b[1]);  // (0,1]
  const double u2 = to_unit(b[2], b[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

double standard_normal(RngStream& stream) { return standard_normal_pair(stream)[0]; }

std::array<double, 2> uniform_direction(RngStream& stream, VelocityGeometry geometry) {
  const double u = uniform_unit(stream);
  if (geometry == VelocityGeometry::slab1d) return {2.0 * u - 1.0, 0.0};
  const double theta = 2.0 * std::numbers::pi * u;
  return {std::cos(theta), std::sin(theta)};
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t replicate) {
  // splitmix64 finalizer over a Weyl step; replicate 0 keeps the base seed.
  if (replicate == 0) return seed;
  std::uint64_t z = seed + replicate * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace apmc
