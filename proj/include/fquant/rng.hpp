#pragma once

#include <cstdint>
#include <span>

namespace fquant {

// Counter-based random stream: draw k is a pure function of (seed, k), so any
// sub-range can be generated independently (parallel chunks, replay) and the
// same seed + counter always reproduces the same value.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t counter = 0;

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t k);

  // Uniform draw in (0,1) at absolute counter position k.
  double uniform_at(std::uint64_t k) const;
  // Standard gaussian at gaussian index g (Box-Muller over uniform pair 2*(g/2), 2*(g/2)+1).
  double gaussian_at(std::uint64_t g) const;

  double next_uniform() { return uniform_at(counter++); }
  double next_gaussian() { return gaussian_at(counter++); }

  // Independent stream addressed by a salt; used to give each phase of a
  // multi-stage run its own counter space.
  RngStream derive(std::uint64_t salt) const;
};

// Fills `out` with standard gaussians at indices [first, first + out.size()).
void fill_gaussians(const RngStream& s, std::uint64_t first, std::span<double> out);

}  // namespace fquant
