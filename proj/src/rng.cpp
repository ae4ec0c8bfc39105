#include "fquant/rng.hpp"

#include <cmath>

namespace fquant {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

inline double to_unit(std::uint64_t z) {
  // (0,1) strictly: 53 mantissa bits, offset by half an ulp.
  return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

std::uint64_t RngStream::mix(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t z = seed + k * kGamma;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngStream::uniform_at(std::uint64_t k) const { return to_unit(mix(seed, k)); }

double RngStream::gaussian_at(std::uint64_t g) const {
  const std::uint64_t p = g / 2;
  const double u1 = uniform_at(2 * p);
  const double u2 = uniform_at(2 * p + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  return (g & 1) ? r * std::sin(a) : r * std::cos(a);
}

RngStream RngStream::derive(std::uint64_t salt) const {
  return RngStream{mix(seed ^ 0xD1B54A32D192ED03ULL, salt), 0};
}

void fill_gaussians(const RngStream& s, std::uint64_t first, std::span<double> out) {
  std::size_t i = 0;
  std::uint64_t g = first;
  // Leading odd index: take the sin branch of its pair.
  if ((g & 1) && i < out.size()) out[i++] = s.gaussian_at(g++);
  while (i + 1 < out.size()) {
    const std::uint64_t p = g / 2;
    const double u1 = s.uniform_at(2 * p);
    const double u2 = s.uniform_at(2 * p + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    out[i++] = r * std::cos(a);
    out[i++] = r * std::sin(a);
    g += 2;
  }
  if (i < out.size()) out[i] = s.gaussian_at(g);
}

}  // namespace fquant
