#pragma once

#include <complex>
#include <cmath>
#include <cstdint>

namespace covertsim {

// Deterministic random stream (xoshiro256++ seeded through splitmix64).
// The simulator derives hierarchical substreams from a master seed so that
// runs are reproducible bit-for-bit and independent across runs/modules.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
  }

  // Child stream derived from (this stream's seed material, label).
  RandomStream substream(std::uint64_t label) const {
    std::uint64_t mix = state_[0];
    mix ^= 0x9e3779b97f4a7c15ull + (label << 1);
    std::uint64_t sm = mix;
    std::uint64_t a = splitmix64(sm);
    sm ^= state_[1] + (label * 0xbf58476d1ce4e5b9ull);
    std::uint64_t b = splitmix64(sm);
    return RandomStream(a ^ (b << 1) ^ label);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller (no cached state, fully stream-deterministic).
  double gauss() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Circularly-symmetric complex normal, unit variance (variance 1/2 per part).
  std::complex<double> cgauss() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace covertsim
