#pragma once

#include <cstdint>
#include <random>

namespace apdscore {

// Single-owner pseudo-random stream. Streams are identified by (seed, id):
// the engine state is derived from both by SplitMix64 mixing, so replicate r
// of a study can build its own stream without touching any other.
//
// All variates are produced from raw 64-bit engine output by code in this
// file, never by <random> distributions, so sequences are identical across
// standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

// Draw from Gamma(shape, 1). Marsaglia-Tsang squeeze/rejection for
// shape >= 1; smaller shapes are boosted through Gamma(shape + 1) * U^(1/shape).
double gamma_sample(double shape, RandomStream& rng);

}  // namespace apdscore
