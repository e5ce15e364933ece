#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "twinforge/model.hpp"

namespace twinforge {

// xoshiro256** seeded through splitmix64. Chosen over std::mt19937 +
// std::<distribution> because the standard distributions are
// implementation-defined: same seed, different bytes across stdlibs. Every
// draw here is specified arithmetic, so traces replay bit-for-bit anywhere.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_unit();   // [0, 1), 53-bit resolution
  // Uniform integer in [0, bound) without modulo bias; bound > 0.
  std::uint64_t next_below(std::uint64_t bound);

private:
  std::array<std::uint64_t, 4> state_;
};

std::uint64_t splitmix64_next(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view text);

// Stream seed for one stochastic element. Mixing the element id in means
// adding or removing an element never perturbs any other element's draws.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view element_id);

// One variate. Samplers are hand-rolled (inverse CDF, Box-Muller without
// spare caching, Marsaglia-Tsang) for the same reproducibility reason.
// Requires spec.valid().
double sample(const DistSpec& spec, Rng& rng);

} // namespace twinforge
