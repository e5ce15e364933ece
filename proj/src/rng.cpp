#include "twinforge/rng.hpp"

#include <cmath>

namespace twinforge {

std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view element_id) {
  std::uint64_t state = master_seed ^ fnv1a64(element_id);
  return splitmix64_next(state);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : state_) word = splitmix64_next(sm);
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t v = next_u64();
  while (v >= limit) v = next_u64();
  return v % bound;
}

namespace {

double sample_normal(double mean, double stddev, Rng& rng) {
  // Box-Muller, cosine branch only. The spare is intentionally discarded so a
  // sampler call always consumes exactly two uniforms: per-element draw
  // counts stay independent of call history.
  double u1 = rng.next_unit();
  while (u1 <= 0.0) u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * 3.14159265358979323846 * u2;
  return mean + stddev * r * std::cos(theta);
}

double sample_gamma(double shape, double scale, Rng& rng) {
  // Marsaglia-Tsang squeeze; shape < 1 boosted through the U^(1/shape) trick.
  if (shape < 1.0) {
    const double boost = std::pow(rng.next_unit(), 1.0 / shape);
    return sample_gamma(shape + 1.0, scale, rng) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = sample_normal(0.0, 1.0, rng);
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    const double u = rng.next_unit();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v * scale;
  }
}

} // namespace

double sample(const DistSpec& spec, Rng& rng) {
  switch (spec.family) {
    case DistFamily::Deterministic:
      return spec.a;
    case DistFamily::Exponential: {
      double u = rng.next_unit();
      while (u <= 0.0) u = rng.next_unit();
      return -std::log(u) / spec.a;
    }
    case DistFamily::Normal:
      return sample_normal(spec.a, spec.b, rng);
    case DistFamily::Lognormal:
      return std::exp(sample_normal(spec.a, spec.b, rng));
    case DistFamily::Uniform:
      return spec.a + (spec.b - spec.a) * rng.next_unit();
    case DistFamily::Gamma:
      return sample_gamma(spec.a, spec.b, rng);
  }
  return 0.0;
}

} // namespace twinforge
