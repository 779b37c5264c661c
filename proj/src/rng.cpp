#include "fhrd/rng.hpp"

#include <cmath>
#include <string>

#include "fhrd/types.hpp"

namespace fhrd {

std::uint64_t split_mix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
  std::uint64_t state = seed;
  std::uint64_t h = split_mix64(state);
  state ^= a + 0x9e3779b97f4a7c15ULL;
  h ^= split_mix64(state);
  state ^= b + 0xd1b54a32d192ed03ULL;
  h ^= split_mix64(state);
  state ^= c + 0x8cb92ba72f3d8dd7ULL;
  h ^= split_mix64(state);
  return h;
}

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(RngSeed s) {
  std::uint64_t state = s.seed ^ rotl(s.stream_id, 17) ^ 0x6a09e667f3bcc909ULL;
  // Mix stream_id in twice so (seed, stream) and (stream, seed) differ.
  state += s.stream_id;
  for (auto& word : s_) word = split_mix64(state);
  // All-zero state is invalid for xoshiro; splitmix output makes it
  // astronomically unlikely, but guard anyway.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  for (;;) {
    const double u = 2.0 * next_double() - 1.0;
    const double v = 2.0 * next_double() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::gamma(double shape, double scale) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("gamma sampling: shape must be > 0, got " + std::to_string(shape));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("gamma sampling: scale must be > 0, got " + std::to_string(scale));
  }
  if (shape < 1.0) {
    // Boost: draw Gamma(shape+1) and reduce by U^{1/shape}.
    const double g = gamma(shape + 1.0, scale);
    double u = next_double();
    while (u <= 0.0) u = next_double();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double t;
    do {
      x = normal();
      t = 1.0 + c * x;
    } while (t <= 0.0);
    const double w = t * t * t;
    const double u = next_double();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * w * scale;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - w + std::log(w))) return d * w * scale;
  }
}

double Rng::chisq(int df) {
  if (df < 1) throw DomainError("chisq sampling: df must be >= 1");
  return gamma(0.5 * df, 2.0);
}

}  // namespace fhrd
