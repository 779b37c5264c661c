#pragma once

#include <cstdint>

namespace fhrd {

// Seed plus derived stream id. Identical (seed, stream_id) pairs reproduce an
// identical draw sequence on any platform and under any parallel schedule.
struct RngSeed {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

std::uint64_t split_mix64(std::uint64_t& state);

// Hash-combines a seed with substream labels (replicate index, area index,
// cell index, ...) into a fresh stream id. Distinct label tuples map to
// statistically independent streams.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0);

// xoshiro256++ generator with exact (integer-only state) transitions plus the
// sampling routines the FHRD pipeline needs. Each instance is owned by one
// task; sibling tasks get sibling streams via derive_stream.
class Rng {
 public:
  explicit Rng(RngSeed s);
  Rng(std::uint64_t seed, std::uint64_t stream_id) : Rng(RngSeed{seed, stream_id}) {}

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double next_double();
  // Standard normal via the Marsaglia polar method.
  double normal();
  // Gamma(shape, scale), Marsaglia-Tsang squeeze/rejection; valid for any
  // shape > 0 (shape < 1 handled by boosting).
  double gamma(double shape, double scale);
  // chi-square(df) == Gamma(df/2, 2).
  double chisq(int df);

 private:
  std::uint64_t s_[4];
};

}  // namespace fhrd
