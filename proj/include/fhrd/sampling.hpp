#pragma once

#include <vector>

#include "fhrd/rng.hpp"
#include "fhrd/types.hpp"

namespace fhrd {

struct DesignPoint {
  std::vector<double> z;
  int n = 0;
};

// Generated dataset with latent states retained (bootstrap MSE terms need
// the latent means).
struct SyntheticDataset {
  std::vector<AreaRecord> records;
  std::vector<LatentState> latents;
  ModelParams params_used;
};

double sample_standard_normal(Rng& rng);
double sample_chisq(Rng& rng, int df);
// Gamma(shape, scale): mean shape*scale. The dispersion prior Ga(alpha/2,
// 2/gamma) therefore has mean alpha/gamma and variance 2*alpha/gamma^2.
double sample_gamma(Rng& rng, double shape, double scale);

// Per area i, using substream derive_stream(seed.seed, seed.stream_id, i):
// eta ~ Ga(alpha/2, 2/gamma), sigma2 = 1/eta, xi ~ N(z'beta, tau2),
// y ~ N(xi, sigma2), v = sigma2 * chisq(n). Areas are mutually independent
// and the output is a pure function of (params, design, seed).
SyntheticDataset generate_fhrd(const ModelParams& params, const std::vector<DesignPoint>& design,
                               RngSeed seed);

// Same generator fed with fitted parameters; latents retained for the
// bootstrap MSE terms.
SyntheticDataset generate_bootstrap(const ModelParams& fitted,
                                    const std::vector<DesignPoint>& design, RngSeed seed);

std::vector<DesignPoint> design_from_records(const std::vector<AreaRecord>& records);

}  // namespace fhrd
