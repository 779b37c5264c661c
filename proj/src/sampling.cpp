#include "fhrd/sampling.hpp"

#include <cmath>
#include <string>

namespace fhrd {

double sample_standard_normal(Rng& rng) { return rng.normal(); }

double sample_chisq(Rng& rng, int df) { return rng.chisq(df); }

double sample_gamma(Rng& rng, double shape, double scale) { return rng.gamma(shape, scale); }

SyntheticDataset generate_fhrd(const ModelParams& params, const std::vector<DesignPoint>& design,
                               RngSeed seed) {
  params.validate();
  if (design.empty()) throw DomainError("generate_fhrd: design is empty");

  SyntheticDataset out;
  out.params_used = params;
  out.records.resize(design.size());
  out.latents.resize(design.size());

  const double sd_xi = std::sqrt(params.tau2);
  for (std::size_t i = 0; i < design.size(); ++i) {
    const DesignPoint& d = design[i];
    if (d.n < 1) throw DomainError("generate_fhrd: design n must be >= 1");
    Rng rng(seed.seed, derive_stream(seed.seed, seed.stream_id, i));

    const double eta = rng.gamma(0.5 * params.alpha, 2.0 / params.gamma);
    const double sigma2 = 1.0 / eta;
    const double mean = dot(d.z, params.beta);
    const double xi = mean + sd_xi * rng.normal();
    const double y = xi + std::sqrt(sigma2) * rng.normal();
    const double v = sigma2 * rng.chisq(d.n);

    AreaRecord& r = out.records[i];
    r.area_id = "area" + std::to_string(i + 1);
    r.y = y;
    r.v = v;
    r.n = d.n;
    r.z = d.z;
    out.latents[i] = LatentState{xi, sigma2};
  }
  return out;
}

SyntheticDataset generate_bootstrap(const ModelParams& fitted,
                                    const std::vector<DesignPoint>& design, RngSeed seed) {
  return generate_fhrd(fitted, design, seed);
}

std::vector<DesignPoint> design_from_records(const std::vector<AreaRecord>& records) {
  std::vector<DesignPoint> design(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    design[i].z = records[i].z;
    design[i].n = records[i].n;
  }
  return design;
}

}  // namespace fhrd
