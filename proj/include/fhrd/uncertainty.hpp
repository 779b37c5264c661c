#pragma once

#include <vector>

#include "fhrd/estimation.hpp"
#include "fhrd/prediction.hpp"
#include "fhrd/rng.hpp"
#include "fhrd/sampling.hpp"
#include "fhrd/types.hpp"

namespace fhrd {

struct GFunctionValue {
  double value = 0.0;
  double tau2 = 0.0, alpha = 0.0, gamma = 0.0;
  double v = 0.0;
  int n = 0;
};

// G(theta, v) = (v+gamma)/(n-2+alpha) (1-B)^2 + tau2 B^2; requires n+alpha > 2.
GFunctionValue g_function(double tau2, double alpha, double gamma, double v, int n);

// Plug-in leading term: G(theta_hat, v_i).
double g11_hat(const FitResult& fit, const AreaRecord& record);

struct MseArea {
  std::string area_id;
  double g11 = 0.0;
  double g12_star = 0.0;
  double g2_star = 0.0;
  double g3_star = 0.0;
  double mse_aeb = 0.0;
  // Benchmark terms; meaningful only when MseReport::has_benchmark is set.
  double squared_gap = 0.0;
  double j_star = 0.0;
  double mse_cab = 0.0;
};

struct MseReport {
  std::vector<MseArea> areas;
  int replicates = 0;
  int dropped = 0;
  RngSeed seed;
  bool has_benchmark = false;
};

struct BootstrapOptions {
  int replicates = 1000;
  RngSeed seed;
  bool parallel = true;
  double max_drop_fraction = 0.1;  // hard error beyond this
  FitOptions refit;
};

// Per-replicate bootstrap terms; exposed so tests can drive it with a forced
// (degenerate) re-fit.
struct ReplicateTerms {
  std::vector<double> g12, g2, g3;
  std::vector<double> aeb_star;  // AEB prediction on the bootstrap data
  std::vector<double> j_term;    // (aeb*_i - xi*_i) * gap*; empty without weights
};

ReplicateTerms replicate_terms(const FitResult& fit, const FitResult& refit,
                               const SyntheticDataset& boot, const BenchmarkWeights* weights);

// Single parametric bootstrap for the g12*/g2*/g3* corrections. Replicate b
// draws from derive_stream(seed, b); a replicate whose re-fit throws is
// dropped and counted; dropping more than max_drop_fraction is a hard error.
// Output is bit-identical for a given (fit, data, options) regardless of the
// worker count.
MseReport mse_aeb(const FitResult& fit, const std::vector<AreaRecord>& data,
                  const BootstrapOptions& options);

// As mse_aeb, plus the benchmarked-MSE terms: the exact squared-gap term and
// the bootstrap cross term J*, reusing the same replicates.
MseReport mse_cab(const FitResult& fit, const std::vector<AreaRecord>& data,
                  const BenchmarkWeights& weights, const BootstrapOptions& options);

}  // namespace fhrd
