#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fhrd/quadrature.hpp"
#include "fhrd/types.hpp"

namespace fhrd {

struct ExperimentCell {
  int m = 30;
  double alpha = 1.0;
  double tau2 = 1.0;
};

// Study configuration. The defaults reproduce the reference protocol:
// beta = 10, gamma = 1, z_i = 1, p = 1, n_i = 10, eight cells over
// m in {30, 60} x alpha in {1, 4} x tau2 in {1, 4}.
struct ExperimentSpec {
  std::string which = "table1";       // table1 | table2 | table3 | custom
  std::vector<ExperimentCell> cells;  // empty -> the default eight cells
  double gamma = 1.0;
  std::vector<double> beta{10.0};
  int n = 10;
  int replications = 0;            // K (table1) or T (table2/table3); 0 -> default
  int bootstrap = 0;               // B; 0 -> default
  int true_mse_replications = 0;   // R; 0 -> default
  std::uint64_t seed = 20170501;
  bool parallel = true;
  bool desk = false;               // reduced-budget preset
  QuadratureOptions quadrature;

  // Fills zero counts with the study defaults (K=5000, T=1000, B=1000,
  // R=5000) or the desk preset (K=1000, T=200, B=200, R=1000) and the
  // default cell grid. Throws ValidationError on unusable fields.
  void resolve();
};

struct StatValue {
  std::string name;
  double value = 0.0;
};

struct CellResult {
  ExperimentCell cell;
  std::vector<StatValue> stats;
  double stat(const std::string& name) const;  // throws if absent
};

struct ExperimentResult {
  std::string which;
  std::uint64_t seed = 0;
  std::vector<CellResult> cells;
};

// Bias and SRMSE of the exact and closed-form predictors under known
// parameters, averaged over areas and replications, with Monte Carlo SEs.
ExperimentResult run_predictor_study(const ExperimentSpec& spec);

// Sampling mean/SD of each parameter estimate over repeated fits.
ExperimentResult run_estimator_study(const ExperimentSpec& spec);

// Simulated true MSE of the AEB predictor versus the mean of its bootstrap
// estimator, with the percentage relative bias.
ExperimentResult run_mse_study(const ExperimentSpec& spec);

// Dispatch on spec.which.
ExperimentResult run_study(const ExperimentSpec& spec);

}  // namespace fhrd
