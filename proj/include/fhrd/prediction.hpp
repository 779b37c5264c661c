#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fhrd/estimation.hpp"
#include "fhrd/quadrature.hpp"
#include "fhrd/types.hpp"

namespace fhrd {

struct AreaPrediction {
  std::string area_id;
  double y = 0.0;
  double synthetic = 0.0;  // z'beta
  double b = 0.0;          // shrinkage weight on the synthetic part
  double xi_ab = 0.0;
  double xi_aeb = 0.0;
  std::optional<double> e;         // exact Bayes shrinkage, quadrature-based
  std::optional<double> xi_bayes;  // z'beta + (1-e)(y - z'beta)
  std::optional<double> delta_cab;
};

struct PredictionSet {
  std::vector<AreaPrediction> areas;
};

struct BenchmarkWeights {
  std::vector<double> w;
  // Requires w_j >= 0, sum w_j == 1 within 1e-12, sum w_j^2 > 0.
  void validate() const;
};

// Closed-form predictor z'beta + (1-B)(y - z'beta).
double predict_ab(const ModelParams& params, const AreaRecord& record);

// Plug-in of the fitted parameters, area by area. Does not re-fit.
PredictionSet predict_aeb(const FitResult& fit, const std::vector<AreaRecord>& data);

// E[(tau2*eta+1)^{-1} | y, V]: ratio of two eta-integrals after the
// substitution eta = 2t/(v+gamma), evaluated in log space with a shared
// max-subtraction and adaptive quadrature.
double bayes_shrinkage(const ModelParams& params, const AreaRecord& record,
                       const QuadratureOptions& quad = {});

double predict_bayes(const ModelParams& params, const AreaRecord& record,
                     const QuadratureOptions& quad = {});

// Fills e / xi_bayes on an existing prediction set.
void add_bayes_predictions(PredictionSet& set, const ModelParams& params,
                           const std::vector<AreaRecord>& data, const QuadratureOptions& quad = {});

// delta_i = xi_aeb_i + w_i/sum(w^2) * (ybar_w - sum_j w_j xi_aeb_j).
// The returned vector satisfies sum_j w_j delta_j == ybar_w to 1e-10.
std::vector<double> benchmark_cab(const PredictionSet& predictions,
                                  const std::vector<AreaRecord>& data,
                                  const BenchmarkWeights& weights);

}  // namespace fhrd
