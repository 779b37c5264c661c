#include "fhrd/prediction.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fhrd/model.hpp"

namespace fhrd {

void BenchmarkWeights::validate() const {
  if (w.empty()) throw ValidationError("benchmark weights: empty vector");
  double sum = 0.0, sum_sq = 0.0;
  for (double wj : w) {
    if (!std::isfinite(wj) || wj < 0.0) {
      throw ValidationError("benchmark weights: entries must be nonnegative");
    }
    sum += wj;
    sum_sq += wj * wj;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ValidationError("benchmark weights: sum is " + std::to_string(sum) +
                          ", must equal 1 within 1e-12");
  }
  if (!(sum_sq > 0.0)) throw ValidationError("benchmark weights: all weights are zero");
}

double predict_ab(const ModelParams& params, const AreaRecord& record) {
  const double synthetic = dot(record.z, params.beta);
  const double b = shrinkage(params.tau2, params.alpha, params.gamma, record.v, record.n).b;
  return synthetic + (1.0 - b) * (record.y - synthetic);
}

PredictionSet predict_aeb(const FitResult& fit, const std::vector<AreaRecord>& data) {
  validate_dataset(data);
  fit.params.validate();
  PredictionSet set;
  set.areas.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const AreaRecord& r = data[i];
    AreaPrediction& p = set.areas[i];
    p.area_id = r.area_id;
    p.y = r.y;
    p.synthetic = dot(r.z, fit.params.beta);
    p.b = shrinkage(fit.params.tau2, fit.params.alpha, fit.params.gamma, r.v, r.n).b;
    p.xi_ab = p.synthetic + (1.0 - p.b) * (r.y - p.synthetic);
    p.xi_aeb = p.xi_ab;
  }
  return set;
}

namespace {

// Integrand pieces after eta = 2t/(v+gamma). The Gamma(s) kernel t^{s-1}e^{-t}
// carries the mass; the bounded factor is
//   D(eta) = (tau2*eta+1)^{-1/2} exp(-eta r^2 / (2 (tau2*eta+1))).
struct ShrinkageIntegrand {
  double s;       // (n+1+alpha)/2
  double tau2;
  double scale;   // 2/(v+gamma)
  double r2;      // squared residual (y - z'beta)^2

  double log_weight(double t) const {
    if (t <= 0.0) return -std::numeric_limits<double>::infinity();
    const double eta = scale * t;
    const double denom = tau2 * eta + 1.0;
    return (s - 1.0) * std::log(t) - t - 0.5 * std::log(denom) -
           0.5 * eta * r2 / denom;
  }

  double factor(double t) const {
    const double eta = scale * t;
    return 1.0 / (tau2 * eta + 1.0);
  }
};

}  // namespace

double bayes_shrinkage(const ModelParams& params, const AreaRecord& record,
                       const QuadratureOptions& quad) {
  params.validate();
  if (!(record.v > 0.0)) throw DomainError("bayes_shrinkage: v must be > 0");
  if (record.n < 1) throw DomainError("bayes_shrinkage: n must be >= 1");
  if (params.tau2 == 0.0) return 1.0;  // integrand factor is identically 1

  ShrinkageIntegrand w;
  w.s = 0.5 * (record.n + 1.0 + params.alpha);
  w.tau2 = params.tau2;
  w.scale = 2.0 / (record.v + params.gamma);
  const double resid = record.y - dot(record.z, params.beta);
  w.r2 = resid * resid;

  const double upper = w.s + quad.truncation_multiplier * std::sqrt(w.s) + 20.0;

  // Shared max-subtraction: scan a coarse grid (plus the Gamma-kernel mode)
  // for the peak of the log-weight.
  double log_max = w.log_weight(std::min(std::max(w.s - 1.0, 1e-8), upper));
  constexpr int kScan = 32;
  for (int i = 1; i <= kScan; ++i) {
    const double t = upper * static_cast<double>(i) / (kScan + 1);
    log_max = std::max(log_max, w.log_weight(t));
  }

  auto weight = [&](double t) {
    const double lw = w.log_weight(t);
    return std::isfinite(lw) ? std::exp(lw - log_max) : 0.0;
  };
  auto weighted_factor = [&](double t) { return weight(t) * w.factor(t); };

  const double denom =
      integrate_adaptive(weight, 0.0, upper, quad.rel_tol, quad.max_subdivisions);
  const double numer =
      integrate_adaptive(weighted_factor, 0.0, upper, quad.rel_tol, quad.max_subdivisions);
  if (!(denom > 0.0) || !std::isfinite(denom) || !std::isfinite(numer)) {
    throw NumericError("bayes_shrinkage: quadrature failed (denominator " +
                       std::to_string(denom) + ")");
  }
  return numer / denom;
}

double predict_bayes(const ModelParams& params, const AreaRecord& record,
                     const QuadratureOptions& quad) {
  const double synthetic = dot(record.z, params.beta);
  const double e = bayes_shrinkage(params, record, quad);
  return synthetic + (1.0 - e) * (record.y - synthetic);
}

void add_bayes_predictions(PredictionSet& set, const ModelParams& params,
                           const std::vector<AreaRecord>& data, const QuadratureOptions& quad) {
  if (set.areas.size() != data.size()) {
    throw ValidationError("add_bayes_predictions: prediction/data size mismatch");
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = bayes_shrinkage(params, data[i], quad);
    set.areas[i].e = e;
    set.areas[i].xi_bayes =
        set.areas[i].synthetic + (1.0 - e) * (data[i].y - set.areas[i].synthetic);
  }
}

std::vector<double> benchmark_cab(const PredictionSet& predictions,
                                  const std::vector<AreaRecord>& data,
                                  const BenchmarkWeights& weights) {
  weights.validate();
  if (predictions.areas.size() != data.size() || weights.w.size() != data.size()) {
    throw ValidationError("benchmark_cab: size mismatch between predictions, data and weights");
  }
  double ybar_w = 0.0, wsum_pred = 0.0, sum_sq = 0.0;
  for (std::size_t j = 0; j < data.size(); ++j) {
    ybar_w += weights.w[j] * data[j].y;
    wsum_pred += weights.w[j] * predictions.areas[j].xi_aeb;
    sum_sq += weights.w[j] * weights.w[j];
  }
  const double gap = ybar_w - wsum_pred;
  std::vector<double> delta(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    delta[i] = predictions.areas[i].xi_aeb + weights.w[i] / sum_sq * gap;
  }
  return delta;
}

}  // namespace fhrd
