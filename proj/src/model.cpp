#include "fhrd/model.hpp"

#include <cmath>
#include <string>

#include "fhrd/special_functions.hpp"

namespace fhrd {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void require(bool cond, const char* msg) {
  if (!cond) throw DomainError(msg);
}

}  // namespace

void ModelParams::validate() const {
  require(!beta.empty(), "beta must be nonempty");
  for (double b : beta) require(std::isfinite(b), "beta must be finite");
  require(std::isfinite(tau2) && tau2 >= 0.0, "tau2 must be >= 0");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "gamma must be > 0");
}

double dot(const std::vector<double>& z, const std::vector<double>& beta) {
  require(z.size() == beta.size(), "covariate/coefficient length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * beta[i];
  return s;
}

void validate_dataset(const std::vector<AreaRecord>& records) {
  if (records.empty()) throw ValidationError("dataset is empty");
  const std::size_t p = records.front().z.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const AreaRecord& r = records[i];
    const std::string where = " (record " + std::to_string(i) + ", area_id '" + r.area_id + "')";
    if (!std::isfinite(r.y)) throw ValidationError("y must be finite" + where);
    if (!std::isfinite(r.v) || r.v <= 0.0) throw ValidationError("v must be > 0" + where);
    if (r.n < 1) throw ValidationError("n must be >= 1" + where);
    if (r.z.size() != p) throw ValidationError("inconsistent covariate length" + where);
    if (r.z.empty() || r.z[0] != 1.0) throw ValidationError("z1 must equal 1" + where);
    for (double zj : r.z) {
      if (!std::isfinite(zj)) throw ValidationError("covariates must be finite" + where);
    }
  }
}

ShrinkageCoefficients shrinkage(double tau2, double alpha, double gamma, double v, int n) {
  require(std::isfinite(tau2) && tau2 >= 0.0, "shrinkage: tau2 must be >= 0");
  require(std::isfinite(alpha) && alpha > 0.0, "shrinkage: alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "shrinkage: gamma must be > 0");
  require(std::isfinite(v) && v > 0.0, "shrinkage: v must be > 0");
  require(n >= 1, "shrinkage: n must be >= 1");
  ShrinkageCoefficients c;
  c.a = (n + 1.0 + alpha) / (v + gamma);
  c.b = 1.0 / (1.0 + tau2 * c.a);
  return c;
}

double dual_shrunk_scale(double alpha, double gamma, double v, int n) {
  require(std::isfinite(alpha) && alpha > 0.0, "dual_shrunk_scale: alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "dual_shrunk_scale: gamma must be > 0");
  require(std::isfinite(v) && v > 0.0, "dual_shrunk_scale: v must be > 0");
  require(n >= 1, "dual_shrunk_scale: n must be >= 1");
  const double scale = (v + gamma) / (n + 1.0 + alpha);
  const double w = (n + 1.0) / (n + 1.0 + alpha);
  const double w_complement = alpha / (n + 1.0 + alpha);
  const double combo = w * v / (n + 1.0) + w_complement * gamma / alpha;
  if (std::abs(scale - combo) > 1e-12 * std::max(1.0, std::abs(scale))) {
    throw NumericError("dual_shrunk_scale: convex-combination identity violated");
  }
  return scale;
}

double log_marginal_v_density(double alpha, double gamma, int n, double v) {
  require(std::isfinite(alpha) && alpha > 0.0, "log_marginal_v_density: alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "log_marginal_v_density: gamma must be > 0");
  require(n >= 1, "log_marginal_v_density: n must be >= 1");
  require(std::isfinite(v) && v > 0.0, "log_marginal_v_density: v must be > 0");
  const double half_n = 0.5 * n;
  const double half_a = 0.5 * alpha;
  return special_log_gamma(half_n + half_a) - special_log_gamma(half_n) -
         special_log_gamma(half_a) + half_a * std::log(gamma) +
         (half_n - 1.0) * std::log(v) - (half_n + half_a) * std::log(v + gamma);
}

double log_joint_y_v_eta_density(const ModelParams& params, const AreaRecord& record,
                                 double eta) {
  params.validate();
  require(std::isfinite(record.v) && record.v > 0.0, "log_joint_y_v_eta_density: v must be > 0");
  require(std::isfinite(eta) && eta > 0.0, "log_joint_y_v_eta_density: eta must be > 0");
  require(std::isfinite(record.y), "log_joint_y_v_eta_density: y must be finite");
  require(record.n >= 1, "log_joint_y_v_eta_density: n must be >= 1");
  const double half_n = 0.5 * record.n;
  const double half_a = 0.5 * params.alpha;
  const double resid = record.y - dot(record.z, params.beta);
  const double denom = params.tau2 * eta + 1.0;
  const double log_c = -kLogTwoPi - half_n * std::log(2.0) - special_log_gamma(half_n);
  return log_c + half_a * (std::log(params.gamma) - std::log(2.0)) -
         special_log_gamma(half_a) + (half_n - 1.0) * std::log(record.v) +
         (half_n + half_a - 0.5) * std::log(eta) + 0.5 * kLogTwoPi - 0.5 * std::log(denom) -
         0.5 * eta * (record.v + params.gamma) - 0.5 * eta * resid * resid / denom;
}

double conditional_sigma2_mean(double alpha, double gamma, int n, double v) {
  require(std::isfinite(alpha) && alpha > 0.0, "conditional_sigma2_mean: alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "conditional_sigma2_mean: gamma must be > 0");
  require(std::isfinite(v) && v > 0.0, "conditional_sigma2_mean: v must be > 0");
  if (!(n + alpha > 2.0)) {
    throw DomainError("conditional_sigma2_mean: requires n + alpha > 2");
  }
  return (v + gamma) / (n + alpha - 2.0);
}

double analytic_moment_v(double alpha, double gamma, int n, double l, double k) {
  require(std::isfinite(alpha) && alpha > 0.0, "analytic_moment_v: alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "analytic_moment_v: gamma must be > 0");
  require(n >= 1, "analytic_moment_v: n must be >= 1");
  const double half_n = 0.5 * n;
  const double half_a = 0.5 * alpha;
  if (!(half_n + l > 0.0) || !(half_a + k - l > 0.0) || !(half_n + half_a + k > 0.0)) {
    throw DomainError("analytic_moment_v: moment integral diverges for these (l, k)");
  }
  const double log_m = special_log_gamma(half_n + half_a) - special_log_gamma(half_n + half_a + k) +
                       special_log_gamma(half_n + l) - special_log_gamma(half_n) +
                       special_log_gamma(half_a + k - l) - special_log_gamma(half_a) +
                       (l - k) * std::log(gamma);
  return std::exp(log_m);
}

double analytic_moment_v_log(double alpha, double gamma, int n, double l, double k) {
  const double base = analytic_moment_v(alpha, gamma, n, l, k);
  const double half_n = 0.5 * n;
  const double half_a = 0.5 * alpha;
  return base * (special_digamma(half_n + half_a + k) - special_digamma(half_a + k - l) +
                 std::log(gamma));
}

double expected_log_v_plus_gamma(double alpha, double gamma, int n) {
  require(std::isfinite(alpha) && alpha > 0.0, "expected_log_v_plus_gamma: alpha must be > 0");
  require(std::isfinite(gamma) && gamma > 0.0, "expected_log_v_plus_gamma: gamma must be > 0");
  require(n >= 1, "expected_log_v_plus_gamma: n must be >= 1");
  return special_digamma(0.5 * (n + alpha)) - special_digamma(0.5 * alpha) + std::log(gamma);
}

double variance_log_v_plus_gamma(double alpha, int n) {
  require(std::isfinite(alpha) && alpha > 0.0, "variance_log_v_plus_gamma: alpha must be > 0");
  require(n >= 1, "variance_log_v_plus_gamma: n must be >= 1");
  return special_trigamma(0.5 * alpha) - special_trigamma(0.5 * (n + alpha));
}

}  // namespace fhrd
