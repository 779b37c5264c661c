#include "fhrd/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fhrd/model.hpp"

namespace fhrd {

namespace {

// Weighted normal equations solve; weights == nullptr means OLS.
std::vector<double> solve_normal_equations(const std::vector<AreaRecord>& data,
                                           const std::vector<double>* weights,
                                           const char* what) {
  const std::size_t m = data.size();
  const std::size_t p = data.front().z.size();
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = weights ? (*weights)[j] : 1.0;
    const auto& z = data[j].z;
    for (std::size_t r = 0; r < p; ++r) {
      xty(r) += w * z[r] * data[j].y;
      for (std::size_t c = 0; c < p; ++c) xtx(r, c) += w * z[r] * z[c];
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(xtx);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw NumericError(std::string(what) + ": singular design matrix (rank < p)");
  }
  Eigen::VectorXd beta = lu.solve(xty);
  return std::vector<double>(beta.data(), beta.data() + p);
}

double mean_v_over_n(const std::vector<AreaRecord>& data) {
  double s = 0.0;
  for (const auto& r : data) s += r.v / r.n;
  return s / data.size();
}

// Robust data scale. Under small alpha the v's are so heavy-tailed that the
// mean of v/n can be driven arbitrarily high by one area, which would turn a
// scale-relative floor into an enormous value.
double median_v_over_n(const std::vector<AreaRecord>& data) {
  std::vector<double> x(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) x[i] = data[i].v / data[i].n;
  std::nth_element(x.begin(), x.begin() + x.size() / 2, x.end());
  const double upper = x[x.size() / 2];
  if (x.size() % 2 == 1) return upper;
  std::nth_element(x.begin(), x.begin() + x.size() / 2 - 1, x.end());
  return 0.5 * (upper + x[x.size() / 2 - 1]);
}

// Brent-style bracketed root finder (bisection/secant/inverse quadratic).
// f(lo) and f(hi) must have opposite signs. Stops once the bracket is
// narrower than rel_tol or |f| drops below f_abs_tol.
double brent_root(const std::function<double(double)>& f, double lo, double hi, double f_lo,
                  double f_hi, double rel_tol, double f_abs_tol, int max_iterations,
                  const char* what) {
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NumericError(std::string(what) + ": root bracket has no sign change");
  }
  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a;
  bool mflag = true;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const double tol = rel_tol * std::max(1.0, std::abs(b));
    if (std::abs(fb) <= f_abs_tol || std::abs(b - a) <= tol) return b;
    double s;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    const double mid = 0.5 * (a + b);
    const bool out_of_range = (s < std::min(mid, b)) || (s > std::max(mid, b));
    if (out_of_range || (mflag && std::abs(s - b) >= 0.5 * std::abs(b - c)) ||
        (!mflag && std::abs(s - b) >= 0.5 * std::abs(d)) ||
        (mflag && std::abs(b - c) < tol) || (!mflag && std::abs(d) < tol)) {
      s = mid;
      mflag = true;
    } else {
      mflag = false;
    }
    const double fs = f(s);
    d = c - b;
    c = b;
    fc = fb;
    if ((fa > 0.0) != (fs > 0.0)) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  throw NumericError(std::string(what) + ": root finding did not reach tolerance");
}

// Averaged moment identity in alpha used when the quadratic is ill posed:
//   sum_i { v_i L_i/(v_i+gamma) - n_i/(n_i+alpha) * (L_i + 2/(n_i+alpha)) }.
double alpha_identity_residual(const std::vector<AreaRecord>& data, double gamma, double alpha) {
  double s = 0.0;
  for (const auto& r : data) {
    const double L = std::log(r.v + gamma);
    const double na = r.n + alpha;
    s += r.v / (r.v + gamma) * L - r.n / na * (L + 2.0 / na);
  }
  return s;
}

}  // namespace

std::vector<double> estimate_beta_ols(const std::vector<AreaRecord>& data) {
  validate_dataset(data);
  if (data.size() < data.front().z.size()) {
    throw NumericError("estimate_beta_ols: need at least p records");
  }
  return solve_normal_equations(data, nullptr, "estimate_beta_ols");
}

std::vector<double> estimate_beta_gls(const std::vector<AreaRecord>& data, double tau2,
                                      double alpha, double gamma) {
  validate_dataset(data);
  std::vector<double> weights(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    const double a = shrinkage(tau2, alpha, gamma, data[j].v, data[j].n).a;
    // (1-B_j) = tau2*a/(1+tau2*a); the common tau2 factor cancels in the
    // normal equations, leaving a/(1+tau2*a) which survives tau2 = 0.
    weights[j] = a / (1.0 + tau2 * a);
  }
  return solve_normal_equations(data, &weights, "estimate_beta_gls");
}

std::pair<double, bool> estimate_tau2(const std::vector<AreaRecord>& data, double alpha,
                                      double gamma, const std::vector<double>& beta_ols,
                                      double tau_floor_multiplier) {
  validate_dataset(data);
  if (!(alpha > 0.0) || !(gamma > 0.0)) {
    throw DomainError("estimate_tau2: alpha and gamma must be > 0");
  }
  double scale_sum = 0.0;
  double moment_sum = 0.0;
  for (const auto& r : data) {
    if (!(r.n + alpha > 2.0)) {
      throw DomainError("estimate_tau2: requires n_i + alpha > 2 for every area");
    }
    scale_sum += (alpha / gamma) / (r.n + alpha);
    const double resid = r.y - dot(r.z, beta_ols);
    moment_sum += resid * resid / (r.v + gamma) - 1.0 / (r.n + alpha - 2.0);
  }
  const double raw = moment_sum / scale_sum;
  const double floor = tau_floor_multiplier * median_v_over_n(data);
  if (raw < floor) return {floor, true};
  return {raw, false};
}

std::pair<double, bool> estimate_alpha(const std::vector<AreaRecord>& data, double gamma,
                                       const FitOptions& options) {
  validate_dataset(data);
  if (!(gamma > 0.0)) throw DomainError("estimate_alpha: gamma must be > 0");

  double qa = 0.0, qb = 0.0, qc = 0.0;
  for (const auto& r : data) {
    const double L = std::log(r.v + gamma);
    const double ratio = r.v / (r.v + gamma);
    qa += ratio * L;
    qb += r.n * (r.v - gamma) / (r.v + gamma) * L;
    qc += r.n * (r.n * gamma / (r.v + gamma) * L + 2.0);
  }

  const double clamp_lo = 1e-4;
  // qa*x^2 + qb*x - qc = 0
  const double disc = qb * qb + 4.0 * qa * qc;
  if (qa > 0.0 && disc >= 0.0) {
    const double sq = std::sqrt(disc);
    // Stable quadratic roots.
    const double q = -0.5 * (qb + (qb >= 0.0 ? sq : -sq));
    const double r1 = q / qa;
    const double r2 = (q != 0.0) ? -qc / q : std::numeric_limits<double>::quiet_NaN();
    const bool pos1 = std::isfinite(r1) && r1 > 0.0;
    const bool pos2 = std::isfinite(r2) && r2 > 0.0 && std::abs(r2 - r1) > 0.0;
    if (pos1 != pos2) {
      return {std::max(pos1 ? r1 : r2, clamp_lo), false};
    }
  }

  // Fallback: bracketed root of the averaged moment identity.
  auto f = [&](double a) { return alpha_identity_residual(data, gamma, a); };
  const double lo = options.alpha_bracket_lo;
  const double hi = options.alpha_bracket_hi;
  double prev_x = lo;
  double prev_f = f(lo);
  constexpr int kScanPoints = 64;
  for (int k = 1; k <= kScanPoints; ++k) {
    const double x = lo * std::pow(hi / lo, static_cast<double>(k) / kScanPoints);
    const double fx = f(x);
    if (prev_f == 0.0) return {std::max(prev_x, clamp_lo), true};
    if ((prev_f > 0.0) != (fx > 0.0)) {
      const double root = brent_root(f, prev_x, x, prev_f, fx, options.root_rel_tol, 0.0,
                                     options.root_max_iterations, "estimate_alpha");
      return {std::max(root, clamp_lo), true};
    }
    prev_x = x;
    prev_f = fx;
  }
  throw NumericError("estimate_alpha: no sign change in the fallback bracket [" +
                     std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

double estimate_gamma(const std::vector<AreaRecord>& data, double alpha,
                      const FitOptions& options) {
  validate_dataset(data);
  if (!(alpha > 0.0)) throw DomainError("estimate_gamma: alpha must be > 0");

  double target = 0.0;
  for (const auto& r : data) target += static_cast<double>(r.n) / (r.n + alpha);

  auto f = [&](double g) {
    double s = 0.0;
    for (const auto& r : data) s += r.v / (r.v + g);
    return s - target;
  };

  // f decreases from m - target > 0 at gamma -> 0 to -target < 0 at infinity.
  double lo = std::numeric_limits<double>::min();
  double f_lo = static_cast<double>(data.size()) - target;
  double hi = mean_v_over_n(data);
  double f_hi = f(hi);
  int guard = 0;
  while (f_hi > 0.0) {
    lo = hi;
    f_lo = f_hi;
    hi *= 8.0;
    f_hi = f(hi);
    if (++guard > 400) throw NumericError("estimate_gamma: failed to bracket the root");
  }
  // Drive |f| two orders below the contract (residual < 1e-10 relative).
  const double root = brent_root(f, lo, hi, f_lo, f_hi, 1e-3 * options.root_rel_tol,
                                 1e-12 * target, options.root_max_iterations, "estimate_gamma");
  if (std::abs(f(root)) > options.root_rel_tol * target) {
    throw NumericError("estimate_gamma: residual above tolerance at returned root");
  }
  return root;
}

namespace {

// Shared tail of both fit entry points: tau2 by the GLS-residual fixed
// point, then the final GLS beta and the diagnostics.
void finish_fit(const std::vector<AreaRecord>& data, const FitOptions& options, double alpha,
                double gamma, FitResult& result) {
  result.ols_beta = estimate_beta_ols(data);

  auto [tau2, truncated] =
      estimate_tau2(data, alpha, gamma, result.ols_beta, options.tau_floor_multiplier);
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto beta = estimate_beta_gls(data, tau2, alpha, gamma);
    const auto [next, next_truncated] =
        estimate_tau2(data, alpha, gamma, beta, options.tau_floor_multiplier);
    const bool done = std::abs(next - tau2) <= options.rel_tol * std::max(1.0, tau2);
    tau2 = next;
    truncated = next_truncated;
    if (done) break;
  }
  result.tau2_truncated = truncated;

  result.params.beta = estimate_beta_gls(data, tau2, alpha, gamma);
  result.params.tau2 = tau2;
  result.params.alpha = alpha;
  result.params.gamma = gamma;

  int min_n = data.front().n;
  for (const auto& r : data) min_n = std::min(min_n, r.n);
  result.small_df_warning = (min_n + alpha <= 4.0);
}

}  // namespace

FitResult fit(const std::vector<AreaRecord>& data, const FitOptions& options) {
  validate_dataset(data);
  const std::size_t p = data.front().z.size();
  if (data.size() < p + 1) throw NumericError("fit: need at least p + 1 records");

  FitResult result;
  double alpha = 4.0;
  double gamma = (alpha - 2.0) * median_v_over_n(data);
  result.converged = false;
  double rel_change = std::numeric_limits<double>::infinity();

  int iter = 0;
  int runaway = 0;
  for (; iter < options.max_iterations; ++iter) {
    auto [alpha_next, fallback] = estimate_alpha(data, gamma, options);
    if (fallback) result.alpha_fallback_used = true;
    // Near-degenerate spread in the v's sends alpha off to infinity along
    // gamma/alpha ~ const, with non-contracting steps. Stop at the bracket
    // boundary once the march is unambiguous.
    const bool marching = alpha_next > 100.0 && alpha_next - alpha > 0.1;
    runaway = marching ? runaway + 1 : 0;
    if (alpha_next >= options.alpha_bracket_hi || runaway >= 30) {
      alpha = options.alpha_bracket_hi;
      gamma = estimate_gamma(data, alpha, options);
      result.alpha_capped = true;
      result.converged = true;
      rel_change = 0.0;
      ++iter;
      break;
    }
    const double gamma_next = estimate_gamma(data, alpha_next, options);
    rel_change = std::max(std::abs(alpha_next - alpha) / std::max(1e-300, std::abs(alpha_next)),
                          std::abs(gamma_next - gamma) / std::max(1e-300, std::abs(gamma_next)));
    alpha = alpha_next;
    gamma = gamma_next;
    if (rel_change < options.rel_tol) {
      result.converged = true;
      ++iter;
      break;
    }
  }
  result.iterations = iter;
  result.residual_norm = rel_change;

  finish_fit(data, options, alpha, gamma, result);
  return result;
}

FitResult fit_given_gamma(const std::vector<AreaRecord>& data, double gamma_known,
                          const FitOptions& options) {
  validate_dataset(data);
  if (!(gamma_known > 0.0)) throw DomainError("fit_given_gamma: gamma must be > 0");
  const std::size_t p = data.front().z.size();
  if (data.size() < p + 1) throw NumericError("fit_given_gamma: need at least p + 1 records");

  FitResult result;
  const auto [alpha, fallback] = estimate_alpha(data, gamma_known, options);
  result.alpha_fallback_used = fallback;
  const double gamma = estimate_gamma(data, alpha, options);
  result.iterations = 1;
  result.converged = true;
  result.residual_norm = 0.0;

  finish_fit(data, options, alpha, gamma, result);
  return result;
}

}  // namespace fhrd
