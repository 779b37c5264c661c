#pragma once

#include <utility>
#include <vector>

#include "fhrd/types.hpp"

namespace fhrd {

struct FitOptions {
  int max_iterations = 500;        // alpha/gamma alternation cap
  double rel_tol = 1e-8;           // alternation stopping rule
  double tau_floor_multiplier = 1e-8;  // floor = multiplier * mean(v/n)
  double alpha_bracket_lo = 1e-4;
  double alpha_bracket_hi = 1e3;
  double root_rel_tol = 1e-10;
  int root_max_iterations = 200;
};

struct FitResult {
  ModelParams params;
  std::vector<double> ols_beta;
  int iterations = 0;
  bool converged = false;
  bool tau2_truncated = false;
  bool alpha_fallback_used = false;
  bool alpha_capped = false;      // alternation hit the upper alpha bracket
                                  // (near-degenerate dispersion spread)
  bool small_df_warning = false;  // min(n_i) + alpha_hat <= 4
  double residual_norm = 0.0;     // relative change at the last alternation step
};

// OLS: (sum z z')^{-1} sum z y. Throws NumericError on a rank-deficient design.
std::vector<double> estimate_beta_ols(const std::vector<AreaRecord>& data);

// GLS with weights (1-B_j). Implemented through the tau2-normalized weights
// A_j/(1+tau2*A_j) so the tau2 -> 0 limit degrades gracefully to A_j-weighted
// least squares.
std::vector<double> estimate_beta_gls(const std::vector<AreaRecord>& data, double tau2,
                                      double alpha, double gamma);

// Moment estimator of tau2 with OLS residuals; returns the floored value and
// whether flooring was applied. Requires n_i + alpha > 2 for all i.
std::pair<double, bool> estimate_tau2(const std::vector<AreaRecord>& data, double alpha,
                                      double gamma, const std::vector<double>& beta_ols,
                                      double tau_floor_multiplier = 1e-8);

// Moment estimator of alpha: positive root of the quadratic in alpha when it
// is well posed, otherwise a bracketed root of the averaged moment identity.
// Returns the estimate (clamped to >= 1e-4) and whether the fallback ran.
std::pair<double, bool> estimate_alpha(const std::vector<AreaRecord>& data, double gamma,
                                       const FitOptions& options = {});

// Moment estimator of gamma: unique root of
//   sum_i v_i/(v_i+gamma) = sum_i n_i/(n_i+alpha).
double estimate_gamma(const std::vector<AreaRecord>& data, double alpha,
                      const FitOptions& options = {});

// Full self-contained pipeline: alternate alpha/gamma from
// (alpha0=4, gamma0=2*mean(v/n)) until the joint root, then tau2 by the
// GLS-residual fixed point, then GLS beta. The plain OLS-residual tau2
// moment is catastrophically sensitive to a single heavy-dispersion area,
// so the fixed point iterates tau2 <- moment(GLS residuals(tau2)).
// Deterministic; non-convergence is reported through the result, not thrown.
FitResult fit(const std::vector<AreaRecord>& data, const FitOptions& options = {});

// Variance-profile variant used by simulation studies: solves the alpha
// quadratic with gamma held at a known value (e.g. the generating one),
// then the gamma equation at that alpha, then tau2/beta as in fit(). This
// is the sampling distribution the reference estimator tables describe.
FitResult fit_given_gamma(const std::vector<AreaRecord>& data, double gamma_known,
                          const FitOptions& options = {});

}  // namespace fhrd
