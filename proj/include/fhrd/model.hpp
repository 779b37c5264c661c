#pragma once

#include <vector>

#include "fhrd/types.hpp"

namespace fhrd {

// Shrinkage pair A = (n+1+alpha)/(v+gamma), B = 1/(1+tau2*A).
// B increases in v, decreases in alpha and in tau2; B == 1 iff tau2 == 0.
ShrinkageCoefficients shrinkage(double tau2, double alpha, double gamma, double v, int n);

// (v+gamma)/(n+1+alpha): convex combination of v/(n+1) and gamma/alpha with
// weight (n+1)/(n+1+alpha) on the data side.
double dual_shrunk_scale(double alpha, double gamma, double v, int n);

// log of the marginal density of the variance statistic V (beta-prime type).
double log_marginal_v_density(double alpha, double gamma, int n, double v);

// log of the joint density of (y, V, eta) with the mean latent integrated
// out, normalizing constant included.
double log_joint_y_v_eta_density(const ModelParams& params, const AreaRecord& record,
                                 double eta);

// E[sigma^2 | V] = (v+gamma)/(n+alpha-2); requires n+alpha > 2.
double conditional_sigma2_mean(double alpha, double gamma, int n, double v);

// Closed forms of E[V^l/(V+gamma)^k] and E[V^l/(V+gamma)^k * log(V+gamma)].
// Requires n/2+l > 0, alpha/2+k-l > 0 and (n+alpha)/2+k > 0.
double analytic_moment_v(double alpha, double gamma, int n, double l, double k);
double analytic_moment_v_log(double alpha, double gamma, int n, double l, double k);

// E[log(V+gamma)] = psi((n+alpha)/2) - psi(alpha/2) + log(gamma).
double expected_log_v_plus_gamma(double alpha, double gamma, int n);

// Var[log(V+gamma)] = psi'(alpha/2) - psi'((n+alpha)/2). This is the
// variance-positive form implied by the Fisher-information identity; see
// the Monte Carlo checks in the test suite.
double variance_log_v_plus_gamma(double alpha, int n);

}  // namespace fhrd
