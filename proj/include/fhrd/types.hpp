#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fhrd {

// Mathematically invalid argument (nonpositive scale, divergent moment, ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// An iterative routine failed to reach its tolerance.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data or options.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One small area's observables: direct estimate y, variance statistic v with
// n degrees of freedom, and covariates z (z[0] fixed at 1).
struct AreaRecord {
  std::string area_id;
  double y = 0.0;
  double v = 0.0;
  int n = 0;
  std::vector<double> z;
};

// Full parameter vector (beta, tau2, alpha, gamma).
struct ModelParams {
  std::vector<double> beta;
  double tau2 = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;

  // Throws DomainError unless tau2 >= 0, alpha > 0, gamma > 0, beta finite.
  void validate() const;
};

// A_i = (n+1+alpha)/(v+gamma) and B_i = 1/(1+tau2*A_i).
struct ShrinkageCoefficients {
  double a = 0.0;
  double b = 0.0;
};

// Latent area state: mean xi and sampling variance sigma2 = 1/eta.
struct LatentState {
  double xi = 0.0;
  double sigma2 = 0.0;
};

double dot(const std::vector<double>& z, const std::vector<double>& beta);

// Checks shared dataset invariants (v > 0, n >= 1, uniform z length, z[0] == 1).
// Throws ValidationError naming the offending record.
void validate_dataset(const std::vector<AreaRecord>& records);

}  // namespace fhrd
