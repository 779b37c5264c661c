#include "fhrd/special_functions.hpp"

#include <cmath>
#include <string>

#include "fhrd/types.hpp"

namespace fhrd {

namespace {

void check_positive(double x, const char* name) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError(std::string(name) + " requires a finite positive argument, got " +
                      std::to_string(x));
  }
}

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // log(2*pi)/2

// Stirling series tail of log Gamma, valid for x >= 10.
double log_gamma_asymptotic(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  // Bernoulli-number coefficients B_{2n} / (2n (2n-1)).
  const double series =
      r * (1.0 / 12.0 +
           r2 * (-1.0 / 360.0 +
                 r2 * (1.0 / 1260.0 +
                       r2 * (-1.0 / 1680.0 +
                             r2 * (1.0 / 1188.0 +
                                   r2 * (-691.0 / 360360.0 + r2 * (1.0 / 156.0)))))));
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi + series;
}

double digamma_asymptotic(double x) {
  const double r2 = 1.0 / (x * x);
  const double series =
      r2 * (1.0 / 12.0 +
            r2 * (-1.0 / 120.0 +
                  r2 * (1.0 / 252.0 +
                        r2 * (-1.0 / 240.0 +
                              r2 * (1.0 / 132.0 +
                                    r2 * (-691.0 / 32760.0 + r2 * (1.0 / 12.0)))))));
  return std::log(x) - 0.5 / x - series;
}

double trigamma_asymptotic(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  const double series =
      1.0 +
      r * 0.5 +
      r2 * (1.0 / 6.0 +
            r2 * (-1.0 / 30.0 +
                  r2 * (1.0 / 42.0 +
                        r2 * (-1.0 / 30.0 +
                              r2 * (5.0 / 66.0 +
                                    r2 * (-691.0 / 2730.0 + r2 * (7.0 / 6.0)))))));
  return r * series;
}

constexpr double kShiftThreshold = 10.0;

}  // namespace

double special_log_gamma(double x) {
  check_positive(x, "special_log_gamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift -= std::log(x);
    x += 1.0;
  }
  return log_gamma_asymptotic(x) + shift;
}

double special_digamma(double x) {
  check_positive(x, "special_digamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  return digamma_asymptotic(x) + shift;
}

double special_trigamma(double x) {
  check_positive(x, "special_trigamma");
  double shift = 0.0;
  while (x < kShiftThreshold) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  return trigamma_asymptotic(x) + shift;
}

}  // namespace fhrd
