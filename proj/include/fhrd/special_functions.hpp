#pragma once

namespace fhrd {

// log Gamma(x), digamma psi(x) and trigamma psi'(x) for x > 0 via recurrence
// shifting into the asymptotic (Stirling) regime. Throws DomainError for
// x <= 0 or non-finite x.
double special_log_gamma(double x);
double special_digamma(double x);
double special_trigamma(double x);

}  // namespace fhrd
