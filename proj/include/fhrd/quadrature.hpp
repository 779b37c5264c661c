#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fhrd/types.hpp"

namespace fhrd {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double truncation_multiplier = 12.0;  // upper limit s + mult*sqrt(s) + 20
  int max_subdivisions = 400;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (symmetric) with the embedded 7-point
// Gauss rule for the error estimate.
inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
void gk15(const F& f, double a, double b, double& integral, double& error) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(center - half * kKronrodNodes[i]);
    fv[14 - i] = f(center + half * kKronrodNodes[i]);
  }
  fv[7] = f(center);
  double kron = kKronrodWeights[7] * fv[7];
  double gauss = kGaussWeights[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kron += kKronrodWeights[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (fv[i] + fv[14 - i]);
  }
  integral = kron * half;
  error = std::abs((kron - gauss) * half);
}

}  // namespace detail

// Adaptive bisection GK15 on [a, b]; subdivides the worst segment until the
// summed error estimate is below rel_tol * |integral| (plus a tiny absolute
// guard for integrals near zero). Deterministic for a given f.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol, int max_subdivisions) {
  struct Segment {
    double a, b, integral, error;
  };
  std::vector<Segment> segments;
  segments.reserve(64);
  Segment s0{a, b, 0.0, 0.0};
  detail::gk15(f, a, b, s0.integral, s0.error);
  segments.push_back(s0);

  for (int iter = 0; iter < max_subdivisions; ++iter) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      total += segments[i].integral;
      err += segments[i].error;
      if (segments[i].error > segments[worst].error) worst = i;
    }
    if (err <= rel_tol * std::abs(total) + 1e-300) return total;

    Segment seg = segments[worst];
    const double mid = 0.5 * (seg.a + seg.b);
    if (mid <= seg.a || mid >= seg.b) return total;  // interval exhausted
    Segment left{seg.a, mid, 0.0, 0.0}, right{mid, seg.b, 0.0, 0.0};
    detail::gk15(f, left.a, left.b, left.integral, left.error);
    detail::gk15(f, right.a, right.b, right.integral, right.error);
    segments[worst] = left;
    segments.push_back(right);
  }
  throw NumericError("integrate_adaptive: subdivision limit reached before tolerance");
}

}  // namespace fhrd
