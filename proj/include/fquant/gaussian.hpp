#pragma once

#include <utility>

namespace fquant {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x);
double normal_cdf(double x);

// Inverse of the standard normal cdf, p in (0,1). Rational approximation
// refined by one Halley step; accurate to ~1 ulp away from the extreme tails.
double normal_quantile(double p);

// Partial moments of N(0,1) over the interval (lo, hi); infinities allowed.
//   mass        = Phi(hi) - Phi(lo)
//   mean_part   = int_lo^hi x phi(x) dx   = phi(lo) - phi(hi)
//   second_part = int_lo^hi x^2 phi(x) dx = mass + lo*phi(lo) - hi*phi(hi)
struct CellMoments {
  double mass = 0.0;
  double mean_part = 0.0;
  double second_part = 0.0;
};

CellMoments gaussian_cell_moments(double lo, double hi);

}  // namespace fquant
