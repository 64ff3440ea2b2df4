#pragma once

#include <algorithm>
#include <cmath>

#include "rational.hpp"

namespace mlqmc {

// Mean-zero reproducing kernel of the component spaces on [0,1]:
//   k(x,y) = 1/3 + (x^2 + y^2)/2 - max(x,y),
// the unanchored Sobolev kernel with vanishing first moment. At the default
// anchor a = 1/2: k(a,a) = 1/12.
inline double kernel_k(double x, double y) {
  return 1.0 / 3.0 + 0.5 * (x * x + y * y) - std::max(x, y);
}

inline Rational kernel_k(const Rational& x, const Rational& y) {
  return Rational(1, 3) + (x * x + y * y) / 2 - std::max(x, y);
}

inline constexpr double default_anchor = 0.5;

// k(a,a) for a general anchor.
inline double kernel_diag(double a) { return kernel_k(a, a); }

inline constexpr double kernel_half_half = 1.0 / 12.0;

}  // namespace mlqmc
