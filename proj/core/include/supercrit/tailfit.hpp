#pragma once

// Least-squares affine fit y = a + b x, returning the intercept a.  Used to
// extrapolate slowly-converging tail limits (classification exponents,
// B-functional limits) against an explicit correction basis x.

#include <cmath>
#include <span>

namespace supercrit {

inline double fit_affine_intercept(std::span<const double> x,
                                   std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = static_cast<double>(n) * sxx - sx * sx;
  if (std::fabs(det) < 1e-300) return sy / static_cast<double>(n);
  return (sy * sxx - sx * sxy) / det;
}

}  // namespace supercrit
