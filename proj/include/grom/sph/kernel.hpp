#pragma once

#include <cmath>
#include <numbers>

#include "grom/sph/vec2.hpp"

namespace grom::sph {

/// 2-D cubic spline kernel with support radius 2h.
inline double kernel_norm(double h) { return 10.0 / (7.0 * std::numbers::pi * h * h); }

inline double kernel(double r, double h) {
  const double q = r / h;
  const double sigma = kernel_norm(h);
  if (q < 1.0) return sigma * (1.0 - 1.5 * q * q + 0.75 * q * q * q);
  if (q < 2.0) {
    const double a = 2.0 - q;
    return sigma * 0.25 * a * a * a;
  }
  return 0.0;
}

/// (dW/dr) / r, so that grad W(r_vec) = kernel_grad_factor(|r_vec|, h) * r_vec.
/// Zero outside the support and at r = 0.
inline double kernel_grad_factor(double r, double h) {
  if (r <= 0.0) return 0.0;
  const double q = r / h;
  const double sigma = kernel_norm(h);
  double dwdq = 0.0;
  if (q < 1.0) {
    dwdq = sigma * (-3.0 * q + 2.25 * q * q);
  } else if (q < 2.0) {
    const double a = 2.0 - q;
    dwdq = -0.75 * sigma * a * a;
  }
  return dwdq / (h * r);
}

/// Gradient of W with respect to the first point, evaluated at r_vec = x_a - x_b.
inline Vec2 kernel_grad(const Vec2& r_vec, double h) {
  return kernel_grad_factor(r_vec.norm(), h) * r_vec;
}

}  // namespace grom::sph
