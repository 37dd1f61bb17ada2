// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "ue/sl2.hpp"

namespace ue {

inline constexpr double kTwoPi = 2.0 * kPi;

inline double wrap_two_pi(double v) {
  double r = std::fmod(v, kTwoPi);
  if (r < 0) r += kTwoPi;
  if (r >= kTwoPi) r = 0;
  return r;
}

/// A point on the 2-torus R^2 / (2 pi Z)^2, coordinates in [0, 2pi).
struct TorusPoint {
  double x = 0;
  double y = 0;
};

inline TorusPoint make_torus_point(double x, double y) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw PreconditionError("make_torus_point: non-finite coordinate");
  }
  return {wrap_two_pi(x), wrap_two_pi(y)};
}

/// Differential of the (conjugated) standard map at horizontal second
/// derivative value a: [[a, -1], [1, 0]].
inline Mat2 std_diff_matrix(double a) { return Mat2(a, -1.0, 1.0, 0.0); }

/// One step of the perturbed standard map:
/// (x, y) -> (coupling sin(x + omega) + 2 (x + omega) - y, x + omega) mod 2pi.
inline TorusPoint std_apply(double coupling, double omega, const TorusPoint& p) {
  double xo = p.x + omega;
  return make_torus_point(coupling * std::sin(xo) + 2.0 * xo - p.y, xo);
}

/// Differential of std_apply at p; determinant is exactly 1.
inline Mat2 std_diff(double coupling, double omega, const TorusPoint& p) {
  return std_diff_matrix(coupling * std::cos(p.x + omega) + 2.0);
}

/// The 2r+1 equally spaced horizontal offsets {k epsilon : k = -r..r}.
inline std::vector<double> omega_set(double epsilon, int r) {
  if (r < 0) throw PreconditionError("omega_set: r must be nonnegative");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(2 * r + 1));
  for (int k = -r; k <= r; ++k) out.push_back(k * epsilon);
  return out;
}

}  // namespace ue
