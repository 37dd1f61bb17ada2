// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ue/system.hpp"

namespace ue {

/// Grid pitches: r in chart coordinates on the surface, rho in radians on the
/// direction fiber.
struct GridSpec {
  double r = 0;
  double rho = 0;

  void validate() const {
    if (!(r > 0) || !(rho > 0)) throw PreconditionError("GridSpec: pitches must be positive");
  }
};

/// One base point of the verification grid, with the chart data it came from
/// (region 0 and t1 = x, t2 = y on the torus).
struct BasePoint {
  SurfacePoint point;
  int region = 0;
  double t1 = 0;
  double t2 = 0;
};

/// Uniform direction lattice of pitch <= rho covering [0, pi).
inline std::vector<Direction> direction_lattice(double rho) {
  if (!(rho > 0)) throw PreconditionError("direction_lattice: rho must be positive");
  std::size_t n = static_cast<std::size_t>(std::ceil(kPi / rho));
  if (n == 0) n = 1;
  std::vector<Direction> out;
  out.reserve(n);
  double pitch = kPi / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) out.emplace_back(pitch * static_cast<double>(i));
  return out;
}

namespace detail {

// Chart coordinates of region k are the two trace coordinates other than k,
// in the even-permutation order (i, j).
inline TracePoint shell_point_from_chart(int region, double t1, double t2, double z_k) {
  switch (region) {
    case 1: return {z_k, t1, t2, 0};  // (i, j) = (2, 3), coordinates (y, z)
    case 2: return {t2, z_k, t1, 0};  // (i, j) = (3, 1), coordinates (z, x)
    default: return {t1, t2, z_k, 0};  // (i, j) = (1, 2), coordinates (x, y)
  }
}

}  // namespace detail

/// Lifts chart coordinates (t1, t2) of a region to shell points; returns the
/// candidate points for all real roots of the completing coordinate.
inline int lift_chart(int region, double t1, double t2, double s, TracePoint out[2]) {
  ThirdCoordinateRoots roots = solve_third_coordinate(t1, t2, s);
  int n = 0;
  for (int i = 0; i < roots.count; ++i) {
    TracePoint raw = detail::shell_point_from_chart(region, t1, t2, roots.z[i]);
    out[n] = make_trace_point(raw.x, raw.y, raw.z, s);
    ++n;
  }
  return n;
}

/// The base-point grid of pitch <= spec.r, in deterministic enumeration
/// order. Torus: a uniform lattice on [0, 2pi)^2. Shell: per region, a
/// uniform chart lattice on [-2, 2]^2 lifted through both roots, keeping the
/// points whose dominant-normal region matches the chart.
inline std::vector<BasePoint> build_grid(const SystemDescriptor& sys, const GridSpec& spec) {
  spec.validate();
  std::vector<BasePoint> out;
  if (sys.kind == SurfaceKind::torus) {
    std::size_t n = static_cast<std::size_t>(std::ceil(kTwoPi / spec.r));
    if (n == 0) n = 1;
    double pitch = kTwoPi / static_cast<double>(n);
    out.reserve(n * n);
    for (std::size_t ix = 0; ix < n; ++ix) {
      for (std::size_t iy = 0; iy < n; ++iy) {
        double x = pitch * static_cast<double>(ix);
        double y = pitch * static_cast<double>(iy);
        out.push_back({TorusPoint{x, y}, 0, x, y});
      }
    }
    return out;
  }

  double s = sys.shell_params ? sys.shell_params->s : 0.0;
  std::size_t n = static_cast<std::size_t>(std::ceil(4.0 / spec.r));
  if (n == 0) n = 1;
  double pitch = 4.0 / static_cast<double>(n);
  for (int region = 1; region <= 3; ++region) {
    for (std::size_t i1 = 0; i1 <= n; ++i1) {
      double t1 = -2.0 + pitch * static_cast<double>(i1);
      for (std::size_t i2 = 0; i2 <= n; ++i2) {
        double t2 = -2.0 + pitch * static_cast<double>(i2);
        TracePoint lifted[2];
        int count = lift_chart(region, t1, t2, s, lifted);
        for (int q = 0; q < count; ++q) {
          Frame f;
          try {
            f = frame(lifted[q]);
          } catch (const SingularFrameError&) {
            continue;  // no usable frame, cannot belong to any chart
          }
          if (f.region == region) out.push_back({lifted[q], region, t1, t2});
        }
      }
    }
  }
  return out;
}

}  // namespace ue
