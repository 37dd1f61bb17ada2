// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// The SU(2) character variety of the rank-2 free group in trace coordinates:
// the level sets of kappa(x, y, z) = x^2 + y^2 + z^2 - xyz - 2 in [-2, 2]^3,
// acted on by the elementary automorphisms (twists)
//   tau_X: (x, y, z) -> (x, z, xz - y),   tau_Y: (x, y, z) -> (z, y, yz - x),
// together with the surface frames and normalized 2x2 differentials used by
// the expansion machinery.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ue/sl2.hpp"

namespace ue {

using Vec3 = std::array<double, 3>;

/// kappa(x, y, z) = x^2 + y^2 + z^2 - xyz - 2, the trace of the commutator.
inline double kappa(double x, double y, double z) {
  return x * x + y * y + z * z - x * y * z - 2.0;
}

inline double kappa(const Vec3& v) { return kappa(v[0], v[1], v[2]); }

/// grad kappa, also the surface normal: (2x - yz, 2y - zx, 2z - xy).
inline Vec3 normal_at(double x, double y, double z) {
  return {2.0 * x - y * z, 2.0 * y - z * x, 2.0 * z - x * y};
}

/// Coordinate range slack for drift checks; exact orbits stay in [-2, 2]^3.
inline constexpr double kCoordTol = 1e-6;
/// |kappa - s| above this cannot be repaired and is an error.
inline constexpr double kSurfaceTol = 1e-9;
/// |kappa - s| above this (but within kSurfaceTol) triggers a Newton
/// reprojection along the normal.
inline constexpr double kSurfaceSnap = 1e-12;

/// A point of the shell kappa = s inside [-2, 2]^3.
struct TracePoint {
  double x = 0;
  double y = 0;
  double z = 0;
  double shell = -2;
};

inline Vec3 normal_at(const TracePoint& p) { return normal_at(p.x, p.y, p.z); }

/// Validates coordinates and shell membership; small drift is repaired by one
/// Newton step of kappa along the normal, larger drift is an error.
inline TracePoint make_trace_point(double x, double y, double z, double s) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
    throw NumericalDriftError("make_trace_point: non-finite coordinate");
  }
  if (std::fabs(x) > 2.0 + kCoordTol || std::fabs(y) > 2.0 + kCoordTol ||
      std::fabs(z) > 2.0 + kCoordTol) {
    throw NumericalDriftError("make_trace_point: coordinate outside [-2, 2]");
  }
  double drift = kappa(x, y, z) - s;
  if (std::fabs(drift) > kSurfaceTol) {
    throw NumericalDriftError("make_trace_point: |kappa - s| = " + std::to_string(std::fabs(drift)));
  }
  if (std::fabs(drift) > kSurfaceSnap) {
    Vec3 n = normal_at(x, y, z);
    double nn = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (nn > 0) {
      double step = drift / nn;
      x -= step * n[0];
      y -= step * n[1];
      z -= step * n[2];
    }
  }
  return {x, y, z, s};
}

/// Real roots t in [-2, 2] of t^2 - (ab) t + (a^2 + b^2 - 2 - s) = 0, i.e.
/// the values completing chart coordinates (a, b) to a point of the shell.
struct ThirdCoordinateRoots {
  int count = 0;
  std::array<double, 2> z{};
};

inline ThirdCoordinateRoots solve_third_coordinate(double a, double b, double s) {
  ThirdCoordinateRoots out;
  double half_p = 0.5 * a * b;
  double q = a * a + b * b - 2.0 - s;
  double disc = half_p * half_p - q;
  if (disc < 0) return out;
  double root = std::sqrt(disc);
  // larger-magnitude root first, companion via the product, to avoid
  // cancellation in half_p -+ root
  double r1 = half_p >= 0 ? half_p + root : half_p - root;
  double r2 = r1 == 0 ? 0.0 : q / r1;
  double lo = std::min(r1, r2), hi = std::max(r1, r2);
  const double edge = 2.0 + 1e-12;
  if (std::fabs(lo) <= edge) out.z[out.count++] = lo;
  if (root > 0 && std::fabs(hi) <= edge) out.z[out.count++] = hi;
  return out;
}

/// The four elementary twists.
enum class Twist { X, Y, Xinv, Yinv };

inline Twist twist_inverse(Twist t) {
  switch (t) {
    case Twist::X: return Twist::Xinv;
    case Twist::Y: return Twist::Yinv;
    case Twist::Xinv: return Twist::X;
    default: return Twist::Y;
  }
}

inline const char* twist_name(Twist t) {
  switch (t) {
    case Twist::X: return "X";
    case Twist::Y: return "Y";
    case Twist::Xinv: return "X'";
    default: return "Y'";
  }
}

inline Vec3 twist_apply_raw(Twist t, const Vec3& v) {
  double x = v[0], y = v[1], z = v[2];
  switch (t) {
    case Twist::X: return {x, z, x * z - y};
    case Twist::Y: return {z, y, y * z - x};
    case Twist::Xinv: return {x, x * y - z, y};
    default: return {x * y - z, y, x};
  }
}

/// One twist of a shell point; kappa is preserved exactly in exact arithmetic,
/// floating drift is repaired by make_trace_point.
inline TracePoint twist_apply(Twist t, const TracePoint& p) {
  Vec3 v = twist_apply_raw(t, {p.x, p.y, p.z});
  return make_trace_point(v[0], v[1], v[2], p.shell);
}

/// 3x3 differential of a twist at (x, y, z), row-major; determinant 1.
using Mat3 = std::array<double, 9>;

inline Mat3 twist_diff3(Twist t, const TracePoint& p) {
  double x = p.x, y = p.y, z = p.z;
  switch (t) {
    case Twist::X:
      return {1, 0, 0, 0, 0, 1, z, -1, x};
    case Twist::Y:
      return {0, 0, 1, 0, 1, 0, -1, z, y};
    case Twist::Xinv:
      return {1, 0, 0, y, x, -1, 0, 1, 0};
    default:  // Yinv
      return {y, x, -1, 0, 1, 0, 1, 0, 0};
  }
}

inline Vec3 mat3_apply(const Mat3& m, const Vec3& v) {
  return {m[0] * v[0] + m[1] * v[1] + m[2] * v[2],
          m[3] * v[0] + m[4] * v[1] + m[5] * v[2],
          m[6] * v[0] + m[7] * v[1] + m[8] * v[2]};
}

/// A word in the twists; letters compose right-to-left, so the last letter
/// acts first (the word {A, B, C} is the map tau_A o tau_B o tau_C).
struct MapWord {
  std::vector<Twist> letters;
};

inline MapWord word_inverse(const MapWord& w) {
  MapWord out;
  out.letters.reserve(w.letters.size());
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) {
    out.letters.push_back(twist_inverse(*it));
  }
  return out;
}

inline std::string word_name(const MapWord& w) {
  std::string s = "tau_";
  for (Twist t : w.letters) s += twist_name(t);
  return s;
}

inline TracePoint word_apply(const MapWord& w, const TracePoint& p) {
  if (w.letters.empty()) throw PreconditionError("word_apply: empty word");
  TracePoint cur = p;
  for (std::size_t i = w.letters.size(); i-- > 0;) {
    cur = twist_apply(w.letters[i], cur);
  }
  return cur;
}

/// Orthonormal frame data at a shell point. The inner product is the one
/// declaring {e1 / scale, e2 / scale} orthonormal, where e1 = v_i(P),
/// e2 = sign(n_k(P)) v_j(P), scale = sqrt(|n_k(P)|), k is the index
/// maximizing |n_k(P)| (smallest index on ties) and (i, j, k) is the even
/// permutation of (1, 2, 3). The sign on e2 keeps every frame positively
/// oriented for the invariant area form, which makes all framed differentials
/// have determinant +1 rather than +-1.
struct Frame {
  int region = 0;  // 1-based index k of the dominant normal component
  Vec3 e1{};
  Vec3 e2{};
  double scale = 0;       // sqrt(|n_k|)
  double n_k = 0;         // signed dominant component
};

/// Tangent vectors v_1 = (0, n3, -n2), v_2 = (-n3, 0, n1), v_3 = (n2, -n1, 0);
/// they satisfy n1 v_1 + n2 v_2 + n3 v_3 = 0.
inline Vec3 frame_basis_vector(int index1b, const Vec3& n) {
  switch (index1b) {
    case 1: return {0.0, n[2], -n[1]};
    case 2: return {-n[2], 0.0, n[0]};
    default: return {n[1], -n[0], 0.0};
  }
}

namespace detail {
// (i, j) completing k to an even permutation of (1, 2, 3), all 1-based.
inline void even_partners(int k, int& i, int& j) {
  switch (k) {
    case 1: i = 2; j = 3; break;
    case 2: i = 3; j = 1; break;
    default: i = 1; j = 2; break;
  }
}
}  // namespace detail

inline Frame frame(const TracePoint& p) {
  Vec3 n = normal_at(p);
  double nn = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (!(nn >= 1e-8)) {
    throw SingularFrameError("frame: normal vector too small at (" + std::to_string(p.x) +
                             ", " + std::to_string(p.y) + ", " + std::to_string(p.z) + ")");
  }
  int k = 1;
  if (std::fabs(n[1]) > std::fabs(n[k - 1])) k = 2;
  if (std::fabs(n[2]) > std::fabs(n[k - 1])) k = 3;
  int i, j;
  detail::even_partners(k, i, j);
  Frame f;
  f.region = k;
  f.n_k = n[k - 1];
  f.scale = std::sqrt(std::fabs(f.n_k));
  f.e1 = frame_basis_vector(i, n);
  f.e2 = frame_basis_vector(j, n);
  if (f.n_k < 0) {
    f.e2 = {-f.e2[0], -f.e2[1], -f.e2[2]};
  }
  return f;
}

namespace detail {
// Coefficients (alpha, beta) of a tangent vector t at q in the frame basis
// (e1, e2) of q: t = alpha e1 + beta e2.
inline void frame_coefficients(const Frame& f, const Vec3& t, double& alpha, double& beta) {
  int i, j;
  even_partners(f.region, i, j);
  alpha = t[j - 1] / f.n_k;
  beta = -t[i - 1] / std::fabs(f.n_k);
}
}  // namespace detail

/// The 2x2 matrix of the word differential from the orthonormal frame at p to
/// the orthonormal frame at the image point, chain-ruled through the 3x3
/// twist differentials. Determinant 1 up to floating error.
inline Mat2 word_diff(const TracePoint& p, const MapWord& w) {
  if (w.letters.empty()) throw PreconditionError("word_diff: empty word");
  Frame src = frame(p);
  Vec3 t1 = src.e1, t2 = src.e2;
  TracePoint cur = p;
  for (std::size_t step = 0; step < w.letters.size(); ++step) {
    Twist g = w.letters[w.letters.size() - 1 - step];
    Mat3 d = twist_diff3(g, cur);
    t1 = mat3_apply(d, t1);
    t2 = mat3_apply(d, t2);
    try {
      cur = twist_apply(g, cur);
    } catch (const Error& e) {
      throw NumericalDriftError(word_name(w) + " step " + std::to_string(step + 1) + ": " +
                                e.what());
    }
  }
  Frame dst = frame(cur);
  double a1, b1, a2, b2;
  detail::frame_coefficients(dst, t1, a1, b1);
  detail::frame_coefficients(dst, t2, a2, b2);
  double scale = dst.scale / src.scale;
  return Mat2(scale * a1, scale * a2, scale * b1, scale * b2);
}

/// The sixteen five-letter generators: tau_XXXXY ... tau_YYYYX and their
/// inverses, ordered so that generator 17-i is the inverse of generator i.
inline std::vector<MapWord> generator_set_16() {
  using T = Twist;
  std::vector<MapWord> gens = {
      {{T::X, T::X, T::X, T::X, T::Y}}, {{T::X, T::X, T::X, T::Y, T::Y}},
      {{T::X, T::X, T::Y, T::Y, T::Y}}, {{T::X, T::Y, T::Y, T::Y, T::Y}},
      {{T::Y, T::X, T::X, T::X, T::X}}, {{T::Y, T::Y, T::X, T::X, T::X}},
      {{T::Y, T::Y, T::Y, T::X, T::X}}, {{T::Y, T::Y, T::Y, T::Y, T::X}},
  };
  for (int i = 7; i >= 0; --i) gens.push_back(word_inverse(gens[static_cast<std::size_t>(i)]));
  return gens;
}

}  // namespace ue
