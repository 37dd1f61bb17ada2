// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ue/errors.hpp"

namespace ue {

inline constexpr double kPi = std::numbers::pi;

/// |det - 1| above this is an error for area-preserving matrices.
inline constexpr double kDetTol = 1e-9;
/// |det - 1| above this (but below kDetTol) triggers renormalization.
inline constexpr double kDetRenorm = 1e-12;
/// Matrices with norm <= 1 + kDirTol have no usable contracting direction.
inline constexpr double kDirTol = 1e-6;

/// An element of the projective line P^1 identified with R/piZ.
/// Stored normalized to [0, pi).
class Direction {
 public:
  Direction() = default;
  explicit Direction(double theta) : theta_(normalize(theta)) {}

  double theta() const { return theta_; }

  static double normalize(double t) {
    double r = std::fmod(t, kPi);
    if (r < 0) r += kPi;
    if (r >= kPi) r = 0;  // collapse the rounding case fmod(-eps) + pi == pi
    return r;
  }

 private:
  double theta_ = 0;
};

/// Distance on P^1 = R/piZ: min(|dt|, pi - |dt|).
inline double projective_distance(Direction t1, Direction t2) {
  double d = std::fabs(t1.theta() - t2.theta());
  return std::min(d, kPi - d);
}

/// A 2x2 real area-preserving matrix [[a, b], [c, d]].
///
/// Construction enforces |det - 1| <= det_tol; drift in (kDetRenorm, det_tol]
/// is repaired by dividing by sqrt(det) so that long compositions stay inside
/// the tolerance without masking genuinely wrong input.
class Mat2 {
 public:
  Mat2() : a_(1), b_(0), c_(0), d_(1) {}

  Mat2(double a, double b, double c, double d, double det_tol = kDetTol)
      : a_(a), b_(b), c_(c), d_(d) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(d)) {
      throw InvalidMatrixError("Mat2: non-finite entry");
    }
    double det = a_ * d_ - b_ * c_;
    double err = std::fabs(det - 1.0);
    if (err > det_tol) {
      throw InvalidMatrixError("Mat2: determinant " + std::to_string(det) +
                               " outside area-preserving tolerance");
    }
    if (err > kDetRenorm) {
      double s = 1.0 / std::sqrt(det);
      a_ *= s;
      b_ *= s;
      c_ *= s;
      d_ *= s;
    }
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }

  double det() const { return a_ * d_ - b_ * c_; }

  /// Inverse via the adjugate; valid because det == 1 up to tolerance.
  Mat2 inverse() const { return Mat2(raw_tag{}, d_, -b_, -c_, a_); }

  // Composition is raw arithmetic: the determinant of a float product of
  // large-entry matrices cannot be checked (ad and bc cancel), and it is 1
  // exactly in exact arithmetic. Validation happens where matrices enter the
  // system, not on intermediate products.
  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return Mat2(raw_tag{}, m.a_ * n.a_ + m.b_ * n.c_, m.a_ * n.b_ + m.b_ * n.d_,
                m.c_ * n.a_ + m.d_ * n.c_, m.c_ * n.b_ + m.d_ * n.d_);
  }

 private:
  struct raw_tag {};
  Mat2(raw_tag, double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {}

  double a_, b_, c_, d_;
};

/// Rotation r_theta = [[cos t, sin t], [-sin t, cos t]].
inline Mat2 rotation(double theta) {
  double c = std::cos(theta), s = std::sin(theta);
  return Mat2(c, s, -s, c);
}

/// diag(lambda, 1/lambda).
inline Mat2 diagonal(double lambda) {
  if (!(lambda > 0)) throw PreconditionError("diagonal: lambda must be positive");
  return Mat2(lambda, 0, 0, 1.0 / lambda);
}

/// Coefficients of ||M(theta)||^2 = half_s + half_d*cos(2t) + e*sin(2t).
struct ExpansionCoeffs {
  double half_s;
  double half_d;
  double e;
};

inline ExpansionCoeffs expansion_coeffs(const Mat2& m) {
  double a = m.a(), b = m.b(), c = m.c(), d = m.d();
  return {0.5 * (a * a + b * b + c * c + d * d),
          0.5 * (a * a - b * b + c * c - d * d), a * b + c * d};
}

inline double squared_expansion(const ExpansionCoeffs& k, double cos2t, double sin2t) {
  return k.half_s + k.half_d * cos2t + k.e * sin2t;
}

/// Operator norm: the root lambda >= 1 of lambda^2 + lambda^-2 = a^2+b^2+c^2+d^2.
inline double norm(const Mat2& m) {
  double s = 2.0 * expansion_coeffs(m).half_s;
  if (s < 2.0 - 1e-9) {
    throw InvalidMatrixError("norm: entry sum of squares below 2, not area-preserving");
  }
  double disc = s * s - 4.0;
  if (disc < 0) disc = 0;
  return std::sqrt(0.5 * (s + std::sqrt(disc)));
}

/// log ||M(theta)|| where M(theta) is M applied to the unit vector of
/// direction theta, evaluated from the closed form of ||M(theta)||^2.
inline double log_expansion(const Mat2& m, Direction t) {
  ExpansionCoeffs k = expansion_coeffs(m);
  double g = squared_expansion(k, std::cos(2 * t.theta()), std::sin(2 * t.theta()));
  if (!(g > 0)) {
    throw InvalidMatrixError("log_expansion: nonpositive squared norm");
  }
  return 0.5 * std::log(g);
}

/// d/dtheta of log_expansion at fixed M.
inline double d_log_expansion_dtheta(const Mat2& m, Direction t) {
  ExpansionCoeffs k = expansion_coeffs(m);
  double c2 = std::cos(2 * t.theta()), s2 = std::sin(2 * t.theta());
  double g = squared_expansion(k, c2, s2);
  if (!(g > 0)) {
    throw InvalidMatrixError("d_log_expansion_dtheta: nonpositive squared norm");
  }
  return (-2.0 * k.half_d * s2 + 2.0 * k.e * c2) / (2.0 * g);
}

/// The direction theta_F minimizing ||M(theta)||, from
/// tan 2theta = 2(ab+cd) / (a^2+c^2-b^2-d^2). The tangent equation has two
/// solutions pi/2 apart; the smaller expansion picks the branch.
inline Direction contracting_direction(const Mat2& m, double dir_tol = kDirTol) {
  if (norm(m) <= 1.0 + dir_tol) {
    throw DirectionUndefinedError("contracting_direction: matrix within " +
                                  std::to_string(dir_tol) + " of a rotation");
  }
  double a = m.a(), b = m.b(), c = m.c(), d = m.d();
  double num = 2.0 * (a * b + c * d);
  double den = a * a + c * c - b * b - d * d;
  Direction cand1(0.5 * std::atan2(num, den));
  Direction cand2(cand1.theta() + 0.5 * kPi);
  // compare the squared norms directly: near the minimum the value is all
  // cancellation for large lambda, but the comparison still orders the two
  // branches correctly
  ExpansionCoeffs k = expansion_coeffs(m);
  double g1 = squared_expansion(k, std::cos(2 * cand1.theta()), std::sin(2 * cand1.theta()));
  double g2 = squared_expansion(k, std::cos(2 * cand2.theta()), std::sin(2 * cand2.theta()));
  return g1 <= g2 ? cand1 : cand2;
}

/// Cartan data of M = r_{-phi} a_lambda r_theta with lambda >= 1:
/// lambda is the norm, theta_contract the contracting direction of M and
/// phi the contracting direction of M^{-1}.
struct Cartan {
  double lambda;
  Direction theta_contract;
  Direction phi;
};

inline Cartan cartan(const Mat2& m, double dir_tol = kDirTol) {
  Cartan out;
  out.lambda = norm(m);
  out.theta_contract = contracting_direction(m, dir_tol);
  out.phi = contracting_direction(m.inverse(), dir_tol);
  return out;
}

/// Rebuild r_{-phi} a_lambda r_{theta_contract - pi/2}; equals +-M.
inline Mat2 cartan_reconstruct(const Cartan& k) {
  return rotation(-k.phi.theta()) * diagonal(k.lambda) *
         rotation(k.theta_contract.theta() - 0.5 * kPi);
}

/// Certified lower bound ||F(theta)|| >= (2/pi) ||F|| d(theta, theta_F).
inline double distance_expansion_bound(double lambda, double dist) {
  if (!(lambda >= 1.0)) throw PreconditionError("distance_expansion_bound: lambda < 1");
  if (!(dist >= 0.0 && dist <= 0.5 * kPi + 1e-12)) {
    throw PreconditionError("distance_expansion_bound: dist outside [0, pi/2]");
  }
  return (2.0 / kPi) * lambda * dist;
}

/// Threshold T with ||M1 M2|| >= lambda tau / m  iff  cos 2phi >= T, where
/// phi is the angle between the contracting direction of M1 and the
/// expanding direction of M2^{-1}.
inline double product_norm_threshold(double lambda, double tau, double m) {
  if (!(lambda > 1.0) || !(tau > 1.0)) {
    throw PreconditionError("product_norm_threshold: lambda and tau must exceed 1");
  }
  if (!(m > 0.0)) throw PreconditionError("product_norm_threshold: m must be positive");
  double lt = lambda * tau / m;
  double l2 = lambda * lambda, t2 = tau * tau;
  double dl = l2 - 1.0 / l2, dt = t2 - 1.0 / t2;
  double sl = l2 + 1.0 / l2, st = t2 + 1.0 / t2;
  return (2.0 * (lt * lt + 1.0 / (lt * lt)) - sl * st) / (dl * dt);
}

/// Drift bound d(theta_{M2}, theta_{M1 M2}) <= m^2 / tau^2, valid
/// unconditionally in m when tau >= sqrt(2) m.
inline double angle_drift_bound(double m, double tau) {
  if (!(m > 1.0)) throw PreconditionError("angle_drift_bound: m must exceed 1");
  if (!(tau >= std::sqrt(2.0) * m)) {
    throw PreconditionError("angle_drift_bound: requires tau >= sqrt(2) m");
  }
  return m * m / (tau * tau);
}

/// Asymptotic sensitivity d(theta_{M1 M2})/d(theta_{M1}) for lambda2 >> 1:
/// 2 (1 + k cos 2phi) / ((k + cos 2phi)^2 lambda2^2), k = 1 + 2/(lambda1^4 - 1).
inline double direction_sensitivity(double lambda1, double lambda2, double phi) {
  if (!(lambda1 > 1.0) || !(lambda2 > 1.0)) {
    throw PreconditionError("direction_sensitivity: norms must exceed 1");
  }
  double k = 1.0 + 2.0 / (lambda1 * lambda1 * lambda1 * lambda1 - 1.0);
  double c2 = std::cos(2.0 * phi);
  double den = k + c2;
  if (std::fabs(den) < 1e-4) {
    throw SingularConfigurationError("direction_sensitivity: k + cos 2phi vanishes");
  }
  return 2.0 * (1.0 + k * c2) / (den * den * lambda2 * lambda2);
}

/// One projective step: image direction of theta under M and the log of the
/// stretch picked up, log ||M v(theta)||.
struct DirectionStep {
  Direction image;
  double log_norm;
};

inline DirectionStep push_direction(const Mat2& m, Direction t) {
  double vx = std::cos(t.theta()), vy = std::sin(t.theta());
  double wx = m.a() * vx + m.b() * vy;
  double wy = m.c() * vx + m.d() * vy;
  double n2 = wx * wx + wy * wy;
  if (!(n2 > 0) || !std::isfinite(n2)) {
    throw InvalidMatrixError("push_direction: degenerate image vector");
  }
  return {Direction(std::atan2(wy, wx)), 0.5 * std::log(n2)};
}

}  // namespace ue
