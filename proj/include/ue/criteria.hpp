// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// Abstract sufficient conditions for uniform expansion: the admissibility
// inequality, the explicit one-step lower bound as a function of the mass
// eta of "good" maps, and the combinatorial count used by the perturbed
// standard map argument.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ue/grid.hpp"
#include "ue/parallel.hpp"
#include "ue/sl2.hpp"
#include "ue/system.hpp"

namespace ue {

struct CriterionParams {
  double epsilon = 0;      // direction separation on P^1, radians
  double lambda_crit = 0;  // minimum norm of a good map
  double lambda_max = 0;   // maximum norm over all maps
  double eta = 0;          // mass of good maps, in (0, 1)
  int n = 1;               // word length
};

/// (1/sin eps) sqrt(2 + 1/eps) < lambda_crit <= lambda_max.
inline bool admissible(double epsilon, double lambda_crit, double lambda_max) {
  if (!(epsilon > 0 && epsilon < 0.25 * kPi)) {
    throw PreconditionError("admissible: epsilon outside (0, pi/4)");
  }
  if (!(lambda_crit > 1.0) || !(lambda_max > 1.0)) {
    throw PreconditionError("admissible: lambda_crit and lambda_max must exceed 1");
  }
  double lhs = (1.0 / std::sin(epsilon)) * std::sqrt(2.0 + 1.0 / epsilon);
  return lhs < lambda_crit && lambda_crit <= lambda_max;
}

/// eta^n log(lambda_crit^n / m0^(n-1) * eps/pi) - (1 - eta^n) n log lambda_max
/// with m0 = 1/sin eps. Positivity certifies uniform expansion under the
/// separation hypothesis with mass eta.
inline double criterion_value(const CriterionParams& p) {
  if (!admissible(p.epsilon, p.lambda_crit, p.lambda_max)) {
    throw PreconditionError("criterion_value: inadmissible parameters");
  }
  if (!(p.eta > 0 && p.eta < 1) || p.n < 1) {
    throw PreconditionError("criterion_value: eta must be in (0,1) and n >= 1");
  }
  double m0 = 1.0 / std::sin(p.epsilon);
  double good = p.n * std::log(p.lambda_crit) - (p.n - 1) * std::log(m0) +
                std::log(p.epsilon / kPi);
  double en = std::pow(p.eta, p.n);
  return en * good - (1.0 - en) * p.n * std::log(p.lambda_max);
}

struct EtaResult {
  double eta = 0;
  int n = 0;
};

/// Smallest n making the good-branch term positive, then the smallest eta on
/// a 1e-3 ladder with a positive criterion value.
inline EtaResult find_eta(double epsilon, double lambda_crit, double lambda_max) {
  if (!admissible(epsilon, lambda_crit, lambda_max)) {
    throw PreconditionError("find_eta: inadmissible parameters");
  }
  double m0 = 1.0 / std::sin(epsilon);
  const int n_cap = 1000;
  int n = 0;
  for (int cand = 1; cand <= n_cap; ++cand) {
    double good = cand * std::log(lambda_crit) - (cand - 1) * std::log(m0) +
                  std::log(epsilon / kPi);
    if (good > 0) {
      n = cand;
      break;
    }
  }
  if (n == 0) throw Error("find_eta: no word length below cap makes the good branch positive");
  for (int k = 1; k <= 999; ++k) {
    CriterionParams p{epsilon, lambda_crit, lambda_max, k * 1e-3, n};
    if (criterion_value(p) > 0) return {p.eta, n};
  }
  throw Error("find_eta: eta ladder exhausted");
}

/// Minimum over grid points (x, theta) of the generator mass with
/// d(theta_{D_x f}, theta) > epsilon and norm(D_x f) > lambda_crit.
/// Differentials within kDirTol of a rotation contribute no mass.
inline double empirical_hypothesis_margin(const SystemDescriptor& sys, const GridSpec& grid,
                                          double epsilon, double lambda_crit,
                                          int n_threads = 1) {
  sys.validate();
  if (!(epsilon > 0) || !(lambda_crit > 1.0)) {
    throw PreconditionError("empirical_hypothesis_margin: bad epsilon or lambda_crit");
  }
  std::vector<BasePoint> base = build_grid(sys, grid);
  std::vector<Direction> dirs = direction_lattice(grid.rho);
  const std::size_t n_chunks = (base.size() + 1023) / 1024;
  std::vector<double> chunk_min(n_chunks, 2.0);

  parallel_chunks(base.size(), 1024, n_threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    double local = 2.0;
    std::vector<double> norms(sys.size());
    std::vector<Direction> contract(sys.size());
    std::vector<bool> usable(sys.size());
    for (std::size_t ip = b; ip < e; ++ip) {
      for (std::size_t i = 0; i < sys.size(); ++i) {
        Mat2 m = sys.generators[i].diff(base[ip].point);
        norms[i] = norm(m);
        usable[i] = norms[i] > 1.0 + kDirTol;
        if (usable[i]) contract[i] = contracting_direction(m);
      }
      for (const Direction& th : dirs) {
        double mass = 0;
        for (std::size_t i = 0; i < sys.size(); ++i) {
          if (usable[i] && norms[i] > lambda_crit &&
              projective_distance(contract[i], th) > epsilon) {
            mass += sys.generators[i].weight;
          }
        }
        local = std::min(local, mass);
      }
    }
    chunk_min[c] = local;
  });

  double result = 2.0;
  for (double v : chunk_min) result = std::min(result, v);
  return result > 1.5 ? 0.0 : result;
}

/// The exact count
///   Xi(|Omega|, n, delta) = sum_{i=1}^n (|Omega|-2)(|Omega|-1)^(n-i)
///                            (delta (n-i+1) - i) - (|Omega|^n - (|Omega|-1)^n + 1) n.
inline double xi(int omega_size, int n, double delta) {
  if (omega_size < 3 || n < 1 || !(delta > 0 && delta < 1)) {
    throw PreconditionError("xi: need |Omega| >= 3, n >= 1, delta in (0,1)");
  }
  double om = omega_size;
  double sum = 0;
  for (int i = 1; i <= n; ++i) {
    double pow_term = 1;
    for (int k = 0; k < n - i; ++k) pow_term *= (om - 1.0);
    sum += (om - 2.0) * pow_term * (delta * (n - i + 1) - i);
  }
  double om_n = 1, om1_n = 1;
  for (int k = 0; k < n; ++k) {
    om_n *= om;
    om1_n *= (om - 1.0);
  }
  return sum - (om_n - om1_n + 1.0) * n;
}

}  // namespace ue
