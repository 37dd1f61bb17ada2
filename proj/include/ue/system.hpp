// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ue/character_variety.hpp"
#include "ue/sl2.hpp"
#include "ue/torus.hpp"

namespace ue {

using SurfacePoint = std::variant<TorusPoint, TracePoint>;

enum class SurfaceKind { torus, shell };

inline const TorusPoint& as_torus(const SurfacePoint& p) {
  if (const auto* t = std::get_if<TorusPoint>(&p)) return *t;
  throw PreconditionError("expected a torus point");
}

inline const TracePoint& as_shell(const SurfacePoint& p) {
  if (const auto* t = std::get_if<TracePoint>(&p)) return *t;
  throw PreconditionError("expected a shell point");
}

/// One weighted map of a random system: point evolution plus the framed
/// differential as an area-preserving 2x2 matrix.
struct Generator {
  std::string name;
  double weight = 0;
  std::function<SurfacePoint(const SurfacePoint&)> apply;
  std::function<Mat2(const SurfacePoint&)> diff;
};

struct StdMapParams {
  double coupling = 0;  // L
  double epsilon = 0;
  int r = 0;
};

struct ShellParams {
  double s = 0;
};

/// A finite weighted family of surface maps. Immutable after construction;
/// all evaluation goes through the per-generator closures, which are pure.
struct SystemDescriptor {
  SurfaceKind kind = SurfaceKind::torus;
  std::vector<Generator> generators;
  std::optional<StdMapParams> std_params;
  std::optional<ShellParams> shell_params;
  std::vector<std::string> warnings;

  std::size_t size() const { return generators.size(); }

  std::vector<double> weights() const {
    std::vector<double> w;
    w.reserve(generators.size());
    for (const auto& g : generators) w.push_back(g.weight);
    return w;
  }

  void validate() const {
    if (generators.empty()) throw PreconditionError("system has no generators");
    double total = 0;
    for (const auto& g : generators) {
      if (!(g.weight > 0)) throw PreconditionError("generator weight must be positive");
      if (!g.apply || !g.diff) throw PreconditionError("generator missing apply/diff");
      total += g.weight;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
      throw PreconditionError("generator weights sum to " + std::to_string(total));
    }
  }
};

/// The discretely perturbed standard map with offsets omega_set(epsilon, r)
/// and uniform weights 1/(2r+1). Parameter-range issues against the intended
/// regime epsilon in [coupling^(-1/2), 1/(2r+1)) are reported as warnings.
inline SystemDescriptor std_system(double coupling, double epsilon, int r, double delta = 0.5) {
  if (!(coupling > 0)) throw PreconditionError("std_system: coupling must be positive");
  if (!(epsilon >= 0)) throw PreconditionError("std_system: epsilon must be nonnegative");
  SystemDescriptor sys;
  sys.kind = SurfaceKind::torus;
  sys.std_params = StdMapParams{coupling, epsilon, r};

  double lower = std::pow(coupling, -1.0 + delta);
  double upper = 1.0 / (2.0 * r + 1.0);
  if (r > 0 && epsilon < lower) {
    sys.warnings.push_back("epsilon below coupling^(delta-1) = " + std::to_string(lower));
  }
  if (r > 0 && epsilon >= upper) {
    sys.warnings.push_back("epsilon not below 1/(2r+1) = " + std::to_string(upper));
  }

  std::vector<double> omegas = omega_set(epsilon, r);
  double w = 1.0 / static_cast<double>(omegas.size());
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    double omega = omegas[i];
    Generator g;
    g.name = "F_omega[" + std::to_string(static_cast<int>(i) - r) + "]";
    g.weight = w;
    g.apply = [coupling, omega](const SurfacePoint& p) -> SurfacePoint {
      return std_apply(coupling, omega, as_torus(p));
    };
    g.diff = [coupling, omega](const SurfacePoint& p) -> Mat2 {
      return std_diff(coupling, omega, as_torus(p));
    };
    sys.generators.push_back(std::move(g));
  }
  sys.validate();
  return sys;
}

/// The sixteen-generator twist system on the shell kappa = s, uniform
/// weights 1/16.
inline SystemDescriptor cv_system(double s) {
  if (!(s > -2.0 && s < 2.0)) {
    throw PreconditionError("cv_system: shell parameter must lie in (-2, 2)");
  }
  SystemDescriptor sys;
  sys.kind = SurfaceKind::shell;
  sys.shell_params = ShellParams{s};
  std::vector<MapWord> words = generator_set_16();
  double w = 1.0 / static_cast<double>(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    Generator g;
    g.name = word_name(words[i]);
    g.weight = w;
    MapWord word = words[i];
    g.apply = [word](const SurfacePoint& p) -> SurfacePoint {
      return word_apply(word, as_shell(p));
    };
    g.diff = [word](const SurfacePoint& p) -> Mat2 { return word_diff(as_shell(p), word); };
    sys.generators.push_back(std::move(g));
  }
  sys.validate();
  return sys;
}

}  // namespace ue
