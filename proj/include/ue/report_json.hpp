// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// Stable JSON serialization for reports. nlohmann::json objects keep keys
// sorted, so a report with identical field values always prints identically.

#pragma once

#include <json.hpp>

#include "ue/dynamics.hpp"
#include "ue/verifier.hpp"

namespace ue {

inline nlohmann::json to_json(const SurfacePoint& p) {
  if (const auto* t = std::get_if<TorusPoint>(&p)) {
    return {{"kind", "torus"}, {"x", t->x}, {"y", t->y}};
  }
  const TracePoint& q = std::get<TracePoint>(p);
  return {{"kind", "shell"}, {"x", q.x}, {"y", q.y}, {"z", q.z}, {"s", q.shell}};
}

inline nlohmann::json to_json(const UEReport& r) {
  nlohmann::json argmin = {{"point", to_json(r.argmin_point.point)},
                           {"theta", r.argmin_theta.theta()}};
  return {{"verdict", to_string(r.verdict)},
          {"min_value", r.min_value},
          {"argmin", argmin},
          {"grid_size", r.grid_size},
          {"c_m", r.bounds.c_m},
          {"c_theta", r.bounds.c_theta},
          {"r", r.grid.r},
          {"rho", r.grid.rho},
          {"threshold", r.threshold},
          {"elapsed_seconds", r.elapsed_seconds}};
}

inline nlohmann::json to_json(const DerivativeBounds& b, double safety_factor) {
  return {{"c_m", b.c_m},
          {"c_theta", b.c_theta},
          {"provenance",
           b.provenance == DerivativeBounds::Provenance::configured ? "configured" : "estimated"},
          {"safety_factor", safety_factor}};
}

inline nlohmann::json to_json(const LyapunovEstimate& e) {
  return {{"mean", e.mean},
          {"stderr", e.std_error},
          {"n_steps", e.n_steps},
          {"n_samples", e.n_samples},
          {"discarded", e.discarded},
          {"seed", e.seed}};
}

inline nlohmann::json to_json(const EquidistributionReport& r) {
  nlohmann::json obs = nlohmann::json::array();
  for (const auto& o : r.observables) {
    obs.push_back({{"name", o.name},
                   {"average", o.average},
                   {"reference", o.reference},
                   {"discrepancy", o.discrepancy}});
  }
  return {{"observables", obs}, {"n_steps", r.n_steps}, {"seed", r.seed}};
}

}  // namespace ue
