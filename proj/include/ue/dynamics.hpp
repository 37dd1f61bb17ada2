// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo side of the library: top Lyapunov exponent estimation along
// random orbits, Birkhoff-average equidistribution checks against reference
// integrals, and breadth-first detection of finite orbits.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ue/grid.hpp"
#include "ue/parallel.hpp"
#include "ue/rng.hpp"
#include "ue/system.hpp"

namespace ue {

struct LyapunovEstimate {
  double mean = 0;       // nats per step
  double std_error = 0;
  int n_steps = 0;
  int n_samples = 0;     // samples that completed
  int discarded = 0;     // samples lost to frame singularities
  std::uint64_t seed = 0;
};

/// Per-sample random word of length n_steps: evolve the point, push the
/// direction projectively, and accumulate the telescoped log stretches. The
/// estimate is the across-sample mean of (1/n) sum of increments; each sample
/// owns the stream derived from (seed, sample index), so results do not
/// depend on the thread count.
inline LyapunovEstimate estimate_top_lyapunov(const SystemDescriptor& sys,
                                              const SurfacePoint& start, Direction start_dir,
                                              int n_steps, int n_samples, std::uint64_t seed,
                                              int n_threads = 1) {
  sys.validate();
  if (n_steps < 1) throw PreconditionError("estimate_top_lyapunov: n_steps must be >= 1");
  if (n_samples < 1) throw PreconditionError("estimate_top_lyapunov: n_samples must be >= 1");
  const std::vector<double> weights = sys.weights();

  std::vector<double> values(static_cast<std::size_t>(n_samples));
  std::vector<char> ok(static_cast<std::size_t>(n_samples), 0);

  parallel_chunks(static_cast<std::size_t>(n_samples), 1, n_threads,
                  [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t sample = b; sample < e; ++sample) {
      Rng rng(stream_seed(seed, sample));
      SurfacePoint p = start;
      Direction t = start_dir;
      double acc = 0;
      bool alive = true;
      for (int step = 0; step < n_steps && alive; ++step) {
        int i = rng.weighted_index(weights);
        try {
          DirectionStep d = push_direction(sys.generators[static_cast<std::size_t>(i)].diff(p), t);
          acc += d.log_norm;
          t = d.image;
          p = sys.generators[static_cast<std::size_t>(i)].apply(p);
        } catch (const Error&) {
          alive = false;
        }
      }
      if (alive) {
        values[sample] = acc / n_steps;
        ok[sample] = 1;
      }
    }
  });

  LyapunovEstimate out;
  out.n_steps = n_steps;
  out.seed = seed;
  double sum = 0;
  int kept = 0;
  for (int s = 0; s < n_samples; ++s) {
    if (ok[static_cast<std::size_t>(s)]) {
      sum += values[static_cast<std::size_t>(s)];
      ++kept;
    }
  }
  out.n_samples = kept;
  out.discarded = n_samples - kept;
  if (kept == 0) throw Error("estimate_top_lyapunov: every sample hit a singularity");
  out.mean = sum / kept;
  if (kept > 1) {
    double ss = 0;
    for (int s = 0; s < n_samples; ++s) {
      if (!ok[static_cast<std::size_t>(s)]) continue;
      double d = values[static_cast<std::size_t>(s)] - out.mean;
      ss += d * d;
    }
    out.std_error = std::sqrt(ss / (kept - 1)) / std::sqrt(static_cast<double>(kept));
  }
  return out;
}

/// The exponent floor guaranteed by a verified threshold: C / N.
inline double lyapunov_lower_bound(double c, int n) {
  if (!(c > 0) || n < 1) throw PreconditionError("lyapunov_lower_bound: need C > 0 and N >= 1");
  return c / n;
}

/// An observable with a known integral against the reference measure.
struct Observable {
  std::string name;
  std::function<double(const SurfacePoint&)> fn;
  double reference = 0;
};

struct ObservableStats {
  std::string name;
  double average = 0;
  double reference = 0;
  double discrepancy = 0;
};

struct EquidistributionReport {
  std::vector<ObservableStats> observables;
  int n_steps = 0;
  std::uint64_t seed = 0;
};

/// Birkhoff averages of the observables along one sampled random word,
/// compared against their reference integrals. The average runs over the
/// n_steps points starting at `start` (the final image is excluded).
/// An optional sink receives the trajectory as CSV rows
/// step,x,y[,z],theta,log_growth.
inline EquidistributionReport birkhoff_equidistribution(const SystemDescriptor& sys,
                                                        const SurfacePoint& start,
                                                        const std::vector<Observable>& observables,
                                                        int n_steps, std::uint64_t seed,
                                                        std::ostream* trajectory_csv = nullptr) {
  sys.validate();
  if (n_steps < 1) throw PreconditionError("birkhoff_equidistribution: n_steps must be >= 1");
  const std::vector<double> weights = sys.weights();
  Rng rng(stream_seed(seed, 0));

  std::vector<double> sums(observables.size(), 0.0);
  SurfacePoint p = start;
  Direction t(0);
  double log_growth = 0;

  char buf[32];
  if (trajectory_csv) {
    *trajectory_csv << (sys.kind == SurfaceKind::shell ? "step,x,y,z,theta,log_growth\n"
                                                       : "step,x,y,theta,log_growth\n");
  }

  auto dump = [&](int step) {
    if (!trajectory_csv) return;
    auto putv = [&](double v) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      *trajectory_csv << buf;
    };
    *trajectory_csv << step << ',';
    if (sys.kind == SurfaceKind::shell) {
      const TracePoint& q = as_shell(p);
      putv(q.x); *trajectory_csv << ',';
      putv(q.y); *trajectory_csv << ',';
      putv(q.z); *trajectory_csv << ',';
    } else {
      const TorusPoint& q = as_torus(p);
      putv(q.x); *trajectory_csv << ',';
      putv(q.y); *trajectory_csv << ',';
    }
    putv(t.theta()); *trajectory_csv << ',';
    putv(log_growth);
    *trajectory_csv << "\n";
  };

  for (int step = 0; step < n_steps; ++step) {
    for (std::size_t k = 0; k < observables.size(); ++k) sums[k] += observables[k].fn(p);
    dump(step);
    int i = rng.weighted_index(weights);
    const Generator& g = sys.generators[static_cast<std::size_t>(i)];
    DirectionStep d = push_direction(g.diff(p), t);
    log_growth += d.log_norm;
    t = d.image;
    p = g.apply(p);
  }

  EquidistributionReport out;
  out.n_steps = n_steps;
  out.seed = seed;
  for (std::size_t k = 0; k < observables.size(); ++k) {
    ObservableStats st;
    st.name = observables[k].name;
    st.average = sums[k] / n_steps;
    st.reference = observables[k].reference;
    st.discrepancy = std::fabs(st.average - st.reference);
    out.observables.push_back(st);
  }
  return out;
}

/// Reference integral of an observable against the invariant measure of the
/// shell, whose chart density is proportional to 1/|n_k|: deterministic
/// midpoint quadrature over the three charts, numerically normalized.
inline double shell_reference_integral(const std::function<double(const TracePoint&)>& fn,
                                       double s, double pitch = 0.01) {
  if (!(pitch > 0)) throw PreconditionError("shell_reference_integral: pitch must be positive");
  std::size_t n = static_cast<std::size_t>(std::ceil(4.0 / pitch));
  double step = 4.0 / static_cast<double>(n);
  double mass = 0, total = 0;
  for (int region = 1; region <= 3; ++region) {
    for (std::size_t i1 = 0; i1 < n; ++i1) {
      double t1 = -2.0 + step * (static_cast<double>(i1) + 0.5);
      for (std::size_t i2 = 0; i2 < n; ++i2) {
        double t2 = -2.0 + step * (static_cast<double>(i2) + 0.5);
        TracePoint lifted[2];
        int count;
        try {
          count = lift_chart(region, t1, t2, s, lifted);
        } catch (const Error&) {
          continue;
        }
        for (int q = 0; q < count; ++q) {
          Frame f;
          try {
            f = frame(lifted[q]);
          } catch (const SingularFrameError&) {
            continue;
          }
          if (f.region != region) continue;
          double w = 1.0 / std::fabs(f.n_k);
          mass += w;
          total += w * fn(lifted[q]);
        }
      }
    }
  }
  if (!(mass > 0)) throw Error("shell_reference_integral: empty quadrature");
  return total / mass;
}

/// Breadth-first closure of a point under all generators with
/// tolerance-based point identification through a spatial hash. Returns the
/// orbit size if the closure stabilizes within max_points, nothing otherwise.
inline std::optional<int> detect_finite_orbit(const SystemDescriptor& sys,
                                              const SurfacePoint& start, int max_points,
                                              double match_tol) {
  sys.validate();
  if (!(match_tol > 0)) {
    throw PreconditionError("detect_finite_orbit: match tolerance must be positive");
  }
  if (max_points < 1) throw PreconditionError("detect_finite_orbit: max_points must be >= 1");

  const bool shell = sys.kind == SurfaceKind::shell;
  auto coords = [&](const SurfacePoint& p, double out[3]) {
    if (shell) {
      const TracePoint& q = as_shell(p);
      out[0] = q.x;
      out[1] = q.y;
      out[2] = q.z;
    } else {
      const TorusPoint& q = as_torus(p);
      out[0] = q.x;
      out[1] = q.y;
      out[2] = 0;
    }
  };
  const std::int64_t wrap_cells =
      shell ? 0 : static_cast<std::int64_t>(std::ceil(kTwoPi / match_tol));
  auto cell_of = [&](double v) {
    auto c = static_cast<std::int64_t>(std::floor(v / match_tol));
    if (wrap_cells > 0) {
      c %= wrap_cells;
      if (c < 0) c += wrap_cells;
    }
    return c;
  };
  auto key_of = [](std::int64_t a, std::int64_t b, std::int64_t c) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(a));
    h = splitmix64(h ^ static_cast<std::uint64_t>(b));
    h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return h;
  };
  auto close = [&](const double a[3], const double b[3]) {
    for (int k = 0; k < 3; ++k) {
      double d = std::fabs(a[k] - b[k]);
      if (!shell) d = std::min(d, kTwoPi - d);
      if (d > match_tol) return false;
    }
    return true;
  };

  std::vector<std::array<double, 3>> points;
  std::vector<SurfacePoint> queue;
  std::unordered_multimap<std::uint64_t, std::size_t> hash;

  auto lookup_or_insert = [&](const SurfacePoint& p) -> bool {  // true when new
    double c[3];
    coords(p, c);
    std::int64_t base[3] = {cell_of(c[0]), cell_of(c[1]), cell_of(c[2])};
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = shell ? -1 : 0; dz <= (shell ? 1 : 0); ++dz) {
          std::int64_t cx = base[0] + dx, cy = base[1] + dy, cz = base[2] + dz;
          if (wrap_cells > 0) {
            cx = (cx % wrap_cells + wrap_cells) % wrap_cells;
            cy = (cy % wrap_cells + wrap_cells) % wrap_cells;
          }
          auto range = hash.equal_range(key_of(cx, cy, cz));
          for (auto it = range.first; it != range.second; ++it) {
            if (close(c, points[it->second].data())) return false;
          }
        }
      }
    }
    hash.emplace(key_of(base[0], base[1], base[2]), points.size());
    points.push_back({c[0], c[1], c[2]});
    queue.push_back(p);
    return true;
  };

  lookup_or_insert(start);
  std::size_t head = 0;
  while (head < queue.size()) {
    if (points.size() > static_cast<std::size_t>(max_points)) return std::nullopt;
    SurfacePoint p = queue[head++];
    for (const Generator& g : sys.generators) {
      lookup_or_insert(g.apply(p));
    }
  }
  if (points.size() > static_cast<std::size_t>(max_points)) return std::nullopt;
  return static_cast<int>(points.size());
}

}  // namespace ue
