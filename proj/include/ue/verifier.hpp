// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// Grid verification of the uniform-expansion inequality
//   F(P, theta) = sum_i c_i log ||D_P f_i (theta)|| > C
// over the unit tangent bundle: derivative-bound estimation, grid sweep with
// a deterministic min-reduction, and the Lipschitz step-size bookkeeping that
// turns a grid minimum into a certificate with margin C/4.

#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ue/grid.hpp"
#include "ue/parallel.hpp"
#include "ue/system.hpp"

namespace ue {

struct DerivativeBounds {
  double c_m = 0;      // bound on |dF_i/dt| for chart coordinates t1, t2
  double c_theta = 0;  // bound on |dF_i/dtheta|
  enum class Provenance { configured, estimated } provenance = Provenance::configured;

  void validate() const {
    if (!(c_m >= 0) || !(c_theta >= 0) || !std::isfinite(c_m) || !std::isfinite(c_theta)) {
      throw PreconditionError("DerivativeBounds: bounds must be finite and nonnegative");
    }
  }
};

struct UEConfig {
  double threshold = 0.25;         // C
  int word_length = 1;             // N
  double safety_factor = 2.0;      // multiplier on estimated derivative bounds
  double eval_error_budget = 1e-6; // subtracted from the certificate margin

  void validate() const {
    if (!(threshold > 0)) throw PreconditionError("UEConfig: threshold must be positive");
    if (word_length < 1) throw PreconditionError("UEConfig: word length must be >= 1");
    if (!(safety_factor >= 1.0)) throw PreconditionError("UEConfig: safety factor must be >= 1");
    if (!(eval_error_budget >= 0)) throw PreconditionError("UEConfig: budget must be >= 0");
  }
};

enum class Verdict { certified, grid_failed, step_size_invalid };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::grid_failed: return "grid-failed";
    default: return "step-size-invalid";
  }
}

struct UEReport {
  Verdict verdict = Verdict::grid_failed;
  double min_value = 0;
  BasePoint argmin_point;
  Direction argmin_theta;
  std::size_t grid_size = 0;  // base points x directions
  DerivativeBounds bounds;
  GridSpec grid;
  double threshold = 0;
  double certified_margin = 0;  // C/4 when certified, else 0
  double elapsed_seconds = 0;
};

namespace detail {

// Hard cap on |generators|^N word enumerations per tangent vector.
inline constexpr double kWordBudget = 2e7;

inline void check_word_budget(std::size_t d, int n) {
  if (std::pow(static_cast<double>(d), n) > kWordBudget) {
    throw PreconditionError("word length makes the word tree larger than the evaluation budget");
  }
}

inline double evaluate_rec(const SystemDescriptor& sys, const SurfacePoint& p, Direction t,
                           int remaining, std::vector<int>& path) {
  if (remaining == 0) return 0.0;
  double acc = 0;
  for (std::size_t i = 0; i < sys.generators.size(); ++i) {
    const Generator& g = sys.generators[i];
    path.push_back(static_cast<int>(i));
    try {
      DirectionStep step = push_direction(g.diff(p), t);
      double tail = evaluate_rec(sys, g.apply(p), step.image, remaining - 1, path);
      acc += g.weight * (step.log_norm + tail);
    } catch (const Error& e) {
      std::string where = "word [";
      for (std::size_t k = 0; k < path.size(); ++k) {
        where += (k ? " " : "") + sys.generators[static_cast<std::size_t>(path[k])].name;
      }
      where += "] step " + std::to_string(path.size());
      throw Error(where + ": " + e.what());
    }
    path.pop_back();
  }
  return acc;
}

// One-step coefficients for every generator at a base point; the hot path of
// the grid sweep.
inline void point_coeffs(const SystemDescriptor& sys, const SurfacePoint& p,
                         std::vector<ExpansionCoeffs>& out) {
  out.resize(sys.generators.size());
  for (std::size_t i = 0; i < sys.generators.size(); ++i) {
    out[i] = expansion_coeffs(sys.generators[i].diff(p));
  }
}

inline double f_from_coeffs(const std::vector<ExpansionCoeffs>& ks,
                            const std::vector<double>& weights, double c2, double s2) {
  double acc = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    double g = squared_expansion(ks[i], c2, s2);
    if (!(g > 0)) throw InvalidMatrixError("nonpositive squared norm in grid sweep");
    acc += weights[i] * 0.5 * std::log(g);
  }
  return acc;
}

}  // namespace detail

/// The averaged one-step (or N-step) log expansion at (p, theta):
///   N = 1: sum_i c_i log ||D_p f_i (theta)||
///   N > 1: the mu^(N) average over all length-N words, telescoped along the
///          evolving direction so no matrix product is ever formed.
inline double evaluate_F(const SystemDescriptor& sys, const SurfacePoint& p, Direction theta,
                         int n = 1) {
  sys.validate();
  if (n < 1) throw PreconditionError("evaluate_F: word length must be >= 1");
  detail::check_word_budget(sys.size(), n);
  if (n == 1) {
    std::vector<ExpansionCoeffs> ks;
    detail::point_coeffs(sys, p, ks);
    double t = theta.theta();
    return detail::f_from_coeffs(ks, sys.weights(), std::cos(2 * t), std::sin(2 * t));
  }
  std::vector<int> path;
  return detail::evaluate_rec(sys, p, theta, n, path);
}

/// Resumable store of per-chunk sweep minima. The header fingerprint ties a
/// checkpoint file to one verification configuration.
class SweepCheckpoint {
 public:
  SweepCheckpoint() = default;

  void open(const std::string& path, std::uint64_t fingerprint, std::size_t n_chunks) {
    path_ = path;
    done_.assign(n_chunks, false);
    value_.assign(n_chunks, 0.0);
    point_.assign(n_chunks, 0);
    theta_.assign(n_chunks, 0);
    std::ifstream in(path_);
    if (in) {
      std::string tag;
      int version = 0;
      std::uint64_t stored = 0;
      in >> tag >> version >> stored;
      if (tag != "uecheck-checkpoint" || version != 1) {
        throw PreconditionError("checkpoint file has an unknown format: " + path_);
      }
      if (stored != fingerprint) {
        throw PreconditionError("checkpoint was written for a different configuration: " + path_);
      }
      std::size_t chunk, pi, ti;
      std::string vtok;
      // the value token is parsed with strtod: istreams cannot read the
      // hexfloat format they write
      while (in >> chunk >> vtok >> pi >> ti) {
        char* end = nullptr;
        double v = std::strtod(vtok.c_str(), &end);
        if (end == vtok.c_str() || *end != '\0') {
          throw PreconditionError("checkpoint has a malformed value: " + vtok);
        }
        if (chunk < n_chunks) {
          done_[chunk] = true;
          value_[chunk] = v;
          point_[chunk] = pi;
          theta_[chunk] = ti;
        }
      }
      out_.open(path_, std::ios::app);
    } else {
      out_.open(path_, std::ios::trunc);
      out_ << "uecheck-checkpoint 1 " << fingerprint << "\n";
      out_.flush();
    }
    if (!out_) throw Error("cannot open checkpoint file: " + path_);
    active_ = true;
  }

  bool active() const { return active_; }
  bool done(std::size_t chunk) const { return active_ && done_[chunk]; }
  double value(std::size_t chunk) const { return value_[chunk]; }
  std::size_t point_index(std::size_t chunk) const { return point_[chunk]; }
  std::size_t theta_index(std::size_t chunk) const { return theta_[chunk]; }

  void record(std::size_t chunk, double v, std::size_t pi, std::size_t ti) {
    if (!active_) return;
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << chunk << ' ' << std::hexfloat << v << std::defaultfloat << ' ' << pi << ' ' << ti
         << "\n";
    out_.flush();
  }

 private:
  bool active_ = false;
  std::string path_;
  std::vector<bool> done_;
  std::vector<double> value_;
  std::vector<std::size_t> point_;
  std::vector<std::size_t> theta_;
  std::ofstream out_;
  std::mutex mutex_;
};

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t sweep_fingerprint(const SystemDescriptor& sys, const UEConfig& cfg,
                                       const GridSpec& spec, const DerivativeBounds& bounds,
                                       std::size_t chunk_size) {
  std::ostringstream os;
  os.precision(17);
  os << (sys.kind == SurfaceKind::torus ? "torus" : "shell") << '|' << sys.size() << '|';
  if (sys.std_params) {
    os << sys.std_params->coupling << ',' << sys.std_params->epsilon << ',' << sys.std_params->r;
  }
  if (sys.shell_params) os << sys.shell_params->s;
  os << '|' << spec.r << ',' << spec.rho << '|' << cfg.threshold << ',' << cfg.word_length << ','
     << cfg.eval_error_budget << '|' << bounds.c_m << ',' << bounds.c_theta << '|' << chunk_size;
  return fnv1a(os.str());
}

struct ChunkMin {
  double value = std::numeric_limits<double>::infinity();
  std::size_t point_idx = 0;
  std::size_t theta_idx = 0;
};

}  // namespace detail

/// Steps 3-6 of the verification: checks the step-size inequalities
/// r C_M < C/4 and rho C_theta < C/4, sweeps the grid for the minimum of F,
/// and certifies with margin C/4 when the minimum clears the threshold plus
/// the evaluation-error budget. The minimum is always computed, so an
/// invalid step size still reports where the grid stands. The reduction is
/// chunked and associative; the result does not depend on the thread count.
inline UEReport verify(const SystemDescriptor& sys, const UEConfig& cfg, const GridSpec& spec,
                       const DerivativeBounds& bounds, int n_threads = 1,
                       const std::string& checkpoint_path = "") {
  sys.validate();
  cfg.validate();
  spec.validate();
  bounds.validate();
  detail::check_word_budget(sys.size(), cfg.word_length);
  auto t0 = std::chrono::steady_clock::now();

  bool step_ok = spec.r * bounds.c_m < 0.25 * cfg.threshold &&
                 spec.rho * bounds.c_theta < 0.25 * cfg.threshold;

  std::vector<BasePoint> base = build_grid(sys, spec);
  std::vector<Direction> dirs = direction_lattice(spec.rho);
  std::vector<double> cos2(dirs.size()), sin2(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    cos2[i] = std::cos(2 * dirs[i].theta());
    sin2[i] = std::sin(2 * dirs[i].theta());
  }
  const std::vector<double> weights = sys.weights();

  const std::size_t chunk_size = 2048;
  const std::size_t n_chunks = (base.size() + chunk_size - 1) / chunk_size;
  std::vector<detail::ChunkMin> mins(n_chunks);

  SweepCheckpoint ckpt;
  if (!checkpoint_path.empty()) {
    ckpt.open(checkpoint_path, detail::sweep_fingerprint(sys, cfg, spec, bounds, chunk_size),
              n_chunks);
  }

  parallel_chunks(base.size(), chunk_size, n_threads,
                  [&](std::size_t c, std::size_t b, std::size_t e) {
    if (ckpt.done(c)) {
      mins[c] = {ckpt.value(c), ckpt.point_index(c), ckpt.theta_index(c)};
      return;
    }
    detail::ChunkMin local;
    std::vector<ExpansionCoeffs> ks;
    for (std::size_t ip = b; ip < e; ++ip) {
      try {
        if (cfg.word_length == 1) {
          detail::point_coeffs(sys, base[ip].point, ks);
          for (std::size_t it = 0; it < dirs.size(); ++it) {
            double f = detail::f_from_coeffs(ks, weights, cos2[it], sin2[it]);
            if (f < local.value) local = {f, ip, it};
          }
        } else {
          std::vector<int> path;
          for (std::size_t it = 0; it < dirs.size(); ++it) {
            double f = detail::evaluate_rec(sys, base[ip].point, dirs[it], cfg.word_length, path);
            if (f < local.value) local = {f, ip, it};
          }
        }
      } catch (const Error& e2) {
        std::ostringstream os;
        os.precision(17);
        os << "grid point " << ip << " (region " << base[ip].region << ", t1 " << base[ip].t1
           << ", t2 " << base[ip].t2 << "): " << e2.what();
        throw Error(os.str());
      }
    }
    mins[c] = local;
    ckpt.record(c, local.value, local.point_idx, local.theta_idx);
  });

  detail::ChunkMin best;
  for (const auto& m : mins) {
    if (m.value < best.value ||
        (m.value == best.value &&
         (m.point_idx < best.point_idx ||
          (m.point_idx == best.point_idx && m.theta_idx < best.theta_idx)))) {
      best = m;
    }
  }

  UEReport report;
  report.min_value = best.value;
  if (!base.empty()) {
    report.argmin_point = base[best.point_idx];
    report.argmin_theta = dirs[best.theta_idx];
  }
  report.grid_size = base.size() * dirs.size();
  report.bounds = bounds;
  report.grid = spec;
  report.threshold = cfg.threshold;
  if (!step_ok) {
    report.verdict = Verdict::step_size_invalid;
  } else if (best.value > cfg.threshold + cfg.eval_error_budget) {
    report.verdict = Verdict::certified;
    report.certified_margin = 0.25 * cfg.threshold;
  } else {
    report.verdict = Verdict::grid_failed;
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

namespace detail {

// Chart perturbation for finite differences. Returns false when the
// perturbed point leaves the chart (lift failure, region change, or root
// branch jump), in which case the sample is skipped.
inline bool perturb_chart(const SystemDescriptor& sys, const BasePoint& bp, int coord, double h,
                          SurfacePoint& out) {
  if (sys.kind == SurfaceKind::torus) {
    const TorusPoint& t = as_torus(bp.point);
    out = coord == 1 ? TorusPoint{wrap_two_pi(t.x + h), t.y}
                     : TorusPoint{t.x, wrap_two_pi(t.y + h)};
    return true;
  }
  double t1 = bp.t1 + (coord == 1 ? h : 0.0);
  double t2 = bp.t2 + (coord == 2 ? h : 0.0);
  if (std::fabs(t1) > 2.0 || std::fabs(t2) > 2.0) return false;
  const TracePoint& p = as_shell(bp.point);
  double z_ref = bp.region == 1 ? p.x : (bp.region == 2 ? p.y : p.z);
  TracePoint lifted[2];
  int count;
  try {
    count = lift_chart(bp.region, t1, t2, p.shell, lifted);
  } catch (const Error&) {
    return false;
  }
  int pick = -1;
  double best = 10.0 * std::fabs(h) + 1e-12;  // continuity guard on the root branch
  for (int i = 0; i < count; ++i) {
    double zi = bp.region == 1 ? lifted[i].x : (bp.region == 2 ? lifted[i].y : lifted[i].z);
    double dist = std::fabs(zi - z_ref);
    if (dist < best) {
      best = dist;
      pick = i;
    }
  }
  if (pick < 0) return false;
  try {
    if (frame(lifted[pick]).region != bp.region) return false;
  } catch (const SingularFrameError&) {
    return false;
  }
  out = lifted[pick];
  return true;
}

inline int shell_region_of(const SurfacePoint& p) { return frame(as_shell(p)).region; }

}  // namespace detail

/// Step-1 derivative bounds, sampled over a probe grid: |dF_i/dtheta| from
/// the analytic derivative, |dF_i/dt| from centered finite differences
/// through the chart. Probes that cross a chart or image-region boundary are
/// skipped (the bound is per smoothness region); the safety factor stands in
/// for the unsampled second-derivative margin.
inline DerivativeBounds estimate_derivative_bounds(const SystemDescriptor& sys,
                                                   const GridSpec& probe, double safety_factor,
                                                   int n_threads = 1) {
  sys.validate();
  probe.validate();
  if (!(safety_factor >= 1.0)) {
    throw PreconditionError("estimate_derivative_bounds: safety factor must be >= 1");
  }
  std::vector<BasePoint> base = build_grid(sys, probe);
  std::vector<Direction> dirs = direction_lattice(probe.rho);
  std::vector<double> cos2(dirs.size()), sin2(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    cos2[i] = std::cos(2 * dirs[i].theta());
    sin2[i] = std::sin(2 * dirs[i].theta());
  }
  const double h = 1e-4;

  const std::size_t chunk_size = 512;
  const std::size_t n_chunks = (base.size() + chunk_size - 1) / chunk_size;
  std::vector<double> chunk_ct(n_chunks, 0.0), chunk_cm(n_chunks, 0.0);

  parallel_chunks(base.size(), chunk_size, n_threads,
                  [&](std::size_t c, std::size_t b, std::size_t e) {
    double max_ct = 0, max_cm = 0;
    std::vector<ExpansionCoeffs> ks, kplus, kminus;
    for (std::size_t ip = b; ip < e; ++ip) {
      const BasePoint& bp = base[ip];
      try {
        detail::point_coeffs(sys, bp.point, ks);
      } catch (const Error& e2) {
        throw Error("derivative probe at grid point " + std::to_string(ip) + ": " + e2.what());
      }
      for (std::size_t i = 0; i < ks.size(); ++i) {
        for (std::size_t it = 0; it < dirs.size(); ++it) {
          double g = squared_expansion(ks[i], cos2[it], sin2[it]);
          if (!(g > 0)) continue;
          double dg = -2.0 * ks[i].half_d * sin2[it] + 2.0 * ks[i].e * cos2[it];
          max_ct = std::max(max_ct, std::fabs(dg / (2.0 * g)));
        }
      }
      for (int coord = 1; coord <= 2; ++coord) {
        SurfacePoint plus, minus;
        if (!detail::perturb_chart(sys, bp, coord, h, plus) ||
            !detail::perturb_chart(sys, bp, coord, -h, minus)) {
          continue;
        }
        try {
          detail::point_coeffs(sys, plus, kplus);
          detail::point_coeffs(sys, minus, kminus);
        } catch (const Error&) {
          continue;  // probe fell off the chart; skip
        }
        for (std::size_t i = 0; i < kplus.size(); ++i) {
          if (sys.kind == SurfaceKind::shell) {
            try {
              if (detail::shell_region_of(sys.generators[i].apply(plus)) !=
                  detail::shell_region_of(sys.generators[i].apply(minus))) {
                continue;  // image crosses a region boundary, F_i jumps
              }
            } catch (const Error&) {
              continue;
            }
          }
          for (std::size_t it = 0; it < dirs.size(); ++it) {
            double gp = squared_expansion(kplus[i], cos2[it], sin2[it]);
            double gm = squared_expansion(kminus[i], cos2[it], sin2[it]);
            if (!(gp > 0) || !(gm > 0)) continue;
            double diff = 0.5 * (std::log(gp) - std::log(gm)) / (2.0 * h);
            max_cm = std::max(max_cm, std::fabs(diff));
          }
        }
      }
    }
    chunk_ct[c] = max_ct;
    chunk_cm[c] = max_cm;
  });

  double ct = 0, cm = 0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    ct = std::max(ct, chunk_ct[c]);
    cm = std::max(cm, chunk_cm[c]);
  }
  return {cm * safety_factor, ct * safety_factor, DerivativeBounds::Provenance::estimated};
}

/// Dumps one CSV row per grid pair (P, theta): chart data, the averaged
/// value F (at the configured word length) and the per-generator one-step
/// values F_i. The F column reproduces the verify() sweep bit for bit.
inline void sweep_report_csv(const SystemDescriptor& sys, const UEConfig& cfg,
                             const GridSpec& spec, std::ostream& os) {
  sys.validate();
  cfg.validate();
  spec.validate();
  detail::check_word_budget(sys.size(), cfg.word_length);
  std::vector<BasePoint> base = build_grid(sys, spec);
  std::vector<Direction> dirs = direction_lattice(spec.rho);
  std::vector<double> cos2(dirs.size()), sin2(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    cos2[i] = std::cos(2 * dirs[i].theta());
    sin2[i] = std::sin(2 * dirs[i].theta());
  }
  const std::vector<double> weights = sys.weights();
  const bool shell = sys.kind == SurfaceKind::shell;

  if (shell) {
    os << "region,t1,t2,x,y,z,theta,F";
  } else {
    os << "t1,t2,theta,F";
  }
  for (std::size_t i = 1; i <= sys.size(); ++i) os << ",F_" << i;
  os << "\n";

  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };

  std::vector<ExpansionCoeffs> ks;
  std::vector<int> path;
  for (std::size_t ip = 0; ip < base.size(); ++ip) {
    const BasePoint& bp = base[ip];
    detail::point_coeffs(sys, bp.point, ks);
    for (std::size_t it = 0; it < dirs.size(); ++it) {
      double f = cfg.word_length == 1
                     ? detail::f_from_coeffs(ks, weights, cos2[it], sin2[it])
                     : detail::evaluate_rec(sys, bp.point, dirs[it], cfg.word_length, path);
      if (shell) {
        const TracePoint& p = as_shell(bp.point);
        os << bp.region << ',';
        put(bp.t1); os << ',';
        put(bp.t2); os << ',';
        put(p.x); os << ',';
        put(p.y); os << ',';
        put(p.z); os << ',';
      } else {
        put(bp.t1); os << ',';
        put(bp.t2); os << ',';
      }
      put(dirs[it].theta()); os << ',';
      put(f);
      for (std::size_t i = 0; i < ks.size(); ++i) {
        double g = squared_expansion(ks[i], cos2[it], sin2[it]);
        os << ',';
        put(0.5 * std::log(g));
      }
      os << "\n";
    }
  }
}

}  // namespace ue
