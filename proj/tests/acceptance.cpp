// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exits with the number of failed criteria. The CLI-facing criterion expects
// the uecheck binary path in the UECHECK_BIN environment variable.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "ue/criteria.hpp"
#include "ue/dynamics.hpp"
#include "ue/verifier.hpp"

using namespace ue;

namespace {

int g_failures = 0;

void criterion(int id, const std::string& name, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  std::string error;
  auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    error = e.what();
  }
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("criterion %2d [%s] %s (%.1fs)%s%s%s%s\n", id, ok ? "PASS" : "FAIL", name.c_str(),
              dt, detail.empty() ? "" : " -- ", detail.c_str(),
              error.empty() ? "" : " -- error: ", error.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

TracePoint random_shell_point(Rng& rng, double s) {
  for (;;) {
    double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    int region = 1 + static_cast<int>(rng.uniform() * 3);
    TracePoint out[2];
    int n = lift_chart(region, a, b, s, out);
    if (n == 0) continue;
    return out[rng.uniform() < 0.5 || n == 1 ? 0 : 1];
  }
}

int run_command(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

int main() {
  const int threads = default_thread_count();
  std::printf("acceptance suite, %d worker thread(s)\n", threads);

  criterion(1, "closed-form norm and contracting direction match brute force", [](std::string& d) {
    Rng rng(1001);
    double worst_dir = 0, worst_norm = 0;
    int tested = 0;
    while (tested < 10000) {
      Mat2 m = oracle::random_det1(rng, 100.0);
      if (norm(m) <= 1.001) continue;
      ++tested;
      auto ext = oracle::brute_extrema(m, 100000);
      worst_dir = std::max(worst_dir,
                           projective_distance(contracting_direction(m), Direction(ext.argmin_theta)));
      worst_norm = std::max(worst_norm, std::fabs(norm(m) - ext.max_norm) / ext.max_norm);
    }
    std::ostringstream os;
    os.precision(3);
    os << "max direction gap " << worst_dir << ", max relative norm gap " << worst_norm;
    d = os.str();
    return worst_dir < 1e-4 && worst_norm < 1e-6;
  });

  criterion(2, "expansion lower bound (2/pi) lambda d(theta, theta_F)", [](std::string& d) {
    Rng rng(1002);
    long violations = 0;
    long tested = 0;
    while (tested < 1000000) {
      Mat2 m = oracle::random_det1(rng, 100.0);
      if (norm(m) <= 1.0 + kDirTol) continue;
      ++tested;
      Direction t(rng.uniform(0, kPi));
      double lhs = std::exp(log_expansion(m, t));
      double rhs = distance_expansion_bound(norm(m),
                                            projective_distance(t, contracting_direction(m)));
      if (lhs < rhs - 1e-9) ++violations;
    }
    d = std::to_string(violations) + " violations in 1e6 samples";
    return violations == 0;
  });

  criterion(3, "angle drift bound m^2/tau^2 under the no-backtracking hypothesis",
            [](std::string& d) {
    Rng rng(1003);
    long violations = 0;
    int tested = 0;
    while (tested < 100000) {
      double m = rng.uniform(1.0 + 1e-6, 5.0);
      double tau = rng.uniform(std::sqrt(2.0) * m, 80.0);
      double lambda = rng.uniform(1.001, 80.0);
      double phi = std::acos(rng.uniform(1.0 / m, 1.0));
      if (rng.uniform() < 0.5) phi = kPi - phi;
      double theta2inv = rng.uniform(0, kPi);
      double theta1 = theta2inv - kPi / 2 + phi;
      Mat2 m2 = rotation(-theta2inv) * diagonal(tau) * rotation(rng.uniform(0, kPi));
      Mat2 m1 = rotation(rng.uniform(0, kPi)) * diagonal(lambda) * rotation(theta1 + kPi / 2);
      Mat2 prod = m1 * m2;
      if (norm(prod) <= 1.0 + kDirTol) continue;
      ++tested;
      double drift = projective_distance(contracting_direction(m2), contracting_direction(prod));
      if (drift > m * m / (tau * tau) + 1e-9) ++violations;
    }
    d = std::to_string(violations) + " violations in 1e5 hypothesis-satisfying pairs";
    return violations == 0;
  });

  criterion(4, "direction sensitivity formula vs finite differences (10%)", [](std::string& d) {
    double worst = 0;
    for (double l1 : {100.0, 1000.0}) {
      for (double l2 : {100.0, 1000.0}) {
        for (int k = 0; k < 50; ++k) {
          double phi = 0.1 + (kPi / 2 - 0.3) * k / 49.0;
          auto theta_of = [&](double u) {
            return contracting_direction(diagonal(l1) * rotation(u) * diagonal(l2)).theta();
          };
          double h = 1e-3;
          double up = theta_of(phi + h), down = theta_of(phi - h);
          double delta = up - down;
          if (delta > kPi / 2) delta -= kPi;
          if (delta < -kPi / 2) delta += kPi;
          double fd = std::fabs(delta / (2 * h));
          double formula = std::fabs(direction_sensitivity(l1, l2, phi));
          worst = std::max(worst, std::fabs(fd - formula) / formula);
        }
      }
    }
    std::ostringstream os;
    os.precision(3);
    os << "max relative gap " << worst;
    d = os.str();
    return worst < 0.10;
  });

  criterion(5, "shell structure: kappa invariance, det 1, inverse pairs", [](std::string& d) {
    Rng rng(1005);
    auto gens = generator_set_16();
    double worst_kappa = 0, worst_det = 0, worst_inv = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      TracePoint p = random_shell_point(rng, 1.99);
      int i = static_cast<int>(rng.uniform() * 16);
      const MapWord& w = gens[static_cast<std::size_t>(i)];
      Mat2 m = word_diff(p, w);
      worst_det = std::max(worst_det, std::fabs(m.det() - 1.0));
      TracePoint q = word_apply(w, p);
      worst_kappa = std::max(worst_kappa, std::fabs(kappa(q.x, q.y, q.z) - kappa(p.x, p.y, p.z)));
      TracePoint back = word_apply(gens[static_cast<std::size_t>(15 - i)], q);
      worst_inv = std::max({worst_inv, std::fabs(back.x - p.x), std::fabs(back.y - p.y),
                            std::fabs(back.z - p.z)});
    }
    std::ostringstream os;
    os.precision(3);
    os << "max |dkappa| " << worst_kappa << ", |det-1| " << worst_det << ", inverse gap "
       << worst_inv;
    d = os.str();
    return worst_kappa < 1e-9 && worst_det < 1e-9 && worst_inv < 1e-9;
  });

  criterion(6, "coarse shell sweep at s=1.99: grid minimum above 0.25", [&](std::string& d) {
    SystemDescriptor sys = cv_system(1.99);
    UEConfig cfg;
    cfg.threshold = 0.25;
    GridSpec spec{0.01, 0.01};
    DerivativeBounds bounds{600, 600, DerivativeBounds::Provenance::configured};
    UEReport rep = verify(sys, cfg, spec, bounds, threads);
    std::ostringstream os;
    os.precision(6);
    os << "verdict " << to_string(rep.verdict) << ", min " << rep.min_value << " over "
       << rep.grid_size << " pairs";
    d = os.str();
    // 0.01 * 600 = 6 > C/4: the pitch cannot certify, but the minimum clears C
    return rep.verdict == Verdict::step_size_invalid && rep.min_value > 0.25;
  });

  criterion(7, "estimated derivative bounds at s=1.99 stay below 600", [&](std::string& d) {
    SystemDescriptor sys = cv_system(1.99);
    DerivativeBounds est = estimate_derivative_bounds(sys, GridSpec{0.05, 0.05}, 1.0, threads);
    std::ostringstream os;
    os.precision(4);
    os << "C_M " << est.c_m << ", C_theta " << est.c_theta;
    d = os.str();
    return est.c_m <= 600.0 && est.c_theta <= 600.0 && est.c_m > 0 && est.c_theta > 0;
  });

  criterion(8, "standard-map Lyapunov estimate near log L", [&](std::string& d) {
    SystemDescriptor sys = std_system(1000, 0.035, 12);
    LyapunovEstimate est = estimate_top_lyapunov(sys, TorusPoint{1.0, 0.5}, Direction(0.3),
                                                 100000, 10, 2026, threads);
    double ratio = est.mean / std::log(1000.0);
    std::ostringstream os;
    os.precision(4);
    os << "mean " << est.mean << " (ratio " << ratio << ", stderr " << est.std_error << ")";
    d = os.str();
    return ratio >= 0.7 && ratio <= 1.1 && est.discarded == 0;
  });

  criterion(9, "standard-map three-step averages are positive", [](std::string& d) {
    SystemDescriptor sys = std_system(1000, 0.035, 12);
    Rng rng(1009);
    double sum = 0;
    int negative = 0;
    const int draws = 1000;
    for (int k = 0; k < draws; ++k) {
      TorusPoint p{rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi)};
      Direction t(rng.uniform(0, kPi));
      double f = evaluate_F(sys, p, t, 3);
      sum += f;
      if (f < 0) ++negative;
    }
    std::ostringstream os;
    os.precision(4);
    os << "sample mean " << sum / draws << ", negative fraction " << negative / double(draws)
       << " (reported, not asserted)";
    d = os.str();
    return sum / draws > 0;
  });

  criterion(10, "word-count bound Xi(25, 3, 0.5) exceeds 1", [](std::string& d) {
    double value = xi(25, 3, 0.5);
    // independent transcription of the displayed sum
    double check = 0;
    for (int i = 1; i <= 3; ++i) {
      check += 23.0 * std::pow(24.0, 3 - i) * (0.5 * (3 - i + 1) - i);
    }
    check -= (std::pow(25.0, 3) - std::pow(24.0, 3) + 1.0) * 3;
    std::ostringstream os;
    os.precision(10);
    os << "Xi = " << value << ", reference " << check;
    d = os.str();
    return value > 1.0 && std::fabs(value - check) < 1e-9;
  });

  criterion(11, "torus equidistribution of cos x and cos y over 1e6 steps", [](std::string& d) {
    SystemDescriptor sys = std_system(1000, 0.035, 12);
    Rng seed_rng(1011);
    TorusPoint start{seed_rng.uniform(0, kTwoPi), seed_rng.uniform(0, kTwoPi)};
    std::vector<Observable> obs = {
        {"cos_x", [](const SurfacePoint& p) { return std::cos(as_torus(p).x); }, 0.0},
        {"cos_y", [](const SurfacePoint& p) { return std::cos(as_torus(p).y); }, 0.0}};
    EquidistributionReport rep = birkhoff_equidistribution(sys, start, obs, 1000000, 2026);
    std::ostringstream os;
    os.precision(4);
    os << "|avg cos x| " << rep.observables[0].discrepancy << ", |avg cos y| "
       << rep.observables[1].discrepancy;
    d = os.str();
    return rep.observables[0].discrepancy < 0.05 && rep.observables[1].discrepancy < 0.05;
  });

  criterion(12, "fixed-seed runs are byte-reproducible; threads preserve the verdict",
            [](std::string& d) {
    const char* bin = std::getenv("UECHECK_BIN");
    if (!bin) {
      d = "UECHECK_BIN not set";
      return false;
    }
    std::string tmp = "acceptance_tmp";
    std::string mk = "mkdir -p " + tmp;
    if (run_command(mk) != 0) return false;
    std::string base = std::string("\"") + bin + "\"";
    struct Cmd {
      std::string name;
      std::string args;
      int expect_rc;
    };
    std::vector<Cmd> cmds = {
        {"verify", " verify --system cv --s 1.99 --C 0.25 --r 0.2 --rho 0.2 --cm 600 "
                   "--ctheta 600 --threads 1 --no-timing", 1},
        {"bounds", " bounds --system cv --s 1.99 --probe-r 0.2 --probe-rho 0.2 --safety 2 "
                   "--threads 1 --no-timing", 0},
        {"lyapunov", " lyapunov --system std --L 1000 --eps 0.035 --r-count 12 --steps 2000 "
                     "--samples 4 --seed 7 --threads 1 --no-timing", 0},
        {"equidist", " equidist --system std --L 1000 --eps 0.035 --r-count 12 --steps 20000 "
                     "--seed 7 --threads 1 --no-timing", 0},
        {"orbit", " orbit --system std --L 10 --eps 0 --r-count 0 --start 0,0 --max-points 50 "
                  "--tol 1e-8 --threads 1 --no-timing", 0},
        {"sweep", " sweep --system cv --param s --values 1.99 --C 0.25 --r 0.2 --rho 0.2 "
                  "--cm 600 --ctheta 600 --threads 1 --no-timing --out-dir " + tmp, 1},
    };
    for (const Cmd& c : cmds) {
      std::string out1 = tmp + "/" + c.name + "_1.json";
      std::string out2 = tmp + "/" + c.name + "_2.json";
      std::string extra1 = c.name == "sweep" ? "" : " --out " + out1;
      std::string extra2 = c.name == "sweep" ? "" : " --out " + out2;
      int rc1 = run_command(base + c.args + extra1 + " 2>/dev/null >/dev/null");
      if (c.name == "sweep") {
        if (run_command("cp " + tmp + "/sweep_s_1.99.json " + out1) != 0) return false;
      }
      int rc2 = run_command(base + c.args + extra2 + " 2>/dev/null >/dev/null");
      if (c.name == "sweep") {
        if (run_command("cp " + tmp + "/sweep_s_1.99.json " + out2) != 0) return false;
      }
      if (rc1 != c.expect_rc || rc2 != c.expect_rc) {
        d = c.name + ": exit codes " + std::to_string(rc1) + "/" + std::to_string(rc2) +
            " (expected " + std::to_string(c.expect_rc) + ")";
        return false;
      }
      std::string a = slurp(out1), b = slurp(out2);
      if (a.empty() || a != b) {
        d = c.name + ": outputs differ between identical runs";
        return false;
      }
    }

    // the sweep cell report equals the verify report
    if (slurp(tmp + "/verify_1.json") != slurp(tmp + "/sweep_s_1.99.json")) {
      d = "sweep cell differs from the verify report";
      return false;
    }

    // multi-thread verify: same verdict and minimum
    std::string out4 = tmp + "/verify_t4.json";
    std::string cmd4 = base +
        " verify --system cv --s 1.99 --C 0.25 --r 0.2 --rho 0.2 --cm 600 --ctheta 600 "
        "--threads 4 --no-timing --out " + out4 + " 2>/dev/null >/dev/null";
    if (run_command(cmd4) != 1) {
      d = "multi-thread verify exit code changed";
      return false;
    }
    nlohmann::json j1 = nlohmann::json::parse(slurp(tmp + "/verify_1.json"));
    nlohmann::json j4 = nlohmann::json::parse(slurp(out4));
    if (j1["verdict"] != j4["verdict"] ||
        j1["min_value"].get<double>() != j4["min_value"].get<double>()) {
      d = "multi-thread verify changed the verdict or the minimum";
      return false;
    }

    // malformed flag exits with the configuration error code
    if (run_command(base + " verify --system cv --no-such-flag 2>/dev/null >/dev/null") != 2) {
      d = "malformed flag did not exit with code 2";
      return false;
    }
    d = "6 commands byte-stable, thread count preserved the report";
    return true;
  });

  std::printf("%d of 12 criteria passed\n", 12 - g_failures);
  return g_failures;
}
