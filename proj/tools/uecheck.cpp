// Copyright (c) 2026 uecheck developers
// SPDX-License-Identifier: Apache-2.0
//
// uecheck: batch front-end for the uniform-expansion toolkit.
// Commands: verify | bounds | lyapunov | equidist | orbit | sweep.
// Exit codes: 0 success (verify: certified), 1 verify not certified,
// 2 configuration or runtime error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ue/criteria.hpp"
#include "ue/dynamics.hpp"
#include "ue/report_json.hpp"
#include "ue/verifier.hpp"

namespace {

struct SystemOpts {
  std::string system;  // "cv" or "std"
  double s = 1.99;
  double coupling = 1000.0;
  double epsilon = 0.035;
  int r_count = 12;
};

struct OutputOpts {
  std::string out_path;
  bool no_timing = false;
  int threads = 0;
};

void add_system_options(CLI::App* cmd, SystemOpts& sys) {
  cmd->add_option("--system", sys.system, "system to run: cv (character variety) or std (standard map)")
      ->required()
      ->check(CLI::IsMember({"cv", "std"}));
  cmd->add_option("--s", sys.s, "shell parameter for --system cv")->capture_default_str();
  cmd->add_option("--L", sys.coupling, "coupling for --system std")->capture_default_str();
  cmd->add_option("--eps", sys.epsilon, "offset spacing for --system std")->capture_default_str();
  cmd->add_option("--r-count", sys.r_count, "offset count r for --system std (2r+1 maps)")->capture_default_str();
}

void add_output_options(CLI::App* cmd, OutputOpts& out) {
  cmd->add_option("--out", out.out_path, "write the JSON report here instead of stdout");
  cmd->add_flag("--no-timing", out.no_timing,
                "report elapsed_seconds as 0 for byte-reproducible output");
  cmd->add_option("--threads", out.threads, "worker threads (default: UE_THREADS or hardware)")
      ->envname("UE_THREADS");
}

// Flat key=value configuration. The file is expanded into --key=value tokens
// inserted ahead of the command-line flags, and every option takes the last
// occurrence, so explicit flags override the file. Unknown keys surface as
// unknown flags and are rejected.
void configure(CLI::App* cmd, std::string& config_path) {
  cmd->add_option("--config", config_path,
                  "flat key=value configuration file; flags take precedence");
  for (CLI::Option* opt : cmd->get_options()) {
    opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  }
}

std::vector<std::string> expand_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  if (args.size() < 2) return args;
  std::string path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw ue::Error("cannot open config file: " + path);
  auto trim = [](std::string s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<std::string> out{args[0], args[1]};
  std::string line;
  while (std::getline(f, line)) {
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ue::PreconditionError("config line is not key=value: " + line);
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ue::PreconditionError("config line has an empty key: " + line);
    out.push_back("--" + key + "=" + value);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

ue::SystemDescriptor build_system(const SystemOpts& o) {
  if (o.system == "cv") return ue::cv_system(o.s);
  return ue::std_system(o.coupling, o.epsilon, o.r_count);
}

int resolve_threads(const OutputOpts& o) {
  return o.threads >= 1 ? o.threads : ue::default_thread_count();
}

void emit_json(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw ue::Error("cannot open output file: " + path);
  f << j.dump(2) << "\n";
}

void print_warnings(const ue::SystemDescriptor& sys) {
  for (const auto& w : sys.warnings) std::cerr << "warning: " << w << "\n";
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw ue::PreconditionError("cannot parse number: " + tok);
    out.push_back(v);
  }
  return out;
}

// A few Newton iterations pulling a near-shell start point exactly onto the
// shell, so hand-typed coordinates are accepted.
ue::TracePoint project_to_shell(double x, double y, double z, double s) {
  double drift = ue::kappa(x, y, z) - s;
  if (std::fabs(drift) > 1e-6) {
    throw ue::PreconditionError("start point is not on the shell: |kappa - s| = " +
                                std::to_string(std::fabs(drift)));
  }
  for (int it = 0; it < 8 && std::fabs(drift) > 1e-13; ++it) {
    ue::Vec3 n = ue::normal_at(x, y, z);
    double nn = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (!(nn > 0)) break;
    double step = drift / nn;
    x -= step * n[0];
    y -= step * n[1];
    z -= step * n[2];
    drift = ue::kappa(x, y, z) - s;
  }
  return ue::make_trace_point(x, y, z, s);
}

ue::SurfacePoint parse_start(const std::string& text, const SystemOpts& o) {
  if (o.system == "cv") {
    if (text.empty()) {
      ue::TracePoint lifted[2];
      int n = ue::lift_chart(3, 0.1, 0.2, o.s, lifted);
      if (n == 0) throw ue::Error("no default start point on this shell");
      return lifted[n - 1];
    }
    std::vector<double> v = parse_doubles(text);
    if (v.size() != 3) throw ue::PreconditionError("--start for cv needs x,y,z");
    return project_to_shell(v[0], v[1], v[2], o.s);
  }
  if (text.empty()) return ue::TorusPoint{1.0, 0.5};
  std::vector<double> v = parse_doubles(text);
  if (v.size() != 2) throw ue::PreconditionError("--start for std needs x,y");
  return ue::make_torus_point(v[0], v[1]);
}

struct VerifyOpts {
  double threshold = 0.25;
  double r = 0;
  double rho = 0;
  int word_length = 1;
  double budget = 1e-6;
  std::optional<double> cm;
  std::optional<double> ctheta;
  bool estimate = false;
  double probe_r = 0.05;
  double probe_rho = 0.05;
  double safety = 2.0;
  std::string csv_path;
  std::string checkpoint;
};

void add_verify_options(CLI::App* cmd, VerifyOpts& v) {
  cmd->add_option("--C", v.threshold, "expansion threshold C")->capture_default_str();
  cmd->add_option("--r", v.r, "surface grid pitch")->required();
  cmd->add_option("--rho", v.rho, "direction grid pitch")->required();
  cmd->add_option("--N", v.word_length, "word length of the averaged step")->capture_default_str();
  cmd->add_option("--budget", v.budget, "evaluation-error budget subtracted from the margin")->capture_default_str();
  cmd->add_option("--cm", [&v](const std::vector<std::string>& a) {
        v.cm = std::stod(a[0]);
        return true;
      }, "configured derivative bound C_M");
  cmd->add_option("--ctheta", [&v](const std::vector<std::string>& a) {
        v.ctheta = std::stod(a[0]);
        return true;
      }, "configured derivative bound C_theta");
  cmd->add_flag("--estimate-bounds", v.estimate, "estimate C_M, C_theta from a probe grid");
  cmd->add_option("--probe-r", v.probe_r, "probe grid pitch for bound estimation")->capture_default_str();
  cmd->add_option("--probe-rho", v.probe_rho, "probe direction pitch for bound estimation")->capture_default_str();
  cmd->add_option("--safety", v.safety, "safety factor applied to estimated bounds")->capture_default_str();
  cmd->add_option("--csv", v.csv_path, "dump the full sweep as CSV");
  cmd->add_option("--checkpoint", v.checkpoint, "resumable per-partition checkpoint file");
}

ue::DerivativeBounds resolve_bounds(const ue::SystemDescriptor& sys, const VerifyOpts& v,
                                    int threads) {
  if (v.estimate) {
    return ue::estimate_derivative_bounds(sys, ue::GridSpec{v.probe_r, v.probe_rho}, v.safety,
                                          threads);
  }
  if (!v.cm || !v.ctheta) {
    throw ue::PreconditionError("provide --cm and --ctheta, or pass --estimate-bounds");
  }
  return {*v.cm, *v.ctheta, ue::DerivativeBounds::Provenance::configured};
}

int run_verify_once(const ue::SystemDescriptor& sys, const VerifyOpts& v, const OutputOpts& out,
                    const std::string& out_path, const std::string& checkpoint) {
  int threads = resolve_threads(out);
  ue::DerivativeBounds bounds = resolve_bounds(sys, v, threads);
  ue::UEConfig cfg;
  cfg.threshold = v.threshold;
  cfg.word_length = v.word_length;
  cfg.safety_factor = v.safety;
  cfg.eval_error_budget = v.budget;
  ue::UEReport report = ue::verify(sys, cfg, ue::GridSpec{v.r, v.rho}, bounds, threads, checkpoint);
  if (out.no_timing) report.elapsed_seconds = 0;
  emit_json(ue::to_json(report), out_path);
  if (!v.csv_path.empty()) {
    std::ofstream f(v.csv_path, std::ios::trunc);
    if (!f) throw ue::Error("cannot open CSV file: " + v.csv_path);
    ue::sweep_report_csv(sys, cfg, ue::GridSpec{v.r, v.rho}, f);
  }
  return report.verdict == ue::Verdict::certified ? 0 : 1;
}

std::vector<ue::Observable> default_observables(const SystemOpts& o, double ref_pitch) {
  std::vector<ue::Observable> obs;
  if (o.system == "std") {
    obs.push_back({"const_1", [](const ue::SurfacePoint&) { return 1.0; }, 1.0});
    obs.push_back({"cos_x", [](const ue::SurfacePoint& p) { return std::cos(ue::as_torus(p).x); }, 0.0});
    obs.push_back({"cos_y", [](const ue::SurfacePoint& p) { return std::cos(ue::as_torus(p).y); }, 0.0});
    obs.push_back({"sin_x", [](const ue::SurfacePoint& p) { return std::sin(ue::as_torus(p).x); }, 0.0});
    obs.push_back({"sin_y", [](const ue::SurfacePoint& p) { return std::sin(ue::as_torus(p).y); }, 0.0});
    return obs;
  }
  obs.push_back({"const_1", [](const ue::SurfacePoint&) { return 1.0; }, 1.0});
  obs.push_back({"kappa", [](const ue::SurfacePoint& p) {
                   const ue::TracePoint& q = ue::as_shell(p);
                   return ue::kappa(q.x, q.y, q.z);
                 }, o.s});
  const char* names[3] = {"x", "y", "z"};
  for (int k = 0; k < 3; ++k) {
    auto fn = [k](const ue::SurfacePoint& p) {
      const ue::TracePoint& q = ue::as_shell(p);
      return k == 0 ? q.x : (k == 1 ? q.y : q.z);
    };
    double ref = ue::shell_reference_integral(
        [k](const ue::TracePoint& q) { return k == 0 ? q.x : (k == 1 ? q.y : q.z); }, o.s,
        ref_pitch);
    obs.push_back({names[k], fn, ref});
  }
  return obs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uniform-expansion verification and random-dynamics toolkit"};
  app.require_subcommand(1);

  SystemOpts sys_verify, sys_bounds, sys_lyap, sys_equi, sys_orbit, sys_sweep;
  OutputOpts out_verify, out_bounds, out_lyap, out_equi, out_orbit, out_sweep;
  VerifyOpts vopt, sweep_vopt;
  std::string cfg_verify, cfg_bounds, cfg_lyap, cfg_equi, cfg_orbit, cfg_sweep;

  // verify
  CLI::App* cmd_verify = app.add_subcommand("verify", "grid verification of uniform expansion");
  add_system_options(cmd_verify, sys_verify);
  add_output_options(cmd_verify, out_verify);
  add_verify_options(cmd_verify, vopt);
  configure(cmd_verify, cfg_verify);

  // bounds
  CLI::App* cmd_bounds = app.add_subcommand("bounds", "estimate the derivative bounds C_M, C_theta");
  double b_probe_r = 0.05, b_probe_rho = 0.05, b_safety = 2.0;
  add_system_options(cmd_bounds, sys_bounds);
  add_output_options(cmd_bounds, out_bounds);
  cmd_bounds->add_option("--probe-r", b_probe_r, "probe grid pitch")->capture_default_str();
  cmd_bounds->add_option("--probe-rho", b_probe_rho, "probe direction pitch")->capture_default_str();
  cmd_bounds->add_option("--safety", b_safety, "safety factor on the sampled maxima")->capture_default_str();
  configure(cmd_bounds, cfg_bounds);

  // lyapunov
  CLI::App* cmd_lyap = app.add_subcommand("lyapunov", "Monte-Carlo top Lyapunov exponent");
  int l_steps = 100000, l_samples = 10;
  std::uint64_t l_seed = 1;
  double l_dir = 0;
  std::string l_start;
  add_system_options(cmd_lyap, sys_lyap);
  add_output_options(cmd_lyap, out_lyap);
  cmd_lyap->add_option("--steps", l_steps, "steps per sample")->capture_default_str();
  cmd_lyap->add_option("--samples", l_samples, "independent samples")->capture_default_str();
  cmd_lyap->add_option("--seed", l_seed, "random seed")->capture_default_str();
  cmd_lyap->add_option("--start", l_start, "start point: x,y (std) or x,y,z (cv)");
  cmd_lyap->add_option("--dir", l_dir, "start direction in [0, pi)")->capture_default_str();
  configure(cmd_lyap, cfg_lyap);

  // equidist
  CLI::App* cmd_equi = app.add_subcommand("equidist", "Birkhoff-average equidistribution check");
  int e_steps = 1000000;
  std::uint64_t e_seed = 1;
  double e_ref_pitch = 0.01;
  std::string e_start, e_traj;
  add_system_options(cmd_equi, sys_equi);
  add_output_options(cmd_equi, out_equi);
  cmd_equi->add_option("--steps", e_steps, "trajectory length")->capture_default_str();
  cmd_equi->add_option("--seed", e_seed, "random seed")->capture_default_str();
  cmd_equi->add_option("--start", e_start, "start point: x,y (std) or x,y,z (cv)");
  cmd_equi->add_option("--traj-csv", e_traj, "dump the trajectory as CSV");
  cmd_equi->add_option("--ref-pitch", e_ref_pitch,
                       "quadrature pitch for shell reference integrals")->capture_default_str();
  configure(cmd_equi, cfg_equi);

  // orbit
  CLI::App* cmd_orbit = app.add_subcommand("orbit", "finite-orbit detection by closure");
  int o_max = 10000;
  double o_tol = 1e-8;
  std::string o_start;
  add_system_options(cmd_orbit, sys_orbit);
  add_output_options(cmd_orbit, out_orbit);
  cmd_orbit->add_option("--start", o_start, "start point: x,y (std) or x,y,z (cv)");
  cmd_orbit->add_option("--max-points", o_max, "give up beyond this closure size")->capture_default_str();
  cmd_orbit->add_option("--tol", o_tol, "point identification tolerance")->capture_default_str();
  configure(cmd_orbit, cfg_orbit);

  // sweep
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "verify over a list of parameter values");
  std::string s_param = "s", s_values, s_outdir = ".";
  add_system_options(cmd_sweep, sys_sweep);
  add_output_options(cmd_sweep, out_sweep);
  add_verify_options(cmd_sweep, sweep_vopt);
  cmd_sweep->add_option("--param", s_param, "swept parameter: s (cv) or L (std)")->capture_default_str()
      ->check(CLI::IsMember({"s", "L"}));
  cmd_sweep->add_option("--values", s_values, "comma-separated parameter values")->required();
  cmd_sweep->add_option("--out-dir", s_outdir, "directory receiving one report per value")->capture_default_str();
  configure(cmd_sweep, cfg_sweep);

  try {
    std::vector<std::string> args = expand_config_args(argc, argv);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cmd_verify->parsed()) {
      ue::SystemDescriptor sys = build_system(sys_verify);
      print_warnings(sys);
      return run_verify_once(sys, vopt, out_verify, out_verify.out_path, vopt.checkpoint);
    }

    if (cmd_bounds->parsed()) {
      ue::SystemDescriptor sys = build_system(sys_bounds);
      print_warnings(sys);
      ue::DerivativeBounds b = ue::estimate_derivative_bounds(
          sys, ue::GridSpec{b_probe_r, b_probe_rho}, b_safety, resolve_threads(out_bounds));
      emit_json(ue::to_json(b, b_safety), out_bounds.out_path);
      return 0;
    }

    if (cmd_lyap->parsed()) {
      ue::SystemDescriptor sys = build_system(sys_lyap);
      print_warnings(sys);
      ue::SurfacePoint start = parse_start(l_start, sys_lyap);
      ue::LyapunovEstimate est = ue::estimate_top_lyapunov(
          sys, start, ue::Direction(l_dir), l_steps, l_samples, l_seed, resolve_threads(out_lyap));
      emit_json(ue::to_json(est), out_lyap.out_path);
      return 0;
    }

    if (cmd_equi->parsed()) {
      ue::SystemDescriptor sys = build_system(sys_equi);
      print_warnings(sys);
      ue::SurfacePoint start = parse_start(e_start, sys_equi);
      std::vector<ue::Observable> obs = default_observables(sys_equi, e_ref_pitch);
      std::ofstream traj;
      std::ostream* traj_os = nullptr;
      if (!e_traj.empty()) {
        traj.open(e_traj, std::ios::trunc);
        if (!traj) throw ue::Error("cannot open trajectory file: " + e_traj);
        traj_os = &traj;
      }
      ue::EquidistributionReport rep =
          ue::birkhoff_equidistribution(sys, start, obs, e_steps, e_seed, traj_os);
      emit_json(ue::to_json(rep), out_equi.out_path);
      return 0;
    }

    if (cmd_orbit->parsed()) {
      ue::SystemDescriptor sys = build_system(sys_orbit);
      print_warnings(sys);
      ue::SurfacePoint start = parse_start(o_start, sys_orbit);
      std::optional<int> size = ue::detect_finite_orbit(sys, start, o_max, o_tol);
      nlohmann::json j = {{"finite", size.has_value()},
                          {"size", size ? nlohmann::json(*size) : nlohmann::json()},
                          {"max_points", o_max},
                          {"match_tol", o_tol}};
      emit_json(j, out_orbit.out_path);
      return 0;
    }

    if (cmd_sweep->parsed()) {
      std::vector<double> values = parse_doubles(s_values);
      if (values.empty()) throw ue::PreconditionError("sweep: empty value list");
      if (s_param == "s" && sys_sweep.system != "cv") {
        throw ue::PreconditionError("sweep over s requires --system cv");
      }
      if (s_param == "L" && sys_sweep.system != "std") {
        throw ue::PreconditionError("sweep over L requires --system std");
      }
      int rc = 0;
      for (double v : values) {
        SystemOpts cell = sys_sweep;
        if (s_param == "s") cell.s = v;
        else cell.coupling = v;
        ue::SystemDescriptor sys = build_system(cell);
        print_warnings(sys);
        std::ostringstream name;
        name << s_outdir << "/sweep_" << s_param << "_" << v << ".json";
        std::string ckpt = sweep_vopt.checkpoint.empty()
                               ? std::string()
                               : sweep_vopt.checkpoint + "." + s_param + "_" + std::to_string(v);
        int cell_rc = run_verify_once(sys, sweep_vopt, out_sweep, name.str(), ckpt);
        rc = std::max(rc, cell_rc);
      }
      return rc;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
