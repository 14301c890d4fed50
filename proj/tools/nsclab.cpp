// Copyright 2026 The nsclab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// nsclab: command-line front end for the experiment harness.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "nsc/error.hpp"
#include "nsc/filtering/kalman.hpp"
#include "nsc/filtering/predictor.hpp"
#include "nsc/filtering/spectral.hpp"
#include "nsc/harness/config.hpp"
#include "nsc/harness/experiment.hpp"
#include "nsc/harness/scenarios.hpp"
#include "nsc/io.hpp"
#include "nsc/sysid/sysid.hpp"

using namespace nsc;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::vector<std::string> configs;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int horizon = 0;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool many_configs = false) {
  auto* config = cmd->add_option("--config", f.configs,
                                 many_configs ? "experiment config files"
                                              : "experiment config file");
  if (!many_configs) config->expected(1);
  cmd->add_option("--preset", f.preset, "scenario preset (overrides config)");
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&f](std::uint64_t s) {
        f.seed = s;
        f.seed_set = true;
      },
      "master seed");
  cmd->add_option("--horizon", f.horizon, "number of steps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output directory");
}

ScenarioConfig configure(const CommonFlags& f, const std::string& path) {
  ScenarioConfig c = path.empty() ? ScenarioConfig{} : load_config(path);
  if (!f.preset.empty()) c.preset = f.preset;
  if (path.empty()) c.name = c.preset;
  if (f.seed_set) c.seed = f.seed;
  if (f.horizon > 0) c.horizon = f.horizon;
  if (!f.out.empty()) c.out_dir = f.out;
  return c;
}

std::vector<ScenarioConfig> configure_all(const CommonFlags& f) {
  if (f.configs.empty()) return {configure(f, "")};
  std::vector<ScenarioConfig> out;
  for (const auto& path : f.configs) out.push_back(configure(f, path));
  return out;
}

void print_report(const RegretReport& r) {
  std::printf("%s: controller %s, comparator %s (%s), T = %d, seed %llu\n",
              r.name.c_str(), r.controller.c_str(), r.comparator.c_str(),
              r.comparator_method.c_str(), r.horizon,
              static_cast<unsigned long long>(r.seed));
  std::printf("  total cost %s, comparator %s, average regret %s\n",
              format_double(r.total_cost).c_str(),
              format_double(r.comparator_total_cost).c_str(),
              format_double(r.average_regret).c_str());
  std::printf("  empirical gamma %s, wall clock %.3f s\n",
              format_double(r.empirical_gamma).c_str(), r.wall_clock_seconds);
  for (const auto& w : r.warnings) std::printf("  warning: %s\n", w.c_str());
}

int cmd_scenarios() {
  for (const auto& s : scenario_presets()) {
    std::printf("%-18s x %d, u %d, y %d, w %d%s%s\n    %s\n", s.name.c_str(),
                s.system.state_dim(), s.system.control_dim(),
                s.system.observation_dim(), s.noise_dim(),
                s.system.time_invariant() ? "" : ", time-varying",
                s.gain ? ", stabilizing gain" : "", s.description.c_str());
  }
  return 0;
}

int cmd_simulate(const CommonFlags& f) {
  const ScenarioConfig c = configure(f, f.configs.empty() ? "" : f.configs[0]);
  const Trajectory traj = simulate_experiment(c);
  std::printf("%s: T = %d, total cost %s, empirical gamma %s\n",
              c.name.c_str(), traj.horizon(),
              format_double(traj.total_cost()).c_str(),
              format_double(traj.empirical_gamma).c_str());
  if (!c.out_dir.empty()) {
    const auto path = (fs::path(c.out_dir) / (c.name + "_trajectory.csv")).string();
    write_file_atomic(path, trajectory_csv(traj));
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_regret(const CommonFlags& f, int jobs) {
  const auto configs = configure_all(f);
  const auto outcomes = run_batch(configs, jobs);
  int code = 0;
  for (const auto& o : outcomes) {
    if (o.report) {
      print_report(*o.report);
    } else {
      std::fprintf(stderr, "error: %s\n", o.error.c_str());
      code = std::max(code, o.exit_code);
    }
  }
  return code;
}

int cmd_sysid(const CommonFlags& f, int k, int T0, bool control) {
  ScenarioConfig c = configure(f, f.configs.empty() ? "" : f.configs[0]);
  const ResolvedScenario r = resolve_scenario(c);
  const LinearSystem& sys = r.scenario.system;
  if (!sys.fully_observed() || !sys.time_invariant()) {
    throw ConfigError(c.name + ": sysid needs a fully observed time-invariant system");
  }
  const int T = c.horizon;
  if (T0 <= 0) T0 = static_cast<int>(std::ceil(std::pow(T, 2.0 / 3.0)));
  ScenarioConfig noise = c;
  noise.horizon = std::max(T, T0 * (k + 1) + 2);
  SimulatedBlackBox plant(
      sys, PerturbationSource::recorded(perturbation_sequence(noise, r.scenario)),
      component_seed(c.seed, "plant"), r.x0);
  if (!control) {
    const auto record =
        excite_and_record(plant, k, T0, component_seed(c.seed, "excitation"));
    const auto moments = estimate_moments(record);
    const auto id = recover_AB(moments);
    const Matrix A = sys.A(), B = sys.B();
    std::cout << sysid_summary(moments, id, &A, &B);
    for (const auto& w : id.warnings) std::printf("warning: %s\n", w.c_str());
    return 0;
  }
  IdentifyThenControlConfig cfg;
  cfg.k = k;
  cfg.T0 = T0;
  cfg.gpc = c.online;
  cfg.excitation_seed = component_seed(c.seed, "excitation");
  if (r.gain) cfg.K = r.gain(0);
  const auto rep = identify_then_control(plant, T, r.cost, cfg, c.comparator_options);
  std::printf("T %d\nexploration_steps %d\nexploration_cost %s\n"
              "exploitation_cost %s\ntotal_cost %s\ncomparator_cost %s\n"
              "average_regret %s\nsigma_min %s\n",
              rep.T, rep.exploration_steps,
              format_double(rep.exploration_cost).c_str(),
              format_double(rep.exploitation_cost).c_str(),
              format_double(rep.total_cost).c_str(),
              format_double(rep.comparator.total_cost).c_str(),
              format_double(rep.average_regret).c_str(),
              format_double(rep.identified.sigma_min).c_str());
  return 0;
}

int cmd_filter(const CommonFlags& f, double obs_noise, int h) {
  ScenarioConfig c = configure(f, f.configs.empty() ? "" : f.configs[0]);
  if (c.noise.shape != NoiseShape::kGaussian) {
    throw ConfigError(c.name + ": the Kalman filter needs Gaussian noise");
  }
  const ResolvedScenario r = resolve_scenario(c);
  const LinearSystem& sys = r.scenario.system;
  if (!sys.time_invariant()) {
    throw ConfigError(c.name + ": filter needs a time-invariant system");
  }
  const Matrix A = sys.A(), B = sys.B(), C = sys.C();
  const Matrix& D = r.scenario.disturbance;
  const Matrix Sx = c.noise.scale * c.noise.scale * D * D.transpose();
  const int dy = static_cast<int>(C.rows());
  const Matrix Sy = obs_noise * obs_noise * Matrix::Identity(dy, dy);
  const auto steady = kalman_steady_state(A, C, Sx, Sy);

  // Uncontrolled run with observation noise, predicted one step ahead.
  const auto w = perturbation_sequence(c, r.scenario);
  Rng rng(component_seed(c.seed, "observation"));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector x = r.x0;
  const Vector u = Vector::Zero(sys.control_dim());
  KalmanState state = kalman_init(Sx);
  std::vector<Vector> ys, us;
  double kalman_sq = 0.0;
  std::ostringstream csv;
  csv << "t,kalman_error\n";
  for (int t = 0; t < c.horizon; ++t) {
    Vector y = C * x;
    for (int i = 0; i < dy; ++i) y(i) += obs_noise * normal(rng);
    const double err = (y - C * state.x_hat).squaredNorm();
    kalman_sq += err;
    csv << t << ',' << format_double(err) << '\n';
    state = kalman_step(state, A, B, C, Sx, Sy, u, y);
    ys.push_back(y);
    us.push_back(u);
    x = A * x + w[t];
  }
  const LinearFit fit = fit_linear_predictor(ys, us, h, h);
  std::printf("steady-state Sigma:\n%s", matrix_to_string(steady.Sigma).c_str());
  std::printf("steady-state L:\n%s", matrix_to_string(steady.L).c_str());
  std::printf("iterations %d\n", steady.iterations);
  std::printf("kalman_mse %s\n", format_double(kalman_sq / c.horizon).c_str());
  std::printf("offline_linear_mse(h=k=%d) %s\n", h, format_double(fit.mse).c_str());
  if (!c.out_dir.empty()) {
    const auto path = (fs::path(c.out_dir) / (c.name + "_kalman.csv")).string();
    write_file_atomic(path, csv.str());
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_spectral(const CommonFlags& f, int filters) {
  const int T = f.horizon > 0 ? f.horizon : 100;
  const SpectralBasis basis = f.out.empty()
                                  ? spectral_basis(T, filters)
                                  : cached_spectral_basis(T, filters, f.out);
  std::printf("T %d, h %d\n", basis.T, basis.h);
  for (int j = 0; j < basis.h; ++j) {
    std::printf("sigma_%d %s\n", j + 1, format_double(basis.sigma(j)).c_str());
  }
  if (!f.out.empty()) {
    std::printf("basis cached in %s\n", f.out.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nsclab: nonstochastic control experiments"};
  app.require_subcommand(1);

  CommonFlags sim_flags, regret_flags, sysid_flags, filter_flags, spectral_flags;
  auto* sim = app.add_subcommand("simulate", "run a controller and write its trajectory");
  add_common(sim, sim_flags);

  auto* regret = app.add_subcommand("regret", "run experiments against their comparators");
  add_common(regret, regret_flags, true);
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  regret->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);

  auto* sysid = app.add_subcommand("sysid", "method-of-moments identification");
  add_common(sysid, sysid_flags);
  int k = 1, T0 = 0;
  bool control = false;
  sysid->add_option("--k", k, "number of moments beyond G_0")->check(CLI::PositiveNumber);
  sysid->add_option("--T0", T0, "samples per moment (default ceil(T^(2/3)))");
  sysid->add_flag("--control", control, "identify, then run GPC on the estimate");

  auto* filter = app.add_subcommand("filter", "Kalman filter against the best offline linear predictor");
  add_common(filter, filter_flags);
  double obs_noise = 0.1;
  int lags = 10;
  filter->add_option("--obs-noise", obs_noise, "observation noise std")->check(CLI::NonNegativeNumber);
  filter->add_option("--lags", lags, "h = k for the linear predictor")->check(CLI::PositiveNumber);

  auto* spectral = app.add_subcommand("spectral", "spectral filters of the Hankel matrix Z_T");
  add_common(spectral, spectral_flags);
  int filters = 20;
  spectral->add_option("--filters", filters, "number of filters h")->check(CLI::PositiveNumber);

  app.add_subcommand("scenarios", "list scenario presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags);
    if (*regret) return cmd_regret(regret_flags, jobs);
    if (*sysid) return cmd_sysid(sysid_flags, k, T0, control);
    if (*filter) return cmd_filter(filter_flags, obs_noise, lags);
    if (*spectral) return cmd_spectral(spectral_flags, filters);
    return cmd_scenarios();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  }
}
