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

#ifndef NSC_HARNESS_EXPERIMENT_HPP_
#define NSC_HARNESS_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nsc/harness/config.hpp"
#include "nsc/harness/scenarios.hpp"
#include "nsc/lds/simulate.hpp"

namespace nsc {

// Plays K x_t + inner(x_t) on the true plant while the inner controller sees
// the pre-stabilized plant (A + BK, B, I) and its own control.
class StabilizedController final : public Controller {
 public:
  StabilizedController(Matrix K, std::unique_ptr<Controller> inner);

  Vector act(const Signals& signals) override;
  void feedback(const Feedback& outcome) override;
  std::unique_ptr<Controller> clone() const override;

  const Controller& inner() const { return *inner_; }

 private:
  Matrix K_;
  std::unique_ptr<Controller> inner_;
  Vector inner_control_;
};

// A preset (or custom system) with the config's overrides applied.
struct ResolvedScenario {
  Scenario scenario;
  CostFunction cost;
  std::function<Matrix(int)> gain;  // null when none is available
  Vector x0;
};

ResolvedScenario resolve_scenario(const ScenarioConfig& config);

// State-space perturbations w_t = D v_t for t < horizon, v drawn from the
// config's noise stream.
std::vector<Vector> perturbation_sequence(const ScenarioConfig& config,
                                          const Scenario& scenario);

// y_t of the plant driven by w alone from x0.
std::vector<Vector> natural_observations(const LinearSystem& system,
                                         const std::vector<Vector>& w,
                                         const Vector& x0);

struct RegretReport {
  std::string name;
  std::string source;
  std::string preset;
  std::string controller;
  std::string noise;
  std::string comparator;  // "dac", "drc", "linear" or "none"
  std::string comparator_method;
  bool comparator_converged = true;
  int comparator_iterations = 0;
  int horizon = 0;
  std::uint64_t seed = 0;

  // Row t (1-based) covers the step taken at time t - 1.
  std::vector<double> cost;
  std::vector<double> cum_cost;
  std::vector<double> comparator_cost;
  std::vector<double> cum_comparator_cost;
  std::vector<double> avg_regret;  // (cum_cost - cum_comparator_cost) / t
  std::vector<double> state_norm;  // |x| at the step

  double total_cost = 0.0;
  double comparator_total_cost = 0.0;
  double average_regret = 0.0;
  double empirical_gamma = 0.0;
  // Excluded from every artifact so reruns stay byte-identical.
  double wall_clock_seconds = 0.0;
  std::vector<std::string> warnings;
  std::vector<TelemetryRow> telemetry;  // online learners only
};

// Runs the configured controller alone.
Trajectory simulate_experiment(const ScenarioConfig& config);

// Runs the configured controller and comparator. Writes <name>.csv,
// <name>.json and, for GPC/GRC, <name>_telemetry.csv into out_dir when set.
RegretReport run_experiment(const ScenarioConfig& config);

std::string report_csv(const RegretReport& report);
std::string report_json(const RegretReport& report);
std::string telemetry_csv(const std::vector<TelemetryRow>& rows);
std::string trajectory_csv(const Trajectory& trajectory);
void write_report(const RegretReport& report, const std::string& dir);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws ConfigError for a missing column.
  std::vector<double> column(const std::string& name) const;
};
CsvTable parse_csv(const std::string& text);

// Per-step columns of a report reconstructed from its CSV.
RegretReport report_from_csv(const std::string& text);

struct BatchOutcome {
  std::optional<RegretReport> report;
  std::string error;
  int exit_code = 0;  // 0, 2 (config) or 3 (numerical)
};

// Runs independent experiments on up to `workers` threads. Outcomes are in
// config order regardless of scheduling.
std::vector<BatchOutcome> run_batch(const std::vector<ScenarioConfig>& configs,
                                    int workers);

}  // namespace nsc

#endif  // NSC_HARNESS_EXPERIMENT_HPP_
