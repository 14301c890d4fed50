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

#ifndef NSC_HARNESS_SCENARIOS_HPP_
#define NSC_HARNESS_SCENARIOS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nsc/lds/linearize.hpp"
#include "nsc/lds/system.hpp"
#include "nsc/matrix.hpp"

namespace nsc {

struct Anchor {
  Vector x;
  Vector u;
};

// A nonlinear plant together with the points it is linearized about. The
// linear model works in deviation coordinates around the active anchor.
struct NonlinearModel {
  DynamicsFunction dynamics;
  // Empty means the state is observed directly.
  std::function<Vector(const Vector& x)> observation;
  std::vector<Anchor> anchors;
  // Anchor k is active for t in [k * period, (k + 1) * period); the last one
  // stays active afterwards. Ignored with a single anchor.
  int anchor_period = 0;
};

struct Scenario {
  std::string name;
  std::string description;
  LinearSystem system;
  // Maps a sampled perturbation into the state: w_state = D w.
  Matrix disturbance;
  // Cost weights live on the observation when the system has a C.
  Matrix Q;
  Matrix R;
  Vector target;
  // Stabilizing state-feedback gain, when one is known.
  std::function<Matrix(int t)> gain;
  std::optional<NonlinearModel> nonlinear;

  int noise_dim() const { return static_cast<int>(disturbance.cols()); }
};

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double dt = 0.05;
};

struct VentilatorParams {
  double c0 = 5.0;
  double c1 = 2.0;
  double c2 = 3.0;
  double dt = 0.03;
  double volume = 1.0;  // anchor volume
};

struct SIRParams {
  double beta = 0.5;
  double gamma = 0.25;
  double alpha = 1.0;
};

DynamicsFunction pendulum_dynamics(const PendulumParams& p);
DynamicsFunction sir_dynamics(const SIRParams& p);
// Ventilator lung volume update; the state is the volume.
DynamicsFunction ventilator_dynamics(const VentilatorParams& p);
std::function<Vector(const Vector&)> ventilator_pressure(
    const VentilatorParams& p);

// LTV system whose matrices at t are the Jacobians at the active anchor.
LinearSystem linearize_along(const NonlinearModel& model);

Matrix b747_A();
Matrix b747_B();
// Wind-to-state map, 4 x 2.
Matrix b747_wind();
Matrix b747_output();

std::vector<std::string> preset_names();
// Throws ConfigError for an unknown name.
Scenario make_preset(const std::string& name);
std::vector<Scenario> scenario_presets();

}  // namespace nsc

#endif  // NSC_HARNESS_SCENARIOS_HPP_
