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

#include "nsc/harness/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "nsc/error.hpp"
#include "nsc/optimal/lqr.hpp"

namespace nsc {
namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

std::function<Matrix(int)> fixed_gain(Matrix K) {
  return [K = std::move(K)](int) { return K; };
}

// LQR gain for each anchor of an LTV model, switching on the same schedule.
std::function<Matrix(int)> anchored_gains(const NonlinearModel& model,
                                          const Matrix& Q, const Matrix& R) {
  std::vector<Matrix> gains;
  for (const Anchor& a : model.anchors) {
    const Jacobians J = linearize(model.dynamics, a.x, a.u);
    gains.push_back(dare_solve(J.A, J.B, Q, R).K);
  }
  const int period = std::max(model.anchor_period, 1);
  return [gains, period](int t) {
    const size_t k = std::min(gains.size() - 1, static_cast<size_t>(t / period));
    return gains[k];
  };
}

Scenario scalar_preset() {
  Scenario s{"scalar-0.9",
             "x' = 0.9 x + u + w; open-loop stable, zero gain",
             LinearSystem(scalar(0.9), scalar(1.0)),
             scalar(1.0),
             scalar(1.0),
             scalar(1.0),
             Vector::Zero(1),
             fixed_gain(scalar(0.0)),
             std::nullopt};
  return s;
}

Scenario double_integrator_preset() {
  const double dt = 0.1;
  Matrix A{{1.0, dt}, {0.0, 1.0}};
  Matrix B{{0.0}, {1.0}};
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix R = scalar(1.0);
  Matrix K = dare_solve(A, B, Q, R).K;
  return {"double-integrator",
          "point mass, position and velocity, dt = 0.1; LQR gain",
          LinearSystem(std::move(A), std::move(B)),
          Matrix::Identity(2, 2),
          Q,
          R,
          Vector::Zero(2),
          fixed_gain(std::move(K)),
          std::nullopt};
}

Scenario b747_preset() {
  const Matrix H = b747_output();
  const Matrix Q = H.transpose() * H;
  Matrix R = Matrix::Zero(2, 2);
  R(1, 1) = 1.0;
  Matrix K = dare_solve(b747_A(), b747_B(), Q, R).K;
  return {"b747",
          "Boeing 747 longitudinal dynamics with body-axis wind; LQR gain",
          LinearSystem(b747_A(), b747_B()),
          b747_wind(),
          Q,
          R,
          Vector::Zero(4),
          fixed_gain(std::move(K)),
          std::nullopt};
}

Scenario pendulum_preset() {
  const PendulumParams p;
  NonlinearModel model;
  model.dynamics = pendulum_dynamics(p);
  // A swing-up path from hanging down to upright, holding each angle with
  // the torque that balances gravity there.
  const int anchors = 5;
  for (int k = 0; k < anchors; ++k) {
    const double theta = M_PI * k / (anchors - 1);
    const double torque = p.mass * p.gravity * std::sin(theta);
    model.anchors.push_back({Vector{{theta, 0.0}}, Vector{{torque}}});
  }
  model.anchor_period = 100;
  const Matrix Q = Matrix::Identity(2, 2);
  const Matrix R = scalar(1.0);
  auto gain = anchored_gains(model, Q, R);
  return {"pendulum",
          "pendulum linearized along a swing-up path, 100 steps per anchor",
          linearize_along(model),
          Matrix::Identity(2, 2),
          Q,
          R,
          Vector::Zero(2),
          std::move(gain),
          std::move(model)};
}

Scenario ventilator_preset() {
  const VentilatorParams p;
  NonlinearModel model;
  model.dynamics = ventilator_dynamics(p);
  model.observation = ventilator_pressure(p);
  model.anchors.push_back({Vector::Constant(1, p.volume), Vector::Zero(1)});
  return {"ventilator",
          "lung volume observed through airway pressure, linearized at v = 1",
          linearize_along(model),
          scalar(1.0),
          scalar(1.0),
          scalar(1.0),
          Vector::Zero(1),
          nullptr,
          std::move(model)};
}

Scenario sir_preset() {
  const SIRParams p;
  NonlinearModel model;
  model.dynamics = sir_dynamics(p);
  model.anchors.push_back({Vector{{1.0, 0.0, 0.0}}, Vector::Zero(1)});
  Matrix Q = Matrix::Zero(3, 3);
  Q(1, 1) = 1.0;
  return {"sir",
          "SIR epidemic linearized at the disease-free point; not stabilizable",
          linearize_along(model),
          Matrix::Identity(3, 3),
          Q,
          scalar(1.0),
          Vector::Zero(3),
          nullptr,
          std::move(model)};
}

Scenario oscillator_preset() {
  const double rho = 0.9, theta = 0.3;
  Matrix A{{rho * std::cos(theta), -rho * std::sin(theta)},
           {rho * std::sin(theta), rho * std::cos(theta)}};
  Matrix B{{0.0}, {1.0}};
  Matrix C{{1.0, 0.0}};
  return {"oscillator",
          "damped oscillator observed through its position only",
          LinearSystem(std::move(A), std::move(B), std::move(C)),
          Matrix::Identity(2, 2),
          scalar(1.0),
          scalar(1.0),
          Vector::Zero(1),
          fixed_gain(Matrix::Zero(1, 2)),
          std::nullopt};
}

}  // namespace

DynamicsFunction pendulum_dynamics(const PendulumParams& p) {
  return [p](const Vector& x, const Vector& u) -> Vector {
    return Vector{{x(0) + p.dt * x(1),
                   x(1) + p.dt * (u(0) - p.mass * p.gravity * std::sin(x(0))) /
                              (p.mass * p.length * p.length)}};
  };
}

DynamicsFunction sir_dynamics(const SIRParams& p) {
  return [p](const Vector& x, const Vector& u) -> Vector {
    const double S = x(0), I = x(1), R = x(2);
    return Vector{{S - p.beta * S * I - p.alpha * u(0),
                   I + p.beta * S * I - p.gamma * I, R + p.gamma * I}};
  };
}

DynamicsFunction ventilator_dynamics(const VentilatorParams& p) {
  return [p](const Vector& v, const Vector& u) -> Vector {
    return Vector{{v(0) + p.dt * u(0)}};
  };
}

std::function<Vector(const Vector&)> ventilator_pressure(
    const VentilatorParams& p) {
  return [p](const Vector& v) -> Vector {
    return Vector{{p.c0 + p.c1 * std::pow(v(0), -1.0 / 3.0) +
                   p.c2 * std::pow(v(0), 5.0 / 3.0)}};
  };
}

LinearSystem linearize_along(const NonlinearModel& model) {
  if (model.anchors.empty()) {
    throw ConfigError("linearize_along: no anchor points");
  }
  std::vector<SystemMatrices> pieces;
  for (const Anchor& a : model.anchors) {
    const Jacobians J = linearize(model.dynamics, a.x, a.u);
    SystemMatrices m{J.A, J.B, std::nullopt};
    if (model.observation) {
      const auto obs = model.observation;
      m.C = linearize([&obs](const Vector& x, const Vector&) { return obs(x); },
                      a.x, a.u)
                .A;
    }
    pieces.push_back(std::move(m));
  }
  const SystemMatrices& first = pieces.front();
  if (pieces.size() == 1) return LinearSystem(first.A, first.B, first.C);
  if (model.anchor_period <= 0) {
    throw ConfigError("linearize_along: anchor_period must be positive");
  }
  const int period = model.anchor_period;
  const bool has_c = first.C.has_value();
  const int dy = has_c ? static_cast<int>(first.C->rows())
                       : static_cast<int>(first.A.rows());
  return LinearSystem::time_varying(
      static_cast<int>(first.A.rows()), static_cast<int>(first.B.cols()), dy,
      [pieces, period](int t) {
        return pieces[std::min(pieces.size() - 1,
                               static_cast<size_t>(std::max(t, 0) / period))];
      },
      has_c);
}

Matrix b747_A() {
  return Matrix{{-0.003, 0.039, 0.0, -0.322},
                {-0.065, -0.319, 7.74, 0.0},
                {0.020, -0.101, -0.429, 0.0},
                {0.0, 0.0, 1.0, 0.0}};
}

Matrix b747_B() {
  return Matrix{{0.01, 1.0}, {-0.18, -0.04}, {-1.16, 0.598}, {0.0, 0.0}};
}

Matrix b747_wind() {
  const Matrix printed{{-0.003, 0.039, 0.0, -0.322},
                       {-0.065, -0.319, 7.74, 0.0}};
  return printed.transpose();
}

Matrix b747_output() {
  return Matrix{{1.0, 0.0, 0.0, 0.0}, {0.0, -1.0, 0.0, 7.74}};
}

std::vector<std::string> preset_names() {
  return {"scalar-0.9", "double-integrator", "b747",      "pendulum",
          "ventilator", "sir",               "oscillator"};
}

Scenario make_preset(const std::string& name) {
  if (name == "scalar-0.9") return scalar_preset();
  if (name == "double-integrator") return double_integrator_preset();
  if (name == "b747") return b747_preset();
  if (name == "pendulum") return pendulum_preset();
  if (name == "ventilator") return ventilator_preset();
  if (name == "sir") return sir_preset();
  if (name == "oscillator") return oscillator_preset();
  throw ConfigError("unknown scenario preset: " + name);
}

std::vector<Scenario> scenario_presets() {
  std::vector<Scenario> out;
  for (const auto& name : preset_names()) out.push_back(make_preset(name));
  return out;
}

}  // namespace nsc
