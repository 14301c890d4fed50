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

#include "nsc/lds/simulate.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "nsc/error.hpp"

namespace nsc {

double Trajectory::total_cost() const {
  return std::accumulate(cost.begin(), cost.end(), 0.0);
}

Trajectory simulate(const LinearSystem& system, Controller& controller,
                    const PerturbationSource& perturbations,
                    const CostFunction& cost,
                    const SimulationOptions& options) {
  if (options.horizon < 0) throw ConfigError("horizon must be nonnegative");
  if (perturbations.dim() != system.state_dim()) {
    throw ConfigError("perturbation dimension " +
                      std::to_string(perturbations.dim()) +
                      " does not match state dimension " +
                      std::to_string(system.state_dim()));
  }
  const bool full = system.fully_observed();
  const bool reveal = options.reveal_perturbations.value_or(full);
  const int T = options.horizon;

  Trajectory traj;
  traj.x.reserve(T + 1);
  traj.u.reserve(T);
  traj.w.reserve(T);
  traj.y.reserve(T);
  traj.cost.reserve(T);

  Vector x = options.x0.size() ? options.x0
                               : Vector::Zero(system.state_dim());
  if (x.size() != system.state_dim()) {
    throw ConfigError("initial state has wrong dimension");
  }
  traj.x.push_back(x);
  traj.empirical_gamma = x.norm();

  Rng rng(options.seed);
  for (int t = 0; t < T; ++t) {
    const Vector y = observe(system, x, t);
    Signals signals;
    signals.t = t;
    signals.state = full ? &traj.x.back() : nullptr;
    signals.observation = &y;
    signals.previous_perturbation =
        (reveal && t > 0) ? &traj.w.back() : nullptr;

    Vector u = controller.act(signals);
    if (u.size() != system.control_dim()) {
      throw ConfigError("controller returned control of dimension " +
                        std::to_string(u.size()) + " at step " +
                        std::to_string(t));
    }
    if (!u.allFinite()) {
      throw NumericalError("controller emitted a non-finite control at step " +
                           std::to_string(t));
    }
    Vector w = perturbations.sample(t, rng);
    Vector next = step(system, x, u, w, t);
    if (!next.allFinite()) {
      throw NumericalError("state diverged to non-finite values at step " +
                           std::to_string(t));
    }
    const double c = cost(y, u, t);

    traj.u.push_back(std::move(u));
    traj.w.push_back(std::move(w));
    traj.y.push_back(y);
    traj.cost.push_back(c);
    traj.x.push_back(next);
    traj.empirical_gamma = std::max(traj.empirical_gamma, next.norm());

    const Vector next_y = observe(system, next, t + 1);
    Feedback fb;
    fb.t = t;
    fb.state = full ? &traj.x[t] : nullptr;
    fb.observation = &traj.y.back();
    fb.control = &traj.u.back();
    fb.next_state = full ? &traj.x.back() : nullptr;
    fb.next_observation = &next_y;
    fb.cost = c;
    controller.feedback(fb);

    x = std::move(next);
  }
  return traj;
}

bool replays_exactly(const LinearSystem& system,
                     const Trajectory& trajectory) {
  if (trajectory.x.size() != trajectory.u.size() + 1) return false;
  for (int t = 0; t < trajectory.horizon(); ++t) {
    const Vector next =
        step(system, trajectory.x[t], trajectory.u[t], trajectory.w[t], t);
    if (next != trajectory.x[t + 1]) return false;
  }
  return true;
}

}  // namespace nsc
