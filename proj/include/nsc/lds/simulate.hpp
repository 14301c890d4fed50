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

#ifndef NSC_LDS_SIMULATE_HPP_
#define NSC_LDS_SIMULATE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "nsc/lds/cost.hpp"
#include "nsc/lds/perturbation.hpp"
#include "nsc/lds/system.hpp"

namespace nsc {

// What a controller may look at when choosing u_t. `state` is only populated
// for fully observed systems; `previous_perturbation` is w_{t-1}, revealed
// when the simulation is configured to do so (it is recoverable from states
// whenever the dynamics are known and fully observed).
struct Signals {
  int t = 0;
  const Vector* state = nullptr;
  const Vector* observation = nullptr;
  const Vector* previous_perturbation = nullptr;
};

// Outcome of a step, delivered after the system advanced.
struct Feedback {
  int t = 0;
  const Vector* state = nullptr;       // x_t (fully observed only)
  const Vector* observation = nullptr; // y_t
  const Vector* control = nullptr;     // u_t
  const Vector* next_state = nullptr;  // x_{t+1} (fully observed only)
  const Vector* next_observation = nullptr;
  double cost = 0.0;                   // c_t(y_t, u_t)
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual Vector act(const Signals& signals) = 0;
  virtual void feedback(const Feedback& /*outcome*/) {}
  virtual std::unique_ptr<Controller> clone() const = 0;
};

// u_t = 0 regardless of signals.
class ZeroController final : public Controller {
 public:
  explicit ZeroController(int control_dim) : dim_(control_dim) {}
  Vector act(const Signals&) override { return Vector::Zero(dim_); }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<ZeroController>(*this);
  }

 private:
  int dim_;
};

// Per-step record. x holds T+1 states (x_0 .. x_T); the other sequences hold
// T entries. Costs are evaluated on (y_t, u_t).
struct Trajectory {
  std::vector<Vector> x;
  std::vector<Vector> u;
  std::vector<Vector> w;
  std::vector<Vector> y;
  std::vector<double> cost;
  // max_t ||x_t||, the empirical stabilization constant.
  double empirical_gamma = 0.0;

  int horizon() const { return static_cast<int>(u.size()); }
  double total_cost() const;
};

struct SimulationOptions {
  int horizon = 0;
  std::uint64_t seed = 0;
  // Empty means the zero vector.
  Vector x0;
  // Defaults to revealing w_{t-1} iff the system is fully observed.
  std::optional<bool> reveal_perturbations;
};

// Rolls the controller forward for `horizon` steps. Throws NumericalError
// naming the step when the controller emits a non-finite control or the state
// diverges to non-finite values.
Trajectory simulate(const LinearSystem& system, Controller& controller,
                    const PerturbationSource& perturbations,
                    const CostFunction& cost, const SimulationOptions& options);

// Re-simulates the trajectory's own perturbation and control sequences and
// reports whether every state matches bit for bit.
bool replays_exactly(const LinearSystem& system, const Trajectory& trajectory);

}  // namespace nsc

#endif  // NSC_LDS_SIMULATE_HPP_
