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

// System identification by the method of moments and the
// identify-then-control pipeline.

#ifndef NSC_SYSID_SYSID_HPP_
#define NSC_SYSID_SYSID_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "nsc/harness/comparators.hpp"
#include "nsc/lds/cost.hpp"
#include "nsc/lds/perturbation.hpp"
#include "nsc/lds/system.hpp"
#include "nsc/online/controllers.hpp"

namespace nsc {

// The only access identification gets to the plant: apply a control, read
// the state.
class BlackBox {
 public:
  virtual ~BlackBox() = default;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual const Vector& state() const = 0;
  virtual void step(const Vector& u) = 0;
};

// A LinearSystem driven by a perturbation source. Keeps the perturbations it
// drew so that harness code can score the run afterwards.
class SimulatedBlackBox final : public BlackBox {
 public:
  SimulatedBlackBox(LinearSystem system, PerturbationSource perturbations,
                    std::uint64_t seed, Vector x0 = Vector());

  int state_dim() const override { return system_.state_dim(); }
  int control_dim() const override { return system_.control_dim(); }
  const Vector& state() const override { return x_; }
  // Throws NumericalError when the state becomes non-finite.
  void step(const Vector& u) override;

  int time() const { return t_; }
  const LinearSystem& system() const { return system_; }
  const std::vector<Vector>& perturbations() const { return w_; }

 private:
  LinearSystem system_;
  PerturbationSource perturbations_;
  Rng rng_;
  Vector x_;
  int t_ = 0;
  std::vector<Vector> w_;
};

struct ExcitationRecord {
  int k = 0;
  int T0 = 0;
  std::vector<Vector> x;    // T0 (k+1) + 2 states, x_0 .. x_N
  std::vector<Vector> eta;  // T0 (k+1) + 1 controls
};

// Plays i.i.d. Rademacher controls for t = 0 .. T0 (k+1), recording states.
ExcitationRecord excite_and_record(BlackBox& plant, int k, int T0,
                                   std::uint64_t seed);

struct MomentEstimates {
  int k = 0;
  int T0 = 0;
  std::vector<Matrix> G;  // G[j] estimates A^j B, j = 0..k
};

// G_j = (1/T0) sum_{t<T0} x_{t(k+1)+j+1} eta_{t(k+1)}', as a running mean.
MomentEstimates estimate_moments(const ExcitationRecord& record);

struct IdentifiedSystem {
  Matrix A;
  Matrix B;
  double residual = 0.0;   // ||C1 - A C0||_F
  double sigma_min = 0.0;  // smallest singular value of C0
  std::vector<std::string> warnings;
};

inline constexpr double kDefaultSigmaMinThreshold = 1e-6;

// C0 = [G_0 .. G_{k-1}], C1 = [G_1 .. G_k], A = C1 C0' (C0 C0')^+, B = G_0.
// Warns when sigma_min(C0) falls below the threshold.
IdentifiedSystem recover_AB(const MomentEstimates& moments,
                            double sigma_min_threshold =
                                kDefaultSigmaMinThreshold);

struct IdentifyThenControlConfig {
  int k = 1;
  int T0 = 0;  // 0 picks ceil(T^{2/3})
  double sigma_min_threshold = kDefaultSigmaMinThreshold;
  OnlineControlConfig gpc;
  std::uint64_t excitation_seed = 0;
  // Stabilizing gain for GPC on the estimate; empty means zero (the plant is
  // assumed stable).
  Matrix K;
};

struct IdentifyThenControlReport {
  int T = 0;
  int exploration_steps = 0;
  IdentifiedSystem identified;
  std::vector<double> costs;  // per step, both phases
  std::vector<Vector> controls;
  double exploration_cost = 0.0;
  double exploitation_cost = 0.0;
  double total_cost = 0.0;
  ComparatorResult comparator;  // best DAC in hindsight on the true system
  double average_regret = 0.0;  // (total_cost - comparator) / T
};

// Runs GPC on (A_hat, B_hat) against the plant for the steps left after
// identification. The comparator uses the true system and perturbations the
// plant recorded. Throws NumericalError when sigma_min is below threshold.
IdentifyThenControlReport identify_then_control(
    SimulatedBlackBox& plant, int T, const CostFunction& cost,
    const IdentifyThenControlConfig& config,
    const ComparatorOptions& comparator = {});

// Exploitation phase alone: GPC built on `model` drives the plant for
// `steps` steps. Returns per-step costs; controls are appended to `controls`
// when given.
std::vector<double> run_gpc_on_plant(SimulatedBlackBox& plant,
                                     const LinearSystem& model,
                                     const Matrix& K, const CostFunction& cost,
                                     const OnlineControlConfig& config,
                                     int steps,
                                     std::vector<Vector>* controls = nullptr);

// Text block: k, T0, per-j errors (when truth is given), residual, sigma_min.
std::string sysid_summary(const MomentEstimates& moments,
                          const IdentifiedSystem& identified,
                          const Matrix* true_A = nullptr,
                          const Matrix* true_B = nullptr);

}  // namespace nsc

#endif  // NSC_SYSID_SYSID_HPP_
