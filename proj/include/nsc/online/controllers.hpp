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

// Online controllers that learn disturbance-action (GPC) and
// disturbance-response (GRC) parameters by projected gradient descent on
// counterfactual losses.

#ifndef NSC_ONLINE_CONTROLLERS_HPP_
#define NSC_ONLINE_CONTROLLERS_HPP_

#include <deque>
#include <functional>
#include <memory>
#include <vector>

#include "nsc/lds/cost.hpp"
#include "nsc/lds/simulate.hpp"
#include "nsc/lds/system.hpp"
#include "nsc/online/ogd.hpp"
#include "nsc/policies/policy.hpp"

namespace nsc {

struct TelemetryRow {
  int t = 0;
  double cost = 0.0;
  double parameter_norm = 0.0;     // Frobenius norm of the stacked M
  double perturbation_norm = 0.0;  // |w_t| for GPC, |ynat_t| for GRC
  double gradient_norm = 0.0;
  double counterfactual_loss = 0.0;  // l_t at the parameters played
};

// Per-step transition, input matrix and driving signal for times
// [begin, end). Signals outside the stored range read as zero.
class SignalWindow {
 public:
  // capacity <= 0 keeps the whole history.
  explicit SignalWindow(int capacity = 0) : capacity_(capacity) {}

  void push(Matrix transition, Matrix input, Vector signal);

  int begin() const { return end_ - static_cast<int>(entries_.size()); }
  int end() const { return end_; }
  const Matrix& transition(int s) const { return at(s).transition; }
  const Matrix& input(int s) const { return at(s).input; }
  Vector signal(int s, int dim) const;

 private:
  struct Entry {
    Matrix transition;
    Matrix input;
    Vector signal;
  };
  const Entry& at(int s) const;

  int capacity_;
  int end_ = 0;
  std::deque<Entry> entries_;
};

struct CounterfactualLoss {
  double value = 0.0;
  Vector state;                  // x_t(M) or y_t(M)
  Vector control;                // u_t(M)
  std::vector<Matrix> gradient;  // one block per M_i
};

// x_t(M) for a DAC with coefficients M_1..M_h played from the start, using
// window entries (A_s + B_s K_s, B_s, w_s) for s < t. Rolls forward from a
// zero state at max(0, t - truncation); truncation < 0 means no truncation.
Vector counterfactual_state(const std::vector<Matrix>& M,
                            const SignalWindow& window, int t, int truncation);

// l_t(M) = c_t(x_t(M), K_t x_t(M) + sum_j M_j w_{t-j}) and its gradient.
CounterfactualLoss dac_loss(const std::vector<Matrix>& M,
                            const SignalWindow& window, int t, int truncation,
                            const Matrix& K_t, const CostFunction& cost);

// l_t(M) = c_t(ynat_t + C_t z_t(M), u_t(M)) with u_s(M) = sum_{j=0}^h M_j
// ynat_{s-j} and z driven by window entries (A_s, B_s, ynat_s), s <= t.
CounterfactualLoss drc_loss(const std::vector<Matrix>& M,
                            const SignalWindow& window, int t, int truncation,
                            const Matrix& C_t, const CostFunction& cost);

struct OnlineControlConfig {
  int h = 5;
  // 0 picks 2h + ceil(log(1/truncation_eps) / delta) from the decay of the
  // closed loop; negative disables truncation.
  int truncation = 0;
  double truncation_eps = 1e-6;
  int max_truncation = 2000;
  OGDConfig ogd;
};

class GPCController final : public Controller {
 public:
  using GainProvider = std::function<Matrix(int t)>;

  GPCController(LinearSystem system, Matrix K, CostFunction cost,
                OnlineControlConfig config);
  GPCController(LinearSystem system, GainProvider K_t, CostFunction cost,
                OnlineControlConfig config);

  Vector act(const Signals& signals) override;
  void feedback(const Feedback& outcome) override;
  std::unique_ptr<Controller> clone() const override;

  std::vector<Matrix> parameters() const;
  int truncation() const { return truncation_; }
  const OGD& optimizer() const { return ogd_; }
  const std::vector<TelemetryRow>& telemetry() const { return telemetry_; }
  const std::vector<Vector>& recovered_perturbations() const {
    return recovered_;
  }

 private:
  Matrix gain(int t) const { return K_t_ ? K_t_(t) : K_; }

  LinearSystem system_;
  Matrix K_;
  GainProvider K_t_;
  CostFunction cost_;
  OnlineControlConfig config_;
  int truncation_ = 0;
  OGD ogd_;
  SignalWindow window_;
  std::vector<Vector> recovered_;
  std::vector<TelemetryRow> telemetry_;
};

class GRCController final : public Controller {
 public:
  GRCController(LinearSystem system, CostFunction cost,
                OnlineControlConfig config);

  Vector act(const Signals& signals) override;
  void feedback(const Feedback& outcome) override;
  std::unique_ptr<Controller> clone() const override;

  std::vector<Matrix> parameters() const;  // M_0 .. M_h
  int truncation() const { return truncation_; }
  const OGD& optimizer() const { return ogd_; }
  const std::vector<TelemetryRow>& telemetry() const { return telemetry_; }
  const std::vector<Vector>& natures_y() const { return ynat_; }

 private:
  LinearSystem system_;
  CostFunction cost_;
  OnlineControlConfig config_;
  int truncation_ = 0;
  OGD ogd_;
  NaturesY tracker_;
  SignalWindow window_;
  std::vector<Vector> ynat_;
  std::vector<TelemetryRow> telemetry_;
};

// Truncation depth for a closed loop with transition `closed`.
int default_truncation(const Matrix& closed, int h, double eps, int cap);

}  // namespace nsc

#endif  // NSC_ONLINE_CONTROLLERS_HPP_
