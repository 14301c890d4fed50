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

// Policy classes over linear dynamical systems. Every history-based policy
// treats signals before t = 0 as zero vectors.

#ifndef NSC_POLICIES_POLICY_HPP_
#define NSC_POLICIES_POLICY_HPP_

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nsc/lds/simulate.hpp"
#include "nsc/lds/system.hpp"
#include "nsc/matrix.hpp"

namespace nsc {

// Fixed-length history, newest first. Slot i holds the signal from i + 1
// steps ago (or from i steps ago when the current value has been pushed).
class History {
 public:
  History() = default;
  History(int length, int dim);

  void push(const Vector& v);
  const Vector& operator[](int i) const { return items_[i]; }
  int length() const { return static_cast<int>(items_.size()); }
  int dim() const { return dim_; }

 private:
  std::deque<Vector> items_;
  int dim_ = 0;
};

struct LinearPolicy {
  Matrix K;  // u = K x
};

struct PIDPolicy {
  Matrix alpha;  // proportional, d_u x d_x
  Matrix beta;   // integral
  Matrix gamma;  // derivative
  std::optional<double> windup_cap;

  Vector integral;
  Vector previous;
};

struct BangBangPolicy {
  double x_min = 0.0;
  double x_max = 0.0;
  double u_min = 0.0;
  double u_max = 0.0;
  int coordinate = 0;
  int control_dim = 1;
};

struct LDCPolicy {
  Matrix A;  // internal dynamics
  Matrix B;
  Matrix C;
  std::optional<Matrix> D;

  Vector s;
};

// u_t = sum_{i=0}^{h} M_i x_{t-i}.
struct GLCPolicy {
  std::vector<Matrix> M;  // M_0 .. M_h

  History past;  // x_{t-1} .. x_{t-h}
};

// u_t = K_t x_t + sum_{i=1}^{h} M_i w_{t-i} (+ offset).
struct DACPolicy {
  using GainProvider = std::function<Matrix(int t)>;

  Matrix K;
  GainProvider K_t;        // overrides K when set
  std::vector<Matrix> M;   // M_1 .. M_h
  std::optional<Vector> offset;

  History w_past;  // w_{t-1} .. w_{t-h}
};

// Counterfactual observation with every past control zeroed:
// ynat_t = y_t - C_t z_t, z_{t+1} = A_t z_t + B_t u_t, z_0 = 0.
class NaturesY {
 public:
  NaturesY() = default;
  explicit NaturesY(int state_dim) : z_(Vector::Zero(state_dim)) {}

  Vector observe(const Matrix& C, const Vector& y) const;
  void advance(const Matrix& A, const Matrix& B, const Vector& u);
  const Vector& z() const { return z_; }

 private:
  Vector z_;
};

Vector natures_y_step(NaturesY& tracker, const Matrix& A, const Matrix& B,
                      const Matrix& C, const Vector& u, const Vector& y);

// u_t = sum_{i=0}^{h} M_i ynat_{t-i} (+ offset).
struct DRCPolicy {
  std::vector<Matrix> M;  // M_0 .. M_h
  std::optional<Vector> offset;
  std::shared_ptr<const LinearSystem> system;

  NaturesY tracker;
  History ynat_past;  // ynat_{t-1} .. ynat_{t-h}
};

using Policy = std::variant<LinearPolicy, PIDPolicy, BangBangPolicy, LDCPolicy,
                            GLCPolicy, DACPolicy, DRCPolicy>;

// Constructors that validate dimensions and allocate the internal state.
Policy make_linear(Matrix K);
Policy make_pid(Matrix alpha, Matrix beta, Matrix gamma,
                std::optional<double> windup_cap = std::nullopt);
Policy make_bang_bang(double x_min, double x_max, double u_min, double u_max,
                      int coordinate = 0, int control_dim = 1);
Policy make_ldc(Matrix A, Matrix B, Matrix C,
                std::optional<Matrix> D = std::nullopt);
Policy make_glc(std::vector<Matrix> M);
Policy make_dac(Matrix K, std::vector<Matrix> M,
                std::optional<Vector> offset = std::nullopt);
Policy make_dac(int control_dim, int state_dim, DACPolicy::GainProvider K_t,
                std::vector<Matrix> M,
                std::optional<Vector> offset = std::nullopt);
Policy make_drc(std::shared_ptr<const LinearSystem> system,
                std::vector<Matrix> M,
                std::optional<Vector> offset = std::nullopt);

std::string kind_name(const Policy& policy);

// Clears ring buffers, integrators and internal states.
void reset(Policy& policy);

// Computes u_t and advances internal state. Uses the state when the
// simulator provides it and the observation otherwise.
Vector act(Policy& policy, const Signals& signals);

// Spectral-norm sum of the history coefficients (Frobenius norm of K for a
// linear policy); zero for PID and bang-bang.
double parameter_budget(const Policy& policy);

class PolicyController final : public Controller {
 public:
  explicit PolicyController(Policy policy) : policy_(std::move(policy)) {}

  Vector act(const Signals& signals) override;
  std::unique_ptr<Controller> clone() const override;

  const Policy& policy() const { return policy_; }

 private:
  Policy policy_;
};

// Lifted system whose linear policy K reproduces a GLC on the original
// system. The lifted state is [x_t; x_{t-1}; ...; x_{t-h}].
struct LiftedSystem {
  LinearSystem system;
  Matrix noise_embedding;  // [I; 0]
  Matrix K;                // [M_0 ... M_h]
};

LiftedSystem lift_glc(const LinearSystem& system, const GLCPolicy& glc);

// DAC with zero stabilizing part and h + 1 coefficients K (A + BK)^i placed
// against w_{t-1-i}. Throws ConfigError if A + BK is not stable.
Policy dac_from_linear(const Matrix& A, const Matrix& B, const Matrix& K,
                       int h);

// GLC with M_0 = D and M_i = C A^{i-1} B. Throws ConfigError if A is not
// stable.
Policy glc_from_ldc(const LDCPolicy& ldc, int h);

// Average per-step absolute cost gap of two policies rolled out on the same
// recorded perturbation sequence.
double approximation_gap(const Policy& a, const Policy& b,
                         const LinearSystem& system,
                         const std::vector<Vector>& perturbations,
                         const CostFunction& cost, const Vector& x0 = Vector());

// Text block: "policy <kind>", "key value" scalars, named matrices in the
// lds_core matrix format, terminated by "end".
std::string serialize_policy(const Policy& policy);
Policy parse_policy(const std::string& text,
                    std::shared_ptr<const LinearSystem> system = nullptr);

}  // namespace nsc

#endif  // NSC_POLICIES_POLICY_HPP_
