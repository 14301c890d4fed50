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

// Best fixed policies in hindsight on a recorded perturbation sequence: the
// comparators in policy regret.

#ifndef NSC_HARNESS_COMPARATORS_HPP_
#define NSC_HARNESS_COMPARATORS_HPP_

#include <functional>
#include <string>
#include <vector>

#include "nsc/lds/cost.hpp"
#include "nsc/lds/system.hpp"
#include "nsc/matrix.hpp"
#include "nsc/online/ogd.hpp"

namespace nsc {

struct ComparatorOptions {
  // Feasible set for the stacked parameters; match the learner's projection.
  ProjectionKind projection = ProjectionKind::kBall;
  double radius = 1.0;
  // Iterative path only (non-quadratic costs or block-norm-sum sets).
  int max_iter = 5000;
  double grad_tol = 1e-8;
};

struct ComparatorResult {
  std::string name;              // "dac", "drc" or "linear"
  std::vector<Matrix> M;         // DAC: M_1..M_h; DRC: M_0..M_h
  Matrix K;                      // DAC stabilizing gain, or the linear K*
  std::vector<double> costs;     // per-step cost of the comparator
  double total_cost = 0.0;
  int iterations = 0;
  bool converged = true;
  std::string method;            // how the minimizer was found
  std::vector<std::string> warnings;
};

// Policies linear in a parameter vector m give states and controls that are
// affine in m: x_t = X_t m + x0_t, u_t = U_t m + u0_t. For partially observed
// comparators the "state" is the observation.
struct AffineRollout {
  std::vector<Matrix> X, U;
  std::vector<Vector> x0, u0;
};

// u_t = K_t x_t + sum_{j=1}^h M_j w_{t-j} played from x_0 on the recorded w.
AffineRollout dac_rollout(const LinearSystem& system,
                          const std::function<Matrix(int)>& K_t,
                          const std::vector<Vector>& w, int h,
                          const Vector& x0 = Vector());

// u_t = sum_{j=0}^h M_j ynat_{t-j}, y_t = ynat_t + C_t z_t, z_0 = 0.
AffineRollout drc_rollout(const LinearSystem& system,
                          const std::vector<Vector>& ynat, int h);

// Minimizes sum_t c_t(x_t(m), u_t(m)) over the feasible set. Quadratic costs
// with a ball (or no) constraint are solved exactly through the normal
// equations and a trust-region multiplier; anything else uses projected
// gradient descent with step 1 / (L sqrt(k)).
struct AffineMinimum {
  Vector m;
  std::vector<double> costs;
  double total = 0.0;
  int iterations = 0;
  bool converged = true;
  std::string method;
};
AffineMinimum minimize_affine(const AffineRollout& rollout,
                              const CostFunction& cost,
                              const ComparatorOptions& options,
                              int block_size);

ComparatorResult best_dac_in_hindsight(const LinearSystem& system,
                                       const Matrix& K,
                                       const std::vector<Vector>& w,
                                       const CostFunction& cost, int h,
                                       const ComparatorOptions& options = {});
ComparatorResult best_dac_in_hindsight(const LinearSystem& system,
                                       const std::function<Matrix(int)>& K_t,
                                       const std::vector<Vector>& w,
                                       const CostFunction& cost, int h,
                                       const ComparatorOptions& options = {});

ComparatorResult best_drc_in_hindsight(const LinearSystem& system,
                                       const std::vector<Vector>& ynat,
                                       const CostFunction& cost, int h,
                                       const ComparatorOptions& options = {});

// Total cost of u_t = K x_t on the recorded w, by exact rollout. Returns
// +infinity when the rollout overflows.
// DRC on a plant pre-stabilized by state feedback: `closed_loop` is
// (A + BK, B, I) and the played control is K x_t + u_t. The cost is charged
// on the played control.
ComparatorResult best_stabilized_drc_in_hindsight(
    const LinearSystem& closed_loop, const Matrix& K,
    const std::vector<Vector>& ynat, const CostFunction& cost, int h,
    const ComparatorOptions& options = {});

double linear_policy_cost(const LinearSystem& system, const Matrix& K,
                          const std::vector<Vector>& w,
                          const CostFunction& cost,
                          std::vector<double>* costs = nullptr);

struct LinearSearchOptions {
  int max_evaluations = 20000;
  double initial_step = 0.1;
  double min_step = 1e-6;
  // Additional starting gains; zero and (when available) the LQR gain with
  // its +-20% scalings are always tried.
  std::vector<Matrix> extra_starts;
};

// Multi-start compass search on K. The objective is not convex in K, so the
// result is the best local minimum found, not a certified optimum.
ComparatorResult best_linear_in_hindsight(const LinearSystem& system,
                                          const std::vector<Vector>& w,
                                          const CostFunction& cost,
                                          const LinearSearchOptions& options =
                                              {});

}  // namespace nsc

#endif  // NSC_HARNESS_COMPARATORS_HPP_
