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

#ifndef NSC_LDS_COST_HPP_
#define NSC_LDS_COST_HPP_

#include <functional>
#include <memory>
#include <optional>

#include "nsc/matrix.hpp"

namespace nsc {

struct CostGradient {
  Vector state;
  Vector control;
};

// (x - x*)' Q (x - x*) + u' R u.
struct QuadraticCost {
  Matrix Q;
  Matrix R;
  Vector target;
};

// Convex per-step cost c_t(x, u). For partially observed systems the first
// argument is the observation y_t rather than the state.
class CostFunction {
 public:
  using Evaluator = std::function<double(const Vector& x, const Vector& u,
                                         int t)>;
  using GradientEvaluator = std::function<CostGradient(
      const Vector& x, const Vector& u, int t)>;

  // Checks symmetry and PSD-ness of Q and R. Empty target means zero.
  static CostFunction quadratic(Matrix Q, Matrix R, Vector target = Vector());

  // Caller guarantees convexity and that `gradient` is the gradient of
  // `value`.
  static CostFunction custom(Evaluator value, GradientEvaluator gradient);

  double operator()(const Vector& x, const Vector& u, int t = 0) const;
  CostGradient gradient(const Vector& x, const Vector& u, int t = 0) const;

  // Null for custom costs.
  const QuadraticCost* quadratic_terms() const {
    return quadratic_ ? &*quadratic_ : nullptr;
  }

 private:
  std::optional<QuadraticCost> quadratic_;
  Evaluator value_;
  GradientEvaluator gradient_;
};

}  // namespace nsc

#endif  // NSC_LDS_COST_HPP_
