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

#include "nsc/lds/cost.hpp"

#include <utility>

#include "nsc/error.hpp"

namespace nsc {

CostFunction CostFunction::quadratic(Matrix Q, Matrix R, Vector target) {
  if (Q.rows() != Q.cols() || R.rows() != R.cols() || Q.size() == 0 ||
      R.size() == 0) {
    throw ConfigError("cost matrices Q and R must be square");
  }
  if (!is_psd(Q)) throw ConfigError("Q must be symmetric positive semidefinite");
  if (!is_psd(R)) throw ConfigError("R must be symmetric positive semidefinite");
  if (target.size() == 0) target = Vector::Zero(Q.rows());
  if (target.size() != Q.rows()) {
    throw ConfigError("cost target has wrong dimension");
  }
  CostFunction c;
  c.quadratic_ = QuadraticCost{std::move(Q), std::move(R), std::move(target)};
  return c;
}

CostFunction CostFunction::custom(Evaluator value,
                                  GradientEvaluator gradient) {
  if (!value || !gradient) {
    throw ConfigError("custom cost needs both value and gradient");
  }
  CostFunction c;
  c.value_ = std::move(value);
  c.gradient_ = std::move(gradient);
  return c;
}

double CostFunction::operator()(const Vector& x, const Vector& u,
                                int t) const {
  if (quadratic_) {
    const auto& q = *quadratic_;
    if (x.size() != q.Q.rows() || u.size() != q.R.rows()) {
      throw ConfigError("cost: dimension mismatch");
    }
    const Vector e = x - q.target;
    return e.dot(q.Q * e) + u.dot(q.R * u);
  }
  return value_(x, u, t);
}

CostGradient CostFunction::gradient(const Vector& x, const Vector& u,
                                    int t) const {
  if (quadratic_) {
    const auto& q = *quadratic_;
    if (x.size() != q.Q.rows() || u.size() != q.R.rows()) {
      throw ConfigError("cost gradient: dimension mismatch");
    }
    return {2.0 * (q.Q * (x - q.target)), 2.0 * (q.R * u)};
  }
  return gradient_(x, u, t);
}

}  // namespace nsc
