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

// Projected online gradient descent.

#ifndef NSC_ONLINE_OGD_HPP_
#define NSC_ONLINE_OGD_HPP_

#include "nsc/matrix.hpp"

namespace nsc {

enum class StepSchedule {
  kInverseSqrt,  // eta_t = scale / sqrt(t)
  kConstant,     // eta_t = scale
};

enum class ProjectionKind {
  kNone,
  kBall,           // Euclidean ball of `radius` on the stacked vector
  kBlockNormSum,   // sum of Frobenius norms of consecutive blocks <= radius
};

struct OGDConfig {
  StepSchedule schedule = StepSchedule::kInverseSqrt;
  double scale = 0.1;
  ProjectionKind projection = ProjectionKind::kBall;
  double radius = 1.0;
  int block_size = 0;  // entries per block for kBlockNormSum
};

class OGD {
 public:
  OGD(OGDConfig config, Vector initial);

  // Step size the next update will use (t counts updates from 1).
  double step_size() const;

  // point <- Project(point - eta_t * gradient). Throws NumericalError on a
  // non-finite gradient; the state is left untouched in that case.
  void update(const Vector& gradient);

  const Vector& point() const { return point_; }
  int updates() const { return updates_; }
  double last_step_norm() const { return last_step_norm_; }
  const OGDConfig& config() const { return config_; }

  bool contains(const Vector& v, double slack = 0.0) const;
  Vector project(const Vector& v) const;

 private:
  OGDConfig config_;
  Vector point_;
  int updates_ = 0;
  double last_step_norm_ = 0.0;
};

// Euclidean projection onto {v : sum_i ||block_i(v)|| <= radius}.
Vector project_block_norm_sum(const Vector& v, int block_size, double radius);

}  // namespace nsc

#endif  // NSC_ONLINE_OGD_HPP_
