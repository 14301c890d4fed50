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

#include "nsc/online/ogd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nsc/error.hpp"

namespace nsc {
namespace {

// Plain loop so the result does not depend on SIMD alignment of the data;
// membership tests must agree bit for bit across copies of a vector.
double segment_norm(const Vector& v, Eigen::Index start, Eigen::Index len) {
  double sum = 0.0;
  for (Eigen::Index i = start; i < start + len; ++i) sum += v(i) * v(i);
  return std::sqrt(sum);
}

}  // namespace

Vector project_block_norm_sum(const Vector& v, int block_size, double radius) {
  if (block_size <= 0 || v.size() % block_size != 0) {
    throw ConfigError("block projection: vector length " +
                      std::to_string(v.size()) +
                      " is not a multiple of the block size");
  }
  const int blocks = static_cast<int>(v.size() / block_size);
  std::vector<double> norms(blocks);
  double total = 0.0;
  for (int i = 0; i < blocks; ++i) {
    norms[i] = segment_norm(v, i * block_size, block_size);
    total += norms[i];
  }
  if (total <= radius) return v;

  // Project the norm vector onto the l1 ball (simplex thresholding), then
  // shrink every block to its new norm.
  std::vector<double> sorted = norms;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumulative = 0.0, theta = 0.0;
  for (int k = 0; k < blocks; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - radius) / (k + 1);
    if (k + 1 == blocks || sorted[k + 1] <= candidate) {
      theta = candidate;
      break;
    }
  }
  Vector out = v;
  for (int i = 0; i < blocks; ++i) {
    const double shrunk = std::max(norms[i] - theta, 0.0);
    auto seg = out.segment(i * block_size, block_size);
    seg = norms[i] > 0 ? Vector(seg * (shrunk / norms[i]))
                       : Vector(Vector::Zero(block_size));
  }
  // theta carries the rounding error of the input norms; rescale so the
  // result lands on the boundary to working precision.
  double projected = 0.0;
  for (int i = 0; i < blocks; ++i) {
    projected += segment_norm(out, i * block_size, block_size);
  }
  if (projected > radius) out *= radius / projected;
  return out;
}

OGD::OGD(OGDConfig config, Vector initial)
    : config_(config), point_(std::move(initial)) {
  if (config_.scale <= 0) throw ConfigError("ogd: step scale must be positive");
  if (config_.projection != ProjectionKind::kNone && config_.radius < 0) {
    throw ConfigError("ogd: projection radius must be nonnegative");
  }
  if (config_.projection == ProjectionKind::kBlockNormSum &&
      (config_.block_size <= 0 || point_.size() % config_.block_size != 0)) {
    throw ConfigError("ogd: block size must divide the parameter length");
  }
  point_ = project(point_);
}

double OGD::step_size() const {
  const int t = updates_ + 1;
  switch (config_.schedule) {
    case StepSchedule::kInverseSqrt:
      return config_.scale / std::sqrt(static_cast<double>(t));
    case StepSchedule::kConstant:
      return config_.scale;
  }
  return config_.scale;
}

Vector OGD::project(const Vector& v) const {
  Vector out;
  switch (config_.projection) {
    case ProjectionKind::kNone:
      return v;
    case ProjectionKind::kBall: {
      const double n = segment_norm(v, 0, v.size());
      out = n > config_.radius ? Vector(v * (config_.radius / n)) : v;
      break;
    }
    case ProjectionKind::kBlockNormSum:
      out = project_block_norm_sum(v, config_.block_size, config_.radius);
      break;
  }
  // Rescaling can overshoot the boundary by an ulp; pull back inside so
  // membership holds exactly.
  for (int k = 0; k < 64 && !contains(out); ++k) out *= 1.0 - 0x1p-52;
  return out;
}

bool OGD::contains(const Vector& v, double slack) const {
  switch (config_.projection) {
    case ProjectionKind::kNone:
      return true;
    case ProjectionKind::kBall:
      return segment_norm(v, 0, v.size()) <= config_.radius + slack;
    case ProjectionKind::kBlockNormSum: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < v.size(); i += config_.block_size) {
        total += segment_norm(v, i, config_.block_size);
      }
      return total <= config_.radius + slack;
    }
  }
  return true;
}

void OGD::update(const Vector& gradient) {
  if (gradient.size() != point_.size()) {
    throw ConfigError("ogd: gradient has dimension " +
                      std::to_string(gradient.size()) + ", expected " +
                      std::to_string(point_.size()));
  }
  if (!gradient.allFinite()) {
    throw NumericalError("ogd: non-finite gradient at update " +
                         std::to_string(updates_ + 1));
  }
  const double eta = step_size();
  Vector next = project(point_ - eta * gradient);
  last_step_norm_ = (next - point_).norm();
  // Projection onto a convex set containing the current point is
  // nonexpansive, so the step never exceeds eta * ||g||, up to the rounding
  // of the subtraction at the scale of the iterate.
  const double bound = eta * gradient.norm();
  const double rounding = 1e-13 * (1.0 + point_.norm());
  if (last_step_norm_ > bound * (1 + 1e-9) + rounding) {
    throw NumericalError("ogd: iterate moved " +
                         format_double(last_step_norm_) +
                         ", more than eta*|g| = " + format_double(bound));
  }
  point_ = std::move(next);
  ++updates_;
}

}  // namespace nsc
