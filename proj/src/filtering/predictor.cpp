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

#include "nsc/filtering/predictor.hpp"

#include "nsc/error.hpp"

namespace nsc {
namespace {

void push_front(std::deque<Vector>& q, const Vector& v, int cap) {
  if (cap == 0) return;
  q.push_front(v);
  if (static_cast<int>(q.size()) > cap) q.pop_back();
}

}  // namespace

LinearPredictor::LinearPredictor(int dy, int du, int h, int k, OGDConfig ogd)
    : dy_(dy),
      du_(du),
      h_(h),
      k_(k),
      ogd_(ogd, Vector::Zero(static_cast<Eigen::Index>(dy) * (h * dy + k * du))) {
  if (dy < 1 || du < 0 || h < 0 || k < 0 || h + k == 0) {
    throw ConfigError("linear predictor: need dy >= 1 and h + k >= 1");
  }
}

Vector LinearPredictor::features() const {
  Vector z = Vector::Zero(h_ * dy_ + k_ * du_);
  for (int i = 0; i < static_cast<int>(ys_.size()); ++i) {
    z.segment(i * dy_, dy_) = ys_[i];
  }
  for (int j = 0; j < static_cast<int>(us_.size()); ++j) {
    z.segment(h_ * dy_ + j * du_, du_) = us_[j];
  }
  return z;
}

Matrix LinearPredictor::as_theta(const Vector& flat) const {
  return Eigen::Map<const Matrix>(flat.data(), dy_, h_ * dy_ + k_ * du_);
}

Matrix LinearPredictor::theta() const { return as_theta(ogd_.point()); }

Matrix LinearPredictor::M1(int i) const {
  if (i < 1 || i > h_) throw ConfigError("linear predictor: M1 index");
  return theta().middleCols((i - 1) * dy_, dy_);
}

Matrix LinearPredictor::M2(int j) const {
  if (j < 1 || j > k_) throw ConfigError("linear predictor: M2 index");
  return theta().middleCols(h_ * dy_ + (j - 1) * du_, du_);
}

Vector LinearPredictor::predict() const { return theta() * features(); }

double LinearPredictor::loss_at(const Vector& theta, const Vector& y) const {
  return (y - as_theta(theta) * features()).squaredNorm();
}

Vector LinearPredictor::gradient_at(const Vector& theta,
                                    const Vector& y) const {
  const Vector z = features();
  const Matrix g = -2.0 * (y - as_theta(theta) * z) * z.transpose();
  return Eigen::Map<const Vector>(g.data(), g.size());
}

double LinearPredictor::learn(const Vector& y) {
  if (y.size() != dy_) throw ConfigError("linear predictor: y has wrong size");
  const double loss = loss_at(ogd_.point(), y);
  ogd_.update(gradient_at(ogd_.point(), y));
  record_observation(y);
  return loss;
}

void LinearPredictor::record_observation(const Vector& y) {
  if (y.size() != dy_) throw ConfigError("linear predictor: y has wrong size");
  push_front(ys_, y, h_);
}

void LinearPredictor::observe_control(const Vector& u) {
  if (u.size() != du_) throw ConfigError("linear predictor: u has wrong size");
  push_front(us_, u, k_);
}

LinearFit least_squares_fit(const Matrix& regressors, const Matrix& targets) {
  if (regressors.cols() != targets.cols() || regressors.cols() == 0) {
    throw ConfigError("least squares: sample counts differ or are zero");
  }
  const Matrix gram = regressors * regressors.transpose();
  const Matrix cross = targets * regressors.transpose();
  LinearFit fit;
  fit.theta = cross * pseudo_inverse(0.5 * (gram + gram.transpose()));
  fit.mse = (targets - fit.theta * regressors).colwise().squaredNorm().mean();
  return fit;
}

LinearFit fit_linear_predictor(const std::vector<Vector>& ys,
                               const std::vector<Vector>& us, int h, int k) {
  if (ys.empty() || ys.size() != us.size()) {
    throw ConfigError("linear fit: need equally long, non-empty traces");
  }
  const int dy = static_cast<int>(ys[0].size());
  const int du = static_cast<int>(us[0].size());
  LinearPredictor layout(dy, du, h, k, OGDConfig{});
  const int T = static_cast<int>(ys.size());
  Matrix Z(h * dy + k * du, T);
  Matrix Y(dy, T);
  for (int t = 0; t < T; ++t) {
    Z.col(t) = layout.features();
    Y.col(t) = ys[t];
    layout.record_observation(ys[t]);
    layout.observe_control(us[t]);
  }
  return least_squares_fit(Z, Y);
}

}  // namespace nsc
