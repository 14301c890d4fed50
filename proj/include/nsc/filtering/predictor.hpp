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

// Linear predictors over past observations and controls, learned online by
// projected gradient descent or fit offline by least squares.

#ifndef NSC_FILTERING_PREDICTOR_HPP_
#define NSC_FILTERING_PREDICTOR_HPP_

#include <deque>
#include <vector>

#include "nsc/matrix.hpp"
#include "nsc/online/ogd.hpp"

namespace nsc {

// y_hat_t = sum_i M1_i y_{t-i} + sum_j M2_j u_{t-j}, i = 1..h, j = 1..k.
//
// Per step: predict(), then learn(y_t), then observe_control(u_t). Histories
// before the first step are zero. The blocks sit side by side in
// Theta = [M1_1 .. M1_h M2_1 .. M2_k], so y_hat = Theta z; the optimizer holds
// Theta in column-major order.
class LinearPredictor {
 public:
  LinearPredictor(int dy, int du, int h, int k, OGDConfig ogd);

  Vector predict() const;
  // Squared loss of the current prediction; takes one gradient step and
  // appends y_t to the history.
  double learn(const Vector& y);
  void observe_control(const Vector& u);
  // Appends y_t to the history without learning.
  void record_observation(const Vector& y);

  // Regressor z_t for the next prediction.
  Vector features() const;
  double loss_at(const Vector& theta, const Vector& y) const;
  Vector gradient_at(const Vector& theta, const Vector& y) const;

  Matrix theta() const;
  Matrix M1(int i) const;  // i = 1..h
  Matrix M2(int j) const;  // j = 1..k
  const OGD& optimizer() const { return ogd_; }
  int dy() const { return dy_; }
  int du() const { return du_; }

 private:
  Matrix as_theta(const Vector& flat) const;

  int dy_, du_, h_, k_;
  OGD ogd_;
  std::deque<Vector> ys_;  // newest first
  std::deque<Vector> us_;
};

struct LinearFit {
  Matrix theta;  // d_y x (h d_y + k d_u), same layout as LinearPredictor
  double mse = 0.0;  // mean squared prediction error on the fitted trace
};

// Least-squares fit of the best fixed predictor in hindsight over a trace of
// observations y_0..y_{T-1} and controls u_0..u_{T-1}.
LinearFit fit_linear_predictor(const std::vector<Vector>& ys,
                               const std::vector<Vector>& us, int h, int k);

// Ordinary least squares: minimize sum_t ||targets_t - Theta x_t||^2 through
// accumulated normal equations and a pseudo-inverse. Columns index samples.
LinearFit least_squares_fit(const Matrix& regressors, const Matrix& targets);

}  // namespace nsc

#endif  // NSC_FILTERING_PREDICTOR_HPP_
