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

// Kalman filter in one-step-prediction form: the state estimate after a step
// is the prediction of the next state given observations up to now.

#ifndef NSC_FILTERING_KALMAN_HPP_
#define NSC_FILTERING_KALMAN_HPP_

#include "nsc/matrix.hpp"

namespace nsc {

struct KalmanState {
  Vector x_hat;
  Matrix Sigma;
  Matrix L;  // gain used by the most recent step; empty before the first
};

// x_hat = 0 and Sigma = Sigma_x.
KalmanState kalman_init(const Matrix& Sigma_x);

// L = A S C' (C S C' + Sy)^+
// x_hat' = (A - L C) x_hat + B u + L y
// S' = A S A' - A S C' (C S C' + Sy)^+ C S A' + Sx
// Throws ConfigError on shape mismatch or non-PSD covariances.
KalmanState kalman_step(const KalmanState& state, const Matrix& A,
                        const Matrix& B, const Matrix& C, const Matrix& Sigma_x,
                        const Matrix& Sigma_y, const Vector& u,
                        const Vector& y);

// Covariance recursion alone.
Matrix kalman_covariance_step(const Matrix& A, const Matrix& C,
                              const Matrix& Sigma_x, const Matrix& Sigma_y,
                              const Matrix& Sigma);
Matrix kalman_gain(const Matrix& A, const Matrix& C, const Matrix& Sigma_y,
                   const Matrix& Sigma);

struct KalmanSteadyState {
  Matrix Sigma;
  Matrix L;
  int iterations = 0;
  double residual = 0.0;
};

// Fixed-point iteration from Sigma_0 = Sigma_x. Throws NumericalError on
// divergence, non-convergence or when A - L C is not stable.
KalmanSteadyState kalman_steady_state(const Matrix& A, const Matrix& C,
                                      const Matrix& Sigma_x,
                                      const Matrix& Sigma_y,
                                      double tol = 1e-10,
                                      int max_iter = 100000);

}  // namespace nsc

#endif  // NSC_FILTERING_KALMAN_HPP_
