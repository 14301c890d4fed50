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

// Linear-quadratic baselines. Gains are signed so that u = K x.

#ifndef NSC_OPTIMAL_LQR_HPP_
#define NSC_OPTIMAL_LQR_HPP_

#include <functional>
#include <vector>

#include "nsc/matrix.hpp"

namespace nsc {

// Index t runs over 0..T. S[T] = Q, K[T] = 0, c[T] = 0.
struct LQRSolution {
  std::vector<Matrix> S;
  std::vector<Matrix> K;
  std::vector<double> c;
  double noise_variance = 0.0;
};

struct LQRStage {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
};

LQRSolution lqr_finite(const Matrix& A, const Matrix& B, const Matrix& Q,
                       const Matrix& R, int T, double noise_variance = 0.0);

// Time-varying backward pass; stages(t) supplies (A_t, B_t, Q_t, R_t).
LQRSolution lqr_finite(const std::function<LQRStage(int t)>& stages, int T,
                       double noise_variance = 0.0);

struct DARESolution {
  Matrix S;
  Matrix K;
  int iterations = 0;
  double residual = 0.0;
};

struct DAREOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  // Called with every value iterate, starting from S_0 = Q.
  std::function<void(const Matrix& S)> observer;
};

DARESolution dare_solve(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R, const DAREOptions& options = {});

// One value-iteration step S -> Q + A'SA - A'SB (R + B'SB)^+ B'SA.
Matrix riccati_step(const Matrix& A, const Matrix& B, const Matrix& Q,
                    const Matrix& R, const Matrix& S);

// K = -(R + B'SB)^+ B'SA.
Matrix riccati_gain(const Matrix& A, const Matrix& B, const Matrix& R,
                    const Matrix& S);

}  // namespace nsc

#endif  // NSC_OPTIMAL_LQR_HPP_
