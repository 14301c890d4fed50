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

#include "nsc/filtering/kalman.hpp"

#include <string>

#include "nsc/error.hpp"
#include "nsc/lds/diagnostics.hpp"

namespace nsc {
namespace {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Nearest PSD matrix. A nearly singular innovation covariance produces large
// gains, and the Joseph form then loses its PSD guarantee to rounding.
Matrix clip_to_psd(const Matrix& m) {
  const Matrix sym = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() >= 0.0) {
    return sym;
  }
  const Matrix& V = eig.eigenvectors();
  return symmetrize(V * eig.eigenvalues().cwiseMax(0.0).asDiagonal() *
                    V.transpose());
}

void check_covariances(const Matrix& A, const Matrix& C, const Matrix& Sx,
                       const Matrix& Sy) {
  const auto n = A.rows();
  if (A.cols() != n || C.cols() != n || Sx.rows() != n || Sx.cols() != n ||
      Sy.rows() != C.rows() || Sy.cols() != C.rows()) {
    throw ConfigError("kalman: inconsistent matrix shapes");
  }
  if (!is_symmetric(Sx) || !is_psd(Sx)) {
    throw ConfigError("kalman: Sigma_x is not symmetric PSD");
  }
  if (!is_symmetric(Sy) || !is_psd(Sy)) {
    throw ConfigError("kalman: Sigma_y is not symmetric PSD");
  }
}

}  // namespace

KalmanState kalman_init(const Matrix& Sigma_x) {
  return KalmanState{Vector::Zero(Sigma_x.rows()), Sigma_x, Matrix()};
}

Matrix kalman_gain(const Matrix& A, const Matrix& C, const Matrix& Sigma_y,
                   const Matrix& Sigma) {
  const Matrix innovation = symmetrize(C * Sigma * C.transpose() + Sigma_y);
  return A * Sigma * C.transpose() * pseudo_inverse(innovation);
}

Matrix kalman_covariance_step(const Matrix& A, const Matrix& C,
                              const Matrix& Sigma_x, const Matrix& Sigma_y,
                              const Matrix& Sigma) {
  // Joseph form of A S A' - A S C' (C S C' + Sy)^+ C S A' + Sx. The two agree
  // for the optimal gain; this one stays PSD under rounding.
  const Matrix L = kalman_gain(A, C, Sigma_y, Sigma);
  const Matrix closed = A - L * C;
  return clip_to_psd(closed * Sigma * closed.transpose() +
                     L * Sigma_y * L.transpose() + Sigma_x);
}

KalmanState kalman_step(const KalmanState& state, const Matrix& A,
                        const Matrix& B, const Matrix& C, const Matrix& Sigma_x,
                        const Matrix& Sigma_y, const Vector& u,
                        const Vector& y) {
  check_covariances(A, C, Sigma_x, Sigma_y);
  if (B.rows() != A.rows() || u.size() != B.cols() || y.size() != C.rows() ||
      state.x_hat.size() != A.rows() || state.Sigma.rows() != A.rows() ||
      state.Sigma.cols() != A.rows()) {
    throw ConfigError("kalman: state, input or observation has wrong size");
  }
  KalmanState next;
  next.L = kalman_gain(A, C, Sigma_y, state.Sigma);
  next.x_hat = (A - next.L * C) * state.x_hat + B * u + next.L * y;
  const Matrix closed = A - next.L * C;
  next.Sigma = clip_to_psd(closed * state.Sigma * closed.transpose() +
                           next.L * Sigma_y * next.L.transpose() + Sigma_x);
  if (!all_finite(next.Sigma) || !all_finite(next.x_hat)) {
    throw NumericalError("kalman: non-finite estimate");
  }
  return next;
}

KalmanSteadyState kalman_steady_state(const Matrix& A, const Matrix& C,
                                      const Matrix& Sigma_x,
                                      const Matrix& Sigma_y, double tol,
                                      int max_iter) {
  check_covariances(A, C, Sigma_x, Sigma_y);
  KalmanSteadyState sol;
  Matrix Sigma = Sigma_x;
  for (int n = 1; n <= max_iter; ++n) {
    Matrix next = kalman_covariance_step(A, C, Sigma_x, Sigma_y, Sigma);
    if (!all_finite(next)) {
      throw NumericalError("kalman: covariance iteration diverged at "
                           "iteration " + std::to_string(n));
    }
    sol.residual = (next - Sigma).norm();
    Sigma = std::move(next);
    sol.iterations = n;
    if (sol.residual <= tol) {
      sol.Sigma = Sigma;
      sol.L = kalman_gain(A, C, Sigma_y, Sigma);
      const double rho = spectral_radius(A - sol.L * C);
      if (rho >= 1.0) {
        throw NumericalError("kalman: steady-state filter is not stable (rho=" +
                             format_double(rho) + "); is (A, C) detectable?");
      }
      return sol;
    }
  }
  throw NumericalError("kalman: no convergence within " +
                       std::to_string(max_iter) + " iterations, last residual " +
                       format_double(sol.residual));
}

}  // namespace nsc
