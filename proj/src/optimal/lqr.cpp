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

#include "nsc/optimal/lqr.hpp"

#include <string>

#include "nsc/error.hpp"
#include "nsc/lds/diagnostics.hpp"

namespace nsc {
namespace {

void check_stage(const LQRStage& s, int t) {
  const auto where = " at t=" + std::to_string(t);
  if (s.A.rows() != s.A.cols() || s.B.rows() != s.A.rows() ||
      s.Q.rows() != s.A.rows() || s.Q.cols() != s.A.rows() ||
      s.R.rows() != s.B.cols() || s.R.cols() != s.B.cols()) {
    throw ConfigError("lqr: inconsistent matrix shapes" + where);
  }
  if (!is_symmetric(s.Q) || !is_psd(s.Q)) {
    throw ConfigError("lqr: Q is not symmetric PSD" + where);
  }
  if (!is_symmetric(s.R) || !is_psd(s.R)) {
    throw ConfigError("lqr: R is not symmetric PSD" + where);
  }
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

Matrix riccati_gain(const Matrix& A, const Matrix& B, const Matrix& R,
                    const Matrix& S) {
  const Matrix gram = R + B.transpose() * S * B;
  return -pseudo_inverse(symmetrize(gram)) * (B.transpose() * S * A);
}

Matrix riccati_step(const Matrix& A, const Matrix& B, const Matrix& Q,
                    const Matrix& R, const Matrix& S) {
  const Matrix SB = S * B;
  const Matrix gram = symmetrize(R + B.transpose() * SB);
  const Matrix cross = A.transpose() * SB;
  return symmetrize(Q + A.transpose() * S * A -
                    cross * pseudo_inverse(gram) * cross.transpose());
}

LQRSolution lqr_finite(const std::function<LQRStage(int t)>& stages, int T,
                       double noise_variance) {
  if (T < 0) throw ConfigError("lqr: horizon must be nonnegative");
  if (noise_variance < 0) throw ConfigError("lqr: noise variance must be >= 0");
  LQRSolution sol;
  sol.noise_variance = noise_variance;
  sol.S.resize(T + 1);
  sol.K.resize(T + 1);
  sol.c.assign(T + 1, 0.0);

  const LQRStage last = stages(T);
  check_stage(last, T);
  sol.S[T] = last.Q;
  sol.K[T] = Matrix::Zero(last.B.cols(), last.A.rows());
  for (int t = T; t >= 1; --t) {
    const LQRStage s = stages(t - 1);
    check_stage(s, t - 1);
    const Matrix& next = sol.S[t];
    const Matrix K = riccati_gain(s.A, s.B, s.R, next);
    const Matrix closed = s.A + s.B * K;
    sol.K[t - 1] = K;
    sol.S[t - 1] = symmetrize(s.Q + K.transpose() * s.R * K +
                              closed.transpose() * next * closed);
    sol.c[t - 1] = sol.c[t] + noise_variance * next.trace();
  }
  return sol;
}

LQRSolution lqr_finite(const Matrix& A, const Matrix& B, const Matrix& Q,
                       const Matrix& R, int T, double noise_variance) {
  const LQRStage stage{A, B, Q, R};
  return lqr_finite([&](int) { return stage; }, T, noise_variance);
}

DARESolution dare_solve(const Matrix& A, const Matrix& B, const Matrix& Q,
                        const Matrix& R, const DAREOptions& options) {
  check_stage(LQRStage{A, B, Q, R}, 0);
  DARESolution sol;
  Matrix S = Q;
  if (options.observer) options.observer(S);
  for (int n = 1; n <= options.max_iter; ++n) {
    Matrix next = riccati_step(A, B, Q, R, S);
    if (!all_finite(next)) {
      throw NumericalError("dare: value iteration diverged at iteration " +
                           std::to_string(n));
    }
    if (options.observer) options.observer(next);
    sol.residual = (next - S).norm();
    S = std::move(next);
    sol.iterations = n;
    if (sol.residual <= options.tol) {
      sol.S = S;
      sol.K = riccati_gain(A, B, R, S);
      const double rho = spectral_radius(A + B * sol.K);
      if (rho >= 1.0) {
        throw NumericalError("dare: converged gain is not stabilizing (rho=" +
                             format_double(rho) + "); is (A, B) stabilizable?");
      }
      return sol;
    }
  }
  throw NumericalError("dare: no convergence within " +
                       std::to_string(options.max_iter) +
                       " iterations, last residual " +
                       format_double(sol.residual));
}

}  // namespace nsc
