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

#ifndef NSC_LDS_DIAGNOSTICS_HPP_
#define NSC_LDS_DIAGNOSTICS_HPP_

#include <functional>
#include <optional>

#include "nsc/matrix.hpp"

namespace nsc {

// Largest eigenvalue modulus, from a dense real Schur-based eigensolver.
double spectral_radius(const Matrix& m);

// Estimate of the spectral radius from ||M^k||^(1/k) at k = max_power. Only
// used as a cross-check of spectral_radius.
double power_radius_estimate(const Matrix& m, int max_power = 200);

// P = sum_t (A^t)' A^t, truncated once a term's norm falls below tol.
// Returns nullopt when rho(A) >= 1 - tol or the series has not converged
// within max_terms. A returned P satisfies P >= I and P - A'PA > 0.
std::optional<Matrix> lyapunov_certificate(const Matrix& A, double tol = 1e-12,
                                           int max_terms = 100000);

struct ControllabilityReport {
  Matrix kalman;  // [B, AB, ..., A^{r-1} B]
  int rank = 0;
  // ||K_r^+||, the largest singular value of the pseudo-inverse. Infinite
  // when K_r is identically zero.
  double pinv_norm = 0.0;
};

ControllabilityReport controllability(const Matrix& A, const Matrix& B,
                                      int horizon);

// Rank of [C; CA; ...; CA^{d_x - 1}].
int observability_rank(const Matrix& A, const Matrix& C);

// (kappa, delta) with ||M^i|| <= kappa (1 - delta)^i for i <= max_power.
// delta is taken from the spectral radius, halfway to 1; kappa is then the
// smallest constant that makes the bound hold over the measured range.
struct DecayConstants {
  double kappa = 0.0;
  double delta = 0.0;
};
DecayConstants decay_constants(const Matrix& m, int max_power = 200);

// Same measurement for the sequence ||L M^i|| (used for the tail of K(A+BK)^i).
DecayConstants decay_constants(const Matrix& left, const Matrix& m,
                               int max_power);

}  // namespace nsc

#endif  // NSC_LDS_DIAGNOSTICS_HPP_
