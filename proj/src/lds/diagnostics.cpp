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

#include "nsc/lds/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "nsc/error.hpp"

namespace nsc {

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw ConfigError("spectral_radius: matrix must be square");
  }
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(m, /*computeEigenvectors=*/false);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("spectral_radius: eigensolver failed");
  }
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

double power_radius_estimate(const Matrix& m, int max_power) {
  if (m.rows() != m.cols()) {
    throw ConfigError("power_radius_estimate: matrix must be square");
  }
  // Renormalize every step so that large or tiny radii do not overflow.
  Matrix p = Matrix::Identity(m.rows(), m.cols());
  double log_scale = 0.0;
  for (int k = 0; k < max_power; ++k) {
    p = p * m;
    const double n = p.norm();
    if (n == 0.0) return 0.0;
    p /= n;
    log_scale += std::log(n);
  }
  return std::exp(log_scale / max_power);
}

std::optional<Matrix> lyapunov_certificate(const Matrix& A, double tol,
                                           int max_terms) {
  if (A.rows() != A.cols()) {
    throw ConfigError("lyapunov_certificate: matrix must be square");
  }
  if (spectral_radius(A) >= 1.0 - tol) return std::nullopt;
  const Eigen::Index n = A.rows();
  Matrix P = Matrix::Identity(n, n);
  Matrix power = Matrix::Identity(n, n);
  for (int t = 1; t <= max_terms; ++t) {
    power = power * A;
    const Matrix term = power.transpose() * power;
    P += term;
    if (term.norm() < tol) return P;
  }
  return std::nullopt;
}

ControllabilityReport controllability(const Matrix& A, const Matrix& B,
                                      int horizon) {
  if (A.rows() != A.cols() || B.rows() != A.rows()) {
    throw ConfigError("controllability: A must be square with B.rows == A.rows");
  }
  if (horizon < 1) throw ConfigError("controllability: horizon must be >= 1");
  const Eigen::Index n = A.rows();
  const Eigen::Index m = B.cols();
  ControllabilityReport report;
  report.kalman.resize(n, m * horizon);
  Matrix block = B;
  for (int i = 0; i < horizon; ++i) {
    report.kalman.middleCols(i * m, m) = block;
    block = A * block;
  }
  report.rank = numerical_rank(report.kalman);
  if (report.rank == 0) {
    report.pinv_norm = std::numeric_limits<double>::infinity();
  } else {
    report.pinv_norm = spectral_norm(pseudo_inverse(report.kalman));
  }
  return report;
}

int observability_rank(const Matrix& A, const Matrix& C) {
  if (A.rows() != A.cols() || C.cols() != A.rows()) {
    throw ConfigError("observability_rank: A square and C.cols == A.rows");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index p = C.rows();
  Matrix stacked(p * n, n);
  Matrix block = C;
  for (Eigen::Index i = 0; i < n; ++i) {
    stacked.middleRows(i * p, p) = block;
    block = block * A;
  }
  return numerical_rank(stacked);
}

DecayConstants decay_constants(const Matrix& left, const Matrix& m,
                               int max_power) {
  const double rho = spectral_radius(m);
  if (rho >= 1.0) {
    throw NumericalError("decay_constants: matrix is not stable (rho=" +
                         std::to_string(rho) + ")");
  }
  DecayConstants dc;
  dc.delta = 0.5 * (1.0 - rho);
  const double rate = 1.0 - dc.delta;
  Matrix power = Matrix::Identity(m.rows(), m.cols());
  double scale = 1.0;
  for (int i = 0; i <= max_power; ++i) {
    const double n = spectral_norm(left * power);
    dc.kappa = std::max(dc.kappa, n / scale);
    power = power * m;
    scale *= rate;
  }
  return dc;
}

DecayConstants decay_constants(const Matrix& m, int max_power) {
  return decay_constants(Matrix::Identity(m.rows(), m.rows()), m, max_power);
}

}  // namespace nsc
