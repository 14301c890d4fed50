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

#include "nsc/lds/system.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "nsc/error.hpp"

namespace nsc {
namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

LinearSystem::LinearSystem(Matrix A, Matrix B, std::optional<Matrix> C) {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw ConfigError("A must be square and non-empty, got " + shape(A));
  }
  if (B.rows() != A.rows() || B.cols() == 0) {
    throw ConfigError("B must have " + std::to_string(A.rows()) +
                      " rows, got " + shape(B));
  }
  if (C && (C->cols() != A.rows() || C->rows() == 0)) {
    throw ConfigError("C must have " + std::to_string(A.rows()) +
                      " columns, got " + shape(*C));
  }
  if (!A.allFinite() || !B.allFinite() || (C && !C->allFinite())) {
    throw ConfigError("system matrices must be finite");
  }
  state_dim_ = static_cast<int>(A.rows());
  control_dim_ = static_cast<int>(B.cols());
  observation_dim_ = C ? static_cast<int>(C->rows()) : state_dim_;
  has_c_ = C.has_value();
  fixed_ = SystemMatrices{std::move(A), std::move(B), std::move(C)};
}

LinearSystem LinearSystem::time_varying(int state_dim, int control_dim,
                                        int observation_dim, Provider provider,
                                        bool has_observation_matrix) {
  if (state_dim <= 0 || control_dim <= 0 || observation_dim <= 0) {
    throw ConfigError("system dimensions must be positive");
  }
  if (!has_observation_matrix && observation_dim != state_dim) {
    throw ConfigError("fully observed system needs observation_dim == state_dim");
  }
  if (!provider) throw ConfigError("time-varying system needs a provider");
  LinearSystem sys;
  sys.state_dim_ = state_dim;
  sys.control_dim_ = control_dim;
  sys.observation_dim_ = observation_dim;
  sys.has_c_ = has_observation_matrix;
  sys.provider_ = std::move(provider);
  return sys;
}

void LinearSystem::check_shapes(const SystemMatrices& m, int t) const {
  const bool ok = m.A.rows() == state_dim_ && m.A.cols() == state_dim_ &&
                  m.B.rows() == state_dim_ && m.B.cols() == control_dim_ &&
                  (!has_c_ || (m.C && m.C->rows() == observation_dim_ &&
                               m.C->cols() == state_dim_));
  if (!ok) {
    throw ConfigError("system provider returned wrong shapes at t=" +
                      std::to_string(t));
  }
}

SystemMatrices LinearSystem::at(int t) const {
  if (!provider_) return fixed_;
  SystemMatrices m = provider_(t);
  check_shapes(m, t);
  return m;
}

Matrix LinearSystem::A(int t) const {
  return provider_ ? at(t).A : fixed_.A;
}

Matrix LinearSystem::B(int t) const {
  return provider_ ? at(t).B : fixed_.B;
}

Matrix LinearSystem::C(int t) const {
  if (!has_c_) return Matrix::Identity(state_dim_, state_dim_);
  return provider_ ? *at(t).C : *fixed_.C;
}

Vector drift(const LinearSystem& system, const Vector& x, const Vector& u,
             int t) {
  if (x.size() != system.state_dim() || u.size() != system.control_dim()) {
    throw ConfigError("step: dimension mismatch (x " +
                      std::to_string(x.size()) + ", u " +
                      std::to_string(u.size()) + ")");
  }
  if (const SystemMatrices* fixed = system.fixed()) {
    return fixed->A * x + fixed->B * u;
  }
  const SystemMatrices m = system.at(t);
  return m.A * x + m.B * u;
}

Vector step(const LinearSystem& system, const Vector& x, const Vector& u,
            const Vector& w, int t) {
  if (w.size() != system.state_dim()) {
    throw ConfigError("step: perturbation has dimension " +
                      std::to_string(w.size()) + ", expected " +
                      std::to_string(system.state_dim()));
  }
  return drift(system, x, u, t) + w;
}

Vector recover_perturbation(const LinearSystem& system, const Vector& x,
                            const Vector& u, const Vector& x_next, int t) {
  const Vector d = drift(system, x, u, t);
  Vector w = x_next - d;
  // The subtraction can round; nudge by ulps until d + w lands on x_next.
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (d(i) + w(i) == x_next(i) || !std::isfinite(w(i))) continue;
    const double start = w(i);
    double up = start, down = start;
    for (int k = 0; k < 64; ++k) {
      up = std::nextafter(up, HUGE_VAL);
      down = std::nextafter(down, -HUGE_VAL);
      if (d(i) + up == x_next(i)) {
        w(i) = up;
        break;
      }
      if (d(i) + down == x_next(i)) {
        w(i) = down;
        break;
      }
    }
  }
  return w;
}

Vector observe(const LinearSystem& system, const Vector& x, int t) {
  if (x.size() != system.state_dim()) {
    throw ConfigError("observe: state has dimension " +
                      std::to_string(x.size()) + ", expected " +
                      std::to_string(system.state_dim()));
  }
  if (system.fully_observed()) return x;
  return system.C(t) * x;
}

}  // namespace nsc
