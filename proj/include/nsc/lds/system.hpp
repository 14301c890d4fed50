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

#ifndef NSC_LDS_SYSTEM_HPP_
#define NSC_LDS_SYSTEM_HPP_

#include <functional>
#include <optional>

#include "nsc/matrix.hpp"

namespace nsc {

// Matrices governing one time step: x' = A x + B u + w, y = C x.
struct SystemMatrices {
  Matrix A;
  Matrix B;
  // Absent means the state is observed directly.
  std::optional<Matrix> C;
};

// A linear dynamical system, either time-invariant or driven by a provider
// that yields (A_t, B_t, C_t). Time indices start at 0.
class LinearSystem {
 public:
  using Provider = std::function<SystemMatrices(int t)>;

  LinearSystem(Matrix A, Matrix B, std::optional<Matrix> C = std::nullopt);

  // The provider must return matrices of the declared shapes for every t it
  // is queried at; shapes are checked on every query.
  static LinearSystem time_varying(int state_dim, int control_dim,
                                   int observation_dim, Provider provider,
                                   bool has_observation_matrix);

  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int observation_dim() const { return observation_dim_; }
  bool time_invariant() const { return !provider_; }
  bool fully_observed() const { return !has_c_; }

  SystemMatrices at(int t) const;
  // Non-null only for time-invariant systems.
  const SystemMatrices* fixed() const {
    return provider_ ? nullptr : &fixed_;
  }
  Matrix A(int t = 0) const;
  Matrix B(int t = 0) const;
  // Identity when the system has no observation matrix.
  Matrix C(int t = 0) const;

 private:
  LinearSystem() = default;
  void check_shapes(const SystemMatrices& m, int t) const;

  int state_dim_ = 0;
  int control_dim_ = 0;
  int observation_dim_ = 0;
  bool has_c_ = false;
  SystemMatrices fixed_;
  Provider provider_;
};

// A_t x + B_t u + w, evaluated as (A_t x + B_t u) + w.
// A_t x + B_t u, the noiseless part of a step.
Vector drift(const LinearSystem& system, const Vector& x, const Vector& u,
             int t);

Vector step(const LinearSystem& system, const Vector& x, const Vector& u,
            const Vector& w, int t);

// w with step(system, x, u, w, t) == x_next bit for bit whenever such a w
// exists within a few ulps of x_next - drift.
Vector recover_perturbation(const LinearSystem& system, const Vector& x,
                            const Vector& u, const Vector& x_next, int t);

// C_t x, or x itself for fully observed systems.
Vector observe(const LinearSystem& system, const Vector& x, int t);

}  // namespace nsc

#endif  // NSC_LDS_SYSTEM_HPP_
