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

#ifndef NSC_LDS_LINEARIZE_HPP_
#define NSC_LDS_LINEARIZE_HPP_

#include <functional>

#include "nsc/matrix.hpp"

namespace nsc {

// x_{t+1} = f(x_t, u_t) for a nonlinear, deterministic system.
using DynamicsFunction = std::function<Vector(const Vector& x, const Vector& u)>;

struct Jacobians {
  Matrix A;  // d f / d x
  Matrix B;  // d f / d u
};

// Central finite-difference Jacobians at (x_bar, u_bar). Throws
// NumericalError if f produces a non-finite value.
Jacobians linearize(const DynamicsFunction& f, const Vector& x_bar,
                    const Vector& u_bar, double fd_step = 1e-5);

}  // namespace nsc

#endif  // NSC_LDS_LINEARIZE_HPP_
