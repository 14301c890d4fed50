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

#include "nsc/lds/linearize.hpp"

#include "nsc/error.hpp"

namespace nsc {
namespace {

Vector checked(const DynamicsFunction& f, const Vector& x, const Vector& u) {
  Vector v = f(x, u);
  if (!v.allFinite()) {
    throw NumericalError("linearize: dynamics evaluated to a non-finite value");
  }
  return v;
}

}  // namespace

Jacobians linearize(const DynamicsFunction& f, const Vector& x_bar,
                    const Vector& u_bar, double fd_step) {
  if (fd_step <= 0.0) throw ConfigError("linearize: fd_step must be positive");
  const Vector f0 = checked(f, x_bar, u_bar);
  const Eigen::Index n = f0.size();
  Jacobians J{Matrix(n, x_bar.size()), Matrix(n, u_bar.size())};
  for (Eigen::Index i = 0; i < x_bar.size(); ++i) {
    Vector plus = x_bar, minus = x_bar;
    plus(i) += fd_step;
    minus(i) -= fd_step;
    J.A.col(i) =
        (checked(f, plus, u_bar) - checked(f, minus, u_bar)) / (2 * fd_step);
  }
  for (Eigen::Index i = 0; i < u_bar.size(); ++i) {
    Vector plus = u_bar, minus = u_bar;
    plus(i) += fd_step;
    minus(i) -= fd_step;
    J.B.col(i) =
        (checked(f, x_bar, plus) - checked(f, x_bar, minus)) / (2 * fd_step);
  }
  return J;
}

}  // namespace nsc
