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

#include <cmath>

#include "doctest.h"
#include "nsc/error.hpp"
#include "nsc/lds/diagnostics.hpp"
#include "nsc/matrix.hpp"
#include "nsc/optimal/lqr.hpp"
#include "support/oracles.hpp"

using namespace nsc;
using nsc::testing::random_matrix;
using nsc::testing::random_with_radius;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Matrix random_psd(std::mt19937_64& rng, int n) {
  const Matrix L = random_matrix(rng, n, n);
  return L * L.transpose();
}

// Series oracle: sum_t (A^t)' Q A^t up to `terms` terms.
Matrix lyapunov_series(const Matrix& A, const Matrix& Q, int terms) {
  Matrix total = Matrix::Zero(A.rows(), A.cols());
  Matrix power = Matrix::Identity(A.rows(), A.cols());
  for (int t = 0; t < terms; ++t) {
    total += power.transpose() * Q * power;
    power = power * A;
  }
  return total;
}

}  // namespace

TEST_CASE("lqr base case") {
  const auto sol = lqr_finite(scalar(1), scalar(1), scalar(2), scalar(1), 5);
  CHECK(sol.S[5] == scalar(2));
  CHECK(sol.K[5].isZero(0.0));
  CHECK(sol.c[5] == 0.0);
}

TEST_CASE("lqr one backward step by hand") {
  const auto sol = lqr_finite(scalar(1), scalar(1), scalar(1), scalar(1), 1);
  CHECK(sol.K[0](0, 0) == doctest::Approx(-0.5));
  CHECK(sol.S[0](0, 0) == doctest::Approx(1.5));
}

TEST_CASE("lqr without control authority") {
  std::mt19937_64 rng(3);
  const Matrix A = random_with_radius(rng, 3, 0.9);
  const Matrix Q = random_psd(rng, 3);
  const int T = 12;
  const auto sol = lqr_finite(A, Matrix::Zero(3, 1), Q, scalar(1), T, 0.5);
  for (int t = 0; t <= T; ++t) {
    CHECK(sol.K[t].isZero(0.0));
    CHECK((sol.S[t] - lyapunov_series(A, Q, T - t + 1)).norm() <= 1e-10);
  }
  CHECK(sol.c[T - 1] == doctest::Approx(0.5 * Q.trace()));
}

TEST_CASE("lqr value matrices stay PSD and reject bad costs") {
  std::mt19937_64 rng(4);
  const Matrix A = random_matrix(rng, 3, 3);
  const Matrix B = random_matrix(rng, 3, 2);
  const auto sol = lqr_finite(A, B, random_psd(rng, 3), Matrix::Identity(2, 2),
                              40);
  for (const auto& S : sol.S) CHECK(min_symmetric_eigenvalue(S) >= -1e-9);
  CHECK_THROWS_AS(lqr_finite(A, B, -Matrix::Identity(3, 3),
                             Matrix::Identity(2, 2), 3),
                  ConfigError);
  CHECK_THROWS_AS(
      lqr_finite(A, B, Matrix::Identity(3, 3), scalar(1), 3), ConfigError);
}

TEST_CASE("time-varying lqr agrees with the fixed recursion when stages match") {
  std::mt19937_64 rng(8);
  const LQRStage stage{random_matrix(rng, 2, 2), random_matrix(rng, 2, 1),
                       Matrix::Identity(2, 2), scalar(1)};
  const auto tv = lqr_finite([&](int) { return stage; }, 10);
  const auto ti = lqr_finite(stage.A, stage.B, stage.Q, stage.R, 10);
  for (int t = 0; t <= 10; ++t) CHECK(tv.K[t] == ti.K[t]);

  // Varying stages: the pass uses A_{t-1} to produce K_{t-1}.
  const auto varying = lqr_finite(
      [](int t) {
        return LQRStage{scalar(1.0 + 0.1 * t), scalar(1), scalar(1), scalar(1)};
      },
      3);
  const double S3 = 1.0;
  const double a2 = 1.2;
  CHECK(varying.K[2](0, 0) == doctest::Approx(-S3 * a2 / (1 + S3)));
}

TEST_CASE("dare golden ratio") {
  const auto sol = dare_solve(scalar(1), scalar(1), scalar(1), scalar(1));
  const double phi = (1 + std::sqrt(5.0)) / 2;
  CHECK(sol.S(0, 0) == doctest::Approx(phi).epsilon(1e-9));
  CHECK(sol.K(0, 0) == doctest::Approx(-phi / (1 + phi)).epsilon(1e-9));
  CHECK(sol.residual <= 1e-10);
}

TEST_CASE("dare with A = 0 stops after one iteration") {
  std::mt19937_64 rng(2);
  const Matrix Q = random_psd(rng, 2);
  const auto sol = dare_solve(Matrix::Zero(2, 2), random_matrix(rng, 2, 1), Q,
                              scalar(1));
  CHECK(sol.iterations == 1);
  CHECK(sol.S == Q);
}

TEST_CASE("dare without control is the lyapunov series") {
  std::mt19937_64 rng(5);
  const Matrix A = random_with_radius(rng, 3, 0.7);
  const Matrix Q = random_psd(rng, 3);
  const auto sol = dare_solve(A, Matrix::Zero(3, 1), Q, scalar(1));
  CHECK((sol.S - lyapunov_series(A, Q, 400)).norm() <= 1e-9);
}

TEST_CASE("dare reports non-convergence and non-stabilizable pairs") {
  DAREOptions opt;
  opt.max_iter = 3;
  CHECK_THROWS_AS(
      dare_solve(scalar(0.99), scalar(0.01), scalar(1), scalar(1), opt),
      NumericalError);
  CHECK_THROWS_AS(dare_solve(scalar(1.5), scalar(0), scalar(1), scalar(1)),
                  NumericalError);
}

TEST_CASE("dare value iterates on random stabilizable instances") {
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(30 + seed);
    const Matrix A = random_with_radius(rng, 3, 1.3);
    const Matrix B = random_matrix(rng, 3, 2);
    const Matrix Q = random_psd(rng, 3) + 0.1 * Matrix::Identity(3, 3);
    const Matrix R = Matrix::Identity(2, 2);
    double last_trace = -1.0;
    bool monotone = true;
    bool psd = true;
    DAREOptions opt;
    opt.observer = [&](const Matrix& S) {
      psd = psd && min_symmetric_eigenvalue(S) >= -1e-9;
      monotone = monotone && S.trace() >= last_trace - 1e-9;
      last_trace = S.trace();
    };
    const auto sol = dare_solve(A, B, Q, R, opt);
    CHECK(psd);
    CHECK(monotone);
    CHECK((riccati_step(A, B, Q, R, sol.S) - sol.S).norm() <= 1e-10);
    CHECK(spectral_radius(A + B * sol.K) < 1.0);
  }
}

TEST_CASE("dare gain beats perturbed gains in simulation") {
  const double a = 1.0, b = 1.0;
  const auto sol = dare_solve(scalar(a), scalar(b), scalar(1), scalar(1));
  const double k_star = sol.K(0, 0);
  const int T = 10000;
  std::mt19937_64 noise_rng(77);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(T);
  for (auto& v : w) v = normal(noise_rng);

  auto run = [&](double k, std::vector<double>* per_step) {
    double x = 0.0, total = 0.0;
    for (int t = 0; t < T; ++t) {
      const double u = k * x;
      const double c = x * x + u * u;
      total += c;
      if (per_step) per_step->push_back(c);
      x = a * x + b * u + w[t];
    }
    return total / T;
  };
  std::vector<double> costs;
  const double best = run(k_star, &costs);
  double var = 0.0;
  for (double c : costs) var += (c - best) * (c - best);
  const double se = std::sqrt(var / (T - 1) / T);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (double eps : {0.01, 0.05}) {
    for (int i = 0; i < 10; ++i) {
      CHECK(best <= run(k_star + eps * unit(rng), nullptr) + se);
    }
  }
}
