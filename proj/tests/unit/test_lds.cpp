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
#include <sstream>

#include "doctest.h"
#include "nsc/error.hpp"
#include "nsc/lds/cost.hpp"
#include "nsc/lds/diagnostics.hpp"
#include "nsc/lds/linearize.hpp"
#include "nsc/lds/perturbation.hpp"
#include "nsc/lds/simulate.hpp"
#include "nsc/lds/system.hpp"
#include "nsc/matrix.hpp"
#include "support/oracles.hpp"

using namespace nsc;
using nsc::testing::naive_multiply;
using nsc::testing::random_matrix;
using nsc::testing::random_vector;
using nsc::testing::random_with_radius;

namespace {

Matrix mat(int r, int c, std::initializer_list<double> values) {
  Matrix m(r, c);
  auto it = values.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  int i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

LinearSystem double_integrator(double dt = 0.1) {
  return LinearSystem(mat(2, 2, {1, dt, 0, 1}), mat(2, 1, {0, 1}));
}

}  // namespace

TEST_CASE("step on the zero fixed point") {
  const auto sys = double_integrator();
  CHECK(step(sys, Vector::Zero(2), Vector::Zero(1), Vector::Zero(2), 0)
            .isZero(0.0));
}

TEST_CASE("step on the double integrator") {
  const auto next =
      step(double_integrator(), vec({1, 2}), vec({3}), Vector::Zero(2), 0);
  CHECK(next(0) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(next(1) == doctest::Approx(5.0).epsilon(1e-15));

  // Force scaled by the time step: B = [0, dt].
  LinearSystem scaled(mat(2, 2, {1, 0.1, 0, 1}), mat(2, 1, {0, 0.1}));
  const auto v = step(scaled, vec({1, 2}), vec({3}), Vector::Zero(2), 0);
  CHECK(v(0) == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(v(1) == doctest::Approx(2.3).epsilon(1e-15));
}

TEST_CASE("step matches a naive multiply") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = random_matrix(rng, 4, 4);
    const Vector x = random_vector(rng, 4);
    const Vector w = random_vector(rng, 4);
    LinearSystem sys(A, Matrix::Zero(4, 2));
    const Vector got = step(sys, x, Vector::Zero(2), w, 0);
    CHECK((got - (naive_multiply(A, x) + w)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("step rejects mismatched dimensions") {
  CHECK_THROWS_AS(step(double_integrator(), Vector::Zero(3), Vector::Zero(1),
                       Vector::Zero(2), 0),
                  ConfigError);
  CHECK_THROWS_AS(LinearSystem(Matrix::Zero(2, 2), Matrix::Zero(3, 1)),
                  ConfigError);
}

TEST_CASE("time-varying systems use the provider") {
  auto sys = LinearSystem::time_varying(
      1, 1, 1,
      [](int t) {
        return SystemMatrices{Matrix::Constant(1, 1, t + 1.0),
                              Matrix::Ones(1, 1), std::nullopt};
      },
      false);
  CHECK(step(sys, vec({1}), vec({0}), vec({0}), 4)(0) == 5.0);
  CHECK_FALSE(sys.time_invariant());
}

TEST_CASE("observe") {
  const Vector x = vec({3, -1});
  CHECK(observe(double_integrator(), x, 0) == x);
  LinearSystem partial(Matrix::Identity(2, 2), Matrix::Zero(2, 1),
                       mat(1, 2, {1, 0}));
  CHECK(observe(partial, x, 0) == vec({3}));

  std::mt19937_64 rng(3);
  const Matrix C = random_matrix(rng, 3, 5);
  const Vector z = random_vector(rng, 5);
  LinearSystem sys(Matrix::Identity(5, 5), Matrix::Zero(5, 1), C);
  CHECK((observe(sys, z, 0) - naive_multiply(C, z)).cwiseAbs().maxCoeff() <=
        1e-12);
}

TEST_CASE("spectral radius examples") {
  CHECK(spectral_radius(mat(2, 2, {0, 1, 0, 0})) == doctest::Approx(0.0));
  CHECK(spectral_radius(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(spectral_radius(mat(2, 2, {0, 1, -1, 0})) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), ConfigError);
}

TEST_CASE("spectral radius of powers") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix M = random_matrix(rng, 4, 4, 0.5);
    const double rho = spectral_radius(M);
    Matrix power = M;
    for (int k = 2; k <= 5; ++k) {
      power = power * M;
      CHECK(std::abs(spectral_radius(power) - std::pow(rho, k)) <=
            1e-8 * std::max(1.0, std::pow(rho, k)));
    }
  }
}

TEST_CASE("power iteration agrees with the eigensolver") {
  std::mt19937_64 rng(8);
  const Matrix M = random_with_radius(rng, 4, 0.8);
  CHECK(power_radius_estimate(M, 400) == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("lyapunov certificate examples") {
  const auto zero = lyapunov_certificate(Matrix::Zero(2, 2));
  REQUIRE(zero.has_value());
  CHECK(zero->isApprox(Matrix::Identity(2, 2)));

  const auto half = lyapunov_certificate(Matrix::Constant(1, 1, 0.5));
  REQUIRE(half.has_value());
  CHECK((*half)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-11));

  CHECK_FALSE(lyapunov_certificate(Matrix::Constant(1, 1, 1.1)).has_value());
}

TEST_CASE("lyapunov certificate exists iff radius is below one") {
  std::mt19937_64 rng(21);
  const double tol = 1e-12;
  for (double radius : {0.3, 0.7, 0.95, 1.05, 1.5}) {
    for (int trial = 0; trial < 4; ++trial) {
      const Matrix A = random_with_radius(rng, 3, radius);
      const auto P = lyapunov_certificate(A, tol);
      CHECK(P.has_value() == (spectral_radius(A) < 1 - tol));
      if (P) {
        CHECK(min_symmetric_eigenvalue(*P - Matrix::Identity(3, 3)) >= -1e-9);
        const Matrix gap = *P - A.transpose() * *P * A;
        CHECK(min_symmetric_eigenvalue(0.5 * (gap + gap.transpose())) > 0);
      }
    }
  }
}

TEST_CASE("controllability examples") {
  const Matrix e1 = mat(2, 1, {1, 0});
  CHECK(controllability(Matrix::Identity(2, 2), e1, 2).rank == 1);

  const auto shift = controllability(mat(2, 2, {0, 0, 1, 0}), e1, 2);
  CHECK(shift.rank == 2);
  CHECK(shift.kalman.isApprox(Matrix::Identity(2, 2)));
  CHECK(shift.pinv_norm == doctest::Approx(1.0));

  CHECK(controllability(Matrix::Constant(1, 1, 0.7), Matrix::Zero(1, 1), 1)
            .rank == 0);
}

TEST_CASE("controllability rank is nondecreasing and stops") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 5;
    Matrix A = random_matrix(rng, n, n);
    // Block-diagonalize some instances so the rank stalls below n.
    if (trial % 2) A.block(0, 3, 3, 2).setZero(), A.block(3, 0, 2, 3).setZero();
    Matrix B = Matrix::Zero(n, 1);
    B.topRows(3) = random_matrix(rng, 3, 1);
    int previous = 0;
    bool stalled = false;
    for (int r = 1; r <= n + 2; ++r) {
      const int rank = controllability(A, B, r).rank;
      CHECK(rank >= previous);
      if (stalled) CHECK(rank == previous);
      if (r > 1 && rank == previous) stalled = true;
      previous = rank;
    }
  }
}

TEST_CASE("observability rank and duality") {
  CHECK(observability_rank(Matrix::Identity(3, 3), Matrix::Identity(3, 3)) ==
        3);
  CHECK(observability_rank(Matrix::Identity(2, 2), mat(1, 2, {1, 0})) == 1);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = random_matrix(rng, 4, 4);
    const Matrix C = random_matrix(rng, 1, 4);
    // Transposed controllability oracle built by hand.
    Matrix K(4, 4);
    Vector col = C.transpose();
    for (int i = 0; i < 4; ++i) {
      K.col(i) = col;
      col = A.transpose() * col;
    }
    Eigen::JacobiSVD<Matrix> svd(K);
    const auto s = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < s.size(); ++i) rank += s(i) > 1e-9 * s(0);
    CHECK(observability_rank(A, C) == rank);
  }
}

TEST_CASE("linearize reproduces linear maps") {
  std::mt19937_64 rng(4);
  const Matrix A0 = random_matrix(rng, 3, 3);
  const Matrix B0 = random_matrix(rng, 3, 2);
  const auto J = linearize([&](const Vector& x, const Vector& u) -> Vector {
    return A0 * x + B0 * u;
  }, random_vector(rng, 3), random_vector(rng, 2), 1e-5);
  CHECK((J.A - A0).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((J.B - B0).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("linearize the pendulum and the ventilator pressure") {
  const double dt = 0.05, g = 9.81, l = 1.3, m = 0.7;
  auto pendulum = [&](const Vector& x, const Vector& u) -> Vector {
    return vec({x(0) + dt * x(1),
                x(1) + dt * (u(0) - m * g * std::sin(x(0))) / (m * l * l)});
  };
  const auto J = linearize(pendulum, Vector::Zero(2), Vector::Zero(1));
  // d/dtheta of dt * (u - m g sin(theta)) / (m l^2) at theta = 0.
  CHECK(J.A(1, 0) == doctest::Approx(-dt * g / (l * l)).epsilon(1e-8));
  const auto unit = linearize(
      [&](const Vector& x, const Vector& u) -> Vector {
        return vec({x(0) + dt * x(1), x(1) + dt * (u(0) - g * std::sin(x(0)))});
      },
      Vector::Zero(2), Vector::Zero(1));
  CHECK(unit.A(1, 0) == doctest::Approx(-dt * g).epsilon(1e-8));
  CHECK(J.B(1, 0) == doctest::Approx(dt / (m * l * l)).epsilon(1e-8));

  const double c0 = 5, c1 = 2, c2 = 0.5;
  auto pressure = [&](const Vector& v, const Vector&) -> Vector {
    return vec({c0 + c1 * std::pow(v(0), -1.0 / 3) +
                c2 * std::pow(v(0), 5.0 / 3)});
  };
  const auto P = linearize(pressure, vec({1}), vec({0}));
  CHECK(P.A(0, 0) ==
        doctest::Approx(-c1 / 3 + 5 * c2 / 3).epsilon(1e-8));
}

TEST_CASE("linearize reports NaN evaluations") {
  auto bad = [](const Vector& x, const Vector&) -> Vector {
    return vec({std::log(x(0))});
  };
  CHECK_THROWS_AS(linearize(bad, vec({0}), vec({0})), NumericalError);
}

TEST_CASE("simulate with zero everything") {
  const auto sys = double_integrator();
  ZeroController zero(1);
  SimulationOptions opt;
  opt.horizon = 25;
  const auto traj =
      simulate(sys, zero, PerturbationSource::zero(2),
               CostFunction::quadratic(Matrix::Identity(2, 2),
                                       Matrix::Identity(1, 1)),
               opt);
  CHECK(traj.x.size() == 26);
  for (const auto& x : traj.x) CHECK(x.isZero(0.0));
  CHECK(traj.total_cost() == 0.0);
  CHECK(traj.empirical_gamma == 0.0);
}

TEST_CASE("simulate converges along the geometric series") {
  LinearSystem sys(Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1));
  ZeroController zero(1);
  SimulationOptions opt;
  opt.horizon = 60;
  const auto traj =
      simulate(sys, zero, PerturbationSource(ConstantNoise{vec({1})}, 1),
               CostFunction::quadratic(Matrix::Ones(1, 1), Matrix::Ones(1, 1)),
               opt);
  for (int t = 0; t <= 60; ++t) {
    CHECK(traj.x[t](0) == doctest::Approx(2 * (1 - std::pow(0.5, t))));
  }
  CHECK(traj.empirical_gamma <= 2.0);
}

TEST_CASE("simulate is deterministic and replays") {
  std::mt19937_64 rng(2);
  LinearSystem sys(random_with_radius(rng, 3, 0.9), random_matrix(rng, 3, 2));
  const auto cost =
      CostFunction::quadratic(Matrix::Identity(3, 3), Matrix::Identity(2, 2));
  SimulationOptions opt;
  opt.horizon = 200;
  opt.seed = 1234;
  const PerturbationSource gaussian(GaussianNoise{0.3}, 3);
  ZeroController a(2), b(2);
  const auto t1 = simulate(sys, a, gaussian, cost, opt);
  const auto t2 = simulate(sys, b, gaussian, cost, opt);
  CHECK(t1.x == t2.x);
  CHECK(t1.w == t2.w);
  CHECK(t1.cost == t2.cost);
  CHECK(replays_exactly(sys, t1));

  ZeroController c(2);
  const auto t3 = simulate(sys, c, PerturbationSource::recorded(t1.w), cost, opt);
  CHECK(t3.x == t1.x);
}

TEST_CASE("simulate aborts on non-finite controls") {
  struct Nan final : Controller {
    Vector act(const Signals& s) override {
      return Vector::Constant(1, s.t == 3 ? std::nan("") : 0.0);
    }
    std::unique_ptr<Controller> clone() const override {
      return std::make_unique<Nan>(*this);
    }
  } nan;
  SimulationOptions opt;
  opt.horizon = 10;
  try {
    simulate(double_integrator(), nan, PerturbationSource::zero(2),
             CostFunction::quadratic(Matrix::Identity(2, 2),
                                     Matrix::Identity(1, 1)),
             opt);
    FAIL("expected a numerical error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step 3") != std::string::npos);
  }
}

TEST_CASE("clipped perturbations stay in the unit ball") {
  const PerturbationSource src(GaussianNoise{5.0}, 4, true);
  const auto seq = sample_sequence(src, 500, 99);
  for (const auto& w : seq) CHECK(w.norm() <= 1.0 + 1e-15);
  CHECK(clip_to_unit_ball(vec({3, 4})).isApprox(vec({0.6, 0.8})));
  for (const auto& w :
       sample_sequence(PerturbationSource(UniformBallNoise{1.0}, 3), 300, 1))
    CHECK(w.norm() <= 1.0 + 1e-15);
}

TEST_CASE("sinusoidal perturbations") {
  const PerturbationSource src(SinusoidalNoise{2.0, 0.5, vec({0, 1})}, 2);
  const auto seq = sample_sequence(src, 10, 0);
  CHECK(seq[3](0) == doctest::Approx(2 * std::sin(1.5)));
  CHECK(seq[3](1) == doctest::Approx(2 * std::sin(2.5)));
}

TEST_CASE("quadratic cost contract") {
  CHECK_THROWS_AS(CostFunction::quadratic(mat(1, 1, {-1}), Matrix::Ones(1, 1)),
                  ConfigError);
  const auto c = CostFunction::quadratic(mat(2, 2, {2, 0, 0, 1}),
                                         Matrix::Ones(1, 1), vec({1, 0}));
  CHECK(c(vec({2, 1}), vec({3})) == doctest::Approx(2 + 1 + 9));
  const auto g = c.gradient(vec({2, 1}), vec({3}));
  CHECK(g.state.isApprox(vec({4, 2})));
  CHECK(g.control.isApprox(vec({6})));
}

TEST_CASE("matrix text format round-trips at full precision") {
  std::mt19937_64 rng(6);
  const Matrix m = random_matrix(rng, 3, 4, 1e3);
  const Matrix back = matrix_from_string(matrix_to_string(m));
  CHECK(back == m);
  CHECK(matrix_to_string(mat(1, 2, {0.5, -2})).rfind("1 2\n", 0) == 0);
  CHECK_THROWS_AS(matrix_from_string("2 2\n1 2 3"), ConfigError);
  CHECK_THROWS_AS(matrix_from_string("1 1\nnan"), ConfigError);
}

TEST_CASE("decay constants bound the powers") {
  std::mt19937_64 rng(31);
  const Matrix M = random_with_radius(rng, 3, 0.8);
  const auto dc = decay_constants(M);
  CHECK(dc.delta == doctest::Approx(0.1));
  Matrix p = Matrix::Identity(3, 3);
  for (int i = 0; i < 60; ++i) {
    CHECK(spectral_norm(p) <= dc.kappa * std::pow(1 - dc.delta, i) * (1 + 1e-9));
    p = p * M;
  }
}
