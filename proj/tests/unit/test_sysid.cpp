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
#include <random>
#include <vector>

#include "doctest.h"
#include "nsc/error.hpp"
#include "nsc/lds/simulate.hpp"
#include "nsc/sysid/sysid.hpp"
#include "support/oracles.hpp"

using namespace nsc;
using nsc::testing::random_matrix;
using nsc::testing::random_with_radius;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

SimulatedBlackBox plant(const Matrix& A, const Matrix& B, NoiseKind noise,
                        std::uint64_t seed) {
  return SimulatedBlackBox(LinearSystem(A, B),
                           PerturbationSource(noise, static_cast<int>(A.rows())),
                           seed);
}

double moment_error(const MomentEstimates& m, const Matrix& A,
                    const Matrix& B) {
  double worst = 0;
  Matrix power = B;
  for (const auto& G : m.G) {
    worst = std::max(worst, (G - power).norm());
    power = A * power;
  }
  return worst;
}

Matrix example_A() {
  Matrix A(2, 2);
  A << 0.6, 0.3, -0.2, 0.5;
  return A;
}

Matrix example_B() {
  Matrix B(2, 2);
  B << 1.0, 0.0, 0.5, 1.0;
  return B;
}

}  // namespace

TEST_CASE("excitation is Rademacher, centered and reproducible") {
  auto box = plant(scalar(0.5), scalar(1), ZeroNoise{}, 1);
  const auto rec = excite_and_record(box, 1, 10000, 42);
  CHECK(rec.eta.size() == 10000u * 2 + 1);
  CHECK(rec.x.size() == rec.eta.size() + 1);
  double mean = 0;
  for (const auto& e : rec.eta) {
    CHECK((e(0) == 1.0 || e(0) == -1.0));
    mean += e(0);
  }
  CHECK(std::abs(mean / rec.eta.size()) <= 0.05);

  auto again = plant(scalar(0.5), scalar(1), ZeroNoise{}, 1);
  const auto rec2 = excite_and_record(again, 1, 10000, 42);
  CHECK(rec.x == rec2.x);
  CHECK(rec.eta == rec2.eta);
}

TEST_CASE("moments are exact for A = 0 without noise") {
  std::mt19937_64 rng(3);
  const Matrix B = random_matrix(rng, 3, 1);
  for (int T0 : {1, 7, 1000}) {
    auto box = plant(Matrix::Zero(3, 3), B, ZeroNoise{}, 0);
    const auto m = estimate_moments(excite_and_record(box, 2, T0, 9));
    CHECK(m.G[0] == B);
  }
}

TEST_CASE("moments vanish when B = 0") {
  auto box = plant(Matrix::Identity(2, 2) * 0.5, Matrix::Zero(2, 1),
                   ZeroNoise{}, 0);
  const auto m = estimate_moments(excite_and_record(box, 3, 100, 1));
  for (const auto& G : m.G) CHECK(G.isZero(0.0));
}

TEST_CASE("scalar moments converge") {
  auto box = plant(scalar(0.5), scalar(1), ZeroNoise{}, 0);
  const auto m = estimate_moments(excite_and_record(box, 2, 50000, 2024));
  for (int j = 0; j <= 2; ++j) {
    CHECK(std::abs(m.G[j](0, 0) - std::pow(0.5, j)) <= 0.05);
  }
}

TEST_CASE("recovery is exact on exact moments") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix A = random_with_radius(rng, 3, 0.9);
    const Matrix B = random_matrix(rng, 3, 1);
    MomentEstimates m{3, 1, {}};
    Matrix power = B;
    for (int j = 0; j <= 3; ++j) {
      m.G.push_back(power);
      power = A * power;
    }
    const auto id = recover_AB(m);
    CHECK((id.A - A).norm() <= 1e-10 * (1 + A.norm()));
    CHECK((id.B - B).norm() == 0.0);
    CHECK(id.warnings.empty());
  }
  MomentEstimates scalar_m{1, 1, {scalar(1), scalar(0.5)}};
  CHECK(recover_AB(scalar_m).A(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("rank-deficient moments raise a warning") {
  // B = e1, A = I: every A^j B is e1.
  const Matrix B = Matrix::Identity(2, 1);
  MomentEstimates m{2, 1, {B, B, B}};
  const auto id = recover_AB(m);
  CHECK(id.sigma_min < kDefaultSigmaMinThreshold);
  REQUIRE(id.warnings.size() == 1);
}

TEST_CASE("moment error halves when T0 quadruples") {
  const Matrix A = example_A(), B = example_B();
  double small = 0, large = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto a = plant(A, B, GaussianNoise{0.5}, 100 + seed);
    small += moment_error(estimate_moments(excite_and_record(a, 2, 2000, seed)),
                          A, B);
    auto b = plant(A, B, GaussianNoise{0.5}, 100 + seed);
    large += moment_error(estimate_moments(excite_and_record(b, 2, 8000, seed)),
                          A, B);
  }
  const double ratio = small / large;
  MESSAGE("error ratio " << ratio);
  CHECK(ratio >= 1.0);
  CHECK(ratio <= 3.0);
}

TEST_CASE("exploitation on exact estimates replays known-system GPC") {
  const Matrix A = example_A(), B = example_B();
  const auto cost = CostFunction::quadratic(Matrix::Identity(2, 2),
                                            Matrix::Identity(2, 2));
  OnlineControlConfig cfg;
  cfg.h = 3;
  cfg.ogd.scale = 0.01;
  auto box = plant(A, B, GaussianNoise{0.3}, 7);
  excite_and_record(box, 1, 50, 8);
  const Vector start = box.state();
  const int warm = box.time();
  std::vector<Vector> controls;
  run_gpc_on_plant(box, LinearSystem(A, B), Matrix::Zero(2, 2), cost, cfg, 300,
                   &controls);

  std::vector<Vector> later(box.perturbations().begin() + warm,
                            box.perturbations().end());
  GPCController gpc(LinearSystem(A, B), Matrix::Zero(2, 2), cost, cfg);
  SimulationOptions opt;
  opt.horizon = 300;
  opt.x0 = start;
  const auto traj = simulate(LinearSystem(A, B), gpc,
                             PerturbationSource::recorded(later), cost, opt);
  CHECK(traj.u == controls);
}

TEST_CASE("identify then control") {
  const Matrix A = example_A(), B = example_B();
  const auto cost = CostFunction::quadratic(Matrix::Identity(2, 2),
                                            Matrix::Identity(2, 2));
  IdentifyThenControlConfig cfg;
  cfg.k = 1;
  cfg.gpc.h = 3;
  cfg.gpc.ogd.scale = 0.01;
  cfg.excitation_seed = 5;
  ComparatorOptions copt;
  copt.radius = cfg.gpc.ogd.radius;

  SUBCASE("deterministic under seed") {
    auto a = plant(A, B, GaussianNoise{0.3}, 1);
    auto b = plant(A, B, GaussianNoise{0.3}, 1);
    const auto ra = identify_then_control(a, 1000, cost, cfg, copt);
    const auto rb = identify_then_control(b, 1000, cost, cfg, copt);
    CHECK(ra.costs == rb.costs);
    CHECK(ra.average_regret == rb.average_regret);
    CHECK(ra.exploration_steps == 100 * 2 + 1);
    CHECK(ra.costs.size() == 1000u);
    CHECK(ra.total_cost ==
          doctest::Approx(ra.exploration_cost + ra.exploitation_cost));
  }
  SUBCASE("average regret falls with the horizon") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto a = plant(A, B, GaussianNoise{0.3}, seed);
      auto b = plant(A, B, GaussianNoise{0.3}, seed);
      const auto short_run = identify_then_control(a, 1000, cost, cfg, copt);
      const auto long_run = identify_then_control(b, 8000, cost, cfg, copt);
      MESSAGE("seed " << seed << ": " << short_run.average_regret << " -> "
                      << long_run.average_regret);
      CHECK(long_run.average_regret < short_run.average_regret);
    }
  }
  SUBCASE("aborts when the pair is not identifiable at this k") {
    auto a = SimulatedBlackBox(LinearSystem(Matrix::Identity(2, 2) * 0.5,
                                            Matrix::Identity(2, 1)),
                               PerturbationSource(ZeroNoise{}, 2), 0);
    CHECK_THROWS_AS(identify_then_control(a, 1000, cost, cfg, copt),
                    NumericalError);
  }
}

TEST_CASE("exploitation cost moves linearly with model error") {
  const Matrix A = example_A(), B = example_B();
  const auto cost = CostFunction::quadratic(Matrix::Identity(2, 2),
                                            Matrix::Identity(2, 2));
  OnlineControlConfig cfg;
  cfg.h = 3;
  cfg.ogd.scale = 0.01;
  Matrix E(2, 2);
  E << 1, -1, 1, 1;
  std::vector<double> excess;
  double base = 0;
  for (double eps : {0.0, 0.001, 0.01, 0.05}) {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto box = plant(A, B, GaussianNoise{0.3}, seed);
      for (double c : run_gpc_on_plant(box, LinearSystem(A + eps * E, B + eps * E),
                                       Matrix::Zero(2, 2), cost, cfg, 2000)) {
        total += c;
      }
    }
    if (eps == 0.0) base = total;
    else excess.push_back(total - base);
    MESSAGE("eps " << eps << " cost " << total);
  }
  // The first-order effect of a model error has a direction-dependent sign;
  // its size should scale like eps.
  const double m1 = std::abs(excess[0]), m2 = std::abs(excess[1]),
               m3 = std::abs(excess[2]);
  CHECK(m1 < m2);
  CHECK(m2 < m3);
  const double slope = std::log(m3 / m1) / std::log(0.05 / 0.001);
  MESSAGE("log-log slope " << slope);
  CHECK(slope >= 0.7);
  CHECK(slope <= 1.3);
}

TEST_CASE("summary block") {
  MomentEstimates m{1, 10, {scalar(1), scalar(0.5)}};
  const auto id = recover_AB(m);
  const Matrix A = scalar(0.5), B = scalar(1);
  const auto text = sysid_summary(m, id, &A, &B);
  CHECK(text.find("k 1\n") != std::string::npos);
  CHECK(text.find("T0 10\n") != std::string::npos);
  CHECK(text.find("error_G1 0\n") != std::string::npos);
  CHECK(text.find("sigma_min 1\n") != std::string::npos);
}
