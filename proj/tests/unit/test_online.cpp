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
#include "nsc/online/controllers.hpp"
#include "nsc/online/ogd.hpp"
#include "nsc/optimal/lqr.hpp"
#include "nsc/policies/policy.hpp"
#include "support/oracles.hpp"

using namespace nsc;
using nsc::testing::finite_difference_gradient;
using nsc::testing::random_matrix;
using nsc::testing::random_vector;
using nsc::testing::random_with_radius;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

CostFunction unit_cost(int dx, int du) {
  return CostFunction::quadratic(Matrix::Identity(dx, dx),
                                 Matrix::Identity(du, du));
}

// Random instance for gradient checks: window of closed-loop data with
// random perturbations and a random quadratic cost.
struct DacInstance {
  SignalWindow window;
  Matrix K;
  CostFunction cost = unit_cost(1, 1);
  int t = 0;
};

DacInstance random_dac_instance(std::mt19937_64& rng, int dx, int du, int t) {
  DacInstance inst;
  inst.K = random_matrix(rng, du, dx, 0.2);
  for (int s = 0; s < t; ++s) {
    inst.window.push(random_with_radius(rng, dx, 0.8),
                     random_matrix(rng, dx, du), random_vector(rng, dx));
  }
  const Matrix L = random_matrix(rng, dx, dx);
  inst.cost = CostFunction::quadratic(L * L.transpose(),
                                      Matrix::Identity(du, du),
                                      random_vector(rng, dx));
  inst.t = t;
  return inst;
}

struct DrcInstance {
  SignalWindow window;
  Matrix C;
  CostFunction cost = unit_cost(1, 1);
  int t = 0;
};

DrcInstance random_drc_instance(std::mt19937_64& rng, int dx, int du, int dy,
                                int t) {
  DrcInstance inst;
  for (int s = 0; s <= t; ++s) {
    inst.window.push(random_with_radius(rng, dx, 0.8),
                     random_matrix(rng, dx, du), random_vector(rng, dy));
  }
  inst.C = random_matrix(rng, dy, dx);
  const Matrix L = random_matrix(rng, dy, dy);
  inst.cost = CostFunction::quadratic(L * L.transpose(),
                                      Matrix::Identity(du, du));
  inst.t = t;
  return inst;
}

// Controller wrapper that checks the projection invariant after every
// update.
template <typename C>
struct ProjectionWatch final : Controller {
  explicit ProjectionWatch(C inner) : inner(std::move(inner)) {}
  Vector act(const Signals& s) override { return inner.act(s); }
  void feedback(const Feedback& f) override {
    inner.feedback(f);
    violations += !inner.optimizer().contains(inner.optimizer().point());
  }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<ProjectionWatch>(*this);
  }
  C inner;
  int violations = 0;
};

}  // namespace

TEST_CASE("ogd leaves the point alone on a zero gradient") {
  OGD ogd({StepSchedule::kConstant, 0.3, ProjectionKind::kBall, 10.0},
          Vector{{1.0, 2.0}});
  ogd.update(Vector::Zero(2));
  CHECK(ogd.point() == Vector{{1.0, 2.0}});
  CHECK(ogd.updates() == 1);
}

TEST_CASE("ogd contracts to the minimizer of a fixed quadratic") {
  const Vector c{{0.5, -1.5, 2.0}};
  const double eta = 0.2;
  OGD ogd({StepSchedule::kConstant, eta, ProjectionKind::kNone, 0.0},
          Vector::Zero(3));
  const double start = c.norm();
  for (int t = 1; t <= 30; ++t) {
    ogd.update(2 * (ogd.point() - c));
    CHECK((ogd.point() - c).norm() ==
          doctest::Approx(start * std::pow(1 - 2 * eta, t)).epsilon(1e-9));
  }
}

TEST_CASE("ogd projects onto the ball") {
  OGD ogd({StepSchedule::kConstant, 1.0, ProjectionKind::kBall, 1.0},
          Vector::Zero(2));
  ogd.update(Vector{{-3.0, -4.0}});
  CHECK(ogd.point().isApprox(Vector{{0.6, 0.8}}));
  CHECK(ogd.project(Vector{{3.0, 4.0}}).isApprox(Vector{{0.6, 0.8}}));
}

TEST_CASE("ogd rejects non-finite gradients") {
  OGD ogd({}, Vector::Zero(2));
  CHECK_THROWS_AS(ogd.update(Vector{{NAN, 0.0}}), NumericalError);
  CHECK(ogd.updates() == 0);
  CHECK_THROWS_AS(ogd.update(Vector::Zero(3)), ConfigError);
}

TEST_CASE("ogd step schedule") {
  OGD ogd({StepSchedule::kInverseSqrt, 2.0, ProjectionKind::kNone, 0},
          Vector::Zero(1));
  CHECK(ogd.step_size() == doctest::Approx(2.0));
  ogd.update(Vector::Ones(1));
  ogd.update(Vector::Ones(1));
  ogd.update(Vector::Ones(1));
  CHECK(ogd.step_size() == doctest::Approx(1.0));
}

TEST_CASE("block norm projection is the Euclidean projection") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = random_vector(rng, 12, 2.0);
    const double radius = 1.5;
    const Vector p = project_block_norm_sum(v, 3, radius);
    double total = 0.0;
    for (int i = 0; i < 4; ++i) total += p.segment(i * 3, 3).norm();
    CHECK(total <= radius + 1e-12);
    // Variational check: (v - p) . (q - p) <= 0 for feasible q.
    for (int k = 0; k < 20; ++k) {
      const Vector q = project_block_norm_sum(random_vector(rng, 12, 2.0), 3,
                                              radius);
      CHECK((v - p).dot(q - p) <= 1e-10);
    }
  }
  const Vector inside{{0.1, 0.0, 0.0, 0.2}};
  CHECK(project_block_norm_sum(inside, 2, 1.0) == inside);
}

TEST_CASE("ogd iterates move slowly and stay projected") {
  std::mt19937_64 rng(8);
  for (auto kind : {ProjectionKind::kBall, ProjectionKind::kBlockNormSum}) {
    OGD ogd({StepSchedule::kInverseSqrt, 0.5, kind, 1.0, 2}, Vector::Zero(6));
    for (int t = 0; t < 500; ++t) {
      const double eta = ogd.step_size();
      const Vector g = random_vector(rng, 6, 3.0);
      ogd.update(g);
      CHECK(ogd.last_step_norm() <= eta * g.norm() * (1 + 1e-12));
      CHECK(ogd.contains(ogd.point()));
    }
  }
}

namespace {

// Regret of OGD against adversarial linear losses chosen to oppose the
// current iterate, over a ball of radius r.
double ogd_linear_regret(int T, double G, double r, std::uint64_t seed) {
  const double D = 2 * r;
  OGD ogd({StepSchedule::kInverseSqrt, D / G, ProjectionKind::kBall, r},
          Vector::Zero(3));
  std::mt19937_64 rng(seed);
  Vector sum = Vector::Zero(3);
  double learner = 0.0;
  for (int t = 0; t < T; ++t) {
    Vector g = random_vector(rng, 3);
    if (t % 3 == 0) g = ogd.point().norm() > 0 ? Vector(ogd.point()) : g;
    g *= G / g.norm();
    learner += g.dot(ogd.point());
    sum += g;
    ogd.update(g);
  }
  return learner + r * sum.norm();
}

}  // namespace

TEST_CASE("ogd regret on adversarial linear losses") {
  for (int T : {100, 1000}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const double G = 2.0, r = 1.5;
      CHECK(ogd_linear_regret(T, G, r, seed) <= 3 * G * 2 * r * std::sqrt(T));
    }
  }
}

TEST_CASE("counterfactual state of zero data is zero") {
  SignalWindow window;
  for (int s = 0; s < 5; ++s) {
    window.push(Matrix::Identity(2, 2), Matrix::Ones(2, 1), Vector::Zero(2));
  }
  CHECK(counterfactual_state({Matrix::Zero(1, 2)}, window, 5, -1).isZero(0.0));
}

TEST_CASE("scalar counterfactual state approaches the geometric limit") {
  const double m = 0.7;
  SignalWindow window;
  double previous_error = 1e9;
  for (int t = 0; t < 60; ++t) {
    window.push(scalar(0.5), scalar(1), Vector::Ones(1));
  }
  for (int H : {5, 10, 20, 40}) {
    const double x = counterfactual_state({scalar(m)}, window, 60, H)(0);
    const double error = std::abs(x - 2 * (1 + m));
    CHECK(error < previous_error);
    previous_error = error;
  }
  CHECK(previous_error < 1e-10);
}

TEST_CASE("counterfactual state matches a rollout of the played parameters") {
  std::mt19937_64 rng(14);
  const LinearSystem sys(random_with_radius(rng, 3, 0.9),
                         random_matrix(rng, 3, 2));
  const Matrix K = random_matrix(rng, 2, 3, 0.1);
  const std::vector<Matrix> M = {random_matrix(rng, 2, 3, 0.3),
                                 random_matrix(rng, 2, 3, 0.3)};
  PolicyController dac(make_dac(K, M));
  SimulationOptions opt;
  opt.horizon = 40;
  opt.seed = 2;
  const auto traj = simulate(sys, dac, PerturbationSource(GaussianNoise{1}, 3),
                             unit_cost(3, 2), opt);
  SignalWindow window;
  const Matrix closed = sys.A() + sys.B() * K;
  for (int t = 0; t < 40; ++t) {
    window.push(closed, sys.B(), traj.w[t]);
    const auto x = counterfactual_state(M, window, t + 1, -1);
    CHECK((x - traj.x[t + 1]).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("gpc loss gradient matches finite differences") {
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(300 + seed);
    const int dx = 2, du = 2, h = 3;
    auto inst = random_dac_instance(rng, dx, du, 12);
    std::vector<Matrix> M;
    for (int i = 0; i < h; ++i) M.push_back(random_matrix(rng, du, dx, 0.5));
    for (int H : {-1, 6}) {
      const auto loss = dac_loss(M, inst.window, inst.t, H, inst.K, inst.cost);
      const Vector analytic = flatten(loss.gradient);
      const Vector numeric = finite_difference_gradient(
          [&](const Vector& p) {
            return dac_loss(unflatten(p, h, du, dx), inst.window, inst.t, H,
                            inst.K, inst.cost)
                .value;
          },
          flatten(M), 1e-6);
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("grc loss gradient matches finite differences") {
  for (int seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(400 + seed);
    const int dx = 2, du = 1, dy = 1, h = 3;
    auto inst = random_drc_instance(rng, dx, du, dy, 12);
    std::vector<Matrix> M;
    for (int i = 0; i <= h; ++i) M.push_back(random_matrix(rng, du, dy, 0.5));
    for (int H : {-1, 6}) {
      const auto loss = drc_loss(M, inst.window, inst.t, H, inst.C, inst.cost);
      const Vector numeric = finite_difference_gradient(
          [&](const Vector& p) {
            return drc_loss(unflatten(p, h + 1, du, dy), inst.window, inst.t,
                            H, inst.C, inst.cost)
                .value;
          },
          flatten(M), 1e-6);
      CHECK((flatten(loss.gradient) - numeric).cwiseAbs().maxCoeff() <= 1e-5);
    }
  }
}

TEST_CASE("counterfactual losses are midpoint convex") {
  std::mt19937_64 rng(77);
  auto dac = random_dac_instance(rng, 2, 1, 10);
  auto drc = random_drc_instance(rng, 2, 1, 1, 10);
  for (int pair = 0; pair < 100; ++pair) {
    std::vector<Matrix> a, b, mid;
    for (int i = 0; i < 3; ++i) {
      a.push_back(random_matrix(rng, 1, 2));
      b.push_back(random_matrix(rng, 1, 2));
      mid.push_back(0.5 * (a.back() + b.back()));
    }
    auto l = [&](const std::vector<Matrix>& M) {
      return dac_loss(M, dac.window, dac.t, -1, dac.K, dac.cost).value;
    };
    CHECK(l(mid) <= 0.5 * (l(a) + l(b)) + 1e-9);

    std::vector<Matrix> c, d, mid2;
    for (int i = 0; i < 3; ++i) {
      c.push_back(random_matrix(rng, 1, 1));
      d.push_back(random_matrix(rng, 1, 1));
      mid2.push_back(0.5 * (c.back() + d.back()));
    }
    auto r = [&](const std::vector<Matrix>& M) {
      return drc_loss(M, drc.window, drc.t, -1, drc.C, drc.cost).value;
    };
    CHECK(r(mid2) <= 0.5 * (r(c) + r(d)) + 1e-9);
  }
}

TEST_CASE("gpc with no noise keeps zero parameters") {
  const LinearSystem sys(Matrix{{1, 0.1}, {0, 1}}, Matrix{{0}, {1}});
  const auto K = dare_solve(sys.A(), sys.B(), Matrix::Identity(2, 2),
                            scalar(1))
                     .K;
  OnlineControlConfig cfg;
  cfg.h = 4;
  GPCController gpc(sys, K, unit_cost(2, 1), cfg);
  SimulationOptions opt;
  opt.horizon = 50;
  opt.x0 = Vector{{1.0, -1.0}};
  simulate(sys, gpc, PerturbationSource::zero(2), unit_cost(2, 1), opt);
  for (const auto& w : gpc.recovered_perturbations()) CHECK(w.isZero(0.0));
  CHECK(gpc.optimizer().point().isZero(0.0));
}

TEST_CASE("gpc recovered perturbations replay exactly") {
  std::mt19937_64 rng(5);
  const LinearSystem sys(random_with_radius(rng, 3, 1.05),
                         random_matrix(rng, 3, 2));
  const auto K = dare_solve(sys.A(), sys.B(), Matrix::Identity(3, 3),
                            Matrix::Identity(2, 2))
                     .K;
  GPCController gpc(sys, K, unit_cost(3, 2), {});
  SimulationOptions opt;
  opt.horizon = 300;
  opt.seed = 9;
  const auto traj = simulate(sys, gpc, PerturbationSource(GaussianNoise{3}, 3),
                             unit_cost(3, 2), opt);
  const auto& w = gpc.recovered_perturbations();
  REQUIRE(w.size() == 300);
  int mismatches = 0;
  for (int t = 0; t < 300; ++t) {
    mismatches += step(sys, traj.x[t], traj.u[t], w[t], t) != traj.x[t + 1];
  }
  CHECK(mismatches == 0);
}

TEST_CASE("gpc parameters stay inside the projection set") {
  std::mt19937_64 rng(6);
  const LinearSystem sys(random_with_radius(rng, 2, 0.9),
                         random_matrix(rng, 2, 1));
  for (auto kind : {ProjectionKind::kBall, ProjectionKind::kBlockNormSum}) {
    OnlineControlConfig cfg;
    cfg.h = 3;
    cfg.ogd = {StepSchedule::kInverseSqrt, 0.5, kind, 0.2, 0};
    ProjectionWatch<GPCController> watch(
        GPCController(sys, Matrix::Zero(1, 2), unit_cost(2, 1), cfg));
    SimulationOptions opt;
    opt.horizon = 300;
    simulate(sys, watch, PerturbationSource(GaussianNoise{1}, 2),
             unit_cost(2, 1), opt);
    CHECK(watch.violations == 0);
  }
}

TEST_CASE("gpc counterfactual loss approaches the realized cost") {
  const LinearSystem sys(scalar(0.9), scalar(1));
  const auto K = dare_solve(sys.A(), sys.B(), scalar(1), scalar(1)).K;
  OnlineControlConfig cfg;
  cfg.h = 5;
  cfg.ogd.scale = 0.05;
  cfg.ogd.radius = 5;
  GPCController gpc(sys, K, unit_cost(1, 1), cfg);
  SimulationOptions opt;
  opt.horizon = 2000;
  simulate(sys, gpc,
           PerturbationSource(SinusoidalNoise{1.0, 2 * M_PI / 50, Vector()}, 1),
           unit_cost(1, 1), opt);
  const auto& rows = gpc.telemetry();
  double first = 0.0, second = 0.0;
  for (int t = 0; t < 1000; ++t) {
    first += std::abs(rows[t].counterfactual_loss - rows[t].cost);
    second += std::abs(rows[t + 1000].counterfactual_loss - rows[t + 1000].cost);
  }
  CHECK(second < first);
}

TEST_CASE("gpc beats the fixed lqr gain under sinusoidal noise") {
  const LinearSystem sys(scalar(0.9), scalar(1));
  const auto cost = unit_cost(1, 1);
  const auto K = dare_solve(sys.A(), sys.B(), scalar(1), scalar(1)).K;
  const PerturbationSource noise(
      SinusoidalNoise{1.0, 2 * M_PI / 50, Vector()}, 1);
  SimulationOptions opt;
  opt.horizon = 2000;
  OnlineControlConfig cfg;
  cfg.h = 10;
  cfg.ogd.scale = 0.05;
  cfg.ogd.radius = 5;
  GPCController gpc(sys, K, cost, cfg);
  PolicyController lqr(make_linear(K));
  const double gpc_cost = simulate(sys, gpc, noise, cost, opt).total_cost();
  const double lqr_cost = simulate(sys, lqr, noise, cost, opt).total_cost();
  MESSAGE("gpc " << gpc_cost << " lqr " << lqr_cost);
  CHECK(gpc_cost < lqr_cost);
}

TEST_CASE("grc with zero parameters plays zero") {
  std::mt19937_64 rng(3);
  const LinearSystem sys(random_with_radius(rng, 2, 0.8),
                         random_matrix(rng, 2, 1), random_matrix(rng, 1, 2));
  GRCController grc(sys, unit_cost(1, 1), {});
  const Vector y{{0.4}};
  Signals s;
  s.observation = &y;
  CHECK(grc.act(s).isZero(0.0));

  const std::vector<Matrix> zero(3, Matrix::Zero(1, 1));
  SignalWindow window;
  for (int t = 0; t < 20; ++t) {
    const Vector yt = random_vector(rng, 1);
    window.push(sys.A(), sys.B(), yt);
    const auto loss = drc_loss(zero, window, t, -1, sys.C(), unit_cost(1, 1));
    CHECK(loss.control.isZero(0.0));
    CHECK(loss.state == yt);
  }
}

TEST_CASE("grc counterfactual with frozen parameters reproduces y") {
  std::mt19937_64 rng(31);
  const LinearSystem sys(random_with_radius(rng, 3, 0.8),
                         random_matrix(rng, 3, 1), random_matrix(rng, 2, 3));
  auto shared = std::make_shared<const LinearSystem>(sys);
  const std::vector<Matrix> M = {random_matrix(rng, 1, 2, 0.3),
                                 random_matrix(rng, 1, 2, 0.3)};
  PolicyController drc(make_drc(shared, M));
  SimulationOptions opt;
  opt.horizon = 40;
  opt.seed = 4;
  const auto traj = simulate(sys, drc, PerturbationSource(GaussianNoise{1}, 3),
                             unit_cost(2, 1), opt);
  NaturesY tracker(3);
  SignalWindow window;
  for (int t = 0; t < 40; ++t) {
    const Vector ynat = natures_y_step(tracker, sys.A(), sys.B(), sys.C(),
                                       traj.u[t], traj.y[t]);
    window.push(sys.A(), sys.B(), ynat);
    const auto loss = drc_loss(M, window, t, -1, sys.C(), unit_cost(2, 1));
    CHECK((loss.state - traj.y[t]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((loss.control - traj.u[t]).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("default truncation") {
  CHECK(default_truncation(scalar(0.0), 3, 1e-6, 1000) ==
        6 + static_cast<int>(std::ceil(std::log(1e6) / 0.5)));
  CHECK(default_truncation(scalar(0.999), 3, 1e-6, 500) == 500);
  CHECK_THROWS_AS(default_truncation(scalar(1.2), 3, 1e-6, 500), ConfigError);
}
