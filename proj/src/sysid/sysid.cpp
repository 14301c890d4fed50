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

#include "nsc/sysid/sysid.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "nsc/error.hpp"

namespace nsc {

SimulatedBlackBox::SimulatedBlackBox(LinearSystem system,
                                     PerturbationSource perturbations,
                                     std::uint64_t seed, Vector x0)
    : system_(std::move(system)),
      perturbations_(std::move(perturbations)),
      rng_(seed),
      x_(x0.size() ? std::move(x0) : Vector::Zero(system_.state_dim())) {
  if (!system_.fully_observed()) {
    throw ConfigError("black box: identification needs state readout");
  }
  if (perturbations_.dim() != system_.state_dim() ||
      x_.size() != system_.state_dim()) {
    throw ConfigError("black box: perturbation or initial state dimension");
  }
}

void SimulatedBlackBox::step(const Vector& u) {
  if (u.size() != system_.control_dim()) {
    throw ConfigError("black box: control has wrong dimension");
  }
  Vector w = perturbations_.sample(t_, rng_);
  Vector next = nsc::step(system_, x_, u, w, t_);
  if (!next.allFinite()) {
    throw NumericalError("black box: non-finite state at step " +
                         std::to_string(t_));
  }
  x_ = std::move(next);
  w_.push_back(std::move(w));
  ++t_;
}

ExcitationRecord excite_and_record(BlackBox& plant, int k, int T0,
                                   std::uint64_t seed) {
  if (k < 0 || T0 < 1) throw ConfigError("sysid: need k >= 0 and T0 >= 1");
  ExcitationRecord record{k, T0, {}, {}};
  const int steps = T0 * (k + 1) + 1;
  record.x.reserve(steps + 1);
  record.eta.reserve(steps);
  Rng rng(seed);
  record.x.push_back(plant.state());
  for (int t = 0; t < steps; ++t) {
    Vector eta(plant.control_dim());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      eta(i) = (rng() & 1ULL) ? 1.0 : -1.0;
    }
    plant.step(eta);
    record.eta.push_back(std::move(eta));
    record.x.push_back(plant.state());
    if (!record.x.back().allFinite()) {
      throw NumericalError("sysid: plant emitted a non-finite state at step " +
                           std::to_string(t));
    }
  }
  return record;
}

MomentEstimates estimate_moments(const ExcitationRecord& record) {
  const int k = record.k, T0 = record.T0;
  if (static_cast<int>(record.eta.size()) != T0 * (k + 1) + 1 ||
      record.x.size() != record.eta.size() + 1) {
    throw ConfigError("sysid: record length does not match k and T0");
  }
  const Eigen::Index dx = record.x[0].size(), du = record.eta[0].size();
  MomentEstimates m{k, T0, std::vector<Matrix>(k + 1, Matrix::Zero(dx, du))};
  // Running means are exact when every sample is the same matrix.
  for (int t = 0; t < T0; ++t) {
    const Vector& eta = record.eta[t * (k + 1)];
    for (int j = 0; j <= k; ++j) {
      const Matrix sample = record.x[t * (k + 1) + j + 1] * eta.transpose();
      m.G[j] += (sample - m.G[j]) / static_cast<double>(t + 1);
    }
  }
  return m;
}

IdentifiedSystem recover_AB(const MomentEstimates& moments,
                            double sigma_min_threshold) {
  const int k = moments.k;
  if (k < 1 || static_cast<int>(moments.G.size()) != k + 1) {
    throw ConfigError("sysid: recovery needs k >= 1 and k + 1 moments");
  }
  const Eigen::Index dx = moments.G[0].rows(), du = moments.G[0].cols();
  Matrix C0(dx, k * du), C1(dx, k * du);
  for (int j = 0; j < k; ++j) {
    C0.middleCols(j * du, du) = moments.G[j];
    C1.middleCols(j * du, du) = moments.G[j + 1];
  }
  IdentifiedSystem id;
  const Matrix gram = C0 * C0.transpose();
  id.A = C1 * C0.transpose() * pseudo_inverse(0.5 * (gram + gram.transpose()));
  id.B = moments.G[0];
  id.residual = (C1 - id.A * C0).norm();
  Eigen::JacobiSVD<Matrix> svd(C0);
  const Vector& s = svd.singularValues();
  id.sigma_min = s.size() < dx ? 0.0 : s(dx - 1);
  if (id.sigma_min < sigma_min_threshold) {
    id.warnings.push_back("sysid: sigma_min(C0) = " +
                          format_double(id.sigma_min) +
                          " is below the threshold; the pair may not be "
                          "strongly controllable at this k");
  }
  return id;
}

std::vector<double> run_gpc_on_plant(SimulatedBlackBox& plant,
                                     const LinearSystem& model,
                                     const Matrix& K, const CostFunction& cost,
                                     const OnlineControlConfig& config,
                                     int steps, std::vector<Vector>* controls) {
  GPCController gpc(model, K, cost, config);
  std::vector<double> costs;
  costs.reserve(steps);
  for (int t = 0; t < steps; ++t) {
    const Vector x = plant.state();
    Signals signals;
    signals.t = t;
    signals.state = &x;
    signals.observation = &x;
    const Vector u = gpc.act(signals);
    if (!u.allFinite()) {
      throw NumericalError("identify-then-control: non-finite control at "
                           "exploitation step " + std::to_string(t));
    }
    plant.step(u);
    const Vector next = plant.state();
    Feedback fb;
    fb.t = t;
    fb.state = &x;
    fb.observation = &x;
    fb.control = &u;
    fb.next_state = &next;
    fb.next_observation = &next;
    fb.cost = cost(x, u, t);
    gpc.feedback(fb);
    costs.push_back(fb.cost);
    if (controls) controls->push_back(u);
  }
  return costs;
}

IdentifyThenControlReport identify_then_control(
    SimulatedBlackBox& plant, int T, const CostFunction& cost,
    const IdentifyThenControlConfig& config,
    const ComparatorOptions& comparator) {
  if (plant.time() != 0) throw ConfigError("identify-then-control: used plant");
  const int T0 = config.T0 > 0
                     ? config.T0
                     : static_cast<int>(std::ceil(std::cbrt(double(T) * T) -
                                                  1e-9));
  IdentifyThenControlReport report;
  report.T = T;
  report.exploration_steps = T0 * (config.k + 1) + 1;
  if (report.exploration_steps >= T) {
    throw ConfigError("identify-then-control: horizon " + std::to_string(T) +
                      " leaves no room after " +
                      std::to_string(report.exploration_steps) +
                      " identification steps");
  }

  const ExcitationRecord record =
      excite_and_record(plant, config.k, T0, config.excitation_seed);
  report.identified =
      recover_AB(estimate_moments(record), config.sigma_min_threshold);
  if (report.identified.sigma_min < config.sigma_min_threshold) {
    throw NumericalError("identify-then-control: " +
                         report.identified.warnings.back());
  }
  for (int t = 0; t < report.exploration_steps; ++t) {
    report.costs.push_back(cost(record.x[t], record.eta[t], t));
    report.controls.push_back(record.eta[t]);
    report.exploration_cost += report.costs.back();
  }

  const int du = plant.control_dim(), dx = plant.state_dim();
  const Matrix K = config.K.size() ? config.K : Matrix::Zero(du, dx);
  const LinearSystem model(report.identified.A, report.identified.B);
  const int remaining = T - report.exploration_steps;
  std::vector<double> later =
      run_gpc_on_plant(plant, model, K, cost, config.gpc, remaining,
                       &report.controls);
  for (size_t i = 0; i < later.size(); ++i) {
    // Costs are indexed by global time in the report.
    report.exploitation_cost += later[i];
    report.costs.push_back(later[i]);
  }
  report.total_cost = report.exploration_cost + report.exploitation_cost;

  report.comparator =
      best_dac_in_hindsight(plant.system(), K, plant.perturbations(), cost,
                            config.gpc.h, comparator);
  report.average_regret = (report.total_cost - report.comparator.total_cost) / T;
  return report;
}

std::string sysid_summary(const MomentEstimates& moments,
                          const IdentifiedSystem& identified,
                          const Matrix* true_A, const Matrix* true_B) {
  std::ostringstream out;
  out << "k " << moments.k << '\n' << "T0 " << moments.T0 << '\n';
  if (true_A && true_B) {
    Matrix power = *true_B;
    for (int j = 0; j <= moments.k; ++j) {
      out << "error_G" << j << ' '
          << format_double(spectral_norm(moments.G[j] - power)) << '\n';
      power = *true_A * power;
    }
    out << "error_A " << format_double(spectral_norm(identified.A - *true_A))
        << '\n'
        << "error_B " << format_double(spectral_norm(identified.B - *true_B))
        << '\n';
  }
  out << "residual " << format_double(identified.residual) << '\n'
      << "sigma_min " << format_double(identified.sigma_min) << '\n';
  return out.str();
}

}  // namespace nsc
