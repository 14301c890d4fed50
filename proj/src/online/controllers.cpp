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

#include "nsc/online/controllers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsc/error.hpp"
#include "nsc/lds/diagnostics.hpp"

namespace nsc {
namespace {

int first_time(int t, int truncation) {
  return truncation < 0 ? 0 : std::max(0, t - truncation);
}

void check_window(const SignalWindow& window, int from, int to,
                  const char* what) {
  if (from < to && (window.begin() > from || window.end() < to)) {
    throw ConfigError(std::string(what) + ": window holds [" +
                      std::to_string(window.begin()) + ", " +
                      std::to_string(window.end()) + "), needs [" +
                      std::to_string(from) + ", " + std::to_string(to) + ")");
  }
}

double stacked_norm(const std::vector<Matrix>& M) {
  double total = 0.0;
  for (const auto& m : M) total += m.squaredNorm();
  return std::sqrt(total);
}

int window_capacity(int truncation, int h) {
  return truncation < 0 ? 0 : truncation + h + 1;
}

}  // namespace

void SignalWindow::push(Matrix transition, Matrix input, Vector signal) {
  entries_.push_back({std::move(transition), std::move(input),
                      std::move(signal)});
  ++end_;
  if (capacity_ > 0 && static_cast<int>(entries_.size()) > capacity_) {
    entries_.pop_front();
  }
}

const SignalWindow::Entry& SignalWindow::at(int s) const {
  if (s < begin() || s >= end_) {
    throw ConfigError("signal window has no entry for time " +
                      std::to_string(s));
  }
  return entries_[s - begin()];
}

Vector SignalWindow::signal(int s, int dim) const {
  if (s < 0 || s >= end_) return Vector::Zero(dim);
  return at(s).signal;
}

int default_truncation(const Matrix& closed, int h, double eps, int cap) {
  const double rho = spectral_radius(closed);
  if (rho >= 1.0) {
    throw ConfigError("closed loop is not stable (spectral radius " +
                      format_double(rho) + ")");
  }
  const double delta = 0.5 * (1.0 - rho);
  const double depth = 2.0 * h + std::ceil(std::log(1.0 / eps) / delta);
  return static_cast<int>(std::min<double>(depth, cap));
}

Vector counterfactual_state(const std::vector<Matrix>& M,
                            const SignalWindow& window, int t,
                            int truncation) {
  if (M.empty()) throw ConfigError("counterfactual_state: needs h >= 1");
  const int dx = static_cast<int>(M[0].cols());
  const int h = static_cast<int>(M.size());
  const int s0 = first_time(t, truncation);
  check_window(window, s0, t, "counterfactual_state");
  Vector x = Vector::Zero(dx);
  for (int s = s0; s < t; ++s) {
    Vector u = Vector::Zero(M[0].rows());
    for (int j = 1; j <= h; ++j) u += M[j - 1] * window.signal(s - j, dx);
    x = window.transition(s) * x + window.input(s) * u + window.signal(s, dx);
  }
  return x;
}

CounterfactualLoss dac_loss(const std::vector<Matrix>& M,
                            const SignalWindow& window, int t, int truncation,
                            const Matrix& K_t, const CostFunction& cost) {
  const int dx = static_cast<int>(M.at(0).cols());
  const int h = static_cast<int>(M.size());
  CounterfactualLoss out;
  out.state = counterfactual_state(M, window, t, truncation);
  out.control = K_t * out.state;
  for (int j = 1; j <= h; ++j) {
    out.control += M[j - 1] * window.signal(t - j, dx);
  }
  out.value = cost(out.state, out.control, t);
  const CostGradient g = cost.gradient(out.state, out.control, t);

  out.gradient.assign(h, Matrix::Zero(M[0].rows(), dx));
  for (int j = 1; j <= h; ++j) {
    out.gradient[j - 1] += g.control * window.signal(t - j, dx).transpose();
  }
  // Adjoint pass through x_{s+1} = T_s x_s + B_s sum_j M_j w_{s-j} + w_s.
  Vector lambda = g.state + K_t.transpose() * g.control;
  for (int s = t - 1; s >= first_time(t, truncation); --s) {
    const Vector v = window.input(s).transpose() * lambda;
    for (int j = 1; j <= h; ++j) {
      out.gradient[j - 1] += v * window.signal(s - j, dx).transpose();
    }
    lambda = window.transition(s).transpose() * lambda;
  }
  return out;
}

CounterfactualLoss drc_loss(const std::vector<Matrix>& M,
                            const SignalWindow& window, int t, int truncation,
                            const Matrix& C_t, const CostFunction& cost) {
  if (M.empty()) throw ConfigError("drc_loss: needs M_0");
  const int dy = static_cast<int>(M[0].cols());
  const int du = static_cast<int>(M[0].rows());
  const int n = static_cast<int>(M.size());
  const int s0 = first_time(t, truncation);
  check_window(window, s0, t + 1, "drc_loss");

  auto control = [&](int s) {
    Vector u = Vector::Zero(du);
    for (int j = 0; j < n; ++j) u += M[j] * window.signal(s - j, dy);
    return u;
  };
  Vector z = Vector::Zero(C_t.cols());
  for (int s = s0; s < t; ++s) {
    z = window.transition(s) * z + window.input(s) * control(s);
  }
  CounterfactualLoss out;
  out.state = window.signal(t, dy) + C_t * z;
  out.control = control(t);
  out.value = cost(out.state, out.control, t);
  const CostGradient g = cost.gradient(out.state, out.control, t);

  out.gradient.assign(n, Matrix::Zero(du, dy));
  for (int j = 0; j < n; ++j) {
    out.gradient[j] += g.control * window.signal(t - j, dy).transpose();
  }
  Vector lambda = C_t.transpose() * g.state;
  for (int s = t - 1; s >= s0; --s) {
    const Vector v = window.input(s).transpose() * lambda;
    for (int j = 0; j < n; ++j) {
      out.gradient[j] += v * window.signal(s - j, dy).transpose();
    }
    lambda = window.transition(s).transpose() * lambda;
  }
  return out;
}

namespace {

OGDConfig with_block_size(OGDConfig c, int block) {
  if (c.projection == ProjectionKind::kBlockNormSum && c.block_size == 0) {
    c.block_size = block;
  }
  return c;
}

}  // namespace

GPCController::GPCController(LinearSystem system, Matrix K, CostFunction cost,
                             OnlineControlConfig config)
    : GPCController(std::move(system), GainProvider(), std::move(cost),
                    config) {
  if (K.rows() != system_.control_dim() || K.cols() != system_.state_dim()) {
    throw ConfigError("gpc: K must be d_u x d_x");
  }
  K_ = std::move(K);
  if (config_.truncation == 0) {
    truncation_ =
        default_truncation(system_.A(0) + system_.B(0) * K_, config_.h,
                           config_.truncation_eps, config_.max_truncation);
    window_ = SignalWindow(window_capacity(truncation_, config_.h));
  }
}

GPCController::GPCController(LinearSystem system, GainProvider K_t,
                             CostFunction cost, OnlineControlConfig config)
    : system_(std::move(system)),
      K_t_(std::move(K_t)),
      cost_(std::move(cost)),
      config_(config),
      truncation_(config.truncation < 0 ? -1 : config.truncation),
      ogd_(with_block_size(config.ogd,
                           system_.control_dim() * system_.state_dim()),
           Vector::Zero(static_cast<Eigen::Index>(config.h) *
                        system_.control_dim() * system_.state_dim())),
      window_(window_capacity(truncation_, config.h)) {
  if (config_.h < 1) throw ConfigError("gpc: h must be >= 1");
  if (!system_.fully_observed()) {
    throw ConfigError("gpc: needs a fully observed system");
  }
  if (K_t_ && config_.truncation == 0) {
    truncation_ =
        default_truncation(system_.A(0) + system_.B(0) * K_t_(0), config_.h,
                           config_.truncation_eps, config_.max_truncation);
    window_ = SignalWindow(window_capacity(truncation_, config_.h));
  }
}

std::vector<Matrix> GPCController::parameters() const {
  return unflatten(ogd_.point(), config_.h, system_.control_dim(),
                   system_.state_dim());
}

Vector GPCController::act(const Signals& signals) {
  if (!signals.state) throw ConfigError("gpc: state is not available");
  const int t = signals.t;
  if (t != window_.end()) {
    throw ConfigError("gpc: expected step " + std::to_string(window_.end()) +
                      ", got " + std::to_string(t));
  }
  const auto M = parameters();
  Vector u = gain(t) * *signals.state;
  for (int j = 1; j <= config_.h; ++j) {
    u += M[j - 1] * window_.signal(t - j, system_.state_dim());
  }
  return u;
}

void GPCController::feedback(const Feedback& outcome) {
  const int t = outcome.t;
  if (!outcome.state || !outcome.next_state || !outcome.control) {
    throw ConfigError("gpc: feedback needs x_t, u_t and x_{t+1}");
  }
  Vector w = recover_perturbation(system_, *outcome.state, *outcome.control,
                                  *outcome.next_state, t);
  if (!w.allFinite()) {
    throw NumericalError("gpc: non-finite recovered perturbation at step " +
                         std::to_string(t));
  }
  const auto M = parameters();
  const Matrix K = gain(t);
  const auto loss = dac_loss(M, window_, t, truncation_, K, cost_);
  const Matrix A = system_.A(t);
  const Matrix B = system_.B(t);
  window_.push(A + B * K, B, w);

  const Vector g = flatten(loss.gradient);
  ogd_.update(g);
  telemetry_.push_back({t, outcome.cost, stacked_norm(M), w.norm(), g.norm(),
                        loss.value});
  recovered_.push_back(std::move(w));
}

std::unique_ptr<Controller> GPCController::clone() const {
  return std::make_unique<GPCController>(*this);
}

GRCController::GRCController(LinearSystem system, CostFunction cost,
                             OnlineControlConfig config)
    : system_(std::move(system)),
      cost_(std::move(cost)),
      config_(config),
      truncation_(config.truncation < 0 ? -1 : config.truncation),
      ogd_(with_block_size(config.ogd,
                           system_.control_dim() * system_.observation_dim()),
           Vector::Zero(static_cast<Eigen::Index>(config.h + 1) *
                        system_.control_dim() * system_.observation_dim())),
      tracker_(system_.state_dim()) {
  if (config_.h < 0) throw ConfigError("grc: h must be >= 0");
  if (config_.truncation == 0) {
    truncation_ = default_truncation(system_.A(0), config_.h,
                                     config_.truncation_eps,
                                     config_.max_truncation);
  }
  window_ = SignalWindow(window_capacity(truncation_, config_.h));
}

std::vector<Matrix> GRCController::parameters() const {
  return unflatten(ogd_.point(), config_.h + 1, system_.control_dim(),
                   system_.observation_dim());
}

Vector GRCController::act(const Signals& signals) {
  if (!signals.observation) throw ConfigError("grc: observation missing");
  const int t = signals.t;
  if (t != window_.end()) {
    throw ConfigError("grc: expected step " + std::to_string(window_.end()) +
                      ", got " + std::to_string(t));
  }
  const Matrix A = system_.A(t);
  const Matrix B = system_.B(t);
  const Vector ynat = tracker_.observe(system_.C(t), *signals.observation);
  window_.push(A, B, ynat);
  const auto M = parameters();
  Vector u = Vector::Zero(system_.control_dim());
  for (int j = 0; j <= config_.h; ++j) {
    u += M[j] * window_.signal(t - j, system_.observation_dim());
  }
  tracker_.advance(A, B, u);
  ynat_.push_back(ynat);
  return u;
}

void GRCController::feedback(const Feedback& outcome) {
  const int t = outcome.t;
  const auto M = parameters();
  const auto loss =
      drc_loss(M, window_, t, truncation_, system_.C(t), cost_);
  const Vector g = flatten(loss.gradient);
  ogd_.update(g);
  telemetry_.push_back({t, outcome.cost, stacked_norm(M), ynat_.back().norm(),
                        g.norm(), loss.value});
}

std::unique_ptr<Controller> GRCController::clone() const {
  return std::make_unique<GRCController>(*this);
}

}  // namespace nsc
