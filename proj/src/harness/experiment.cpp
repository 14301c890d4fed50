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

#include "nsc/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "json.hpp"

#include "nsc/error.hpp"
#include "nsc/harness/comparators.hpp"
#include "nsc/io.hpp"
#include "nsc/online/controllers.hpp"
#include "nsc/optimal/lqr.hpp"

namespace nsc {
namespace {

// Remembers the last step handed to the wrapped controller, for error
// messages.
class StepTracker final : public Controller {
 public:
  StepTracker(Controller& inner, int& step) : inner_(inner), step_(step) {}
  Vector act(const Signals& s) override {
    step_ = s.t;
    return inner_.act(s);
  }
  void feedback(const Feedback& f) override { inner_.feedback(f); }
  std::unique_ptr<Controller> clone() const override {
    throw ConfigError("StepTracker cannot be cloned");
  }

 private:
  Controller& inner_;
  int& step_;
};

class GainController final : public Controller {
 public:
  explicit GainController(std::function<Matrix(int)> K) : K_(std::move(K)) {}
  Vector act(const Signals& s) override {
    if (!s.state) throw ConfigError("linear controller needs the state");
    return K_(s.t) * *s.state;
  }
  std::unique_ptr<Controller> clone() const override {
    return std::make_unique<GainController>(*this);
  }

 private:
  std::function<Matrix(int)> K_;
};

void require_shape(const std::string& what,
                   const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ConfigError(what + " is " +
                      std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void require_size(const std::string& what,
                  const Vector& v, Eigen::Index size) {
  if (v.size() != size) {
    throw ConfigError(what + " has " +
                      std::to_string(v.size()) + " entries, expected " +
                      std::to_string(size));
  }
}

bool has_nonzero_gain(const std::function<Matrix(int)>& K) {
  return K && !K(0).isZero(0.0);
}

CostFunction stabilized_cost(const CostFunction& cost, const Matrix& K) {
  return CostFunction::custom(
      [cost, K](const Vector& x, const Vector& u, int t) {
        return cost(x, K * x + u, t);
      },
      [cost, K](const Vector& x, const Vector& u, int t) {
        const CostGradient g = cost.gradient(x, K * x + u, t);
        return CostGradient{g.state + K.transpose() * g.control, g.control};
      });
}

std::string csv_number(double v) { return format_double(v); }

std::string located(const ScenarioConfig& c, int step,
                    const std::exception& e) {
  std::string msg = c.source.empty() ? c.name : c.source;
  if (step >= 0) msg += " (step " + std::to_string(step) + ")";
  return msg + ": " + e.what();
}

}  // namespace

StabilizedController::StabilizedController(Matrix K,
                                           std::unique_ptr<Controller> inner)
    : K_(std::move(K)), inner_(std::move(inner)) {}

Vector StabilizedController::act(const Signals& signals) {
  if (!signals.state) {
    throw ConfigError("stabilized controller needs the state");
  }
  Signals inner = signals;
  inner.observation = signals.state;
  inner_control_ = inner_->act(inner);
  return K_ * *signals.state + inner_control_;
}

void StabilizedController::feedback(const Feedback& outcome) {
  Feedback inner = outcome;
  inner.control = &inner_control_;
  if (outcome.next_state) inner.next_observation = outcome.next_state;
  inner_->feedback(inner);
}

std::unique_ptr<Controller> StabilizedController::clone() const {
  auto copy = std::make_unique<StabilizedController>(K_, inner_->clone());
  copy->inner_control_ = inner_control_;
  return copy;
}

namespace {

ResolvedScenario resolve_impl(const ScenarioConfig& c) {
  const bool custom = c.preset == "custom";
  std::optional<Scenario> base;
  if (custom) {
    if (!c.A || !c.B) throw ConfigError("custom system needs A and B");
    base = Scenario{"custom", "user-supplied matrices",
                    LinearSystem(*c.A, *c.B, c.C),
                    Matrix(), Matrix(), Matrix(), Vector(), nullptr,
                    std::nullopt};
  } else {
    base = make_preset(c.preset);
    if (c.A || c.B || c.C) {
      if (!base->system.time_invariant()) {
        throw ConfigError("preset " + c.preset +
                          " is time-varying; its matrices cannot be overridden");
      }
      const SystemMatrices& m = *base->system.fixed();
      base->system = LinearSystem(c.A.value_or(m.A), c.B.value_or(m.B),
                                  c.C ? c.C : m.C);
      base->nonlinear.reset();
    }
  }
  Scenario& s = *base;
  const int dx = s.system.state_dim(), du = s.system.control_dim(),
            dy = s.system.observation_dim();
  if (c.D) s.disturbance = *c.D;
  if (s.disturbance.size() == 0) s.disturbance = Matrix::Identity(dx, dx);
  if (c.Q) s.Q = *c.Q;
  if (s.Q.size() == 0) s.Q = Matrix::Identity(dy, dy);
  if (c.R) s.R = *c.R;
  if (s.R.size() == 0) s.R = Matrix::Identity(du, du);
  if (c.target) s.target = *c.target;
  if (s.target.size() == 0) s.target = Vector::Zero(dy);
  require_shape("D", s.disturbance, dx, s.disturbance.cols());
  require_shape("Q", s.Q, dy, dy);
  require_shape("R", s.R, du, du);
  require_size("target", s.target, dy);

  ResolvedScenario r{s, CostFunction::quadratic(s.Q, s.R, s.target), nullptr,
                     Vector::Zero(dx)};
  if (c.x0) {
    require_size("x0", *c.x0, dx);
    r.x0 = *c.x0;
  }

  if (c.gain == "preset") {
    r.gain = (c.A || c.B || c.Q || c.R) && !custom ? nullptr : s.gain;
    if (!r.gain && s.system.fully_observed() && s.system.time_invariant()) {
      try {
        r.gain = [K = dare_solve(s.system.A(), s.system.B(), s.Q, s.R).K](int) {
          return K;
        };
      } catch (const NumericalError&) {
        r.gain = nullptr;
      }
    }
  } else if (c.gain == "lqr") {
    if (!s.system.fully_observed() || !s.system.time_invariant()) {
      throw ConfigError("K = lqr needs a fully observed time-invariant system");
    }
    const Matrix K = dare_solve(s.system.A(), s.system.B(), s.Q, s.R).K;
    r.gain = [K](int) { return K; };
  } else if (c.gain == "zero") {
    r.gain = [K = Matrix::Zero(du, dx)](int) { return K; };
  } else {
    require_shape("K", *c.K, du, dx);
    r.gain = [K = *c.K](int) { return K; };
  }
  r.scenario.gain = r.gain;
  return r;
}

std::vector<Vector> perturbations_impl(const ScenarioConfig& c,
                                       const Scenario& scenario) {
  const int d = scenario.noise_dim();
  const NoiseSpec& n = c.noise;
  std::vector<Vector> v;
  switch (n.shape) {
    case NoiseShape::kZero:
      v = sample_sequence(PerturbationSource(ZeroNoise{}, d, n.clip), c.horizon, 0);
      break;
    case NoiseShape::kGaussian:
      v = sample_sequence(PerturbationSource(GaussianNoise{n.scale}, d, n.clip),
                          c.horizon, component_seed(c.seed, "noise"));
      break;
    case NoiseShape::kUniformBall:
      v = sample_sequence(
          PerturbationSource(UniformBallNoise{n.scale}, d, n.clip), c.horizon,
          component_seed(c.seed, "noise"));
      break;
    case NoiseShape::kSinusoidal: {
      Vector phase = Vector::Zero(d);
      if (n.random_phase) {
        Rng rng(component_seed(c.seed, "phase"));
        std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
        for (int i = 0; i < d; ++i) phase(i) = angle(rng);
      }
      v = sample_sequence(
          PerturbationSource(
              SinusoidalNoise{n.scale, 2.0 * M_PI / n.period, phase}, d,
              n.clip),
          c.horizon, 0);
      break;
    }
    case NoiseShape::kConstant:
      require_size("noise value", n.constant, d);
      v = sample_sequence(PerturbationSource(ConstantNoise{n.constant}, d, n.clip),
                          c.horizon, 0);
      break;
    case NoiseShape::kRecorded: {
      const Matrix rows = load_matrix_file(n.recorded_file);
      if (rows.cols() != d || rows.rows() < c.horizon) {
        throw ConfigError("recorded noise " + n.recorded_file +
                          " must have at least " + std::to_string(c.horizon) +
                          " rows of " + std::to_string(d) + " entries");
      }
      for (int t = 0; t < c.horizon; ++t) {
        Vector row = rows.row(t).transpose();
        v.push_back(n.clip ? clip_to_unit_ball(row) : row);
      }
      break;
    }
  }
  std::vector<Vector> w;
  w.reserve(v.size());
  for (const Vector& vt : v) w.push_back(scenario.disturbance * vt);
  return w;
}

}  // namespace

ResolvedScenario resolve_scenario(const ScenarioConfig& c) {
  try {
    return resolve_impl(c);
  } catch (const ConfigError& e) {
    throw ConfigError(located(c, -1, e));
  } catch (const NumericalError& e) {
    throw NumericalError(located(c, -1, e));
  }
}

std::vector<Vector> perturbation_sequence(const ScenarioConfig& c,
                                          const Scenario& scenario) {
  try {
    return perturbations_impl(c, scenario);
  } catch (const ConfigError& e) {
    throw ConfigError(located(c, -1, e));
  }
}

std::vector<Vector> natural_observations(const LinearSystem& system,
                                         const std::vector<Vector>& w,
                                         const Vector& x0) {
  std::vector<Vector> y;
  y.reserve(w.size());
  Vector x = x0.size() ? x0 : Vector::Zero(system.state_dim());
  const Vector u = Vector::Zero(system.control_dim());
  for (int t = 0; t < static_cast<int>(w.size()); ++t) {
    y.push_back(observe(system, x, t));
    x = step(system, x, u, w[t], t);
  }
  return y;
}

namespace {

struct Learner {
  std::unique_ptr<Controller> controller;
  const std::vector<TelemetryRow>* telemetry = nullptr;
  // Pre-stabilized plant and gain for the GRC comparator.
  std::optional<LinearSystem> closed_loop;
  Matrix outer_gain;
};

Learner make_learner(const ScenarioConfig& c, const ResolvedScenario& r) {
  const LinearSystem& sys = r.scenario.system;
  const int du = sys.control_dim();
  Learner l;
  switch (c.controller) {
    case ControllerKind::kZero:
      l.controller = std::make_unique<ZeroController>(du);
      break;
    case ControllerKind::kLinear:
    case ControllerKind::kLqr: {
      if (!sys.fully_observed()) {
        throw ConfigError(controller_name(c.controller) +
                          " controller needs a fully observed system");
      }
      auto K = r.gain;
      if (c.controller == ControllerKind::kLqr && sys.time_invariant()) {
        const Matrix gain = dare_solve(sys.A(), sys.B(), r.scenario.Q,
                                       r.scenario.R).K;
        K = [gain](int) { return gain; };
      }
      if (!K) throw ConfigError("no gain available for " + c.preset);
      l.controller = std::make_unique<GainController>(K);
      break;
    }
    case ControllerKind::kGpc: {
      if (!sys.fully_observed()) {
        throw ConfigError("gpc needs a fully observed system; use grc");
      }
      if (!r.gain) {
        throw ConfigError("gpc needs a stabilizing gain; set [controller] K");
      }
      auto gpc = std::make_unique<GPCController>(sys, r.gain, r.cost, c.online);
      l.telemetry = &gpc->telemetry();
      l.controller = std::move(gpc);
      break;
    }
    case ControllerKind::kGrc: {
      if (sys.fully_observed() && has_nonzero_gain(r.gain)) {
        if (!sys.time_invariant()) {
          throw ConfigError("grc with a stabilizing gain needs a time-invariant system");
        }
        const Matrix K = r.gain(0);
        const int dx = sys.state_dim();
        l.closed_loop = LinearSystem(sys.A() + sys.B() * K, sys.B(),
                                     Matrix(Matrix::Identity(dx, dx)));
        l.outer_gain = K;
        auto grc = std::make_unique<GRCController>(
            *l.closed_loop, stabilized_cost(r.cost, K), c.online);
        l.telemetry = &grc->telemetry();
        l.controller = std::make_unique<StabilizedController>(K, std::move(grc));
      } else {
        const LinearSystem observed =
            sys.fully_observed() && sys.time_invariant()
                ? LinearSystem(sys.A(), sys.B(),
                               Matrix(Matrix::Identity(sys.state_dim(),
                                                       sys.state_dim())))
                : sys;
        auto grc = std::make_unique<GRCController>(observed, r.cost, c.online);
        l.telemetry = &grc->telemetry();
        l.controller = std::move(grc);
      }
      break;
    }
  }
  return l;
}

ComparatorKind effective_comparator(const ScenarioConfig& c,
                                    const LinearSystem& sys) {
  if (c.comparator != ComparatorKind::kAuto) return c.comparator;
  switch (c.controller) {
    case ControllerKind::kGpc: return ComparatorKind::kDac;
    case ControllerKind::kGrc: return ComparatorKind::kDrc;
    default:
      return sys.fully_observed() && sys.time_invariant()
                 ? ComparatorKind::kLinear
                 : ComparatorKind::kNone;
  }
}

ComparatorResult run_comparator(const ScenarioConfig& c,
                                const ResolvedScenario& r, const Learner& l,
                                ComparatorKind kind,
                                const std::vector<Vector>& w) {
  const LinearSystem& sys = r.scenario.system;
  ComparatorOptions opt = c.comparator_options;
  const int h = c.online.h;
  switch (kind) {
    case ComparatorKind::kDac: {
      if (!sys.fully_observed()) {
        throw ConfigError("dac comparator needs a fully observed system");
      }
      if (!r.gain) throw ConfigError("dac comparator needs a gain");
      const AffineRollout rollout = dac_rollout(sys, r.gain, w, h, r.x0);
      const AffineMinimum min = minimize_affine(
          rollout, r.cost, opt, sys.control_dim() * sys.state_dim());
      ComparatorResult out;
      out.name = "dac";
      out.M = unflatten(min.m, h, sys.control_dim(), sys.state_dim());
      out.K = r.gain(0);
      out.costs = min.costs;
      out.total_cost = min.total;
      out.iterations = min.iterations;
      out.converged = min.converged;
      out.method = min.method;
      if (!min.converged) {
        out.warnings.push_back("dac comparator: gradient tolerance not reached");
      }
      return out;
    }
    case ComparatorKind::kDrc: {
      if (l.closed_loop) {
        return best_stabilized_drc_in_hindsight(
            *l.closed_loop, l.outer_gain,
            natural_observations(*l.closed_loop, w, r.x0), r.cost, h, opt);
      }
      return best_drc_in_hindsight(sys, natural_observations(sys, w, r.x0),
                                   r.cost, h, opt);
    }
    case ComparatorKind::kLinear: {
      if (!sys.fully_observed() || !sys.time_invariant()) {
        throw ConfigError("linear comparator needs a fully observed time-invariant system");
      }
      if (!r.x0.isZero(0.0)) {
        throw ConfigError("linear comparator assumes x0 = 0");
      }
      LinearSearchOptions search;
      if (r.gain) search.extra_starts.push_back(r.gain(0));
      return best_linear_in_hindsight(sys, w, r.cost, search);
    }
    default: {
      ComparatorResult none;
      none.name = "none";
      none.method = "none";
      none.costs.assign(w.size(), 0.0);
      return none;
    }
  }
}

}  // namespace

Trajectory simulate_experiment(const ScenarioConfig& c) {
  int step = -1;
  try {
    const ResolvedScenario r = resolve_impl(c);
    const std::vector<Vector> w = perturbations_impl(c, r.scenario);
    Learner learner = make_learner(c, r);
    SimulationOptions sim;
    sim.horizon = c.horizon;
    sim.seed = component_seed(c.seed, "simulate");
    sim.x0 = r.x0;
    StepTracker tracked(*learner.controller, step);
    return simulate(r.scenario.system, tracked,
                    PerturbationSource::recorded(w), r.cost, sim);
  } catch (const ConfigError& e) {
    throw ConfigError(located(c, step, e));
  } catch (const NumericalError& e) {
    throw NumericalError(located(c, step, e));
  }
}

RegretReport run_experiment(const ScenarioConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  int step = -1;
  try {
    const ResolvedScenario r = resolve_impl(c);
    const std::vector<Vector> w = perturbations_impl(c, r.scenario);
    Learner learner = make_learner(c, r);

    SimulationOptions sim;
    sim.horizon = c.horizon;
    sim.seed = component_seed(c.seed, "simulate");
    sim.x0 = r.x0;
    StepTracker tracked(*learner.controller, step);
    const Trajectory traj = simulate(r.scenario.system, tracked,
                                     PerturbationSource::recorded(w),
                                     r.cost, sim);
    step = -1;

    const ComparatorKind kind = effective_comparator(c, r.scenario.system);
    const ComparatorResult comp = run_comparator(c, r, learner, kind, w);

    RegretReport rep;
    rep.name = c.name;
    rep.source = c.source;
    rep.preset = c.preset;
    rep.controller = controller_name(c.controller);
    rep.noise = noise_name(c.noise.shape);
    rep.comparator = comp.name;
    rep.comparator_method = comp.method;
    rep.comparator_converged = comp.converged;
    rep.comparator_iterations = comp.iterations;
    rep.horizon = c.horizon;
    rep.seed = c.seed;
    rep.warnings = comp.warnings;
    rep.empirical_gamma = traj.empirical_gamma;
    if (learner.telemetry) rep.telemetry = *learner.telemetry;

    double cum = 0.0, cum_comp = 0.0;
    for (int t = 0; t < c.horizon; ++t) {
      cum += traj.cost[t];
      cum_comp += comp.costs[t];
      rep.cost.push_back(traj.cost[t]);
      rep.cum_cost.push_back(cum);
      rep.comparator_cost.push_back(comp.costs[t]);
      rep.cum_comparator_cost.push_back(cum_comp);
      rep.avg_regret.push_back((cum - cum_comp) / (t + 1));
      rep.state_norm.push_back(traj.x[t].norm());
    }
    rep.total_cost = cum;
    rep.comparator_total_cost = cum_comp;
    rep.average_regret = rep.avg_regret.back();
    if (kind != ComparatorKind::kNone && cum_comp > cum + 1e-6 * (1.0 + cum)) {
      rep.warnings.push_back(
          "comparator cost exceeds the learner's; the comparator class does "
          "not contain the learner's iterates");
    }
    rep.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!c.out_dir.empty()) write_report(rep, c.out_dir);
    return rep;
  } catch (const ConfigError& e) {
    throw ConfigError(located(c, step, e));
  } catch (const NumericalError& e) {
    throw NumericalError(located(c, step, e));
  }
}

std::string report_csv(const RegretReport& r) {
  std::ostringstream out;
  out << "t,cost,cum_cost,cum_comparator_cost,avg_regret,state_norm\n";
  for (size_t i = 0; i < r.cost.size(); ++i) {
    out << (i + 1) << ',' << csv_number(r.cost[i]) << ','
        << csv_number(r.cum_cost[i]) << ','
        << csv_number(r.cum_comparator_cost[i]) << ','
        << csv_number(r.avg_regret[i]) << ',' << csv_number(r.state_norm[i])
        << '\n';
  }
  return out.str();
}

std::string report_json(const RegretReport& r) {
  std::string warnings;
  for (const auto& w : r.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
  // nlohmann::json objects keep keys sorted.
  nlohmann::json j;
  j["name"] = r.name;
  j["source"] = r.source;
  j["preset"] = r.preset;
  j["controller"] = r.controller;
  j["noise"] = r.noise;
  j["comparator"] = r.comparator;
  j["comparator_method"] = r.comparator_method;
  j["comparator_converged"] = r.comparator_converged;
  j["comparator_iterations"] = r.comparator_iterations;
  j["horizon"] = r.horizon;
  j["seed"] = r.seed;
  j["total_cost"] = r.total_cost;
  j["comparator_total_cost"] = r.comparator_total_cost;
  j["average_regret"] = r.average_regret;
  j["empirical_gamma"] = r.empirical_gamma;
  j["warnings"] = warnings;
  j["csv"] = r.name + ".csv";
  return j.dump(2) + "\n";
}

std::string telemetry_csv(const std::vector<TelemetryRow>& rows) {
  std::ostringstream out;
  out << "t,cost,parameter_norm,perturbation_norm,gradient_norm,"
         "counterfactual_loss\n";
  for (const auto& row : rows) {
    out << row.t << ',' << csv_number(row.cost) << ','
        << csv_number(row.parameter_norm) << ','
        << csv_number(row.perturbation_norm) << ','
        << csv_number(row.gradient_norm) << ','
        << csv_number(row.counterfactual_loss) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  const auto columns = [&out](const char* prefix, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << prefix << i;
  };
  out << "t,cost";
  const Eigen::Index dx = traj.x.front().size();
  const Eigen::Index du = traj.u.empty() ? 0 : traj.u.front().size();
  const Eigen::Index dy = traj.y.empty() ? 0 : traj.y.front().size();
  columns("x", dx);
  columns("u", du);
  columns("w", dx);
  columns("y", dy);
  out << '\n';
  const auto values = [&out](const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << csv_number(v(i));
  };
  for (int t = 0; t < traj.horizon(); ++t) {
    out << t << ',' << csv_number(traj.cost[t]);
    values(traj.x[t]);
    values(traj.u[t]);
    values(traj.w[t]);
    values(traj.y[t]);
    out << '\n';
  }
  return out.str();
}

void write_report(const RegretReport& r, const std::string& dir) {
  const std::filesystem::path base(dir);
  write_file_atomic((base / (r.name + ".csv")).string(), report_csv(r));
  write_file_atomic((base / (r.name + ".json")).string(), report_json(r));
  if (!r.telemetry.empty()) {
    write_file_atomic((base / (r.name + "_telemetry.csv")).string(),
                      telemetry_csv(r.telemetry));
  }
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("csv: no column " + name);
  const size_t k = static_cast<size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[k]);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  const auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(in, line)) throw ConfigError("csv: empty input");
  table.header = split(line);
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ConfigError("csv: line " + std::to_string(number) + " has " +
                        std::to_string(cells.size()) + " cells");
    }
    std::vector<double> row;
    for (const auto& cell : cells) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || *end != '\0') {
        throw ConfigError("csv: line " + std::to_string(number) +
                          ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

RegretReport report_from_csv(const std::string& text) {
  const CsvTable table = parse_csv(text);
  RegretReport r;
  r.cum_cost = table.column("cum_cost");
  r.cost = table.column("cost");
  r.cum_comparator_cost = table.column("cum_comparator_cost");
  r.avg_regret = table.column("avg_regret");
  r.state_norm = table.column("state_norm");
  r.horizon = static_cast<int>(table.rows.size());
  if (!r.cost.empty()) {
    r.total_cost = r.cum_cost.back();
    r.comparator_total_cost = r.cum_comparator_cost.back();
    r.average_regret = r.avg_regret.back();
  }
  return r;
}

std::vector<BatchOutcome> run_batch(const std::vector<ScenarioConfig>& configs,
                                    int workers) {
  std::set<std::string> outputs;
  for (const auto& c : configs) {
    if (c.out_dir.empty()) continue;
    const auto key =
        (std::filesystem::path(c.out_dir) / c.name).lexically_normal().string();
    if (!outputs.insert(key).second) {
      throw ConfigError("batch: two experiments write to " + key);
    }
  }
  std::vector<BatchOutcome> outcomes(configs.size());
  std::atomic<size_t> next{0};
  const auto work = [&]() {
    for (size_t i = next++; i < configs.size(); i = next++) {
      try {
        outcomes[i].report = run_experiment(configs[i]);
      } catch (const ConfigError& e) {
        outcomes[i].error = e.what();
        outcomes[i].exit_code = 2;
      } catch (const NumericalError& e) {
        outcomes[i].error = e.what();
        outcomes[i].exit_code = 3;
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(configs.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return outcomes;
}

}  // namespace nsc
