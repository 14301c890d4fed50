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

#include "nsc/policies/policy.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "nsc/error.hpp"
#include "nsc/lds/diagnostics.hpp"

namespace nsc {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_blocks(const std::vector<Matrix>& M, const std::string& what) {
  for (size_t i = 1; i < M.size(); ++i) {
    require(M[i].rows() == M[0].rows() && M[i].cols() == M[0].cols(),
            what + ": coefficient " + std::to_string(i) +
                " has inconsistent shape");
  }
}

const Vector& current_signal(const Signals& s) {
  if (s.state) return *s.state;
  require(s.observation != nullptr, "policy needs a state or observation");
  return *s.observation;
}

double spectral_sum(const std::vector<Matrix>& M) {
  double total = 0.0;
  for (const auto& m : M) total += spectral_norm(m);
  return total;
}

Vector act_on(LinearPolicy& p, const Signals& s) {
  return p.K * current_signal(s);
}

Vector act_on(PIDPolicy& p, const Signals& s) {
  const Vector& x = current_signal(s);
  require(x.size() == p.alpha.cols(), "pid: signal dimension mismatch");
  p.integral += x;
  if (p.windup_cap) {
    p.integral = p.integral.cwiseMax(-*p.windup_cap).cwiseMin(*p.windup_cap);
  }
  const Vector u =
      p.alpha * x + p.beta * p.integral + p.gamma * (x - p.previous);
  p.previous = x;
  return u;
}

Vector act_on(BangBangPolicy& p, const Signals& s) {
  const Vector& x = current_signal(s);
  require(p.coordinate < x.size(), "bang-bang: coordinate out of range");
  const double v = x(p.coordinate);
  double u = 0.0;
  if (v < p.x_min) {
    u = p.u_max;
  } else if (v > p.x_max) {
    u = p.u_min;
  }
  return Vector::Constant(p.control_dim, u);
}

Vector act_on(LDCPolicy& p, const Signals& s) {
  const Vector& x = current_signal(s);
  Vector u = p.C * p.s;
  if (p.D) u += *p.D * x;
  p.s = p.A * p.s + p.B * x;
  return u;
}

Vector act_on(GLCPolicy& p, const Signals& s) {
  const Vector& x = current_signal(s);
  Vector u = p.M[0] * x;
  for (size_t i = 1; i < p.M.size(); ++i) u += p.M[i] * p.past[i - 1];
  p.past.push(x);
  return u;
}

Vector act_on(DACPolicy& p, const Signals& s) {
  const Vector& x = current_signal(s);
  if (s.t > 0 && p.w_past.length() > 0) {
    require(s.previous_perturbation != nullptr,
            "dac: perturbation history is not available at step " +
                std::to_string(s.t));
    p.w_past.push(*s.previous_perturbation);
  }
  Vector u = (p.K_t ? p.K_t(s.t) : p.K) * x;
  for (size_t i = 0; i < p.M.size(); ++i) u += p.M[i] * p.w_past[i];
  if (p.offset) u += *p.offset;
  return u;
}

Vector act_on(DRCPolicy& p, const Signals& s) {
  require(s.observation != nullptr, "drc: observation is not available");
  const int t = s.t;
  const Vector ynat = p.tracker.observe(p.system->C(t), *s.observation);
  Vector u = p.M[0] * ynat;
  for (size_t i = 1; i < p.M.size(); ++i) u += p.M[i] * p.ynat_past[i - 1];
  if (p.offset) u += *p.offset;
  p.ynat_past.push(ynat);
  p.tracker.advance(p.system->A(t), p.system->B(t), u);
  return u;
}

}  // namespace

History::History(int length, int dim) : dim_(dim) {
  items_.assign(length, Vector::Zero(dim));
}

void History::push(const Vector& v) {
  if (items_.empty()) return;
  items_.pop_back();
  items_.push_front(v);
}

Vector NaturesY::observe(const Matrix& C, const Vector& y) const {
  return y - C * z_;
}

void NaturesY::advance(const Matrix& A, const Matrix& B, const Vector& u) {
  z_ = A * z_ + B * u;
}

Vector natures_y_step(NaturesY& tracker, const Matrix& A, const Matrix& B,
                      const Matrix& C, const Vector& u, const Vector& y) {
  const Vector ynat = tracker.observe(C, y);
  tracker.advance(A, B, u);
  return ynat;
}

Policy make_linear(Matrix K) { return LinearPolicy{std::move(K)}; }

Policy make_pid(Matrix alpha, Matrix beta, Matrix gamma,
                std::optional<double> windup_cap) {
  require(alpha.rows() == beta.rows() && alpha.rows() == gamma.rows() &&
              alpha.cols() == beta.cols() && alpha.cols() == gamma.cols(),
          "pid: gain matrices must share a shape");
  require(!windup_cap || *windup_cap >= 0, "pid: windup cap must be >= 0");
  PIDPolicy p{std::move(alpha), std::move(beta), std::move(gamma), windup_cap,
              Vector(), Vector()};
  Policy policy = std::move(p);
  reset(policy);
  return policy;
}

Policy make_bang_bang(double x_min, double x_max, double u_min, double u_max,
                      int coordinate, int control_dim) {
  require(x_min <= x_max, "bang-bang: x_min must not exceed x_max");
  require(u_min <= u_max, "bang-bang: u_min must not exceed u_max");
  require(coordinate >= 0 && control_dim >= 1,
          "bang-bang: invalid coordinate or control dimension");
  return BangBangPolicy{x_min, x_max, u_min, u_max, coordinate, control_dim};
}

Policy make_ldc(Matrix A, Matrix B, Matrix C, std::optional<Matrix> D) {
  require(A.rows() == A.cols(), "ldc: A must be square");
  require(B.rows() == A.rows(), "ldc: B must have as many rows as A");
  require(C.cols() == A.rows(), "ldc: C must have as many columns as A");
  require(!D || (D->rows() == C.rows() && D->cols() == B.cols()),
          "ldc: D must be d_u x d_x");
  Policy policy = LDCPolicy{std::move(A), std::move(B), std::move(C),
                            std::move(D), Vector()};
  reset(policy);
  return policy;
}

Policy make_glc(std::vector<Matrix> M) {
  require(!M.empty(), "glc: needs at least M_0");
  check_blocks(M, "glc");
  Policy policy = GLCPolicy{std::move(M), History()};
  reset(policy);
  return policy;
}

Policy make_dac(Matrix K, std::vector<Matrix> M, std::optional<Vector> offset) {
  check_blocks(M, "dac");
  require(M.empty() || (M[0].rows() == K.rows() && M[0].cols() == K.cols()),
          "dac: coefficients must be d_u x d_x like K");
  require(!offset || offset->size() == K.rows(), "dac: offset must be d_u");
  DACPolicy p;
  p.K = std::move(K);
  p.M = std::move(M);
  p.offset = std::move(offset);
  Policy policy = std::move(p);
  reset(policy);
  return policy;
}

Policy make_dac(int control_dim, int state_dim, DACPolicy::GainProvider K_t,
                std::vector<Matrix> M, std::optional<Vector> offset) {
  Policy policy =
      make_dac(Matrix::Zero(control_dim, state_dim), std::move(M),
               std::move(offset));
  std::get<DACPolicy>(policy).K_t = std::move(K_t);
  return policy;
}

Policy make_drc(std::shared_ptr<const LinearSystem> system,
                std::vector<Matrix> M, std::optional<Vector> offset) {
  require(system != nullptr, "drc: needs the system to track nature's y");
  require(!M.empty(), "drc: needs at least M_0");
  check_blocks(M, "drc");
  require(M[0].rows() == system->control_dim() &&
              M[0].cols() == system->observation_dim(),
          "drc: coefficients must be d_u x d_y");
  require(!offset || offset->size() == system->control_dim(),
          "drc: offset must be d_u");
  DRCPolicy p;
  p.M = std::move(M);
  p.offset = std::move(offset);
  p.system = std::move(system);
  Policy policy = std::move(p);
  reset(policy);
  return policy;
}

std::string kind_name(const Policy& policy) {
  static const char* const kNames[] = {"linear", "pid", "bang-bang", "ldc",
                                       "glc",    "dac", "drc"};
  return kNames[policy.index()];
}

void reset(Policy& policy) {
  std::visit(
      [](auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, PIDPolicy>) {
          p.integral = Vector::Zero(p.alpha.cols());
          p.previous = Vector::Zero(p.alpha.cols());
        } else if constexpr (std::is_same_v<P, LDCPolicy>) {
          p.s = Vector::Zero(p.A.rows());
        } else if constexpr (std::is_same_v<P, GLCPolicy>) {
          p.past = History(static_cast<int>(p.M.size()) - 1,
                           static_cast<int>(p.M[0].cols()));
        } else if constexpr (std::is_same_v<P, DACPolicy>) {
          p.w_past = History(static_cast<int>(p.M.size()),
                             static_cast<int>(p.K.cols()));
        } else if constexpr (std::is_same_v<P, DRCPolicy>) {
          p.tracker = NaturesY(p.system->state_dim());
          p.ynat_past = History(static_cast<int>(p.M.size()) - 1,
                                p.system->observation_dim());
        }
      },
      policy);
}

Vector act(Policy& policy, const Signals& signals) {
  return std::visit([&](auto& p) { return act_on(p, signals); }, policy);
}

double parameter_budget(const Policy& policy) {
  return std::visit(
      [](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearPolicy>) {
          return p.K.norm();
        } else if constexpr (std::is_same_v<P, GLCPolicy> ||
                             std::is_same_v<P, DACPolicy> ||
                             std::is_same_v<P, DRCPolicy>) {
          return spectral_sum(p.M);
        } else {
          return 0.0;
        }
      },
      policy);
}

Vector PolicyController::act(const Signals& signals) {
  return nsc::act(policy_, signals);
}

std::unique_ptr<Controller> PolicyController::clone() const {
  return std::make_unique<PolicyController>(*this);
}

LiftedSystem lift_glc(const LinearSystem& system, const GLCPolicy& glc) {
  require(system.time_invariant(), "lift_glc: system must be time-invariant");
  require(!glc.M.empty(), "lift_glc: empty GLC");
  const int dx = system.state_dim();
  const int du = system.control_dim();
  const int blocks = static_cast<int>(glc.M.size());
  const int n = dx * blocks;
  require(glc.M[0].rows() == du && glc.M[0].cols() == dx,
          "lift_glc: GLC coefficients must be d_u x d_x");

  Matrix A = Matrix::Zero(n, n);
  A.topLeftCorner(dx, dx) = system.A();
  for (int k = 1; k < blocks; ++k) {
    A.block(k * dx, (k - 1) * dx, dx, dx).setIdentity();
  }
  Matrix B = Matrix::Zero(n, du);
  B.topRows(dx) = system.B();
  Matrix E = Matrix::Zero(n, dx);
  E.topRows(dx).setIdentity();
  Matrix K(du, n);
  for (int k = 0; k < blocks; ++k) K.middleCols(k * dx, dx) = glc.M[k];
  return LiftedSystem{LinearSystem(std::move(A), std::move(B)), std::move(E),
                      std::move(K)};
}

Policy dac_from_linear(const Matrix& A, const Matrix& B, const Matrix& K,
                       int h) {
  require(h >= 0, "dac_from_linear: h must be nonnegative");
  const Matrix closed = A + B * K;
  const double rho = spectral_radius(closed);
  require(rho < 1.0, "dac_from_linear: A + BK has spectral radius " +
                         format_double(rho) + " >= 1");
  std::vector<Matrix> M;
  M.reserve(h + 1);
  Matrix power = Matrix::Identity(A.rows(), A.cols());
  for (int i = 0; i <= h; ++i) {
    M.push_back(K * power);
    power = power * closed;
  }
  return make_dac(Matrix::Zero(K.rows(), K.cols()), std::move(M));
}

Policy glc_from_ldc(const LDCPolicy& ldc, int h) {
  require(h >= 0, "glc_from_ldc: h must be nonnegative");
  const double rho = spectral_radius(ldc.A);
  require(rho < 1.0, "glc_from_ldc: internal dynamics have spectral radius " +
                         format_double(rho) + " >= 1");
  std::vector<Matrix> M;
  M.reserve(h + 1);
  M.push_back(ldc.D ? *ldc.D : Matrix::Zero(ldc.C.rows(), ldc.B.cols()));
  Matrix power = Matrix::Identity(ldc.A.rows(), ldc.A.cols());
  for (int i = 1; i <= h; ++i) {
    M.push_back(ldc.C * power * ldc.B);
    power = power * ldc.A;
  }
  return make_glc(std::move(M));
}

double approximation_gap(const Policy& a, const Policy& b,
                         const LinearSystem& system,
                         const std::vector<Vector>& perturbations,
                         const CostFunction& cost, const Vector& x0) {
  if (perturbations.empty()) return 0.0;
  const auto source = PerturbationSource::recorded(perturbations);
  SimulationOptions options;
  options.horizon = static_cast<int>(perturbations.size());
  options.x0 = x0;
  Policy pa = a, pb = b;
  reset(pa);
  reset(pb);
  PolicyController ca(std::move(pa)), cb(std::move(pb));
  const auto ta = simulate(system, ca, source, cost, options);
  const auto tb = simulate(system, cb, source, cost, options);
  double total = 0.0;
  for (int t = 0; t < options.horizon; ++t) {
    total += std::abs(ta.cost[t] - tb.cost[t]);
  }
  return total / options.horizon;
}

namespace {

void put_matrix(std::ostream& out, const std::string& name, const Matrix& m) {
  out << name << '\n';
  write_matrix(out, m);
}

void put_blocks(std::ostream& out, const std::vector<Matrix>& M, int first) {
  for (size_t i = 0; i < M.size(); ++i) {
    put_matrix(out, "M" + std::to_string(first + i), M[i]);
  }
}

const std::set<std::string> kScalarKeys = {
    "x_min", "x_max", "u_min", "u_max", "coordinate", "control_dim",
    "windup_cap", "h"};

struct Fields {
  std::map<std::string, double> scalars;
  std::map<std::string, Matrix> matrices;

  const Matrix& matrix(const std::string& key) const {
    auto it = matrices.find(key);
    require(it != matrices.end(), "policy block is missing matrix '" + key + "'");
    return it->second;
  }
  double scalar(const std::string& key) const {
    auto it = scalars.find(key);
    require(it != scalars.end(), "policy block is missing value '" + key + "'");
    return it->second;
  }
  std::optional<Matrix> optional_matrix(const std::string& key) const {
    auto it = matrices.find(key);
    if (it == matrices.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Vector> offset() const {
    auto m = optional_matrix("offset");
    if (!m) return std::nullopt;
    return Vector(Eigen::Map<const Vector>(m->data(), m->size()));
  }
  std::vector<Matrix> blocks(int first) const {
    std::vector<Matrix> M;
    for (int i = first;; ++i) {
      auto it = matrices.find("M" + std::to_string(i));
      if (it == matrices.end()) break;
      M.push_back(it->second);
    }
    return M;
  }
};

}  // namespace

std::string serialize_policy(const Policy& policy) {
  std::ostringstream out;
  out << "policy " << kind_name(policy) << '\n';
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LinearPolicy>) {
          put_matrix(out, "K", p.K);
        } else if constexpr (std::is_same_v<P, PIDPolicy>) {
          if (p.windup_cap) {
            out << "windup_cap " << format_double(*p.windup_cap) << '\n';
          }
          put_matrix(out, "alpha", p.alpha);
          put_matrix(out, "beta", p.beta);
          put_matrix(out, "gamma", p.gamma);
        } else if constexpr (std::is_same_v<P, BangBangPolicy>) {
          out << "x_min " << format_double(p.x_min) << '\n'
              << "x_max " << format_double(p.x_max) << '\n'
              << "u_min " << format_double(p.u_min) << '\n'
              << "u_max " << format_double(p.u_max) << '\n'
              << "coordinate " << p.coordinate << '\n'
              << "control_dim " << p.control_dim << '\n';
        } else if constexpr (std::is_same_v<P, LDCPolicy>) {
          put_matrix(out, "A", p.A);
          put_matrix(out, "B", p.B);
          put_matrix(out, "C", p.C);
          if (p.D) put_matrix(out, "D", *p.D);
        } else if constexpr (std::is_same_v<P, GLCPolicy>) {
          out << "h " << p.M.size() - 1 << '\n';
          put_blocks(out, p.M, 0);
        } else if constexpr (std::is_same_v<P, DACPolicy>) {
          require(!p.K_t, "dac with a time-varying gain cannot be serialized");
          out << "h " << p.M.size() << '\n';
          put_matrix(out, "K", p.K);
          put_blocks(out, p.M, 1);
          if (p.offset) put_matrix(out, "offset", *p.offset);
        } else if constexpr (std::is_same_v<P, DRCPolicy>) {
          out << "h " << p.M.size() - 1 << '\n';
          put_blocks(out, p.M, 0);
          if (p.offset) put_matrix(out, "offset", *p.offset);
        }
      },
      policy);
  out << "end\n";
  return out.str();
}

Policy parse_policy(const std::string& text,
                    std::shared_ptr<const LinearSystem> system) {
  std::istringstream in(text);
  std::string word, kind;
  require(static_cast<bool>(in >> word >> kind) && word == "policy",
          "policy block must start with 'policy <kind>'");
  Fields f;
  bool ended = false;
  while (in >> word) {
    if (word == "end") {
      ended = true;
      break;
    }
    if (kScalarKeys.count(word)) {
      double v = 0.0;
      require(static_cast<bool>(in >> v), "policy value '" + word + "' is malformed");
      f.scalars[word] = v;
    } else {
      try {
        f.matrices[word] = read_matrix(in);
      } catch (const ConfigError& e) {
        throw ConfigError("policy matrix '" + word + "': " + e.what());
      }
    }
  }
  require(ended, "policy block is missing 'end'");

  if (kind == "linear") return make_linear(f.matrix("K"));
  if (kind == "pid") {
    std::optional<double> cap;
    if (f.scalars.count("windup_cap")) cap = f.scalar("windup_cap");
    return make_pid(f.matrix("alpha"), f.matrix("beta"), f.matrix("gamma"),
                    cap);
  }
  if (kind == "bang-bang") {
    return make_bang_bang(f.scalar("x_min"), f.scalar("x_max"),
                          f.scalar("u_min"), f.scalar("u_max"),
                          static_cast<int>(f.scalar("coordinate")),
                          static_cast<int>(f.scalar("control_dim")));
  }
  if (kind == "ldc") {
    return make_ldc(f.matrix("A"), f.matrix("B"), f.matrix("C"),
                    f.optional_matrix("D"));
  }
  if (kind == "glc") return make_glc(f.blocks(0));
  if (kind == "dac") return make_dac(f.matrix("K"), f.blocks(1), f.offset());
  if (kind == "drc") {
    require(system != nullptr, "drc policy needs the system it tracks");
    return make_drc(std::move(system), f.blocks(0), f.offset());
  }
  throw ConfigError("unknown policy kind '" + kind + "'");
}

}  // namespace nsc
