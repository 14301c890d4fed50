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

#include "nsc/harness/comparators.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "nsc/error.hpp"
#include "nsc/optimal/lqr.hpp"

namespace nsc {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Columns of the block for M (rows x cols, column-major) applied to v:
// M v = (v' kron I_rows) vec(M).
void add_kron_block(Matrix& U, Eigen::Index offset, const Vector& v,
                    int rows) {
  for (Eigen::Index c = 0; c < v.size(); ++c) {
    for (int r = 0; r < rows; ++r) U(r, offset + c * rows + r) += v(c);
  }
}

struct Evaluation {
  double total = 0.0;
  std::vector<double> costs;
};

Evaluation evaluate(const AffineRollout& r, const CostFunction& cost,
                    const Vector& m) {
  Evaluation e;
  e.costs.reserve(r.X.size());
  for (size_t t = 0; t < r.X.size(); ++t) {
    const double c = cost(r.X[t] * m + r.x0[t], r.U[t] * m + r.u0[t],
                          static_cast<int>(t));
    e.costs.push_back(c);
    e.total += c;
  }
  return e;
}

Vector gradient(const AffineRollout& r, const CostFunction& cost,
                const Vector& m) {
  Vector g = Vector::Zero(m.size());
  for (size_t t = 0; t < r.X.size(); ++t) {
    const auto cg = cost.gradient(r.X[t] * m + r.x0[t], r.U[t] * m + r.u0[t],
                                  static_cast<int>(t));
    g += r.X[t].transpose() * cg.state + r.U[t].transpose() * cg.control;
  }
  return g;
}

Vector project(const Vector& m, const ComparatorOptions& o, int block) {
  switch (o.projection) {
    case ProjectionKind::kNone:
      return m;
    case ProjectionKind::kBall: {
      const double n = m.norm();
      return n > o.radius ? Vector(m * (o.radius / n)) : m;
    }
    case ProjectionKind::kBlockNormSum:
      return project_block_norm_sum(m, block, o.radius);
  }
  return m;
}

// argmin m'Hm + 2g'm over ||m|| <= radius (radius <= 0: unconstrained).
Vector trust_region_minimizer(const Matrix& H, const Vector& g,
                              double radius) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (H + H.transpose()));
  if (eig.info() != Eigen::Success) {
    throw NumericalError("comparator: eigendecomposition failed");
  }
  const Vector& lambda = eig.eigenvalues();
  const Matrix& V = eig.eigenvectors();
  const Vector gamma = V.transpose() * g;
  const double cutoff = kRankTolerance * std::max(lambda.maxCoeff(), 0.0);
  auto solution = [&](double mu) {
    Vector coef(gamma.size());
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
      const double d = lambda(i) + mu;
      coef(i) = (mu == 0.0 && lambda(i) <= cutoff) ? 0.0 : -gamma(i) / d;
    }
    return Vector(V * coef);
  };
  Vector m = solution(0.0);
  if (radius <= 0.0 || m.norm() <= radius) return m;
  double lo = 0.0;
  double hi = g.norm() / radius;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (solution(mid).norm() > radius ? lo : hi) = mid;
  }
  m = solution(hi);
  const double n = m.norm();
  if (n > radius) m *= radius / n;
  return m;
}

}  // namespace

AffineRollout dac_rollout(const LinearSystem& system,
                          const std::function<Matrix(int)>& K_t,
                          const std::vector<Vector>& w, int h,
                          const Vector& x0) {
  if (h < 1) throw ConfigError("dac comparator: h must be >= 1");
  if (!system.fully_observed()) {
    throw ConfigError("dac comparator: needs a fully observed system");
  }
  const int dx = system.state_dim(), du = system.control_dim();
  const Eigen::Index p = static_cast<Eigen::Index>(h) * du * dx;
  const int T = static_cast<int>(w.size());
  AffineRollout r;
  Matrix X = Matrix::Zero(dx, p);
  Vector x = x0.size() ? x0 : Vector::Zero(dx);
  for (int t = 0; t < T; ++t) {
    const SystemMatrices sm = system.at(t);
    const Matrix K = K_t(t);
    Matrix U = K * X;
    for (int j = 1; j <= h && t - j >= 0; ++j) {
      add_kron_block(U, static_cast<Eigen::Index>(j - 1) * du * dx, w[t - j],
                     du);
    }
    const Vector u = K * x;
    r.X.push_back(X);
    r.U.push_back(U);
    r.x0.push_back(x);
    r.u0.push_back(u);
    X = sm.A * X + sm.B * U;
    x = sm.A * x + sm.B * u + w[t];
  }
  return r;
}

AffineRollout drc_rollout(const LinearSystem& system,
                          const std::vector<Vector>& ynat, int h) {
  if (h < 0) throw ConfigError("drc comparator: h must be >= 0");
  const int dx = system.state_dim(), du = system.control_dim();
  const int dy = system.observation_dim();
  const Eigen::Index p = static_cast<Eigen::Index>(h + 1) * du * dy;
  const int T = static_cast<int>(ynat.size());
  AffineRollout r;
  Matrix Z = Matrix::Zero(dx, p);
  for (int t = 0; t < T; ++t) {
    const SystemMatrices sm = system.at(t);
    Matrix U = Matrix::Zero(du, p);
    for (int j = 0; j <= h && t - j >= 0; ++j) {
      add_kron_block(U, static_cast<Eigen::Index>(j) * du * dy, ynat[t - j],
                     du);
    }
    r.X.push_back(system.C(t) * Z);
    r.U.push_back(U);
    r.x0.push_back(ynat[t]);
    r.u0.push_back(Vector::Zero(du));
    Z = sm.A * Z + sm.B * U;
  }
  return r;
}

AffineMinimum minimize_affine(const AffineRollout& rollout,
                              const CostFunction& cost,
                              const ComparatorOptions& options,
                              int block_size) {
  if (rollout.X.empty()) throw ConfigError("comparator: empty rollout");
  const Eigen::Index p = rollout.X[0].cols();
  const QuadraticCost* quad = cost.quadratic_terms();
  AffineMinimum out;

  Matrix H;
  if (quad) {
    H = Matrix::Zero(p, p);
    Vector g = Vector::Zero(p);
    for (size_t t = 0; t < rollout.X.size(); ++t) {
      const Matrix& X = rollout.X[t];
      const Matrix& U = rollout.U[t];
      Vector dx = rollout.x0[t];
      if (quad->target.size()) dx -= quad->target;
      H += X.transpose() * quad->Q * X + U.transpose() * quad->R * U;
      g += X.transpose() * (quad->Q * dx) + U.transpose() * (quad->R * rollout.u0[t]);
    }
    if (options.projection != ProjectionKind::kBlockNormSum) {
      const double radius =
          options.projection == ProjectionKind::kBall ? options.radius : 0.0;
      out.m = trust_region_minimizer(H, g, radius);
      out.method = "exact quadratic";
      const Evaluation e = evaluate(rollout, cost, out.m);
      out.costs = e.costs;
      out.total = e.total;
      return out;
    }
  }

  // Projected gradient descent, keeping the best iterate seen.
  double L;
  if (quad) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H, Eigen::EigenvaluesOnly);
    L = 2.0 * eig.eigenvalues().maxCoeff();
  } else {
    // Curvature along a fixed probe direction from the origin.
    Vector probe = Vector::LinSpaced(p, 1.0, 2.0);
    probe *= 1e-3 / probe.norm();
    L = (gradient(rollout, cost, probe) -
         gradient(rollout, cost, Vector::Zero(p))).norm() / probe.norm();
  }
  if (!(L > 0.0) || !std::isfinite(L)) L = 1.0;
  Vector m = Vector::Zero(p);
  Evaluation best = evaluate(rollout, cost, m);
  Vector best_m = m;
  out.converged = false;
  out.method = quad ? "projected gradient, step 1/L"
                    : "projected gradient, step 1/(L sqrt(k))";
  for (int k = 1; k <= options.max_iter; ++k) {
    const double eta = quad ? 1.0 / L : 1.0 / (L * std::sqrt(k));
    const Vector next = project(m - eta * gradient(rollout, cost, m), options,
                                block_size);
    const double moved = (next - m).norm() / eta;
    m = next;
    out.iterations = k;
    const Evaluation e = evaluate(rollout, cost, m);
    if (e.total < best.total) {
      best = e;
      best_m = m;
    }
    if (moved <= options.grad_tol) {
      out.converged = true;
      break;
    }
  }
  out.m = best_m;
  out.costs = best.costs;
  out.total = best.total;
  return out;
}

ComparatorResult best_dac_in_hindsight(const LinearSystem& system,
                                       const Matrix& K,
                                       const std::vector<Vector>& w,
                                       const CostFunction& cost, int h,
                                       const ComparatorOptions& options) {
  return best_dac_in_hindsight(
      system, [K](int) { return K; }, w, cost, h, options);
}

ComparatorResult best_dac_in_hindsight(const LinearSystem& system,
                                       const std::function<Matrix(int)>& K_t,
                                       const std::vector<Vector>& w,
                                       const CostFunction& cost, int h,
                                       const ComparatorOptions& options) {
  const int dx = system.state_dim(), du = system.control_dim();
  const AffineRollout rollout = dac_rollout(system, K_t, w, h);
  const AffineMinimum min = minimize_affine(rollout, cost, options, du * dx);
  ComparatorResult r;
  r.name = "dac";
  r.M = unflatten(min.m, h, du, dx);
  r.K = K_t(0);
  r.costs = min.costs;
  r.total_cost = min.total;
  r.iterations = min.iterations;
  r.converged = min.converged;
  r.method = min.method;
  if (!min.converged) {
    r.warnings.push_back("dac comparator: gradient tolerance not reached in " +
                         std::to_string(min.iterations) +
                         " iterations; using the best iterate");
  }
  return r;
}

namespace {

ComparatorResult drc_result(const AffineRollout& rollout,
                            const CostFunction& cost, int h, int du, int dy,
                            const ComparatorOptions& options) {
  const AffineMinimum min = minimize_affine(rollout, cost, options, du * dy);
  ComparatorResult r;
  r.name = "drc";
  r.M = unflatten(min.m, h + 1, du, dy);
  r.costs = min.costs;
  r.total_cost = min.total;
  r.iterations = min.iterations;
  r.converged = min.converged;
  r.method = min.method;
  if (!min.converged) {
    r.warnings.push_back("drc comparator: gradient tolerance not reached in " +
                         std::to_string(min.iterations) +
                         " iterations; using the best iterate");
  }
  return r;
}

}  // namespace

ComparatorResult best_drc_in_hindsight(const LinearSystem& system,
                                       const std::vector<Vector>& ynat,
                                       const CostFunction& cost, int h,
                                       const ComparatorOptions& options) {
  return drc_result(drc_rollout(system, ynat, h), cost, h,
                    system.control_dim(), system.observation_dim(), options);
}

ComparatorResult best_stabilized_drc_in_hindsight(
    const LinearSystem& closed_loop, const Matrix& K,
    const std::vector<Vector>& ynat, const CostFunction& cost, int h,
    const ComparatorOptions& options) {
  const Matrix C = closed_loop.C();
  if (C.rows() != C.cols() || !C.isIdentity(0.0)) {
    throw ConfigError("stabilized drc comparator: needs C = I");
  }
  if (K.rows() != closed_loop.control_dim() ||
      K.cols() != closed_loop.state_dim()) {
    throw ConfigError("stabilized drc comparator: K has the wrong shape");
  }
  AffineRollout rollout = drc_rollout(closed_loop, ynat, h);
  for (size_t t = 0; t < rollout.X.size(); ++t) {
    rollout.U[t] += K * rollout.X[t];
    rollout.u0[t] += K * rollout.x0[t];
  }
  ComparatorResult r =
      drc_result(rollout, cost, h, closed_loop.control_dim(),
                 closed_loop.observation_dim(), options);
  r.K = K;
  return r;
}

double linear_policy_cost(const LinearSystem& system, const Matrix& K,
                          const std::vector<Vector>& w,
                          const CostFunction& cost,
                          std::vector<double>* costs) {
  if (!system.fully_observed()) {
    throw ConfigError("linear comparator: needs a fully observed system");
  }
  if (costs) costs->clear();
  Vector x = Vector::Zero(system.state_dim());
  double total = 0.0;
  for (int t = 0; t < static_cast<int>(w.size()); ++t) {
    const Vector u = K * x;
    const double c = cost(x, u, t);
    total += c;
    if (costs) costs->push_back(c);
    x = step(system, x, u, w[t], t);
    if (!x.allFinite() || !std::isfinite(total) || x.norm() > 1e150) {
      return kInf;
    }
  }
  return total;
}

ComparatorResult best_linear_in_hindsight(const LinearSystem& system,
                                          const std::vector<Vector>& w,
                                          const CostFunction& cost,
                                          const LinearSearchOptions& options) {
  const int dx = system.state_dim(), du = system.control_dim();
  std::vector<Matrix> starts{Matrix::Zero(du, dx)};
  if (const QuadraticCost* q = cost.quadratic_terms();
      q && system.time_invariant()) {
    try {
      const Matrix K = dare_solve(system.A(), system.B(), q->Q, q->R).K;
      starts.push_back(K);
      starts.push_back(1.2 * K);
      starts.push_back(0.8 * K);
    } catch (const NumericalError&) {
      // Not stabilizable under this cost; the remaining starts still apply.
    }
  }
  for (const Matrix& K : options.extra_starts) {
    if (K.rows() != du || K.cols() != dx) {
      throw ConfigError("linear comparator: start gain has wrong shape");
    }
    starts.push_back(K);
  }

  const int budget =
      std::max(1, options.max_evaluations / static_cast<int>(starts.size()));
  ComparatorResult best;
  best.name = "linear";
  best.method = "multi-start compass search";
  best.total_cost = kInf;
  best.K = starts.front();
  for (const Matrix& start : starts) {
    Matrix K = start;
    double f = linear_policy_cost(system, K, w, cost);
    int evals = 1;
    double s = options.initial_step * std::max(1.0, K.cwiseAbs().maxCoeff());
    while (s >= options.min_step && evals < budget) {
      bool improved = false;
      for (Eigen::Index i = 0; i < K.size() && evals < budget; ++i) {
        for (double sign : {1.0, -1.0}) {
          Matrix trial = K;
          trial.data()[i] += sign * s;
          const double ft = linear_policy_cost(system, trial, w, cost);
          ++evals;
          if (ft < f) {
            K = std::move(trial);
            f = ft;
            improved = true;
            break;
          }
        }
      }
      if (!improved) s *= 0.5;
    }
    best.iterations += evals;
    if (f < best.total_cost) {
      best.total_cost = f;
      best.K = K;
      best.converged = s < options.min_step;
    }
  }
  if (!std::isfinite(best.total_cost)) {
    throw NumericalError("linear comparator: every start diverged");
  }
  best.total_cost = linear_policy_cost(system, best.K, w, cost, &best.costs);
  if (!best.converged) {
    best.warnings.push_back("linear comparator: evaluation budget exhausted");
  }
  return best;
}

}  // namespace nsc
