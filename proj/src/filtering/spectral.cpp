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

#include "nsc/filtering/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <utility>

#include "nsc/error.hpp"
#include "nsc/io.hpp"

namespace nsc {
namespace {

// Above this size the dense extended-precision solver gets slow.
constexpr int kDenseLimit = 256;
constexpr int kOversampling = 10;
constexpr int kMaxSubspaceIterations = 100;

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Closed-form integrals, written so that no cancellation occurs:
// int (a-1) a^{j-1} = -1 / (j (j+1)),
// int (a-1)^2 a^{s-2} = 2 / ((s-1) s (s+1)).
template <typename Scalar>
Scalar z_entry(int i, int j) {
  if (i > j) std::swap(i, j);
  if (j == 0) return Scalar(1);
  if (i == 0) return Scalar(-1) / (Scalar(j) * Scalar(j + 1));
  const Scalar s = Scalar(i + j);
  return Scalar(2) / ((s - 1) * s * (s + 1));
}

void normalize_sign(Matrix& phi) {
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    for (Eigen::Index r = 0; r < phi.rows(); ++r) {
      if (std::abs(phi(r, c)) > 1e-12) {
        if (phi(r, c) < 0) phi.col(c) *= -1.0;
        break;
      }
    }
  }
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SpectralBasis dense_basis(int T, int h) {
  LongMatrix Z(T, T);
  for (int i = 0; i < T; ++i) {
    for (int j = 0; j < T; ++j) Z(i, j) = z_entry<long double>(i, j);
  }
  Eigen::SelfAdjointEigenSolver<LongMatrix> solver(Z);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral basis: eigensolver failed for T=" +
                         std::to_string(T));
  }
  SpectralBasis basis{T, h, Vector(h), Matrix(T, h)};
  for (int c = 0; c < h; ++c) {
    const int src = T - 1 - c;  // ascending order from the solver
    basis.sigma(c) = static_cast<double>(solver.eigenvalues()(src));
    basis.phi.col(c) = solver.eigenvectors().col(src).cast<double>();
  }
  return basis;
}

SpectralBasis subspace_basis(int T, int h) {
  const Matrix Z = build_Z(T);
  const int p = std::min(T, h + kOversampling);
  Matrix Q(T, p);
  std::uint64_t state = 0x5EC7A1ULL;
  for (int c = 0; c < p; ++c) {
    for (int r = 0; r < T; ++r) {
      Q(r, c) = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53 - 0.5;
    }
  }
  Vector ritz = Vector::Zero(p);
  Matrix vectors;
  for (int it = 0; it < kMaxSubspaceIterations; ++it) {
    Eigen::HouseholderQR<Matrix> qr(Z * Q);
    Q = qr.householderQ() * Matrix::Identity(T, p);
    const Matrix small = Q.transpose() * Z * Q;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 *
                                                 (small + small.transpose()));
    if (solver.info() != Eigen::Success || !all_finite(Q)) {
      throw NumericalError("spectral basis: subspace iteration failed for T=" +
                           std::to_string(T));
    }
    const Vector next = solver.eigenvalues().reverse();
    vectors = Q * solver.eigenvectors().rowwise().reverse();
    const double change = (next.head(h) - ritz.head(h)).cwiseAbs().maxCoeff();
    ritz = next;
    Q = vectors;
    // Eigenvalues below rounding level never settle; stop once the rest do.
    if (it > 0 && change <= 1e-14 * ritz(0)) break;
  }
  SpectralBasis basis{T, h, ritz.head(h), vectors.leftCols(h)};
  return basis;
}

std::shared_ptr<const SpectralBasis> require_basis(
    std::shared_ptr<const SpectralBasis> basis) {
  if (!basis) throw ConfigError("spectral predictor: missing basis");
  return basis;
}

}  // namespace

Vector mu_alpha(double alpha, int T) {
  if (T < 1) throw ConfigError("mu_alpha: T must be positive");
  Vector mu(T);
  mu(0) = 1.0;
  double power = 1.0;
  for (int i = 1; i < T; ++i) {
    mu(i) = (alpha - 1.0) * power;
    power *= alpha;
  }
  return mu;
}

Matrix build_Z(int T) {
  if (T < 2) throw ConfigError("build_Z: T must be at least 2");
  Matrix Z(T, T);
  for (int i = 0; i < T; ++i) {
    for (int j = 0; j < T; ++j) Z(i, j) = z_entry<double>(i, j);
  }
  return Z;
}

Matrix hankel_W(int T) {
  if (T < 1) throw ConfigError("hankel_W: T must be positive");
  Matrix W(T, T);
  for (int i = 0; i < T; ++i) {
    for (int j = 0; j < T; ++j) W(i, j) = 1.0 / (i + j + 1);
  }
  return W;
}

SpectralBasis spectral_basis(int T, int h) {
  if (T < 2 || h < 1 || h > T) {
    throw ConfigError("spectral basis: need T >= 2 and 1 <= h <= T");
  }
  SpectralBasis basis = T <= kDenseLimit ? dense_basis(T, h)
                                         : subspace_basis(T, h);
  // Z is a Gram matrix; negative eigenvalues are rounding.
  basis.sigma = basis.sigma.cwiseMax(0.0);
  normalize_sign(basis.phi);
  return basis;
}

void write_basis(std::ostream& out, const SpectralBasis& basis) {
  out << basis.T << ' ' << basis.h << '\n';
  for (int c = 0; c < basis.h; ++c) {
    out << (c ? " " : "") << format_double(basis.sigma(c));
  }
  out << '\n';
  for (int r = 0; r < basis.T; ++r) {
    for (int c = 0; c < basis.h; ++c) {
      out << (c ? " " : "") << format_double(basis.phi(r, c));
    }
    out << '\n';
  }
}

SpectralBasis read_basis(std::istream& in) {
  SpectralBasis basis;
  if (!(in >> basis.T >> basis.h) || basis.T < 2 || basis.h < 1 ||
      basis.h > basis.T) {
    throw ConfigError("basis file: bad header");
  }
  basis.sigma.resize(basis.h);
  basis.phi.resize(basis.T, basis.h);
  for (int c = 0; c < basis.h; ++c) {
    if (!(in >> basis.sigma(c))) throw ConfigError("basis file: truncated");
  }
  for (int r = 0; r < basis.T; ++r) {
    for (int c = 0; c < basis.h; ++c) {
      if (!(in >> basis.phi(r, c))) throw ConfigError("basis file: truncated");
    }
  }
  return basis;
}

SpectralBasis cached_spectral_basis(int T, int h, const std::string& dir) {
  const std::string path = dir + "/basis_T" + std::to_string(T) + "_h" +
                           std::to_string(h) + ".txt";
  std::ifstream in(path);
  if (in) {
    SpectralBasis basis = read_basis(in);
    if (basis.T != T || basis.h != h) {
      throw ConfigError("basis cache " + path + " holds a different (T, h)");
    }
    return basis;
  }
  SpectralBasis basis = spectral_basis(T, h);
  std::ostringstream out;
  write_basis(out, basis);
  write_file_atomic(path, out.str());
  return basis;
}

SpectralPredictor::SpectralPredictor(std::shared_ptr<const SpectralBasis> basis,
                                     int dy, int du,
                                     SpectralPredictorConfig config)
    : basis_(require_basis(std::move(basis))),
      dy_(dy),
      du_(du),
      config_(config),
      ogd_(config.ogd, Vector::Zero(static_cast<Eigen::Index>(dy) * du *
                                    feature_blocks())),
      anchor_(Vector::Zero(dy)) {
  if (dy < 1 || du < 1) {
    throw ConfigError("spectral predictor: need dy >= 1 and du >= 1");
  }
}

int SpectralPredictor::feature_blocks() const {
  return basis_->h + (config_.pass_through ? 1 : 0);
}

Vector SpectralPredictor::features() const {
  Vector z = Vector::Zero(du_ * feature_blocks());
  int offset = 0;
  if (config_.pass_through) {
    if (!us_.empty()) z.head(du_) = us_.front();
    offset = du_;
  }
  const Matrix& phi = basis_->phi;
  for (int j = 0; j < basis_->h; ++j) {
    auto out = z.segment(offset + j * du_, du_);
    for (int i = 0; i < static_cast<int>(us_.size()); ++i) {
      out += phi(i, j) * us_[i];
    }
  }
  return z;
}

Matrix SpectralPredictor::as_theta(const Vector& flat) const {
  return Eigen::Map<const Matrix>(flat.data(), dy_, du_ * feature_blocks());
}

Matrix SpectralPredictor::theta() const { return as_theta(ogd_.point()); }

Vector SpectralPredictor::predict() const {
  return anchor_ + theta() * features();
}

double SpectralPredictor::loss_at(const Vector& theta, const Vector& y) const {
  return (y - anchor_ - as_theta(theta) * features()).squaredNorm();
}

Vector SpectralPredictor::gradient_at(const Vector& theta,
                                      const Vector& y) const {
  const Vector z = features();
  const Matrix g = -2.0 * (y - anchor_ - as_theta(theta) * z) * z.transpose();
  return Eigen::Map<const Vector>(g.data(), g.size());
}

double SpectralPredictor::learn(const Vector& y) {
  if (y.size() != dy_) throw ConfigError("spectral predictor: y has wrong size");
  const Vector issued = predict();
  const double loss = (y - issued).squaredNorm();
  ogd_.update(gradient_at(ogd_.point(), y));
  anchor_ = config_.anchor == SpectralAnchor::kObservation ? y : issued;
  return loss;
}

void SpectralPredictor::observe_control(const Vector& u) {
  if (u.size() != du_) throw ConfigError("spectral predictor: u has wrong size");
  us_.push_front(u);
  if (static_cast<int>(us_.size()) > basis_->T) us_.pop_back();
}

LinearFit fit_spectral_predictor(const SpectralBasis& basis,
                                 const std::vector<Vector>& ys,
                                 const std::vector<Vector>& us,
                                 bool pass_through) {
  if (ys.empty() || ys.size() != us.size()) {
    throw ConfigError("spectral fit: need equally long, non-empty traces");
  }
  const int dy = static_cast<int>(ys[0].size());
  const int du = static_cast<int>(us[0].size());
  SpectralPredictorConfig config;
  config.pass_through = pass_through;
  SpectralPredictor layout(std::make_shared<const SpectralBasis>(basis), dy,
                           du, config);
  const int T = static_cast<int>(ys.size());
  Matrix Z(du * (basis.h + (pass_through ? 1 : 0)), T);
  Matrix D(dy, T);
  Vector previous = Vector::Zero(dy);
  for (int t = 0; t < T; ++t) {
    Z.col(t) = layout.features();
    D.col(t) = ys[t] - previous;
    previous = ys[t];
    layout.observe_control(us[t]);
  }
  return least_squares_fit(Z, D);
}

}  // namespace nsc
