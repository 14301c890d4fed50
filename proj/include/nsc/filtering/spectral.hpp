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

// Spectral filtering: the matrix Z_T of integrated filter outer products, its
// top eigenvectors, and predictors that read the input history through them.

#ifndef NSC_FILTERING_SPECTRAL_HPP_
#define NSC_FILTERING_SPECTRAL_HPP_

#include <deque>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "nsc/filtering/predictor.hpp"
#include "nsc/matrix.hpp"
#include "nsc/online/ogd.hpp"

namespace nsc {

// mu_alpha = [1, (a-1), (a-1)a, ..., (a-1)a^{T-2}].
Vector mu_alpha(double alpha, int T);

// Z_T = int_0^1 mu_a mu_a' da, entrywise in closed form.
Matrix build_Z(int T);

// W[i][j] = 1 / (i + j + 1).
Matrix hankel_W(int T);

struct SpectralBasis {
  int T = 0;
  int h = 0;
  Vector sigma;  // nonincreasing, clamped at zero
  Matrix phi;    // T x h, orthonormal columns, first nonzero entry positive
};

// Top-h eigenpairs of build_Z(T). Small T uses a dense extended-precision
// solver; large T uses subspace iteration from a fixed start. Throws
// NumericalError if the eigensolver fails.
SpectralBasis spectral_basis(int T, int h);

// Text format: "T h", then the h eigenvalues, then T rows of h entries.
void write_basis(std::ostream& out, const SpectralBasis& basis);
SpectralBasis read_basis(std::istream& in);

// Loads basis_T<T>_h<h>.txt from dir, or computes it and writes the file.
SpectralBasis cached_spectral_basis(int T, int h, const std::string& dir);

enum class SpectralAnchor {
  kObservation,  // y_hat_t = y_{t-1} + ...
  kPrediction,   // y_hat_t = y_hat_{t-1} + ...
};

struct SpectralPredictorConfig {
  SpectralAnchor anchor = SpectralAnchor::kObservation;
  bool pass_through = true;  // include the M0 u_{t-1} term
  OGDConfig ogd;
};

// y_hat_t = anchor + M0 u_{t-1} + sum_j M_j (phi_j' u~_{t-1}),
// u~_{t-1} = [u_{t-1}, u_{t-2}, ..., u_0, 0, ...] truncated to length T.
// Theta = [M0 M1 .. Mh] (M0 omitted without pass-through), held by the
// optimizer in column-major order. Per step: predict(), learn(y_t),
// observe_control(u_t).
class SpectralPredictor {
 public:
  SpectralPredictor(std::shared_ptr<const SpectralBasis> basis, int dy, int du,
                    SpectralPredictorConfig config);

  Vector predict() const;
  double learn(const Vector& y);
  void observe_control(const Vector& u);

  // Regressor stacking u_{t-1} (with pass-through) and the h filter outputs.
  Vector features() const;
  Vector anchor() const { return anchor_; }
  double loss_at(const Vector& theta, const Vector& y) const;
  Vector gradient_at(const Vector& theta, const Vector& y) const;

  Matrix theta() const;
  const OGD& optimizer() const { return ogd_; }
  const SpectralBasis& basis() const { return *basis_; }

 private:
  Matrix as_theta(const Vector& flat) const;
  int feature_blocks() const;

  std::shared_ptr<const SpectralBasis> basis_;
  int dy_, du_;
  SpectralPredictorConfig config_;
  OGD ogd_;
  std::deque<Vector> us_;  // newest first, at most T entries
  Vector anchor_;
};

// Best fixed spectral predictor in hindsight with the observation anchor:
// least squares of y_t - y_{t-1} on the features above.
LinearFit fit_spectral_predictor(const SpectralBasis& basis,
                                 const std::vector<Vector>& ys,
                                 const std::vector<Vector>& us,
                                 bool pass_through = true);

}  // namespace nsc

#endif  // NSC_FILTERING_SPECTRAL_HPP_
