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

#ifndef NSC_LDS_PERTURBATION_HPP_
#define NSC_LDS_PERTURBATION_HPP_

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "nsc/matrix.hpp"

namespace nsc {

using Rng = std::mt19937_64;

struct ZeroNoise {};
struct GaussianNoise {
  double sigma = 1.0;
};
// Uniform over the Euclidean ball of the given radius.
struct UniformBallNoise {
  double radius = 1.0;
};
// w_t[i] = amplitude * sin(angular_frequency * t + phase[i]).
struct SinusoidalNoise {
  double amplitude = 1.0;
  double angular_frequency = 1.0;
  Vector phase;  // empty means all-zero phases
};
struct RecordedNoise {
  std::vector<Vector> sequence;
};
struct ConstantNoise {
  Vector value;
};

using NoiseKind = std::variant<ZeroNoise, GaussianNoise, UniformBallNoise,
                               SinusoidalNoise, RecordedNoise, ConstantNoise>;

// Describes how w_t is produced. Sampling is a pure function of (t, rng
// state), so a source can be shared between runs; randomness lives in the
// caller-owned Rng.
class PerturbationSource {
 public:
  PerturbationSource(NoiseKind kind, int dim, bool clip_to_unit_ball = false);

  static PerturbationSource zero(int dim) { return {ZeroNoise{}, dim}; }
  static PerturbationSource recorded(std::vector<Vector> sequence,
                                     bool clip_to_unit_ball = false);

  Vector sample(int t, Rng& rng) const;

  int dim() const { return dim_; }
  bool clips() const { return clip_; }
  const NoiseKind& kind() const { return kind_; }
  std::string name() const;

 private:
  NoiseKind kind_;
  int dim_;
  bool clip_;
};

// Rescales w onto the unit sphere when its norm exceeds 1.
Vector clip_to_unit_ball(const Vector& w);

// Draws T perturbations from a fresh Rng seeded with `seed`.
std::vector<Vector> sample_sequence(const PerturbationSource& source, int T,
                                    std::uint64_t seed);

}  // namespace nsc

#endif  // NSC_LDS_PERTURBATION_HPP_
