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

#include "nsc/lds/perturbation.hpp"

#include <cmath>
#include <utility>

#include "nsc/error.hpp"

namespace nsc {

PerturbationSource::PerturbationSource(NoiseKind kind, int dim,
                                       bool clip_to_unit_ball)
    : kind_(std::move(kind)), dim_(dim), clip_(clip_to_unit_ball) {
  if (dim_ <= 0) throw ConfigError("perturbation dimension must be positive");
  if (const auto* g = std::get_if<GaussianNoise>(&kind_); g && g->sigma < 0) {
    throw ConfigError("gaussian sigma must be nonnegative");
  }
  if (const auto* b = std::get_if<UniformBallNoise>(&kind_);
      b && b->radius < 0) {
    throw ConfigError("ball radius must be nonnegative");
  }
  if (auto* s = std::get_if<SinusoidalNoise>(&kind_)) {
    if (s->phase.size() == 0) s->phase = Vector::Zero(dim_);
    if (s->phase.size() != dim_) {
      throw ConfigError("sinusoid phase vector must have dimension " +
                        std::to_string(dim_));
    }
  }
  if (const auto* r = std::get_if<RecordedNoise>(&kind_)) {
    for (const auto& w : r->sequence) {
      if (w.size() != dim_) {
        throw ConfigError("recorded perturbation has wrong dimension");
      }
    }
  }
  if (const auto* c = std::get_if<ConstantNoise>(&kind_);
      c && c->value.size() != dim_) {
    throw ConfigError("constant perturbation has wrong dimension");
  }
}

PerturbationSource PerturbationSource::recorded(std::vector<Vector> sequence,
                                                bool clip_to_unit_ball) {
  if (sequence.empty()) throw ConfigError("recorded sequence is empty");
  const int dim = static_cast<int>(sequence.front().size());
  return {RecordedNoise{std::move(sequence)}, dim, clip_to_unit_ball};
}

Vector clip_to_unit_ball(const Vector& w) {
  const double norm = w.norm();
  if (norm > 1.0) return w / norm;
  return w;
}

Vector PerturbationSource::sample(int t, Rng& rng) const {
  Vector w = std::visit(
      [&](const auto& k) -> Vector {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, ZeroNoise>) {
          return Vector::Zero(dim_);
        } else if constexpr (std::is_same_v<K, GaussianNoise>) {
          std::normal_distribution<double> normal(0.0, 1.0);
          Vector v(dim_);
          for (int i = 0; i < dim_; ++i) v(i) = k.sigma * normal(rng);
          return v;
        } else if constexpr (std::is_same_v<K, UniformBallNoise>) {
          // Direction from a normalized gaussian, radius from U^(1/d).
          std::normal_distribution<double> normal(0.0, 1.0);
          std::uniform_real_distribution<double> uniform(0.0, 1.0);
          Vector v(dim_);
          double norm = 0.0;
          do {
            for (int i = 0; i < dim_; ++i) v(i) = normal(rng);
            norm = v.norm();
          } while (norm == 0.0);
          const double r = k.radius * std::pow(uniform(rng), 1.0 / dim_);
          return v * (r / norm);
        } else if constexpr (std::is_same_v<K, SinusoidalNoise>) {
          Vector v(dim_);
          for (int i = 0; i < dim_; ++i) {
            v(i) = k.amplitude * std::sin(k.angular_frequency * t + k.phase(i));
          }
          return v;
        } else if constexpr (std::is_same_v<K, RecordedNoise>) {
          if (t < 0 || t >= static_cast<int>(k.sequence.size())) {
            throw ConfigError("recorded perturbations exhausted at t=" +
                              std::to_string(t));
          }
          return k.sequence[t];
        } else {
          return k.value;
        }
      },
      kind_);
  return clip_ ? clip_to_unit_ball(w) : w;
}

std::string PerturbationSource::name() const {
  static const char* const kNames[] = {"zero",     "gaussian", "uniform-ball",
                                       "sinusoidal", "recorded", "constant"};
  return kNames[kind_.index()];
}

std::vector<Vector> sample_sequence(const PerturbationSource& source, int T,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vector> out;
  out.reserve(T);
  for (int t = 0; t < T; ++t) out.push_back(source.sample(t, rng));
  return out;
}

}  // namespace nsc
