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

#ifndef NSC_HARNESS_CONFIG_HPP_
#define NSC_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "nsc/harness/comparators.hpp"
#include "nsc/matrix.hpp"
#include "nsc/online/controllers.hpp"

namespace nsc {

enum class ControllerKind { kZero, kLinear, kLqr, kGpc, kGrc };
enum class ComparatorKind { kAuto, kNone, kDac, kDrc, kLinear };
enum class NoiseShape { kZero, kGaussian, kUniformBall, kSinusoidal,
                        kConstant, kRecorded };

struct NoiseSpec {
  NoiseShape shape = NoiseShape::kGaussian;
  double scale = 1.0;   // sigma, radius or amplitude
  double period = 50.0;  // sinusoidal only
  // Sinusoidal phases drawn from the seed; otherwise all zero.
  bool random_phase = true;
  bool clip = false;
  Vector constant;             // kConstant
  std::string recorded_file;   // kRecorded: one row per step
};

// Everything one experiment needs. Matrices override the preset's.
struct ScenarioConfig {
  std::string name = "experiment";
  std::string source;  // config path, for error messages
  std::string preset = "scalar-0.9";
  std::optional<Matrix> A, B, C, D, Q, R, K;
  // Where the stabilizing gain comes from: "preset", "lqr", "zero" or
  // "matrix" (then K holds it).
  std::string gain = "preset";
  std::optional<Vector> target, x0;
  NoiseSpec noise;
  ControllerKind controller = ControllerKind::kGpc;
  OnlineControlConfig online;
  ComparatorKind comparator = ComparatorKind::kAuto;
  ComparatorOptions comparator_options;
  // Set when the config names a comparator radius; otherwise the learner's.
  bool comparator_radius_set = false;
  int horizon = 1000;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty writes nothing
};

// INI text: sections [experiment], [system], [noise], [cost], [controller],
// [comparator]. Matrix values are "rows cols entries..." inline or "@path"
// relative to base_dir. Unknown sections and keys are rejected.
ScenarioConfig parse_config(std::istream& in, const std::string& source,
                            const std::string& base_dir);
ScenarioConfig load_config(const std::string& path);

std::string controller_name(ControllerKind kind);
std::string comparator_name(ComparatorKind kind);
std::string noise_name(NoiseShape shape);

// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view text);
// Independent stream per component: master XOR fnv1a(tag).
std::uint64_t component_seed(std::uint64_t master, std::string_view tag);

}  // namespace nsc

#endif  // NSC_HARNESS_CONFIG_HPP_
