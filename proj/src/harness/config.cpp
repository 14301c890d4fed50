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

#include "nsc/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <climits>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nsc/error.hpp"

namespace nsc {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"experiment", {"name", "horizon", "seed", "out"}},
      {"system", {"preset", "A", "B", "C", "D", "x0"}},
      {"noise",
       {"kind", "scale", "period", "random_phase", "clip", "value", "file"}},
      {"cost", {"Q", "R", "target"}},
      {"controller",
       {"kind", "h", "truncation", "truncation_eps", "step_scale", "schedule",
        "radius", "projection", "K"}},
      {"comparator", {"kind", "max_iter", "grad_tol", "radius"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::string source, std::string base_dir)
      : tree_(tree), source_(std::move(source)), base_(std::move(base_dir)) {}

  std::optional<std::string> text(const std::string& section,
                                  const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    throw ConfigError(source_ + ": [" + section + "] " + key + ": " + what);
  }

  double number(const std::string& section, const std::string& key,
                double fallback) const {
    const auto v = text(section, key);
    if (!v) return fallback;
    try {
      size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size() || !std::isfinite(d)) fail(section, key, "not a finite number");
      return d;
    } catch (const std::logic_error&) {
      fail(section, key, "not a number: '" + *v + "'");
    }
  }

  int integer(const std::string& section, const std::string& key,
              int fallback) const {
    const auto v = text(section, key);
    if (!v) return fallback;
    try {
      size_t used = 0;
      const long n = std::stol(*v, &used);
      if (used != v->size() || n < INT_MIN || n > INT_MAX) {
        fail(section, key, "not an integer: '" + *v + "'");
      }
      return static_cast<int>(n);
    } catch (const std::logic_error&) {
      fail(section, key, "not an integer: '" + *v + "'");
    }
  }

  std::uint64_t seed(const std::string& section, const std::string& key,
                     std::uint64_t fallback) const {
    const auto v = text(section, key);
    if (!v) return fallback;
    if (v->empty() || (*v)[0] == '-' || (*v)[0] == '+') {
      fail(section, key, "seed must be an unsigned 64-bit integer");
    }
    try {
      size_t used = 0;
      const unsigned long long n = std::stoull(*v, &used, 0);
      if (used != v->size()) fail(section, key, "trailing characters");
      return n;
    } catch (const std::logic_error&) {
      fail(section, key, "seed must be an unsigned 64-bit integer");
    }
  }

  bool boolean(const std::string& section, const std::string& key,
               bool fallback) const {
    const auto v = text(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    fail(section, key, "expected true or false");
  }

  std::optional<Matrix> matrix(const std::string& section,
                               const std::string& key) const {
    const auto v = text(section, key);
    if (!v) return std::nullopt;
    try {
      if (!v->empty() && (*v)[0] == '@') return load_matrix_file(path(v->substr(1)));
      return matrix_from_string(*v);
    } catch (const ConfigError& e) {
      fail(section, key, e.what());
    }
  }

  std::optional<Vector> vector(const std::string& section,
                               const std::string& key) const {
    const auto v = text(section, key);
    if (!v) return std::nullopt;
    std::istringstream in(*v);
    std::vector<double> values;
    double d;
    while (in >> d) values.push_back(d);
    if (!in.eof() || values.empty()) {
      fail(section, key, "expected a whitespace-separated list of numbers");
    }
    return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  }

  std::string path(const std::string& p) const {
    const std::filesystem::path fp(p);
    if (fp.is_absolute() || base_.empty()) return p;
    return (std::filesystem::path(base_) / fp).string();
  }

 private:
  const pt::ptree& tree_;
  std::string source_;
  std::string base_;
};

template <typename Enum>
Enum choose(const Reader& r, const std::string& section, const std::string& key,
            const std::map<std::string, Enum>& options, Enum fallback) {
  const auto v = r.text(section, key);
  if (!v) return fallback;
  const auto it = options.find(*v);
  if (it == options.end()) {
    std::string names;
    for (const auto& [name, value] : options) names += " " + name;
    r.fail(section, key, "'" + *v + "' is not one of:" + names);
  }
  return it->second;
}

const std::map<std::string, ControllerKind> kControllers = {
    {"zero", ControllerKind::kZero}, {"linear", ControllerKind::kLinear},
    {"lqr", ControllerKind::kLqr},   {"gpc", ControllerKind::kGpc},
    {"grc", ControllerKind::kGrc}};
const std::map<std::string, ComparatorKind> kComparators = {
    {"auto", ComparatorKind::kAuto}, {"none", ComparatorKind::kNone},
    {"dac", ComparatorKind::kDac},   {"drc", ComparatorKind::kDrc},
    {"linear", ComparatorKind::kLinear}};
const std::map<std::string, NoiseShape> kNoises = {
    {"zero", NoiseShape::kZero},
    {"gaussian", NoiseShape::kGaussian},
    {"uniform", NoiseShape::kUniformBall},
    {"sinusoidal", NoiseShape::kSinusoidal},
    {"constant", NoiseShape::kConstant},
    {"recorded", NoiseShape::kRecorded}};

template <typename Enum>
std::string name_of(const std::map<std::string, Enum>& options, Enum kind) {
  for (const auto& [name, value] : options) {
    if (value == kind) return name;
  }
  return "?";
}

}  // namespace

std::string controller_name(ControllerKind kind) {
  return name_of(kControllers, kind);
}
std::string comparator_name(ComparatorKind kind) {
  return name_of(kComparators, kind);
}
std::string noise_name(NoiseShape shape) { return name_of(kNoises, shape); }

ScenarioConfig parse_config(std::istream& in, const std::string& source,
                            const std::string& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ": line " + std::to_string(e.line()) + ": " +
                      e.message());
  }
  for (const auto& [section, body] : tree) {
    const auto it = allowed_keys().find(section);
    if (!body.data().empty()) {
      throw ConfigError(source + ": key '" + section +
                        "' must sit inside a section");
    }
    if (it == allowed_keys().end()) {
      throw ConfigError(source + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) {
        throw ConfigError(source + ": [" + section + "] unknown key '" + key +
                          "'");
      }
    }
  }

  const Reader r(tree, source, base_dir);
  ScenarioConfig c;
  c.source = source;
  c.name = r.text("experiment", "name").value_or(c.name);
  if (c.name.empty() || c.name.find('/') != std::string::npos) {
    r.fail("experiment", "name", "must be a non-empty file stem");
  }
  c.horizon = r.integer("experiment", "horizon", c.horizon);
  if (c.horizon <= 0) r.fail("experiment", "horizon", "must be positive");
  c.seed = r.seed("experiment", "seed", c.seed);
  if (const auto out = r.text("experiment", "out")) c.out_dir = r.path(*out);

  c.preset = r.text("system", "preset").value_or(c.preset);
  c.A = r.matrix("system", "A");
  c.B = r.matrix("system", "B");
  c.C = r.matrix("system", "C");
  c.D = r.matrix("system", "D");
  c.x0 = r.vector("system", "x0");
  if (c.preset == "custom" && (!c.A || !c.B)) {
    r.fail("system", "preset", "custom systems need A and B");
  }

  NoiseSpec& n = c.noise;
  n.shape = choose(r, "noise", "kind", kNoises, n.shape);
  n.scale = r.number("noise", "scale", n.scale);
  if (n.scale < 0) r.fail("noise", "scale", "must be nonnegative");
  n.period = r.number("noise", "period", n.period);
  if (n.period <= 0) r.fail("noise", "period", "must be positive");
  n.random_phase = r.boolean("noise", "random_phase", n.random_phase);
  n.clip = r.boolean("noise", "clip", n.clip);
  if (n.shape == NoiseShape::kConstant) {
    const auto v = r.vector("noise", "value");
    if (!v) r.fail("noise", "value", "required for constant noise");
    n.constant = *v;
  }
  if (n.shape == NoiseShape::kRecorded) {
    const auto f = r.text("noise", "file");
    if (!f) r.fail("noise", "file", "required for recorded noise");
    n.recorded_file = r.path(*f);
  }

  c.Q = r.matrix("cost", "Q");
  c.R = r.matrix("cost", "R");
  c.target = r.vector("cost", "target");

  c.controller = choose(r, "controller", "kind", kControllers, c.controller);
  c.online.h = r.integer("controller", "h", 10);
  if (c.online.h < 0) r.fail("controller", "h", "must be nonnegative");
  c.online.truncation = r.integer("controller", "truncation", c.online.truncation);
  c.online.truncation_eps =
      r.number("controller", "truncation_eps", c.online.truncation_eps);
  c.online.ogd.scale = r.number("controller", "step_scale", 0.05);
  if (c.online.ogd.scale <= 0) r.fail("controller", "step_scale", "must be positive");
  c.online.ogd.schedule = choose(
      r, "controller", "schedule",
      std::map<std::string, StepSchedule>{
          {"inverse-sqrt", StepSchedule::kInverseSqrt},
          {"constant", StepSchedule::kConstant}},
      c.online.ogd.schedule);
  c.online.ogd.radius = r.number("controller", "radius", 5.0);
  if (c.online.ogd.radius <= 0) r.fail("controller", "radius", "must be positive");
  c.online.ogd.projection = choose(
      r, "controller", "projection",
      std::map<std::string, ProjectionKind>{
          {"ball", ProjectionKind::kBall},
          {"block", ProjectionKind::kBlockNormSum},
          {"none", ProjectionKind::kNone}},
      c.online.ogd.projection);
  if (const auto k = r.text("controller", "K")) {
    if (*k == "preset" || *k == "lqr" || *k == "zero") {
      c.gain = *k;
    } else {
      c.gain = "matrix";
      c.K = r.matrix("controller", "K");
    }
  }

  c.comparator = choose(r, "comparator", "kind", kComparators, c.comparator);
  c.comparator_options.max_iter =
      r.integer("comparator", "max_iter", c.comparator_options.max_iter);
  c.comparator_options.grad_tol =
      r.number("comparator", "grad_tol", c.comparator_options.grad_tol);
  c.comparator_radius_set = r.text("comparator", "radius").has_value();
  c.comparator_options.radius =
      r.number("comparator", "radius", c.online.ogd.radius);
  c.comparator_options.projection = c.online.ogd.projection;
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in, path,
                      std::filesystem::path(path).parent_path().string());
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::uint64_t component_seed(std::uint64_t master, std::string_view tag) {
  return master ^ fnv1a(tag);
}

}  // namespace nsc
