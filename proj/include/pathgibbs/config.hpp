// Copyright 2026 The pathgibbs Authors
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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathgibbs/estimators.hpp"
#include "pathgibbs/fieldmodes.hpp"
#include "pathgibbs/lattice.hpp"
#include "pathgibbs/sampler.hpp"
#include "pathgibbs/spectral.hpp"

namespace pathgibbs {

/// Malformed input, unknown or missing keys. Maps to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sectioned key = value configuration. Lines are `[section]`, `key = value`,
/// blank, or comments starting with '#'. Unknown sections and keys are rejected
/// at parse time.
class RunConfig {
 public:
  static RunConfig parse(std::istream& in, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, const std::string& value);

  /// Typed access. The required forms throw ConfigError naming [section].key.
  std::string str(const std::string& section, const std::string& key) const;
  double real(const std::string& section, const std::string& key) const;
  long integer(const std::string& section, const std::string& key) const;
  std::uint64_t u64(const std::string& section, const std::string& key) const;
  bool boolean(const std::string& section, const std::string& key) const;
  std::vector<double> reals(const std::string& section, const std::string& key) const;

  std::string str_or(const std::string& s, const std::string& k, const std::string& def) const;
  double real_or(const std::string& s, const std::string& k, double def) const;
  long integer_or(const std::string& s, const std::string& k, long def) const;
  std::uint64_t u64_or(const std::string& s, const std::string& k, std::uint64_t def) const;
  bool boolean_or(const std::string& s, const std::string& k, bool def) const;

  /// Sorted `section.key=value` lines; the basis of the config hash. The
  /// thread count is left out since it cannot change any result.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;

  /// Directory of the config file, for resolving relative paths.
  const std::string& base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::string base_dir_;
};

/// Keys accepted in each section.
const std::map<std::string, std::vector<std::string>>& config_schema();

SpectralDensity spectral_from(const RunConfig& cfg);
/// Lattice from [lattice] with the kernel radial grid from [kernel] (r_max,
/// n_r). A zero-amplitude density gives the free model.
LatticeModel lattice_from(const RunConfig& cfg);
SamplerConfig sampler_from(const RunConfig& cfg);
/// The [estimators] window, defaulting to [0.2 T, 0.5 T].
FitWindow window_from(const RunConfig& cfg, double horizon);
Eigen::VectorXd gamma_from(const RunConfig& cfg, int d);
ModeSet modes_from(const RunConfig& cfg);
DiscretePath path_from(const RunConfig& cfg, int d);

}  // namespace pathgibbs
