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


#include "pathgibbs/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pathgibbs {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const std::string& s, const std::string& k) { return "[" + s + "]." + k; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double parse_real(const std::string& v, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) {
    throw ConfigError(what + ": expected a number, got '" + v + "'");
  }
  return x;
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& config_schema() {
  static const std::map<std::string, std::vector<std::string>> schema = {
      {"run", {"seed", "threads"}},
      {"spectral",
       {"d", "omega_exponent", "form", "width", "amplitude", "r_min", "r_max", "quad_nodes"}},
      {"kernel", {"r_max", "t_max", "n_r", "n_t", "t_cut"}},
      {"lattice", {"eps", "N", "kappa", "t_cut"}},
      {"sampler",
       {"seed", "n_chains", "n_sweeps", "burn_in", "thin", "p_site", "p_bridge", "p_endpoint",
        "sigma_site", "tune", "bridge_length", "n_batches"}},
      {"estimators",
       {"gamma", "window_lo", "window_hi", "lambda", "n_f", "f_seed", "margin", "kurtosis_lags"}},
      {"modes", {"source", "n_modes", "seed", "radial_panels", "list", "n_samples", "mc_seed"}},
      {"path", {"n_cells", "T", "seed", "waypoints"}},
      {"kv", {"chain_file", "t_final", "n_traj", "seed"}},
  };
  return schema;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& origin) {
  RunConfig cfg;
  const auto& schema = config_schema();
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!schema.count(section)) throw ConfigError(at + "unknown section [" + section + "]");
      cfg.values_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + "expected key = value");
    if (section.empty()) throw ConfigError(at + "key outside of any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = schema.at(section);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(at + "unknown key " + where(section, key));
    }
    if (cfg.values_[section].count(key)) throw ConfigError(at + "duplicate key " + where(section, key));
    cfg.values_[section][key] = value;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg = parse(in, path);
  cfg.base_dir_ = std::filesystem::path(path).parent_path().string();
  return cfg;
}

bool RunConfig::has_section(const std::string& s) const { return values_.count(s) > 0; }

bool RunConfig::has(const std::string& s, const std::string& k) const {
  const auto it = values_.find(s);
  return it != values_.end() && it->second.count(k) > 0;
}

void RunConfig::set(const std::string& s, const std::string& k, const std::string& v) {
  const auto& schema = config_schema();
  if (!schema.count(s)) throw ConfigError("unknown section [" + s + "]");
  const auto& keys = schema.at(s);
  if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown key " + where(s, k));
  values_[s][k] = v;
}

std::string RunConfig::str(const std::string& s, const std::string& k) const {
  if (!has_section(s)) throw ConfigError("missing section [" + s + "] (needed for " + where(s, k) + ")");
  if (!has(s, k)) throw ConfigError("missing key " + where(s, k));
  return values_.at(s).at(k);
}

double RunConfig::real(const std::string& s, const std::string& k) const {
  return parse_real(str(s, k), where(s, k));
}

long RunConfig::integer(const std::string& s, const std::string& k) const {
  const std::string v = str(s, k);
  std::size_t pos = 0;
  long x = 0;
  try {
    x = std::stol(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(where(s, k) + ": expected an integer, got '" + v + "'");
  }
  if (pos != v.size()) {
    // Accept integral values written in floating-point notation, e.g. 2e4.
    const double d = parse_real(v, where(s, k));
    if (d != std::floor(d) || std::abs(d) > 9e15) {
      throw ConfigError(where(s, k) + ": expected an integer, got '" + v + "'");
    }
    x = static_cast<long>(d);
  }
  return x;
}

std::uint64_t RunConfig::u64(const std::string& s, const std::string& k) const {
  const std::string v = str(s, k);
  std::size_t pos = 0;
  std::uint64_t x = 0;
  try {
    x = std::stoull(v, &pos, 0);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || v.front() == '-') {
    throw ConfigError(where(s, k) + ": expected an unsigned 64-bit integer, got '" + v + "'");
  }
  return x;
}

bool RunConfig::boolean(const std::string& s, const std::string& k) const {
  const std::string v = str(s, k);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where(s, k) + ": expected true or false, got '" + v + "'");
}

std::vector<double> RunConfig::reals(const std::string& s, const std::string& k) const {
  std::vector<double> out;
  for (const auto& part : split(str(s, k), ',')) out.push_back(parse_real(part, where(s, k)));
  return out;
}

std::string RunConfig::str_or(const std::string& s, const std::string& k, const std::string& def) const {
  return has(s, k) ? str(s, k) : def;
}
double RunConfig::real_or(const std::string& s, const std::string& k, double def) const {
  return has(s, k) ? real(s, k) : def;
}
long RunConfig::integer_or(const std::string& s, const std::string& k, long def) const {
  return has(s, k) ? integer(s, k) : def;
}
std::uint64_t RunConfig::u64_or(const std::string& s, const std::string& k, std::uint64_t def) const {
  return has(s, k) ? u64(s, k) : def;
}
bool RunConfig::boolean_or(const std::string& s, const std::string& k, bool def) const {
  return has(s, k) ? boolean(s, k) : def;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [s, kv] : values_)
    for (const auto& [k, v] : kv) {
      if (s == "run" && k == "threads") continue;  // scheduling only
      out += s + "." + k + "=" + v + "\n";
    }
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

SpectralDensity spectral_from(const RunConfig& cfg) {
  const int d = static_cast<int>(cfg.integer("spectral", "d"));
  FormFactor ff;
  const std::string form = cfg.str_or("spectral", "form", "indicator");
  if (form == "indicator") {
    ff.shape = FormFactor::Shape::kIndicator;
  } else if (form == "gaussian") {
    ff.shape = FormFactor::Shape::kGaussian;
  } else {
    throw ConfigError("[spectral].form: expected indicator or gaussian, got '" + form + "'");
  }
  ff.width = cfg.real_or("spectral", "width", 1.0);
  ff.amplitude = cfg.real_or("spectral", "amplitude", 1.0);
  try {
    return SpectralDensity(d, PowerLaw{cfg.real_or("spectral", "omega_exponent", 1.0)}, ff,
                           cfg.real("spectral", "r_min"), cfg.real("spectral", "r_max"),
                           static_cast<int>(cfg.integer_or("spectral", "quad_nodes", 16)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[spectral]: ") + e.what());
  }
}

LatticeModel lattice_from(const RunConfig& cfg) {
  const double eps = cfg.real("lattice", "eps");
  const int N = static_cast<int>(cfg.integer("lattice", "N"));
  const double kappa = cfg.real_or("lattice", "kappa", 0.0);
  try {
    const SpectralDensity sd = spectral_from(cfg);
    if (sd.is_zero()) return LatticeModel::free(sd.dim(), eps, N, kappa);
    const double t_cut = cfg.real("lattice", "t_cut");
    return LatticeModel::build(sd, eps, N, kappa, t_cut, cfg.real_or("kernel", "r_max", 30.0),
                               static_cast<std::size_t>(cfg.integer_or("kernel", "n_r", 1201)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[lattice]: ") + e.what());
  }
}

SamplerConfig sampler_from(const RunConfig& cfg) {
  SamplerConfig s;
  s.seed = cfg.u64_or("sampler", "seed", cfg.u64_or("run", "seed", 1));
  s.n_chains = static_cast<int>(cfg.integer_or("sampler", "n_chains", s.n_chains));
  s.n_sweeps = cfg.integer_or("sampler", "n_sweeps", s.n_sweeps);
  s.burn_in = cfg.integer_or("sampler", "burn_in", s.burn_in);
  s.thin = cfg.integer_or("sampler", "thin", s.thin);
  s.p_site = cfg.real_or("sampler", "p_site", s.p_site);
  s.p_bridge = cfg.real_or("sampler", "p_bridge", s.p_bridge);
  s.p_endpoint = cfg.real_or("sampler", "p_endpoint", s.p_endpoint);
  s.sigma_site = cfg.real_or("sampler", "sigma_site", s.sigma_site);
  s.tune = cfg.boolean_or("sampler", "tune", s.tune);
  s.bridge_length = static_cast<int>(cfg.integer_or("sampler", "bridge_length", s.bridge_length));
  s.n_batches = static_cast<int>(cfg.integer_or("sampler", "n_batches", s.n_batches));
  s.threads = static_cast<int>(cfg.integer_or("run", "threads", 1));
  return s;
}

FitWindow window_from(const RunConfig& cfg, double horizon) {
  return {cfg.real_or("estimators", "window_lo", 0.2 * horizon),
          cfg.real_or("estimators", "window_hi", 0.5 * horizon)};
}

Eigen::VectorXd gamma_from(const RunConfig& cfg, int d) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  if (!cfg.has("estimators", "gamma")) {
    g(0) = 1.0;
    return g;
  }
  const auto v = cfg.reals("estimators", "gamma");
  if (static_cast<int>(v.size()) != d) throw ConfigError("[estimators].gamma: needs d components");
  for (int a = 0; a < d; ++a) g(a) = v[a];
  if (!(g.norm() > 0.0)) throw ConfigError("[estimators].gamma: must be nonzero");
  return g;
}

ModeSet modes_from(const RunConfig& cfg) {
  const std::string source = cfg.str_or("modes", "source", "random");
  if (source == "spectral") {
    return modes_from_spectral(spectral_from(cfg),
                               static_cast<int>(cfg.integer_or("modes", "radial_panels", 4)));
  }
  if (source == "random") {
    const int d = static_cast<int>(cfg.integer_or("spectral", "d", 3));
    return random_modes(d, static_cast<std::size_t>(cfg.integer_or("modes", "n_modes", 8)),
                        cfg.u64_or("modes", "seed", 1));
  }
  if (source == "list") {
    // list = k_1 .. k_d w omega amp2 ; ...
    std::vector<Mode> modes;
    int d = -1;
    for (const auto& item : split(cfg.str("modes", "list"), ';')) {
      std::vector<double> v;
      for (const auto& tok : split(item, ' ')) v.push_back(parse_real(tok, "[modes].list"));
      if (v.size() < 4) throw ConfigError("[modes].list: each mode needs k, w, omega, amp2");
      const int dd = static_cast<int>(v.size()) - 3;
      if (d >= 0 && dd != d) throw ConfigError("[modes].list: inconsistent dimensions");
      d = dd;
      Mode m;
      m.k = Eigen::Map<const Eigen::VectorXd>(v.data(), d);
      m.w = v[d];
      m.omega = v[d + 1];
      m.amp2 = v[d + 2];
      modes.push_back(m);
    }
    try {
      return ModeSet(std::max(d, 1), modes);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[modes].list: ") + e.what());
    }
  }
  throw ConfigError("[modes].source: expected random, spectral or list, got '" + source + "'");
}

DiscretePath path_from(const RunConfig& cfg, int d) {
  if (cfg.has("path", "waypoints")) {
    // waypoints = t x_1 .. x_d ; ...
    DiscretePath p;
    for (const auto& item : split(cfg.str("path", "waypoints"), ';')) {
      std::vector<double> v;
      for (const auto& tok : split(item, ' ')) v.push_back(parse_real(tok, "[path].waypoints"));
      if (static_cast<int>(v.size()) != d + 1) {
        throw ConfigError("[path].waypoints: each waypoint needs t and d coordinates");
      }
      p.times.push_back(v[0]);
      p.positions.push_back(Eigen::Map<const Eigen::VectorXd>(v.data() + 1, d));
    }
    try {
      p.validate(d);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[path].waypoints: ") + e.what());
    }
    return p;
  }
  return random_path(d, static_cast<std::size_t>(cfg.integer_or("path", "n_cells", 16)),
                     cfg.real_or("path", "T", 1.0), cfg.u64_or("path", "seed", 1));
}

}  // namespace pathgibbs
