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


#include "pathgibbs/fieldmodes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathgibbs/quadrature.hpp"
#include "pathgibbs/rng.hpp"

namespace pathgibbs {
namespace {

// x - 1 + e^{-x}, accurate for small x.
double phi2(double x) {
  if (x < 1e-3) return x * x * (0.5 - x / 6.0 + x * x / 24.0);
  return x + std::expm1(-x);
}

double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(b); }

}  // namespace

ModeSet::ModeSet(int d, std::vector<Mode> modes) : d_(d) {
  for (auto& m : modes) add(std::move(m));
}

void ModeSet::add(Mode m) {
  if (m.k.size() != d_) throw std::invalid_argument("mode wave vector has wrong dimension");
  if (!(m.w > 0.0) || !(m.omega > 0.0) || !(m.amp2 >= 0.0)) {
    throw std::invalid_argument("mode needs w > 0, omega > 0, amp2 >= 0");
  }
  modes_.push_back(std::move(m));
}

ModeSet modes_from_spectral(const SpectralDensity& sd, int radial_panels) {
  const int d = sd.dim();
  ModeSet ms(d);
  if (sd.is_zero()) return ms;
  const RadialRule rr = radial_rule(sd, radial_panels);
  for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
    const double s = rr.nodes[i];
    const double amp2 = sd.rho2(s);
    for (int a = 0; a < d; ++a) {
      for (int sign : {1, -1}) {
        Mode m;
        m.k = Eigen::VectorXd::Zero(d);
        m.k(a) = sign * s;
        m.w = rr.weights[i] / (2.0 * d);
        m.omega = sd.omega(s);
        m.amp2 = amp2;
        ms.add(std::move(m));
      }
    }
  }
  return ms;
}

ModeSet random_modes(int d, std::size_t n, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, StreamDomain::kTest, 0);
  ModeSet ms(d);
  for (std::size_t i = 0; i < n; ++i) {
    Mode m;
    Eigen::VectorXd dir(d);
    for (int a = 0; a < d; ++a) dir(a) = rng.normal();
    dir /= dir.norm();
    m.k = (0.5 + 1.5 * rng.uniform()) * dir;
    m.omega = 0.5 + 1.5 * rng.uniform();
    m.w = 0.5 + rng.uniform();
    m.amp2 = 0.5 + rng.uniform();
    ms.add(std::move(m));
  }
  return ms;
}

void DiscretePath::validate(int d) const {
  if (times.size() < 2) throw std::invalid_argument("path needs at least one cell");
  if (positions.size() != times.size()) {
    throw std::invalid_argument("path needs one position per time");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("path times must increase");
  }
  for (const auto& q : positions) {
    if (q.size() != d) throw std::invalid_argument("path position has wrong dimension");
  }
}

DiscretePath random_path(int d, std::size_t n_cells, double T, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, StreamDomain::kTest, 1);
  DiscretePath p;
  p.times.push_back(0.0);
  p.positions.push_back(Eigen::VectorXd::Zero(d));
  for (std::size_t i = 0; i < n_cells; ++i) {
    const double h = (0.5 + rng.uniform()) * T / static_cast<double>(n_cells);
    Eigen::VectorXd q = p.positions.back();
    for (int a = 0; a < d; ++a) q(a) += std::sqrt(h) * rng.normal();
    p.times.push_back(p.times.back() + h);
    p.positions.push_back(std::move(q));
  }
  return p;
}

double discrete_kernel(const ModeSet& ms, const Eigen::VectorXd& x, double t) {
  const double at = std::abs(t);
  double acc = 0.0;
  for (const Mode& m : ms.modes()) {
    acc += m.w * m.amp2 * std::cos(dot(m.k, x)) * std::exp(-m.omega * at) / (2.0 * m.omega);
  }
  return -0.5 * acc;
}

double variance_functional(const ModeSet& ms, const DiscretePath& path) {
  if (ms.empty()) return 0.0;
  path.validate(ms.dim());
  const std::size_t n = path.cells();
  double total = 0.0;
  for (const Mode& m : ms.modes()) {
    const double om = m.omega;
    double acc = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      const double hi = path.times[i] - path.times[i - 1];
      acc += 2.0 * phi2(om * hi) / (om * om);
      const double fi = -std::expm1(-om * hi);
      for (std::size_t j = i + 1; j <= n; ++j) {
        const double hj = path.times[j] - path.times[j - 1];
        const double gap = path.times[j - 1] - path.times[i];
        const double cell = std::exp(-om * gap) * fi * -std::expm1(-om * hj) / (om * om);
        acc += 2.0 * std::cos(dot(m.k, path.positions[j] - path.positions[i])) * cell;
      }
    }
    total += m.w * m.amp2 * acc / (2.0 * om);
  }
  return 0.5 * total;
}

double pair_action(const ModeSet& ms, const DiscretePath& path, int order) {
  if (ms.empty()) return 0.0;
  path.validate(ms.dim());
  const auto& gl = quadrature::rule(order);
  const std::size_t n = path.cells();
  const std::size_t q = gl.nodes.size();
  std::vector<double> u(q), wu(q);
  for (std::size_t a = 0; a < q; ++a) {
    u[a] = 0.5 * (gl.nodes[a] + 1.0);
    wu[a] = 0.5 * gl.weights[a];
  }
  double acc = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double ai = path.times[i - 1];
    const double hi = path.times[i] - ai;
    // Diagonal cell: both triangles, t = a + h xi, s = a + h xi eta.
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(ms.dim());
    double diag = 0.0;
    for (std::size_t a = 0; a < q; ++a) {
      for (std::size_t b = 0; b < q; ++b) {
        const double lag = hi * u[a] * (1.0 - u[b]);
        diag += wu[a] * wu[b] * hi * hi * u[a] * discrete_kernel(ms, zero, lag);
      }
    }
    acc += 2.0 * diag;
    for (std::size_t j = i + 1; j <= n; ++j) {
      const double aj = path.times[j - 1];
      const double hj = path.times[j] - aj;
      const Eigen::VectorXd dx = path.positions[j] - path.positions[i];
      double off = 0.0;
      for (std::size_t a = 0; a < q; ++a) {
        const double s = ai + hi * u[a];
        for (std::size_t b = 0; b < q; ++b) {
          const double t = aj + hj * u[b];
          off += wu[a] * wu[b] * discrete_kernel(ms, dx, t - s);
        }
      }
      acc += 2.0 * hi * hj * off;
    }
  }
  return -acc;
}

OuTrajectories sample_ou(const ModeSet& ms, const std::vector<double>& times, std::uint64_t seed) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("sample_ou: times must increase");
  }
  OuTrajectories out;
  out.cos_part.resize(ms.size());
  out.sin_part.resize(ms.size());
  for (std::size_t m = 0; m < ms.size(); ++m) {
    Rng rng = Rng::stream(seed, StreamDomain::kFieldReplica, m);
    const double om = ms[m].omega;
    for (auto* traj : {&out.cos_part[m], &out.sin_part[m]}) {
      traj->resize(times.size());
      if (times.empty()) continue;
      double x = std::sqrt(0.5 / om) * rng.normal();
      (*traj)[0] = x;
      for (std::size_t i = 1; i < times.size(); ++i) {
        const double dt = times[i] - times[i - 1];
        const double decay = std::exp(-om * dt);
        const double var = -std::expm1(-2.0 * om * dt) / (2.0 * om);
        x = decay * x + std::sqrt(var) * rng.normal();
        (*traj)[i] = x;
      }
    }
  }
  return out;
}

namespace {

// Exact joint law of (X_h, int_0^h X ds) for dX = -omega X dt + dW given X_0.
struct CellLaw {
  double decay;     // E[X_h | x] = decay x
  double mean_int;  // E[I | x] = mean_int x
  double l11, l21, l22;  // Cholesky factor of the conditional covariance
};

CellLaw cell_law(double om, double h) {
  CellLaw c{};
  const double e1 = -std::expm1(-om * h);       // 1 - e^{-wh}
  const double e2 = -std::expm1(-2.0 * om * h);  // 1 - e^{-2wh}
  c.decay = 1.0 - e1;
  c.mean_int = e1 / om;
  const double vx = e2 / (2.0 * om);
  double vi = 0.0;
  const double x = om * h;
  if (x < 1e-2) {
    // h^3/3 - omega h^4/4 + ...
    vi = h * h * h * (1.0 / 3.0 - x / 4.0 + 7.0 * x * x / 60.0);
  } else {
    vi = (h - 2.0 * e1 / om + e2 / (2.0 * om)) / (om * om);
  }
  const double cxi = e1 * e1 / (2.0 * om * om);
  c.l11 = std::sqrt(vx);
  c.l21 = vx > 0.0 ? cxi / c.l11 : 0.0;
  c.l22 = std::sqrt(std::max(0.0, vi - c.l21 * c.l21));
  return c;
}

}  // namespace

LinearizationReport linearization_check(const ModeSet& ms, const DiscretePath& path,
                                        std::size_t n_samples, std::uint64_t seed) {
  LinearizationReport rep;
  rep.n_samples = n_samples;
  if (ms.empty()) return rep;
  path.validate(ms.dim());
  rep.variance_functional = variance_functional(ms, path);
  rep.pair_action = pair_action(ms, path);
  rep.exact_gap = std::abs(rep.variance_functional - rep.pair_action);
  rep.exact_rel_gap =
      rep.exact_gap / std::max(std::abs(rep.variance_functional), std::numeric_limits<double>::min());
  if (rep.variance_functional > 0.5 * std::log(std::numeric_limits<double>::max())) {
    throw std::overflow_error(
        "linearization_check: exp(variance) overflows; shorten the path or lower the amplitude");
  }
  rep.mc_expected = std::exp(rep.variance_functional);
  if (n_samples == 0) return rep;

  const std::size_t n = path.cells();
  const std::size_t nm = ms.size();
  std::vector<std::vector<CellLaw>> laws(nm, std::vector<CellLaw>(n));
  std::vector<std::vector<double>> cosq(nm, std::vector<double>(n)), sinq(nm, std::vector<double>(n));
  std::vector<double> scale(nm), stat_sd(nm);
  for (std::size_t m = 0; m < nm; ++m) {
    const Mode& md = ms[m];
    scale[m] = std::sqrt(md.w * md.amp2);
    stat_sd[m] = std::sqrt(0.5 / md.omega);
    for (std::size_t i = 0; i < n; ++i) {
      laws[m][i] = cell_law(md.omega, path.times[i + 1] - path.times[i]);
      const double ph = dot(md.k, path.positions[i + 1]);
      cosq[m][i] = std::cos(ph);
      sinq[m][i] = std::sin(ph);
    }
  }
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t r = 0; r < n_samples; ++r) {
    Rng rng = Rng::stream(seed, StreamDomain::kFieldReplica, r);
    double z = 0.0;
    for (std::size_t m = 0; m < nm; ++m) {
      double zc = 0.0;
      for (int part = 0; part < 2; ++part) {
        const auto& proj = part == 0 ? cosq[m] : sinq[m];
        double x = stat_sd[m] * rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
          const CellLaw& c = laws[m][i];
          const double g1 = rng.normal();
          const double g2 = rng.normal();
          const double integral = c.mean_int * x + c.l21 * g1 + c.l22 * g2;
          x = c.decay * x + c.l11 * g1;
          zc += proj[i] * integral;
        }
      }
      z += scale[m] * zc;
    }
    const double v = std::exp(-z);
    sum += v;
    sum2 += v * v;
  }
  const double nn = static_cast<double>(n_samples);
  rep.mc_mean = sum / nn;
  const double var = n_samples > 1 ? std::max(0.0, (sum2 - nn * rep.mc_mean * rep.mc_mean) / (nn - 1.0)) : 0.0;
  rep.mc_se = std::sqrt(var / nn);
  rep.mc_gap = std::abs(rep.mc_mean - rep.mc_expected);
  return rep;
}

}  // namespace pathgibbs
