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

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "pathgibbs/spectral.hpp"

namespace pathgibbs {

/// One real field mode: wave vector k, quadrature weight w, rate omega and
/// form-factor value amp2 = |rho_hat(k)|^2. Each mode carries a cosine and a
/// sine Ornstein-Uhlenbeck component.
struct Mode {
  Eigen::VectorXd k;
  double w = 1.0;
  double omega = 1.0;
  double amp2 = 1.0;
};

class ModeSet {
 public:
  explicit ModeSet(int d) : d_(d) {}
  ModeSet(int d, std::vector<Mode> modes);

  int dim() const { return d_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }
  const Mode& operator[](std::size_t i) const { return modes_[i]; }
  const std::vector<Mode>& modes() const { return modes_; }

  /// Validates w > 0, omega > 0, amp2 >= 0 and the dimension of k.
  void add(Mode m);

 private:
  int d_;
  std::vector<Mode> modes_;
};

/// Radial Gauss-Legendre nodes of the density along the 2d coordinate
/// directions +-e_a, with weights sigma_d s^{d-1} w_i / (2d). Exact for the
/// kernel at x = 0 and a lattice-direction approximation elsewhere. Requires an
/// infrared cutoff.
ModeSet modes_from_spectral(const SpectralDensity& sd, int radial_panels);

/// Random mode set for tests: |k| in [0.5, 2], random direction, omega in
/// [0.5, 2], w and amp2 in [0.5, 1.5].
ModeSet random_modes(int d, std::size_t n, std::uint64_t seed);

/// Piecewise-constant path: q_i holds on (t_{i-1}, t_i], i = 1..n. q_0 is the
/// starting point and does not enter the time integrals.
struct DiscretePath {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> positions;

  std::size_t cells() const { return times.empty() ? 0 : times.size() - 1; }
  void validate(int d) const;
};

/// Random path for tests: n cells of random lengths in [0.5, 1.5] T/n and
/// Gaussian increments of variance equal to the cell length.
DiscretePath random_path(int d, std::size_t n_cells, double T, std::uint64_t seed);

/// W_M(x, t) = -1/2 sum_m w amp2 cos(k.x) e^{-omega|t|} / (2 omega).
double discrete_kernel(const ModeSet& ms, const Eigen::VectorXd& x, double t);

/// Half the variance of Z = int tau_{q_s} phi_s(rho) ds along the path, by the
/// closed-form double integral of e^{-omega|t-s|} over each pair of cells.
double variance_functional(const ModeSet& ms, const DiscretePath& path);

/// -int int W_M(q_t - q_s, t - s) dt ds by tensor Gauss-Legendre on each pair
/// of cells; diagonal cells are split along t = s with a Duffy map so the kink
/// sits on an edge. Independent of variance_functional.
double pair_action(const ModeSet& ms, const DiscretePath& path, int order = 24);

/// Cosine and sine OU components of every mode at the given times, indexed
/// [mode][time]. Stationary start, exact transitions.
struct OuTrajectories {
  std::vector<std::vector<double>> cos_part;
  std::vector<std::vector<double>> sin_part;
};
OuTrajectories sample_ou(const ModeSet& ms, const std::vector<double>& times, std::uint64_t seed);

struct LinearizationReport {
  double variance_functional = 0.0;
  double pair_action = 0.0;
  double exact_gap = 0.0;
  /// exact_gap relative to max(|variance_functional|, tiny).
  double exact_rel_gap = 0.0;
  double mc_mean = 1.0;
  double mc_expected = 1.0;
  double mc_gap = 0.0;
  double mc_se = 0.0;
  std::size_t n_samples = 0;
};

/// Compares the closed form against pair_action, then estimates E[e^{-Z}] by
/// exact joint sampling of each mode's OU value and cell integrals. Replica r
/// uses the stream (seed, replica r). Throws std::overflow_error if
/// exp(variance_functional) would overflow.
LinearizationReport linearization_check(const ModeSet& ms, const DiscretePath& path,
                                        std::size_t n_samples, std::uint64_t seed);

}  // namespace pathgibbs
