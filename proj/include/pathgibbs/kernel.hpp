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
#include <memory>
#include <span>
#include <vector>

#include "pathgibbs/spectral.hpp"

namespace pathgibbs {

/// Angular average of the plane wave e^{i k.x} over directions of k, as a
/// function of u = |k||x|, with the derivatives needed for the Hessian.
struct AngularAverage {
  double value;          // Lambda_d(u)
  double slope_over_u;   // Lambda_d'(u) / u, finite at u = 0
  double curvature;      // Lambda_d''(u)
};
AngularAverage angular_average(int d, double u);

/// Radial coefficients of the pair potential at (r, t): W itself and the
/// Hessian split d_a d_b W(x, t) = A delta_ab + B xhat_a xhat_b. The spatial
/// gradient is A * x.
struct KernelCoefficients {
  double w = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Direct quadrature of W(r, t) = -1/2 sigma_d int s^{d-1} rho2(s) Lambda_d(s r)
/// e^{-omega(s)|t|} / (2 omega(s)) ds together with the Hessian coefficients.
/// Throws std::domain_error if the quadrature does not converge.
KernelCoefficients kernel_coefficients(const SpectralDensity& sd, double r, double t);

double eval_w(const SpectralDensity& sd, double r, double t);

/// gamma(t) = -W(0, t) >= |W(x, t)|.
double envelope(const SpectralDensity& sd, double t);

/// c(t) = 1/2 sigma_d int s^{d+1} rho2 e^{-omega|t|} / (2 omega) ds, the trace
/// of the Hessian at the origin.
double hessian_trace_at_origin(const SpectralDensity& sd, double t);

Eigen::MatrixXd hessian_w(const SpectralDensity& sd, std::span<const double> x, double t);

/// int_{t_cut}^inf gamma(t) dt = 1/2 sigma_d int s^{d-1} rho2 e^{-omega t_cut} / (2 omega^2) ds.
double envelope_tail(const SpectralDensity& sd, double t_cut);

struct TailFit {
  double exponent = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// Least-squares slope of -log gamma against log t on [t_lo, t_hi], sampled at
/// n log-spaced points. Throws std::domain_error if gamma vanishes anywhere in
/// the window.
TailFit tail_exponent(const SpectralDensity& sd, double t_lo, double t_hi, int n = 32);

/// Same fit on caller-supplied samples of gamma.
double fit_tail_exponent(std::span<const double> t, std::span<const double> gamma);

/// Interpolating view of one time slice of a PairKernel. W is cubic Hermite in
/// r using the tabulated slope dW/dr = r A, so the value is C^1 and its
/// derivative is exact for the interpolant. A and B use 4-point Lagrange
/// interpolation. Beyond the last r node the kernel is treated as zero.
class RadialSlice {
 public:
  RadialSlice(std::span<const double> r_grid, std::span<const double> w,
              std::span<const double> slope, std::span<const double> a, std::span<const double> b);

  double w(double r) const;
  /// W and dW/dr of the interpolant.
  void w_and_slope(double r, double& w, double& slope) const;
  void hessian_coefficients(double r, double& a, double& b) const;

 private:
  std::size_t locate(double r) const;

  std::span<const double> r_;
  std::span<const double> w_;
  std::span<const double> slope_;
  std::span<const double> a_;
  std::span<const double> b_;
  bool uniform_;
  double h_;
};

/// Tabulated pair potential on an (r, t) grid. Immutable and shareable.
class PairKernel {
 public:
  /// Fills the tables by quadrature. Requires strictly increasing grids with
  /// r_grid[0] >= 0, t_grid[0] = 0, and 0 < t_cut <= t_grid.back().
  static PairKernel tabulate(const SpectralDensity& sd, std::vector<double> r_grid,
                             std::vector<double> t_grid, double t_cut);

  const SpectralDensity& source() const { return *source_; }
  const std::vector<double>& r_grid() const { return r_grid_; }
  const std::vector<double>& t_grid() const { return t_grid_; }
  double t_cut() const { return t_cut_; }
  /// int_{t_cut}^inf gamma(t) dt.
  double tail_bound() const { return tail_bound_; }

  /// Table entries, indexed [t_index * n_r + r_index].
  double w_entry(std::size_t ir, std::size_t it) const { return w_[it * r_grid_.size() + ir]; }
  double a_entry(std::size_t ir, std::size_t it) const { return a_[it * r_grid_.size() + ir]; }
  double b_entry(std::size_t ir, std::size_t it) const { return b_[it * r_grid_.size() + ir]; }

  RadialSlice slice(std::size_t it) const;

  /// Interpolated W(r, t); cubic in both directions, zero for |t| > t_cut.
  double w(double r, double t) const;
  /// Interpolated Hessian d_a d_b W(x, t).
  Eigen::MatrixXd hessian(std::span<const double> x, double t) const;

 private:
  PairKernel() = default;
  template <class SliceEval>
  double interpolate_t(double t, SliceEval&& eval) const;

  std::shared_ptr<const SpectralDensity> source_;
  std::vector<double> r_grid_;
  std::vector<double> t_grid_;
  double t_cut_ = 0.0;
  double tail_bound_ = 0.0;
  std::vector<double> w_;
  std::vector<double> slope_;
  std::vector<double> a_;
  std::vector<double> b_;
};

/// Uniform grid helper: n points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace pathgibbs
