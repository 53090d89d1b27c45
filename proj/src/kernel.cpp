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


#include "pathgibbs/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pathgibbs {
namespace {

// sin(u)/u and j1(u)/u by their Taylor series, for |u| < 1.
void spherical_series(double u, double& j0, double& j1_over_u) {
  const double u2 = u * u;
  j0 = 0.0;
  j1_over_u = 0.0;
  double term = 1.0;  // (-1)^k u^{2k} / (2k+1)!
  for (int k = 0; k < 14; ++k) {
    j0 += term;
    j1_over_u += term / (2.0 * k + 3.0);
    term *= -u2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
}

}  // namespace

AngularAverage angular_average(int d, double u) {
  u = std::abs(u);
  AngularAverage out{};
  switch (d) {
    case 1: {
      out.value = std::cos(u);
      double sinc = 1.0;
      if (u < 1e-4) {
        sinc = 1.0 - u * u / 6.0;
      } else {
        sinc = std::sin(u) / u;
      }
      out.slope_over_u = -sinc;
      out.curvature = -out.value;
      return out;
    }
    case 2: {
      const double j0 = std::cyl_bessel_j(0.0, u);
      double j1_over_u = 0.5;
      if (u < 1e-2) {
        const double u2 = u * u;
        j1_over_u = 0.5 - u2 / 16.0 + u2 * u2 / 384.0;
      } else {
        j1_over_u = std::cyl_bessel_j(1.0, u) / u;
      }
      out.value = j0;
      out.slope_over_u = -j1_over_u;
      out.curvature = -j0 + j1_over_u;
      return out;
    }
    case 3: {
      double j0 = 1.0;
      double j1_over_u = 1.0 / 3.0;
      if (u < 1.0) {
        spherical_series(u, j0, j1_over_u);
      } else {
        const double s = std::sin(u);
        const double c = std::cos(u);
        j0 = s / u;
        j1_over_u = (s / u - c) / (u * u);
      }
      out.value = j0;
      out.slope_over_u = -j1_over_u;
      out.curvature = -j0 + 2.0 * j1_over_u;
      return out;
    }
    default:
      throw std::invalid_argument("angular_average: dimension must be 1, 2 or 3");
  }
}

KernelCoefficients kernel_coefficients(const SpectralDensity& sd, double r, double t) {
  KernelCoefficients out;
  if (sd.is_zero()) return out;
  const int d = sd.dim();
  const double sigma = sd.sphere_area();
  const double at = std::abs(t);
  r = std::abs(r);
  auto f = [&](double s) {
    const double om = sd.omega(s);
    const double base = sigma * std::pow(s, d - 1) * sd.rho2(s) * std::exp(-om * at) / (2.0 * om);
    const AngularAverage ang = angular_average(d, s * r);
    const double s2 = s * s;
    return std::array<double, 3>{base * ang.value, base * s2 * ang.slope_over_u,
                                 base * s2 * (ang.curvature - ang.slope_over_u)};
  };
  const auto res = integrate_support<3>(sd, f);
  if (!res.converged) {
    throw std::domain_error("kernel quadrature did not converge at r=" + std::to_string(r) +
                            ", t=" + std::to_string(t));
  }
  out.w = -0.5 * res.value[0];
  out.a = -0.5 * res.value[1];
  out.b = -0.5 * res.value[2];
  return out;
}

double eval_w(const SpectralDensity& sd, double r, double t) {
  return kernel_coefficients(sd, r, t).w;
}

double envelope(const SpectralDensity& sd, double t) { return -eval_w(sd, 0.0, t); }

double hessian_trace_at_origin(const SpectralDensity& sd, double t) {
  return sd.dim() * kernel_coefficients(sd, 0.0, t).a;
}

Eigen::MatrixXd hessian_w(const SpectralDensity& sd, std::span<const double> x, double t) {
  const int d = sd.dim();
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("hessian_w: dimension mismatch");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  const KernelCoefficients k = kernel_coefficients(sd, r, t);
  Eigen::MatrixXd h = k.a * Eigen::MatrixXd::Identity(d, d);
  if (r > 0.0) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    h += k.b * (xv / r) * (xv / r).transpose();
  }
  return h;
}

double envelope_tail(const SpectralDensity& sd, double t_cut) {
  if (sd.is_zero()) return 0.0;
  const int d = sd.dim();
  const double sigma = sd.sphere_area();
  auto f = [&](double s) {
    const double om = sd.omega(s);
    return std::array<double, 1>{sigma * std::pow(s, d - 1) * sd.rho2(s) *
                                 std::exp(-om * t_cut) / (2.0 * om * om)};
  };
  const auto res = integrate_support<1>(sd, f);
  if (!res.converged || !std::isfinite(res.value[0])) {
    throw std::domain_error("envelope tail integral diverges or did not converge");
  }
  return 0.5 * res.value[0];
}

double fit_tail_exponent(std::span<const double> t, std::span<const double> gamma) {
  if (t.size() != gamma.size() || t.size() < 2) {
    throw std::invalid_argument("fit_tail_exponent: need at least two matching samples");
  }
  const std::size_t n = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 0.0) || !(gamma[i] > 0.0)) {
      throw std::domain_error("fit_tail_exponent: samples must be positive");
    }
    const double x = std::log(t[i]);
    const double y = -std::log(gamma[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (!(den > 0.0)) throw std::invalid_argument("fit_tail_exponent: degenerate time samples");
  return (n * sxy - sx * sy) / den;
}

TailFit tail_exponent(const SpectralDensity& sd, double t_lo, double t_hi, int n) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo) || n < 2) {
    throw std::invalid_argument("tail_exponent: need 0 < t_lo < t_hi and n >= 2");
  }
  std::vector<double> ts(n), gs(n);
  for (int i = 0; i < n; ++i) {
    ts[i] = t_lo * std::pow(t_hi / t_lo, static_cast<double>(i) / (n - 1));
    gs[i] = envelope(sd, ts[i]);
    if (!(gs[i] > 0.0)) {
      throw std::domain_error("tail_exponent: envelope vanishes at t=" + std::to_string(ts[i]));
    }
  }
  return {fit_tail_exponent(ts, gs), t_lo, t_hi};
}

// ---------------------------------------------------------------------------

namespace {

bool is_uniform(std::span<const double> g, double& h) {
  h = (g.back() - g.front()) / static_cast<double>(g.size() - 1);
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (std::abs((g[i] - g[i - 1]) - h) > 1e-9 * h) return false;
  }
  return true;
}

void check_grid(std::span<const double> g, const char* name) {
  if (g.size() < 4) throw std::invalid_argument(std::string(name) + " needs at least 4 nodes");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) throw std::invalid_argument(std::string(name) + " must be increasing");
  }
}

// Four-point Lagrange interpolation through (x[k], y[k]), k = 0..3.
double lagrange4(const double* x, const double* y, double at) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    double l = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j != i) l *= (at - x[j]) / (x[i] - x[j]);
    }
    acc += l * y[i];
  }
  return acc;
}

std::size_t locate_in(std::span<const double> g, double x) {
  auto it = std::upper_bound(g.begin(), g.end(), x);
  std::size_t i = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
  return std::min(i, g.size() - 2);
}

}  // namespace

RadialSlice::RadialSlice(std::span<const double> r_grid, std::span<const double> w,
                         std::span<const double> slope, std::span<const double> a,
                         std::span<const double> b)
    : r_(r_grid), w_(w), slope_(slope), a_(a), b_(b) {
  uniform_ = is_uniform(r_, h_);
}

std::size_t RadialSlice::locate(double r) const {
  if (uniform_) {
    const double f = (r - r_.front()) / h_;
    if (f <= 0.0) return 0;
    return std::min(static_cast<std::size_t>(f), r_.size() - 2);
  }
  return locate_in(r_, r);
}

void RadialSlice::w_and_slope(double r, double& w, double& slope) const {
  if (r >= r_.back()) {
    w = 0.0;
    slope = 0.0;
    return;
  }
  const std::size_t i = locate(r);
  const double h = r_[i + 1] - r_[i];
  const double s = (r - r_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  w = h00 * w_[i] + h10 * h * slope_[i] + h01 * w_[i + 1] + h11 * h * slope_[i + 1];
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  slope = (d00 * w_[i] + d01 * w_[i + 1]) / h + d10 * slope_[i] + d11 * slope_[i + 1];
}

double RadialSlice::w(double r) const {
  double w = 0.0, s = 0.0;
  w_and_slope(r, w, s);
  return w;
}

void RadialSlice::hessian_coefficients(double r, double& a, double& b) const {
  if (r >= r_.back()) {
    a = 0.0;
    b = 0.0;
    return;
  }
  const std::size_t i = locate(r);
  const std::size_t lo = std::min(i > 0 ? i - 1 : 0, r_.size() - 4);
  a = lagrange4(&r_[lo], &a_[lo], r);
  b = lagrange4(&r_[lo], &b_[lo], r);
}

PairKernel PairKernel::tabulate(const SpectralDensity& sd, std::vector<double> r_grid,
                                std::vector<double> t_grid, double t_cut) {
  check_grid(r_grid, "r grid");
  check_grid(t_grid, "t grid");
  if (r_grid.front() < 0.0) throw std::invalid_argument("r grid must start at r >= 0");
  if (t_grid.front() != 0.0) throw std::invalid_argument("t grid must start at 0");
  if (!(t_cut > 0.0) || t_cut > t_grid.back()) {
    throw std::invalid_argument("t_cut must lie in (0, t_grid.back()]");
  }
  PairKernel k;
  k.source_ = std::make_shared<const SpectralDensity>(sd);
  k.r_grid_ = std::move(r_grid);
  k.t_grid_ = std::move(t_grid);
  k.t_cut_ = t_cut;
  k.tail_bound_ = envelope_tail(sd, t_cut);
  const std::size_t nr = k.r_grid_.size(), nt = k.t_grid_.size();
  k.w_.resize(nr * nt);
  k.slope_.resize(nr * nt);
  k.a_.resize(nr * nt);
  k.b_.resize(nr * nt);
  for (std::size_t it = 0; it < nt; ++it) {
    for (std::size_t ir = 0; ir < nr; ++ir) {
      const double r = k.r_grid_[ir];
      const KernelCoefficients c = kernel_coefficients(sd, r, k.t_grid_[it]);
      const std::size_t idx = it * nr + ir;
      k.w_[idx] = c.w;
      k.slope_[idx] = r * c.a;
      k.a_[idx] = c.a;
      k.b_[idx] = c.b;
    }
  }
  return k;
}

RadialSlice PairKernel::slice(std::size_t it) const {
  const std::size_t nr = r_grid_.size();
  if (it >= t_grid_.size()) throw std::out_of_range("PairKernel::slice");
  const std::size_t off = it * nr;
  return RadialSlice(r_grid_, std::span<const double>(w_).subspan(off, nr),
                     std::span<const double>(slope_).subspan(off, nr),
                     std::span<const double>(a_).subspan(off, nr),
                     std::span<const double>(b_).subspan(off, nr));
}

template <class SliceEval>
double PairKernel::interpolate_t(double t, SliceEval&& eval) const {
  const std::size_t i = locate_in(t_grid_, t);
  if (t == t_grid_[i]) return eval(i);
  if (t == t_grid_[i + 1]) return eval(i + 1);
  const std::size_t lo = std::min(i > 0 ? i - 1 : 0, t_grid_.size() - 4);
  double y[4];
  for (int k = 0; k < 4; ++k) y[k] = eval(lo + k);
  return lagrange4(&t_grid_[lo], y, t);
}

double PairKernel::w(double r, double t) const {
  t = std::abs(t);
  r = std::abs(r);
  if (t > t_cut_) return 0.0;
  return interpolate_t(t, [&](std::size_t it) { return slice(it).w(r); });
}

Eigen::MatrixXd PairKernel::hessian(std::span<const double> x, double t) const {
  const int d = source_->dim();
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("hessian: dimension mismatch");
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
  t = std::abs(t);
  if (t > t_cut_) return h;
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  const double a = interpolate_t(t, [&](std::size_t it) {
    double a = 0, b = 0;
    slice(it).hessian_coefficients(r, a, b);
    return a;
  });
  const double b = interpolate_t(t, [&](std::size_t it) {
    double a = 0, b = 0;
    slice(it).hessian_coefficients(r, a, b);
    return b;
  });
  h.diagonal().setConstant(a);
  if (r > 0.0) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), d);
    h += b * (xv / r) * (xv / r).transpose();
  }
  return h;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("linspace needs n >= 2");
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  g.back() = hi;
  return g;
}

}  // namespace pathgibbs
