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

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pathgibbs/quadrature.hpp"

namespace pathgibbs {

/// Dispersion law omega(r) = r^exponent.
struct PowerLaw {
  double exponent = 1.0;

  double operator()(double r) const;
  std::string describe() const;
};

/// Radial form factor |rho_hat|^2(r) on its support, scaled by `amplitude`.
struct FormFactor {
  enum class Shape { kIndicator, kGaussian };

  Shape shape = Shape::kIndicator;
  /// Standard deviation of the Gaussian bump exp(-r^2 / (2 width^2)).
  double width = 1.0;
  double amplitude = 1.0;

  double operator()(double r) const;
  std::string describe() const;
};

/// Isotropic spectral data (rho_hat^2, omega) on a compact radial support.
/// Immutable after construction.
class SpectralDensity {
 public:
  SpectralDensity(int d, PowerLaw omega, FormFactor rho2, double r_min, double r_max,
                  int quad_nodes = 16);

  int dim() const { return d_; }
  double r_min() const { return r_min_; }
  double r_max() const { return r_max_; }
  int quad_nodes() const { return quad_nodes_; }
  const PowerLaw& omega_law() const { return omega_; }
  const FormFactor& rho2_law() const { return rho2_; }

  double omega(double r) const { return omega_(r); }
  /// Zero outside [r_min, r_max].
  double rho2(double r) const;
  bool is_zero() const { return rho2_.amplitude == 0.0; }

  /// Area of the unit sphere S^{d-1}: 2, 2 pi, 4 pi.
  double sphere_area() const;

  /// Quadrature options tied to this density's resolution.
  quadrature::Options quad_options() const;

  /// Same density with the form factor multiplied by `factor`.
  SpectralDensity scaled(double factor) const;

 private:
  int d_;
  PowerLaw omega_;
  FormFactor rho2_;
  double r_min_;
  double r_max_;
  int quad_nodes_;
};

/// A radial integral that may diverge. `value` is +inf when divergent.
struct RadialIntegral {
  double value = 0.0;
  bool finite = true;
  std::string diagnostic;
};

/// Integrates a vector-valued f(r) over [r_min, r_max] with the adaptive
/// rule. For r_min = 0 the interval is split into dyadic shells accumulating at
/// the origin; the result is flagged unconverged if the innermost shell still
/// carries a non-negligible share of the total.
template <std::size_t K, class F>
quadrature::Result<K> integrate_support(const SpectralDensity& sd, F&& f);

/// sigma_d * int r^{d-1} rho2(r) g(r) dr over the support. When r_min = 0 an
/// endpoint probe estimates the power-law exponent of the integrand at the
/// origin and reports divergence for exponents <= -1; independently, failure
/// of the adaptive refinement is reported as divergence.
RadialIntegral radial_integral(const SpectralDensity& sd, const std::function<double(double)>& g);

/// I_n = sigma_d int r^{d-1} rho2 omega^{-n} dr, n in {1, 2, 3}.
RadialIntegral moment(const SpectralDensity& sd, int n);
/// J_n = sigma_d int r^{d-1} rho2 r^2 omega^{-n} dr, n in {2, 4}.
RadialIntegral weighted_moment(const SpectralDensity& sd, int n);

struct ValidationReport {
  struct Violation {
    std::string label;
    std::string message;
  };

  bool passed = false;
  /// I_1, I_2, I_3.
  double moments[3] = {0.0, 0.0, 0.0};
  double j2 = 0.0;
  double j4 = 0.0;
  /// Finiteness of J_2 and J_4 (the extra integrability behind D > 0).
  /// Reported separately; does not affect `passed`.
  bool positivity_condition = false;
  std::vector<Violation> violations;
  std::vector<Violation> positivity_violations;
};

ValidationReport validate(const SpectralDensity& sd);

/// A superadditivity constant for the path action: C_rho = I_3 / 2, from
/// bounding the cross term by 2 int_0^inf t gamma(t) dt. Throws
/// std::domain_error when I_3 diverges.
double c_rho(const SpectralDensity& sd);

/// Composite Gauss-Legendre nodes and weights over the support, with the
/// radial measure sigma_d r^{d-1} folded into the weights.
struct RadialRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
RadialRule radial_rule(const SpectralDensity& sd, int panels);

template <std::size_t K, class F>
quadrature::Result<K> integrate_support(const SpectralDensity& sd, F&& f) {
  const quadrature::Options opt = sd.quad_options();
  if (sd.r_min() > 0.0) return quadrature::integrate<K>(f, sd.r_min(), sd.r_max(), opt);

  constexpr int kShells = 48;
  quadrature::Result<K> total;
  total.converged = true;
  std::array<double, K> innermost{};
  double hi = sd.r_max();
  for (int shell = 0; shell < kShells; ++shell) {
    const double lo = 0.5 * hi;
    const auto part = quadrature::integrate<K>(f, lo, hi, opt);
    for (std::size_t k = 0; k < K; ++k) total.value[k] += part.value[k];
    total.converged = total.converged && part.converged;
    total.panels += part.panels;
    innermost = part.value;
    hi = lo;
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::isfinite(total.value[k]) ||
        std::abs(innermost[k]) > 1e-10 * std::abs(total.value[k]) + 1e-300) {
      total.converged = false;
    }
  }
  return total;
}

}  // namespace pathgibbs
