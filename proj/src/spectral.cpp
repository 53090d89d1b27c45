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

#include "pathgibbs/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pathgibbs {

double PowerLaw::operator()(double r) const {
  if (exponent == 0.0) return 1.0;
  return std::pow(r, exponent);
}

std::string PowerLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "power:" << exponent;
  return os.str();
}

double FormFactor::operator()(double r) const {
  switch (shape) {
    case Shape::kIndicator:
      return amplitude;
    case Shape::kGaussian:
      return amplitude * std::exp(-0.5 * r * r / (width * width));
  }
  return 0.0;
}

std::string FormFactor::describe() const {
  if (shape == Shape::kIndicator) return "indicator";
  std::ostringstream os;
  os.precision(17);
  os << "gaussian:" << width;
  return os.str();
}

SpectralDensity::SpectralDensity(int d, PowerLaw omega, FormFactor rho2, double r_min,
                                 double r_max, int quad_nodes)
    : d_(d), omega_(omega), rho2_(rho2), r_min_(r_min), r_max_(r_max), quad_nodes_(quad_nodes) {
  if (d < 1 || d > 3) throw std::invalid_argument("spectral: d must be 1, 2 or 3");
  if (!(r_min >= 0.0) || !(r_max > r_min) || !std::isfinite(r_max)) {
    throw std::invalid_argument("spectral: support must satisfy 0 <= r_min < r_max < inf");
  }
  if (quad_nodes < 2) throw std::invalid_argument("spectral: quad_nodes must be at least 2");
  if (!(rho2.amplitude >= 0.0)) throw std::invalid_argument("spectral: amplitude must be >= 0");
  if (rho2.shape == FormFactor::Shape::kGaussian && !(rho2.width > 0.0)) {
    throw std::invalid_argument("spectral: gaussian width must be positive");
  }
  if (r_min > 0.0 && !(omega(r_min) > 0.0)) {
    throw std::invalid_argument("spectral: omega must be positive on the support");
  }
}

double SpectralDensity::rho2(double r) const {
  if (r < r_min_ || r > r_max_) return 0.0;
  return rho2_(r);
}

double SpectralDensity::sphere_area() const {
  switch (d_) {
    case 1:
      return 2.0;
    case 2:
      return 2.0 * std::numbers::pi;
    default:
      return 4.0 * std::numbers::pi;
  }
}

quadrature::Options SpectralDensity::quad_options() const {
  quadrature::Options opt;
  opt.order = quad_nodes_;
  return opt;
}

SpectralDensity SpectralDensity::scaled(double factor) const {
  FormFactor f = rho2_;
  f.amplitude *= factor;
  return SpectralDensity(d_, omega_, f, r_min_, r_max_, quad_nodes_);
}

RadialIntegral radial_integral(const SpectralDensity& sd, const std::function<double(double)>& g) {
  RadialIntegral out;
  if (sd.is_zero()) return out;
  const double sigma = sd.sphere_area();
  const int d = sd.dim();
  auto integrand = [&](double r) {
    return std::array<double, 1>{std::pow(r, d - 1) * sd.rho2(r) * g(r)};
  };

  if (sd.r_min() == 0.0) {
    // Endpoint exponent probe: f(r) ~ c r^a near the origin.
    const double r1 = std::ldexp(sd.r_max(), -40);
    const double r2 = std::ldexp(sd.r_max(), -30);
    const double f1 = integrand(r1)[0];
    const double f2 = integrand(r2)[0];
    if (f1 != 0.0 && f2 != 0.0 && std::isfinite(f1) && std::isfinite(f2) && f1 * f2 > 0.0) {
      const double a = std::log(std::abs(f2 / f1)) / std::log(r2 / r1);
      if (a <= -1.0 + 1e-6) {
        std::ostringstream os;
        os << "integrand behaves like r^" << a << " at r = 0 (non-integrable)";
        out.value = std::numeric_limits<double>::infinity();
        out.finite = false;
        out.diagnostic = os.str();
        return out;
      }
    } else if (!std::isfinite(f1) || !std::isfinite(f2)) {
      out.value = std::numeric_limits<double>::infinity();
      out.finite = false;
      out.diagnostic = "integrand is not finite near r = 0";
      return out;
    }
  }

  const auto res = integrate_support<1>(sd, integrand);
  if (!res.converged || !std::isfinite(res.value[0])) {
    out.value = std::numeric_limits<double>::infinity();
    out.finite = false;
    out.diagnostic = "adaptive quadrature did not converge under refinement";
    return out;
  }
  out.value = sigma * res.value[0];
  return out;
}

RadialIntegral moment(const SpectralDensity& sd, int n) {
  if (n < 1 || n > 3) throw std::invalid_argument("moment: n must be 1, 2 or 3");
  return radial_integral(sd, [&](double r) { return std::pow(sd.omega(r), -n); });
}

RadialIntegral weighted_moment(const SpectralDensity& sd, int n) {
  if (n != 2 && n != 4) throw std::invalid_argument("weighted_moment: n must be 2 or 4");
  return radial_integral(sd, [&](double r) { return r * r * std::pow(sd.omega(r), -n); });
}

ValidationReport validate(const SpectralDensity& sd) {
  ValidationReport rep;
  for (int n = 1; n <= 3; ++n) {
    const RadialIntegral m = moment(sd, n);
    rep.moments[n - 1] = m.value;
    if (!m.finite) {
      rep.violations.push_back({"I_" + std::to_string(n), m.diagnostic});
    }
  }
  const RadialIntegral j2 = weighted_moment(sd, 2);
  const RadialIntegral j4 = weighted_moment(sd, 4);
  rep.j2 = j2.value;
  rep.j4 = j4.value;
  if (!j2.finite) rep.positivity_violations.push_back({"J_2", j2.diagnostic});
  if (!j4.finite) rep.positivity_violations.push_back({"J_4", j4.diagnostic});
  rep.positivity_condition = rep.positivity_violations.empty();
  rep.passed = rep.violations.empty();
  return rep;
}

double c_rho(const SpectralDensity& sd) {
  const RadialIntegral i3 = moment(sd, 3);
  if (!i3.finite) throw std::domain_error("c_rho: I_3 diverges (" + i3.diagnostic + ")");
  return 0.5 * i3.value;
}

RadialRule radial_rule(const SpectralDensity& sd, int panels) {
  if (panels < 1) throw std::invalid_argument("radial_rule: panels must be positive");
  if (sd.r_min() == 0.0) {
    throw std::invalid_argument("radial_rule: requires an infrared cutoff r_min > 0");
  }
  const auto& gl = quadrature::rule(sd.quad_nodes());
  RadialRule rr;
  const double a = sd.r_min();
  const double h = (sd.r_max() - a) / panels;
  const double sigma = sd.sphere_area();
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double r = mid + 0.5 * h * gl.nodes[i];
      rr.nodes.push_back(r);
      rr.weights.push_back(sigma * std::pow(r, sd.dim() - 1) * 0.5 * h * gl.weights[i]);
    }
  }
  return rr;
}

}  // namespace pathgibbs
