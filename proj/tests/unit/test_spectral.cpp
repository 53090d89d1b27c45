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


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fixtures.hpp"
#include "pathgibbs/spectral.hpp"

using namespace pathgibbs;
using pathgibbs::testing::test_density;
using pathgibbs::testing::zero_density;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("moments of the compact test density") {
  const auto sd = test_density();
  // 4 pi int_1^2 r^{2-n} dr.
  CHECK(moment(sd, 1).value == doctest::Approx(6 * kPi).epsilon(1e-10));
  CHECK(moment(sd, 2).value == doctest::Approx(4 * kPi).epsilon(1e-10));
  CHECK(moment(sd, 3).value == doctest::Approx(4 * kPi * std::log(2.0)).epsilon(1e-10));
  CHECK(weighted_moment(sd, 2).value == doctest::Approx(28 * kPi / 3).epsilon(1e-10));
  CHECK(weighted_moment(sd, 4).value == doctest::Approx(4 * kPi).epsilon(1e-10));
  CHECK(c_rho(sd) == doctest::Approx(2 * kPi * std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("moments of a gaussian form factor match closed forms") {
  FormFactor f;
  f.shape = FormFactor::Shape::kGaussian;
  f.width = 0.8;
  f.amplitude = 1.7;
  const double a = 0.5, b = 3.0, w2 = f.width * f.width;
  const SpectralDensity sd(3, PowerLaw{1.0}, f, a, b);
  // 4 pi A int_a^b r e^{-r^2 / 2w^2} dr
  const double i1 = 4 * kPi * f.amplitude * w2 * (std::exp(-a * a / (2 * w2)) - std::exp(-b * b / (2 * w2)));
  CHECK(moment(sd, 1).value == doctest::Approx(i1).epsilon(1e-10));
  // d = 2, omega = r: 2 pi A int_a^b e^{-r^2/2w^2} dr = 2 pi A w sqrt(pi/2) (erf(b/w sqrt2) - erf(a/w sqrt2))
  const SpectralDensity sd2(2, PowerLaw{1.0}, f, a, b);
  const double s2 = std::sqrt(2.0) * f.width;
  const double i1_2d = 2 * kPi * f.amplitude * f.width * std::sqrt(kPi / 2) *
                       (std::erf(b / s2) - std::erf(a / s2));
  CHECK(moment(sd2, 1).value == doctest::Approx(i1_2d).epsilon(1e-10));
}

TEST_CASE("zero density") {
  const auto sd = zero_density();
  for (int n = 1; n <= 3; ++n) CHECK(moment(sd, n).value == 0.0);
  CHECK(weighted_moment(sd, 2).value == 0.0);
  CHECK(c_rho(sd) == 0.0);
  const auto rep = validate(sd);
  CHECK(rep.passed);
}

TEST_CASE("linearity and monotonicity in the form factor") {
  const auto sd = test_density();
  const auto sd3 = sd.scaled(3.0);
  for (int n = 1; n <= 3; ++n) {
    CHECK(moment(sd3, n).value == doctest::Approx(3.0 * moment(sd, n).value).epsilon(1e-12));
  }
  CHECK(c_rho(sd3) == doctest::Approx(3.0 * c_rho(sd)).epsilon(1e-12));
  FormFactor f;
  const SpectralDensity wider(3, PowerLaw{1.0}, f, 0.5, 3.0);
  for (int n = 1; n <= 3; ++n) CHECK(moment(wider, n).value >= moment(sd, n).value);
}

TEST_CASE("validate accepts the infrared-cut density") {
  const auto rep = validate(test_density());
  CHECK(rep.passed);
  CHECK(rep.violations.empty());
  CHECK(rep.positivity_condition);
  for (double m : rep.moments) CHECK(std::isfinite(m));
}

TEST_CASE("validate rejects the density without infrared cutoff") {
  FormFactor f;
  const SpectralDensity sd(3, PowerLaw{1.0}, f, 0.0, 1.0);
  const auto rep = validate(sd);
  CHECK_FALSE(rep.passed);
  bool i3 = false;
  for (const auto& v : rep.violations) i3 = i3 || v.label == "I_3";
  CHECK(i3);
  CHECK_FALSE(moment(sd, 3).finite);
  CHECK(moment(sd, 1).finite);
  CHECK(moment(sd, 2).finite);
  CHECK_THROWS(c_rho(sd));
}

TEST_CASE("validation is stable under quadrature refinement") {
  for (int nodes : {8, 16, 32}) {
    CHECK(validate(test_density(1.0, nodes)).passed);
    FormFactor f;
    CHECK_FALSE(validate(SpectralDensity(3, PowerLaw{1.0}, f, 0.0, 1.0, nodes)).passed);
  }
}

TEST_CASE("radial rule integrates the measure") {
  const auto sd = test_density();
  const RadialRule rr = radial_rule(sd, 4);
  double s = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
    s += rr.weights[i];
    s1 += rr.weights[i] / rr.nodes[i];
  }
  CHECK(s == doctest::Approx(4 * kPi * 7.0 / 3.0).epsilon(1e-12));
  CHECK(s1 == doctest::Approx(6 * kPi).epsilon(1e-12));
  FormFactor f;
  CHECK_THROWS(radial_rule(SpectralDensity(3, PowerLaw{1.0}, f, 0.0, 1.0), 4));
}

TEST_CASE("constructor rejects bad input") {
  FormFactor f;
  CHECK_THROWS_AS(SpectralDensity(4, PowerLaw{1.0}, f, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(SpectralDensity(3, PowerLaw{1.0}, f, 2.0, 1.0), std::invalid_argument);
  f.amplitude = -1.0;
  CHECK_THROWS_AS(SpectralDensity(3, PowerLaw{1.0}, f, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("sphere areas") {
  CHECK(test_density().sphere_area() == doctest::Approx(4 * kPi));
  FormFactor f;
  CHECK(SpectralDensity(1, PowerLaw{1.0}, f, 1, 2).sphere_area() == doctest::Approx(2.0));
  CHECK(SpectralDensity(2, PowerLaw{1.0}, f, 1, 2).sphere_area() == doctest::Approx(2 * kPi));
}
