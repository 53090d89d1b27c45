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
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "pathgibbs/fieldmodes.hpp"
#include "pathgibbs/kernel.hpp"
#include "pathgibbs/stats.hpp"

using namespace pathgibbs;
using pathgibbs::testing::test_density;

namespace {

Mode unit_mode(int d) {
  Mode m;
  m.k = Eigen::VectorXd::Zero(d);
  m.w = 1.0;
  m.omega = 1.0;
  m.amp2 = 1.0;
  return m;
}

DiscretePath constant_path(int d, double T, int cells) {
  DiscretePath p;
  for (int i = 0; i <= cells; ++i) {
    p.times.push_back(T * i / cells);
    p.positions.push_back(Eigen::VectorXd::Zero(d));
  }
  return p;
}

}  // namespace

TEST_CASE("discrete kernel examples") {
  ModeSet empty(3);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.4);
  CHECK(discrete_kernel(empty, x, 0.3) == 0.0);
  ModeSet one(3);
  one.add(unit_mode(3));
  CHECK(discrete_kernel(one, x, 0.0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(discrete_kernel(one, x, 2.0) == doctest::Approx(-0.25 * std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("discrete kernel symmetries") {
  const ModeSet ms = random_modes(3, 6, 21);
  std::vector<Mode> both;
  for (const Mode& m : ms.modes()) {
    both.push_back(m);
    Mode r = m;
    r.k = -m.k;
    both.push_back(r);
  }
  const ModeSet sym(3, both);
  const Eigen::VectorXd x = (Eigen::VectorXd(3) << 0.3, -1.2, 0.7).finished();
  for (double t : {0.0, 0.4, 1.7}) {
    CHECK(discrete_kernel(ms, x, t) == discrete_kernel(ms, x, -t));
    CHECK(discrete_kernel(sym, x, t) == doctest::Approx(discrete_kernel(sym, -x, t)).epsilon(1e-15));
    CHECK(std::abs(discrete_kernel(ms, x, t)) <= -discrete_kernel(ms, Eigen::VectorXd::Zero(3), t) + 1e-15);
  }
}

TEST_CASE("mode set validation") {
  ModeSet ms(2);
  Mode m = unit_mode(2);
  m.omega = 0.0;
  CHECK_THROWS(ms.add(m));
  m = unit_mode(3);
  CHECK_THROWS(ms.add(m));
  m = unit_mode(2);
  m.amp2 = -1.0;
  CHECK_THROWS(ms.add(m));
}

TEST_CASE("variance functional closed forms") {
  ModeSet empty(3);
  CHECK(variance_functional(empty, constant_path(3, 2.0, 4)) == 0.0);
  ModeSet one(3);
  one.add(unit_mode(3));
  for (double T : {1e-3, 0.5, 1.0, 4.0}) {
    const double expect = 0.5 * (T - 1.0 + std::exp(-T));
    for (int cells : {1, 5}) {
      CHECK(variance_functional(one, constant_path(3, T, cells)) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("variance functional is nonnegative") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ModeSet ms = random_modes(2, 5, 100 + s);
    const DiscretePath p = random_path(2, 12, 2.0, 200 + s);
    CHECK(variance_functional(ms, p) >= 0.0);
  }
}

TEST_CASE("linearization identity on random paths") {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const ModeSet ms = random_modes(3, 8, 300 + s);
    const DiscretePath p = random_path(3, 16, 1.0, 400 + s);
    const double v = variance_functional(ms, p);
    const double a = pair_action(ms, p);
    worst = std::max(worst, std::abs(v - a) / v);
  }
  CHECK(worst <= 1e-10);
  // A coarse rule is visibly inexact, so the two sides are computed independently.
  const ModeSet ms = random_modes(3, 8, 300);
  const DiscretePath p = random_path(3, 16, 1.0, 400);
  CHECK(std::abs(pair_action(ms, p, 2) - variance_functional(ms, p)) > 1e-12);
}

TEST_CASE("linearization check monte carlo") {
  const ModeSet ms = random_modes(3, 8, 5);
  const DiscretePath p = random_path(3, 16, 1.0, 6);
  const LinearizationReport rep = linearization_check(ms, p, 100000, 7);
  CHECK(rep.exact_rel_gap <= 1e-10);
  CHECK(rep.mc_expected == doctest::Approx(std::exp(rep.variance_functional)));
  CHECK(rep.mc_se > 0.0);
  CHECK(std::abs(rep.mc_mean - rep.mc_expected) <= 3.0 * rep.mc_se);

  const LinearizationReport e = linearization_check(ModeSet(3), p, 10, 1);
  CHECK(e.mc_mean == 1.0);
  CHECK(e.mc_expected == 1.0);
  CHECK(e.exact_gap == 0.0);
  CHECK(e.mc_gap == 0.0);
}

TEST_CASE("linearization check refuses overflowing variance") {
  ModeSet big(1);
  Mode m = unit_mode(1);
  m.amp2 = 1e4;
  big.add(m);
  CHECK_THROWS_AS(linearization_check(big, constant_path(1, 200.0, 4), 10, 1), std::overflow_error);
}

TEST_CASE("ou sampler: stationary variance and autocovariance") {
  ModeSet ms(1);
  ms.add(unit_mode(1));
  const double dt = 0.5;
  std::vector<double> times(100000);
  for (std::size_t i = 0; i < times.size(); ++i) times[i] = dt * i;
  const OuTrajectories ou = sample_ou(ms, times, 13);
  for (const auto* traj : {&ou.cos_part[0], &ou.sin_part[0]}) {
    std::vector<double> sq(traj->size()), lag(traj->size() - 1);
    for (std::size_t i = 0; i < traj->size(); ++i) sq[i] = (*traj)[i] * (*traj)[i];
    for (std::size_t i = 0; i + 1 < traj->size(); ++i) lag[i] = (*traj)[i] * (*traj)[i + 1];
    const Estimate v = batch_means(sq, 50);
    const Estimate c = batch_means(lag, 50);
    CHECK(std::abs(v.value - 0.5) <= 3.0 * v.se);
    CHECK(std::abs(c.value - 0.5 * std::exp(-dt)) <= 3.0 * c.se);
  }
  const OuTrajectories again = sample_ou(ms, times, 13);
  CHECK(again.cos_part[0] == ou.cos_part[0]);
}

TEST_CASE("modes from the spectral density reproduce the kernel at the origin") {
  const auto sd = test_density();
  const ModeSet ms = modes_from_spectral(sd, 8);
  CHECK(ms.size() == 6u * 8u * static_cast<std::size_t>(sd.quad_nodes()));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  for (double t : {0.0, 0.5, 2.0}) {
    CHECK(discrete_kernel(ms, zero, t) == doctest::Approx(eval_w(sd, 0.0, t)).epsilon(1e-10));
  }
  FormFactor f;
  CHECK_THROWS(modes_from_spectral(SpectralDensity(3, PowerLaw{1.0}, f, 0.0, 1.0), 4));
}

TEST_CASE("random path shape") {
  const DiscretePath p = random_path(2, 10, 3.0, 1);
  CHECK(p.cells() == 10u);
  CHECK(p.times.front() == 0.0);
  for (std::size_t i = 1; i < p.times.size(); ++i) {
    const double h = p.times[i] - p.times[i - 1];
    CHECK(h >= 0.5 * 3.0 / 10);
    CHECK(h <= 1.5 * 3.0 / 10);
  }
  CHECK_NOTHROW(p.validate(2));
  CHECK_THROWS(p.validate(3));
}
