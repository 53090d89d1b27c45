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

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "pathgibbs/kernel.hpp"
#include "pathgibbs/lattice.hpp"
#include "pathgibbs/rng.hpp"

using namespace pathgibbs;
using pathgibbs::testing::test_density;

namespace {

constexpr double kPi = std::numbers::pi;

// W(0, t) for the test density, -pi int_1^2 s e^{-s t} ds.
double w0_exact(double t) {
  if (t == 0.0) return -1.5 * kPi;
  auto prim = [&](double s) { return -std::exp(-s * t) * (s / t + 1.0 / (t * t)); };
  return -kPi * (prim(2.0) - prim(1.0));
}

PathConfig random_config(const LatticeModel& lm, Rng& rng, double scale = 1.0) {
  PathConfig x = lm.zero_config();
  for (int i = -lm.n(); i <= lm.n(); ++i) {
    if (i == 0) continue;
    for (int a = 0; a < lm.dim(); ++a) x.at(i, a) = scale * rng.normal();
  }
  return x;
}

const LatticeModel& small_interacting() {
  static const LatticeModel lm =
      LatticeModel::build(test_density(0.7), 0.5, 6, 0.3, 2.6, 30.0, 601);
  return lm;
}

Eigen::MatrixXd kron_identity(const Eigen::MatrixXd& L, int d) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(L.rows() * d, L.cols() * d);
  for (int i = 0; i < L.rows(); ++i)
    for (int j = 0; j < L.cols(); ++j)
      for (int a = 0; a < d; ++a) out(i * d + a, j * d + a) = L(i, j);
  return out;
}

}  // namespace

TEST_CASE("path configuration layout") {
  PathConfig x(2, 3, 0.5);
  CHECK(x.movable() == 6);
  CHECK(x.pinned());
  Eigen::VectorXd v(12);
  for (int k = 0; k < 12; ++k) v(k) = k + 1.0;
  x.set_movable(v);
  CHECK(x.movable_vector() == v);
  CHECK(x.pinned());
  CHECK(x.at(-3, 0) == 1.0);
  CHECK(x.at(-1, 1) == 6.0);
  CHECK(x.at(1, 0) == 7.0);
  CHECK(movable_index(-3, 3) == 0);
  CHECK(movable_index(-1, 3) == 2);
  CHECK(movable_index(1, 3) == 3);
  CHECK(movable_index(3, 3) == 5);
}

TEST_CASE("free energy examples") {
  const LatticeModel lm = LatticeModel::free(3, 1.0, 2, 0.0);
  PathConfig x = lm.zero_config();
  CHECK(lm.energy(x) == 0.0);
  x.at(1, 0) = 1.0;
  CHECK(lm.energy(x) == doctest::Approx(1.0));
  CHECK_FALSE(lm.interacting());
  CHECK(lm.truncation_bound() == 0.0);
  CHECK_THROWS(lm.check(PathConfig(2, 2, 1.0)));
}

TEST_CASE("interacting energy at rest equals direct summation of W(0, .)") {
  const auto sd = test_density();
  const LatticeModel lm = LatticeModel::build(sd, 1.0, 2, 0.0, 4.0, 10.0, 201);
  REQUIRE(lm.lags() == 4);
  // Five sites: lag 0 occurs 5 times, lag +-m occurs 2 (5 - m) times.
  double expect = 0.5 * 5 * w0_exact(0.0);
  for (int m = 1; m <= 4; ++m) expect += 0.5 * 2 * (5 - m) * w0_exact(m);
  CHECK(lm.energy(lm.zero_config()) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("delta energy matches full recomputation") {
  const LatticeModel& lm = small_interacting();
  Rng rng = Rng::stream(1, StreamDomain::kTest, 20);
  PathConfig x = random_config(lm, rng);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int site = 0;
    while (site == 0) site = static_cast<int>(rng() % (2 * lm.n() + 1)) - lm.n();
    std::vector<double> prop(lm.dim());
    for (double& p : prop) p = 1.5 * rng.normal();
    PathConfig y = x;
    for (int a = 0; a < lm.dim(); ++a) y.at(site, a) = prop[a];
    const double full = lm.energy(y) - lm.energy(x);
    const double fast = lm.delta_energy(x, site, prop);
    worst = std::max(worst, std::abs(full - fast) / std::max(1.0, std::abs(full)));
    if (trial % 3 == 0) x = y;
  }
  CHECK(worst <= 1e-10);
  const auto cur = x.site(2);
  CHECK(lm.delta_energy(x, 2, std::vector<double>(cur.begin(), cur.end())) == 0.0);
  CHECK_THROWS(lm.delta_energy(x, 0, std::vector<double>(lm.dim(), 0.0)));
}

TEST_CASE("delta energy on the free model is the bond difference") {
  const double eps = 0.25, kappa = 0.7;
  const LatticeModel lm = LatticeModel::free(2, eps, 4, kappa);
  Rng rng = Rng::stream(2, StreamDomain::kTest, 21);
  const PathConfig x = random_config(lm, rng);
  for (int site : {-4, -1, 1, 3, 4}) {
    const Eigen::Vector2d p(rng.normal(), rng.normal());
    const Eigen::Vector2d old(x.at(site, 0), x.at(site, 1));
    auto sq = [](const Eigen::Vector2d& v) { return v.squaredNorm(); };
    double expect = 0.5 * kappa * eps * (sq(p) - sq(old));
    for (int nb : {site - 1, site + 1}) {
      if (nb < -4 || nb > 4) continue;
      const Eigen::Vector2d q(x.at(nb, 0), x.at(nb, 1));
      expect += (sq(p - q) - sq(old - q)) / (2 * eps);
    }
    CHECK(lm.delta_energy(x, site, std::vector<double>{p(0), p(1)}) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("block delta matches full recomputation") {
  const LatticeModel& lm = small_interacting();
  Rng rng = Rng::stream(3, StreamDomain::kTest, 22);
  const PathConfig x = random_config(lm, rng);
  for (auto [first, len] : {std::pair{1, 3}, std::pair{-5, 4}, std::pair{4, 3}, std::pair{-6, 1}}) {
    std::vector<double> vals(static_cast<std::size_t>(len * lm.dim()));
    for (double& v : vals) v = rng.normal();
    PathConfig y = x;
    for (int k = 0; k < len; ++k)
      for (int a = 0; a < lm.dim(); ++a) y.at(first + k, a) = vals[k * lm.dim() + a];
    const EnergyParts ex = lm.energy_parts(x), ey = lm.energy_parts(y);
    const EnergyParts d = lm.block_delta(x, first, len, vals);
    CHECK(d.kinetic == doctest::Approx(ey.kinetic - ex.kinetic).epsilon(1e-10));
    CHECK(d.mass == doctest::Approx(ey.mass - ex.mass).epsilon(1e-10));
    CHECK(d.pair == doctest::Approx(ey.pair - ex.pair).epsilon(1e-10));
  }
}

TEST_CASE("gradient") {
  const LatticeModel& lm = small_interacting();
  const PathConfig g0 = lm.grad(lm.zero_config());
  for (double v : g0.raw()) CHECK(std::abs(v) < 1e-14);

  Rng rng = Rng::stream(4, StreamDomain::kTest, 23);
  PathConfig x = random_config(lm, rng);
  const PathConfig g = lm.grad(x);
  const double h = 1e-5;
  double worst = 0.0;
  for (int i = -lm.n(); i <= lm.n(); ++i) {
    if (i == 0) continue;
    for (int a = 0; a < lm.dim(); ++a) {
      PathConfig p = x, m = x;
      p.at(i, a) += h;
      m.at(i, a) -= h;
      worst = std::max(worst, std::abs((lm.energy(p) - lm.energy(m)) / (2 * h) - g.at(i, a)));
    }
  }
  CHECK(worst <= 1e-6);
  for (int a = 0; a < lm.dim(); ++a) CHECK(g.at(0, a) == 0.0);
}

TEST_CASE("free gradient equals the linear operator") {
  const double eps = 0.5, kappa = 0.2;
  const int N = 5, d = 2;
  const LatticeModel lm = LatticeModel::free(d, eps, N, kappa);
  Rng rng = Rng::stream(5, StreamDomain::kTest, 24);
  const PathConfig x = random_config(lm, rng);
  const Eigen::MatrixXd op =
      kron_identity(-laplacian0(N) / eps, d) + kappa * eps * Eigen::MatrixXd::Identity(2 * N * d, 2 * N * d);
  const Eigen::VectorXd expect = op * x.movable_vector();
  const Eigen::VectorXd got = lm.grad(x).movable_vector();
  CHECK((expect - got).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy is invariant under time reflection") {
  const LatticeModel& lm = small_interacting();
  Rng rng = Rng::stream(6, StreamDomain::kTest, 25);
  const PathConfig x = random_config(lm, rng);
  PathConfig r = lm.zero_config();
  for (int i = -lm.n(); i <= lm.n(); ++i)
    for (int a = 0; a < lm.dim(); ++a) r.at(i, a) = x.at(-i, a);
  CHECK(lm.energy(r) == doctest::Approx(lm.energy(x)).epsilon(1e-12));
}

TEST_CASE("truncation bound covers the change from a longer horizon") {
  const auto sd = test_density(0.7);
  const double eps = 0.5;
  const int N = 8;
  const LatticeModel shortm = LatticeModel::build(sd, eps, N, 0.0, 1.0, 30.0, 601);
  const LatticeModel longm = LatticeModel::build(sd, eps, N, 0.0, 8.0, 30.0, 601);
  CHECK(shortm.lags() == 2);
  CHECK(longm.lags() == 16);
  const double tail = envelope_tail(sd, eps * shortm.lags());
  CHECK(shortm.truncation_bound() == doctest::Approx(eps * (2 * N + 1) * tail));
  CHECK(shortm.truncation_bound() <= eps * eps * (2 * N + 1) * (2 * N + 1) * tail);
  CHECK(longm.truncation_bound() < shortm.truncation_bound());
  Rng rng = Rng::stream(7, StreamDomain::kTest, 26);
  for (int trial = 0; trial < 20; ++trial) {
    PathConfig xs = random_config(shortm, rng, 1.0 + trial * 0.2);
    CHECK(std::abs(longm.energy(xs) - shortm.energy(xs)) <= shortm.truncation_bound());
  }
}

TEST_CASE("laplacian with pinned origin") {
  Eigen::MatrixXd expect(4, 4);
  expect << -1, 1, 0, 0,
             1, -2, 0, 0,
             0, 0, -2, 1,
             0, 0, 1, -1;
  CHECK(laplacian0(2) == expect);
  const Eigen::MatrixXd L = laplacian0(7);
  CHECK((L - L.transpose()).norm() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(-L);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  const Eigen::VectorXd rows = L.rowwise().sum();
  for (int k = 0; k < rows.size(); ++k) {
    const bool next_to_origin = (k == 6 || k == 7);
    if (next_to_origin) CHECK(rows(k) == -1.0);
    else CHECK(rows(k) == 0.0);
  }
}

TEST_CASE("M without interaction") {
  const double eps = 0.25, kappa = 0.5;
  const int N = 4, d = 3;
  const LatticeModel lm = LatticeModel::free(d, eps, N, kappa);
  const Eigen::MatrixXd M = assemble_M(lm, nullptr);
  const Eigen::MatrixXd expect =
      kron_identity(-laplacian0(N) / eps, d) + kappa * eps * Eigen::MatrixXd::Identity(2 * N * d, 2 * N * d);
  CHECK(M == expect);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("frozen hessian table at rest matches the kernel") {
  const auto sd = test_density(0.7);
  const LatticeModel& lm = small_interacting();
  const PairHessianTable t = PairHessianTable::frozen(lm, lm.zero_config());
  const std::vector<double> zero(3, 0.0);
  for (int m = 1; m <= lm.lags(); ++m) {
    for (int i : {-lm.n(), -1, 0, 2}) {
      if (i + m > lm.n()) continue;
      CHECK((t.block(i, m) - hessian_w(sd, zero, lm.eps() * m)).norm() < 1e-10);
    }
  }
}

TEST_CASE("M on a frozen configuration is the hessian of the energy") {
  const LatticeModel lm = LatticeModel::build(test_density(0.7), 0.5, 4, 0.3, 2.0, 30.0, 601);
  Rng rng = Rng::stream(8, StreamDomain::kTest, 27);
  const PathConfig x = random_config(lm, rng, 0.6);
  const PairHessianTable t = PairHessianTable::frozen(lm, x);
  const Eigen::MatrixXd M = assemble_M(lm, &t);
  const int n = 2 * lm.n() * lm.dim();
  const Eigen::VectorXd v0 = x.movable_vector();
  Eigen::MatrixXd H(n, n);
  const double h = 1e-4;
  auto e = [&](const Eigen::VectorXd& v) {
    PathConfig y = x;
    y.set_movable(v);
    return lm.energy(y);
  };
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      Eigen::VectorXd pp = v0, pm = v0, mp = v0, mm = v0;
      pp(p) += h; pp(q) += h;
      pm(p) += h; pm(q) -= h;
      mp(p) -= h; mp(q) += h;
      mm(p) -= h; mm(q) -= h;
      H(p, q) = (e(pp) - e(pm) - e(mp) + e(mm)) / (4 * h * h);
    }
  }
  CHECK((M - H).cwiseAbs().maxCoeff() < 1e-4);
  CHECK((M - M.transpose()).norm() < 1e-12);
}
