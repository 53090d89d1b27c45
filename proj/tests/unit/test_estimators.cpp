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
#include <limits>
#include <stdexcept>
#include <vector>

#include "fixtures.hpp"
#include "pathgibbs/estimators.hpp"
#include "pathgibbs/kernel.hpp"
#include "pathgibbs/lattice.hpp"
#include "pathgibbs/sampler.hpp"

using namespace pathgibbs;
using pathgibbs::testing::test_density;

namespace {

MsdCurve synthetic_curve(int N, double eps, const std::function<double(double)>& c) {
  MsdCurve curve;
  curve.eps = eps;
  curve.gamma = Eigen::VectorXd::Unit(3, 0);
  for (int j = 0; j <= N; ++j) {
    curve.lags.push_back(eps * j);
    curve.values.push_back(j == 0 ? 0.0 : c(eps * j));
    curve.ses.push_back(0.0);
  }
  return curve;
}

KernelLagTable exp_table(double eps, double t_max, double scale = 1.0) {
  KernelLagTable t;
  t.eps = eps;
  const int J = static_cast<int>(std::lround(t_max / eps));
  for (int j = 0; j <= J; ++j) t.k.push_back(scale * std::exp(-eps * j) * Eigen::MatrixXd::Identity(2, 2));
  return t;
}

struct FreeRun {
  RunResult result;
  Eigen::VectorXd gamma;
};

const FreeRun& free_run() {
  static const FreeRun fr = [] {
    const LatticeModel lm = LatticeModel::free(2, 0.25, 32, 0.0);
    FreeRun f;
    f.gamma = (Eigen::VectorXd(2) << 1.0, 0.0).finished();
    static MsdObservable a(32, f.gamma);
    static MsdObservable b(32, 3.0 * f.gamma);
    SamplerConfig cfg;
    cfg.n_chains = 4;
    cfg.threads = 4;
    cfg.n_sweeps = 8000;
    cfg.burn_in = 100;
    cfg.p_site = 0.2;
    cfg.p_bridge = 0.7;
    cfg.p_endpoint = 0.1;
    cfg.bridge_length = 16;
    f.result = run(lm, cfg, {&a, &b});
    return f;
  }();
  return fr;
}

}  // namespace

TEST_CASE("msd observable layout") {
  PathConfig x(2, 2, 0.5);
  x.at(1, 0) = 1.0;
  x.at(-1, 0) = -2.0;
  x.at(2, 1) = 5.0;
  const Eigen::VectorXd g = (Eigen::VectorXd(2) << 1.0, 1.0).finished();
  MsdObservable obs(2, g);
  std::vector<double> out(obs.size());
  obs.measure(x, out);
  CHECK(out[0] == doctest::Approx(2.5));
  CHECK(out[1] == 1.0);
  CHECK(out[2] == 4.0);
  CHECK(out[3] == doctest::Approx(8.5));
  CHECK(out[4] == doctest::Approx(12.5));
}

TEST_CASE("msd curve from a free run") {
  const FreeRun& fr = free_run();
  const MsdCurve c = msd(fr.result.series[0], fr.gamma, 0.25);
  const MsdCurve c3 = msd(fr.result.series[1], 3.0 * fr.gamma, 0.25);
  CHECK(c.values[0] == 0.0);
  CHECK(c.ses[0] == 0.0);
  CHECK(c.lags.size() == 33u);
  for (int j = 1; j <= 32; ++j) {
    CHECK(c3.values[j] == doctest::Approx(9.0 * c.values[j]).epsilon(1e-12));
    // Time reflection.
    const double se = std::hypot(c.plus_se[j], c.minus_se[j]);
    CHECK(std::abs(c.plus[j] - c.minus[j]) <= 3.5 * se);
    // Exact free variance eps j.
    CHECK(std::abs(c.values[j] - 0.25 * j) <= 3.5 * c.ses[j]);
  }
  CHECK_THROWS(msd(BatchedSeries(8, 1), fr.gamma, 0.25));
}

TEST_CASE("free fit recovers unit diffusion") {
  const FreeRun& fr = free_run();
  const MsdCurve c = msd(fr.result.series[0], fr.gamma, 0.25);
  const DiffusionFit f = fit_D(c, {1.6, 4.0});
  CHECK(f.D.se > 0.0);
  CHECK(std::abs(f.D.value - 1.0) <= 3.0 * f.D.se);
  // Fits on gamma and 3 gamma agree after normalization.
  const DiffusionFit f3 = fit_D(msd(fr.result.series[1], 3.0 * fr.gamma, 0.25), {1.6, 4.0});
  CHECK(f3.D.value == doctest::Approx(f.D.value).epsilon(1e-12));
}

TEST_CASE("gaussianity") {
  const FreeRun& fr = free_run();
  for (int lag : {1, 8, 32}) {
    const Estimate g = gaussianity(fr.result.series[0], lag);
    CHECK(std::abs(g.value - 1.0) <= 3.0 * g.se);
  }
  // Two-point law: u = +-1 in every frame.
  BatchedSeries s(4, 10);
  for (int b = 0; b < 5; ++b) s.append_batch(std::vector<double>{1.0, 1.0, 1.0, 1.0});
  CHECK(gaussianity(s, 1).value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  BatchedSeries zero(4, 10);
  for (int b = 0; b < 5; ++b) zero.append_batch(std::vector<double>{0.0, 0.0, 0.0, 0.0});
  CHECK_THROWS(gaussianity(zero, 1));
  CHECK_THROWS(gaussianity(s, 2));
}

TEST_CASE("fit on exact linear data") {
  const MsdCurve c = synthetic_curve(40, 0.25, [](double t) { return 0.7 * t; });
  const DiffusionFit f = fit_D(c, {2.0, 6.0});
  CHECK(std::abs(f.D.value - 0.7) <= 1e-12);
  CHECK(std::abs(f.intercept) <= 1e-12);
  CHECK(f.lag_lo == 8);
  CHECK(f.lag_hi == 24);
  CHECK(f.points == 17);
  CHECK_THROWS_AS(fit_D(c, {3.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_D(c, {0.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_D(c, {2.0, 10.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_D(c, {2.0, 2.3}), std::invalid_argument);
}

TEST_CASE("massive profile") {
  const int N = 64;
  const double eps = 0.5;
  const std::vector<double> free = massive_profile(N, eps, 0.0);
  for (int j = 1; j <= N; ++j) CHECK(free[j - 1] == doctest::Approx(eps * j).epsilon(1e-12));
  // Against a dense inverse.
  const double mu = 0.3;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(N, N);
  for (int i = 0; i < N; ++i) {
    T(i, i) = (i + 1 < N ? 2.0 : 1.0) / eps + mu * eps;
    if (i + 1 < N) T(i, i + 1) = T(i + 1, i) = -1.0 / eps;
  }
  const Eigen::VectorXd diag = T.inverse().diagonal();
  const std::vector<double> prof = massive_profile(N, eps, mu);
  for (int j = 0; j < N; ++j) CHECK(prof[j] == doctest::Approx(diag(j)).epsilon(1e-12));
}

TEST_CASE("massive fit recovers D from exact profiles") {
  const int N = 128;
  const double eps = 0.25, kappa = 0.02;
  for (double D : {0.3, 0.7, 1.0}) {
    const std::vector<double> g = massive_profile(N, eps, kappa * D);
    const MsdCurve c = synthetic_curve(N, eps, [&](double t) {
      return D * g[static_cast<std::size_t>(std::lround(t / eps)) - 1] + 0.1;
    });
    const DiffusionFit f = fit_D(c, {2.0, 16.0}, kappa);
    CHECK(f.D.value == doctest::Approx(D).epsilon(1e-6));
    CHECK(f.intercept == doctest::Approx(0.1).epsilon(1e-5));
  }
}

TEST_CASE("D0 on synthetic kernels") {
  // K(t) = e^{-|t|} I: int |K| = 2, int t^2 |K| = 4, so D0 = 4/2 + 2 * 2 = 6.
  double prev_err = 0.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    const double err = std::abs(compute_D0(exp_table(eps, 40.0)) - 6.0);
    if (prev_err > 0.0) {
      const double order = std::log2(prev_err / err);
      MESSAGE("D0 Riemann order " << order);
      CHECK(order >= 1.0);
    }
    prev_err = err;
  }
  CHECK(compute_D0(exp_table(1e-3, 40.0)) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(compute_D0(exp_table(0.05, 40.0, 2.5)) ==
        doctest::Approx(2.5 * compute_D0(exp_table(0.05, 40.0))).epsilon(1e-12));
  KernelLagTable zero;
  zero.eps = 0.1;
  zero.k.assign(10, Eigen::MatrixXd::Zero(3, 3));
  CHECK(compute_D0(zero) == 0.0);
  CHECK_THROWS_AS(compute_D0(exp_table(0.1, 2.0)), std::domain_error);
  KernelLagTable bad = exp_table(0.1, 40.0);
  bad.k[3](0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(compute_D0(bad), std::domain_error);
}

TEST_CASE("c0") {
  CHECK(lower_bound_c0(0.0) == 1.0);
  CHECK(lower_bound_c0(6.0) == doctest::Approx(1.0 / 7.0));
  CHECK_THROWS(lower_bound_c0(-1.0));
}

TEST_CASE("kernel lag table") {
  const LatticeModel zero = LatticeModel::build(testing::zero_density(), 0.5, 8, 0.0, 2.0, 30.0, 601);
  const KernelLagTable z = estimate_K_frozen(zero, zero.zero_config());
  for (const auto& k : z.k) CHECK(k.norm() == 0.0);

  const auto sd = test_density(0.5);
  const LatticeModel lm = LatticeModel::build(sd, 0.5, 16, 0.0, 3.0, 30.0, 601);
  const KernelLagTable t = estimate_K_frozen(lm, lm.zero_config());
  REQUIRE(t.k.size() == static_cast<std::size_t>(lm.lags() + 1));
  const std::vector<double> origin(3, 0.0);
  for (int m = 0; m <= lm.lags(); ++m) {
    CHECK((t.k[m] - hessian_w(sd, origin, 0.5 * m)).norm() < 1e-10);
  }

  // The same through the observable and a batched series.
  LagHessianObservable obs(lm);
  std::vector<double> frame(obs.size());
  obs.measure(lm.zero_config(), frame);
  BatchedSeries s(obs.size(), 1);
  s.append_batch(frame);
  s.append_batch(frame);
  const KernelLagTable u = estimate_K(lm, s);
  for (int m = 0; m <= lm.lags(); ++m) CHECK((u.k[m] - t.k[m]).norm() < 1e-12);
  CHECK_THROWS(LagHessianObservable(lm, 16));
}

TEST_CASE("quadratic form observable") {
  PathConfig x(1, 2, 1.0);
  Eigen::VectorXd v(4);
  v << 1, 2, 3, 4;
  x.set_movable(v);
  Eigen::VectorXd f(4);
  f << 1, 0, -1, 0.5;
  QuadraticFormObservable q({f});
  std::vector<double> out(1);
  q.measure(x, out);
  CHECK(out[0] == doctest::Approx(0.0));
}

TEST_CASE("brascamp check arithmetic") {
  Eigen::MatrixXd M(2, 2);
  M << 2, 1, 1, 3;
  const Eigen::VectorXd f = Eigen::VectorXd::Ones(2);
  // f^T M^{-1} f = (3 - 1 - 1 + 2) / 5
  const BrascampReport r = brascamp_check({0.6, 0.01}, M, f, 0.0);
  CHECK(r.rhs == doctest::Approx(0.6));
  CHECK(r.ok);
  CHECK_FALSE(brascamp_check({0.5, 0.01}, M, f, 0.0).ok);
  const BrascampReport big = brascamp_check({1e-3, 0.0}, M, f, 1e12);
  CHECK(big.rhs < 1e-11);
  CHECK(big.ok);
  Eigen::MatrixXd S(2, 2);
  S << 1, 1, 1, 1;
  CHECK_THROWS_AS(brascamp_check({1.0, 0.0}, S, f, 0.0), std::domain_error);
}

TEST_CASE("brascamp equality for a gaussian model") {
  const double eps = 0.5, kappa = 0.5;
  const int N = 6;
  const LatticeModel lm = LatticeModel::free(1, eps, N, kappa);
  const Eigen::MatrixXd M = assemble_M(lm, nullptr);
  std::vector<Eigen::VectorXd> fs;
  Rng rng = Rng::stream(3, StreamDomain::kTest, 40);
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd f(2 * N);
    for (int i = 0; i < 2 * N; ++i) f(i) = rng.normal();
    fs.push_back(f);
  }
  QuadraticFormObservable q(fs);
  SamplerConfig cfg;
  cfg.n_chains = 2;
  cfg.threads = 2;
  cfg.n_sweeps = 20000;
  cfg.bridge_length = 3;
  const RunResult r = run(lm, cfg, {&q});
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const BrascampReport b = brascamp_check(r.series[0].estimate(k), M, fs[k], 0.0);
    INFO("lhs " << b.lhs.value << " +- " << b.lhs.se << " rhs " << b.rhs);
    CHECK(std::abs(b.lhs.value - b.rhs) <= 3.0 * b.lhs.se);
    CHECK(b.ok);
  }
}

TEST_CASE("sandwich report") {
  CHECK(sandwich_report({1.0, 0.01}, 0.0).sandwich_ok);
  const BoundReport mid = sandwich_report({0.5, 0.01}, 6.0);
  CHECK(mid.c0 == doctest::Approx(1.0 / 7.0));
  CHECK(mid.sandwich_ok);
  const BoundReport low = sandwich_report({0.1, 0.01}, 6.0);
  CHECK_FALSE(low.lower_ok);
  CHECK(low.upper_ok);
  CHECK_FALSE(low.sandwich_ok);
  CHECK_FALSE(sandwich_report({1.2, 0.01}, 0.0).upper_ok);
}
