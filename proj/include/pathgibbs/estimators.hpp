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
#include <span>
#include <string>
#include <vector>

#include "pathgibbs/lattice.hpp"
#include "pathgibbs/sampler.hpp"
#include "pathgibbs/stats.hpp"

namespace pathgibbs {

/// Per-frame moments of u = gamma . x_{+-j}, j = 1..N. Layout per lag j
/// (offset 4 (j-1)): [(u+^2 + u-^2)/2, u+^2, u-^2, (u+^4 + u-^4)/2].
class MsdObservable : public Observable {
 public:
  MsdObservable(int N, Eigen::VectorXd gamma);
  std::size_t size() const override { return 4 * static_cast<std::size_t>(n_); }
  void measure(const PathConfig& x, std::span<double> out) const override;
  const Eigen::VectorXd& gamma() const { return gamma_; }

 private:
  int n_;
  Eigen::VectorXd gamma_;
};

struct MsdCurve {
  /// t_j = eps j for j = 0..N; entry 0 is exactly zero.
  std::vector<double> lags;
  std::vector<double> values;
  std::vector<double> ses;
  /// The same from +j and -j sites alone.
  std::vector<double> plus, plus_se, minus, minus_se;
  Eigen::VectorXd gamma;
  double eps = 0.0;
  /// Batch means of the symmetric second moment for j = 1..N, kept for
  /// jackknife errors of derived fits.
  BatchedSeries batches;
};

/// Builds the curve from a run's MsdObservable series. Throws on an empty series.
MsdCurve msd(const BatchedSeries& series, const Eigen::VectorXd& gamma, double eps);

/// Diagonal of eps * (L + mu eps^2)^{-1} for the one-sided lattice operator L
/// (Dirichlet at 0, Neumann at N): the per-component variance profile of a free
/// path with unit diffusion and mass mu. Entry j-1 belongs to site j.
std::vector<double> massive_profile(int N, double eps, double mu);

struct FitWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct DiffusionFit {
  Estimate D;
  double intercept = 0.0;
  int lag_lo = 0;
  int lag_hi = 0;
  int points = 0;
};

/// Fits C(t_j)/|gamma|^2 ~ D g_j(kappa D) + b over the lags inside the window,
/// where g is massive_profile; for kappa = 0, g_j = t_j and this is the
/// weighted least-squares slope with intercept. Weights are 1/se^2 (uniform if
/// any se vanishes). The standard error is a delete-one-batch jackknife.
/// Throws std::invalid_argument when the window holds fewer than 3 lags or
/// touches t = 0 or t = T.
DiffusionFit fit_D(const MsdCurve& curve, FitWindow window, double kappa = 0.0);

/// Same fit on bare data, no error estimate.
double fit_D_values(std::span<const double> t, std::span<const double> c,
                    std::span<const double> weights, int N, double eps, double kappa,
                    double* intercept = nullptr);

/// <u^4> / (3 <u^2>^2) at lag j from an MsdObservable series, with jackknife se.
Estimate gaussianity(const BatchedSeries& msd_series, int lag);

/// Translation-averaged Hessian of the pair potential per lag over interior
/// sites [-N + margin, N - margin - m]. Layout: lag-major d x d blocks for
/// m = 1..J.
class LagHessianObservable : public Observable {
 public:
  /// margin < 0 selects max(J, N/4). Throws when the margin exhausts the lattice.
  LagHessianObservable(const LatticeModel& lm, int margin = -1);
  std::size_t size() const override;
  void measure(const PathConfig& x, std::span<double> out) const override;
  int margin() const { return margin_; }

 private:
  const LatticeModel& lm_;
  int margin_;
};

/// K(tau_m) for m = 0..J, symmetric d x d blocks.
struct KernelLagTable {
  double eps = 0.0;
  std::vector<Eigen::MatrixXd> k;
};

/// Averages the observable's series into a table; m = 0 is the exact on-site
/// block d_a d_b W(0, 0). Blocks are symmetrized.
KernelLagTable estimate_K(const LatticeModel& lm, const BatchedSeries& lag_series);
/// Table of a single frozen configuration.
KernelLagTable estimate_K_frozen(const LatticeModel& lm, const PathConfig& x, int margin = -1);

/// D0 = 1/2 sum_{j in Z} eps (eps j)^2 |K_j| + 2 sum_{j in Z} eps |K_j| in the
/// operator norm. Throws std::domain_error when an entry is not finite or the
/// last lag still carries more than `tail_tol` of the largest norm.
double compute_D0(const KernelLagTable& table, double tail_tol = 1e-3);

double lower_bound_c0(double D0);

/// (f . x)^2 for a list of coefficient vectors over the movable coordinates.
class QuadraticFormObservable : public Observable {
 public:
  explicit QuadraticFormObservable(std::vector<Eigen::VectorXd> f);
  std::size_t size() const override { return f_.size(); }
  void measure(const PathConfig& x, std::span<double> out) const override;
  const Eigen::VectorXd& f(std::size_t k) const { return f_[k]; }

 private:
  std::vector<Eigen::VectorXd> f_;
};

struct BrascampReport {
  Estimate lhs;
  double rhs = 0.0;
  double lambda = 0.0;
  bool ok = false;
};

/// rhs = f^T (M + lambda)^{-1} f by Cholesky; ok iff lhs + 3 se >= rhs.
/// Throws std::domain_error when M + lambda is not positive definite.
BrascampReport brascamp_check(const Estimate& lhs, const Eigen::MatrixXd& M,
                              const Eigen::VectorXd& f, double lambda);

struct BoundReport {
  Estimate D_hat;
  double D0 = 0.0;
  double c0 = 1.0;
  bool lower_ok = false;
  bool upper_ok = false;
  bool sandwich_ok = false;
  std::string details;
};

/// c0 - 3 se <= D_hat <= 1 + 3 se.
BoundReport sandwich_report(const Estimate& D_hat, double D0);

}  // namespace pathgibbs
