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
#include <optional>
#include <span>
#include <vector>

#include "pathgibbs/kernel.hpp"

namespace pathgibbs {

/// Lattice path x_{-N..N} in R^d with x_0 = 0. Site 0 is stored but is never a
/// degree of freedom.
class PathConfig {
 public:
  PathConfig(int d, int N, double eps);

  int dim() const { return d_; }
  int n() const { return n_; }
  double eps() const { return eps_; }
  /// Number of movable sites, 2N.
  int movable() const { return 2 * n_; }

  std::span<double> site(int i) { return {data_.data() + offset(i), static_cast<std::size_t>(d_)}; }
  std::span<const double> site(int i) const {
    return {data_.data() + offset(i), static_cast<std::size_t>(d_)};
  }
  double& at(int i, int a) { return data_[offset(i) + a]; }
  double at(int i, int a) const { return data_[offset(i) + a]; }

  /// All sites -N..N, row-major.
  std::span<const double> raw() const { return data_; }
  std::span<double> raw() { return data_; }

  /// Movable coordinates in the order -N..-1, 1..N (site-major, then axis).
  Eigen::VectorXd movable_vector() const;
  void set_movable(const Eigen::VectorXd& v);

  bool pinned() const;

 private:
  std::size_t offset(int i) const { return static_cast<std::size_t>((i + n_) * d_); }

  int d_;
  int n_;
  double eps_;
  std::vector<double> data_;
};

/// Index of movable site i (i != 0) in the order -N..-1, 1..N.
inline int movable_index(int i, int N) { return i < 0 ? i + N : i + N - 1; }

struct EnergyParts {
  double kinetic = 0.0;
  double mass = 0.0;
  double pair = 0.0;
  double total() const { return kinetic + mass + pair; }
};

/// Lattice Gibbs energy
///   H = 1/(2 eps) sum |x_{j+1} - x_j|^2 + kappa eps / 2 sum |x_j|^2
///     + eps^2 / 2 sum_{|i-j| <= J} W(x_i - x_j, eps (i - j)).
/// The pair kernel is evaluated through radial slices tabulated exactly at the
/// lattice lags eps m, m = 0..J, so no interpolation in time is needed.
class LatticeModel {
 public:
  /// Non-interacting model.
  static LatticeModel free(int d, double eps, int N, double kappa);

  /// Tabulates the kernel at the lattice lags on the radial grid
  /// linspace(0, r_max, n_r). J = min(ceil(t_cut / eps), 2N).
  static LatticeModel build(const SpectralDensity& sd, double eps, int N, double kappa,
                            double t_cut, double r_max, std::size_t n_r);

  /// Uses a prebuilt kernel whose time grid contains eps m for m = 0..J.
  LatticeModel(std::shared_ptr<const PairKernel> kernel, double eps, int N, double kappa,
               double t_cut);

  int dim() const { return d_; }
  int n() const { return n_; }
  double eps() const { return eps_; }
  double kappa() const { return kappa_; }
  double t_cut() const { return t_cut_; }
  double horizon() const { return eps_ * n_; }
  /// Number of interacting lags; 0 for the free model.
  int lags() const { return j_; }
  bool interacting() const { return j_ > 0; }
  const PairKernel* kernel() const { return kernel_.get(); }

  /// Upper bound on |H_full - H_truncated|: eps (2N+1) int_{eps J}^inf gamma.
  double truncation_bound() const { return truncation_bound_; }

  PathConfig zero_config() const { return PathConfig(d_, n_, eps_); }

  /// W(r, eps m) for 0 <= m <= J.
  double pair_w(double r, int m) const;
  /// W and dW/dr at lag m.
  void pair_w_slope(double r, int m, double& w, double& slope) const;
  /// d_a d_b W(y, eps m) for 0 <= m <= J.
  Eigen::MatrixXd pair_hessian(std::span<const double> y, int m) const;

  EnergyParts energy_parts(const PathConfig& x) const;
  double energy(const PathConfig& x) const { return energy_parts(x).total(); }

  /// H(x') - H(x) where x' moves one site. Throws for site 0.
  double delta_energy(const PathConfig& x, int site, std::span<const double> proposal) const;

  /// Energy change when the contiguous block of sites first..first+len-1
  /// (all on one side of 0) is replaced by `values` (len * d numbers).
  EnergyParts block_delta(const PathConfig& x, int first, int len,
                          std::span<const double> values) const;

  /// dH/dx for every site; the entry for site 0 is zero.
  PathConfig grad(const PathConfig& x) const;

  void check(const PathConfig& x) const;

 private:
  LatticeModel(int d, double eps, int N, double kappa);
  void attach(std::shared_ptr<const PairKernel> kernel, double t_cut);

  int d_;
  double eps_;
  int n_;
  double kappa_;
  double t_cut_ = 0.0;
  int j_ = 0;
  double truncation_bound_ = 0.0;
  std::shared_ptr<const PairKernel> kernel_;
  std::vector<RadialSlice> slices_;
};

/// Per-component second-difference matrix on sites -N..-1, 1..N: Dirichlet at
/// 0 (the neighbours of site 0 see a fixed zero), Neumann at +-N.
Eigen::MatrixXd laplacian0(int N);

/// Hessian blocks K(i, i+m) = <d_a d_b W(x_{i+m} - x_i, eps m)> for every site
/// i in -N..N (site 0 included) and lag 1 <= m <= J with i+m <= N.
class PairHessianTable {
 public:
  PairHessianTable(int d, int N, int J);

  /// Blocks evaluated on a single configuration.
  static PairHessianTable frozen(const LatticeModel& lm, const PathConfig& x);

  int dim() const { return d_; }
  int n() const { return n_; }
  int lags() const { return j_; }

  /// Adds the blocks of configuration x to the running sum.
  void accumulate(const LatticeModel& lm, const PathConfig& x);
  /// Sum-merge of another table's running sum.
  void merge(const PairHessianTable& other);
  std::size_t samples() const { return samples_; }

  /// Averaged block for the pair (i, i+m); zero if no samples.
  Eigen::MatrixXd block(int i, int m) const;

 private:
  std::size_t index(int i, int m) const;

  int d_;
  int n_;
  int j_;
  std::size_t samples_ = 0;
  std::vector<double> sum_;
};

/// M = -eps^{-1} Lap0 (x) Id + kappa eps Id + eps^2 (diag_i sum_{n != i} K_in - K_ij)
/// over the movable sites, with the pair-sum on the diagonal running over all
/// sites including 0. Throws if a block is asymmetric beyond `sym_tol`.
Eigen::MatrixXd assemble_M(const LatticeModel& lm, const PairHessianTable* hessian_avg,
                           double sym_tol = 1e-9);

}  // namespace pathgibbs
