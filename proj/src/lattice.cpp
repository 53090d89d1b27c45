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


#include "pathgibbs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathgibbs {
namespace {

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double v = a[k] - b[k];
    s += v * v;
  }
  return std::sqrt(s);
}

double dist2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double v = a[k] - b[k];
    s += v * v;
  }
  return s;
}

double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

}  // namespace

PathConfig::PathConfig(int d, int N, double eps) : d_(d), n_(N), eps_(eps) {
  if (d < 1 || d > 3) throw std::invalid_argument("PathConfig: d must be 1, 2 or 3");
  if (N < 1) throw std::invalid_argument("PathConfig: N must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("PathConfig: eps must be positive");
  data_.assign(static_cast<std::size_t>((2 * N + 1) * d), 0.0);
}

Eigen::VectorXd PathConfig::movable_vector() const {
  Eigen::VectorXd v(2 * n_ * d_);
  for (int i = -n_; i <= n_; ++i) {
    if (i == 0) continue;
    for (int a = 0; a < d_; ++a) v(movable_index(i, n_) * d_ + a) = at(i, a);
  }
  return v;
}

void PathConfig::set_movable(const Eigen::VectorXd& v) {
  if (v.size() != 2 * n_ * d_) throw std::invalid_argument("set_movable: size mismatch");
  for (int i = -n_; i <= n_; ++i) {
    if (i == 0) continue;
    for (int a = 0; a < d_; ++a) at(i, a) = v(movable_index(i, n_) * d_ + a);
  }
}

bool PathConfig::pinned() const {
  for (int a = 0; a < d_; ++a) {
    if (at(0, a) != 0.0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

LatticeModel::LatticeModel(int d, double eps, int N, double kappa)
    : d_(d), eps_(eps), n_(N), kappa_(kappa) {
  if (d < 1 || d > 3) throw std::invalid_argument("lattice: d must be 1, 2 or 3");
  if (!(eps > 0.0)) throw std::invalid_argument("lattice: eps must be positive");
  if (N < 1) throw std::invalid_argument("lattice: N must be positive");
  if (!(kappa >= 0.0)) throw std::invalid_argument("lattice: kappa must be nonnegative");
}

LatticeModel LatticeModel::free(int d, double eps, int N, double kappa) {
  return LatticeModel(d, eps, N, kappa);
}

LatticeModel::LatticeModel(std::shared_ptr<const PairKernel> kernel, double eps, int N,
                           double kappa, double t_cut)
    : LatticeModel(kernel ? kernel->source().dim() : 1, eps, N, kappa) {
  if (!kernel) throw std::invalid_argument("lattice: null kernel");
  attach(std::move(kernel), t_cut);
}

static int lag_count(double t_cut, double eps, int N) {
  const double ratio = t_cut / eps;
  int j = static_cast<int>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  return std::clamp(j, 1, 2 * N);
}

LatticeModel LatticeModel::build(const SpectralDensity& sd, double eps, int N, double kappa,
                                 double t_cut, double r_max, std::size_t n_r) {
  LatticeModel lm(sd.dim(), eps, N, kappa);
  if (!(t_cut > 0.0)) throw std::invalid_argument("lattice: t_cut must be positive");
  if (sd.is_zero()) {
    lm.t_cut_ = t_cut;
    return lm;
  }
  const int J = lag_count(t_cut, eps, N);
  std::vector<double> t_grid(static_cast<std::size_t>(std::max(J, 3) + 1));
  for (std::size_t m = 0; m < t_grid.size(); ++m) t_grid[m] = eps * static_cast<double>(m);
  auto kernel = std::make_shared<const PairKernel>(
      PairKernel::tabulate(sd, linspace(0.0, r_max, n_r), std::move(t_grid), eps * J));
  lm.attach(std::move(kernel), t_cut);
  return lm;
}

void LatticeModel::attach(std::shared_ptr<const PairKernel> kernel, double t_cut) {
  if (!(t_cut > 0.0)) throw std::invalid_argument("lattice: t_cut must be positive");
  t_cut_ = t_cut;
  if (kernel->source().is_zero()) return;
  const int J = lag_count(t_cut, eps_, n_);
  const auto& tg = kernel->t_grid();
  for (int m = 0; m <= J; ++m) {
    const double want = eps_ * m;
    if (static_cast<std::size_t>(m) >= tg.size() ||
        std::abs(tg[m] - want) > 1e-12 * std::max(1.0, want)) {
      throw std::invalid_argument("lattice: kernel time grid must contain eps*m for m = 0.." +
                                  std::to_string(J));
    }
  }
  kernel_ = std::move(kernel);
  j_ = J;
  slices_.clear();
  for (int m = 0; m <= J; ++m) slices_.push_back(kernel_->slice(static_cast<std::size_t>(m)));
  truncation_bound_ = eps_ * (2.0 * n_ + 1.0) * envelope_tail(kernel_->source(), eps_ * J);
}

double LatticeModel::pair_w(double r, int m) const { return slices_[m].w(r); }

void LatticeModel::pair_w_slope(double r, int m, double& w, double& slope) const {
  slices_[m].w_and_slope(r, w, slope);
}

Eigen::MatrixXd LatticeModel::pair_hessian(std::span<const double> y, int m) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d_, d_);
  if (m > j_ || !interacting()) return h;
  const double r = std::sqrt(norm2(y));
  double a = 0.0, b = 0.0;
  slices_[m].hessian_coefficients(r, a, b);
  h.diagonal().setConstant(a);
  if (r > 0.0) {
    Eigen::Map<const Eigen::VectorXd> yv(y.data(), d_);
    h += (b / (r * r)) * yv * yv.transpose();
  }
  return h;
}

void LatticeModel::check(const PathConfig& x) const {
  if (x.dim() != d_ || x.n() != n_ || x.eps() != eps_) {
    throw std::invalid_argument("configuration does not match the lattice model");
  }
}

EnergyParts LatticeModel::energy_parts(const PathConfig& x) const {
  check(x);
  EnergyParts e;
  for (int j = -n_; j < n_; ++j) e.kinetic += dist2(x.site(j + 1), x.site(j));
  e.kinetic /= 2.0 * eps_;
  for (int j = -n_; j <= n_; ++j) e.mass += norm2(x.site(j));
  e.mass *= 0.5 * kappa_ * eps_;
  if (interacting()) {
    double acc = (2.0 * n_ + 1.0) * pair_w(0.0, 0);
    for (int m = 1; m <= j_; ++m) {
      double lag = 0.0;
      for (int i = -n_; i + m <= n_; ++i) lag += pair_w(dist(x.site(i + m), x.site(i)), m);
      acc += 2.0 * lag;
    }
    e.pair = 0.5 * eps_ * eps_ * acc;
  }
  return e;
}

double LatticeModel::delta_energy(const PathConfig& x, int site, std::span<const double> y) const {
  if (site == 0) throw std::invalid_argument("delta_energy: site 0 is pinned");
  if (site < -n_ || site > n_) throw std::out_of_range("delta_energy: site out of range");
  if (static_cast<int>(y.size()) != d_) throw std::invalid_argument("delta_energy: bad proposal");
  const auto old = x.site(site);
  double kin = 0.0;
  for (int nb : {site - 1, site + 1}) {
    if (nb < -n_ || nb > n_) continue;
    kin += dist2(y, x.site(nb)) - dist2(old, x.site(nb));
  }
  double de = kin / (2.0 * eps_) + 0.5 * kappa_ * eps_ * (norm2(y) - norm2(old));
  if (interacting()) {
    double pair = 0.0;
    for (int m = 1; m <= j_; ++m) {
      for (int j : {site - m, site + m}) {
        if (j < -n_ || j > n_) continue;
        pair += pair_w(dist(y, x.site(j)), m) - pair_w(dist(old, x.site(j)), m);
      }
    }
    de += eps_ * eps_ * pair;
  }
  return de;
}

EnergyParts LatticeModel::block_delta(const PathConfig& x, int first, int len,
                                      std::span<const double> values) const {
  check(x);
  const int last = first + len - 1;
  if (len < 1 || first < -n_ || last > n_ || (first <= 0 && last >= 0)) {
    throw std::invalid_argument("block_delta: block must be a nonempty range on one side of 0");
  }
  if (values.size() != static_cast<std::size_t>(len * d_)) {
    throw std::invalid_argument("block_delta: wrong number of values");
  }
  auto nv = [&](int i) { return values.subspan(static_cast<std::size_t>((i - first) * d_), d_); };
  auto in_block = [&](int i) { return i >= first && i <= last; };
  auto val = [&](int i) { return in_block(i) ? nv(i) : x.site(i); };

  EnergyParts e;
  for (int j = std::max(first - 1, -n_); j <= std::min(last, n_ - 1); ++j) {
    e.kinetic += dist2(val(j + 1), val(j)) - dist2(x.site(j + 1), x.site(j));
  }
  e.kinetic /= 2.0 * eps_;
  for (int i = first; i <= last; ++i) e.mass += norm2(nv(i)) - norm2(x.site(i));
  e.mass *= 0.5 * kappa_ * eps_;
  if (interacting()) {
    double acc = 0.0;
    for (int i = first; i <= last; ++i) {
      for (int m = 1; m <= j_; ++m) {
        // Pairs inside the block are visited once, from their left member.
        for (int j : {i - m, i + m}) {
          if (j < -n_ || j > n_) continue;
          if (in_block(j) && j < i) continue;
          acc += pair_w(dist(nv(i), val(j)), m) - pair_w(dist(x.site(i), x.site(j)), m);
        }
      }
    }
    e.pair = eps_ * eps_ * acc;
  }
  return e;
}

PathConfig LatticeModel::grad(const PathConfig& x) const {
  check(x);
  PathConfig g(d_, n_, eps_);
  for (int i = -n_; i <= n_; ++i) {
    if (i == 0) continue;
    auto gi = g.site(i);
    const auto xi = x.site(i);
    for (int nb : {i - 1, i + 1}) {
      if (nb < -n_ || nb > n_) continue;
      const auto xn = x.site(nb);
      for (int a = 0; a < d_; ++a) gi[a] += (xi[a] - xn[a]) / eps_;
    }
    for (int a = 0; a < d_; ++a) gi[a] += kappa_ * eps_ * xi[a];
    if (!interacting()) continue;
    for (int m = 1; m <= j_; ++m) {
      for (int j : {i - m, i + m}) {
        if (j < -n_ || j > n_) continue;
        const auto xj = x.site(j);
        const double r = dist(xi, xj);
        if (r == 0.0) continue;
        double w = 0.0, slope = 0.0;
        pair_w_slope(r, m, w, slope);
        for (int a = 0; a < d_; ++a) gi[a] += eps_ * eps_ * slope * (xi[a] - xj[a]) / r;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

Eigen::MatrixXd laplacian0(int N) {
  if (N < 1) throw std::invalid_argument("laplacian0: N must be positive");
  const int n = 2 * N;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = -N; i <= N; ++i) {
    if (i == 0) continue;
    const int p = movable_index(i, N);
    for (int nb : {i - 1, i + 1}) {
      if (nb < -N || nb > N) continue;
      L(p, p) -= 1.0;
      if (nb != 0) L(p, movable_index(nb, N)) += 1.0;
    }
  }
  return L;
}

PairHessianTable::PairHessianTable(int d, int N, int J) : d_(d), n_(N), j_(J) {
  if (J < 0 || J > 2 * N) throw std::invalid_argument("PairHessianTable: bad lag count");
  std::size_t count = 0;
  for (int m = 1; m <= J; ++m) count += static_cast<std::size_t>(2 * N + 1 - m);
  sum_.assign(count * static_cast<std::size_t>(d * d), 0.0);
}

std::size_t PairHessianTable::index(int i, int m) const {
  // Lag-major: lag m holds sites -N..N-m.
  std::size_t base = 0;
  for (int k = 1; k < m; ++k) base += static_cast<std::size_t>(2 * n_ + 1 - k);
  return (base + static_cast<std::size_t>(i + n_)) * static_cast<std::size_t>(d_ * d_);
}

PairHessianTable PairHessianTable::frozen(const LatticeModel& lm, const PathConfig& x) {
  PairHessianTable t(lm.dim(), lm.n(), lm.lags());
  t.accumulate(lm, x);
  return t;
}

void PairHessianTable::accumulate(const LatticeModel& lm, const PathConfig& x) {
  lm.check(x);
  if (lm.lags() != j_) throw std::invalid_argument("PairHessianTable: lag count mismatch");
  std::vector<double> y(static_cast<std::size_t>(d_));
  for (int m = 1; m <= j_; ++m) {
    double* out = sum_.data() + index(-n_, m);
    for (int i = -n_; i + m <= n_; ++i) {
      for (int a = 0; a < d_; ++a) y[a] = x.at(i + m, a) - x.at(i, a);
      const Eigen::MatrixXd h = lm.pair_hessian(y, m);
      for (int a = 0; a < d_; ++a)
        for (int b = 0; b < d_; ++b) *out++ += h(a, b);
    }
  }
  ++samples_;
}

void PairHessianTable::merge(const PairHessianTable& other) {
  if (other.d_ != d_ || other.n_ != n_ || other.j_ != j_) {
    throw std::invalid_argument("PairHessianTable::merge: shape mismatch");
  }
  for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += other.sum_[k];
  samples_ += other.samples_;
}

Eigen::MatrixXd PairHessianTable::block(int i, int m) const {
  if (m < 1 || m > j_ || i < -n_ || i + m > n_) throw std::out_of_range("PairHessianTable::block");
  Eigen::MatrixXd h(d_, d_);
  if (samples_ == 0) return Eigen::MatrixXd::Zero(d_, d_);
  const double* p = sum_.data() + index(i, m);
  for (int a = 0; a < d_; ++a)
    for (int b = 0; b < d_; ++b) h(a, b) = p[a * d_ + b] / static_cast<double>(samples_);
  return h;
}

Eigen::MatrixXd assemble_M(const LatticeModel& lm, const PairHessianTable* hessian_avg,
                           double sym_tol) {
  const int N = lm.n(), d = lm.dim();
  const double eps = lm.eps();
  const int n = 2 * N * d;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd lap = laplacian0(N);
  for (int p = 0; p < 2 * N; ++p)
    for (int q = 0; q < 2 * N; ++q) {
      if (lap(p, q) == 0.0) continue;
      for (int a = 0; a < d; ++a) M(p * d + a, q * d + a) = -lap(p, q) / eps;
    }
  M.diagonal().array() += lm.kappa() * eps;
  if (!hessian_avg || hessian_avg->lags() == 0) return M;
  const PairHessianTable& K = *hessian_avg;
  if (K.dim() != d || K.n() != N) throw std::invalid_argument("assemble_M: table shape mismatch");
  const double e2 = eps * eps;
  for (int m = 1; m <= K.lags(); ++m) {
    for (int i = -N; i + m <= N; ++i) {
      const int j = i + m;
      const Eigen::MatrixXd b = K.block(i, m);
      const double asym = (b - b.transpose()).cwiseAbs().maxCoeff();
      if (asym > sym_tol * std::max(1.0, b.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("assemble_M: asymmetric Hessian block at sites " +
                                    std::to_string(i) + "," + std::to_string(j));
      }
      const Eigen::MatrixXd s = 0.5 * (b + b.transpose());
      if (i != 0) {
        const int p = movable_index(i, N) * d;
        M.block(p, p, d, d) += e2 * s;
      }
      if (j != 0) {
        const int q = movable_index(j, N) * d;
        M.block(q, q, d, d) += e2 * s;
      }
      if (i != 0 && j != 0) {
        const int p = movable_index(i, N) * d, q = movable_index(j, N) * d;
        M.block(p, q, d, d) -= e2 * s;
        M.block(q, p, d, d) -= e2 * s;
      }
    }
  }
  return M;
}

}  // namespace pathgibbs
