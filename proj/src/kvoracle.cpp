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


#include "pathgibbs/kvoracle.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <string>

#include "pathgibbs/rng.hpp"

namespace pathgibbs {
namespace {

bool irreducible(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j) {
      if (j != i && Q(i, j) > 0.0 && !seen[j]) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
    }
  }
  return count == n;
}

struct Trajectory {
  double x_half = 0.0;
  int y_half = 0;
  double x_final = 0.0;
  int y0 = 0;
  int y_final = 0;
};

int draw_state(const Eigen::VectorXd& p, Rng& rng) {
  double u = rng.uniform() * p.sum();
  for (int i = 0; i < p.size(); ++i) {
    u -= p(i);
    if (u <= 0.0) return i;
  }
  return static_cast<int>(p.size()) - 1;
}

Trajectory simulate_one(const ReversibleChain& c, double t_final, Rng& rng) {
  const Eigen::MatrixXd& Q = c.Q();
  const Eigen::VectorXd& V = c.V();
  Trajectory tr;
  int y = draw_state(c.pi(), rng);
  tr.y0 = y;
  double t = 0.0, x = 0.0;
  const double t_half = 0.5 * t_final;
  bool half_done = false;
  while (true) {
    const double rate = -Q(y, y);
    const double hold = rate > 0.0 ? rng.exponential() / rate : t_final - t + 1.0;
    if (!half_done && t + hold >= t_half) {
      tr.x_half = x + V(y) * (t_half - t);
      tr.y_half = y;
      half_done = true;
    }
    if (t + hold >= t_final) {
      x += V(y) * (t_final - t);
      break;
    }
    x += V(y) * hold;
    t += hold;
    double u = rng.uniform() * rate;
    int next = y;
    for (int j = 0; j < Q.cols(); ++j) {
      if (j == y) continue;
      u -= Q(y, j);
      next = j;
      if (u <= 0.0) break;
    }
    y = next;
  }
  tr.x_final = x;
  tr.y_final = y;
  return tr;
}

}  // namespace

Eigen::VectorXd stationary(const Eigen::MatrixXd& Q) {
  const int n = static_cast<int>(Q.rows());
  Eigen::MatrixXd A(n + 1, n);
  A.topRows(n) = Q.transpose();
  A.row(n).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  return A.colPivHouseholderQr().solve(rhs);
}

ReversibleChain::ReversibleChain(Eigen::MatrixXd Q, Eigen::VectorXd V, double tol)
    : q_(std::move(Q)), v_(std::move(V)) {
  const int n = static_cast<int>(q_.rows());
  if (n < 1 || q_.cols() != n || v_.size() != n) {
    throw std::invalid_argument("chain: Q must be square and V must match its size");
  }
  const double scale = std::max(1.0, q_.cwiseAbs().maxCoeff());
  for (int i = 0; i < n; ++i) {
    if (std::abs(q_.row(i).sum()) > tol * scale) throw std::invalid_argument("chain: rows of Q must sum to 0");
    for (int j = 0; j < n; ++j) {
      if (i != j && q_(i, j) < 0.0) throw std::invalid_argument("chain: negative off-diagonal rate");
    }
  }
  if (!irreducible(q_)) throw std::invalid_argument("chain: not irreducible");
  pi_ = stationary(q_);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (std::abs(pi_(i) * q_(i, j) - pi_(j) * q_(j, i)) > tol * scale) {
        throw std::invalid_argument("chain: detailed balance fails at (" + std::to_string(i) +
                                    "," + std::to_string(j) + ")");
      }
    }
  const double vs = std::max(1.0, v_.cwiseAbs().maxCoeff());
  if (std::abs(pi_.dot(v_)) > tol * vs) throw std::invalid_argument("chain: V is not centred under pi");
}

ReversibleChain ReversibleChain::random(int n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random chain needs n >= 2");
  Rng rng = Rng::stream(seed, StreamDomain::kTest, 7);
  Eigen::VectorXd m(n);
  for (int i = 0; i < n; ++i) m(i) = 0.2 + rng.uniform();
  const Eigen::VectorXd pi = m / m.sum();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double w = 0.1 + rng.uniform();
      Q(i, j) = w / pi(i);
      Q(j, i) = w / pi(j);
    }
  for (int i = 0; i < n; ++i) Q(i, i) = -Q.row(i).sum();
  Eigen::VectorXd V(n);
  for (int i = 0; i < n; ++i) V(i) = rng.normal();
  V.array() -= pi.dot(V);
  return ReversibleChain(Q, V);
}

ReversibleChain ReversibleChain::parse(std::istream& in) {
  int n = 0;
  if (!(in >> n) || n < 1) throw std::invalid_argument("chain file: expected a positive state count");
  Eigen::MatrixXd Q(n, n);
  Eigen::VectorXd V(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!(in >> Q(i, j))) throw std::invalid_argument("chain file: truncated rate matrix");
  for (int i = 0; i < n; ++i)
    if (!(in >> V(i))) throw std::invalid_argument("chain file: truncated observable");
  return ReversibleChain(Q, V, 1e-9);
}

Eigen::VectorXd poisson_solution(const ReversibleChain& c) {
  const int n = c.n();
  // (-Q + 1 pi^T) u = V has the unique solution with pi.u = 0 when pi.V = 0.
  Eigen::MatrixXd A = -c.Q() + Eigen::VectorXd::Ones(n) * c.pi().transpose();
  Eigen::VectorXd u = A.partialPivLu().solve(c.V());
  u.array() -= c.pi().dot(u);
  return u;
}

double kv_sigma2(const ReversibleChain& c) {
  const Eigen::VectorXd u = poisson_solution(c);
  return std::max(0.0, 2.0 * c.pi().dot(c.V().cwiseProduct(u)));
}

AdditiveSamples simulate_additive(const ReversibleChain& c, double t_final, std::size_t n_traj,
                                  std::uint64_t seed) {
  if (!(t_final > 0.0) || n_traj < 2) throw std::invalid_argument("simulate_additive: bad arguments");
  AdditiveSamples s;
  s.t_final = t_final;
  s.x.resize(n_traj);
  for (std::size_t k = 0; k < n_traj; ++k) {
    Rng rng = Rng::stream(seed, StreamDomain::kKvTrajectory, k);
    s.x[k] = simulate_one(c, t_final, rng).x_final;
  }
  double m = 0.0;
  for (double v : s.x) m += v;
  m /= static_cast<double>(n_traj);
  double ss = 0.0;
  for (double v : s.x) ss += (v - m) * (v - m);
  s.variance_over_t = ss / static_cast<double>(n_traj - 1) / t_final;
  return s;
}

MartingaleReport martingale_residual(const ReversibleChain& c, double t_final, std::size_t n_traj,
                                     std::uint64_t seed) {
  if (!(t_final > 0.0) || n_traj < 2) throw std::invalid_argument("martingale_residual: bad arguments");
  const Eigen::VectorXd u = poisson_solution(c);
  const int n = c.n();
  MartingaleReport r;
  std::vector<double> s(n, 0.0), s2(n, 0.0);
  std::vector<std::size_t> cnt(n, 0);
  double acc = 0.0;
  for (std::size_t k = 0; k < n_traj; ++k) {
    Rng rng = Rng::stream(seed, StreamDomain::kKvTrajectory, k);
    const Trajectory tr = simulate_one(c, t_final, rng);
    const double du = u(tr.y_final) - u(tr.y0);
    acc += du * du;
    // N_t - N_{t/2} = X_t - X_{t/2} + u(y_t) - u(y_{t/2}).
    const double inc = tr.x_final - tr.x_half + u(tr.y_final) - u(tr.y_half);
    s[tr.y_half] += inc;
    s2[tr.y_half] += inc * inc;
    ++cnt[tr.y_half];
  }
  r.residual = acc / static_cast<double>(n_traj) / t_final;
  r.bound = 4.0 * u.cwiseAbs2().maxCoeff() / t_final;
  r.within_bound = r.residual <= r.bound * (1.0 + 1e-12);
  for (int i = 0; i < n; ++i) {
    Estimate e;
    if (cnt[i] >= 2) {
      const double nn = static_cast<double>(cnt[i]);
      e.value = s[i] / nn;
      const double var = std::max(0.0, (s2[i] - nn * e.value * e.value) / (nn - 1.0));
      e.se = std::sqrt(var / nn);
      if (e.se > 0.0) r.max_abs_z = std::max(r.max_abs_z, std::abs(e.value) / e.se);
    }
    r.conditional_increment.push_back(e);
  }
  return r;
}

CltReport clt_check(const ReversibleChain& c, double t_final, std::size_t n_traj, std::uint64_t seed) {
  CltReport r;
  r.sigma2_formula = kv_sigma2(c);
  const double v_var = c.pi().dot(c.V().cwiseAbs2());
  if (v_var == 0.0) {
    r.degenerate = true;
    return r;
  }
  if (!(r.sigma2_formula > 0.0)) throw std::domain_error("clt_check: zero sigma^2 with nonzero V");
  const AdditiveSamples s = simulate_additive(c, t_final, n_traj, seed);
  r.sigma2_empirical = s.variance_over_t;
  r.variance_ratio = r.sigma2_empirical / r.sigma2_formula;
  std::vector<double> z(s.x.size());
  const double rt = std::sqrt(t_final);
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = s.x[k] / rt;
  r.kurtosis = kurtosis_ratio(z, 20);
  return r;
}

}  // namespace pathgibbs
