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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pathgibbs/stats.hpp"

namespace pathgibbs {

/// Finite continuous-time Markov chain with rate matrix Q, stationary law pi
/// and observable V. Construction checks that rows sum to zero, off-diagonal
/// rates are nonnegative, the chain is irreducible and reversible, and that V
/// is centred under pi; violations throw std::invalid_argument.
class ReversibleChain {
 public:
  ReversibleChain(Eigen::MatrixXd Q, Eigen::VectorXd V, double tol = 1e-10);

  int n() const { return static_cast<int>(q_.rows()); }
  const Eigen::MatrixXd& Q() const { return q_; }
  const Eigen::VectorXd& pi() const { return pi_; }
  const Eigen::VectorXd& V() const { return v_; }

  /// Symmetric positive weights w_ij and positive masses m_i give
  /// Q_ij = w_ij / pi_i with pi = m / sum m. V is drawn standard normal and
  /// centred.
  static ReversibleChain random(int n, std::uint64_t seed);

  /// Plain text: n, then n rows of Q, then n entries of V, whitespace separated.
  static ReversibleChain parse(std::istream& in);

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd pi_;
  Eigen::VectorXd v_;
};

/// Stationary law from pi Q = 0, sum pi = 1.
Eigen::VectorXd stationary(const Eigen::MatrixXd& Q);

/// Centred solution of -Q u = V.
Eigen::VectorXd poisson_solution(const ReversibleChain& c);

/// sigma^2 = 2 sum_i pi_i V_i u_i.
double kv_sigma2(const ReversibleChain& c);

struct AdditiveSamples {
  std::vector<double> x;  // X_t per trajectory
  double variance_over_t = 0.0;
  double t_final = 0.0;
};

/// Gillespie simulation from the stationary start; trajectory k uses the
/// stream (seed, k).
AdditiveSamples simulate_additive(const ReversibleChain& c, double t_final, std::size_t n_traj,
                                  std::uint64_t seed);

struct MartingaleReport {
  /// (1/t) E|X_t - N_t|^2 = (1/t) E|u(y_t) - u(y_0)|^2.
  double residual = 0.0;
  double bound = 0.0;  // 4 max u^2 / t
  bool within_bound = false;
  /// Per starting state at the midpoint t/2: mean and se of N_t - N_{t/2}.
  std::vector<Estimate> conditional_increment;
  double max_abs_z = 0.0;
};

MartingaleReport martingale_residual(const ReversibleChain& c, double t_final, std::size_t n_traj,
                                     std::uint64_t seed);

struct CltReport {
  double sigma2_formula = 0.0;
  double sigma2_empirical = 0.0;
  double variance_ratio = 0.0;
  Estimate kurtosis;
  bool degenerate = false;
};

/// Throws std::domain_error when sigma^2 = 0 while V has nonzero variance.
CltReport clt_check(const ReversibleChain& c, double t_final, std::size_t n_traj,
                    std::uint64_t seed);

}  // namespace pathgibbs
