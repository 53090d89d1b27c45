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


#include "pathgibbs/estimators.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pathgibbs {

MsdObservable::MsdObservable(int N, Eigen::VectorXd gamma) : n_(N), gamma_(std::move(gamma)) {
  if (N < 1) throw std::invalid_argument("MsdObservable: N must be positive");
  if (!(gamma_.norm() > 0.0)) throw std::invalid_argument("msd: direction must be nonzero");
}

void MsdObservable::measure(const PathConfig& x, std::span<double> out) const {
  const int d = x.dim();
  if (d != gamma_.size() || x.n() != n_) throw std::invalid_argument("MsdObservable: shape mismatch");
  for (int j = 1; j <= n_; ++j) {
    double up = 0.0, um = 0.0;
    for (int a = 0; a < d; ++a) {
      up += gamma_(a) * x.at(j, a);
      um += gamma_(a) * x.at(-j, a);
    }
    const double p2 = up * up, m2 = um * um;
    double* o = out.data() + 4 * (j - 1);
    o[0] = 0.5 * (p2 + m2);
    o[1] = p2;
    o[2] = m2;
    o[3] = 0.5 * (p2 * p2 + m2 * m2);
  }
}

MsdCurve msd(const BatchedSeries& series, const Eigen::VectorXd& gamma, double eps) {
  if (series.n_batches() < 2) throw std::invalid_argument("msd: need samples in at least 2 batches");
  if (series.n_obs() % 4 != 0) throw std::invalid_argument("msd: not an MsdObservable series");
  const int N = static_cast<int>(series.n_obs() / 4);
  MsdCurve c;
  c.gamma = gamma;
  c.eps = eps;
  c.lags.push_back(0.0);
  for (auto* v : {&c.values, &c.ses, &c.plus, &c.plus_se, &c.minus, &c.minus_se}) v->push_back(0.0);
  c.batches = BatchedSeries(static_cast<std::size_t>(N), series.frames_per_batch());
  for (int j = 1; j <= N; ++j) {
    const std::size_t o = 4 * static_cast<std::size_t>(j - 1);
    c.lags.push_back(eps * j);
    const Estimate s = series.estimate(o), p = series.estimate(o + 1), m = series.estimate(o + 2);
    c.values.push_back(s.value);
    c.ses.push_back(s.se);
    c.plus.push_back(p.value);
    c.plus_se.push_back(p.se);
    c.minus.push_back(m.value);
    c.minus_se.push_back(m.se);
  }
  std::vector<double> row(static_cast<std::size_t>(N));
  for (std::size_t b = 0; b < series.n_batches(); ++b) {
    const auto r = series.batch(b);
    for (int j = 0; j < N; ++j) row[j] = r[4 * static_cast<std::size_t>(j)];
    c.batches.append_batch(row);
  }
  return c;
}

std::vector<double> massive_profile(int N, double eps, double mu) {
  if (N < 1 || !(eps > 0.0) || mu < 0.0) throw std::invalid_argument("massive_profile: bad input");
  // Tridiagonal T = L/eps + mu eps on sites 1..N; diag(T^{-1}) from forward and
  // backward pivots: 1/(T^{-1})_ii = a_i - b^2/f_{i-1} - b^2/g_{i+1}.
  const double b2 = 1.0 / (eps * eps);
  std::vector<double> a(N), f(N), g(N), out(N);
  for (int i = 0; i < N; ++i) a[i] = (i + 1 < N ? 2.0 : 1.0) / eps + mu * eps;
  for (int i = 0; i < N; ++i) f[i] = a[i] - (i > 0 ? b2 / f[i - 1] : 0.0);
  for (int i = N - 1; i >= 0; --i) g[i] = a[i] - (i + 1 < N ? b2 / g[i + 1] : 0.0);
  for (int i = 0; i < N; ++i) {
    double piv = a[i];
    if (i > 0) piv -= b2 / f[i - 1];
    if (i + 1 < N) piv -= b2 / g[i + 1];
    out[i] = 1.0 / piv;
  }
  return out;
}

namespace {

// Weighted least squares c ~ D g + b for fixed g; returns the weighted SSR.
double wls(std::span<const double> g, std::span<const double> c, std::span<const double> w,
           double& D, double& b) {
  double sw = 0, sg = 0, sc = 0, sgg = 0, sgc = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sw += w[i];
    sg += w[i] * g[i];
    sc += w[i] * c[i];
    sgg += w[i] * g[i] * g[i];
    sgc += w[i] * g[i] * c[i];
  }
  const double den = sw * sgg - sg * sg;
  D = (sw * sgc - sg * sc) / den;
  b = (sc - D * sg) / sw;
  double ssr = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = c[i] - D * g[i] - b;
    ssr += w[i] * r * r;
  }
  return ssr;
}

}  // namespace

double fit_D_values(std::span<const double> t, std::span<const double> c,
                    std::span<const double> w, int N, double eps, double kappa,
                    double* intercept) {
  const std::size_t n = t.size();
  if (n < 3 || c.size() != n || w.size() != n) throw std::invalid_argument("fit_D: need >= 3 points");
  double D = 0.0, b = 0.0;
  if (kappa == 0.0) {
    wls(t, c, w, D, b);
    if (intercept) *intercept = b;
    return D;
  }
  std::vector<int> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(std::lround(t[i] / eps));
  std::vector<double> g(n);
  auto profile = [&](double Dtry) {
    const std::vector<double> prof = massive_profile(N, eps, kappa * Dtry);
    for (std::size_t i = 0; i < n; ++i) g[i] = Dtry * prof[static_cast<std::size_t>(idx[i] - 1)];
    double sw = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      sr += w[i] * (c[i] - g[i]);
    }
    const double bb = sr / sw;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = c[i] - g[i] - bb;
      ssr += w[i] * r * r;
    }
    return ssr;
  };
  // Not unimodal over the full range; scan a log grid, then refine locally.
  constexpr int kGrid = 64;
  constexpr double kLo = 1e-6, kHi = 10.0;
  auto node = [&](int k) { return kLo * std::pow(kHi / kLo, static_cast<double>(k) / kGrid); };
  int kbest = 0;
  double sbest = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    const double v = profile(node(k));
    if (v < sbest) sbest = v, kbest = k;
  }
  const double lo = node(std::max(kbest - 1, 0)), hi = node(std::min(kbest + 1, kGrid));
  const auto best = boost::math::tools::brent_find_minima(profile, lo, hi, 40);
  D = best.second <= sbest ? best.first : node(kbest);
  if (intercept) {
    const std::vector<double> prof = massive_profile(N, eps, kappa * D);
    double sw = 0.0, sr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sw += w[i];
      sr += w[i] * (c[i] - D * prof[static_cast<std::size_t>(idx[i] - 1)]);
    }
    *intercept = sr / sw;
  }
  return D;
}

DiffusionFit fit_D(const MsdCurve& curve, FitWindow window, double kappa) {
  const int N = static_cast<int>(curve.lags.size()) - 1;
  const double g2 = curve.gamma.squaredNorm();
  if (N < 1 || !(g2 > 0.0)) throw std::invalid_argument("fit_D: empty curve");
  if (!(window.t_hi > window.t_lo)) throw std::invalid_argument("fit_D: degenerate window");
  DiffusionFit fit;
  fit.lag_lo = static_cast<int>(std::ceil(window.t_lo / curve.eps - 1e-9));
  fit.lag_hi = static_cast<int>(std::floor(window.t_hi / curve.eps + 1e-9));
  fit.lag_lo = std::max(fit.lag_lo, 0);
  fit.lag_hi = std::min(fit.lag_hi, N);
  if (fit.lag_lo < 1 || fit.lag_hi >= N) {
    throw std::invalid_argument("fit_D: window must stay strictly inside (0, T)");
  }
  fit.points = fit.lag_hi - fit.lag_lo + 1;
  if (fit.points < 3) throw std::invalid_argument("fit_D: window holds fewer than 3 lags");

  std::vector<double> t, c, w;
  bool any_zero = false;
  for (int j = fit.lag_lo; j <= fit.lag_hi; ++j) {
    t.push_back(curve.lags[j]);
    c.push_back(curve.values[j] / g2);
    const double se = curve.ses[j] / g2;
    any_zero = any_zero || !(se > 0.0);
    w.push_back(se > 0.0 ? 1.0 / (se * se) : 1.0);
  }
  if (any_zero) std::fill(w.begin(), w.end(), 1.0);
  fit.D.value = fit_D_values(t, c, w, N, curve.eps, kappa, &fit.intercept);

  const std::size_t nb = curve.batches.n_batches();
  if (nb >= 2) {
    std::vector<double> reps(nb);
    double avg = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      const std::vector<double> loo = curve.batches.leave_one_out(b);
      for (int j = fit.lag_lo; j <= fit.lag_hi; ++j) c[j - fit.lag_lo] = loo[j - 1] / g2;
      reps[b] = fit_D_values(t, c, w, N, curve.eps, kappa);
      avg += reps[b];
    }
    avg /= static_cast<double>(nb);
    double ss = 0.0;
    for (double r : reps) ss += (r - avg) * (r - avg);
    fit.D.se = std::sqrt(ss * (static_cast<double>(nb) - 1.0) / static_cast<double>(nb));
  }
  return fit;
}

Estimate gaussianity(const BatchedSeries& s, int lag) {
  const int N = static_cast<int>(s.n_obs() / 4);
  if (lag < 1 || lag > N) throw std::out_of_range("gaussianity: lag out of range");
  const std::size_t o = 4 * static_cast<std::size_t>(lag - 1);
  const std::vector<double> m = s.means();
  if (!(m[o] > 0.0)) throw std::domain_error("gaussianity: zero variance");
  return jackknife(s, [o](std::span<const double> v) { return v[o + 3] / (3.0 * v[o] * v[o]); });
}

// ---------------------------------------------------------------------------

LagHessianObservable::LagHessianObservable(const LatticeModel& lm, int margin) : lm_(lm) {
  const int N = lm.n(), J = lm.lags();
  margin_ = margin < 0 ? std::max(J, N / 4) : margin;
  if (-N + margin_ > N - margin_ - J) {
    throw std::invalid_argument("estimate_K: margin exhausts the lattice");
  }
}

std::size_t LagHessianObservable::size() const {
  return static_cast<std::size_t>(lm_.lags() * lm_.dim() * lm_.dim());
}

void LagHessianObservable::measure(const PathConfig& x, std::span<double> out) const {
  const int N = lm_.n(), J = lm_.lags(), d = lm_.dim();
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> y(static_cast<std::size_t>(d));
  for (int m = 1; m <= J; ++m) {
    double* o = out.data() + static_cast<std::size_t>((m - 1) * d * d);
    const int lo = -N + margin_, hi = N - margin_ - m;
    for (int i = lo; i <= hi; ++i) {
      for (int a = 0; a < d; ++a) y[a] = x.at(i + m, a) - x.at(i, a);
      const Eigen::MatrixXd h = lm_.pair_hessian(y, m);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) o[a * d + b] += h(a, b);
    }
    const double inv = 1.0 / static_cast<double>(hi - lo + 1);
    for (int k = 0; k < d * d; ++k) o[k] *= inv;
  }
}

namespace {

KernelLagTable table_from_means(const LatticeModel& lm, std::span<const double> means) {
  const int d = lm.dim(), J = lm.lags();
  KernelLagTable t;
  t.eps = lm.eps();
  const std::vector<double> zero(static_cast<std::size_t>(d), 0.0);
  t.k.push_back(lm.interacting() ? lm.pair_hessian(zero, 0) : Eigen::MatrixXd::Zero(d, d));
  for (int m = 1; m <= J; ++m) {
    Eigen::MatrixXd b(d, d);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) b(a, c) = means[static_cast<std::size_t>((m - 1) * d * d + a * d + c)];
    t.k.push_back(0.5 * (b + b.transpose()));
  }
  return t;
}

}  // namespace

KernelLagTable estimate_K(const LatticeModel& lm, const BatchedSeries& lag_series) {
  if (!lm.interacting()) {
    KernelLagTable t;
    t.eps = lm.eps();
    t.k.push_back(Eigen::MatrixXd::Zero(lm.dim(), lm.dim()));
    return t;
  }
  return table_from_means(lm, lag_series.means());
}

KernelLagTable estimate_K_frozen(const LatticeModel& lm, const PathConfig& x, int margin) {
  if (!lm.interacting()) return estimate_K(lm, BatchedSeries());
  LagHessianObservable ob(lm, margin);
  std::vector<double> v(ob.size());
  ob.measure(x, v);
  return table_from_means(lm, v);
}

double compute_D0(const KernelLagTable& table, double tail_tol) {
  if (table.k.empty()) return 0.0;
  const double eps = table.eps;
  if (!(eps > 0.0)) throw std::invalid_argument("compute_D0: eps must be positive");
  std::vector<double> norms;
  double biggest = 0.0;
  for (const auto& k : table.k) {
    if (!k.allFinite()) throw std::domain_error("compute_D0: non-finite kernel entry");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (k + k.transpose()),
                                                            Eigen::EigenvaluesOnly);
    const double n = es.eigenvalues().cwiseAbs().maxCoeff();
    norms.push_back(n);
    biggest = std::max(biggest, n);
  }
  if (biggest == 0.0) return 0.0;
  if (norms.size() < 2 || norms.back() > tail_tol * biggest) {
    throw std::domain_error("compute_D0: kernel tail not summable within the tabulated lags");
  }
  double second = 0.0, zeroth = 0.0;
  for (std::size_t j = 0; j < norms.size(); ++j) {
    const double mult = j == 0 ? 1.0 : 2.0;
    const double t = eps * static_cast<double>(j);
    second += mult * eps * t * t * norms[j];
    zeroth += mult * eps * norms[j];
  }
  return 0.5 * second + 2.0 * zeroth;
}

double lower_bound_c0(double D0) {
  if (!(D0 >= 0.0)) throw std::invalid_argument("lower_bound_c0: D0 must be nonnegative");
  return 1.0 / (1.0 + D0);
}

QuadraticFormObservable::QuadraticFormObservable(std::vector<Eigen::VectorXd> f) : f_(std::move(f)) {}

void QuadraticFormObservable::measure(const PathConfig& x, std::span<double> out) const {
  const Eigen::VectorXd v = x.movable_vector();
  for (std::size_t k = 0; k < f_.size(); ++k) {
    if (f_[k].size() != v.size()) throw std::invalid_argument("QuadraticFormObservable: size mismatch");
    const double s = f_[k].dot(v);
    out[k] = s * s;
  }
}

BrascampReport brascamp_check(const Estimate& lhs, const Eigen::MatrixXd& M,
                              const Eigen::VectorXd& f, double lambda) {
  if (M.rows() != M.cols() || M.rows() != f.size()) {
    throw std::invalid_argument("brascamp_check: dimension mismatch");
  }
  if (lambda < 0.0) throw std::invalid_argument("brascamp_check: lambda must be nonnegative");
  Eigen::MatrixXd A = M;
  A.diagonal().array() += lambda;
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("brascamp_check: M + lambda is not positive definite");
  }
  BrascampReport r;
  r.lhs = lhs;
  r.lambda = lambda;
  r.rhs = f.dot(llt.solve(f));
  r.ok = lhs.value + 3.0 * lhs.se >= r.rhs;
  return r;
}

BoundReport sandwich_report(const Estimate& D_hat, double D0) {
  BoundReport r;
  r.D_hat = D_hat;
  r.D0 = D0;
  r.c0 = lower_bound_c0(D0);
  const double tol = 3.0 * D_hat.se;
  r.lower_ok = r.c0 - tol <= D_hat.value;
  r.upper_ok = D_hat.value <= 1.0 + tol;
  r.sandwich_ok = r.lower_ok && r.upper_ok;
  std::ostringstream os;
  os.precision(6);
  os << "c0=" << r.c0 << " D_hat=" << D_hat.value << " se=" << D_hat.se
     << " (D0 from operator norms: D0 = 1/2 sum eps t^2 |K| + 2 sum eps |K|)";
  if (!r.lower_ok) os << "; below lower bound (statistics or truncation)";
  if (!r.upper_ok) os << "; above 1";
  r.details = os.str();
  return r;
}

}  // namespace pathgibbs
