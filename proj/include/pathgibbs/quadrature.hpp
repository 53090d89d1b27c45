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

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace pathgibbs::quadrature {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  explicit GaussLegendre(int order);

  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Process-wide cache; rules are immutable once built.
const GaussLegendre& rule(int order);

struct Options {
  int order = 16;
  int initial_panels = 2;
  int max_doublings = 16;
  double rel_tol = 1e-10;
};

template <std::size_t K>
struct Result {
  std::array<double, K> value{};
  bool converged = false;
  int panels = 0;
};

/// Composite Gauss-Legendre rule with `panels` equal panels on [a, b].
template <std::size_t K, class F>
std::array<double, K> composite(F&& f, double a, double b, int panels, const GaussLegendre& gl,
                                std::array<double, K>* abs_sum = nullptr) {
  std::array<double, K> acc{};
  std::array<double, K> acc_abs{};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const std::array<double, K> v = f(mid + 0.5 * h * gl.nodes[i]);
      const double w = 0.5 * h * gl.weights[i];
      for (std::size_t k = 0; k < K; ++k) {
        acc[k] += w * v[k];
        acc_abs[k] += w * std::abs(v[k]);
      }
    }
  }
  if (abs_sum) *abs_sum = acc_abs;
  return acc;
}

/// Adaptive composite Gauss-Legendre: the panel count doubles until two
/// successive estimates agree to rel_tol for every component. The tolerance is
/// measured against the integral of |f|, which coincides with |integral| for
/// single-signed integrands and stays meaningful under cancellation.
template <std::size_t K, class F>
Result<K> integrate(F&& f, double a, double b, const Options& opt = {}) {
  Result<K> res;
  if (!(b > a)) {
    res.converged = (a == b);
    return res;
  }
  const GaussLegendre& gl = rule(opt.order);
  int panels = opt.initial_panels;
  std::array<double, K> prev = composite<K>(f, a, b, panels, gl);
  for (int it = 0; it < opt.max_doublings; ++it) {
    panels *= 2;
    std::array<double, K> scale{};
    std::array<double, K> cur = composite<K>(f, a, b, panels, gl, &scale);
    bool ok = true;
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(cur[k])) {
        res.value = cur;
        res.panels = panels;
        return res;
      }
      if (std::abs(cur[k] - prev[k]) > opt.rel_tol * scale[k]) ok = false;
    }
    prev = cur;
    if (ok) {
      res.value = cur;
      res.converged = true;
      res.panels = panels;
      return res;
    }
  }
  res.value = prev;
  res.panels = panels;
  return res;
}

template <class F>
Result<1> integrate_scalar(F&& f, double a, double b, const Options& opt = {}) {
  return integrate<1>([&](double x) { return std::array<double, 1>{f(x)}; }, a, b, opt);
}

}  // namespace pathgibbs::quadrature
