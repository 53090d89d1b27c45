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


#include "pathgibbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

namespace pathgibbs {
namespace {

bool metropolis(double delta, Rng& rng) {
  if (delta <= 0.0) return true;
  return rng.uniform() < std::exp(-delta);
}

// Block geometry: sites in sampling order (from the inner neighbour outward),
// the inner neighbour and the outer neighbour (or none).
struct BlockGeometry {
  std::vector<int> order;
  int inner;
  std::optional<int> outer;
};

BlockGeometry geometry(int N, int first, int len) {
  const int last = first + len - 1;
  if (len < 1 || first < -N || last > N || (first <= 0 && last >= 0)) {
    throw std::invalid_argument("bridge block must be a nonempty range on one side of 0");
  }
  BlockGeometry g;
  if (first > 0) {
    for (int i = first; i <= last; ++i) g.order.push_back(i);
    g.inner = first - 1;
    if (last < N) g.outer = last + 1;
  } else {
    for (int i = last; i >= first; --i) g.order.push_back(i);
    g.inner = last + 1;
    if (first > -N) g.outer = first - 1;
  }
  return g;
}

}  // namespace

void SamplerConfig::validate(int N) const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("sampler: " + what); };
  if (n_chains < 1) bad("n_chains must be positive");
  if (n_sweeps < 0) bad("n_sweeps must be nonnegative");
  if (burn_in < 0) bad("burn_in must be nonnegative");
  if (thin < 1) bad("thin must be positive");
  if (p_site < 0 || p_bridge < 0 || p_endpoint < 0) bad("move probabilities must be nonnegative");
  if (std::abs(p_site + p_bridge + p_endpoint - 1.0) > 1e-9) bad("move probabilities must sum to 1");
  if (!(sigma_site > 0.0)) bad("sigma_site must be positive");
  if (p_bridge > 0.0 && (bridge_length < 2 || bridge_length > N)) {
    bad("bridge_length must lie in [2, N]");
  }
  if (n_batches < 2) bad("n_batches must be at least 2");
  if (threads < 0) bad("threads must be nonnegative");
}

double MoveCounts::rate(MoveType t) const {
  const int k = static_cast<int>(t);
  return proposed[k] == 0 ? 0.0
                          : static_cast<double>(accepted[k]) / static_cast<double>(proposed[k]);
}

void MoveCounts::add(const MoveCounts& o) {
  for (int k = 0; k < 3; ++k) {
    proposed[k] += o.proposed[k];
    accepted[k] += o.accepted[k];
  }
}

PathConfig free_path(int d, int N, double eps, Rng& rng) {
  PathConfig x(d, N, eps);
  const double s = std::sqrt(eps);
  for (int i = 1; i <= N; ++i)
    for (int a = 0; a < d; ++a) x.at(i, a) = x.at(i - 1, a) + s * rng.normal();
  for (int i = -1; i >= -N; --i)
    for (int a = 0; a < d; ++a) x.at(i, a) = x.at(i + 1, a) + s * rng.normal();
  return x;
}

bool site_move(const LatticeModel& lm, ChainState& st, int site) {
  const int d = lm.dim();
  double y[3];
  const auto cur = st.x.site(site);
  for (int a = 0; a < d; ++a) y[a] = cur[a] + st.sigma_site * st.rng.normal();
  const double de = lm.delta_energy(st.x, site, std::span<const double>(y, d));
  if (!metropolis(de, st.rng)) return false;
  for (int a = 0; a < d; ++a) st.x.at(site, a) = y[a];
  return true;
}

bool bridge_move(const LatticeModel& lm, ChainState& st, int first, int len) {
  const int d = lm.dim();
  const double eps = lm.eps();
  const BlockGeometry g = geometry(lm.n(), first, len);
  std::vector<double> values(static_cast<std::size_t>(len * d));
  auto slot = [&](int i) { return values.data() + (i - first) * d; };
  double prev[3], end[3];
  for (int a = 0; a < d; ++a) prev[a] = st.x.at(g.inner, a);
  if (g.outer) {
    for (int a = 0; a < d; ++a) end[a] = st.x.at(*g.outer, a);
  }
  for (int k = 0; k < len; ++k) {
    double* out = slot(g.order[k]);
    if (g.outer) {
      const double m = static_cast<double>(len + 1 - k);  // steps from prev to the outer end
      const double sd = std::sqrt(eps * (m - 1.0) / m);
      for (int a = 0; a < d; ++a) out[a] = prev[a] + (end[a] - prev[a]) / m + sd * st.rng.normal();
    } else {
      const double sd = std::sqrt(eps);
      for (int a = 0; a < d; ++a) out[a] = prev[a] + sd * st.rng.normal();
    }
    for (int a = 0; a < d; ++a) prev[a] = out[a];
  }
  double delta = 0.0;
  if (lm.interacting() || lm.kappa() > 0.0) {
    const EnergyParts e = lm.block_delta(st.x, first, len, values);
    delta = e.mass + e.pair;
  }
  if (!metropolis(delta, st.rng)) return false;
  for (int i = first; i < first + len; ++i)
    for (int a = 0; a < d; ++a) st.x.at(i, a) = slot(i)[a];
  return true;
}

double bridge_log_density(const LatticeModel& lm, const PathConfig& x, int first, int len,
                          std::span<const double> values) {
  const int d = lm.dim();
  const double eps = lm.eps();
  const BlockGeometry g = geometry(lm.n(), first, len);
  if (values.size() != static_cast<std::size_t>(len * d)) {
    throw std::invalid_argument("bridge_log_density: wrong number of values");
  }
  double prev[3];
  for (int a = 0; a < d; ++a) prev[a] = x.at(g.inner, a);
  double logp = 0.0;
  for (int k = 0; k < len; ++k) {
    const double* v = values.data() + (g.order[k] - first) * d;
    double var = eps;
    double mean[3];
    if (g.outer) {
      const double m = static_cast<double>(len + 1 - k);
      var = eps * (m - 1.0) / m;
      for (int a = 0; a < d; ++a) mean[a] = prev[a] + (x.at(*g.outer, a) - prev[a]) / m;
    } else {
      for (int a = 0; a < d; ++a) mean[a] = prev[a];
    }
    for (int a = 0; a < d; ++a) {
      const double z = v[a] - mean[a];
      logp += -0.5 * z * z / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
      prev[a] = v[a];
    }
  }
  return logp;
}

MoveCounts sweep(const LatticeModel& lm, ChainState& st, const SamplerConfig& cfg) {
  const int N = lm.n();
  MoveCounts c;
  long budget = 2L * N;
  while (budget > 0) {
    const double u = st.rng.uniform();
    if (u < cfg.p_site) {
      const int k = static_cast<int>(st.rng.uniform() * 2 * N);
      const int site = k < N ? k - N : k - N + 1;
      ++c.proposed[0];
      if (site_move(lm, st, site)) ++c.accepted[0];
      budget -= 1;
    } else if (u < cfg.p_site + cfg.p_bridge) {
      const int L = cfg.bridge_length;
      const int starts = N - L + 1;
      const int s = 1 + static_cast<int>(st.rng.uniform() * starts);
      const bool positive = st.rng.uniform() < 0.5;
      const int first = positive ? s : -(s + L - 1);
      ++c.proposed[1];
      if (bridge_move(lm, st, first, L)) ++c.accepted[1];
      budget -= L;
    } else {
      const int site = st.rng.uniform() < 0.5 ? N : -N;
      ++c.proposed[2];
      if (bridge_move(lm, st, site, 1)) ++c.accepted[2];
      budget -= 1;
    }
  }
  return c;
}

namespace {

struct ChainOutput {
  std::vector<BatchedSeries> series;
  std::vector<std::vector<double>> frame_sum;
  std::vector<std::vector<double>> frame_sum2;
  MoveCounts counts;
  double sigma = 0.0;
  std::size_t frames = 0;
  std::optional<PathConfig> final_config;
};

ChainOutput run_chain(const LatticeModel& lm, const SamplerConfig& cfg, int chain,
                      const std::vector<const Observable*>& observables, FrameSink* sink) {
  ChainOutput out;
  Rng rng = Rng::stream(cfg.seed, StreamDomain::kChain, static_cast<std::uint64_t>(chain));
  PathConfig x0 = cfg.start_free ? free_path(lm.dim(), lm.n(), lm.eps(), rng) : lm.zero_config();
  ChainState st{std::move(x0), rng, cfg.sigma_site};

  // Burn-in with step tuning on windows of site moves.
  constexpr long kWindow = 20;
  MoveCounts window;
  for (long s = 0; s < cfg.burn_in; ++s) {
    window.add(sweep(lm, st, cfg));
    if (!st.x.pinned()) throw std::logic_error("pinned site moved");
    if (cfg.tune && (s + 1) % kWindow == 0 && window.proposed[0] >= 50) {
      const double acc = window.rate(MoveType::kSite);
      if (acc > 0.45) st.sigma_site *= 1.15;
      if (acc < 0.30) st.sigma_site /= 1.15;
      window = MoveCounts{};
    }
  }
  out.sigma = st.sigma_site;

  const std::size_t frames = static_cast<std::size_t>(cfg.n_sweeps / cfg.thin);
  const std::size_t fpb = std::max<std::size_t>(1, frames / static_cast<std::size_t>(cfg.n_batches));
  std::vector<BatchAccumulator> acc;
  std::vector<std::vector<double>> buf;
  for (const Observable* ob : observables) {
    acc.emplace_back(ob->size(), fpb);
    buf.emplace_back(ob->size(), 0.0);
    out.frame_sum.emplace_back(ob->size(), 0.0);
    out.frame_sum2.emplace_back(ob->size(), 0.0);
  }
  const std::size_t used = frames < static_cast<std::size_t>(cfg.n_batches)
                               ? 0
                               : fpb * static_cast<std::size_t>(cfg.n_batches);
  for (long s = 1; s <= cfg.n_sweeps; ++s) {
    out.counts.add(sweep(lm, st, cfg));
    if (!st.x.pinned()) throw std::logic_error("pinned site moved");
    if (s % cfg.thin != 0) continue;
    if (sink) sink->record(chain, st.x);
    if (out.frames < used) {
      for (std::size_t k = 0; k < observables.size(); ++k) {
        observables[k]->measure(st.x, buf[k]);
        acc[k].add(buf[k]);
        for (std::size_t j = 0; j < buf[k].size(); ++j) {
          out.frame_sum[k][j] += buf[k][j];
          out.frame_sum2[k][j] += buf[k][j] * buf[k][j];
        }
      }
    }
    ++out.frames;
  }
  out.frames = std::min(out.frames, used);
  for (auto& a : acc) out.series.push_back(a.take());
  out.final_config = std::move(st.x);
  return out;
}

}  // namespace

RunResult run(const LatticeModel& lm, const SamplerConfig& cfg,
              const std::vector<const Observable*>& observables, FrameSink* sink) {
  cfg.validate(lm.n());
  const int nc = cfg.n_chains;
  if (sink) sink->begin(nc);
  std::vector<ChainOutput> outs(static_cast<std::size_t>(nc));
  const int nt = std::min(nc, cfg.threads == 0 ? nc : cfg.threads);
  if (nt <= 1) {
    for (int c = 0; c < nc; ++c) outs[c] = run_chain(lm, cfg, c, observables, sink);
  } else {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nt));
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int c = w; c < nc; c += nt) outs[c] = run_chain(lm, cfg, c, observables, sink);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  RunResult res;
  for (const Observable* ob : observables) res.series.emplace_back(ob->size(), 0);
  for (int c = 0; c < nc; ++c) {
    ChainOutput& o = outs[c];
    for (std::size_t k = 0; k < observables.size(); ++k) res.series[k].append(o.series[k]);
    res.stats.total.add(o.counts);
    res.stats.per_chain.push_back(o.counts);
    res.stats.tuned_sigma.push_back(o.sigma);
    res.stats.frames.push_back(o.frames);
    res.final_configs.push_back(std::move(*o.final_config));
  }
  std::size_t total_frames = 0;
  for (auto f : res.stats.frames) total_frames += f;
  for (std::size_t k = 0; k < observables.size(); ++k) {
    std::vector<double> ess(observables[k]->size(), 0.0);
    if (total_frames > 1 && res.series[k].n_batches() >= 2) {
      for (std::size_t j = 0; j < ess.size(); ++j) {
        double s = 0.0, s2 = 0.0;
        for (const auto& o : outs) {
          s += o.frame_sum[k][j];
          s2 += o.frame_sum2[k][j];
        }
        const double n = static_cast<double>(total_frames);
        const double var = std::max(0.0, (s2 - s * s / n) / (n - 1.0));
        const double se = res.series[k].estimate(j).se;
        ess[j] = se > 0.0 ? var / (se * se) : n;
      }
    }
    res.stats.ess.push_back(std::move(ess));
  }
  return res;
}

}  // namespace pathgibbs
