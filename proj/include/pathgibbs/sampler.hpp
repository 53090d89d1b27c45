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

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pathgibbs/lattice.hpp"
#include "pathgibbs/rng.hpp"
#include "pathgibbs/stats.hpp"

namespace pathgibbs {

struct SamplerConfig {
  std::uint64_t seed = 1;
  int n_chains = 1;
  long n_sweeps = 1000;
  long burn_in = 100;
  long thin = 1;
  double p_site = 0.4;
  double p_bridge = 0.5;
  double p_endpoint = 0.1;
  /// Initial single-site step; tuned during burn-in when `tune` is set.
  double sigma_site = 0.5;
  bool tune = true;
  int bridge_length = 8;
  /// Batches per chain for the batch-means estimates.
  int n_batches = 20;
  /// Worker threads; chains are distributed round-robin. 0 means one per chain.
  int threads = 1;
  /// Start chains from a free path draw; otherwise from x = 0.
  bool start_free = true;

  /// Throws std::invalid_argument naming the offending field.
  void validate(int N) const;
};

enum class MoveType { kSite = 0, kBridge = 1, kEndpoint = 2 };

struct MoveCounts {
  std::uint64_t proposed[3] = {0, 0, 0};
  std::uint64_t accepted[3] = {0, 0, 0};

  double rate(MoveType t) const;
  void add(const MoveCounts& o);
};

struct ChainStats {
  /// Measurement-phase counts summed over chains, then per chain.
  MoveCounts total;
  std::vector<MoveCounts> per_chain;
  std::vector<double> tuned_sigma;
  /// Recorded frames per chain.
  std::vector<std::size_t> frames;
  /// Per observable component: frames * var(frame) / var(mean) from batch means.
  std::vector<std::vector<double>> ess;
};

/// A per-frame measurement. Implementations must be safe to call concurrently
/// from several chains.
class Observable {
 public:
  virtual ~Observable() = default;
  virtual std::size_t size() const = 0;
  virtual void measure(const PathConfig& x, std::span<double> out) const = 0;
};

/// Receives every recorded frame of every chain. Calls for different chains may
/// run concurrently; calls for one chain arrive in order from one thread.
class FrameSink {
 public:
  virtual ~FrameSink() = default;
  virtual void begin(int n_chains) { (void)n_chains; }
  virtual void record(int chain, const PathConfig& x) = 0;
};

struct RunResult {
  /// One series per observable; batches from all chains in chain order.
  std::vector<BatchedSeries> series;
  ChainStats stats;
  std::vector<PathConfig> final_configs;
};

/// One chain's state: configuration, stream and tuned step.
struct ChainState {
  PathConfig x;
  Rng rng;
  double sigma_site;
};

/// Draw from the free pinned law (independent Gaussian increments of variance eps).
PathConfig free_path(int d, int N, double eps, Rng& rng);

/// Moves until 2N site updates are spent; a bridge costs its length.
MoveCounts sweep(const LatticeModel& lm, ChainState& st, const SamplerConfig& cfg);

/// Individual moves, exposed for the detailed-balance tests. Each returns true
/// when accepted.
bool site_move(const LatticeModel& lm, ChainState& st, int site);
/// Resamples first..first+len-1 (one side of 0; ordered away from 0) from the
/// free conditional given the inner neighbour and, if it exists, the outer one.
bool bridge_move(const LatticeModel& lm, ChainState& st, int first, int len);

/// Log density of the free block proposal at `values`, given the current
/// neighbours of the block in x.
double bridge_log_density(const LatticeModel& lm, const PathConfig& x, int first, int len,
                          std::span<const double> values);

/// Burn-in, then n_sweeps recording every `thin`-th sweep. Chains use the
/// streams (seed, kChain, c) and start from a free path draw; results merge in
/// chain order, so output does not depend on the thread count.
RunResult run(const LatticeModel& lm, const SamplerConfig& cfg,
              const std::vector<const Observable*>& observables, FrameSink* sink = nullptr);

}  // namespace pathgibbs
