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

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace pathgibbs {

/// A point estimate together with its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Mean and batch-means standard error of a correlated series. The series is
/// cut into n_batches contiguous batches of equal length; a trailing remainder
/// shorter than one batch is dropped. Throws std::invalid_argument when the
/// series holds fewer than 2 * n_batches points or n_batches < 2.
Estimate batch_means(std::span<const double> series, std::size_t n_batches);

/// Batch means of a vector-valued observable: one row per batch, all batches of
/// equal size. Rows from several chains are concatenated in chain order.
class BatchedSeries {
 public:
  BatchedSeries() = default;
  BatchedSeries(std::size_t n_obs, std::size_t frames_per_batch);

  std::size_t n_obs() const { return n_obs_; }
  std::size_t n_batches() const { return n_obs_ == 0 ? 0 : rows_.size() / n_obs_; }
  std::size_t frames_per_batch() const { return frames_per_batch_; }

  void append_batch(std::span<const double> means);
  void append(const BatchedSeries& other);

  std::span<const double> batch(std::size_t b) const {
    return {rows_.data() + b * n_obs_, n_obs_};
  }
  double mean(std::size_t k) const;
  std::vector<double> means() const;
  /// Batch-means estimate for observable k.
  Estimate estimate(std::size_t k) const;

  /// Leave-one-batch-out mean vectors, used by jackknife().
  std::vector<double> leave_one_out(std::size_t b) const;

 private:
  std::size_t n_obs_ = 0;
  std::size_t frames_per_batch_ = 0;
  std::vector<double> rows_;
};

/// Delete-one-batch jackknife for a (possibly nonlinear) function of the
/// observable means. For linear statistics this reproduces the batch-means
/// standard error exactly.
Estimate jackknife(const BatchedSeries& series,
                   const std::function<double(std::span<const double>)>& statistic);

/// <u^4> / (3 <u^2>^2) of a plain sample, with a delete-one-batch jackknife
/// over n_batches. Equals 1 for a centred Gaussian.
Estimate kurtosis_ratio(std::span<const double> samples, std::size_t n_batches);

/// Streaming accumulator that turns a stream of frames into batch means.
class BatchAccumulator {
 public:
  BatchAccumulator(std::size_t n_obs, std::size_t frames_per_batch);

  void add(std::span<const double> frame);
  const BatchedSeries& series() const { return series_; }
  BatchedSeries take() { return std::move(series_); }

 private:
  std::size_t count_ = 0;
  std::vector<double> sum_;
  BatchedSeries series_;
};

}  // namespace pathgibbs
