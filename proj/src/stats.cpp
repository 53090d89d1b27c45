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

#include "pathgibbs/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathgibbs {

Estimate batch_means(std::span<const double> series, std::size_t n_batches) {
  if (n_batches < 2) throw std::invalid_argument("batch_means: need at least 2 batches");
  if (series.size() < 2 * n_batches) {
    throw std::invalid_argument("batch_means: series shorter than 2 * n_batches");
  }
  const std::size_t len = series.size() / n_batches;
  std::vector<double> means(n_batches, 0.0);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += series[b * len + i];
    means[b] = s / static_cast<double>(len);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(n_batches);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_of_mean = ss / (static_cast<double>(n_batches) * (n_batches - 1));
  return {grand, std::sqrt(var_of_mean)};
}

BatchedSeries::BatchedSeries(std::size_t n_obs, std::size_t frames_per_batch)
    : n_obs_(n_obs), frames_per_batch_(frames_per_batch) {}

void BatchedSeries::append_batch(std::span<const double> means) {
  if (means.size() != n_obs_) throw std::invalid_argument("BatchedSeries: row width mismatch");
  rows_.insert(rows_.end(), means.begin(), means.end());
}

void BatchedSeries::append(const BatchedSeries& other) {
  if (other.n_batches() == 0) return;
  if (rows_.empty() && (n_obs_ == 0 || n_obs_ == other.n_obs_)) {
    n_obs_ = other.n_obs_;
    frames_per_batch_ = other.frames_per_batch_;
  }
  if (other.n_obs_ != n_obs_ || other.frames_per_batch_ != frames_per_batch_) {
    throw std::invalid_argument("BatchedSeries: cannot merge series with different layout");
  }
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

double BatchedSeries::mean(std::size_t k) const {
  const std::size_t nb = n_batches();
  if (nb == 0) throw std::logic_error("BatchedSeries: no batches");
  double s = 0.0;
  for (std::size_t b = 0; b < nb; ++b) s += rows_[b * n_obs_ + k];
  return s / static_cast<double>(nb);
}

std::vector<double> BatchedSeries::means() const {
  std::vector<double> m(n_obs_, 0.0);
  const std::size_t nb = n_batches();
  if (nb == 0) throw std::logic_error("BatchedSeries: no batches");
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < n_obs_; ++k) m[k] += rows_[b * n_obs_ + k];
  }
  for (double& v : m) v /= static_cast<double>(nb);
  return m;
}

Estimate BatchedSeries::estimate(std::size_t k) const {
  const std::size_t nb = n_batches();
  if (nb < 2) throw std::logic_error("BatchedSeries: standard error needs at least 2 batches");
  const double m = mean(k);
  double ss = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    const double d = rows_[b * n_obs_ + k] - m;
    ss += d * d;
  }
  return {m, std::sqrt(ss / (static_cast<double>(nb) * (nb - 1)))};
}

std::vector<double> BatchedSeries::leave_one_out(std::size_t b) const {
  const std::size_t nb = n_batches();
  std::vector<double> m = means();
  for (std::size_t k = 0; k < n_obs_; ++k) {
    m[k] = (m[k] * nb - rows_[b * n_obs_ + k]) / static_cast<double>(nb - 1);
  }
  return m;
}

Estimate jackknife(const BatchedSeries& series,
                   const std::function<double(std::span<const double>)>& statistic) {
  const std::size_t nb = series.n_batches();
  if (nb < 2) throw std::logic_error("jackknife: need at least 2 batches");
  const std::vector<double> full = series.means();
  const double value = statistic(full);
  std::vector<double> reps(nb);
  double avg = 0.0;
  for (std::size_t b = 0; b < nb; ++b) {
    reps[b] = statistic(series.leave_one_out(b));
    avg += reps[b];
  }
  avg /= static_cast<double>(nb);
  double ss = 0.0;
  for (double r : reps) ss += (r - avg) * (r - avg);
  return {value, std::sqrt(ss * (static_cast<double>(nb) - 1.0) / static_cast<double>(nb))};
}

BatchAccumulator::BatchAccumulator(std::size_t n_obs, std::size_t frames_per_batch)
    : sum_(n_obs, 0.0), series_(n_obs, frames_per_batch) {
  if (frames_per_batch == 0) throw std::invalid_argument("BatchAccumulator: empty batches");
}

void BatchAccumulator::add(std::span<const double> frame) {
  for (std::size_t k = 0; k < sum_.size(); ++k) sum_[k] += frame[k];
  if (++count_ == series_.frames_per_batch()) {
    for (double& s : sum_) s /= static_cast<double>(count_);
    series_.append_batch(sum_);
    std::fill(sum_.begin(), sum_.end(), 0.0);
    count_ = 0;
  }
}

Estimate kurtosis_ratio(std::span<const double> samples, std::size_t n_batches) {
  if (n_batches < 2 || samples.size() < 2 * n_batches) {
    throw std::invalid_argument("kurtosis_ratio: series too short");
  }
  const std::size_t per = samples.size() / n_batches;
  BatchAccumulator acc(2, per);
  for (std::size_t i = 0; i < per * n_batches; ++i) {
    const double u2 = samples[i] * samples[i];
    const double f[2] = {u2, u2 * u2};
    acc.add(f);
  }
  const BatchedSeries& s = acc.series();
  if (!(s.mean(0) > 0.0)) throw std::domain_error("kurtosis_ratio: zero variance");
  return jackknife(s, [](std::span<const double> v) { return v[1] / (3.0 * v[0] * v[0]); });
}

}  // namespace pathgibbs
