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
#include <fstream>
#include <memory>
#include <json.hpp>
#include <string>
#include <vector>

#include "pathgibbs/sampler.hpp"

namespace pathgibbs {

using Json = nlohmann::ordered_json;

/// JSON text with every floating-point number at 17 significant digits and
/// non-finite numbers as null. Two-space indentation, trailing newline.
std::string dump_json(const Json& j);

/// Number formatted with 17 significant digits.
std::string format_real(double x);

void write_text(const std::string& path, const std::string& text);

/// Writes `metadata.json` (timestamp, command, config hash) into `dir`.
void write_metadata(const std::string& dir, const std::string& command,
                    const std::string& config_hash);

/// Binary frame stream: little-endian header {u64 d, u64 N, f64 eps} (24
/// bytes), then frames of 2N d float64 for sites -N..-1, 1..N (site-major).
class FrameWriter {
 public:
  FrameWriter(const std::string& path, int d, int N, double eps);
  void write(const PathConfig& x);
  std::size_t frames() const { return frames_; }

 private:
  std::ofstream out_;
  std::size_t frames_ = 0;
};

struct FrameFile {
  int d = 0;
  int N = 0;
  double eps = 0.0;
  std::vector<PathConfig> frames;
};
FrameFile read_frames(const std::string& path);

/// One frame file per chain, `<dir>/frames_chain<c>.bin`.
class FrameFileSink : public FrameSink {
 public:
  FrameFileSink(std::string dir, int d, int N, double eps);
  void begin(int n_chains) override;
  void record(int chain, const PathConfig& x) override;
  std::vector<std::string> paths() const;

 private:
  std::string paths_for(int chain) const;

  std::string dir_;
  int d_, n_;
  double eps_;
  std::vector<std::unique_ptr<FrameWriter>> writers_;
};

/// Accumulates the pair-Hessian table per chain; merge() combines in chain order.
class PairHessianSink : public FrameSink {
 public:
  explicit PairHessianSink(const LatticeModel& lm) : lm_(lm) {}
  void begin(int n_chains) override;
  void record(int chain, const PathConfig& x) override;
  PairHessianTable merged() const;

 private:
  const LatticeModel& lm_;
  std::vector<PairHessianTable> tables_;
};

}  // namespace pathgibbs
