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


#include "pathgibbs/io.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <sstream>
#include <stdexcept>

namespace pathgibbs {
namespace {

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string pad2(static_cast<std::size_t>(indent + 2), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad2 + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ", ";
        first = false;
        dump(v, out, indent + 2);
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_real(x) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

static_assert(std::endian::native == std::endian::little, "frame files assume a little-endian host");

template <class T>
void put(std::ofstream& o, T v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("frame file truncated");
  return v;
}

}  // namespace

std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep a marker of floatness for integral values.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += "\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write '" + path + "'");
  o << text;
}

void write_metadata(const std::string& dir, const std::string& command,
                    const std::string& config_hash) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  Json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["timestamp"] = buf;
  write_text((std::filesystem::path(dir) / "metadata.json").string(), dump_json(j));
}

FrameWriter::FrameWriter(const std::string& path, int d, int N, double eps)
    : out_(path, std::ios::binary) {
  if (!out_) throw std::runtime_error("cannot write '" + path + "'");
  put<std::uint64_t>(out_, static_cast<std::uint64_t>(d));
  put<std::uint64_t>(out_, static_cast<std::uint64_t>(N));
  put<double>(out_, eps);
}

void FrameWriter::write(const PathConfig& x) {
  for (int i = -x.n(); i <= x.n(); ++i) {
    if (i == 0) continue;
    for (double v : x.site(i)) put<double>(out_, v);
  }
  ++frames_;
}

FrameFile read_frames(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  FrameFile f;
  f.d = static_cast<int>(get<std::uint64_t>(in));
  f.N = static_cast<int>(get<std::uint64_t>(in));
  f.eps = get<double>(in);
  while (in.peek() != std::char_traits<char>::eof()) {
    PathConfig x(f.d, f.N, f.eps);
    for (int i = -f.N; i <= f.N; ++i) {
      if (i == 0) continue;
      for (int a = 0; a < f.d; ++a) x.at(i, a) = get<double>(in);
    }
    f.frames.push_back(std::move(x));
  }
  return f;
}

FrameFileSink::FrameFileSink(std::string dir, int d, int N, double eps)
    : dir_(std::move(dir)), d_(d), n_(N), eps_(eps) {}

void FrameFileSink::begin(int n_chains) {
  writers_.clear();
  for (int c = 0; c < n_chains; ++c) {
    writers_.push_back(std::make_unique<FrameWriter>(paths_for(c), d_, n_, eps_));
  }
}

std::string FrameFileSink::paths_for(int c) const {
  return (std::filesystem::path(dir_) / ("frames_chain" + std::to_string(c) + ".bin")).string();
}

void FrameFileSink::record(int chain, const PathConfig& x) { writers_[chain]->write(x); }

std::vector<std::string> FrameFileSink::paths() const {
  std::vector<std::string> p;
  for (std::size_t c = 0; c < writers_.size(); ++c) p.push_back(paths_for(static_cast<int>(c)));
  return p;
}

void PairHessianSink::begin(int n_chains) {
  tables_.assign(static_cast<std::size_t>(n_chains), PairHessianTable(lm_.dim(), lm_.n(), lm_.lags()));
}

void PairHessianSink::record(int chain, const PathConfig& x) { tables_[chain].accumulate(lm_, x); }

PairHessianTable PairHessianSink::merged() const {
  PairHessianTable t(lm_.dim(), lm_.n(), lm_.lags());
  for (const auto& c : tables_) t.merge(c);
  return t;
}

}  // namespace pathgibbs
