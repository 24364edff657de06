/*
 * Copyright 2026 The Signet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "signet/config.hpp"
#include "signet/error.hpp"
#include "signet/training.hpp"

namespace signet {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'S', 'I', 'G', 'N', 'E', 'T', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Checkpoint layout (little-endian):
//   magic[8] version:u32 config_digest:u64
//   config_text_len:u32 config_text
//   epoch:u32 best_epoch:u32 best_validation_loss:f64
//   n_params:u32 { name_len:u32 name rank:u32 dims:u64[rank] }   shape manifest
//   parameter values: f64[]                                       manifest order
//   adam: step:u64 lr b1 b2 eps wd clip:f64 has_moments:u8 [m f64[] v f64[]]
//   checksum:u64 (FNV-1a of every preceding byte)
namespace detail {

class ByteWriter {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }
  void put_string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes_.append(s);
  }
  void put_doubles(const std::vector<double>& v) {
    for (double d : v) put(d);
  }
  std::string& bytes() { return bytes_; }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(const char* what) {
    auto n = get<std::uint32_t>(what);
    need(n, what);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void get_doubles(std::vector<double>& out, const char* what) {
    need(out.size() * sizeof(double), what);
    std::memcpy(out.data(), bytes_.data() + pos_, out.size() * sizeof(double));
    pos_ += out.size() * sizeof(double);
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what);
    }
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_checkpoint(const ModelState& s) {
  detail::ByteWriter w;
  w.bytes().append(kCheckpointMagic, sizeof kCheckpointMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(config_digest(s.config));
  w.put_string(to_text(s.config));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.epoch));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.best_epoch));
  w.put<double>(s.best_validation_loss);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.params.size()));
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    w.put_string(s.params.names()[i]);
    const Shape& shape = s.params[i].shape();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) w.put<std::uint64_t>(d);
  }
  for (const Tensor& t : s.params.values()) w.put_doubles(t.values());
  const AdamState& a = s.optimizer;
  w.put<std::uint64_t>(a.step);
  for (double v : {a.options.learning_rate, a.options.beta1, a.options.beta2, a.options.epsilon,
                   a.options.weight_decay, a.options.clip_norm}) {
    w.put(v);
  }
  const bool has_moments = !a.m.empty();
  w.put<std::uint8_t>(has_moments ? 1 : 0);
  if (has_moments) {
    if (a.m.size() != s.params.size() || a.v.size() != s.params.size()) {
      throw ShapeError("optimizer moments do not mirror the parameters");
    }
    for (const Tensor& t : a.m) w.put_doubles(t.values());
    for (const Tensor& t : a.v) w.put_doubles(t.values());
  }
  w.put<std::uint64_t>(fnv1a(w.bytes()));
  return std::move(w.bytes());
}

inline ModelState deserialize_checkpoint(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < sizeof kCheckpointMagic || std::memcmp(bytes.data(), kCheckpointMagic, sizeof kCheckpointMagic)) {
    throw ParseError("not a signet checkpoint (bad magic)");
  }
  for (std::size_t i = 0; i < sizeof kCheckpointMagic; ++i) r.get<char>("magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                     std::to_string(kCheckpointVersion) + ")");
  }
  if (bytes.size() < sizeof kCheckpointMagic + 4 + 8) throw ParseError("checkpoint truncated");
  const std::uint64_t stored_sum = [&] {
    if (bytes.size() < 8) throw ParseError("checkpoint truncated");
    std::uint64_t v;
    std::memcpy(&v, bytes.data() + bytes.size() - 8, 8);
    return v;
  }();

  ModelState s;
  const auto digest = r.get<std::uint64_t>("config digest");
  s.config = parse_config_text(r.get_string("config text"));
  if (config_digest(s.config) != digest) throw ParseError("checkpoint config digest mismatch");
  s.epoch = static_cast<int>(r.get<std::uint32_t>("epoch"));
  s.best_epoch = static_cast<int>(r.get<std::uint32_t>("best epoch"));
  s.best_validation_loss = r.get<double>("best validation loss");

  const auto n = r.get<std::uint32_t>("parameter count");
  std::vector<std::pair<std::string, Shape>> manifest;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.get_string("parameter name");
    const auto rank = r.get<std::uint32_t>("parameter rank");
    if (rank > 2) throw ParseError("parameter '" + name + "' has unsupported rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>("dimension")));
    manifest.emplace_back(std::move(name), std::move(shape));
  }
  std::vector<Tensor> values;
  for (const auto& [name, shape] : manifest) {
    if (shape_size(shape) > bytes.size()) throw ParseError("checkpoint truncated while reading parameter values");
    Tensor t(shape);
    r.get_doubles(t.values(), "parameter values");
    values.push_back(std::move(t));
  }
  AdamState& a = s.optimizer;
  a.step = r.get<std::uint64_t>("optimizer step");
  a.options.learning_rate = r.get<double>("optimizer options");
  a.options.beta1 = r.get<double>("optimizer options");
  a.options.beta2 = r.get<double>("optimizer options");
  a.options.epsilon = r.get<double>("optimizer options");
  a.options.weight_decay = r.get<double>("optimizer options");
  a.options.clip_norm = r.get<double>("optimizer options");
  if (r.get<std::uint8_t>("optimizer flags")) {
    for (auto* buf : {&a.m, &a.v}) {
      for (const auto& [name, shape] : manifest) {
        Tensor t(shape);
        r.get_doubles(t.values(), "optimizer moments");
        buf->push_back(std::move(t));
      }
    }
  }
  const std::size_t body = r.position();
  r.get<std::uint64_t>("checksum");
  if (r.position() != bytes.size()) throw ParseError("trailing bytes after checkpoint");
  if (fnv1a(bytes.substr(0, body)) != stored_sum) throw ParseError("checkpoint checksum mismatch");

  for (std::size_t i = 0; i < manifest.size(); ++i) s.params.add(manifest[i].first, std::move(values[i]));
  return s;
}

inline void save_checkpoint(const ModelState& s, const std::string& path) {
  const std::string bytes = serialize_checkpoint(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

inline ModelState load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace signet
