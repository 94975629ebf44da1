// Copyright 2026 The thoughtnav Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "thoughtnav/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "thoughtnav/errors.h"

namespace thoughtnav {
namespace {

constexpr std::string_view kMagic = "TNAVCKPT";
static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* field) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw DecodeError(fmt::format(
          "checkpoint truncated while reading {} at byte {}", field, pos_));
    }
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string save_checkpoint(const Navigator& net, const CheckpointMeta& meta) {
  const NetWidths w = net.widths();
  const Eigen::VectorXd flat = flatten(net);
  std::string out(kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w.hidden1));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(w.hidden2));
  put<std::uint64_t>(out, meta.seed);
  put<std::uint64_t>(out, meta.episodes);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(flat.size()));
  for (Eigen::Index i = 0; i < flat.size(); ++i) put<double>(out, flat(i));
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

Checkpoint load_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() ||
      bytes.substr(0, kMagic.size()) != kMagic) {
    throw DecodeError("not a checkpoint: bad magic");
  }
  Reader r(bytes.substr(kMagic.size()));
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw VersionError(fmt::format("unsupported checkpoint version {} (expected {})",
                                   version, kCheckpointVersion));
  }
  const auto h1 = r.get<std::uint32_t>("hidden1");
  const auto h2 = r.get<std::uint32_t>("hidden2");
  Checkpoint ck;
  ck.version = version;
  ck.meta.seed = r.get<std::uint64_t>("seed");
  ck.meta.episodes = r.get<std::uint64_t>("episodes");
  const auto n = r.get<std::uint64_t>("parameter count");
  if (h1 == 0 || h2 == 0 || h1 > 1'000'000 || h2 > 1'000'000) {
    throw DecodeError(fmt::format("implausible widths ({}, {})", h1, h2));
  }
  const NetWidths widths{static_cast<int>(h1), static_cast<int>(h2)};
  if (n != static_cast<std::uint64_t>(parameter_count(widths))) {
    throw DecodeError(fmt::format("parameter count {} does not match widths", n));
  }
  if (r.remaining() < n * sizeof(double)) {
    throw DecodeError("checkpoint truncated inside the parameter block");
  }
  Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = r.get<double>("parameter");
  const std::size_t payload_end = kMagic.size() + r.pos();
  const auto checksum = r.get<std::uint64_t>("checksum");
  if (checksum != fnv1a(bytes.substr(0, payload_end))) {
    throw DecodeError("checkpoint checksum mismatch");
  }
  if (r.remaining() != 0) throw DecodeError("trailing bytes after checkpoint");
  ck.net = Navigator::zeros(widths);
  unflatten(flat, ck.net);
  return ck;
}

void write_checkpoint_file(const std::filesystem::path& path,
                           const Navigator& net, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  const std::string bytes = save_checkpoint(net, meta);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError(fmt::format("cannot read {}", path.string()));
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return load_checkpoint(bytes);
}

}  // namespace thoughtnav
