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

#ifndef THOUGHTNAV_CHECKPOINT_H_
#define THOUGHTNAV_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "thoughtnav/dueling_net.h"

namespace thoughtnav {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t episodes = 0;
};

struct Checkpoint {
  Navigator net;
  CheckpointMeta meta;
  std::uint32_t version = kCheckpointVersion;
};

// Binary layout, little-endian:
//   magic "TNAVCKPT" | u32 version | u32 h1 | u32 h2 | u64 seed |
//   u64 episodes | u64 n | n x f64 parameters (flatten() order) |
//   u64 FNV-1a of everything before it
// Throws DecodeError on truncation or corruption, VersionError on an unknown
// version tag.
std::string save_checkpoint(const Navigator& net, const CheckpointMeta& meta);
Checkpoint load_checkpoint(std::string_view bytes);

void write_checkpoint_file(const std::filesystem::path& path,
                           const Navigator& net, const CheckpointMeta& meta);
Checkpoint read_checkpoint_file(const std::filesystem::path& path);

}  // namespace thoughtnav

#endif  // THOUGHTNAV_CHECKPOINT_H_
