// Copyright 2026 The polarcast Authors
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

#ifndef POLARCAST__NUMCORE__CHECKPOINT_HPP_
#define POLARCAST__NUMCORE__CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "polarcast/numcore/graph.hpp"

namespace polarcast::nc
{

// Binary checkpoint layout, all integers and floats little-endian:
//
//   char[4]  magic "PCCK"
//   u32      format version (currently 1)
//   u32      metadata length, then that many bytes of UTF-8 JSON
//   u32      parameter count
//   per parameter, in registration order:
//     u32 name length, name bytes
//     u32 rank, u64 extent per axis
//     f64 value per element, row-major
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint
{
  std::string metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore & store, const std::string & metadata);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t> & bytes);

void save_checkpoint(
  const std::filesystem::path & path, const ParameterStore & store, const std::string & metadata);
Checkpoint load_checkpoint(const std::filesystem::path & path);

// Copy checkpoint values into a store with exactly the same names and shapes;
// throws ConfigError naming the first mismatch.
void restore(ParameterStore & store, const Checkpoint & ckpt);

}  // namespace polarcast::nc

#endif  // POLARCAST__NUMCORE__CHECKPOINT_HPP_
