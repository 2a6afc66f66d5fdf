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

#include "polarcast/numcore/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "polarcast/error.hpp"

namespace polarcast::nc
{
namespace
{

constexpr char kMagic[4] = {'P', 'C', 'C', 'K'};

template <class T>
void put(std::vector<std::uint8_t> & out, T v)
{
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xFF));
  }
}

class Reader
{
public:
  explicit Reader(const std::vector<std::uint8_t> & b) : bytes_(b) {}

  template <class T>
  T get(const char * what)
  {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw ParseError(
        std::string("checkpoint: truncated while reading ") + what + " at byte " +
        std::to_string(pos_));
    }
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string get_string(std::size_t n, const char * what)
  {
    if (pos_ + n > bytes_.size()) {
      throw ParseError(
        std::string("checkpoint: truncated while reading ") + what + " at byte " +
        std::to_string(pos_));
    }
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

private:
  const std::vector<std::uint8_t> & bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ParameterStore & store, const std::string & metadata)
{
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(metadata.size()));
  out.insert(out.end(), metadata.begin(), metadata.end());
  const auto params = store.all();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto * p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.insert(out.end(), p->name.begin(), p->name.end());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) {
      put<std::uint64_t>(out, d);
    }
    for (double v : p->value.values()) {
      put<double>(out, v);
    }
  }
  return out;
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t> & bytes)
{
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("checkpoint: bad magic, not a checkpoint file");
  }
  std::vector<std::uint8_t> rest(bytes.begin() + 4, bytes.end());
  Reader r(rest);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ck;
  const auto meta_len = r.get<std::uint32_t>("metadata length");
  ck.metadata = r.get_string(meta_len, "metadata");
  const auto count = r.get<std::uint32_t>("parameter count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>("name length");
    std::string name = r.get_string(name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) {
      throw ParseError("checkpoint: implausible rank " + std::to_string(rank) + " for '" + name + "'");
    }
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::size_t>(r.get<std::uint64_t>("extent")));
    }
    const std::size_t n = shape_numel(shape);
    if (n > rest.size() / 8) {
      throw ParseError("checkpoint: tensor '" + name + "' larger than file");
    }
    std::vector<double> data(n);
    for (auto & v : data) {
      v = r.get<double>("values");
    }
    ck.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) {
    throw ParseError("checkpoint: trailing bytes after last tensor");
  }
  return ck;
}

void save_checkpoint(
  const std::filesystem::path & path, const ParameterStore & store, const std::string & metadata)
{
  const auto bytes = encode_checkpoint(store, metadata);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw Error("checkpoint: cannot open '" + path.string() + "' for writing");
  }
  os.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) {
    throw Error("checkpoint: write failed for '" + path.string() + "'");
  }
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error("checkpoint: cannot open '" + path.string() + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void restore(ParameterStore & store, const Checkpoint & ckpt)
{
  if (ckpt.tensors.size() != store.size()) {
    throw ConfigError(
      "checkpoint has " + std::to_string(ckpt.tensors.size()) + " tensors, model expects " +
      std::to_string(store.size()));
  }
  for (const auto & [name, t] : ckpt.tensors) {
    Parameter * p = store.find(name);
    if (!p) {
      throw ConfigError("checkpoint tensor '" + name + "' has no matching model parameter");
    }
    if (p->value.shape() != t.shape()) {
      throw ConfigError(
        "checkpoint tensor '" + name + "' has shape " + shape_str(t.shape()) + ", model expects " +
        shape_str(p->value.shape()));
    }
    p->value = t;
  }
}

}  // namespace polarcast::nc
