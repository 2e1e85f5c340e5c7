// Copyright 2026 The mpsgan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <type_traits>

#include "mpsgan/errors.hpp"
#include "mpsgan/mps.hpp"

namespace mpsgan {

// Layout (all integers and floats little-endian):
//   8 bytes   magic "MPSGAN\0\0"
//   u32       format version
//   u64 x4    C, N, D, d
//   u32       embedding kind
//   f64 x2    support lower, upper
//   f64 x (C·N·D·D·d)  delta tensor, index order (c, n, l, r, e)
//   u64       FNV-1a checksum of every preceding byte
inline constexpr std::string_view kModelMagic{"MPSGAN\0\0", 8};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
void put_le(std::string& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw FormatError("model file truncated");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>) {
      return std::bit_cast<double>(bits);
    } else {
      return static_cast<T>(bits);
    }
  }

  std::size_t position() const { return pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_model(const MpsEnsemble& m) {
  std::string out(kModelMagic);
  detail::put_le<std::uint32_t>(out, kModelFormatVersion);
  detail::put_le<std::uint64_t>(out, m.classes());
  detail::put_le<std::uint64_t>(out, m.sites());
  detail::put_le<std::uint64_t>(out, m.bond());
  detail::put_le<std::uint64_t>(out, m.phys());
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.embedding().kind()));
  detail::put_le<double>(out, m.embedding().lower());
  detail::put_le<double>(out, m.embedding().upper());
  for (double v : m.delta()) detail::put_le<double>(out, v);
  detail::put_le<std::uint64_t>(out, detail::fnv1a(out));
  return out;
}

inline MpsEnsemble deserialize_model(std::string_view bytes) {
  if (bytes.size() < kModelMagic.size() || bytes.substr(0, kModelMagic.size()) != kModelMagic) {
    throw FormatError("not a model file (bad magic)");
  }
  detail::ByteReader in(bytes.substr(kModelMagic.size()));
  const auto version = in.get<std::uint32_t>();
  if (version != kModelFormatVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version));
  }
  const auto classes = in.get<std::uint64_t>();
  const auto sites = in.get<std::uint64_t>();
  const auto bond = in.get<std::uint64_t>();
  const auto phys = in.get<std::uint64_t>();
  const auto kind = in.get<std::uint32_t>();
  const double lower = in.get<double>();
  const double upper = in.get<double>();
  if (kind > 3) throw FormatError("unknown embedding kind " + std::to_string(kind));
  if (classes < 2 || sites == 0 || bond == 0 || phys == 0 || bond > (1u << 16) ||
      phys > (1u << 16) || sites > (1u << 20) || classes > (1u << 20)) {
    throw FormatError("implausible model dimensions in header");
  }
  const std::size_t header = kModelMagic.size() + in.position();
  const std::size_t count = classes * sites * bond * bond * phys;
  const std::size_t expected = header + count * 8 + 8;
  if (bytes.size() != expected) {
    throw FormatError("model payload size " + std::to_string(bytes.size()) +
                      " does not match header dimensions (expected " + std::to_string(expected) +
                      ")");
  }
  const std::uint64_t stored = detail::ByteReader(bytes.substr(expected - 8)).get<std::uint64_t>();
  if (stored != detail::fnv1a(bytes.substr(0, expected - 8))) {
    throw FormatError("model checksum mismatch");
  }

  const Embedding embedding = [&] {
    try {
      return Embedding(static_cast<EmbeddingKind>(kind), phys);
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("invalid embedding in header: ") + e.what());
    }
  }();
  if (embedding.lower() != lower || embedding.upper() != upper) {
    throw FormatError("model support does not match embedding kind");
  }
  MpsEnsemble m(classes, sites, bond, embedding);
  for (double& v : m.delta()) v = in.get<double>();
  return m;
}

inline void save_model(const MpsEnsemble& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
  const std::string bytes = serialize_model(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

inline MpsEnsemble load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace mpsgan
