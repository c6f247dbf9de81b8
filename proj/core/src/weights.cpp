// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "avatar/errors.hpp"

namespace avatar {
namespace {

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::string_view take(std::size_t n, const char* what) {
    if (n > remaining()) {
      throw FormatError(std::string("weight file truncated while reading ") + what);
    }
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T read_le(const char* what) {
    const auto raw = take(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<unsigned char>(raw[i])) << (8 * i);
    }
    return value;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void write_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

}  // namespace

std::size_t NamedTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void NetworkWeights::add(std::string name, std::vector<std::uint32_t> shape,
                         std::vector<float> data) {
  if (index_.contains(name)) throw ConfigError("duplicate tensor name '" + name + "'");
  NamedTensor t{std::move(name), std::move(shape), std::move(data)};
  if (t.shape.empty()) throw ShapeError("tensor '" + t.name + "' has no dimensions");
  for (auto d : t.shape) {
    if (d == 0) throw ShapeError("tensor '" + t.name + "' has a zero dimension");
  }
  if (t.element_count() != t.data.size()) {
    throw ShapeError("tensor '" + t.name + "' shape holds " +
                     std::to_string(t.element_count()) + " values, data has " +
                     std::to_string(t.data.size()));
  }
  index_.emplace(t.name, entries_.size());
  entries_.push_back(std::move(t));
}

bool NetworkWeights::contains(std::string_view name) const {
  return find(name) != nullptr;
}

const NamedTensor* NetworkWeights::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

const NamedTensor& NetworkWeights::at(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw ConfigError("missing weight tensor '" + std::string(name) + "'");
}

bool operator==(const NetworkWeights& a, const NetworkWeights& b) {
  if (a.entries_.size() != b.entries_.size()) return false;
  for (std::size_t i = 0; i < a.entries_.size(); ++i) {
    const auto& x = a.entries_[i];
    const auto& y = b.entries_[i];
    if (x.name != y.name || x.shape != y.shape || x.data.size() != y.data.size()) {
      return false;
    }
    if (std::memcmp(x.data.data(), y.data.data(), x.data.size() * sizeof(float)) != 0) {
      return false;
    }
  }
  return true;
}

NetworkWeights parse_weights(std::string_view bytes) {
  Reader in(bytes);
  const auto magic = in.take(sizeof(kWeightMagic), "magic");
  if (std::memcmp(magic.data(), kWeightMagic, sizeof(kWeightMagic)) != 0) {
    throw FormatError("not an AVTW weight file (bad magic)");
  }
  const auto version = in.read_le<std::uint32_t>("version");
  if (version != kWeightVersion) {
    throw FormatError("unsupported AVTW version " + std::to_string(version));
  }
  const auto count = in.read_le<std::uint32_t>("tensor count");

  NetworkWeights weights;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = in.read_le<std::uint16_t>("name length");
    std::string name(in.take(name_len, "tensor name"));
    const auto ndim = in.read_le<std::uint8_t>("ndim");
    if (ndim == 0) throw FormatError("tensor '" + name + "' has ndim 0");

    std::vector<std::uint32_t> shape(ndim);
    std::uint64_t elements = 1;
    for (auto& d : shape) {
      d = in.read_le<std::uint32_t>("dims");
      if (d == 0) throw FormatError("tensor '" + name + "' has a zero dimension");
      elements *= d;
      // Validate against the bytes actually present before allocating.
      if (elements > in.remaining() / sizeof(float)) {
        throw FormatError("weight file truncated: tensor '" + name + "' needs more data");
      }
    }
    const auto payload = in.take(elements * sizeof(float), "tensor data");
    std::vector<float> data(elements);
    for (std::size_t k = 0; k < elements; ++k) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[k * 4 + b]))
                << (8 * b);
      }
      data[k] = std::bit_cast<float>(bits);
    }
    if (weights.contains(name)) {
      throw FormatError("duplicate tensor name '" + name + "' in weight file");
    }
    weights.add(std::move(name), std::move(shape), std::move(data));
  }
  if (in.remaining() != 0) {
    throw FormatError("weight file has " + std::to_string(in.remaining()) +
                      " trailing bytes");
  }
  return weights;
}

NetworkWeights load_weights(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open weight file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (file.bad()) throw IoError("error reading weight file " + path.string());
  return parse_weights(bytes);
}

std::string serialize_weights(const NetworkWeights& weights) {
  std::string out(kWeightMagic, sizeof(kWeightMagic));
  write_le<std::uint32_t>(out, kWeightVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(weights.size()));
  for (const auto& t : weights) {
    if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("tensor name too long: " + t.name.substr(0, 32) + "...");
    }
    if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
      throw FormatError("tensor '" + t.name + "' has too many dimensions");
    }
    write_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (auto d : t.shape) write_le<std::uint32_t>(out, d);
    for (float v : t.data) write_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path) {
  const auto bytes = serialize_weights(weights);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create weight file " + path.string());
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("error writing weight file " + path.string());
}

}  // namespace avatar
