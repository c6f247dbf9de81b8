// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace avatar {

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t element_count() const;
};

// Ordered name -> tensor container. Insertion order is the file order, so
// save(load(f)) reproduces f byte for byte.
class NetworkWeights {
 public:
  // Throws ConfigError on a duplicate name and ShapeError when data does
  // not match the shape.
  void add(std::string name, std::vector<std::uint32_t> shape, std::vector<float> data);

  bool contains(std::string_view name) const;
  const NamedTensor* find(std::string_view name) const;
  // Throws ConfigError naming the missing tensor.
  const NamedTensor& at(std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const NetworkWeights& a, const NetworkWeights& b);

 private:
  std::vector<NamedTensor> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

// AVTW1 layout, all integers little-endian:
//   "AVTW\n"            5 bytes magic
//   u32 version         = 1
//   u32 tensor count
//   per tensor: u16 name length, name bytes (UTF-8), u8 ndim,
//               ndim x u32 dims, prod(dims) x f32 values
inline constexpr char kWeightMagic[5] = {'A', 'V', 'T', 'W', '\n'};
inline constexpr std::uint32_t kWeightVersion = 1;

// Throws IoError when the file cannot be opened and FormatError on bad
// magic, unsupported version, truncation, duplicate names or trailing bytes.
NetworkWeights load_weights(const std::filesystem::path& path);
NetworkWeights parse_weights(std::string_view bytes);

void save_weights(const NetworkWeights& weights, const std::filesystem::path& path);
std::string serialize_weights(const NetworkWeights& weights);

}  // namespace avatar
