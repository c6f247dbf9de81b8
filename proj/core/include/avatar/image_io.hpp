// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "avatar/network.hpp"

namespace avatar {

// 8-bit PNG <-> [0, 1] RGB. Reading maps byte v to v / 255 exactly; gray,
// palette, alpha and 16-bit inputs are converted to 8-bit RGB first.
// Writing clamps to [0, 1] and stores round(v * 255).
Image read_png(const std::filesystem::path& path);
Image decode_png(const std::vector<std::uint8_t>& bytes);
void write_png(const std::filesystem::path& path, const Image& image);
std::vector<std::uint8_t> encode_png(const Image& image);

// Bilinear resampling with half-pixel centres.
Image resize_bilinear(const Image& image, Extent extent);

}  // namespace avatar
