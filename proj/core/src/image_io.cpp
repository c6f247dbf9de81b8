// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "avatar/errors.hpp"

namespace avatar {

Image decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw FormatError(std::string("cannot decode PNG: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw FormatError(std::string("cannot decode PNG: ") + img.message);
  }
  Image out(static_cast<int>(img.height), static_cast<int>(img.width), 3);
  auto values = out.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<float>(pixels[i]) / 255.0f;
  }
  return out;
}

Image read_png(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.channels() != 3) {
    throw ShapeError("PNG output needs 3 channels, got " + std::to_string(image.channels()));
  }
  std::vector<std::uint8_t> pixels(image.size());
  const auto values = image.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = std::clamp(values[i], 0.0f, 1.0f);
    pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }

  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGB;

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw FormatError(std::string("cannot encode PNG: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw FormatError(std::string("cannot encode PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  const auto bytes = encode_png(image);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot create image " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("error writing image " + path.string());
}

Image resize_bilinear(const Image& image, Extent extent) {
  if (extent.height <= 0 || extent.width <= 0) {
    throw ShapeError("resize target must be positive");
  }
  if (extent == image.extent()) return image;
  const int c = image.channels();
  Image out(extent.height, extent.width, c);
  const float sy = static_cast<float>(image.height()) / extent.height;
  const float sx = static_cast<float>(image.width()) / extent.width;
  for (int y = 0; y < extent.height; ++y) {
    const float fy = std::max(0.0f, (y + 0.5f) * sy - 0.5f);
    const int y0 = std::min(static_cast<int>(fy), image.height() - 1);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const float wy = fy - y0;
    for (int x = 0; x < extent.width; ++x) {
      const float fx = std::max(0.0f, (x + 0.5f) * sx - 0.5f);
      const int x0 = std::min(static_cast<int>(fx), image.width() - 1);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const float wx = fx - x0;
      for (int ch = 0; ch < c; ++ch) {
        const float top = image.at(y0, x0, ch) * (1 - wx) + image.at(y0, x1, ch) * wx;
        const float bottom = image.at(y1, x0, ch) * (1 - wx) + image.at(y1, x1, ch) * wx;
        out.at(y, x, ch) = top * (1 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

}  // namespace avatar
