// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace avatar {

struct Extent {
  int height = 0;
  int width = 0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

// Dense H x W x C activation tensor, row-major with channels innermost:
// element (y, x, c) lives at ((y * W) + x) * C + c.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int height, int width, int channels, float fill = 0.0f);
  FeatureMap(int height, int width, int channels, std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  Extent extent() const { return {height_, width_}; }
  std::size_t cells() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  const float& at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  // Channel vector of one spatial cell.
  std::span<float> cell(int y, int x) {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }
  std::span<const float> cell(int y, int x) const {
    return {data_.data() + index(y, x, 0), static_cast<std::size_t>(channels_)};
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }

  bool same_shape(const FeatureMap& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

// 2-D convolution filter bank. Weights are laid out (kh, kw, in, out)
// row-major, the same order as the AVTW1 weight file.
struct ConvKernel {
  int kh = 0;
  int kw = 0;
  int in_channels = 0;
  int out_channels = 0;
  std::vector<float> weights;
  std::vector<float> bias;  // empty or out_channels long

  ConvKernel() = default;
  ConvKernel(int kh, int kw, int in_channels, int out_channels);
  ConvKernel(int kh, int kw, int in_channels, int out_channels,
             std::vector<float> weights, std::vector<float> bias = {});

  float& weight(int ky, int kx, int ci, int co) {
    return weights[((static_cast<std::size_t>(ky) * kw + kx) * in_channels + ci) *
                       out_channels + co];
  }
  float weight(int ky, int kx, int ci, int co) const {
    return weights[((static_cast<std::size_t>(ky) * kw + kx) * in_channels + ci) *
                       out_channels + co];
  }
  bool has_bias() const { return !bias.empty(); }

  // Throws ShapeError when the buffers disagree with the declared shape.
  void validate() const;
};

enum class PadMode { Zero, Reflect };

struct PaddingSpec {
  PadMode mode = PadMode::Zero;
  int amount = 0;

  static PaddingSpec none() { return {PadMode::Zero, 0}; }
  static PaddingSpec zero(int n) { return {PadMode::Zero, n}; }
  static PaddingSpec reflect(int n) { return {PadMode::Reflect, n}; }
};

// A ConvKernel repacked into 16-wide output-channel panels for the GEMM
// micro-kernel. Build once and reuse when the same filters are applied to
// many inputs (network layers, style kernels).
class PackedConv {
 public:
  static constexpr int kPanel = 16;

  explicit PackedConv(const ConvKernel& kernel);

  int kh() const { return kh_; }
  int kw() const { return kw_; }
  int in_channels() const { return in_; }
  int out_channels() const { return out_; }

  // Valid (unpadded) convolution of an already padded input.
  FeatureMap apply(const FeatureMap& padded, int stride) const;

 private:
  int kh_, kw_, in_, out_;
  std::vector<float> panels_;  // [panel][tap][in][kPanel]
  std::vector<float> bias_;    // padded to a whole number of panels
};

FeatureMap conv2d(const FeatureMap& input, const ConvKernel& kernel, int stride,
                  PaddingSpec padding);
FeatureMap conv2d(const FeatureMap& input, const PackedConv& kernel, int stride,
                  PaddingSpec padding);

// Adjoint of a valid conv2d with the same kernel and stride: input carries
// kernel.out_channels channels and the output has kernel.in_channels.
// Output extent is ((H - 1) * stride + kh) x ((W - 1) * stride + kw).
FeatureMap conv_transpose2d(const FeatureMap& input, const ConvKernel& kernel,
                            int stride);

// 2x2 max pooling with stride 2. Odd heights/widths are first extended by
// replicating the last row/column, so the output is ceil(H/2) x ceil(W/2).
FeatureMap max_pool2(const FeatureMap& input);

FeatureMap nearest_upsample2(const FeatureMap& input);

// reflect-101 padding (the edge cell is not repeated). Requires
// pad < min(height, width).
FeatureMap reflect_pad(const FeatureMap& input, int pad);
FeatureMap zero_pad(const FeatureMap& input, int pad);
FeatureMap pad(const FeatureMap& input, PaddingSpec spec);

// Top-left crop to the given extent (must not exceed the input).
FeatureMap crop(const FeatureMap& input, Extent extent);

void relu_inplace(FeatureMap& map);
void clamp_inplace(FeatureMap& map, float lo, float hi);

// a * x + b * y, elementwise.
FeatureMap axpby(float a, const FeatureMap& x, float b, const FeatureMap& y);

bool all_finite(const FeatureMap& map);

}  // namespace avatar
