// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "avatar/tensor.hpp"
#include "avatar/wct.hpp"

namespace avatar {

enum class BlendMode {
  NormalizedSpace,  // z̄_cs <- alpha * z̄_c + (1 - alpha) * z̄_cs, then reconstruct
  FeatureSpace,     // z_cs <- alpha * z_c + (1 - alpha) * z_cs after reconstruct
};

struct DecoratorConfig {
  int patch_size = 5;  // odd
  int stride = 1;      // style patch sampling stride
  TransformFlavor flavor = TransformFlavor::ZcaCov;
  double epsilon = kDefaultEpsilon;
  // Weight of the (normalized) content features in the blend. 0 keeps the
  // pure patch-reassembled features, 1 passes the content through.
  float alpha = 0.8f;
  BlendMode blend_mode = BlendMode::NormalizedSpace;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Bank of P x P x C patches sampled on a stride-S grid of valid top-left
// positions, row-major. Holds the raw patches for reassembly and an
// L2-normalized copy packed as convolution filters for matching.
class StyleKernel {
 public:
  StyleKernel(const FeatureMap& source, int patch_size, int stride);

  int patch_size() const { return patch_size_; }
  int stride() const { return stride_; }
  int channels() const { return channels_; }
  int count() const { return static_cast<int>(norms_.size()); }
  int grid_rows() const { return grid_rows_; }
  int grid_cols() const { return grid_cols_; }

  // Top-left corner of patch j in the source map.
  Extent origin(int j) const {
    return {(j / grid_cols_) * stride_, (j % grid_cols_) * stride_};
  }
  std::span<const float> patch(int j) const {
    const std::size_t len = patch_length();
    return {patches_.data() + static_cast<std::size_t>(j) * len, len};
  }
  std::span<const float> norms() const { return norms_; }
  std::size_t patch_length() const {
    return static_cast<std::size_t>(patch_size_) * patch_size_ * channels_;
  }

  // Raw patches as a (P, P, C, count) kernel: conv_transpose2d of a one-hot
  // map with this kernel stamps the selected patch.
  ConvKernel bank() const;
  const PackedConv& matching_filters() const { return matching_; }

 private:
  int patch_size_, stride_, channels_;
  int grid_rows_ = 0, grid_cols_ = 0;
  std::vector<float> patches_;  // count x P x P x C
  std::vector<float> norms_;
  PackedConv matching_;
};

// Norm floor applied before normalizing a style patch.
inline constexpr float kPatchNormFloor = 1e-12f;

// Throws ShapeError when P exceeds the map, ValidationError for an even or
// non-positive P or stride.
StyleKernel extract_style_kernel(const FeatureMap& normalized_style, int patch_size,
                                 int stride);

// For every content position (row-major, content reflect-101 padded by P/2)
// the index of the style patch with the largest normalized cross-correlation.
// Ties go to the lowest patch index.
std::vector<int> match_patches(const FeatureMap& content, const StyleKernel& kernel);

// Stamps patch selection[i] centred at content position i and averages the
// overlapping contributions of every cell.
FeatureMap reassemble(std::span<const int> selection, Extent content_extent,
                      const StyleKernel& kernel);

FeatureMap match_and_reassemble(const FeatureMap& content, const StyleKernel& kernel);

// Patch swap on raw features (no projection): the plain normalized
// cross-correlation baseline.
FeatureMap style_swap(const FeatureMap& content, const FeatureMap& style, int patch_size,
                      int stride = 1);

FeatureMap blend_normalized(const FeatureMap& content_normalized,
                            const FeatureMap& stylized_normalized, float alpha);
FeatureMap blend_features(const FeatureMap& content, const FeatureMap& stylized,
                          float alpha);

// Everything the decorator needs from one style map, computed once and
// reusable across many content maps (e.g. video frames).
struct DecoratorStyle {
  FeatureTransform transform;
  StyleKernel kernel;
};

DecoratorStyle prepare_decorator_style(const FeatureMap& style, const DecoratorConfig& cfg);

struct Decoration {
  FeatureMap features;
  std::vector<int> selection;  // matched style patch per content position
};

Decoration decorate(const FeatureMap& content, const DecoratorStyle& style,
                    const DecoratorConfig& cfg);

// project -> match & reassemble -> (blend) -> reconstruct.
FeatureMap style_decorate(const FeatureMap& content, const FeatureMap& style,
                          const DecoratorConfig& cfg);

}  // namespace avatar
