// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "avatar/decorator.hpp"
#include "avatar/network.hpp"

namespace avatar {

struct StyleImage {
  Image image;
  float weight = 1.0f;
};

struct StylizeRequest {
  Image content;
  std::vector<StyleImage> styles;
  DecoratorConfig decorator;
  std::filesystem::path weights_path;
};

// Tolerance on sum(weights) == 1.
inline constexpr double kWeightSumTolerance = 1e-6;

// Throws ValidationError for an empty style list, negative or non-finite
// weights, or weights that do not sum to one.
void validate_style_weights(std::span<const float> weights);

// Extent a style image is resized to before encoding: upscaled (aspect
// preserved) so its short side is at least half the content's short side
// and large enough for one P x P patch at the bottleneck. Never downscales.
Extent style_extent_for(Extent style, Extent content, int patch_size);

// Everything derived from one style image for a given content extent.
struct PreparedStyle {
  DecoratorStyle decorator;
  FusionTargets fusion;
};

class Stylizer {
 public:
  explicit Stylizer(const NetworkWeights& weights);

  const Network& network() const { return net_; }

  PreparedStyle prepare_style(const Image& style, Extent content_extent,
                              const DecoratorConfig& cfg) const;

  // Decorated bottleneck z_cs = sum_k w_k * decorate(z_c, style_k).
  FeatureMap decorate_bottleneck(const FeatureMap& content_bottleneck,
                                 std::span<const PreparedStyle> styles,
                                 std::span<const float> weights,
                                 const DecoratorConfig& cfg) const;

  Image stylize(const Image& content, std::span<const PreparedStyle> styles,
                std::span<const float> weights, const DecoratorConfig& cfg) const;
  Image stylize(const Image& content, std::span<const StyleImage> styles,
                const DecoratorConfig& cfg) const;

  // Per-frame transfer; the style is prepared once and shared by all
  // frames. All frames must have the same extent.
  std::vector<Image> stylize_video(std::span<const Image> frames, const Image& style,
                                   const DecoratorConfig& cfg) const;

 private:
  Network net_;
};

// Loads the weights named in the request and runs one stylization.
Image stylize(const StylizeRequest& request);

std::vector<Image> stylize_video(std::span<const Image> frames, const Image& style,
                                 const DecoratorConfig& cfg,
                                 const std::filesystem::path& weights_path);

}  // namespace avatar
