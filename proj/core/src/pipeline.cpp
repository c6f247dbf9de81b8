// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avatar/errors.hpp"
#include "avatar/image_io.hpp"

namespace avatar {
namespace {

// Encoder downsampling factor between the image and the bottleneck.
constexpr int kBottleneckStride = 8;

// Smallest image side whose bottleneck side is at least `cells`.
int min_side_for(int cells) { return kBottleneckStride * (cells - 1) + 1; }

void check_content_extent(Extent content, int patch_size) {
  // The decoder's first 3x3 reflect pad needs two bottleneck cells, the
  // matcher's reflect pad needs P/2 + 1.
  const int need = min_side_for(std::max(2, patch_size / 2 + 1));
  if (std::min(content.height, content.width) < need) {
    throw ValidationError("content image " + std::to_string(content.height) + "x" +
                          std::to_string(content.width) + " too small: patch size " +
                          std::to_string(patch_size) + " needs a short side of at least " +
                          std::to_string(need));
  }
}

}  // namespace

void validate_style_weights(std::span<const float> weights) {
  if (weights.empty()) throw ValidationError("at least one style image is required");
  double sum = 0.0;
  for (float w : weights) {
    if (!std::isfinite(w) || w < 0.0f) {
      throw ValidationError("style weights must be finite and non-negative, got " +
                            std::to_string(w));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    throw ValidationError("style weights must sum to 1, got " + std::to_string(sum));
  }
}

Extent style_extent_for(Extent style, Extent content, int patch_size) {
  const int short_side = std::min(style.height, style.width);
  const int content_short = std::min(content.height, content.width);
  const int need = std::max((content_short + 1) / 2, min_side_for(patch_size));
  if (short_side >= need) return style;
  const double scale = static_cast<double>(need) / short_side;
  return {std::max(need, static_cast<int>(std::ceil(style.height * scale))),
          std::max(need, static_cast<int>(std::ceil(style.width * scale)))};
}

Stylizer::Stylizer(const NetworkWeights& weights) : net_(weights) {}

PreparedStyle Stylizer::prepare_style(const Image& style, Extent content_extent,
                                      const DecoratorConfig& cfg) const {
  cfg.validate();
  const Extent target = style_extent_for(style.extent(), content_extent, cfg.patch_size);
  const Image resized = resize_bilinear(style, target);
  const auto enc = net_.encode(resized);
  return {prepare_decorator_style(enc.bottleneck, cfg), fusion_targets(enc.skips)};
}

FeatureMap Stylizer::decorate_bottleneck(const FeatureMap& content_bottleneck,
                                         std::span<const PreparedStyle> styles,
                                         std::span<const float> weights,
                                         const DecoratorConfig& cfg) const {
  if (styles.size() != weights.size()) {
    throw ValidationError("got " + std::to_string(styles.size()) + " styles and " +
                          std::to_string(weights.size()) + " weights");
  }
  validate_style_weights(weights);
  FeatureMap mixed;
  for (std::size_t k = 0; k < styles.size(); ++k) {
    const FeatureMap z = decorate(content_bottleneck, styles[k].decorator, cfg).features;
    if (k == 0) {
      mixed = axpby(weights[0], z, 0.0f, z);
    } else {
      mixed = axpby(1.0f, mixed, weights[k], z);
    }
  }
  return mixed;
}

Image Stylizer::stylize(const Image& content, std::span<const PreparedStyle> styles,
                        std::span<const float> weights, const DecoratorConfig& cfg) const {
  check_content_extent(content.extent(), cfg.patch_size);
  const auto enc = net_.encode(content);
  const FeatureMap z = decorate_bottleneck(enc.bottleneck, styles, weights, cfg);

  // Convex combination of the per-style fused outputs equals fusion with
  // the weighted moments, since fusion is affine in (mean, std).
  FusionTargets targets;
  for (int l = 0; l < kSkipLevels; ++l) {
    const int c = styles[0].fusion[l].channels();
    targets[l].mean.assign(c, 0.0f);
    targets[l].std.assign(c, 0.0f);
    for (std::size_t k = 0; k < styles.size(); ++k) {
      for (int ch = 0; ch < c; ++ch) {
        targets[l].mean[ch] += weights[k] * styles[k].fusion[l].mean[ch];
        targets[l].std[ch] += weights[k] * styles[k].fusion[l].std[ch];
      }
    }
  }
  return net_.decode(z, targets, enc.extents());
}

Image Stylizer::stylize(const Image& content, std::span<const StyleImage> styles,
                        const DecoratorConfig& cfg) const {
  cfg.validate();
  std::vector<float> weights;
  for (const auto& s : styles) weights.push_back(s.weight);
  validate_style_weights(weights);
  check_content_extent(content.extent(), cfg.patch_size);

  std::vector<PreparedStyle> prepared;
  prepared.reserve(styles.size());
  for (const auto& s : styles) prepared.push_back(prepare_style(s.image, content.extent(), cfg));
  return stylize(content, prepared, weights, cfg);
}

std::vector<Image> Stylizer::stylize_video(std::span<const Image> frames, const Image& style,
                                           const DecoratorConfig& cfg) const {
  if (frames.empty()) throw ValidationError("video needs at least one frame");
  const Extent extent = frames.front().extent();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].extent() != extent) {
      throw ValidationError("frame " + std::to_string(i) + " is " +
                            std::to_string(frames[i].height()) + "x" +
                            std::to_string(frames[i].width()) + ", expected " +
                            std::to_string(extent.height) + "x" +
                            std::to_string(extent.width));
    }
  }
  check_content_extent(extent, cfg.patch_size);
  const PreparedStyle prepared = prepare_style(style, extent, cfg);
  const float weight = 1.0f;

  std::vector<Image> out;
  out.reserve(frames.size());
  for (const auto& frame : frames) {
    out.push_back(stylize(frame, std::span(&prepared, 1), std::span(&weight, 1), cfg));
  }
  return out;
}

Image stylize(const StylizeRequest& request) {
  request.decorator.validate();
  std::vector<float> weights;
  for (const auto& s : request.styles) weights.push_back(s.weight);
  validate_style_weights(weights);
  const Stylizer stylizer(load_weights(request.weights_path));
  return stylizer.stylize(request.content, request.styles, request.decorator);
}

std::vector<Image> stylize_video(std::span<const Image> frames, const Image& style,
                                 const DecoratorConfig& cfg,
                                 const std::filesystem::path& weights_path) {
  cfg.validate();
  const Stylizer stylizer(load_weights(weights_path));
  return stylizer.stylize_video(frames, style, cfg);
}

}  // namespace avatar
