// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avatar/tensor.hpp"
#include "avatar/wct.hpp"
#include "avatar/weights.hpp"

namespace avatar {

// RGB image, values in [0, 1], stored as an H x W x 3 feature map.
using Image = FeatureMap;

// Number of encoder scales with a shortcut into the decoder (conv1_1,
// conv2_1, conv3_1).
inline constexpr int kSkipLevels = 3;

enum class LayerKind {
  Conv,      // 3x3 (or kh x kw from the weights) convolution
  Pool,      // 2x2 max pooling
  Upsample,  // nearest x2, cropped back to the matching encoder scale
  Fuse,      // style fusion with the shortcut of `level`
};

struct LayerDesc {
  LayerKind kind = LayerKind::Conv;
  std::string name;       // weight prefix, e.g. "enc.conv1_1"
  int out_channels = 0;   // reference VGG-19 width
  bool relu = true;
  int level = 0;          // Fuse/Upsample: target scale 1..3; Conv: skip tap level or 0
};

// Layer tables of the hourglass. The encoder is VGG-19 up to conv4_1 with
// shortcut taps after relu1_1, relu2_1 and relu3_1; the decoder mirrors it
// with nearest upsampling, reflect padding and style fusion on arrival at
// each shortcut scale.
struct LayerSpec {
  std::vector<LayerDesc> encoder;
  std::vector<LayerDesc> decoder;

  static const LayerSpec& hourglass();
};

// Input normalisation stored in the weight file as "meta.preprocess":
// [scale, bgr_flag, mean0, mean1, mean2], means in network channel order.
struct Preprocess {
  float scale = 255.0f;
  bool bgr = true;
  std::array<float, 3> mean{103.939f, 116.779f, 123.68f};

  static Preprocess from_weights(const NetworkWeights& weights);
  std::vector<float> to_tensor() const;
  FeatureMap apply(const Image& rgb) const;
};

inline constexpr const char* kPreprocessTensor = "meta.preprocess";

struct EncodeResult {
  FeatureMap bottleneck;                        // relu4_1
  std::array<FeatureMap, kSkipLevels> skips;    // relu1_1, relu2_1, relu3_1

  // Spatial extent of scale l (1-based); the decoder crops back to these.
  Extent scale_extent(int level) const { return skips[level - 1].extent(); }
  std::array<Extent, kSkipLevels> extents() const {
    return {skips[0].extent(), skips[1].extent(), skips[2].extent()};
  }
};

// Per-scale fusion statistics for the decoder.
using FusionTargets = std::array<ChannelMoments, kSkipLevels>;

// Channel-moment transfer: sigma(e) * (d - mu(d)) / sigma(d) + mu(e), with
// sigma = sqrt(var + 1e-5). Only e's channel moments are used, so its
// spatial size may differ from d's.
FeatureMap style_fusion(const FeatureMap& decoded, const FeatureMap& encoded);
FeatureMap style_fusion(const FeatureMap& decoded, const ChannelMoments& target);

FusionTargets fusion_targets(std::span<const FeatureMap> skips);

// Forward-only hourglass with weights packed once at construction.
class Network {
 public:
  // Throws ConfigError naming the first missing or mis-shaped tensor.
  explicit Network(const NetworkWeights& weights);

  EncodeResult encode(const Image& image) const;

  // Decodes a bottleneck feature. `targets` drive the style fusion at
  // scales 3, 2, 1 and `extents` give the spatial size of each scale.
  Image decode(const FeatureMap& bottleneck, const FusionTargets& targets,
               const std::array<Extent, kSkipLevels>& extents) const;
  // Fusion statistics and extents both taken from `skips`.
  Image decode(const FeatureMap& bottleneck, std::span<const FeatureMap> skips) const;

  // Decoder output before the final clamp to [0, 1].
  FeatureMap decode_linear(const FeatureMap& bottleneck, const FusionTargets& targets,
                           const std::array<Extent, kSkipLevels>& extents) const;

  // Encode followed by decode with the image's own shortcuts.
  Image reconstruct_image(const Image& image) const;

  const Preprocess& preprocess() const { return preprocess_; }
  std::array<int, kSkipLevels> skip_channels() const { return skip_channels_; }
  int bottleneck_channels() const { return bottleneck_channels_; }

 private:
  struct Layer {
    LayerDesc desc;
    PackedConv conv;
  };
  struct Stage {
    LayerDesc desc;
    int conv_index = -1;
  };

  Preprocess preprocess_;
  std::vector<Layer> convs_;
  std::vector<Stage> encoder_;
  std::vector<Stage> decoder_;
  std::array<int, kSkipLevels> skip_channels_{};
  int bottleneck_channels_ = 0;
};

EncodeResult encode(const Image& image, const NetworkWeights& weights);
Image decode(const FeatureMap& bottleneck, std::span<const FeatureMap> style_skips,
             const NetworkWeights& weights);
Image reconstruct_image(const Image& image, const NetworkWeights& weights);

struct RandomWeightsOptions {
  std::uint64_t seed = 0;
  // Every VGG width is divided by this (>= 1) for small test networks.
  int width_divisor = 1;
  // Rescale the output convolution so a noise image decodes to roughly
  // mean 0.5 / std 0.2 instead of saturating the clamp.
  bool calibrate_output = true;
};

// He-initialised weights for the full layer table plus meta.preprocess.
// Deterministic for a given options value.
NetworkWeights make_random_weights(const RandomWeightsOptions& options);

}  // namespace avatar
