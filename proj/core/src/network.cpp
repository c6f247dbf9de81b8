// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "avatar/errors.hpp"

namespace avatar {
namespace {

constexpr double kFusionEpsilon = 1e-5;

LayerDesc conv(std::string name, int out, int skip_level = 0, bool relu = true) {
  return {LayerKind::Conv, std::move(name), out, relu, skip_level};
}
LayerDesc pool() { return {LayerKind::Pool, "pool", 0, false, 0}; }
LayerDesc upsample(int level) { return {LayerKind::Upsample, "upsample", 0, false, level}; }
LayerDesc fuse(int level) { return {LayerKind::Fuse, "fuse", 0, false, level}; }

std::string shape_string(const std::vector<std::uint32_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

ConvKernel kernel_from_weights(const NetworkWeights& weights, const std::string& prefix) {
  const auto& w = weights.at(prefix + ".weight");
  const auto& b = weights.at(prefix + ".bias");
  if (w.shape.size() != 4) {
    throw ConfigError("tensor '" + w.name + "' must be (kh, kw, in, out), got " +
                      shape_string(w.shape));
  }
  const int kh = static_cast<int>(w.shape[0]);
  const int kw = static_cast<int>(w.shape[1]);
  const int in = static_cast<int>(w.shape[2]);
  const int out = static_cast<int>(w.shape[3]);
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw ConfigError("tensor '" + w.name + "' needs odd kernel sizes, got " +
                      shape_string(w.shape));
  }
  if (b.shape.size() != 1 || static_cast<int>(b.shape[0]) != out) {
    throw ConfigError("tensor '" + b.name + "' must have shape [" + std::to_string(out) +
                      "], got " + shape_string(b.shape));
  }
  return ConvKernel(kh, kw, in, out, w.data, b.data);
}

void check_image(const Image& image) {
  if (image.channels() != 3) {
    throw ShapeError("expected an RGB image, got " + std::to_string(image.channels()) +
                     " channels");
  }
}

}  // namespace

const LayerSpec& LayerSpec::hourglass() {
  static const LayerSpec spec{
      {
          conv("enc.conv1_1", 64, 1),
          conv("enc.conv1_2", 64),
          pool(),
          conv("enc.conv2_1", 128, 2),
          conv("enc.conv2_2", 128),
          pool(),
          conv("enc.conv3_1", 256, 3),
          conv("enc.conv3_2", 256),
          conv("enc.conv3_3", 256),
          conv("enc.conv3_4", 256),
          pool(),
          conv("enc.conv4_1", 512),
      },
      {
          conv("dec.conv4_1", 256),
          upsample(3),
          fuse(3),
          conv("dec.conv3_4", 256),
          conv("dec.conv3_3", 256),
          conv("dec.conv3_2", 256),
          conv("dec.conv3_1", 128),
          upsample(2),
          fuse(2),
          conv("dec.conv2_2", 128),
          conv("dec.conv2_1", 64),
          upsample(1),
          fuse(1),
          conv("dec.conv1_2", 64),
          conv("dec.conv1_1", 64),
          conv("dec.out", 3, 0, false),
      },
  };
  return spec;
}

// ---------------------------------------------------------------------------
// Preprocess

Preprocess Preprocess::from_weights(const NetworkWeights& weights) {
  const auto& t = weights.at(kPreprocessTensor);
  if (t.data.size() != 5) {
    throw ConfigError(std::string("tensor '") + kPreprocessTensor +
                      "' must hold [scale, bgr, mean0, mean1, mean2], got " +
                      std::to_string(t.data.size()) + " values");
  }
  Preprocess p;
  p.scale = t.data[0];
  p.bgr = t.data[1] != 0.0f;
  p.mean = {t.data[2], t.data[3], t.data[4]};
  return p;
}

std::vector<float> Preprocess::to_tensor() const {
  return {scale, bgr ? 1.0f : 0.0f, mean[0], mean[1], mean[2]};
}

FeatureMap Preprocess::apply(const Image& rgb) const {
  check_image(rgb);
  FeatureMap out(rgb.height(), rgb.width(), 3);
  for (std::size_t i = 0; i < rgb.cells(); ++i) {
    const float* src = rgb.data() + i * 3;
    float* dst = out.data() + i * 3;
    for (int c = 0; c < 3; ++c) {
      const float v = bgr ? src[2 - c] : src[c];
      dst[c] = v * scale - mean[c];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Style fusion

FeatureMap style_fusion(const FeatureMap& decoded, const ChannelMoments& target) {
  const int c = decoded.channels();
  if (target.channels() != c) {
    throw ShapeError("style fusion channel mismatch: decoded " + std::to_string(c) +
                     ", style " + std::to_string(target.channels()));
  }
  const auto own = channel_moments(decoded, kFusionEpsilon);
  std::vector<float> gain(c), shift(c);
  for (int ch = 0; ch < c; ++ch) {
    gain[ch] = target.std[ch] / own.std[ch];
    shift[ch] = target.mean[ch];
  }
  FeatureMap out(decoded.height(), decoded.width(), c);
  for (std::size_t i = 0; i < decoded.cells(); ++i) {
    const float* src = decoded.data() + i * c;
    float* dst = out.data() + i * c;
    for (int ch = 0; ch < c; ++ch) dst[ch] = gain[ch] * (src[ch] - own.mean[ch]) + shift[ch];
  }
  return out;
}

FeatureMap style_fusion(const FeatureMap& decoded, const FeatureMap& encoded) {
  if (decoded.channels() != encoded.channels()) {
    throw ShapeError("style fusion channel mismatch: decoded " +
                     std::to_string(decoded.channels()) + ", style " +
                     std::to_string(encoded.channels()));
  }
  return style_fusion(decoded, channel_moments(encoded, kFusionEpsilon));
}

FusionTargets fusion_targets(std::span<const FeatureMap> skips) {
  if (skips.size() != kSkipLevels) {
    throw ShapeError("expected " + std::to_string(kSkipLevels) + " shortcut features, got " +
                     std::to_string(skips.size()));
  }
  FusionTargets t;
  for (int l = 0; l < kSkipLevels; ++l) t[l] = channel_moments(skips[l], kFusionEpsilon);
  return t;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(const NetworkWeights& weights)
    : preprocess_(Preprocess::from_weights(weights)) {
  const auto& spec = LayerSpec::hourglass();

  auto build = [&](const std::vector<LayerDesc>& table, std::vector<Stage>& stages,
                   int channels) {
    for (const auto& desc : table) {
      Stage stage{desc, -1};
      if (desc.kind == LayerKind::Conv) {
        const ConvKernel k = kernel_from_weights(weights, desc.name);
        if (k.in_channels != channels) {
          throw ConfigError("tensor '" + desc.name + ".weight' expects " +
                            std::to_string(k.in_channels) + " input channels but the " +
                            "previous layer produces " + std::to_string(channels));
        }
        channels = k.out_channels;
        stage.conv_index = static_cast<int>(convs_.size());
        convs_.push_back({desc, PackedConv(k)});
        if (desc.level > 0) skip_channels_[desc.level - 1] = channels;
      } else if (desc.kind == LayerKind::Fuse) {
        if (channels != skip_channels_[desc.level - 1]) {
          throw ConfigError("decoder reaches scale " + std::to_string(desc.level) + " with " +
                            std::to_string(channels) + " channels, shortcut has " +
                            std::to_string(skip_channels_[desc.level - 1]));
        }
      }
      stages.push_back(std::move(stage));
    }
    return channels;
  };

  bottleneck_channels_ = build(spec.encoder, encoder_, 3);
  const int out = build(spec.decoder, decoder_, bottleneck_channels_);
  if (out != 3) {
    throw ConfigError("decoder output must have 3 channels, got " + std::to_string(out));
  }
}

EncodeResult Network::encode(const Image& image) const {
  FeatureMap x = preprocess_.apply(image);
  EncodeResult result;
  for (const auto& stage : encoder_) {
    switch (stage.desc.kind) {
      case LayerKind::Conv: {
        const auto& k = convs_[stage.conv_index].conv;
        x = conv2d(x, k, 1, PaddingSpec::zero(k.kh() / 2));
        relu_inplace(x);
        if (stage.desc.level > 0) result.skips[stage.desc.level - 1] = x;
        break;
      }
      case LayerKind::Pool:
        x = max_pool2(x);
        break;
      default:
        break;
    }
  }
  result.bottleneck = std::move(x);
  return result;
}

FeatureMap Network::decode_linear(const FeatureMap& bottleneck, const FusionTargets& targets,
                                  const std::array<Extent, kSkipLevels>& extents) const {
  if (bottleneck.channels() != bottleneck_channels_) {
    throw ShapeError("decoder expects a " + std::to_string(bottleneck_channels_) +
                     "-channel bottleneck, got " + std::to_string(bottleneck.channels()));
  }
  FeatureMap x = bottleneck;
  for (const auto& stage : decoder_) {
    switch (stage.desc.kind) {
      case LayerKind::Conv: {
        const auto& k = convs_[stage.conv_index].conv;
        x = conv2d(x, k, 1, PaddingSpec::reflect(k.kh() / 2));
        if (stage.desc.relu) relu_inplace(x);
        break;
      }
      case LayerKind::Upsample: {
        const Extent target = extents[stage.desc.level - 1];
        x = nearest_upsample2(x);
        if (x.height() < target.height || x.width() < target.width) {
          throw ShapeError("upsampled decoder feature " + std::to_string(x.height()) + "x" +
                           std::to_string(x.width()) + " smaller than scale " +
                           std::to_string(stage.desc.level) + " extent " +
                           std::to_string(target.height) + "x" + std::to_string(target.width));
        }
        x = crop(x, target);
        break;
      }
      case LayerKind::Fuse:
        x = style_fusion(x, targets[stage.desc.level - 1]);
        break;
      default:
        break;
    }
  }
  return x;
}

Image Network::decode(const FeatureMap& bottleneck, const FusionTargets& targets,
                      const std::array<Extent, kSkipLevels>& extents) const {
  FeatureMap out = decode_linear(bottleneck, targets, extents);
  clamp_inplace(out, 0.0f, 1.0f);
  return out;
}

Image Network::decode(const FeatureMap& bottleneck, std::span<const FeatureMap> skips) const {
  const auto targets = fusion_targets(skips);
  return decode(bottleneck, targets, {skips[0].extent(), skips[1].extent(), skips[2].extent()});
}

Image Network::reconstruct_image(const Image& image) const {
  const auto enc = encode(image);
  return decode(enc.bottleneck, enc.skips);
}

EncodeResult encode(const Image& image, const NetworkWeights& weights) {
  return Network(weights).encode(image);
}

Image decode(const FeatureMap& bottleneck, std::span<const FeatureMap> style_skips,
             const NetworkWeights& weights) {
  return Network(weights).decode(bottleneck, style_skips);
}

Image reconstruct_image(const Image& image, const NetworkWeights& weights) {
  return Network(weights).reconstruct_image(image);
}

// ---------------------------------------------------------------------------
// Random weights

NetworkWeights make_random_weights(const RandomWeightsOptions& options) {
  if (options.width_divisor < 1) throw ValidationError("width divisor must be >= 1");
  std::mt19937_64 rng(options.seed);
  const auto& spec = LayerSpec::hourglass();

  NetworkWeights w;
  w.add(kPreprocessTensor, {5}, Preprocess{}.to_tensor());

  auto add_table = [&](const std::vector<LayerDesc>& table, int channels) {
    for (const auto& desc : table) {
      if (desc.kind != LayerKind::Conv) continue;
      const int out = desc.name == "dec.out"
                          ? desc.out_channels
                          : std::max(1, desc.out_channels / options.width_divisor);
      const int fan_in = 9 * channels;
      std::normal_distribution<float> weight_dist(0.0f, std::sqrt(2.0f / fan_in));
      std::normal_distribution<float> bias_dist(0.0f, 0.01f);
      std::vector<float> weights(static_cast<std::size_t>(fan_in) * out);
      for (auto& v : weights) v = weight_dist(rng);
      std::vector<float> bias(out);
      for (auto& v : bias) v = bias_dist(rng);
      w.add(desc.name + ".weight",
            {3, 3, static_cast<std::uint32_t>(channels), static_cast<std::uint32_t>(out)},
            std::move(weights));
      w.add(desc.name + ".bias", {static_cast<std::uint32_t>(out)}, std::move(bias));
      channels = out;
    }
    return channels;
  };
  const int bottleneck = add_table(spec.encoder, 3);
  add_table(spec.decoder, bottleneck);

  if (!options.calibrate_output) return w;

  // Fit the linear output layer so a noise image lands inside [0, 1].
  std::uniform_real_distribution<float> pixel(0.0f, 1.0f);
  Image noise(32, 32, 3);
  for (auto& v : noise.values()) v = pixel(rng);
  const Network net(w);
  const auto enc = net.encode(noise);
  const FeatureMap raw = net.decode_linear(enc.bottleneck, fusion_targets(enc.skips),
                                           enc.extents());
  const auto moments = channel_moments(raw, 1e-12);

  NetworkWeights calibrated;
  for (const auto& t : w) {
    auto data = t.data;
    if (t.name == "dec.out.weight") {
      for (std::size_t i = 0; i < data.size(); ++i) data[i] *= 0.2f / moments.std[i % 3];
    } else if (t.name == "dec.out.bias") {
      for (int c = 0; c < 3; ++c) {
        data[c] = (data[c] - moments.mean[c]) * (0.2f / moments.std[c]) + 0.5f;
      }
    }
    calibrated.add(t.name, t.shape, std::move(data));
  }
  return calibrated;
}

}  // namespace avatar
