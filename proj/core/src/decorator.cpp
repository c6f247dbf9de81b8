// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/decorator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "avatar/errors.hpp"
#include "avatar/parallel.hpp"

namespace avatar {
namespace {

// Content rows scored per convolution call; bounds the score buffer to
// kStripRows * W * N_s floats.
constexpr int kStripRows = 8;

void check_patch_params(int patch_size, int stride) {
  if (patch_size <= 0 || patch_size % 2 == 0) {
    throw ValidationError("patch size must be a positive odd integer, got " +
                          std::to_string(patch_size));
  }
  if (stride <= 0) {
    throw ValidationError("patch stride must be >= 1, got " + std::to_string(stride));
  }
}

ConvKernel normalized_filters(int p, int c, std::span<const float> patches,
                              std::span<const float> norms) {
  const int count = static_cast<int>(norms.size());
  const std::size_t len = static_cast<std::size_t>(p) * p * c;
  ConvKernel k(p, p, c, count);
  for (int j = 0; j < count; ++j) {
    const float* src = patches.data() + j * len;
    for (std::size_t e = 0; e < len; ++e) k.weights[e * count + j] = src[e] / norms[j];
  }
  return k;
}

}  // namespace

void DecoratorConfig::validate() const {
  check_patch_params(patch_size, stride);
  if (!(alpha >= 0.0f && alpha <= 1.0f)) {
    throw ValidationError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (!(epsilon >= 0.0)) {
    throw ValidationError("epsilon must be non-negative, got " + std::to_string(epsilon));
  }
}

// ---------------------------------------------------------------------------
// StyleKernel

namespace {

struct PatchBank {
  int rows, cols;
  std::vector<float> patches;
  std::vector<float> norms;
};

PatchBank collect_patches(const FeatureMap& source, int p, int s) {
  check_patch_params(p, s);
  if (source.empty()) throw ConfigError("cannot build a style kernel from an empty map");
  if (p > std::min(source.height(), source.width())) {
    throw ShapeError("patch size " + std::to_string(p) + " exceeds style map " +
                     std::to_string(source.height()) + "x" + std::to_string(source.width()));
  }
  const int c = source.channels();
  PatchBank bank;
  bank.rows = (source.height() - p) / s + 1;
  bank.cols = (source.width() - p) / s + 1;
  const int count = bank.rows * bank.cols;
  const std::size_t len = static_cast<std::size_t>(p) * p * c;
  bank.patches.resize(count * len);
  bank.norms.resize(count);
  for (int j = 0; j < count; ++j) {
    const int y0 = (j / bank.cols) * s;
    const int x0 = (j % bank.cols) * s;
    float* dst = bank.patches.data() + j * len;
    double sq = 0.0;
    for (int ky = 0; ky < p; ++ky) {
      const float* row = &source.at(y0 + ky, x0, 0);
      std::copy(row, row + static_cast<std::size_t>(p) * c, dst + ky * p * c);
      for (int e = 0; e < p * c; ++e) sq += static_cast<double>(row[e]) * row[e];
    }
    bank.norms[j] = std::max(static_cast<float>(std::sqrt(sq)), kPatchNormFloor);
  }
  return bank;
}

}  // namespace

StyleKernel::StyleKernel(const FeatureMap& source, int patch_size, int stride)
    : patch_size_(patch_size),
      stride_(stride),
      channels_(source.channels()),
      matching_([&] {
        auto bank = collect_patches(source, patch_size, stride);
        grid_rows_ = bank.rows;
        grid_cols_ = bank.cols;
        patches_ = std::move(bank.patches);
        norms_ = std::move(bank.norms);
        return normalized_filters(patch_size, channels_, patches_, norms_);
      }()) {}

ConvKernel StyleKernel::bank() const {
  const int n = count();
  const std::size_t len = patch_length();
  ConvKernel k(patch_size_, patch_size_, channels_, n);
  for (int j = 0; j < n; ++j) {
    const float* src = patches_.data() + j * len;
    for (std::size_t e = 0; e < len; ++e) k.weights[e * n + j] = src[e];
  }
  return k;
}

StyleKernel extract_style_kernel(const FeatureMap& normalized_style, int patch_size,
                                 int stride) {
  return StyleKernel(normalized_style, patch_size, stride);
}

// ---------------------------------------------------------------------------
// Matching and reassembly

std::vector<int> match_patches(const FeatureMap& content, const StyleKernel& kernel) {
  if (kernel.count() == 0) throw ConfigError("style kernel is empty");
  if (content.channels() != kernel.channels()) {
    throw ShapeError("content has " + std::to_string(content.channels()) +
                     " channels, style kernel has " + std::to_string(kernel.channels()));
  }
  const int p = kernel.patch_size();
  const int half = p / 2;
  const FeatureMap padded = reflect_pad(content, half);
  const int h = content.height();
  const int w = content.width();
  const int n = kernel.count();

  std::vector<int> selection(static_cast<std::size_t>(h) * w, 0);
  for (int r0 = 0; r0 < h; r0 += kStripRows) {
    const int rows = std::min(kStripRows, h - r0);
    const int strip_h = rows + p - 1;
    const std::size_t row_len = static_cast<std::size_t>(padded.width()) * padded.channels();
    std::vector<float> strip_data(padded.data() + r0 * row_len,
                                  padded.data() + (r0 + strip_h) * row_len);
    const FeatureMap strip(strip_h, padded.width(), padded.channels(), std::move(strip_data));
    const FeatureMap scores = kernel.matching_filters().apply(strip, 1);

    parallel_for(static_cast<std::size_t>(rows) * w, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const float* s = scores.data() + i * n;
        int best = 0;
        float best_score = s[0];
        for (int j = 1; j < n; ++j) {
          if (s[j] > best_score) {
            best_score = s[j];
            best = j;
          }
        }
        selection[static_cast<std::size_t>(r0) * w + i] = best;
      }
    });
  }
  return selection;
}

FeatureMap reassemble(std::span<const int> selection, Extent extent,
                      const StyleKernel& kernel) {
  const int h = extent.height;
  const int w = extent.width;
  if (selection.size() != static_cast<std::size_t>(h) * w) {
    throw ShapeError("selection has " + std::to_string(selection.size()) +
                     " entries for a " + std::to_string(h) + "x" + std::to_string(w) +
                     " content map");
  }
  const int p = kernel.patch_size();
  const int half = p / 2;
  const int c = kernel.channels();
  FeatureMap out(h, w, c);

  // Gather form of the transposed convolution of the one-hot score map:
  // cell (y, x) receives element (ky, kx) of the patch stamped at position
  // (y + half - ky, x + half - kx).
  parallel_for(static_cast<std::size_t>(h), [&](std::size_t begin, std::size_t end) {
    for (int y = static_cast<int>(begin); y < static_cast<int>(end); ++y) {
      for (int x = 0; x < w; ++x) {
        float* dst = &out.at(y, x, 0);
        int contributions = 0;
        for (int ky = 0; ky < p; ++ky) {
          const int sy = y + half - ky;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < p; ++kx) {
            const int sx = x + half - kx;
            if (sx < 0 || sx >= w) continue;
            const int j = selection[static_cast<std::size_t>(sy) * w + sx];
            const float* src = kernel.patch(j).data() + (static_cast<std::size_t>(ky) * p + kx) * c;
            for (int ch = 0; ch < c; ++ch) dst[ch] += src[ch];
            ++contributions;
          }
        }
        if (contributions > 1) {
          const auto count = static_cast<float>(contributions);
          for (int ch = 0; ch < c; ++ch) dst[ch] /= count;
        }
      }
    }
  });
  return out;
}

FeatureMap match_and_reassemble(const FeatureMap& content, const StyleKernel& kernel) {
  const auto selection = match_patches(content, kernel);
  return reassemble(selection, content.extent(), kernel);
}

FeatureMap style_swap(const FeatureMap& content, const FeatureMap& style, int patch_size,
                      int stride) {
  if (content.channels() != style.channels()) {
    throw ShapeError("style_swap channel mismatch: " + std::to_string(content.channels()) +
                     " vs " + std::to_string(style.channels()));
  }
  const StyleKernel kernel(style, patch_size, stride);
  return match_and_reassemble(content, kernel);
}

FeatureMap blend_normalized(const FeatureMap& content_normalized,
                            const FeatureMap& stylized_normalized, float alpha) {
  return axpby(alpha, content_normalized, 1.0f - alpha, stylized_normalized);
}

FeatureMap blend_features(const FeatureMap& content, const FeatureMap& stylized,
                          float alpha) {
  return axpby(alpha, content, 1.0f - alpha, stylized);
}

// ---------------------------------------------------------------------------
// Full decorator

DecoratorStyle prepare_decorator_style(const FeatureMap& style, const DecoratorConfig& cfg) {
  cfg.validate();
  auto transform = fit_transform(style, cfg.flavor, cfg.epsilon);
  const FeatureMap normalized = project(style, transform);
  return {std::move(transform), StyleKernel(normalized, cfg.patch_size, cfg.stride)};
}

Decoration decorate(const FeatureMap& content, const DecoratorStyle& style,
                    const DecoratorConfig& cfg) {
  cfg.validate();
  if (content.channels() != style.transform.channels()) {
    throw ShapeError("decorator channel mismatch: content " +
                     std::to_string(content.channels()) + ", style " +
                     std::to_string(style.transform.channels()));
  }
  if (cfg.patch_size != style.kernel.patch_size() || cfg.stride != style.kernel.stride()) {
    throw ConfigError("prepared style kernel does not match the decorator config");
  }
  const auto content_transform = fit_transform(content, cfg.flavor, cfg.epsilon);
  const FeatureMap content_normalized = project(content, content_transform);

  Decoration result;
  result.selection = match_patches(content_normalized, style.kernel);
  FeatureMap swapped = reassemble(result.selection, content.extent(), style.kernel);

  if (cfg.blend_mode == BlendMode::NormalizedSpace) {
    if (cfg.alpha != 0.0f) swapped = blend_normalized(content_normalized, swapped, cfg.alpha);
    result.features = reconstruct(swapped, style.transform);
  } else {
    result.features = reconstruct(swapped, style.transform);
    if (cfg.alpha != 0.0f) result.features = blend_features(content, result.features, cfg.alpha);
  }
  return result;
}

FeatureMap style_decorate(const FeatureMap& content, const FeatureMap& style,
                          const DecoratorConfig& cfg) {
  if (content.channels() != style.channels()) {
    throw ShapeError("style_decorate channel mismatch: content " +
                     std::to_string(content.channels()) + ", style " +
                     std::to_string(style.channels()));
  }
  return decorate(content, prepare_decorator_style(style, cfg), cfg).features;
}

}  // namespace avatar
