// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "avatar/errors.hpp"
#include "avatar/parallel.hpp"

namespace avatar {
namespace {

std::string dims(int h, int w, int c) {
  return std::to_string(h) + "x" + std::to_string(w) + "x" + std::to_string(c);
}

// 16 lanes of float. GCC/Clang lower this to whatever the target ISA offers
// (one zmm, two ymm, four xmm). aligned(4) permits unaligned loads/stores.
using v16 = float __attribute__((vector_size(64), aligned(4)));
static_assert(PackedConv::kPanel == 16);

constexpr int kTileRows = 8;

// Computes `MR` consecutive output pixels of row `oy` for one 16-channel
// panel. Each output value accumulates bias first and then taps/in-channels
// in a fixed ascending order, independent of how rows are split across
// threads.
template <int MR>
void conv_tile(const float* input, int in_w, int in_c, int kh, int kw,
               int stride, int oy, int ox0, const float* panel,
               const float* bias, float* out_row, int out_c, int o0,
               int valid) {
  v16 acc[MR];
  v16 b;
  std::memcpy(&b, bias, sizeof(v16));
  for (int m = 0; m < MR; ++m) acc[m] = b;

  for (int ky = 0; ky < kh; ++ky) {
    const float* row = input + static_cast<std::size_t>(oy * stride + ky) * in_w * in_c;
    for (int kx = 0; kx < kw; ++kx) {
      const float* a[MR];
      for (int m = 0; m < MR; ++m) {
        a[m] = row + static_cast<std::size_t>((ox0 + m) * stride + kx) * in_c;
      }
      const float* w = panel + static_cast<std::size_t>(ky * kw + kx) * in_c * 16;
      for (int ci = 0; ci < in_c; ++ci) {
        const v16 wv = *reinterpret_cast<const v16*>(w + static_cast<std::size_t>(ci) * 16);
        for (int m = 0; m < MR; ++m) acc[m] += a[m][ci] * wv;
      }
    }
  }

  for (int m = 0; m < MR; ++m) {
    float* dst = out_row + static_cast<std::size_t>(ox0 + m) * out_c + o0;
    if (valid == 16) {
      std::memcpy(dst, &acc[m], sizeof(v16));
    } else {
      for (int n = 0; n < valid; ++n) dst[n] = acc[m][n];
    }
  }
}

using TileFn = void (*)(const float*, int, int, int, int, int, int, int,
                        const float*, const float*, float*, int, int, int);

constexpr TileFn kTiles[kTileRows + 1] = {
    nullptr,       conv_tile<1>, conv_tile<2>, conv_tile<3>, conv_tile<4>,
    conv_tile<5>,  conv_tile<6>, conv_tile<7>, conv_tile<8>,
};

int reflect_index(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

}  // namespace

// ---------------------------------------------------------------------------
// FeatureMap / ConvKernel

FeatureMap::FeatureMap(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw ShapeError("feature map dimensions must be positive, got " +
                     dims(height, width, channels));
  }
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

FeatureMap::FeatureMap(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw ShapeError("feature map dimensions must be positive, got " +
                     dims(height, width, channels));
  }
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw ShapeError("feature map " + dims(height, width, channels) + " given " +
                     std::to_string(data_.size()) + " values");
  }
}

ConvKernel::ConvKernel(int kh_, int kw_, int in, int out)
    : kh(kh_), kw(kw_), in_channels(in), out_channels(out) {
  if (kh <= 0 || kw <= 0 || in <= 0 || out <= 0) {
    throw ShapeError("conv kernel dimensions must be positive");
  }
  weights.assign(static_cast<std::size_t>(kh) * kw * in * out, 0.0f);
}

ConvKernel::ConvKernel(int kh_, int kw_, int in, int out, std::vector<float> w,
                       std::vector<float> b)
    : kh(kh_), kw(kw_), in_channels(in), out_channels(out),
      weights(std::move(w)), bias(std::move(b)) {
  validate();
}

void ConvKernel::validate() const {
  if (kh <= 0 || kw <= 0 || in_channels <= 0 || out_channels <= 0) {
    throw ShapeError("conv kernel dimensions must be positive");
  }
  const std::size_t expected =
      static_cast<std::size_t>(kh) * kw * in_channels * out_channels;
  if (weights.size() != expected) {
    throw ShapeError("conv kernel expects " + std::to_string(expected) +
                     " weights, got " + std::to_string(weights.size()));
  }
  if (!bias.empty() && bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ShapeError("conv bias length " + std::to_string(bias.size()) +
                     " != out_channels " + std::to_string(out_channels));
  }
}

// ---------------------------------------------------------------------------
// Convolution

PackedConv::PackedConv(const ConvKernel& kernel)
    : kh_(kernel.kh), kw_(kernel.kw), in_(kernel.in_channels), out_(kernel.out_channels) {
  kernel.validate();
  const int panels = (out_ + kPanel - 1) / kPanel;
  const std::size_t depth = static_cast<std::size_t>(kh_) * kw_ * in_;
  panels_.assign(static_cast<std::size_t>(panels) * depth * kPanel, 0.0f);
  bias_.assign(static_cast<std::size_t>(panels) * kPanel, 0.0f);

  for (int p = 0; p < panels; ++p) {
    float* dst = panels_.data() + static_cast<std::size_t>(p) * depth * kPanel;
    const int o0 = p * kPanel;
    const int valid = std::min(kPanel, out_ - o0);
    for (std::size_t k = 0; k < depth; ++k) {
      const float* src = kernel.weights.data() + k * out_ + o0;
      std::copy(src, src + valid, dst + k * kPanel);
    }
  }
  if (kernel.has_bias()) std::copy(kernel.bias.begin(), kernel.bias.end(), bias_.begin());
}

FeatureMap PackedConv::apply(const FeatureMap& padded, int stride) const {
  if (stride <= 0) throw ShapeError("conv2d stride must be positive");
  if (padded.channels() != in_) {
    throw ShapeError("conv2d channel mismatch: input has " +
                     std::to_string(padded.channels()) + " channels, kernel expects " +
                     std::to_string(in_));
  }
  if (padded.height() < kh_ || padded.width() < kw_) {
    throw ShapeError("conv2d input " + dims(padded.height(), padded.width(), in_) +
                     " smaller than kernel " + std::to_string(kh_) + "x" +
                     std::to_string(kw_));
  }
  const int oh = (padded.height() - kh_) / stride + 1;
  const int ow = (padded.width() - kw_) / stride + 1;
  FeatureMap out(oh, ow, out_);

  const int panels = (out_ + kPanel - 1) / kPanel;
  const std::size_t depth = static_cast<std::size_t>(kh_) * kw_ * in_;
  const float* in = padded.data();
  const int in_w = padded.width();

  parallel_for(static_cast<std::size_t>(oh), [&](std::size_t begin, std::size_t end) {
    for (std::size_t oy = begin; oy < end; ++oy) {
      float* out_row = out.data() + oy * ow * out_;
      for (int p = 0; p < panels; ++p) {
        const float* panel = panels_.data() + static_cast<std::size_t>(p) * depth * kPanel;
        const float* bias = bias_.data() + static_cast<std::size_t>(p) * kPanel;
        const int o0 = p * kPanel;
        const int valid = std::min(kPanel, out_ - o0);
        for (int ox0 = 0; ox0 < ow; ox0 += kTileRows) {
          const int rows = std::min(kTileRows, ow - ox0);
          kTiles[rows](in, in_w, in_, kh_, kw_, stride, static_cast<int>(oy), ox0,
                       panel, bias, out_row, out_, o0, valid);
        }
      }
    }
  });
  return out;
}

FeatureMap conv2d(const FeatureMap& input, const PackedConv& kernel, int stride,
                  PaddingSpec padding) {
  if (input.channels() != kernel.in_channels()) {
    throw ShapeError("conv2d channel mismatch: input has " +
                     std::to_string(input.channels()) + " channels, kernel expects " +
                     std::to_string(kernel.in_channels()));
  }
  if (padding.amount == 0) return kernel.apply(input, stride);
  return kernel.apply(pad(input, padding), stride);
}

FeatureMap conv2d(const FeatureMap& input, const ConvKernel& kernel, int stride,
                  PaddingSpec padding) {
  kernel.validate();
  if (input.channels() != kernel.in_channels) {
    throw ShapeError("conv2d channel mismatch: input has " +
                     std::to_string(input.channels()) + " channels, kernel expects " +
                     std::to_string(kernel.in_channels));
  }
  return conv2d(input, PackedConv(kernel), stride, padding);
}

FeatureMap conv_transpose2d(const FeatureMap& input, const ConvKernel& kernel,
                            int stride) {
  kernel.validate();
  if (stride <= 0) throw ShapeError("conv_transpose2d stride must be positive");
  if (input.channels() != kernel.out_channels) {
    throw ShapeError("conv_transpose2d channel mismatch: input has " +
                     std::to_string(input.channels()) + " channels, kernel produces " +
                     std::to_string(kernel.out_channels));
  }
  const int ih = input.height();
  const int iw = input.width();
  const int oh = (ih - 1) * stride + kernel.kh;
  const int ow = (iw - 1) * stride + kernel.kw;
  const int cin = kernel.out_channels;   // channels of `input`
  const int cout = kernel.in_channels;   // channels of the result
  FeatureMap out(oh, ow, cout);

  // Gather form: every output cell sums its own contributions, so rows can
  // be computed independently.
  parallel_for(static_cast<std::size_t>(oh), [&](std::size_t begin, std::size_t end) {
    for (int y = static_cast<int>(begin); y < static_cast<int>(end); ++y) {
      for (int x = 0; x < ow; ++x) {
        float* dst = &out.at(y, x, 0);
        for (int ky = 0; ky < kernel.kh; ++ky) {
          const int sy = y - ky;
          if (sy < 0 || sy % stride != 0 || sy / stride >= ih) continue;
          for (int kx = 0; kx < kernel.kw; ++kx) {
            const int sx = x - kx;
            if (sx < 0 || sx % stride != 0 || sx / stride >= iw) continue;
            const float* src = &input.at(sy / stride, sx / stride, 0);
            for (int co = 0; co < cout; ++co) {
              const float* w = &kernel.weights[((static_cast<std::size_t>(ky) * kernel.kw + kx) *
                                                    cout + co) * cin];
              float acc = 0.0f;
              for (int ci = 0; ci < cin; ++ci) acc += src[ci] * w[ci];
              dst[co] += acc;
            }
          }
        }
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// Resampling and padding

FeatureMap max_pool2(const FeatureMap& input) {
  const int h = input.height();
  const int w = input.width();
  const int c = input.channels();
  const int oh = (h + 1) / 2;
  const int ow = (w + 1) / 2;
  FeatureMap out(oh, ow, c);
  for (int oy = 0; oy < oh; ++oy) {
    const int y0 = 2 * oy;
    const int y1 = std::min(y0 + 1, h - 1);
    for (int ox = 0; ox < ow; ++ox) {
      const int x0 = 2 * ox;
      const int x1 = std::min(x0 + 1, w - 1);
      const float* a = &input.at(y0, x0, 0);
      const float* b = &input.at(y0, x1, 0);
      const float* d = &input.at(y1, x0, 0);
      const float* e = &input.at(y1, x1, 0);
      float* dst = &out.at(oy, ox, 0);
      for (int ch = 0; ch < c; ++ch) {
        dst[ch] = std::max(std::max(a[ch], b[ch]), std::max(d[ch], e[ch]));
      }
    }
  }
  return out;
}

FeatureMap nearest_upsample2(const FeatureMap& input) {
  const int c = input.channels();
  FeatureMap out(input.height() * 2, input.width() * 2, c);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const auto src = input.cell(y / 2, x / 2);
      std::copy(src.begin(), src.end(), out.cell(y, x).begin());
    }
  }
  return out;
}

FeatureMap reflect_pad(const FeatureMap& input, int amount) {
  if (amount < 0) throw ShapeError("padding must be non-negative");
  if (amount == 0) return input;
  const int h = input.height();
  const int w = input.width();
  if (amount >= std::min(h, w)) {
    throw ShapeError("reflect pad " + std::to_string(amount) +
                     " requires a map larger than " + std::to_string(h) + "x" +
                     std::to_string(w));
  }
  FeatureMap out(h + 2 * amount, w + 2 * amount, input.channels());
  for (int y = 0; y < out.height(); ++y) {
    const int sy = reflect_index(y - amount, h);
    for (int x = 0; x < out.width(); ++x) {
      const auto src = input.cell(sy, reflect_index(x - amount, w));
      std::copy(src.begin(), src.end(), out.cell(y, x).begin());
    }
  }
  return out;
}

FeatureMap zero_pad(const FeatureMap& input, int amount) {
  if (amount < 0) throw ShapeError("padding must be non-negative");
  if (amount == 0) return input;
  FeatureMap out(input.height() + 2 * amount, input.width() + 2 * amount,
                 input.channels());
  for (int y = 0; y < input.height(); ++y) {
    const auto* src = &input.at(y, 0, 0);
    std::copy(src, src + static_cast<std::size_t>(input.width()) * input.channels(),
              &out.at(y + amount, amount, 0));
  }
  return out;
}

FeatureMap pad(const FeatureMap& input, PaddingSpec spec) {
  return spec.mode == PadMode::Reflect ? reflect_pad(input, spec.amount)
                                       : zero_pad(input, spec.amount);
}

FeatureMap crop(const FeatureMap& input, Extent extent) {
  if (extent.height > input.height() || extent.width > input.width()) {
    throw ShapeError("crop " + std::to_string(extent.height) + "x" +
                     std::to_string(extent.width) + " exceeds map " +
                     dims(input.height(), input.width(), input.channels()));
  }
  if (extent == input.extent()) return input;
  FeatureMap out(extent.height, extent.width, input.channels());
  for (int y = 0; y < extent.height; ++y) {
    const auto* src = &input.at(y, 0, 0);
    std::copy(src, src + static_cast<std::size_t>(extent.width) * input.channels(),
              &out.at(y, 0, 0));
  }
  return out;
}

void relu_inplace(FeatureMap& map) {
  for (float& v : map.values()) v = v > 0.0f ? v : 0.0f;
}

void clamp_inplace(FeatureMap& map, float lo, float hi) {
  for (float& v : map.values()) v = std::clamp(v, lo, hi);
}

FeatureMap axpby(float a, const FeatureMap& x, float b, const FeatureMap& y) {
  if (!x.same_shape(y)) {
    throw ShapeError("axpby shape mismatch: " +
                     dims(x.height(), x.width(), x.channels()) + " vs " +
                     dims(y.height(), y.width(), y.channels()));
  }
  FeatureMap out(x.height(), x.width(), x.channels());
  const auto xs = x.values();
  const auto ys = y.values();
  auto os = out.values();
  for (std::size_t i = 0; i < os.size(); ++i) os[i] = a * xs[i] + b * ys[i];
  return out;
}

bool all_finite(const FeatureMap& map) {
  return std::all_of(map.values().begin(), map.values().end(),
                     [](float v) { return std::isfinite(v); });
}

}  // namespace avatar
