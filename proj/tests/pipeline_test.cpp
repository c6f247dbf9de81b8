// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <iostream>
#include <random>

#include "avatar/errors.hpp"
#include "avatar/image_io.hpp"
#include "avatar/pipeline.hpp"
#include "support/oracles.hpp"

namespace avatar {
namespace {

using testing::max_abs_diff;
using testing::random_map;
using testing::rms_diff;

const Stylizer& small_stylizer() {
  static const Stylizer s(make_random_weights({.seed = 3, .width_divisor = 16}));
  return s;
}

Image smooth_image(int h, int w, float phase) {
  Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = 0.5f + 0.4f * std::sin(0.21f * x + phase);
      img.at(y, x, 1) = 0.5f + 0.4f * std::cos(0.17f * y - phase);
      img.at(y, x, 2) = 0.5f + 0.3f * std::sin(0.05f * (x + y) * (1.0f + phase));
    }
  return img;
}

DecoratorConfig config(int p = 3, float alpha = 0.8f) {
  DecoratorConfig cfg;
  cfg.patch_size = p;
  cfg.alpha = alpha;
  return cfg;
}

TEST(StyleWeights, Validation) {
  EXPECT_NO_THROW(validate_style_weights(std::vector<float>{0.25f, 0.75f}));
  EXPECT_THROW(validate_style_weights(std::vector<float>{}), ValidationError);
  EXPECT_THROW(validate_style_weights(std::vector<float>{0.5f, 0.6f}), ValidationError);
  EXPECT_THROW(validate_style_weights(std::vector<float>{1.5f, -0.5f}), ValidationError);
  EXPECT_THROW(validate_style_weights(std::vector<float>{NAN}), ValidationError);
}

TEST(StyleExtent, UpscalesOnly) {
  EXPECT_EQ(style_extent_for({200, 300}, {100, 100}, 3), (Extent{200, 300}));
  const Extent e = style_extent_for({20, 40}, {100, 120}, 3);
  EXPECT_EQ(e, (Extent{50, 100}));
  // A large patch needs 8(P-1)+1 pixels at the short side.
  EXPECT_EQ(style_extent_for({20, 20}, {20, 20}, 5).height, 33);
}

TEST(Stylize, ShapeContractOddInput) {
  const Image content = smooth_image(57, 91, 0.3f);
  const Image style = smooth_image(40, 40, 1.1f);
  const Image out = small_stylizer().stylize(content, std::vector<StyleImage>{{style, 1.0f}}, config());
  EXPECT_EQ(out.extent(), (Extent{57, 91}));
  EXPECT_EQ(out.channels(), 3);
  EXPECT_TRUE(all_finite(out));
}

TEST(Stylize, TooSmallContent) {
  const Image tiny = smooth_image(8, 30, 0.0f);
  EXPECT_THROW(small_stylizer().stylize(tiny, std::vector<StyleImage>{{tiny, 1.0f}}, config()),
               ValidationError);
}

TEST(Stylize, IdenticalStylesSplitWeightEqualsSingle) {
  const Image content = smooth_image(32, 40, 0.2f);
  const Image style = smooth_image(36, 36, 0.9f);
  const auto& s = small_stylizer();
  const Image single = s.stylize(content, std::vector<StyleImage>{{style, 1.0f}}, config());
  const Image split =
      s.stylize(content, std::vector<StyleImage>{{style, 0.5f}, {style, 0.5f}}, config());
  EXPECT_LT(max_abs_diff(single, split), 1e-5);
}

TEST(Stylize, MultiStyleIsConvexInBottleneck) {
  const auto& s = small_stylizer();
  const Image content = smooth_image(32, 32, 0.4f);
  const DecoratorConfig cfg = config(3, 0.0f);
  const PreparedStyle a = s.prepare_style(smooth_image(32, 32, 1.3f), content.extent(), cfg);
  const PreparedStyle b = s.prepare_style(smooth_image(32, 32, 2.1f), content.extent(), cfg);
  const auto zc = s.network().encode(content).bottleneck;
  const std::vector<PreparedStyle> both{a, b};
  const FeatureMap mixed = s.decorate_bottleneck(zc, both, std::vector<float>{0.3f, 0.7f}, cfg);
  const FeatureMap za = decorate(zc, a.decorator, cfg).features;
  const FeatureMap zb = decorate(zc, b.decorator, cfg).features;
  EXPECT_LT(max_abs_diff(mixed, axpby(0.3f, za, 0.7f, zb)), 1e-5);
}

TEST(Stylize, SelfStyleFixpoint) {
  const auto& s = small_stylizer();
  const Image content = smooth_image(32, 32, 0.7f);
  DecoratorConfig cfg = config(1, 0.0f);
  const Image styled = s.stylize(content, std::vector<StyleImage>{{content, 1.0f}}, cfg);
  const Image recon = s.network().reconstruct_image(content);
  const double recon_err = rms_diff(recon, content);
  EXPECT_LE(rms_diff(styled, content), 1.05 * recon_err);
  EXPECT_LT(rms_diff(styled, recon), 1e-3);
}

TEST(Video, OneFrameEqualsStylize) {
  const auto& s = small_stylizer();
  const Image frame = smooth_image(33, 41, 0.5f);
  const Image style = smooth_image(30, 30, 1.7f);
  const auto out = s.stylize_video(std::vector<Image>{frame}, style, config());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], s.stylize(frame, std::vector<StyleImage>{{style, 1.0f}}, config()));
}

TEST(Video, PreparedStyleReuseIsBitwise) {
  const auto& s = small_stylizer();
  const Image style = smooth_image(30, 30, 1.7f);
  const std::vector<Image> frames{smooth_image(33, 41, 0.5f), smooth_image(33, 41, 0.6f),
                                  smooth_image(33, 41, 0.5f)};
  const auto a = s.stylize_video(frames, style, config());
  const auto b = s.stylize_video(frames, style, config());
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[0], a[2]);
}

TEST(Video, MismatchedFrames) {
  const std::vector<Image> frames{smooth_image(33, 41, 0.5f), smooth_image(34, 41, 0.5f)};
  EXPECT_THROW(small_stylizer().stylize_video(frames, frames[0], config()), ValidationError);
  EXPECT_THROW(small_stylizer().stylize_video(std::vector<Image>{}, frames[0], config()),
               ValidationError);
}

TEST(Video, TranslationConsistencyRegression) {
  const auto& s = small_stylizer();
  const Image base = smooth_image(49, 57, 0.8f);
  Image shifted(49, 56, 3);
  Image cropped(49, 56, 3);
  for (int y = 0; y < 49; ++y)
    for (int x = 0; x < 56; ++x)
      for (int c = 0; c < 3; ++c) {
        cropped.at(y, x, c) = base.at(y, x, c);
        shifted.at(y, x, c) = base.at(y, x + 1, c);
      }
  const DecoratorConfig cfg = config(3, 0.0f);
  const PreparedStyle style = s.prepare_style(smooth_image(40, 40, 1.9f), cropped.extent(), cfg);
  const auto za = decorate(s.network().encode(cropped).bottleneck, style.decorator, cfg).features;
  const auto zb = decorate(s.network().encode(shifted).bottleneck, style.decorator, cfg).features;
  const double rms = rms_diff(za, zb);
  const double scale = std::sqrt(testing::dot(za, za) / za.size());
  std::cout << "[regression] 1-pixel translate: decorated RMS difference " << rms
            << " (feature RMS " << scale << ")\n";
  EXPECT_TRUE(std::isfinite(rms));
  EXPECT_LT(rms, scale);
}

TEST(ImageIo, PngRoundTripIsExactOnByteValues) {
  Image img(5, 7, 3);
  int k = 0;
  for (auto& v : img.values()) v = static_cast<float>((k++ * 37) % 256) / 255.0f;
  EXPECT_EQ(decode_png(encode_png(img)), img);
}

TEST(ImageIo, WriteClampsAndRounds) {
  Image img(1, 2, 3, std::vector<float>{-1.0f, 2.0f, 0.5f, 0.1f, 0.2f, 0.3f});
  const Image back = decode_png(encode_png(img));
  EXPECT_EQ(back.values()[0], 0.0f);
  EXPECT_EQ(back.values()[1], 1.0f);
  EXPECT_EQ(back.values()[2], 128.0f / 255.0f);
}

TEST(ImageIo, DecodeRejectsGarbage) {
  EXPECT_THROW(decode_png({1, 2, 3, 4}), FormatError);
  EXPECT_THROW(read_png("/nonexistent/x.png"), IoError);
}

TEST(ImageIo, ResizeBilinear) {
  const Image flat(7, 9, 3, 0.25f);
  const Image up = resize_bilinear(flat, {15, 20});
  EXPECT_EQ(up.extent(), (Extent{15, 20}));
  for (float v : up.values()) EXPECT_NEAR(v, 0.25f, 1e-6);
  std::mt19937_64 rng(61);
  const Image r = random_map(rng, 6, 6, 3, 0.0f, 1.0f);
  EXPECT_LT(max_abs_diff(resize_bilinear(r, {6, 6}), r), 1e-6);
}

}  // namespace
}  // namespace avatar
