// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate: one PASS/FAIL line per criterion. Exits non-zero when
// any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "avatar/decorator.hpp"
#include "avatar/image_io.hpp"
#include "avatar/network.hpp"
#include "avatar/parallel.hpp"
#include "avatar/pipeline.hpp"
#include "avatar/selftest.hpp"
#include "avatar/wct.hpp"
#include "support/oracles.hpp"

namespace avatar {
namespace {

using testing::distinct_count;
using testing::max_abs_diff;
using testing::correlated_map;
using testing::random_map;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Largest cosine similarity between two different cells of f after it is
// normalised with its own transform.
double max_cell_cosine(const FeatureMap& f, TransformFlavor flavor) {
  const FeatureMap n = project(f, fit_transform(f, flavor));
  const int c = n.channels();
  double worst = -1.0;
  for (std::size_t a = 0; a < n.cells(); ++a) {
    for (std::size_t b = a + 1; b < n.cells(); ++b) {
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (int k = 0; k < c; ++k) {
        const double x = n.data()[a * c + k], y = n.data()[b * c + k];
        ab += x * y;
        aa += x * x;
        bb += y * y;
      }
      worst = std::max(worst, ab / std::sqrt(aa * bb));
    }
  }
  return worst;
}

// Shapes spread from 4x4x3 to 16x16x32.
void sweep_shape(int i, int n, std::mt19937_64& rng, int& side, int& c) {
  const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
  side = static_cast<int>(std::lround(4 + 12 * t));
  c = static_cast<int>(std::lround(3 + 29 * t));
  std::uniform_int_distribution<int> jitter(0, 1);
  if (i != 0 && i != n - 1) side = std::min(16, side + jitter(rng));
}

DecoratorConfig pure_decoration(int p, int s, TransformFlavor flavor) {
  DecoratorConfig cfg;
  cfg.patch_size = p;
  cfg.stride = s;
  cfg.flavor = flavor;
  cfg.alpha = 0.0f;
  return cfg;
}

Outcome whitening_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int failures = 0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    int side = 0, c = 0;
    sweep_shape(i, n, rng, side, c);
    const FeatureMap f = correlated_map(rng, side, side, c);
    const auto t = fit_transform(f, TransformFlavor::ZcaCov);
    const double err =
        (covariance(project(f, t)) - Eigen::MatrixXd::Identity(c, c)).norm();
    worst = std::max(worst, err / c);
    if (!(err < 1e-3 * c)) ++failures;
  }
  const double elapsed = seconds_since(t0);
  return {failures == 0 && elapsed < 5.0,
          "50 maps 4x4x3..16x16x32, max ||cov-I||_F/C = " + fmt(worst) +
              " (< 1e-3), " + fmt(elapsed) + " s (< 5 s)"};
}

Outcome round_trip() {
  std::mt19937_64 rng(102);
  double worst[3] = {0, 0, 0};
  double worst_moment = 0.0;
  const TransformFlavor flavors[] = {TransformFlavor::AdaIN, TransformFlavor::ZcaCov,
                                     TransformFlavor::ZcaGram};
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < 20; ++i) {
      int side = 0, c = 0;
      sweep_shape(i, 20, rng, side, c);
      const FeatureMap f = correlated_map(rng, side, side + 1, c);
      const auto t = fit_transform(f, flavors[k]);
      const FeatureMap back = reconstruct(project(f, t), t);
      worst[k] = std::max(worst[k], max_abs_diff(back, f));
      if (flavors[k] == TransformFlavor::AdaIN) {
        const auto a = channel_moments(back);
        const auto b = channel_moments(f);
        for (int ch = 0; ch < c; ++ch) {
          worst_moment = std::max({worst_moment, std::abs(double(a.mean[ch]) - b.mean[ch]),
                                   std::abs(double(a.std[ch]) - b.std[ch])});
        }
      }
    }
  }
  const bool pass = worst[0] < 1e-3 && worst[1] < 1e-3 && worst[2] < 1e-3 && worst_moment < 1e-4;
  return {pass, "max abs adain " + fmt(worst[0]) + ", zca " + fmt(worst[1]) + ", zca-gram " +
                    fmt(worst[2]) + " (< 1e-3); adain moments " + fmt(worst_moment) +
                    " (< 1e-4)"};
}

Outcome matching_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(103);
  const int ps[] = {1, 3, 5};
  const int ss[] = {1, 2, 4};
  int mismatched = 0;
  for (int i = 0; i < 100; ++i) {
    const int p = ps[i % 3];
    const int s = ss[(i / 3) % 3];
    std::uniform_int_distribution<int> content_side(p / 2 + 1, 10);
    std::uniform_int_distribution<int> style_side(p, 10);
    std::uniform_int_distribution<int> channels(1, 4);
    const int c = channels(rng);
    const FeatureMap content = random_map(rng, content_side(rng), content_side(rng), c);
    const FeatureMap style = random_map(rng, style_side(rng), style_side(rng), c);
    if (match_patches(content, StyleKernel(style, p, s)) !=
        brute_force_matches(content, style, p, s)) {
      ++mismatched;
    }
  }
  const double elapsed = seconds_since(t0);
  return {mismatched == 0 && elapsed < 30.0,
          "100 instances P{1,3,5} S{1,2,4} <=10x10x4, " + std::to_string(mismatched) +
              " mismatched, " + fmt(elapsed) + " s (< 30 s)"};
}

// "Distinct cells" for a cosine matcher means distinct directions in the
// normalised space: instances with two cells closer than 1 - 1e-6 in cosine
// are redrawn, since float scores cannot order them.
Outcome self_identity() {
  std::mt19937_64 rng(104);
  double worst = 0.0;
  int redrawn = 0;
  for (auto flavor : {TransformFlavor::AdaIN, TransformFlavor::ZcaCov, TransformFlavor::ZcaGram}) {
    for (int i = 0; i < 10; ++i) {
      FeatureMap z = correlated_map(rng, 6 + i % 5, 7 + i % 3, 3 + i % 6);
      while (max_cell_cosine(z, flavor) > 1.0 - 1e-6) {
        z = correlated_map(rng, 6 + i % 5, 7 + i % 3, 3 + i % 6);
        ++redrawn;
      }
      worst = std::max(worst, max_abs_diff(style_decorate(z, z, pure_decoration(1, 1, flavor)), z));
    }
  }
  return {worst < 1e-3, "30 maps, 3 flavours (" + std::to_string(redrawn) +
                            " redrawn for collinear cells), max abs " + fmt(worst) + " (< 1e-3)"};
}

Outcome coverage_separation() {
  std::mt19937_64 rng(105);
  const FeatureMap style = random_map(rng, 12, 12, 4);
  FeatureMap content = style;
  const float offset[] = {40.0f, -25.0f, 60.0f, 30.0f};
  for (std::size_t i = 0; i < content.cells(); ++i)
    for (int c = 0; c < 4; ++c) content.data()[i * 4 + c] += offset[c];
  const auto cfg = pure_decoration(3, 1, TransformFlavor::ZcaCov);
  const int decorated =
      distinct_count(decorate(content, prepare_decorator_style(style, cfg), cfg).selection);
  const int swapped = distinct_count(match_patches(content, StyleKernel(style, 3, 1)));
  return {decorated > swapped, "distinct patches: decoration " + std::to_string(decorated) +
                                   " vs style_swap " + std::to_string(swapped)};
}

Outcome statistics_transfer() {
  std::mt19937_64 rng(106);
  int failures = 0;
  double worst_ratio = 0.0;
  for (float alpha : {0.0f, 0.8f}) {
    for (int i = 0; i < 20; ++i) {
      const FeatureMap zc = random_map(rng, 8 + i % 4, 9, 4, -1.0f, 1.0f);
      const FeatureMap zs = correlated_map(rng, 10, 10 + i % 3, 4);
      DecoratorConfig cfg = pure_decoration(3, 1, TransformFlavor::ZcaCov);
      cfg.alpha = alpha;
      const FeatureMap zcs = style_decorate(zc, zs, cfg);
      const double after = (gram(zcs) - gram(zs)).norm();
      const double before = (gram(zc) - gram(zs)).norm();
      worst_ratio = std::max(worst_ratio, after / before);
      if (!(after < before)) ++failures;
    }
  }
  return {failures == 0, "20 instances x alpha {0, 0.8}, max ||G(cs)-G(s)|| / ||G(c)-G(s)|| = " +
                             fmt(worst_ratio) + " (< 1)"};
}

Outcome fusion_moments() {
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int c = 1 + i % 8;
    const FeatureMap d = random_map(rng, 5 + i % 7, 9, c, -4.0f, 2.0f);
    const FeatureMap e = correlated_map(rng, 6, 4 + i % 5, c);
    const auto got = channel_moments(style_fusion(d, e));
    const auto want = channel_moments(e);
    for (int ch = 0; ch < c; ++ch) {
      worst = std::max({worst, std::abs(double(got.mean[ch]) - want.mean[ch]),
                        std::abs(double(got.std[ch]) - want.std[ch])});
    }
  }
  return {worst < 1e-4, "20 pairs, max moment error " + fmt(worst) + " (< 1e-4)"};
}

Outcome adjoint_linearity() {
  std::mt19937_64 rng(108);
  double worst_adjoint = 0.0, worst_linear = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 30; ++i) {
    const int kh = 1 + 2 * (i % 3), stride = 1 + i % 3;
    const int in = 1 + i % 5, out = 1 + (i * 7) % 13;
    const ConvKernel k = testing::random_kernel(rng, kh, kh, in, out, false);
    const FeatureMap x = random_map(rng, kh + stride * (2 + i % 3), kh + stride * 3, in);
    const FeatureMap cx = conv2d(x, k, stride, PaddingSpec::none());
    const FeatureMap y = random_map(rng, cx.height(), cx.width(), out);
    const double lhs = testing::dot(cx, y);
    const double rhs = testing::dot(x, conv_transpose2d(y, k, stride));
    worst_adjoint = std::max(worst_adjoint, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));

    const FeatureMap x2 = random_map(rng, x.height(), x.width(), in);
    const float a = 0.6f, b = -1.7f;
    const FeatureMap l = conv2d(axpby(a, x, b, x2), k, stride, PaddingSpec::none());
    const FeatureMap r = axpby(a, cx, b, conv2d(x2, k, stride, PaddingSpec::none()));
    worst_linear = std::max(worst_linear, max_abs_diff(l, r));

    const FeatureMap y2 = random_map(rng, y.height(), y.width(), out);
    const FeatureMap tl = conv_transpose2d(axpby(a, y, b, y2), k, stride);
    const FeatureMap tr = axpby(a, conv_transpose2d(y, k, stride), b, conv_transpose2d(y2, k, stride));
    worst_linear = std::max(worst_linear, max_abs_diff(tl, tr));

    worst_oracle = std::max(worst_oracle,
                            max_abs_diff(conv2d(x, k, stride, PaddingSpec::zero(kh / 2)),
                                         testing::naive_conv2d(x, k, stride, kh / 2)));
  }
  const bool pass = worst_adjoint < 1e-4 && worst_linear < 1e-4 && worst_oracle < 1e-4;
  return {pass, "30 cases, adjoint rel " + fmt(worst_adjoint) + ", linearity " +
                    fmt(worst_linear) + ", loop oracle " + fmt(worst_oracle) + " (< 1e-4)"};
}

Image pattern_image(int h, int w, float phase) {
  Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = 0.5f + 0.45f * std::sin(0.13f * x + 0.07f * y + phase);
      img.at(y, x, 1) = 0.5f + 0.45f * std::cos(0.11f * y - phase);
      img.at(y, x, 2) = ((x / 8 + y / 8) % 2) ? 0.8f : 0.2f;
    }
  return img;
}

const NetworkWeights& reference_weights() {
  static const NetworkWeights w = make_random_weights({.seed = 2026});
  return w;
}

Outcome shape_contract() {
  const Stylizer stylizer(reference_weights());
  const Image out = stylizer.stylize(pattern_image(57, 91, 0.0f),
                                     std::vector<StyleImage>{{pattern_image(64, 64, 1.0f), 1.0f}},
                                     DecoratorConfig{});
  const bool pass = out.height() == 57 && out.width() == 91 && out.channels() == 3;
  return {pass, "57x91 -> " + std::to_string(out.height()) + "x" + std::to_string(out.width())};
}

Outcome determinism() {
  const Stylizer stylizer(reference_weights());
  const Image content = pattern_image(57, 91, 0.3f);
  const std::vector<StyleImage> styles{{pattern_image(64, 64, 1.4f), 1.0f}};
  set_num_threads(1);
  const auto one = encode_png(stylizer.stylize(content, styles, DecoratorConfig{}));
  set_num_threads(8);
  const auto eight = encode_png(stylizer.stylize(content, styles, DecoratorConfig{}));
  set_num_threads(0);
  return {one == eight, "PNG bytes threads=1 vs threads=8: " +
                            std::string(one == eight ? "identical" : "differ")};
}

Outcome smoke_performance() {
  const auto path = std::filesystem::temp_directory_path() / "avatar_acceptance.avtw";
  save_weights(reference_weights(), path);
  StylizeRequest request;
  request.content = pattern_image(256, 256, 0.2f);
  request.styles = {{pattern_image(256, 256, 1.1f), 1.0f}};
  request.decorator.flavor = TransformFlavor::AdaIN;
  request.weights_path = path;
  set_num_threads(1);
  const auto t0 = Clock::now();
  const Image out = stylize(request);
  const double elapsed = seconds_since(t0);
  set_num_threads(0);
  std::filesystem::remove(path);
  return {elapsed < 10.0 && out.height() == 256,
          "256x256 AdaIN, full-width VGG-19, threads=1, weights load included: " +
              fmt(elapsed) + " s (< 10 s)"};
}

}  // namespace
}  // namespace avatar

int main() {
  using avatar::Outcome;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"whitening-identity", avatar::whitening_identity},
      {"round-trip", avatar::round_trip},
      {"matching-oracle", avatar::matching_oracle},
      {"self-identity", avatar::self_identity},
      {"coverage-separation", avatar::coverage_separation},
      {"statistics-transfer", avatar::statistics_transfer},
      {"style-fusion-moments", avatar::fusion_moments},
      {"adjoint-linearity", avatar::adjoint_linearity},
      {"shape-contract", avatar::shape_contract},
      {"determinism", avatar::determinism},
      {"smoke-performance", avatar::smoke_performance},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-22s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}
