// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "avatar/decorator.hpp"
#include "avatar/wct.hpp"

namespace avatar {
namespace {

int mirror(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

FeatureMap random_map(std::mt19937_64& rng, int h, int w, int c) {
  std::normal_distribution<float> normal(0.0f, 1.0f);
  // Mild channel mixing (I + M, ||M|| < 1) so the covariance is not
  // diagonal but stays well conditioned against the 1e-5 regulariser.
  std::vector<float> mix(static_cast<std::size_t>(c) * c);
  const float amp = 0.3f / std::sqrt(static_cast<float>(c));
  for (auto& v : mix) v = amp * normal(rng);
  for (int i = 0; i < c; ++i) mix[i * c + i] += 1.0f;
  std::vector<float> offset(c);
  for (auto& v : offset) v = 2.0f * normal(rng);
  FeatureMap f(h, w, c);
  std::vector<float> raw(c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (auto& v : raw) v = normal(rng);
      auto cell = f.cell(y, x);
      for (int o = 0; o < c; ++o) {
        float acc = offset[o];
        for (int i = 0; i < c; ++i) acc += mix[o * c + i] * raw[i];
        cell[o] = acc;
      }
    }
  }
  return f;
}

}  // namespace

std::vector<int> brute_force_matches(const FeatureMap& content, const FeatureMap& style,
                                     int patch_size, int stride) {
  const int p = patch_size;
  const int half = p / 2;
  const int c = content.channels();
  const int rows = (style.height() - p) / stride + 1;
  const int cols = (style.width() - p) / stride + 1;

  struct Patch {
    std::vector<double> v;
    double norm;
  };
  std::vector<Patch> bank;
  for (int r = 0; r < rows; ++r) {
    for (int q = 0; q < cols; ++q) {
      Patch patch;
      double sq = 0.0;
      for (int ky = 0; ky < p; ++ky) {
        for (int kx = 0; kx < p; ++kx) {
          for (int ch = 0; ch < c; ++ch) {
            const double v = style.at(r * stride + ky, q * stride + kx, ch);
            patch.v.push_back(v);
            sq += v * v;
          }
        }
      }
      patch.norm = std::sqrt(sq);
      bank.push_back(std::move(patch));
    }
  }

  std::vector<int> best(content.cells(), 0);
  std::vector<double> query;
  for (int y = 0; y < content.height(); ++y) {
    for (int x = 0; x < content.width(); ++x) {
      query.clear();
      double qsq = 0.0;
      for (int ky = 0; ky < p; ++ky) {
        for (int kx = 0; kx < p; ++kx) {
          const int sy = mirror(y - half + ky, content.height());
          const int sx = mirror(x - half + kx, content.width());
          for (int ch = 0; ch < c; ++ch) {
            const double v = content.at(sy, sx, ch);
            query.push_back(v);
            qsq += v * v;
          }
        }
      }
      const double qnorm = std::sqrt(qsq);
      double best_score = -2.0;
      int best_index = 0;
      for (std::size_t j = 0; j < bank.size(); ++j) {
        double dot = 0.0;
        for (std::size_t e = 0; e < query.size(); ++e) dot += query[e] * bank[j].v[e];
        const double denom = qnorm * bank[j].norm;
        const double score = denom > 0.0 ? dot / denom : 0.0;
        if (score > best_score) {
          best_score = score;
          best_index = static_cast<int>(j);
        }
      }
      best[static_cast<std::size_t>(y) * content.width() + x] = best_index;
    }
  }
  return best;
}

SelftestReport run_selftest(std::uint64_t seed, std::ostream& log) {
  SelftestReport report;
  std::mt19937_64 rng(seed);

  for (int i = 0; i < 20; ++i) {
    const int c = std::uniform_int_distribution<int>(3, 16)(rng);
    const int side = std::uniform_int_distribution<int>(6, 16)(rng);
    const int h = std::max(side, static_cast<int>(std::ceil(std::sqrt(2.0 * c))) + 1);
    const FeatureMap f = random_map(rng, h, side, c);
    const auto t = fit_transform(f, TransformFlavor::ZcaCov);
    const Eigen::MatrixXd cov = covariance(project(f, t));
    const double err = (cov - Eigen::MatrixXd::Identity(c, c)).norm();
    ++report.whitening_cases;
    if (!(err < 1e-3 * c)) ++report.whitening_failures;
  }
  log << (report.whitening_failures == 0 ? "PASS" : "FAIL") << " whitening identity ("
      << report.whitening_cases - report.whitening_failures << "/" << report.whitening_cases
      << ")\n";

  const int patch_sizes[] = {1, 3, 5};
  const int strides[] = {1, 2, 4};
  for (int i = 0; i < 30; ++i) {
    const int p = patch_sizes[i % 3];
    const int s = strides[(i / 3) % 3];
    const int c = std::uniform_int_distribution<int>(1, 4)(rng);
    std::uniform_int_distribution<int> side(std::max(3, p / 2 + 1), 10);
    std::uniform_int_distribution<int> style_side(p, 10);
    const FeatureMap content = random_map(rng, side(rng), side(rng), c);
    const FeatureMap style = random_map(rng, style_side(rng), style_side(rng), c);
    const auto got = match_patches(content, StyleKernel(style, p, s));
    const auto want = brute_force_matches(content, style, p, s);
    ++report.matching_cases;
    if (got != want) ++report.matching_failures;
  }
  log << (report.matching_failures == 0 ? "PASS" : "FAIL") << " matcher vs brute force ("
      << report.matching_cases - report.matching_failures << "/" << report.matching_cases
      << ")\n";
  return report;
}

}  // namespace avatar
