// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "avatar/tensor.hpp"

namespace avatar {

// Whitening regulariser; also the variance floor for channel std.
inline constexpr double kDefaultEpsilon = 1e-5;

enum class TransformFlavor {
  AdaIN,    // per-channel mean/std
  ZcaCov,   // ZCA on the covariance matrix
  ZcaGram,  // ZCA on the (uncentered) Gram matrix
};

std::string_view flavor_name(TransformFlavor flavor);

struct ChannelMoments {
  std::vector<float> mean;
  std::vector<float> std;  // sqrt(var + eps)

  int channels() const { return static_cast<int>(mean.size()); }
};

// Population moments over all H*W cells.
ChannelMoments channel_moments(const FeatureMap& f, double eps = kDefaultEpsilon);

// (1/N) sum (z_n - mu)(z_n - mu)^T, accumulated in double.
Eigen::MatrixXd covariance(const FeatureMap& f);
// (1/N) sum z_n z_n^T.
Eigen::MatrixXd gram(const FeatureMap& f);

// Projection (whitening) / reconstruction (coloring) pair fitted to one
// feature map. project() computes whiten * (z - mean); reconstruct()
// computes color * z + mean.
struct FeatureTransform {
  TransformFlavor flavor = TransformFlavor::ZcaCov;
  std::vector<float> mean;  // zero for ZcaGram
  Eigen::MatrixXf whiten;   // diagonal for AdaIN
  Eigen::MatrixXf color;

  int channels() const { return static_cast<int>(mean.size()); }
};

// ZCA flavours eigendecompose the statistic as U S U^T and use
// whiten = U (S + eps)^-1/2 U^T, color = U (S + eps)^1/2 U^T, with negative
// eigenvalues clamped to zero. Throws NumericError when the solver fails or
// a regularised eigenvalue is not positive (eps == 0 with a singular map).
FeatureTransform fit_transform(const FeatureMap& f, TransformFlavor flavor,
                               double eps = kDefaultEpsilon);

FeatureMap project(const FeatureMap& f, const FeatureTransform& t);
FeatureMap reconstruct(const FeatureMap& normalized, const FeatureTransform& t);

}  // namespace avatar
