// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/wct.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "avatar/errors.hpp"

namespace avatar {
namespace {

using RowMajorMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajorMatrixXf> as_matrix(const FeatureMap& f) {
  return {f.data(), static_cast<Eigen::Index>(f.cells()), f.channels()};
}

Eigen::VectorXd mean_vector(const FeatureMap& f) {
  return as_matrix(f).cast<double>().colwise().mean().transpose();
}

void check_channels(const FeatureMap& f, const FeatureTransform& t, const char* op) {
  if (f.channels() != t.channels()) {
    throw ShapeError(std::string(op) + ": map has " + std::to_string(f.channels()) +
                     " channels, transform was fitted on " + std::to_string(t.channels()));
  }
}

// Applies `m` to every cell vector as a 1x1 convolution with `bias`.
FeatureMap apply_matrix(const FeatureMap& f, const Eigen::MatrixXf& m,
                        std::vector<float> bias) {
  const int c = f.channels();
  ConvKernel k(1, 1, c, c);
  for (int ci = 0; ci < c; ++ci) {
    for (int co = 0; co < c; ++co) k.weight(0, 0, ci, co) = m(co, ci);
  }
  k.bias = std::move(bias);
  return PackedConv(k).apply(f, 1);
}

FeatureTransform fit_zca(const Eigen::MatrixXd& stat, TransformFlavor flavor,
                         std::vector<float> mean, double eps) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(stat);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigendecomposition failed for " +
                       std::to_string(stat.rows()) + "x" + std::to_string(stat.cols()) +
                       " statistic of " + std::string(flavor_name(flavor)));
  }
  Eigen::VectorXd values = solver.eigenvalues().cwiseMax(0.0).array() + eps;
  if (values.minCoeff() <= 0.0) {
    std::ostringstream msg;
    msg << "singular " << flavor_name(flavor) << " statistic: eigenvalues in ["
        << solver.eigenvalues().minCoeff() << ", " << solver.eigenvalues().maxCoeff()
        << "], condition number infinite with eps=" << eps;
    throw NumericError(msg.str());
  }
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const Eigen::VectorXd root = values.cwiseSqrt();

  FeatureTransform t;
  t.flavor = flavor;
  t.mean = std::move(mean);
  t.whiten = (u * root.cwiseInverse().asDiagonal() * u.transpose()).cast<float>();
  t.color = (u * root.asDiagonal() * u.transpose()).cast<float>();
  return t;
}

}  // namespace

std::string_view flavor_name(TransformFlavor flavor) {
  switch (flavor) {
    case TransformFlavor::AdaIN: return "adain";
    case TransformFlavor::ZcaCov: return "zca";
    case TransformFlavor::ZcaGram: return "zca-gram";
  }
  return "unknown";
}

ChannelMoments channel_moments(const FeatureMap& f, double eps) {
  const int c = f.channels();
  const auto n = static_cast<double>(f.cells());
  std::vector<double> sum(c, 0.0);
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const float* v = f.data() + i * c;
    for (int ch = 0; ch < c; ++ch) sum[ch] += v[ch];
  }
  std::vector<double> var(c, 0.0);
  for (int ch = 0; ch < c; ++ch) sum[ch] /= n;
  for (std::size_t i = 0; i < f.cells(); ++i) {
    const float* v = f.data() + i * c;
    for (int ch = 0; ch < c; ++ch) {
      const double d = v[ch] - sum[ch];
      var[ch] += d * d;
    }
  }
  ChannelMoments m;
  m.mean.resize(c);
  m.std.resize(c);
  for (int ch = 0; ch < c; ++ch) {
    m.mean[ch] = static_cast<float>(sum[ch]);
    m.std[ch] = static_cast<float>(std::sqrt(var[ch] / n + eps));
  }
  return m;
}

Eigen::MatrixXd covariance(const FeatureMap& f) {
  const Eigen::MatrixXd x = as_matrix(f).cast<double>();
  const Eigen::RowVectorXd mu = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mu;
  return (centered.transpose() * centered) / static_cast<double>(x.rows());
}

Eigen::MatrixXd gram(const FeatureMap& f) {
  const Eigen::MatrixXd x = as_matrix(f).cast<double>();
  return (x.transpose() * x) / static_cast<double>(x.rows());
}

FeatureTransform fit_transform(const FeatureMap& f, TransformFlavor flavor, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("epsilon must be non-negative");
  const int c = f.channels();
  switch (flavor) {
    case TransformFlavor::AdaIN: {
      const auto m = channel_moments(f, eps);
      FeatureTransform t;
      t.flavor = flavor;
      t.mean = m.mean;
      t.whiten = Eigen::MatrixXf::Zero(c, c);
      t.color = Eigen::MatrixXf::Zero(c, c);
      for (int ch = 0; ch < c; ++ch) {
        if (!(m.std[ch] > 0.0f)) {
          throw NumericError("channel " + std::to_string(ch) +
                             " has zero standard deviation with eps=" + std::to_string(eps));
        }
        t.whiten(ch, ch) = 1.0f / m.std[ch];
        t.color(ch, ch) = m.std[ch];
      }
      return t;
    }
    case TransformFlavor::ZcaCov: {
      const Eigen::VectorXd mu = mean_vector(f);
      std::vector<float> mean(c);
      for (int ch = 0; ch < c; ++ch) mean[ch] = static_cast<float>(mu(ch));
      return fit_zca(covariance(f), flavor, std::move(mean), eps);
    }
    case TransformFlavor::ZcaGram:
      return fit_zca(gram(f), flavor, std::vector<float>(c, 0.0f), eps);
  }
  throw ValidationError("unknown transform flavor");
}

FeatureMap project(const FeatureMap& f, const FeatureTransform& t) {
  check_channels(f, t, "project");
  const int c = f.channels();
  FeatureMap centered = f;
  for (std::size_t i = 0; i < f.cells(); ++i) {
    float* v = centered.data() + i * c;
    for (int ch = 0; ch < c; ++ch) v[ch] -= t.mean[ch];
  }
  if (t.flavor == TransformFlavor::AdaIN) {
    for (std::size_t i = 0; i < f.cells(); ++i) {
      float* v = centered.data() + i * c;
      for (int ch = 0; ch < c; ++ch) v[ch] *= t.whiten(ch, ch);
    }
    return centered;
  }
  return apply_matrix(centered, t.whiten, {});
}

FeatureMap reconstruct(const FeatureMap& normalized, const FeatureTransform& t) {
  check_channels(normalized, t, "reconstruct");
  const int c = normalized.channels();
  if (t.flavor == TransformFlavor::AdaIN) {
    FeatureMap out = normalized;
    for (std::size_t i = 0; i < out.cells(); ++i) {
      float* v = out.data() + i * c;
      for (int ch = 0; ch < c; ++ch) v[ch] = v[ch] * t.color(ch, ch) + t.mean[ch];
    }
    return out;
  }
  return apply_matrix(normalized, t.color, t.mean);
}

}  // namespace avatar
