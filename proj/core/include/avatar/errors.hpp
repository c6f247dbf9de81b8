// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace avatar {

// Base of every error thrown by the engine. The CLI maps the concrete
// subclass to a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor/feature-map dimensions do not fit the operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A weight file or image file is malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Missing weight tensors, empty style kernels and similar setup mistakes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// User supplied parameters out of range.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Eigendecomposition failure or singular statistics.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace avatar
