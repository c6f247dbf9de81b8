// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

// Writes a randomly initialised AVTW1 weight file covering the full layer
// table. Useful for smoke tests and benchmarks when no trained decoder is
// available; the output is deterministic for a given seed.

#include <CLI11.hpp>

#include <iostream>

#include "avatar/errors.hpp"
#include "avatar/network.hpp"
#include "avatar/weights.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate random hourglass weights"};
  std::string out;
  avatar::RandomWeightsOptions options;
  app.add_option("--out", out, "Output AVTW1 path")->required();
  app.add_option("--seed", options.seed, "Random seed")->capture_default_str();
  app.add_option("--width-divisor", options.width_divisor, "Divide every VGG width by this")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    avatar::save_weights(avatar::make_random_weights(options), out);
  } catch (const avatar::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
