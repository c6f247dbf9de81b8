// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "avatar/tensor.hpp"

namespace avatar {

// Exhaustive cosine-similarity nearest neighbour: for every position of the
// reflect-101 padded content, compares its P x P patch against every
// stride-S style patch in double precision. Zero-norm patches score 0;
// ties resolve to the lowest style index. Independent of the convolution
// path used by match_patches.
std::vector<int> brute_force_matches(const FeatureMap& content, const FeatureMap& style,
                                     int patch_size, int stride);

struct SelftestReport {
  int whitening_cases = 0;
  int whitening_failures = 0;
  int matching_cases = 0;
  int matching_failures = 0;

  bool passed() const { return whitening_failures == 0 && matching_failures == 0; }
};

// Randomised whitening-identity and matcher-vs-brute-force checks; one
// line per suite is written to `log`.
SelftestReport run_selftest(std::uint64_t seed, std::ostream& log);

}  // namespace avatar
