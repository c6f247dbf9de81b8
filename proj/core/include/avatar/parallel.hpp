// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace avatar {

// Process-wide worker count used by parallel_for. 0 selects the hardware
// concurrency. Values are clamped to at least 1.
void set_num_threads(int n);
int num_threads();

// Runs body(begin, end) over disjoint contiguous chunks of [0, count).
// Every index is visited exactly once; callers must make each index's work
// independent so results do not depend on the chunking.
void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace avatar
