// Copyright 2026 The Avatar Authors
// SPDX-License-Identifier: Apache-2.0

#include "avatar/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace avatar {
namespace {

int hardware_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

std::atomic<int> g_threads{hardware_threads()};

}  // namespace

void set_num_threads(int n) {
  g_threads.store(n <= 0 ? hardware_threads() : n);
}

int num_threads() { return g_threads.load(); }

void parallel_for(std::size_t count,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(num_threads()), count);
  if (workers <= 1) {
    body(0, count);
    return;
  }

  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = count / workers;
  const std::size_t extra = count % workers;

  auto run = [&](std::size_t w, std::size_t begin, std::size_t end) {
    try {
      body(begin, end);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  std::size_t begin = 0;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
    if (w + 1 == workers) {
      run(w, begin, end);
    } else {
      pool.emplace_back(run, w, begin, end);
    }
    begin = end;
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace avatar
