#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace fnlab {

/// Worker count for node-parallel loops; 1 runs inline.
int thread_count();
void set_thread_count(int n);

/// Runs body(i) for i in [0, n). Each index writes only its own slots, so the
/// result does not depend on the worker count.
template <class Body>
void parallel_for(int n, Body&& body) {
  const int workers = std::min(thread_count(), std::max(1, n / 256));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
      const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
      for (int i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fnlab
