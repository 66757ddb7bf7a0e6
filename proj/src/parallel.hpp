#pragma once

#include <thread>
#include <vector>

namespace graphprior::detail {

// Runs fn(i) for i in [0, count) on up to `jobs` threads, strided so the
// assignment of work items does not depend on timing.
template <class Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  const int workers = jobs < count ? jobs : count;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&fn, w, workers, count] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace graphprior::detail
