#pragma once

#include <atomic>
#include <cstddef>
#include <future>
#include <vector>

namespace si::detail {

// Runs fn(i) for i in [0, count) and returns results indexed by i. Work items
// are seeded by index, so any thread count yields bit-identical output as
// long as callers reduce the returned vector in index order.
template <typename Fn>
auto ordered_parallel_map(std::size_t count, int threads, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{0}))> {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out(count);
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&]() {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        out[i] = fn(i);
      }
    }));
  }
  for (auto& t : tasks) t.get();
  return out;
}

}  // namespace si::detail
