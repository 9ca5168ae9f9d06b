#include "msde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace msde {

void for_each_block(long n_items, const ExecPolicy& exec,
                    const std::function<void(long, long, long)>& work) {
  if (n_items <= 0) return;
  const long n_blocks = (n_items + kBlockSize - 1) / kBlockSize;
  const int threads = std::max(1, exec.threads);

  auto run_block = [&](long b) {
    const long lo = b * kBlockSize;
    const long hi = std::min(n_items, lo + kBlockSize);
    work(lo, hi, b);
  };

  if (threads == 1 || n_blocks == 1) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_blocks));
    for (long b = 0; b < n_blocks; ++b) {
      try {
        run_block(b);
      } catch (...) {
        errors[static_cast<std::size_t>(b)] = std::current_exception();
        break;  // later blocks cannot produce an earlier error
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    return;
  }

  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_blocks));
  std::atomic<long> next{0};
  auto worker = [&]() {
    for (;;) {
      const long b = next.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        run_block(b);
      } catch (...) {
        errors[static_cast<std::size_t>(b)] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  const int n_workers = static_cast<int>(
      std::min<long>(threads, n_blocks));
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace msde
