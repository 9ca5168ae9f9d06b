#pragma once

#include <functional>

namespace msde {

struct ExecPolicy {
  int threads = 1;
};

/// Fixed partition width for parallel Monte Carlo loops. Work is split into
/// blocks of this size regardless of the thread count, and per-block results
/// are reduced serially in block order, so estimates are bitwise independent
/// of how many threads executed the blocks.
inline constexpr long kBlockSize = 64;

/// Invokes work(lo, hi, block_index) for each block [lo, hi) of kBlockSize
/// consecutive items covering [0, n_items). Each block runs on exactly one
/// thread; the callable must only write to storage owned by its block index.
/// If callables throw, the exception from the lowest block index is rethrown
/// after all threads finish, so the surfaced error does not depend on
/// scheduling.
void for_each_block(long n_items, const ExecPolicy& exec,
                    const std::function<void(long, long, long)>& work);

}  // namespace msde
