#pragma once

#include <cstddef>
#include <functional>

namespace sonoforge::cli {

/// Worker count: hardware concurrency, capped by SONOFORGE_THREADS when set
/// to a positive integer.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Items are claimed
/// in order; each item is processed exactly once. fn must not throw.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace sonoforge::cli
