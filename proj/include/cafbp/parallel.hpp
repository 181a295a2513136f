#pragma once

#include <cstddef>
#include <functional>

namespace cafbp {

// Number of worker threads used when a caller passes 0.
int default_thread_count();

// Runs body(i) for i in [0, n) on up to `threads` workers. Work items must be
// independent; ordering of side effects across items is unspecified.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace cafbp
