#pragma once

#include <cstddef>
#include <functional>

namespace symcap {

// Worker count from SYMCAP_THREADS, else the hardware concurrency.
int thread_count();

// Runs fn(i) for i in [0, n). Work is handed out dynamically, so fn must
// write only to slots owned by i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace symcap
