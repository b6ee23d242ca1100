#pragma once

#include <cstddef>
#include <functional>

namespace biomark {

// Process-wide worker cap. Results of every parallel operation in this
// project are independent of the value (schedule-independence contract).
int worker_count();
void set_worker_count(int n);

// Runs fn(begin, end) over disjoint chunks of [0, n), possibly on several
// threads. fn must only write state owned by its chunk.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace biomark
