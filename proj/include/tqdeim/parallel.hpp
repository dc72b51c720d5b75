#pragma once

#include <cstddef>
#include <functional>

namespace tqdeim {

// Worker count for per-slice kernels. 1 (the default) runs everything inline.
void set_num_threads(unsigned count);
unsigned num_threads();

// Runs body(i) for i in [0, count). Iterations must be independent; results are
// identical for any thread count because no reduction crosses iterations.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace tqdeim
