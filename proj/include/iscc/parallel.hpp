#pragma once

#include <cstddef>
#include <functional>

namespace iscc::par {

// Runs fn(i) for every i in [0, n). Fans out over the available cores;
// nested calls run inline so worker counts stay bounded. Callers must make
// fn(i) independent of execution order.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace iscc::par
