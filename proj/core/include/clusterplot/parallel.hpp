#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace clusterplot {

// Process-wide worker count used by parallel_for. Defaults to the hardware
// concurrency. Results never depend on this value: every parallel loop writes
// only to its own index.
void set_thread_count(std::size_t n);
std::size_t thread_count();

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace clusterplot
