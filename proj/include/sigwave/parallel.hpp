#pragma once

// Index-parallel loops. Each index owns its output slot, so results never
// depend on the thread count.

#include <cstddef>
#include <functional>
#include <span>

namespace sigwave {

/// Worker count: set_thread_count(n > 0) if called, else $SIGMA_WAVE_THREADS, else 1.
/// set_thread_count(0) restores the environment default.
int thread_count();
void set_thread_count(int n);

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (tree) summation; the association order depends only on the length.
double pairwise_sum(std::span<const double> values);

}  // namespace sigwave
