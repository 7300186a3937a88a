#pragma once

#include <cstddef>
#include <functional>

namespace ciris {

/// Worker cap: COMPLEXIRIS_THREADS if set, else hardware concurrency.
/// set_thread_limit overrides both (1 forces sequential execution).
std::size_t thread_limit();
void set_thread_limit(std::size_t n);

/// Runs body(i) for i in [0, n). Work items must write disjoint outputs;
/// any cross-item reduction is the caller's job and happens in index order,
/// so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace ciris
