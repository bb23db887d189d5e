#pragma once

// Replication driver. Each replication writes only its own result slot and
// draws from its own counter-based stream, so the serial and OpenMP paths
// produce identical results for any thread count.

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsc {

enum class Execution { serial, parallel };

/// Calls fn(i) for i in [0, count). Reference implementation.
template <class Fn>
void for_each_replicate_serial(std::size_t count, Fn&& fn) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
}

/// Same contract as for_each_replicate_serial, distributed over OpenMP threads.
/// `fn` must not throw.
template <class Fn>
void for_each_replicate_parallel(std::size_t count, Fn&& fn) {
    const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) fn(static_cast<std::size_t>(i));
}

template <class Fn>
void for_each_replicate(std::size_t count, Execution exec, Fn&& fn) {
    if (exec == Execution::parallel)
        for_each_replicate_parallel(count, fn);
    else
        for_each_replicate_serial(count, fn);
}

/// Collects fn(i) into a vector, one slot per replication.
template <class T, class Fn>
std::vector<T> replicate(std::size_t count, Execution exec, Fn&& fn) {
    std::vector<T> out(count);
    for_each_replicate(count, exec, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

inline void set_thread_count(int threads) {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace gsc
