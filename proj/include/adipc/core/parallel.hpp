#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <thread>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "types.hpp"

namespace adipc {

// Execution knobs threaded through every kernel. deterministic == true forces
// sequential left-to-right accumulation (bitwise reproducible runs).
struct ExecPolicy {
    bool deterministic = false;
    int threads = 0;    // 0: use the process-wide default
    int lane_width = 32; // group width for segmented reductions
};

inline int& process_thread_default() {
    static int n = [] {
        if (const char* env = std::getenv("ADIPC_THREADS")) {
            int v = std::atoi(env);
            if (v > 0) return v;
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }();
    return n;
}

inline void set_default_threads(int n) {
    if (n > 0) process_thread_default() = n;
}

inline int effective_threads(const ExecPolicy& pol) {
    if (pol.deterministic) return 1;
    return pol.threads > 0 ? pol.threads : process_thread_default();
}

template <class F>
void parallel_for(std::int64_t n, const ExecPolicy& pol, F&& fn) {
    const int nt = effective_threads(pol);
    if (nt <= 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
#else
    for (std::int64_t i = 0; i < n; ++i) fn(i);
#endif
}

inline void atomic_add(Real& slot, Real v) {
    std::atomic_ref<Real>(slot).fetch_add(v, std::memory_order_relaxed);
}

inline void atomic_add(Vec3& slot, const Vec3& v) {
    for (int k = 0; k < 3; ++k) atomic_add(slot[k], v[k]);
}

inline void atomic_add(Mat3& slot, const Mat3& v) {
    for (int k = 0; k < 9; ++k) atomic_add(slot.data()[k], v.data()[k]);
}

} // namespace adipc
