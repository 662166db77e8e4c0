#pragma once

#include <ostream>
#include <vector>

#include "block_coo.hpp"

namespace adipc {

// y = A x with A stored as its upper block triangle. Off-diagonal entries
// contribute twice: H * x[col] into row and H^T * x[row] into col. Parallel
// mode accumulates per-lane-group row runs and merges through atomics.
inline std::vector<Vec3> srbk_spmv(const SortedSymBlockCoo& A,
                                   const std::vector<Vec3>& x,
                                   const ExecPolicy& pol) {
    std::vector<Vec3> y(x.size(), Vec3::Zero());
    const std::size_t n = A.size();
    if (n == 0) return y;

    if (effective_threads(pol) <= 1) {
        for (std::size_t e = 0; e < n; ++e) {
            const Index r = A.rows[e], c = A.cols[e];
            y[r] += A.blocks[e] * x[c];
            if (r != c) y[c] += A.blocks[e].transpose() * x[r];
        }
        return y;
    }

    const std::size_t w = static_cast<std::size_t>(pol.lane_width);
    const std::int64_t n_groups = static_cast<std::int64_t>((n + w - 1) / w);
    parallel_for(n_groups, pol, [&](std::int64_t gi) {
        const std::size_t begin = static_cast<std::size_t>(gi) * w;
        const std::size_t end = std::min(begin + w, n);
        std::size_t i = begin;
        while (i < end) {
            const std::uint32_t row = A.rows[i];
            Vec3 run = Vec3::Zero();
            std::size_t j = i;
            for (; j < end && A.rows[j] == row; ++j) {
                run += A.blocks[j] * x[A.cols[j]];
                if (A.cols[j] != row)
                    atomic_add(y[A.cols[j]], A.blocks[j].transpose() * x[row]);
            }
            atomic_add(y[row], run);
            i = j;
        }
    });
    return y;
}

// Plain-text dump of the reduced matrix, one block per line.
inline void dump_block_coo(const SortedSymBlockCoo& A, std::ostream& os) {
    os << A.n_block_rows << " " << A.size() << "\n";
    for (std::size_t e = 0; e < A.size(); ++e) {
        os << A.rows[e] << " " << A.cols[e];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) os << " " << A.blocks[e](i, j);
        os << "\n";
    }
}

} // namespace adipc
