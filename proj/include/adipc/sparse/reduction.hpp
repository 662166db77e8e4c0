#pragma once

#include <stdexcept>
#include <vector>

#include "block_coo.hpp"

namespace adipc {

namespace detail {

template <class V> void zero_value(V& v) { v = V(); }
inline void zero_value(Real& v) { v = 0; }
inline void zero_value(Vec3& v) { v.setZero(); }
inline void zero_value(Mat3& v) { v.setZero(); }

template <class V> void add_value(V& a, const V& b) { a += b; }

inline void atomic_value_add(Real& a, const Real& b) { atomic_add(a, b); }
inline void atomic_value_add(Vec3& a, const Vec3& b) { atomic_add(a, b); }
inline void atomic_value_add(Mat3& a, const Mat3& b) { atomic_add(a, b); }

} // namespace detail

// Head-segmented sum over lane groups of width pol.lane_width. O maps each
// value to its segment id (nondecreasing). A head is a group start or an O
// change; heads whose run touches a group boundary merge atomically, interior
// runs write their sum directly. Deterministic mode reduces left to right.
template <class V>
std::vector<V> fast_segment_reduction(const std::vector<Index>& O,
                                      const std::vector<V>& values,
                                      Index n_segments, const ExecPolicy& pol) {
    const std::size_t n = values.size();
    if (O.size() != n) throw std::invalid_argument("segment map size mismatch");
    std::vector<V> R(n_segments);
    for (auto& r : R) detail::zero_value(r);
    if (n == 0) return R;

    if (pol.deterministic) {
        Index seg = O[0];
        V sum = values[0];
        for (std::size_t i = 1; i < n; ++i) {
            if (O[i] == seg) {
                detail::add_value(sum, values[i]);
            } else {
                R[seg] = sum;
                seg = O[i];
                sum = values[i];
            }
        }
        R[seg] = sum;
        return R;
    }

    const std::size_t w = static_cast<std::size_t>(pol.lane_width);
    const std::int64_t n_groups = static_cast<std::int64_t>((n + w - 1) / w);
    parallel_for(n_groups, pol, [&](std::int64_t gi) {
        const std::size_t begin = static_cast<std::size_t>(gi) * w;
        const std::size_t end = std::min(begin + w, n);
        std::size_t i = begin;
        while (i < end) {
            const Index seg = O[i];
            V sum = values[i];
            std::size_t j = i + 1;
            while (j < end && O[j] == seg) {
                detail::add_value(sum, values[j]);
                ++j;
            }
            const bool continues_left = (i == begin && begin > 0 && O[begin - 1] == seg);
            const bool continues_right = (j == end && end < n && O[end] == seg);
            if (continues_left || continues_right)
                detail::atomic_value_add(R[seg], sum);
            else
                R[seg] = sum;
            i = j;
        }
    });
    return R;
}

// Run-length reduction of a key-sorted stream into unique blocks. The segment
// map O is the exclusive prefix sum of adjacent key-change flags.
inline SortedSymBlockCoo fast_hash_reduction(const BlockTripletStream& sorted,
                                             Index n_block_rows,
                                             const ExecPolicy& pol) {
    SortedSymBlockCoo out;
    out.n_block_rows = n_block_rows;
    const std::size_t n = sorted.size();
    if (n == 0) return out;

    std::vector<Index> O(n);
    O[0] = 0;
    for (std::size_t i = 1; i < n; ++i)
        O[i] = O[i - 1] + (sorted.keys[i - 1] != sorted.keys[i] ? 1 : 0);
    const Index n_unique = O[n - 1] + 1;

    out.rows.resize(n_unique);
    out.cols.resize(n_unique);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0 || O[i] != O[i - 1]) {
            out.rows[O[i]] = block_key_row(sorted.keys[i]);
            out.cols[O[i]] = block_key_col(sorted.keys[i]);
        }
    }
    out.blocks = fast_segment_reduction(O, sorted.values, n_unique, pol);
    return out;
}

} // namespace adipc
