#pragma once

#include <cstdint>
#include <vector>

#include "../core/parallel.hpp"
#include "../core/types.hpp"

namespace adipc {

// 64-bit packed block coordinate, row in the high half so that plain integer
// order equals row-major block order.
inline std::uint64_t make_block_key(std::uint32_t row, std::uint32_t col) {
    return (static_cast<std::uint64_t>(row) << 32) | col;
}
inline std::uint32_t block_key_row(std::uint64_t k) {
    return static_cast<std::uint32_t>(k >> 32);
}
inline std::uint32_t block_key_col(std::uint64_t k) {
    return static_cast<std::uint32_t>(k & 0xFFFFFFFFu);
}

// Unreduced triplets. Only the upper block triangle is ever stored: emit()
// transposes anything below the diagonal.
struct BlockTripletStream {
    std::vector<std::uint64_t> keys;
    std::vector<Mat3> values;

    std::size_t size() const { return keys.size(); }
    void clear() {
        keys.clear();
        values.clear();
    }
    void reserve(std::size_t n) {
        keys.reserve(n);
        values.reserve(n);
    }
    void emit(Index r, Index c, const Mat3& m) {
        if (r <= c) {
            keys.push_back(make_block_key(r, c));
            values.push_back(m);
        } else {
            keys.push_back(make_block_key(c, r));
            values.push_back(m.transpose());
        }
    }
    void append(const BlockTripletStream& other) {
        keys.insert(keys.end(), other.keys.begin(), other.keys.end());
        values.insert(values.end(), other.values.begin(), other.values.end());
    }
};

// Reduced upper-triangle block matrix, keys strictly increasing.
struct SortedSymBlockCoo {
    Index n_block_rows = 0;
    std::vector<std::uint32_t> rows;
    std::vector<std::uint32_t> cols;
    std::vector<Mat3> blocks;

    std::size_t size() const { return blocks.size(); }
};

namespace detail {

// LSD radix sort of (key, payload index) pairs, 16 bits per pass. Stable, so
// duplicate keys keep emission order.
inline void radix_sort_keys(std::vector<std::uint64_t>& keys,
                            std::vector<std::uint32_t>& perm) {
    const std::size_t n = keys.size();
    perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    if (n < 2) return;

    std::vector<std::uint64_t> kbuf(n);
    std::vector<std::uint32_t> pbuf(n);
    constexpr int kBits = 16;
    constexpr std::size_t kBuckets = std::size_t(1) << kBits;
    std::vector<std::size_t> count(kBuckets);

    for (int pass = 0; pass < 4; ++pass) {
        const int shift = pass * kBits;
        // skip passes where every key shares the same digit
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i)
            ++count[(keys[i] >> shift) & (kBuckets - 1)];
        std::size_t sum = 0;
        for (std::size_t b = 0; b < kBuckets; ++b) {
            std::size_t c = count[b];
            count[b] = sum;
            sum += c;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t b = (keys[i] >> shift) & (kBuckets - 1);
            kbuf[count[b]] = keys[i];
            pbuf[count[b]] = perm[i];
            ++count[b];
        }
        keys.swap(kbuf);
        perm.swap(pbuf);
    }
}

} // namespace detail

// Stable radix sort by packed key; block values follow their keys.
inline void sort_stream(BlockTripletStream& s, const ExecPolicy& pol) {
    std::vector<std::uint32_t> perm;
    detail::radix_sort_keys(s.keys, perm);
    std::vector<Mat3> sorted(s.values.size());
    parallel_for(static_cast<std::int64_t>(perm.size()), pol,
                 [&](std::int64_t i) { sorted[i] = s.values[perm[i]]; });
    s.values.swap(sorted);
}

} // namespace adipc
