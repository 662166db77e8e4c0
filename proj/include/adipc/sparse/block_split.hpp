#pragma once

#include "block_coo.hpp"

namespace adipc {

// Tiling of large per-body blocks into the uniform 3x3 universe. An affine
// body with block base b occupies the four consecutive block rows b..b+3.

inline void split_12x12(Index row_base, Index col_base, const Mat12& H,
                        BlockTripletStream& out) {
    for (int ti = 0; ti < 4; ++ti)
        for (int tj = 0; tj < 4; ++tj)
            out.emit(row_base + ti, col_base + tj, H.block<3, 3>(3 * ti, 3 * tj));
}

// Symmetric body self-block: upper tiles only, so reduction sees each
// unordered tile pair once.
inline void split_sym_12x12(Index base, const Mat12& H, BlockTripletStream& out) {
    for (int ti = 0; ti < 4; ++ti)
        for (int tj = ti; tj < 4; ++tj)
            out.emit(base + ti, base + tj, H.block<3, 3>(3 * ti, 3 * tj));
}

inline void split_12x3(Index row_base, Index col, const Mat12x3& H,
                       BlockTripletStream& out) {
    for (int t = 0; t < 4; ++t) out.emit(row_base + t, col, H.block<3, 3>(3 * t, 0));
}

inline void split_3x12(Index row, Index col_base, const Mat3x12& H,
                       BlockTripletStream& out) {
    for (int t = 0; t < 4; ++t) out.emit(row, col_base + t, H.block<3, 3>(0, 3 * t));
}

} // namespace adipc
