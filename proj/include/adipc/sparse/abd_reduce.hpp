#pragma once

#include "block_coo.hpp"
#include "block_split.hpp"
#include "reduction.hpp"

namespace adipc {

// Contact node universe: deformable nodes first (one 3x3 block each), then
// affine-body vertices grouped per body (each body owns 4 block rows).
struct DofMap {
    Index n_fem_nodes = 0;
    Index n_bodies = 0;
    std::vector<Index> abd_node_body;      // per abd node, indexed node - n_fem_nodes
    std::vector<Mat3x12> abd_node_jacobian;

    Index n_nodes() const {
        return n_fem_nodes + static_cast<Index>(abd_node_body.size());
    }
    Index n_blocks() const { return n_fem_nodes + 4 * n_bodies; }
    bool is_fem(Index node) const { return node < n_fem_nodes; }
    Index body_of(Index node) const { return abd_node_body[node - n_fem_nodes]; }
    Index body_block_base(Index body) const { return n_fem_nodes + 4 * body; }
    const Mat3x12& jacobian(Index node) const {
        return abd_node_jacobian[node - n_fem_nodes];
    }
};

// Contact Hessian assembly in two reductions: first merge all 3x3 blocks that
// share a node pair, then push each merged block through the body jacobians
// once and tile the result. Output still needs a final sort + reduction.
inline BlockTripletStream two_level_abd_reduce(const BlockTripletStream& node_pairs,
                                               const DofMap& map,
                                               const ExecPolicy& pol) {
    BlockTripletStream sorted = node_pairs;
    sort_stream(sorted, pol);
    SortedSymBlockCoo merged = fast_hash_reduction(sorted, map.n_nodes(), pol);

    BlockTripletStream out;
    out.reserve(merged.size() * 4);
    for (std::size_t e = 0; e < merged.size(); ++e) {
        const Index i = static_cast<Index>(merged.rows[e]);
        const Index j = static_cast<Index>(merged.cols[e]);
        const Mat3& C = merged.blocks[e];
        const bool fi = map.is_fem(i), fj = map.is_fem(j);
        if (fi && fj) {
            out.emit(i, j, C);
        } else if (fi && !fj) {
            // C couples fem node i to body vertex j: right-multiply by J_j.
            split_3x12(i, map.body_block_base(map.body_of(j)),
                       C * map.jacobian(j), out);
        } else if (!fi && fj) {
            split_12x3(map.body_block_base(map.body_of(i)), j,
                       map.jacobian(i).transpose() * C, out);
        } else {
            const Index bi = map.body_of(i), bj = map.body_of(j);
            if (bi != bj) {
                split_12x12(map.body_block_base(bi), map.body_block_base(bj),
                            map.jacobian(i).transpose() * C * map.jacobian(j), out);
            } else if (i == j) {
                split_sym_12x12(map.body_block_base(bi),
                                map.jacobian(i).transpose() * C * map.jacobian(i),
                                out);
            } else {
                // Off-diagonal pair folding onto one body: both (i,j) and the
                // implicit (j,i) transpose land on the same 12x12.
                const Mat12 K = map.jacobian(i).transpose() * C * map.jacobian(j);
                split_sym_12x12(map.body_block_base(bi),
                                Mat12(K + K.transpose()), out);
            }
        }
    }
    return out;
}

} // namespace adipc
