#pragma once

#include "mas.hpp"

namespace adipc {

// Baseline preconditioner: exact inverses of the 3x3 diagonal blocks.
class BlockJacobiPreconditioner : public Preconditioner {
public:
    void build(const SortedSymBlockCoo& A) {
        inv_.assign(A.n_block_rows, Mat3::Identity());
        for (std::size_t i = 0; i < A.rows.size(); ++i)
            if (A.rows[i] == A.cols[i]) inv_[A.rows[i]] = A.blocks[i].inverse();
    }

    void apply(const VecX& r, VecX& z) const override {
        z.resize(r.size());
        ExecPolicy pol;
        parallel_for(static_cast<Index>(inv_.size()), pol, [&](Index i) {
            z.segment<3>(3 * i) = inv_[i] * r.segment<3>(3 * i);
        });
    }

private:
    std::vector<Mat3> inv_;
};

} // namespace adipc
