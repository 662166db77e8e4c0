#pragma once

#include <Eigen/Cholesky>
#include <stdexcept>

#include "../core/parallel.hpp"
#include "../sparse/block_coo.hpp"
#include "hierarchy.hpp"

namespace adipc {

struct Preconditioner {
    virtual ~Preconditioner() = default;
    virtual void apply(const VecX& r, VecX& z) const = 0;
};

// Distinct off-diagonal block pairs of the assembled system, the connectivity
// input for the hierarchy rebuild.
inline std::vector<std::pair<Index, Index>> block_edges(const SortedSymBlockCoo& A) {
    std::vector<std::pair<Index, Index>> e;
    e.reserve(A.rows.size());
    for (std::size_t i = 0; i < A.rows.size(); ++i)
        if (A.rows[i] != A.cols[i]) e.emplace_back(A.rows[i], A.cols[i]);
    return e;
}

// Multilevel additive Schwarz over the aggregation hierarchy. Every level
// restricts the assembled matrix onto its subdomains (galerkin sum over the
// member slots), factors each dense subdomain once, and the applications of
// all levels are summed. Restriction of an spd matrix stays spd, so the
// operator is a valid pcg preconditioner.
class MasPreconditioner : public Preconditioner {
public:
    void build(const SortedSymBlockCoo& A, const MasHierarchy& h) {
        levels_.assign(h.n_levels(), LevelData{});
        const Index n_slots = h.n_slots;
        for (int l = 0; l < h.n_levels(); ++l) {
            const auto& hl = h.levels[l];
            LevelData& ld = levels_[l];
            ld.agg = hl.agg;
            ld.part_of = hl.part_of;
            ld.pos_of.assign(hl.n_nodes, 0);
            std::vector<Index> fill(hl.n_parts, 0);
            for (Index node = 0; node < hl.n_nodes; ++node)
                ld.pos_of[node] = fill[hl.part_of[node]]++;
            ld.dense.resize(hl.n_parts);
            for (Index s = 0; s < hl.n_parts; ++s)
                ld.dense[s] = MatX::Zero(3 * fill[s], 3 * fill[s]);

            ld.sub_slots.assign(hl.n_parts, {});
            for (Index slot = 0; slot < n_slots; ++slot) {
                const Index node = ld.agg[slot];
                ld.sub_slots[ld.part_of[node]].emplace_back(slot, ld.pos_of[node]);
            }

            for (std::size_t i = 0; i < A.rows.size(); ++i) {
                const Index r = A.rows[i], c = A.cols[i];
                const Index nr = ld.agg[r], nc = ld.agg[c];
                if (ld.part_of[nr] != ld.part_of[nc]) continue;
                MatX& D = ld.dense[ld.part_of[nr]];
                const Index pr = ld.pos_of[nr], pc = ld.pos_of[nc];
                D.block<3, 3>(3 * pr, 3 * pc) += A.blocks[i];
                if (r != c) D.block<3, 3>(3 * pc, 3 * pr) += A.blocks[i].transpose();
            }

            ld.factor.resize(hl.n_parts);
            for (Index s = 0; s < hl.n_parts; ++s) {
                MatX D = ld.dense[s];
                Real eps = 1e-8 * D.trace() / D.rows();
                if (!(eps > 0)) eps = 1e-12;
                for (int attempt = 0;; ++attempt) {
                    ld.factor[s].compute(D);
                    if (ld.factor[s].info() == Eigen::Success) break;
                    if (attempt >= 3)
                        throw std::runtime_error(
                            "subdomain matrix stayed indefinite after "
                            "regularization");
                    D.diagonal().array() += eps;
                    eps *= 100;
                }
            }
        }
    }

    void apply(const VecX& r, VecX& z) const override {
        z.setZero(r.size());
        ExecPolicy pol;
        for (const LevelData& ld : levels_) {
            parallel_for(static_cast<Index>(ld.sub_slots.size()), pol, [&](Index s) {
                const auto& slots = ld.sub_slots[s];
                VecX b = VecX::Zero(ld.dense[s].rows());
                for (const auto& [slot, pos] : slots)
                    b.segment<3>(3 * pos) += r.segment<3>(3 * slot);
                const VecX y = ld.factor[s].solve(b);
                for (const auto& [slot, pos] : slots)
                    z.segment<3>(3 * slot) += y.segment<3>(3 * pos);
            });
        }
    }

    // restriction matrices per level and subdomain, for validation
    const std::vector<MatX>& level_matrices(int l) const { return levels_[l].dense; }
    int n_levels() const { return static_cast<int>(levels_.size()); }

private:
    struct LevelData {
        std::vector<Index> agg;     // slot -> node
        std::vector<Index> part_of; // node -> subdomain
        std::vector<Index> pos_of;  // node -> position inside its subdomain
        std::vector<std::vector<std::pair<Index, Index>>> sub_slots; // (slot, pos)
        std::vector<MatX> dense;
        std::vector<Eigen::LLT<MatX>> factor;
    };
    std::vector<LevelData> levels_;
};

} // namespace adipc
