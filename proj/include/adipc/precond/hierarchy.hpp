#pragma once

#include "partition.hpp"

namespace adipc {

// Aggregation hierarchy for the multilevel additive Schwarz preconditioner.
// Level 0 nodes are the block slots with an arbitrary fixed partition; every
// coarser level merges the connected pieces inside each subdomain into single
// supernodes and regroups those by connectivity into fresh capacity-bounded
// clusters.
//
// The hierarchy is rebuilt whenever the system connectivity changes (contact
// blocks come and go between solves); the level-0 partition never moves.
struct MasHierarchy {
    Index capacity = 0;
    Index n_slots = 0;

    struct Level {
        Index n_nodes = 0;
        Index n_parts = 0;
        std::vector<Index> part_of; // node -> subdomain at this level
        std::vector<Index> agg;     // block slot -> node at this level
    };
    std::vector<Level> levels;

    int n_levels() const { return static_cast<int>(levels.size()); }
};

inline MasHierarchy build_hierarchy(const Partition& l0,
                                    const std::vector<std::pair<Index, Index>>& edges,
                                    int max_levels) {
    MasHierarchy h;
    h.capacity = l0.capacity;
    h.n_slots = static_cast<Index>(l0.part_of.size());

    MasHierarchy::Level base;
    base.n_nodes = h.n_slots;
    base.n_parts = l0.n_parts;
    base.part_of = l0.part_of;
    base.agg.resize(h.n_slots);
    for (Index i = 0; i < h.n_slots; ++i) base.agg[i] = i;
    h.levels.push_back(std::move(base));

    std::vector<std::pair<Index, Index>> cur_edges = edges;
    while (h.n_levels() < max_levels) {
        const MasHierarchy::Level& cur = h.levels.back();
        if (cur.n_parts <= 1) break;

        // connected pieces of each subdomain, visited subdomain by subdomain
        // and seeded from the lowest remaining node, so supernode ids are
        // reproducible
        auto adj = detail::adjacency_lists(cur.n_nodes, cur_edges);
        std::vector<std::vector<Index>> members(cur.n_parts);
        for (Index i = 0; i < cur.n_nodes; ++i) members[cur.part_of[i]].push_back(i);

        std::vector<Index> up(cur.n_nodes, kInvalid);
        Index n_next = 0;
        std::vector<Index> queue;
        for (Index s = 0; s < cur.n_parts; ++s)
            for (Index seed : members[s]) {
                if (up[seed] != kInvalid) continue;
                const Index super = n_next++;
                up[seed] = super;
                queue.assign(1, seed);
                for (std::size_t head = 0; head < queue.size(); ++head)
                    for (Index nb : adj[queue[head]])
                        if (cur.part_of[nb] == s && up[nb] == kInvalid) {
                            up[nb] = super;
                            queue.push_back(nb);
                        }
            }
        if (n_next == cur.n_nodes) break; // nothing merged anywhere

        std::vector<std::pair<Index, Index>> next_edges;
        next_edges.reserve(cur_edges.size());
        for (const auto& [a, b] : cur_edges) {
            Index ua = up[a], ub = up[b];
            if (ua == ub) continue;
            if (ua > ub) std::swap(ua, ub);
            next_edges.emplace_back(ua, ub);
        }
        std::sort(next_edges.begin(), next_edges.end());
        next_edges.erase(std::unique(next_edges.begin(), next_edges.end()),
                         next_edges.end());

        MasHierarchy::Level next;
        next.n_nodes = n_next;
        Partition grouped = partition_block_graph(n_next, next_edges, h.capacity);
        next.n_parts = grouped.n_parts;
        next.part_of = std::move(grouped.part_of);
        next.agg.resize(h.n_slots);
        for (Index slot = 0; slot < h.n_slots; ++slot)
            next.agg[slot] = up[cur.agg[slot]];

        h.levels.push_back(std::move(next));
        cur_edges = std::move(next_edges);
    }
    return h;
}

} // namespace adipc
