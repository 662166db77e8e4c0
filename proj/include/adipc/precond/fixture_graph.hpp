#pragma once

#include "partition.hpp"

namespace adipc {

// Sixteen-slot verification graph: four disjoint four-slot chains whose
// members are interleaved in index order. Index-chunk partitioning at
// capacity 4 therefore splits every chain and needs three levels to finish
// coarsening, while the connectivity partition keeps each chain whole and
// collapses in two levels with a single top subdomain.
inline std::vector<std::pair<Index, Index>> sixteen_slot_graph_edges() {
    return {{0, 13}, {1, 3},   {2, 15},  {3, 5},  {4, 12}, {5, 7},
            {6, 14}, {8, 9},   {9, 10},  {10, 11}, {12, 14}, {13, 15}};
}

inline Index sixteen_slot_graph_size() { return 16; }

} // namespace adipc
