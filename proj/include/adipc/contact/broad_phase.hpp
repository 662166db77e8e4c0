#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>

#include "../scene/scene.hpp"

namespace adipc {

// Surface primitives over the contact-node universe (fem vertices first, then
// every body vertex). Shells contribute everything; solids and bodies only
// their boundary.
struct ContactSurface {
    std::vector<Index> verts;
    std::vector<std::array<Index, 2>> edges;
    std::vector<std::array<Index, 3>> tris;
};

inline ContactSurface build_contact_surface(const Scene& scene) {
    ContactSurface s;
    auto add_tris = [&](const std::vector<std::array<Index, 3>>& tris, Index off) {
        for (const auto& t : tris) s.tris.push_back({t[0] + off, t[1] + off, t[2] + off});
    };
    auto add_edges = [&](const std::vector<std::array<Index, 2>>& edges, Index off) {
        for (const auto& e : edges) s.edges.push_back({e[0] + off, e[1] + off});
    };
    auto add_tri_verts = [&](const std::vector<std::array<Index, 3>>& tris, Index off) {
        std::vector<Index> v;
        for (const auto& t : tris) v.insert(v.end(), {t[0], t[1], t[2]});
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        for (Index i : v) s.verts.push_back(i + off);
    };
    for (std::size_t mi = 0; mi < scene.meshes.size(); ++mi) {
        const auto& m = scene.meshes[mi];
        const Index off = scene.mesh_offset[mi];
        add_tris(m.tris, off);
        add_edges(m.edges, off);
        if (m.is_shell)
            for (Index v = 0; v < m.n_verts(); ++v) s.verts.push_back(v + off);
        else
            add_tri_verts(m.tris, off);
    }
    for (std::size_t bi = 0; bi < scene.bodies.size(); ++bi) {
        const auto& b = scene.bodies[bi];
        const Index off = scene.body_offset[bi];
        add_tris(b.surface_tris, off);
        add_edges(b.surface_edges, off);
        add_tri_verts(b.surface_tris, off);
    }
    return s;
}

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<Real>::max());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<Real>::max());
    void grow(const Vec3& p) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    void inflate(Real r) {
        lo.array() -= r;
        hi.array() += r;
    }
    bool overlaps(const Aabb& o) const {
        return (lo.array() <= o.hi.array()).all() && (o.lo.array() <= hi.array()).all();
    }
};

// Vertex-triangle and edge-edge candidates, sorted and duplicate free.
// Pairs index into the ContactSurface arrays; stencils sharing a node are
// dropped here, never later.
struct ContactCandidates {
    std::vector<std::array<Index, 2>> pt; // (vert slot, tri slot)
    std::vector<std::array<Index, 2>> ee; // (edge slot, edge slot), first < second
};

namespace detail {

class HashGrid {
public:
    void build(const std::vector<Aabb>& boxes, Real cell_size) {
        cell_ = cell_size;
        cells_.clear();
        for (std::size_t i = 0; i < boxes.size(); ++i)
            visit(boxes[i], [&](std::uint64_t key) {
                cells_[key].push_back(static_cast<Index>(i));
            });
    }

    template <class F>
    void query(const Aabb& box, F&& fn) const {
        visit(box, [&](std::uint64_t key) {
            auto it = cells_.find(key);
            if (it == cells_.end()) return;
            for (Index id : it->second) fn(id);
        });
    }

private:
    template <class F>
    void visit(const Aabb& box, F&& fn) const {
        long lo[3], hi[3];
        for (int a = 0; a < 3; ++a) {
            lo[a] = static_cast<long>(std::floor(box.lo[a] / cell_));
            hi[a] = static_cast<long>(std::floor(box.hi[a] / cell_));
        }
        for (long x = lo[0]; x <= hi[0]; ++x)
            for (long y = lo[1]; y <= hi[1]; ++y)
                for (long z = lo[2]; z <= hi[2]; ++z) fn(pack(x, y, z));
    }

    static std::uint64_t pack(long x, long y, long z) {
        const std::uint64_t m = (1u << 21) - 1;
        auto wrap = [&](long v) {
            return static_cast<std::uint64_t>(v & static_cast<long>(m));
        };
        return (wrap(x) << 42) | (wrap(y) << 21) | wrap(z);
    }

    Real cell_ = 1;
    std::unordered_map<std::uint64_t, std::vector<Index>> cells_;
};

inline Aabb swept_point(const std::vector<Vec3>& pos, const std::vector<Vec3>* disp,
                        Index node) {
    Aabb box;
    box.grow(pos[node]);
    if (disp) box.grow(pos[node] + (*disp)[node]);
    return box;
}

inline void sort_unique(std::vector<std::array<Index, 2>>& pairs) {
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

} // namespace detail

// One shot broad phase. pos spans the contact-node universe; disp, when given,
// extends every box over the linear sweep (used for ccd). Each side is
// inflated by half of `inflate`, so any pair closer than `inflate` anywhere
// along the sweep is reported.
inline ContactCandidates find_candidates(const ContactSurface& surf,
                                         const std::vector<Vec3>& pos,
                                         const std::vector<Vec3>* disp,
                                         Real inflate) {
    ContactCandidates out;
    const Real half = inflate / 2;

    std::vector<Aabb> tri_boxes(surf.tris.size());
    Real mean_extent = 0;
    for (std::size_t t = 0; t < surf.tris.size(); ++t) {
        Aabb box;
        for (Index v : surf.tris[t]) {
            const Aabb p = detail::swept_point(pos, disp, v);
            box.grow(p.lo);
            box.grow(p.hi);
        }
        mean_extent += (box.hi - box.lo).maxCoeff();
        box.inflate(half);
        tri_boxes[t] = box;
    }
    std::vector<Aabb> edge_boxes(surf.edges.size());
    for (std::size_t e = 0; e < surf.edges.size(); ++e) {
        Aabb box;
        for (Index v : surf.edges[e]) {
            const Aabb p = detail::swept_point(pos, disp, v);
            box.grow(p.lo);
            box.grow(p.hi);
        }
        box.inflate(half);
        edge_boxes[e] = box;
    }
    if (surf.tris.empty() && surf.edges.empty()) return out;
    mean_extent = surf.tris.empty() ? inflate : mean_extent / surf.tris.size();
    const Real cell = std::max(mean_extent + inflate, 1e-12);

    detail::HashGrid tri_grid;
    tri_grid.build(tri_boxes, cell);
    for (std::size_t vi = 0; vi < surf.verts.size(); ++vi) {
        const Index node = surf.verts[vi];
        Aabb box = detail::swept_point(pos, disp, node);
        box.inflate(half);
        tri_grid.query(box, [&](Index t) {
            const auto& tri = surf.tris[t];
            if (tri[0] == node || tri[1] == node || tri[2] == node) return;
            if (!box.overlaps(tri_boxes[t])) return;
            out.pt.push_back({static_cast<Index>(vi), t});
        });
    }
    detail::sort_unique(out.pt);

    detail::HashGrid edge_grid;
    edge_grid.build(edge_boxes, cell);
    for (std::size_t ei = 0; ei < surf.edges.size(); ++ei) {
        const auto& ea = surf.edges[ei];
        edge_grid.query(edge_boxes[ei], [&](Index ej) {
            if (ej <= static_cast<Index>(ei)) return;
            const auto& eb = surf.edges[ej];
            if (ea[0] == eb[0] || ea[0] == eb[1] || ea[1] == eb[0] || ea[1] == eb[1])
                return;
            if (!edge_boxes[ei].overlaps(edge_boxes[ej])) return;
            out.ee.push_back({static_cast<Index>(ei), ej});
        });
    }
    detail::sort_unique(out.ee);
    return out;
}

inline ContactCandidates proximity_candidates(const ContactSurface& surf,
                                              const std::vector<Vec3>& pos,
                                              Real inflate) {
    return find_candidates(surf, pos, nullptr, inflate);
}

inline ContactCandidates ccd_candidates(const ContactSurface& surf,
                                        const std::vector<Vec3>& pos,
                                        const std::vector<Vec3>& disp,
                                        Real inflate) {
    return find_candidates(surf, pos, &disp, inflate);
}

} // namespace adipc
