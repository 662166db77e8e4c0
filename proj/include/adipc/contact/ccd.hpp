#pragma once

#include "../core/parallel.hpp"
#include "broad_phase.hpp"
#include "distance.hpp"

namespace adipc {

namespace detail {

constexpr Real kCcdGapFraction = 0.01; // stop once this close to touching
constexpr Real kCcdRescale = 0.9;      // safety margin on the reported time
constexpr int kCcdMaxIters = 64;

// Conservative advancement along linear trajectories. Walks time forward by
// gap / (speed bound) until the pair either survives the whole step or gets
// within a fraction of its initial separation; never overshoots a root.
template <class Dist2Fn>
Real conservative_toi(std::array<Vec3, 4> x, std::array<Vec3, 4> d, int n_side_a,
                      int n_nodes, Dist2Fn&& dist2_of) {
    Vec3 mean = Vec3::Zero();
    for (int i = 0; i < n_nodes; ++i) mean += d[i];
    mean /= n_nodes;
    Real max_a = 0, max_b = 0;
    for (int i = 0; i < n_nodes; ++i) {
        d[i] -= mean; // common translation cannot change the distance
        const Real len = d[i].norm();
        (i < n_side_a ? max_a : max_b) = std::max(i < n_side_a ? max_a : max_b, len);
    }
    const Real speed = max_a + max_b;
    if (speed == 0) return 1;

    const Real g0 = std::sqrt(dist2_of(x));
    if (!(g0 > 0)) return 0;
    const Real gap = kCcdGapFraction * g0;

    Real t = 0;
    std::array<Vec3, 4> cur = x;
    for (int iter = 0; iter < kCcdMaxIters; ++iter) {
        const Real g = std::sqrt(dist2_of(cur));
        if (g <= gap) return kCcdRescale * t;
        const Real step = (g - gap) / speed;
        if (t + step >= 1) return 1;
        t += step;
        for (int i = 0; i < n_nodes; ++i) cur[i] = x[i] + t * d[i];
    }
    return kCcdRescale * t;
}

} // namespace detail

inline Real pt_ccd_toi(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2,
                       const Vec3& dp, const Vec3& dt0, const Vec3& dt1,
                       const Vec3& dt2) {
    return detail::conservative_toi(
        {p, t0, t1, t2}, {dp, dt0, dt1, dt2}, 1, 4, [](const std::array<Vec3, 4>& c) {
            return pt_dist2(c[0], c[1], c[2], c[3]);
        });
}

inline Real ee_ccd_toi(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1,
                       const Vec3& da0, const Vec3& da1, const Vec3& db0,
                       const Vec3& db1) {
    return detail::conservative_toi(
        {a0, a1, b0, b1}, {da0, da1, db0, db1}, 2, 4,
        [](const std::array<Vec3, 4>& c) {
            return ee_dist2(c[0], c[1], c[2], c[3]);
        });
}

inline Real ground_ccd_toi(const Vec3& x, const Vec3& dx, const Vec3& normal,
                           Real height) {
    const Real g0 = normal.dot(x) - height;
    if (!(g0 > 0)) return 0;
    const Real closing = -normal.dot(dx);
    if (closing <= 0) return 1;
    const Real t_gap = (1 - detail::kCcdGapFraction) * g0 / closing;
    if (t_gap >= 1) return 1;
    return detail::kCcdRescale * t_gap;
}

// Largest fraction of `disp` every candidate pair can take without touching.
inline Real scene_ccd_step(const ContactSurface& surf, const std::vector<Vec3>& pos,
                           const std::vector<Vec3>& disp, const GroundPlane& ground,
                           Real inflate, const ExecPolicy& pol = {}) {
    const ContactCandidates cand = ccd_candidates(surf, pos, disp, inflate);
    std::vector<Real> toi(cand.pt.size() + cand.ee.size(), 1.0);
    parallel_for(static_cast<Index>(cand.pt.size()), pol, [&](Index i) {
        const Index v = surf.verts[cand.pt[i][0]];
        const auto& t = surf.tris[cand.pt[i][1]];
        toi[i] = pt_ccd_toi(pos[v], pos[t[0]], pos[t[1]], pos[t[2]], disp[v],
                            disp[t[0]], disp[t[1]], disp[t[2]]);
    });
    const Index base = static_cast<Index>(cand.pt.size());
    parallel_for(static_cast<Index>(cand.ee.size()), pol, [&](Index i) {
        const auto& ea = surf.edges[cand.ee[i][0]];
        const auto& eb = surf.edges[cand.ee[i][1]];
        toi[base + i] = ee_ccd_toi(pos[ea[0]], pos[ea[1]], pos[eb[0]], pos[eb[1]],
                                   disp[ea[0]], disp[ea[1]], disp[eb[0]],
                                   disp[eb[1]]);
    });
    Real alpha = 1;
    for (Real t : toi) alpha = std::min(alpha, t);
    if (ground.enabled)
        for (Index v : surf.verts)
            alpha = std::min(alpha,
                             ground_ccd_toi(pos[v], disp[v], ground.normal,
                                            ground.height));
    return alpha;
}

// Smallest separation among nearby pairs, capped; used for reporting and for
// the barrier stiffness update.
inline Real scene_min_distance(const ContactSurface& surf,
                               const std::vector<Vec3>& pos,
                               const GroundPlane& ground, Real cap) {
    const ContactCandidates cand = proximity_candidates(surf, pos, cap);
    Real best = cap;
    for (const auto& c : cand.pt) {
        const Index v = surf.verts[c[0]];
        const auto& t = surf.tris[c[1]];
        best = std::min(best,
                        std::sqrt(pt_dist2(pos[v], pos[t[0]], pos[t[1]], pos[t[2]])));
    }
    for (const auto& c : cand.ee) {
        const auto& ea = surf.edges[c[0]];
        const auto& eb = surf.edges[c[1]];
        best = std::min(
            best, std::sqrt(ee_dist2(pos[ea[0]], pos[ea[1]], pos[eb[0]], pos[eb[1]])));
    }
    if (ground.enabled)
        for (Index v : surf.verts)
            best = std::min(best, ground.normal.dot(pos[v]) - ground.height);
    return best;
}

} // namespace adipc
