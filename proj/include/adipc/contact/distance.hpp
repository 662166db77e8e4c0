#pragma once

#include <algorithm>

#include "../core/dual2.hpp"
#include "../core/types.hpp"

namespace adipc {

// Closest-feature taxonomy for the two 4-node stencils. The classifier picks
// the active feature in double precision; the squared distance of that feature
// is then a smooth function of all stencil nodes, so its derivatives are
// well defined even while the pair slides between regions.

enum class PtRegion { V0, V1, V2, E01, E12, E20, Interior };
enum class EeRegion { A0B0, A0B1, A1B0, A1B1, A0Int, A1Int, IntB0, IntB1, Interior };

struct PtClass {
    PtRegion region;
    Vec3 beta; // closest point on the triangle = beta . (t0, t1, t2)
};

struct EeClass {
    EeRegion region;
    Real s = 0, t = 0; // closest points a0 + s (a1 - a0), b0 + t (b1 - b0)
};

// Voronoi-region walk for the closest point of p on triangle (t0, t1, t2).
inline PtClass classify_pt(const Vec3& p, const Vec3& t0, const Vec3& t1,
                           const Vec3& t2) {
    const Vec3 ab = t1 - t0, ac = t2 - t0, ap = p - t0;
    const Real d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return {PtRegion::V0, Vec3(1, 0, 0)};

    const Vec3 bp = p - t1;
    const Real d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return {PtRegion::V1, Vec3(0, 1, 0)};

    const Real vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const Real v = d1 / (d1 - d3);
        return {PtRegion::E01, Vec3(1 - v, v, 0)};
    }

    const Vec3 cp = p - t2;
    const Real d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return {PtRegion::V2, Vec3(0, 0, 1)};

    const Real vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const Real w = d2 / (d2 - d6);
        return {PtRegion::E20, Vec3(1 - w, 0, w)};
    }

    const Real va = d3 * d6 - d5 * d4;
    if (va <= 0 && d4 - d3 >= 0 && d5 - d6 >= 0) {
        const Real w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return {PtRegion::E12, Vec3(0, 1 - w, w)};
    }

    const Real denom = 1.0 / (va + vb + vc);
    const Real v = vb * denom, w = vc * denom;
    return {PtRegion::Interior, Vec3(1 - v - w, v, w)};
}

// Closest parameters of two segments; the clamping cascade also covers the
// parallel case, so no special mollifier is needed there.
inline EeClass classify_ee(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                           const Vec3& b1) {
    const Vec3 da = a1 - a0, db = b1 - b0, r = a0 - b0;
    const Real a = da.squaredNorm(), e = db.squaredNorm();
    const Real f = db.dot(r), c = da.dot(r), b = da.dot(db);
    const Real denom = a * e - b * b; // = |da x db|^2
    Real s = 0;
    bool s_interior_formula = false;
    if (denom > 1e-12 * a * e) {
        s = (b * f - c * e) / denom;
        if (s <= 0) s = 0;
        else if (s >= 1) s = 1;
        else s_interior_formula = true;
    }
    Real t = e > 0 ? (b * s + f) / e : 0;
    bool t_clamped = false;
    if (t <= 0) {
        t = 0;
        t_clamped = true;
    } else if (t >= 1) {
        t = 1;
        t_clamped = true;
    }
    if (t_clamped) {
        s = a > 0 ? (b * t - c) / a : 0;
        s_interior_formula = s > 0 && s < 1;
        if (s <= 0) s = 0;
        else if (s >= 1) s = 1;
    }
    const bool s_end = !s_interior_formula;
    const bool t_end = t == 0 || t == 1;
    EeClass out;
    out.s = s;
    out.t = t;
    if (s_end && t_end)
        out.region = s == 0 ? (t == 0 ? EeRegion::A0B0 : EeRegion::A0B1)
                            : (t == 0 ? EeRegion::A1B0 : EeRegion::A1B1);
    else if (s_end)
        out.region = s == 0 ? EeRegion::A0Int : EeRegion::A1Int;
    else if (t_end)
        out.region = t == 0 ? EeRegion::IntB0 : EeRegion::IntB1;
    else
        out.region = EeRegion::Interior;
    return out;
}

// Smooth per-feature squared distances, generic over the scalar type.

template <class T>
T pp_dist2_g(const GVec3<T>& a, const GVec3<T>& b) {
    return gnorm2(gsub(a, b));
}

template <class T>
T pe_dist2_g(const GVec3<T>& p, const GVec3<T>& e0, const GVec3<T>& e1) {
    const GVec3<T> d = gsub(e1, e0);
    const GVec3<T> w = gsub(p, e0);
    return gnorm2(gcross(w, d)) / gnorm2(d);
}

template <class T>
T pt_plane_dist2_g(const GVec3<T>& p, const GVec3<T>& t0, const GVec3<T>& t1,
                   const GVec3<T>& t2) {
    const GVec3<T> n = gcross(gsub(t1, t0), gsub(t2, t0));
    const T h = gdot(gsub(p, t0), n);
    return h * h / gnorm2(n);
}

template <class T>
T ee_line_dist2_g(const GVec3<T>& a0, const GVec3<T>& a1, const GVec3<T>& b0,
                  const GVec3<T>& b1) {
    const GVec3<T> n = gcross(gsub(a1, a0), gsub(b1, b0));
    const T h = gdot(gsub(b0, a0), n);
    return h * h / gnorm2(n);
}

// Value-only paths used by ccd and the distance reports.

inline Real pt_dist2(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2) {
    const PtClass c = classify_pt(p, t0, t1, t2);
    const Vec3 closest = c.beta[0] * t0 + c.beta[1] * t1 + c.beta[2] * t2;
    return (p - closest).squaredNorm();
}

inline Real ee_dist2(const Vec3& a0, const Vec3& a1, const Vec3& b0, const Vec3& b1) {
    const EeClass c = classify_ee(a0, a1, b0, b1);
    const Vec3 pa = a0 + c.s * (a1 - a0), pb = b0 + c.t * (b1 - b0);
    return (pa - pb).squaredNorm();
}

// Squared distance with first and second derivatives over the stacked stencil
// (p, t0, t1, t2) respectively (a0, a1, b0, b1), 12 dofs.
struct PairDerivs {
    Real dist2 = 0;
    Vec12 grad = Vec12::Zero();
    Mat12 hess = Mat12::Zero();
};

namespace detail {

template <int N>
PairDerivs pack_pair(const Dual2<N>& d) {
    static_assert(N == 12);
    PairDerivs out;
    out.dist2 = d.v;
    out.grad = d.g;
    out.hess = d.h;
    return out;
}

} // namespace detail

inline PairDerivs pt_dist2_derivs(const Vec3& p, const Vec3& t0, const Vec3& t1,
                                  const Vec3& t2) {
    const PtClass c = classify_pt(p, t0, t1, t2);
    using D = Dual2<12>;
    const auto P = dual_point<12>(p, 0);
    const auto T0 = dual_point<12>(t0, 3);
    const auto T1 = dual_point<12>(t1, 6);
    const auto T2 = dual_point<12>(t2, 9);
    D d2;
    switch (c.region) {
        case PtRegion::V0: d2 = pp_dist2_g(P, T0); break;
        case PtRegion::V1: d2 = pp_dist2_g(P, T1); break;
        case PtRegion::V2: d2 = pp_dist2_g(P, T2); break;
        case PtRegion::E01: d2 = pe_dist2_g(P, T0, T1); break;
        case PtRegion::E12: d2 = pe_dist2_g(P, T1, T2); break;
        case PtRegion::E20: d2 = pe_dist2_g(P, T2, T0); break;
        case PtRegion::Interior: d2 = pt_plane_dist2_g(P, T0, T1, T2); break;
    }
    return detail::pack_pair(d2);
}

inline PairDerivs ee_dist2_derivs(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                                  const Vec3& b1) {
    const EeClass c = classify_ee(a0, a1, b0, b1);
    using D = Dual2<12>;
    const auto A0 = dual_point<12>(a0, 0);
    const auto A1 = dual_point<12>(a1, 3);
    const auto B0 = dual_point<12>(b0, 6);
    const auto B1 = dual_point<12>(b1, 9);
    D d2;
    switch (c.region) {
        case EeRegion::A0B0: d2 = pp_dist2_g(A0, B0); break;
        case EeRegion::A0B1: d2 = pp_dist2_g(A0, B1); break;
        case EeRegion::A1B0: d2 = pp_dist2_g(A1, B0); break;
        case EeRegion::A1B1: d2 = pp_dist2_g(A1, B1); break;
        case EeRegion::A0Int: d2 = pe_dist2_g(A0, B0, B1); break;
        case EeRegion::A1Int: d2 = pe_dist2_g(A1, B0, B1); break;
        case EeRegion::IntB0: d2 = pe_dist2_g(B0, A0, A1); break;
        case EeRegion::IntB1: d2 = pe_dist2_g(B1, A0, A1); break;
        case EeRegion::Interior: d2 = ee_line_dist2_g(A0, A1, B0, B1); break;
    }
    return detail::pack_pair(d2);
}

// Lagged contact frame for friction: witness points, separation direction and
// the per-node combination coefficients of the relative displacement.
struct ContactFrame {
    Real dist = 0;
    Vec3 normal = Vec3::Zero(); // from the second feature towards the first
    Vec4 coeff = Vec4::Zero();  // rel displacement = sum coeff[k] * dx[k]
};

inline ContactFrame pt_contact_frame(const Vec3& p, const Vec3& t0, const Vec3& t1,
                                     const Vec3& t2) {
    const PtClass c = classify_pt(p, t0, t1, t2);
    const Vec3 closest = c.beta[0] * t0 + c.beta[1] * t1 + c.beta[2] * t2;
    ContactFrame f;
    const Vec3 d = p - closest;
    f.dist = d.norm();
    f.normal = f.dist > 0 ? Vec3(d / f.dist) : Vec3::UnitY();
    f.coeff = Vec4(1, -c.beta[0], -c.beta[1], -c.beta[2]);
    return f;
}

inline ContactFrame ee_contact_frame(const Vec3& a0, const Vec3& a1, const Vec3& b0,
                                     const Vec3& b1) {
    const EeClass c = classify_ee(a0, a1, b0, b1);
    const Vec3 pa = a0 + c.s * (a1 - a0), pb = b0 + c.t * (b1 - b0);
    ContactFrame f;
    const Vec3 d = pa - pb;
    f.dist = d.norm();
    f.normal = f.dist > 0 ? Vec3(d / f.dist) : Vec3::UnitY();
    f.coeff = Vec4(1 - c.s, c.s, -(1 - c.t), -c.t);
    return f;
}

} // namespace adipc
