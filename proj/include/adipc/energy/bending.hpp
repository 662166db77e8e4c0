#pragma once

#include <cmath>
#include <stdexcept>

#include "../core/dual2.hpp"
#include "../core/types.hpp"
#include "psd.hpp"

namespace adipc {

// Signed dihedral angle across edge x0-x1 with wings x2, x3. Flat is zero.
template <class T>
T dihedral_angle_g(const GVec3<T>& x0, const GVec3<T>& x1, const GVec3<T>& x2,
                   const GVec3<T>& x3) {
    using std::atan2;
    using std::sqrt;
    const GVec3<T> e = gsub(x1, x0);
    const GVec3<T> n1 = gcross(e, gsub(x2, x0));
    const GVec3<T> n2 = gcross(gsub(x3, x0), e);
    const T s = gdot(gcross(n1, n2), e) / sqrt(gnorm2(e));
    const T c = gdot(n1, n2);
    return atan2(s, c);
}

inline Real dihedral_angle(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                           const Vec3& x3) {
    return dihedral_angle_g<Real>(as_gvec(x0), as_gvec(x1), as_gvec(x2), as_gvec(x3));
}

struct HingeRest {
    Real rest_angle = 0;
    Real weight = 0; // 3 |e|^2 / (A1 + A2), dimensionless
};

inline HingeRest hinge_rest(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                            const Vec3& p3) {
    const Real a1 = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    const Real a2 = 0.5 * (p3 - p0).cross(p1 - p0).norm();
    if (!(a1 > 0) || !(a2 > 0))
        throw std::invalid_argument("degenerate hinge rest triangles");
    HingeRest r;
    r.rest_angle = dihedral_angle(p0, p1, p2, p3);
    r.weight = 3 * (p1 - p0).squaredNorm() / (a1 + a2);
    return r;
}

struct Stencil12; // neo_hookean.hpp

// Hinge energy k * w * (theta - rest)^2. Second derivatives come from the
// forward AD scalar; projection is a plain eigenvalue clamp.
inline Stencil12 hinge_bending(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                               const Vec3& x3, const HingeRest& rest, Real k,
                               bool project = true);

} // namespace adipc

#include "neo_hookean.hpp"

namespace adipc {

inline Stencil12 hinge_bending(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                               const Vec3& x3, const HingeRest& rest, Real k,
                               bool project) {
    using D = Dual2<12>;
    const auto th = dihedral_angle_g<D>(dual_point<12>(x0, 0), dual_point<12>(x1, 3),
                                        dual_point<12>(x2, 6), dual_point<12>(x3, 9));
    const D diff = th - rest.rest_angle;
    const D e = (k * rest.weight) * (diff * diff);
    Stencil12 out;
    out.value = e.v;
    out.grad = e.g;
    out.hess = project ? Mat12(project_psd(e.h)) : Mat12(e.h);
    return out;
}

} // namespace adipc
