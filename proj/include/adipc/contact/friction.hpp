#pragma once

#include "barrier.hpp"
#include "broad_phase.hpp"
#include "ccd.hpp"

namespace adipc {

// Semi-implicit friction: contact set, normal force and tangent frame are
// frozen at the step start, leaving a smooth unconstrained energy in the
// relative tangential displacement u accumulated over the step.

// Smooth replacement of |u| below eps; C2 at the junction, flat at zero.
inline Real friction_f0(Real y, Real eps) {
    if (y >= eps) return y;
    return -y * y * y / (3 * eps * eps) + y * y / eps + eps / 3;
}

inline Real friction_f1(Real y, Real eps) {
    if (y >= eps) return 1;
    return y * (2 * eps - y) / (eps * eps);
}

// f1(y) / y, finite at y = 0
inline Real friction_f1_over_y(Real y, Real eps) {
    if (y >= eps) return 1 / y;
    return (2 * eps - y) / (eps * eps);
}

inline Real friction_f2(Real y, Real eps) {
    if (y >= eps) return 0;
    return 2 * (eps - y) / (eps * eps);
}

struct FrictionConstraint {
    std::array<Index, 4> nodes = {kInvalid, kInvalid, kInvalid, kInvalid};
    int n_nodes = 0;
    Vec4 coeff = Vec4::Zero(); // relative motion = sum coeff[k] dx[nodes[k]]
    Vec3 t1 = Vec3::Zero(), t2 = Vec3::Zero(); // lagged tangent frame
    Real lambda = 0;                           // lagged normal force magnitude
};

inline void tangent_basis(const Vec3& n, Vec3& t1, Vec3& t2) {
    const Vec3 ref = std::abs(n.x()) > 0.9 ? Vec3::UnitY() : Vec3::UnitX();
    t1 = n.cross(ref).normalized();
    t2 = n.cross(t1);
}

struct FrictionDerivs {
    Real value = 0;
    Vec12 grad = Vec12::Zero();
    Mat12 hess = Mat12::Zero();
};

// dx holds the displacement of each stencil node since the step start.
// The tangential hessian is positive semidefinite by construction, no
// numerical projection is required.
inline FrictionDerivs friction_derivs(const FrictionConstraint& c,
                                      const std::array<Vec3, 4>& dx, Real mu,
                                      Real eps) {
    FrictionDerivs out;
    Vec3 w = Vec3::Zero();
    for (int k = 0; k < c.n_nodes; ++k) w += c.coeff[k] * dx[k];
    const Vec2 u(c.t1.dot(w), c.t2.dot(w));
    const Real y = u.norm();
    const Real scale = mu * c.lambda;
    out.value = scale * friction_f0(y, eps);

    Eigen::Matrix<Real, 3, 2> P;
    P.col(0) = c.t1;
    P.col(1) = c.t2;

    Mat2 inner;
    Vec3 gw = Vec3::Zero();
    if (y > 1e-14 * eps) {
        const Vec2 uh = u / y;
        gw = scale * friction_f1(y, eps) * (P * uh);
        inner = scale * (friction_f2(y, eps) * (uh * uh.transpose()) +
                         friction_f1_over_y(y, eps) *
                             (Mat2::Identity() - uh * uh.transpose()));
    } else {
        inner = scale * friction_f1_over_y(0, eps) * Mat2::Identity();
    }
    const Mat3 hw = P * inner * P.transpose();
    for (int k = 0; k < c.n_nodes; ++k) {
        out.grad.segment<3>(3 * k) = c.coeff[k] * gw;
        for (int l = 0; l < c.n_nodes; ++l)
            out.hess.block<3, 3>(3 * k, 3 * l) = c.coeff[k] * c.coeff[l] * hw;
    }
    return out;
}

// Freeze the active contact set into friction constraints. The normal force
// comes from the barrier gradient at the given positions.
inline std::vector<FrictionConstraint> build_friction_constraints(
    const ContactSurface& surf, const std::vector<Vec3>& pos,
    const GroundPlane& ground, Real dhat, Real kappa) {
    std::vector<FrictionConstraint> out;
    const Real shat = dhat * dhat;
    const ContactCandidates cand = proximity_candidates(surf, pos, dhat);

    auto normal_force = [&](Real dist) {
        return -barrier_d1(dist * dist, shat, kappa) * 2 * dist;
    };

    for (const auto& c : cand.pt) {
        const Index v = surf.verts[c[0]];
        const auto& t = surf.tris[c[1]];
        const ContactFrame f = pt_contact_frame(pos[v], pos[t[0]], pos[t[1]], pos[t[2]]);
        if (!(f.dist > 0) || f.dist >= dhat) continue;
        FrictionConstraint fc;
        fc.nodes = {v, t[0], t[1], t[2]};
        fc.n_nodes = 4;
        fc.coeff = f.coeff;
        tangent_basis(f.normal, fc.t1, fc.t2);
        fc.lambda = normal_force(f.dist);
        out.push_back(fc);
    }
    for (const auto& c : cand.ee) {
        const auto& ea = surf.edges[c[0]];
        const auto& eb = surf.edges[c[1]];
        const ContactFrame f =
            ee_contact_frame(pos[ea[0]], pos[ea[1]], pos[eb[0]], pos[eb[1]]);
        if (!(f.dist > 0) || f.dist >= dhat) continue;
        FrictionConstraint fc;
        fc.nodes = {ea[0], ea[1], eb[0], eb[1]};
        fc.n_nodes = 4;
        fc.coeff = f.coeff;
        tangent_basis(f.normal, fc.t1, fc.t2);
        fc.lambda = normal_force(f.dist);
        out.push_back(fc);
    }
    if (ground.enabled) {
        for (Index v : surf.verts) {
            const Real dist = ground.normal.dot(pos[v]) - ground.height;
            if (!(dist > 0) || dist >= dhat) continue;
            FrictionConstraint fc;
            fc.nodes[0] = v;
            fc.n_nodes = 1;
            fc.coeff[0] = 1;
            tangent_basis(ground.normal, fc.t1, fc.t2);
            fc.lambda = normal_force(dist);
            out.push_back(fc);
        }
    }
    return out;
}

} // namespace adipc
