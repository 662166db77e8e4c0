#pragma once

#include <stdexcept>

#include "../core/types.hpp"
#include "psd.hpp"

namespace adipc {

struct MembraneRest {
    Mat2 inv_rest_edges;
    Real area = 0;
};

// Rest-state 2D frame: first axis along edge p0->p1, second in-plane
// perpendicular. The inverse edge matrix maps world edges to material coords.
inline MembraneRest membrane_rest(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    const Vec3 e1 = p1 - p0, e2 = p2 - p0;
    const Vec3 nrm = e1.cross(e2);
    const Real area2 = nrm.norm();
    if (!(area2 > 1e-14 * e1.norm() * e2.norm()) || e1.norm() == 0)
        throw std::invalid_argument("degenerate rest triangle");
    const Vec3 u = e1.normalized();
    const Vec3 v = nrm.normalized().cross(u);
    Mat2 Dm;
    Dm << e1.dot(u), e2.dot(u), e1.dot(v), e2.dot(v);
    MembraneRest r;
    r.inv_rest_edges = Dm.inverse();
    r.area = 0.5 * area2;
    return r;
}

// In-plane deformation gradient, 3x2.
inline Mat3x2 membrane_deformation(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                   const Mat2& inv_rest_edges) {
    Mat3x2 D;
    D.col(0) = x1 - x0;
    D.col(1) = x2 - x0;
    return D * inv_rest_edges;
}

// Squared stretch along material direction n.
inline Real i5(const Mat3x2& F, const Vec2& n) { return (F * n).squaredNorm(); }

struct MembraneDerivs {
    Real value = 0;
    Mat3x2 dF = Mat3x2::Zero();
    Mat6 hess = Mat6::Zero(); // w.r.t. column-major vec(F)
};

// Per-axis stretch penalty lambda * a_t * (sqrt(I5) - 1)^2 on both material
// axes. The Hessian per axis has eigenvalues {2*lambda*a_t, e23, e23} with
// e23 = 2*lambda*a_t*(1 - 1/sqrt(I5)); projection clamps e23 at zero.
inline MembraneDerivs fbw_membrane(const Mat3x2& F, Real lambda, Real a_t,
                                   bool project = true) {
    MembraneDerivs out;
    const Real scale = lambda * a_t;
    for (int dir = 0; dir < 2; ++dir) {
        const Vec3 f = F.col(dir);
        const Real I5v = f.squaredNorm();
        const Real s = std::sqrt(I5v);
        out.value += scale * (s - 1) * (s - 1);
        out.dF.col(dir) += 2 * scale * (1 - 1 / s) * f;
        const Real e1 = 2 * scale;
        Real e23 = 2 * scale * (1 - 1 / s);
        if (project && e23 < 0) e23 = 0;
        const Vec3 q = f / s;
        Mat3 blk = e23 * Mat3::Identity() + (e1 - e23) * q * q.transpose();
        out.hess.block<3, 3>(3 * dir, 3 * dir) += blk;
    }
    return out;
}

// Closed-form Hessian eigenvalues of the cubic limiter for I5 > 1, unit
// stiffness scale: {e1, e23, e23} per active axis.
inline std::pair<Real, Real> cubic_strain_limit_eigenvalues(Real I5v) {
    const Real s = std::sqrt(I5v);
    return {6 * (s - 1), 3 * (1 / s + s - 2)};
}

// Cubic overstretch penalty lambda' * a_t * max(sqrt(I5)-1, 0)^3 per axis.
// Convex on its active branch, so no projection is ever needed; dormant below
// unit stretch with C2 contact at the switch.
inline MembraneDerivs cubic_strain_limit(const Mat3x2& F, Real lambda_p, Real a_t) {
    MembraneDerivs out;
    const Real scale = lambda_p * a_t;
    for (int dir = 0; dir < 2; ++dir) {
        const Vec3 f = F.col(dir);
        const Real I5v = f.squaredNorm();
        if (I5v <= 1.0) continue;
        const Real s = std::sqrt(I5v);
        out.value += scale * (s - 1) * (s - 1) * (s - 1);
        out.dF.col(dir) += scale * (3 * (s - 1) * (s - 1) / s) * f;
        const auto [e1, e23] = cubic_strain_limit_eigenvalues(I5v);
        Mat3 blk = scale * (e23 * Mat3::Identity() +
                            ((e1 - e23) / I5v) * f * f.transpose());
        out.hess.block<3, 3>(3 * dir, 3 * dir) += blk;
    }
    return out;
}

// Quadratic penalty on the mixed invariant I6 = (F u) . (F v).
inline MembraneDerivs shear_energy(const Mat3x2& F, Real k, Real a_t,
                                   bool project = true) {
    MembraneDerivs out;
    const Real scale = k * a_t;
    const Vec3 f0 = F.col(0), f1 = F.col(1);
    const Real I6 = f0.dot(f1);
    out.value = scale * I6 * I6;
    out.dF.col(0) = 2 * scale * I6 * f1;
    out.dF.col(1) = 2 * scale * I6 * f0;
    Vec6 g;
    g << f1, f0;
    Mat6 S = Mat6::Zero();
    S.block<3, 3>(0, 3) = Mat3::Identity();
    S.block<3, 3>(3, 0) = Mat3::Identity();
    out.hess = 2 * scale * (g * g.transpose() + I6 * S);
    if (project) out.hess = project_psd(out.hess);
    return out;
}

// Chain rule factor vec(F) vs the nine vertex coordinates (x0, x1, x2).
inline Eigen::Matrix<Real, 6, 9> membrane_dFdx(const Mat2& inv_rest_edges) {
    Eigen::Matrix<Real, 6, 9> J = Eigen::Matrix<Real, 6, 9>::Zero();
    const Mat2& B = inv_rest_edges;
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 3; ++k) {
            J(3 * j + k, 3 + k) = B(0, j);
            J(3 * j + k, 6 + k) = B(1, j);
            J(3 * j + k, k) = -B(0, j) - B(1, j);
        }
    }
    return J;
}

} // namespace adipc
