#pragma once

#include <stdexcept>

#include "../core/types.hpp"
#include "psd.hpp"

namespace adipc {

struct TetRest {
    Mat3 inv_rest_edges;
    Real volume = 0;
};

inline TetRest tet_rest(const Vec3& p0, const Vec3& p1, const Vec3& p2,
                        const Vec3& p3) {
    Mat3 Dm;
    Dm.col(0) = p1 - p0;
    Dm.col(1) = p2 - p0;
    Dm.col(2) = p3 - p0;
    const Real vol = Dm.determinant() / 6.0;
    if (!(vol > 0)) throw std::invalid_argument("inverted or degenerate rest tet");
    TetRest r;
    r.inv_rest_edges = Dm.inverse();
    r.volume = vol;
    return r;
}

inline Mat3 cofactor(const Mat3& F) {
    Mat3 C;
    C.col(0) = F.col(1).cross(F.col(2));
    C.col(1) = F.col(2).cross(F.col(0));
    C.col(2) = F.col(0).cross(F.col(1));
    return C;
}

inline Mat3 cross_mat(const Vec3& a) {
    Mat3 M;
    M << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
    return M;
}

// vec(F) vs the twelve vertex coordinates (x0..x3), column-major F.
inline Mat9x12 tet_dFdx(const Mat3& inv_rest_edges) {
    Mat9x12 J = Mat9x12::Zero();
    const Mat3& B = inv_rest_edges;
    for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 3; ++c)
            for (int k = 0; k < 3; ++k) {
                J(3 * j + k, 3 * (c + 1) + k) += B(c, j);
                J(3 * j + k, k) -= B(c, j);
            }
    return J;
}

struct Stencil12 {
    Real value = 0;
    Vec12 grad = Vec12::Zero();
    Mat12 hess = Mat12::Zero();
};

// Polynomial stable variant: mu/2 (|F|^2 - 3) - mu (J - 1) + lam/2 (J - 1)^2.
// Zero gradient at rest, finite everywhere including inversion.
inline Stencil12 stable_neo_hookean(const Vec3& x0, const Vec3& x1, const Vec3& x2,
                                    const Vec3& x3, const TetRest& rest, Real mu,
                                    Real lam, bool project = true) {
    Mat3 Ds;
    Ds.col(0) = x1 - x0;
    Ds.col(1) = x2 - x0;
    Ds.col(2) = x3 - x0;
    const Mat3 F = Ds * rest.inv_rest_edges;
    const Real J = F.determinant();
    const Real IC = F.squaredNorm();
    const Mat3 cof = cofactor(F);
    const Real V = rest.volume;

    Stencil12 out;
    out.value = V * (0.5 * mu * (IC - 3) - mu * (J - 1) + 0.5 * lam * (J - 1) * (J - 1));

    const Real dJcoef = lam * (J - 1) - mu;
    const Mat3 P = mu * F + dJcoef * cof;
    const Mat9x12 dFdx = tet_dFdx(rest.inv_rest_edges);
    Vec9 vecP, vecCof;
    for (int k = 0; k < 9; ++k) {
        vecP[k] = P.data()[k];
        vecCof[k] = cof.data()[k];
    }
    out.grad = V * dFdx.transpose() * vecP;

    Mat9 H9 = mu * Mat9::Identity() + lam * vecCof * vecCof.transpose();
    const Vec3 f0 = F.col(0), f1 = F.col(1), f2 = F.col(2);
    Mat9 HJ = Mat9::Zero();
    HJ.block<3, 3>(0, 3) = -cross_mat(f2);
    HJ.block<3, 3>(0, 6) = cross_mat(f1);
    HJ.block<3, 3>(3, 0) = cross_mat(f2);
    HJ.block<3, 3>(3, 6) = -cross_mat(f0);
    HJ.block<3, 3>(6, 0) = -cross_mat(f1);
    HJ.block<3, 3>(6, 3) = cross_mat(f0);
    H9 += dJcoef * HJ;

    out.hess = V * dFdx.transpose() * H9 * dFdx;
    if (project) out.hess = project_psd(out.hess);
    return out;
}

} // namespace adipc
