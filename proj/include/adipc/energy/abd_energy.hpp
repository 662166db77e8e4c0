#pragma once

#include "../core/types.hpp"
#include "neo_hookean.hpp"
#include "psd.hpp"

namespace adipc {

inline Mat3 affine_matrix(const Vec12& q) {
    Mat3 A;
    A.row(0) = q.segment<3>(3).transpose();
    A.row(1) = q.segment<3>(6).transpose();
    A.row(2) = q.segment<3>(9).transpose();
    return A;
}

// Rigidity penalty kappa * V * |A^T A - I|_F^2. Gradient 4 kappa V A C; the
// fourth-order term in the Hessian is written out per entry.
inline Stencil12 abd_orthogonality(const Vec12& q, Real kappa, Real rest_volume,
                                   bool project = true) {
    const Mat3 A = affine_matrix(q);
    const Mat3 C = A.transpose() * A - Mat3::Identity();
    const Real kv = kappa * rest_volume;

    Stencil12 out;
    out.value = kv * C.squaredNorm();
    const Mat3 G = 4 * kv * A * C;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out.grad[3 + 3 * r + c] = G(r, c);

    const Mat3 AAt = A * A.transpose();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            for (int s = 0; s < 3; ++s)
                for (int t = 0; t < 3; ++t) {
                    Real v = A(r, t) * A(s, c) + (r == s ? C(t, c) : 0.0) +
                             (t == c ? AAt(r, s) : 0.0);
                    out.hess(3 + 3 * r + c, 3 + 3 * s + t) = 4 * kv * v;
                }
    if (project) out.hess = project_psd(out.hess);
    return out;
}

} // namespace adipc
