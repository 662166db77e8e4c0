#pragma once

#include <cmath>

#include "../energy/psd.hpp"
#include "distance.hpp"

namespace adipc {

// Log barrier in squared distance s = d^2 with activation threshold
// shat = dhat^2. Zero with two vanishing derivatives at s = shat, grows
// without bound as s -> 0.

inline Real barrier_value(Real s, Real shat, Real kappa) {
    if (s >= shat) return 0;
    const Real r = s - shat;
    return -kappa * r * r * std::log(s / shat);
}

inline Real barrier_d1(Real s, Real shat, Real kappa) {
    if (s >= shat) return 0;
    const Real r = s - shat;
    return -kappa * (2 * r * std::log(s / shat) + r * r / s);
}

inline Real barrier_d2(Real s, Real shat, Real kappa) {
    if (s >= shat) return 0;
    const Real r = s - shat;
    return -kappa * (2 * std::log(s / shat) + 4 * r / s - r * r / (s * s));
}

// Curvature of the barrier as a function of plain distance d, used to match
// the contact stiffness against the inertia term.
inline Real barrier_curvature_in_d(Real d, Real dhat, Real kappa) {
    const Real s = d * d;
    return 4 * s * barrier_d2(s, dhat * dhat, kappa) +
           2 * barrier_d1(s, dhat * dhat, kappa);
}

// Stiffness that makes the barrier curvature at d = dhat/2 comparable to the
// average nodal inertia response, scaled by a user factor.
inline Real initial_barrier_stiffness(Real avg_mass, Real dt, Real dhat,
                                      Real scale) {
    const Real unit = std::abs(barrier_curvature_in_d(dhat / 2, dhat, 1.0));
    return scale * (avg_mass / (dt * dt)) / unit;
}

// Chain rule through s(x) with an optional eigenvalue clamp of the 12x12.
struct BarrierDerivs {
    Real value = 0;
    Vec12 grad = Vec12::Zero();
    Mat12 hess = Mat12::Zero();
};

inline BarrierDerivs barrier_pair_derivs(const PairDerivs& d, Real shat, Real kappa,
                                         bool project = true) {
    BarrierDerivs out;
    if (d.dist2 >= shat) return out;
    const Real b1 = barrier_d1(d.dist2, shat, kappa);
    const Real b2 = barrier_d2(d.dist2, shat, kappa);
    out.value = barrier_value(d.dist2, shat, kappa);
    out.grad = b1 * d.grad;
    out.hess = b2 * (d.grad * d.grad.transpose()) + b1 * d.hess;
    if (project) out.hess = project_psd(out.hess);
    return out;
}

// Half-space barrier for one node: s = (n . x - height)^2, everything closed
// form, hessian clamped along the plane normal.
struct GroundDerivs {
    Real value = 0;
    Vec3 grad = Vec3::Zero();
    Mat3 hess = Mat3::Zero();
    Real dist = 0;
};

inline GroundDerivs ground_barrier_derivs(const Vec3& x, const Vec3& normal,
                                          Real height, Real dhat, Real kappa,
                                          bool project = true) {
    GroundDerivs out;
    out.dist = normal.dot(x) - height;
    const Real s = out.dist * out.dist;
    const Real shat = dhat * dhat;
    if (out.dist <= 0 || s >= shat) return out;
    out.value = barrier_value(s, shat, kappa);
    out.grad = barrier_d1(s, shat, kappa) * 2 * out.dist * normal;
    Real c = barrier_curvature_in_d(out.dist, dhat, kappa);
    if (project && c < 0) c = 0;
    out.hess = c * normal * normal.transpose();
    return out;
}

} // namespace adipc
