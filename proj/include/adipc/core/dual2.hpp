#pragma once

#include <array>
#include <cmath>

#include "types.hpp"

namespace adipc {

// Forward-mode scalar carrying value, gradient and Hessian w.r.t. N inputs.
// Exact to machine precision; used where closed-form second derivatives are
// not worth hand-deriving (dihedral angles, distance subcases).
template <int N>
struct Dual2 {
    Real v = 0;
    Eigen::Matrix<Real, N, 1> g = Eigen::Matrix<Real, N, 1>::Zero();
    Eigen::Matrix<Real, N, N> h = Eigen::Matrix<Real, N, N>::Zero();

    Dual2() = default;
    explicit Dual2(Real c) : v(c) {}

    static Dual2 variable(Real value, int k) {
        Dual2 d(value);
        d.g[k] = 1;
        return d;
    }
};

template <int N> Dual2<N> operator+(const Dual2<N>& a, const Dual2<N>& b) {
    Dual2<N> r(a.v + b.v);
    r.g = a.g + b.g;
    r.h = a.h + b.h;
    return r;
}
template <int N> Dual2<N> operator-(const Dual2<N>& a, const Dual2<N>& b) {
    Dual2<N> r(a.v - b.v);
    r.g = a.g - b.g;
    r.h = a.h - b.h;
    return r;
}
template <int N> Dual2<N> operator-(const Dual2<N>& a) {
    Dual2<N> r(-a.v);
    r.g = -a.g;
    r.h = -a.h;
    return r;
}
template <int N> Dual2<N> operator*(const Dual2<N>& a, const Dual2<N>& b) {
    Dual2<N> r(a.v * b.v);
    r.g = a.g * b.v + b.g * a.v;
    r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
    return r;
}
template <int N> Dual2<N> operator*(const Dual2<N>& a, Real s) {
    Dual2<N> r(a.v * s);
    r.g = a.g * s;
    r.h = a.h * s;
    return r;
}
template <int N> Dual2<N> operator*(Real s, const Dual2<N>& a) { return a * s; }
template <int N> Dual2<N> operator+(const Dual2<N>& a, Real s) {
    Dual2<N> r = a;
    r.v += s;
    return r;
}
template <int N> Dual2<N> operator-(const Dual2<N>& a, Real s) { return a + (-s); }
template <int N> Dual2<N> operator-(Real s, const Dual2<N>& a) { return (-a) + s; }

template <int N> Dual2<N> inverse(const Dual2<N>& b) {
    const Real iv = 1.0 / b.v;
    Dual2<N> r(iv);
    r.g = -b.g * (iv * iv);
    r.h = -b.h * (iv * iv) + (2 * iv * iv * iv) * b.g * b.g.transpose();
    return r;
}
template <int N> Dual2<N> operator/(const Dual2<N>& a, const Dual2<N>& b) {
    return a * inverse(b);
}
template <int N> Dual2<N> operator/(const Dual2<N>& a, Real s) { return a * (1.0 / s); }

template <int N> Dual2<N> sqrt(const Dual2<N>& a) {
    const Real s = std::sqrt(a.v);
    Dual2<N> r(s);
    r.g = a.g / (2 * s);
    r.h = a.h / (2 * s) - a.g * a.g.transpose() / (4 * a.v * s);
    return r;
}

// atan2 with the symmetric closed-form Hessian.
template <int N> Dual2<N> atan2(const Dual2<N>& y, const Dual2<N>& x) {
    const Real r2 = x.v * x.v + y.v * y.v;
    Dual2<N> r(std::atan2(y.v, x.v));
    r.g = (x.v * y.g - y.v * x.g) / r2;
    const auto gxgy = x.g * y.g.transpose();
    const auto gxgx = x.g * x.g.transpose();
    const auto gygy = y.g * y.g.transpose();
    r.h = ((y.v * y.v - x.v * x.v) * (gxgy + gxgy.transpose()) +
           (2 * x.v * y.v) * (gxgx - gygy)) /
              (r2 * r2) +
          (x.v * y.h - y.v * x.h) / r2;
    return r;
}

// Scalar shims so geometric expressions compile for double and Dual2 alike.
inline Real value_of(Real x) { return x; }
template <int N> Real value_of(const Dual2<N>& x) { return x.v; }

template <class T> using GVec3 = std::array<T, 3>;

template <class T> GVec3<T> gsub(const GVec3<T>& a, const GVec3<T>& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
template <class T> GVec3<T> gadd(const GVec3<T>& a, const GVec3<T>& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
template <class T> GVec3<T> gscale(const T& s, const GVec3<T>& a) {
    return {s * a[0], s * a[1], s * a[2]};
}
template <class T> T gdot(const GVec3<T>& a, const GVec3<T>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
template <class T> GVec3<T> gcross(const GVec3<T>& a, const GVec3<T>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}
template <class T> T gnorm2(const GVec3<T>& a) { return gdot(a, a); }

inline GVec3<Real> as_gvec(const Vec3& p) { return {p[0], p[1], p[2]}; }

// Point whose coordinates are AD variables k0, k0+1, k0+2.
template <int N> GVec3<Dual2<N>> dual_point(const Vec3& p, int k0) {
    return {Dual2<N>::variable(p[0], k0), Dual2<N>::variable(p[1], k0 + 1),
            Dual2<N>::variable(p[2], k0 + 2)};
}

} // namespace adipc
