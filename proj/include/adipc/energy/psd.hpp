#pragma once

#include "../core/types.hpp"

namespace adipc {

// Eigenvalue clamp onto the PSD cone. Input must be symmetric.
template <class Derived>
typename Derived::PlainObject project_psd(const Eigen::MatrixBase<Derived>& M) {
    using Mat = typename Derived::PlainObject;
    Eigen::SelfAdjointEigenSolver<Mat> es(M.derived());
    auto ev = es.eigenvalues().cwiseMax(0.0);
    return Mat(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
}

} // namespace adipc
