#pragma once

#include <cmath>

#include "../precond/mas.hpp"
#include "../sparse/srbk_spmv.hpp"

namespace adipc {

struct PcgResult {
    int iters = 0;
    Real rel_residual = 0;
    bool converged = false;
};

namespace detail {

inline void flat_to_blocks(const VecX& x, std::vector<Vec3>& b) {
    b.resize(static_cast<std::size_t>(x.size()) / 3);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = x.segment<3>(3 * i);
}

inline void blocks_to_flat(const std::vector<Vec3>& b, VecX& x) {
    x.resize(3 * static_cast<Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i) x.segment<3>(3 * i) = b[i];
}

} // namespace detail

// Preconditioned conjugate gradients from a zero initial guess. Convergence is
// measured in the preconditioner norm sqrt(r . M r) relative to the right hand
// side; every `restart` iterations the residual is recomputed from scratch.
// Dot products run sequentially so results are reproducible.
inline PcgResult pcg_solve(const SortedSymBlockCoo& A, const VecX& b,
                           const Preconditioner& M, Real rel_tol, int restart,
                           int max_iters, const ExecPolicy& pol, VecX& x) {
    PcgResult out;
    x = VecX::Zero(b.size());
    if (b.squaredNorm() == 0) {
        out.converged = true;
        return out;
    }

    std::vector<Vec3> scratch_in, scratch_out;
    auto apply_a = [&](const VecX& v, VecX& av) {
        detail::flat_to_blocks(v, scratch_in);
        scratch_out = srbk_spmv(A, scratch_in, pol);
        detail::blocks_to_flat(scratch_out, av);
    };

    VecX r = b, z, p, ap;
    M.apply(r, z);
    p = z;
    Real rho = r.dot(z);
    const Real rho0 = rho;
    if (!(rho0 > 0)) return out; // preconditioner failed to produce a direction
    const Real stop = rel_tol * rel_tol * rho0;

    for (int k = 1; k <= max_iters; ++k) {
        apply_a(p, ap);
        const Real p_ap = p.dot(ap);
        if (!(p_ap > 0)) { // matrix lost positive definiteness
            out.iters = k - 1;
            out.rel_residual = std::sqrt(std::abs(rho) / rho0);
            return out;
        }
        const Real alpha = rho / p_ap;
        x += alpha * p;
        if (restart > 0 && k % restart == 0) {
            apply_a(x, ap);
            r = b - ap;
        } else {
            r -= alpha * ap;
        }
        M.apply(r, z);
        const Real rho_next = r.dot(z);
        out.iters = k;
        if (rho_next <= stop) {
            out.rel_residual = std::sqrt(std::abs(rho_next) / rho0);
            out.converged = true;
            return out;
        }
        p = z + (rho_next / rho) * p;
        rho = rho_next;
    }
    out.rel_residual = std::sqrt(std::abs(rho) / rho0);
    return out;
}

} // namespace adipc
