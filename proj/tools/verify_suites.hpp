#pragma once

// Scripted verification suites shared by the command line `verify` mode and
// the acceptance tests. Each suite returns pass/fail plus a one line summary
// of measured values; with verbose on it also prints one line per check.

#include <cstdarg>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <adipc/contact/barrier.hpp>
#include <adipc/contact/distance.hpp>
#include <adipc/energy/abd_energy.hpp>
#include <adipc/energy/bending.hpp>
#include <adipc/energy/membrane.hpp>
#include <adipc/energy/neo_hookean.hpp>
#include <adipc/io/scene_io.hpp>
#include <adipc/precond/fixture_graph.hpp>
#include <adipc/precond/hierarchy.hpp>
#include <adipc/solver/newton.hpp>
#include <adipc/sparse/block_coo.hpp>
#include <adipc/sparse/reduction.hpp>
#include <adipc/sparse/srbk_spmv.hpp>

namespace adipc::vsuite {

struct SuiteResult {
    bool pass = true;
    std::string summary;
};

namespace detail {

inline std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

inline void check(SuiteResult& r, bool ok, bool verbose, const std::string& text) {
    if (!ok) r.pass = false;
    if (verbose) std::printf("  [%s] %s\n", ok ? "ok" : "FAIL", text.c_str());
}

inline VecX fd_gradient(const std::function<Real(const VecX&)>& f, const VecX& x,
                        Real h = 1e-5) {
    VecX g(x.size());
    VecX xp = x;
    for (int i = 0; i < x.size(); ++i) {
        const Real x0 = xp[i];
        xp[i] = x0 + h;
        const Real fp = f(xp);
        xp[i] = x0 - h;
        const Real fm = f(xp);
        xp[i] = x0;
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

inline MatX fd_jacobian(const std::function<VecX(const VecX&)>& g, const VecX& x,
                        Real h = 1e-5) {
    MatX J;
    VecX xp = x;
    for (int i = 0; i < x.size(); ++i) {
        const Real x0 = xp[i];
        xp[i] = x0 + h;
        const VecX gp = g(xp);
        xp[i] = x0 - h;
        const VecX gm = g(xp);
        xp[i] = x0;
        if (J.size() == 0) J.resize(gp.size(), x.size());
        J.col(i) = (gp - gm) / (2 * h);
    }
    return J;
}

inline Real rel_err(const VecX& got, const VecX& want) {
    const Real n = want.norm();
    return n == 0 ? got.norm() : (got - want).norm() / n;
}

inline Real rel_err(const MatX& got, const MatX& want) {
    const Real n = want.norm();
    return n == 0 ? got.norm() : (got - want).norm() / n;
}

inline MatX dense_from(const SortedSymBlockCoo& A) {
    MatX D = MatX::Zero(3 * A.n_block_rows, 3 * A.n_block_rows);
    for (std::size_t e = 0; e < A.blocks.size(); ++e) {
        const Index r = A.rows[e], c = A.cols[e];
        D.block<3, 3>(3 * r, 3 * c) += A.blocks[e];
        if (r != c) D.block<3, 3>(3 * c, 3 * r) += A.blocks[e].transpose();
    }
    return D;
}

inline BlockTripletStream random_stream(std::mt19937& rng, int n_blocks,
                                        int n_entries) {
    std::uniform_int_distribution<int> pick(0, n_blocks - 1);
    std::normal_distribution<Real> val(0.0, 1.0);
    BlockTripletStream s;
    for (int i = 0; i < n_entries; ++i) {
        Mat3 B;
        for (int k = 0; k < 9; ++k) B.data()[k] = val(rng);
        const Index r = pick(rng), c = pick(rng);
        if (r == c) B = (B + B.transpose()).eval();
        s.emit(r, c, B);
    }
    return s;
}

// Accumulate blocks per key scanning left to right; the deterministic
// reduction must reproduce this bitwise on the sorted stream.
inline std::unordered_map<std::uint64_t, Mat3> map_accumulate(
    const BlockTripletStream& s) {
    std::unordered_map<std::uint64_t, Mat3> acc;
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto it = acc.find(s.keys[i]);
        if (it == acc.end())
            acc.emplace(s.keys[i], s.values[i]);
        else
            it->second += s.values[i];
    }
    return acc;
}

} // namespace detail

// The four assembly kernels against brute-force oracles on randomized
// instances, plus the eight-value lane walkthrough.
inline SuiteResult kernel_oracles(bool verbose = false, long seed = -1) {
    using namespace detail;
    SuiteResult r;
    std::mt19937 rng(seed >= 0 ? static_cast<unsigned>(seed) : 90210u);
    ExecPolicy det;
    det.deterministic = true;
    ExecPolicy par;
    par.threads = 4;
    par.lane_width = 8;

    {
        const std::vector<Index> O = {0, 0, 0, 1, 1, 1, 2, 2};
        const std::vector<Real> V(8, 1.0);
        bool ok = true;
        for (const ExecPolicy& pol : {det, par})
            ok = ok && fast_segment_reduction(O, V, 3, pol) ==
                           std::vector<Real>{3.0, 3.0, 2.0};
        check(r, ok, verbose, "lane walkthrough: 8 unit values, heads {0,3,6} -> {3,3,2}");
        if (!ok) r.summary = "lane walkthrough failed; ";
    }

    int seg_det_fail = 0;
    Real seg_par_rel = 0;
    {
        std::uniform_int_distribution<int> len(1, 400);
        std::uniform_int_distribution<int> adv(0, 3);
        std::normal_distribution<Real> val(0.0, 1.0);
        for (int t = 0; t < 1000; ++t) {
            const int n = len(rng);
            std::vector<Index> O(n);
            std::vector<Real> V(n);
            Index seg = 0;
            for (int i = 0; i < n; ++i) {
                if (i > 0 && adv(rng) == 0) ++seg;
                O[i] = seg;
                V[i] = val(rng);
            }
            const Index n_seg = seg + 1;
            std::vector<Real> want(n_seg, 0.0);
            for (int i = 0; i < n; ++i) want[O[i]] += V[i];
            if (fast_segment_reduction(O, V, n_seg, det) != want) ++seg_det_fail;
            const auto got = fast_segment_reduction(O, V, n_seg, par);
            for (Index sg = 0; sg < n_seg; ++sg)
                seg_par_rel = std::max(seg_par_rel,
                                       std::abs(got[sg] - want[sg]) /
                                           std::max(Real(1), std::abs(want[sg])));
        }
        check(r, seg_det_fail == 0 && seg_par_rel <= 1e-12, verbose,
              fmt("segment reduction x1000: %d deterministic mismatches, parallel rel %.1e",
                  seg_det_fail, seg_par_rel));
    }

    int hash_det_fail = 0;
    Real hash_par_rel = 0;
    {
        std::uniform_int_distribution<int> nb(2, 24);
        std::uniform_int_distribution<int> ne(1, 240);
        for (int t = 0; t < 1000; ++t) {
            const int n_blocks = nb(rng);
            BlockTripletStream s = random_stream(rng, n_blocks, ne(rng));
            const auto oracle = map_accumulate(s);

            BlockTripletStream sd = s;
            sort_stream(sd, det);
            const SortedSymBlockCoo A = fast_hash_reduction(sd, n_blocks, det);
            if (A.blocks.size() != oracle.size()) {
                ++hash_det_fail;
            } else {
                for (std::size_t e = 0; e < A.blocks.size(); ++e) {
                    const auto k = make_block_key(A.rows[e], A.cols[e]);
                    const auto it = oracle.find(k);
                    if (it == oracle.end() || !(A.blocks[e] == it->second)) {
                        ++hash_det_fail;
                        break;
                    }
                }
            }

            BlockTripletStream sp = s;
            sort_stream(sp, par);
            const SortedSymBlockCoo Ap = fast_hash_reduction(sp, n_blocks, par);
            for (std::size_t e = 0; e < Ap.blocks.size(); ++e) {
                const Mat3& want = oracle.at(make_block_key(Ap.rows[e], Ap.cols[e]));
                hash_par_rel =
                    std::max(hash_par_rel, (Ap.blocks[e] - want).norm() /
                                               std::max(Real(1), want.norm()));
            }
        }
        check(r, hash_det_fail == 0 && hash_par_rel <= 1e-12, verbose,
              fmt("hash reduction x1000: %d deterministic mismatches, parallel rel %.1e",
                  hash_det_fail, hash_par_rel));
    }

    int spmv_repro_fail = 0;
    Real spmv_rel = 0;
    {
        std::uniform_int_distribution<int> nb(1, 16);
        std::uniform_int_distribution<int> ne(1, 150);
        std::normal_distribution<Real> val(0.0, 1.0);
        for (int t = 0; t < 1000; ++t) {
            const int n_blocks = nb(rng);
            BlockTripletStream s = random_stream(rng, n_blocks, ne(rng));
            sort_stream(s, det);
            const SortedSymBlockCoo A = fast_hash_reduction(s, n_blocks, det);
            const MatX D = dense_from(A);
            std::vector<Vec3> x(n_blocks);
            VecX xd(3 * n_blocks);
            for (int i = 0; i < n_blocks; ++i)
                for (int k = 0; k < 3; ++k) {
                    x[i][k] = val(rng);
                    xd[3 * i + k] = x[i][k];
                }
            const VecX want = D * xd;
            const Real scale = std::max(Real(1), want.norm());
            const auto y1 = srbk_spmv(A, x, det);
            const auto y2 = srbk_spmv(A, x, det);
            const auto yp = srbk_spmv(A, x, par);
            for (int i = 0; i < n_blocks; ++i) {
                if (!(y1[i] == y2[i])) ++spmv_repro_fail;
                spmv_rel = std::max(spmv_rel,
                                    (y1[i] - want.segment<3>(3 * i)).norm() / scale);
                spmv_rel = std::max(spmv_rel,
                                    (yp[i] - want.segment<3>(3 * i)).norm() / scale);
            }
        }
        check(r, spmv_repro_fail == 0 && spmv_rel <= 1e-12, verbose,
              fmt("symmetric spmv x1000: %d reproducibility faults, dense-oracle rel %.1e",
                  spmv_repro_fail, spmv_rel));
    }

    Real abd_rel = 0;
    {
        std::uniform_int_distribution<int> nf(0, 5);
        std::uniform_int_distribution<int> nbod(0, 2);
        std::uniform_int_distribution<int> vpb(1, 4);
        std::uniform_int_distribution<int> nc(1, 12);
        std::normal_distribution<Real> val(0.0, 1.0);
        for (int t = 0; t < 1000; ++t) {
            DofMap map;
            do {
                map = DofMap{};
                map.n_fem_nodes = nf(rng);
                map.n_bodies = nbod(rng);
                for (Index b = 0; b < map.n_bodies; ++b) {
                    const int nv = vpb(rng);
                    for (int v = 0; v < nv; ++v) {
                        const Vec3 rest(val(rng), val(rng), val(rng));
                        map.abd_node_body.push_back(b);
                        Mat3x12 J = Mat3x12::Zero();
                        J.block<3, 3>(0, 0) = Mat3::Identity();
                        for (int rr = 0; rr < 3; ++rr)
                            J.block<1, 3>(rr, 3 + 3 * rr) = rest.transpose();
                        map.abd_node_jacobian.push_back(J);
                    }
                }
            } while (map.n_nodes() < 4);
            const Index n_nodes = map.n_nodes();
            const Index n_blocks = map.n_blocks();

            MatX dofJ = MatX::Zero(3 * n_nodes, 3 * n_blocks);
            for (Index i = 0; i < n_nodes; ++i) {
                if (map.is_fem(i))
                    dofJ.block<3, 3>(3 * i, 3 * i) = Mat3::Identity();
                else
                    dofJ.block<3, 12>(3 * i,
                                      3 * map.body_block_base(map.body_of(i))) =
                        map.jacobian(i);
            }

            std::uniform_int_distribution<Index> pick(0, n_nodes - 1);
            BlockTripletStream node_pairs;
            MatX naive = MatX::Zero(3 * n_blocks, 3 * n_blocks);
            for (int c = 0, made = 0, guard = 0; made < nc(rng) && guard < 200;
                 ++c, ++guard) {
                std::array<Index, 4> nd;
                for (auto& v : nd) v = pick(rng);
                std::sort(nd.begin(), nd.end());
                if (std::unique(nd.begin(), nd.end()) != nd.end()) continue;
                Mat12 L;
                for (int k = 0; k < 144; ++k) L.data()[k] = val(rng);
                const Mat12 H = L + L.transpose();
                MatX sel = MatX::Zero(12, 3 * n_nodes);
                for (int a = 0; a < 4; ++a) {
                    sel.block<3, 3>(3 * a, 3 * nd[a]) = Mat3::Identity();
                    for (int b = a; b < 4; ++b)
                        node_pairs.emit(nd[a], nd[b], H.block<3, 3>(3 * a, 3 * b));
                }
                const MatX S = sel * dofJ;
                naive += S.transpose() * H * S;
                ++made;
            }
            if (node_pairs.size() == 0) continue;

            for (const ExecPolicy& pol : {det, par}) {
                BlockTripletStream tiles = two_level_abd_reduce(node_pairs, map, pol);
                sort_stream(tiles, pol);
                const SortedSymBlockCoo A = fast_hash_reduction(tiles, n_blocks, pol);
                abd_rel = std::max(abd_rel, rel_err(dense_from(A), naive));
            }
        }
        check(r, abd_rel <= 1e-10, verbose,
              fmt("two-level affine-body reduction x1000: sandwich-oracle rel %.1e",
                  abd_rel));
    }

    r.summary += fmt("parallel rel: segment %.1e, hash %.1e, spmv %.1e, abd %.1e",
                     seg_par_rel, hash_par_rel, spmv_rel, abd_rel);
    return r;
}

// Numerical spectrum of the analytic strain-limit Hessian against the closed
// form per-axis eigenvalues, at unit stiffness scale.
inline SuiteResult sl_eigensystem(bool verbose = false, long seed = -1) {
    using namespace detail;
    SuiteResult r;
    std::mt19937 rng(seed >= 0 ? static_cast<unsigned>(seed) : 1151u);
    std::normal_distribution<Real> g(0.0, 1.0);
    std::uniform_real_distribution<Real> stretch(1.02, 1.8);

    Real max_diff = 0;
    Real min_eig = std::numeric_limits<Real>::max();
    for (int t = 0; t < 1000; ++t) {
        Mat3x2 F;
        for (int dir = 0; dir < 2; ++dir) {
            Vec3 u(g(rng), g(rng), g(rng));
            while (u.norm() < 1e-8) u = Vec3(g(rng), g(rng), g(rng));
            F.col(dir) = stretch(rng) * u.normalized();
        }
        const MembraneDerivs d = cubic_strain_limit(F, 1.0, 1.0);
        Eigen::SelfAdjointEigenSolver<Mat6> es(d.hess);
        std::array<Real, 6> want;
        for (int dir = 0; dir < 2; ++dir) {
            const auto [e1, e23] =
                cubic_strain_limit_eigenvalues(F.col(dir).squaredNorm());
            want[3 * dir + 0] = e1;
            want[3 * dir + 1] = e23;
            want[3 * dir + 2] = e23;
        }
        std::sort(want.begin(), want.end());
        for (int k = 0; k < 6; ++k) {
            max_diff = std::max(max_diff, std::abs(es.eigenvalues()[k] - want[k]));
            min_eig = std::min(min_eig, es.eigenvalues()[k]);
        }
    }
    check(r, max_diff <= 1e-8, verbose,
          fmt("spectrum x1000: max |numerical - closed form| %.2e", max_diff));
    check(r, min_eig >= -1e-10, verbose,
          fmt("convexity above unit stretch: min eigenvalue %.2e", min_eig));
    r.summary = fmt("max eigenvalue diff %.1e, min eigenvalue %.1e", max_diff, min_eig);
    return r;
}

// Gradient and Hessian of every element energy against central differences.
inline SuiteResult fd_checks(bool verbose = false, long seed = -1) {
    using namespace detail;
    SuiteResult r;
    std::mt19937 rng(seed >= 0 ? static_cast<unsigned>(seed) : 60601u);
    std::normal_distribution<Real> g(0.0, 1.0);

    Real worst_grad = 0, worst_hess = 0;
    std::string worst_grad_name = "-", worst_hess_name = "-";
    auto record = [&](const char* name, Real ge, Real he) {
        check(r, ge <= 1e-4 && he <= 1e-3, verbose,
              fmt("%s: grad rel %.2e, hess rel %.2e", name, ge, he));
        if (ge > worst_grad) {
            worst_grad = ge;
            worst_grad_name = name;
        }
        if (he > worst_hess) {
            worst_hess = he;
            worst_hess_name = name;
        }
    };

    auto flat6 = [](const Mat3x2& F) {
        VecX v(6);
        for (int k = 0; k < 6; ++k) v[k] = F.data()[k];
        return v;
    };
    auto unflat6 = [](const VecX& v) {
        Mat3x2 F;
        for (int k = 0; k < 6; ++k) F.data()[k] = v[k];
        return F;
    };

    auto membrane_case = [&](const char* name,
                             const std::function<MembraneDerivs(const Mat3x2&)>& e,
                             const std::function<Mat3x2(std::mt19937&)>& gen) {
        Real ge = 0, he = 0;
        for (int t = 0; t < 25; ++t) {
            const Mat3x2 F = gen(rng);
            const MembraneDerivs d = e(F);
            auto fval = [&](const VecX& v) { return e(unflat6(v)).value; };
            auto fgrad = [&](const VecX& v) { return VecX(flat6(e(unflat6(v)).dF)); };
            ge = std::max(ge, rel_err(flat6(d.dF), fd_gradient(fval, flat6(F))));
            he = std::max(he, rel_err(MatX(d.hess), fd_jacobian(fgrad, flat6(F))));
        }
        record(name, ge, he);
    };

    auto noisy_F = [&g](std::mt19937& rg, Real spread) {
        Mat3x2 F;
        F << 1 + spread * g(rg), spread * g(rg), spread * g(rg),
            1 + spread * g(rg), spread * g(rg), spread * g(rg);
        return F;
    };

    membrane_case(
        "membrane stretch",
        [](const Mat3x2& F) { return fbw_membrane(F, 1.7, 0.9, false); },
        [&](std::mt19937& rg) { return noisy_F(rg, 0.3); });
    membrane_case(
        "strain limit",
        [](const Mat3x2& F) { return cubic_strain_limit(F, 1.3, 0.8); },
        [&](std::mt19937& rg) {
            std::uniform_real_distribution<Real> s(1.1, 1.7);
            Mat3x2 F;
            for (int dir = 0; dir < 2; ++dir) {
                Vec3 u(g(rg), g(rg), g(rg));
                while (u.norm() < 1e-8) u = Vec3(g(rg), g(rg), g(rg));
                F.col(dir) = s(rg) * u.normalized();
            }
            return F;
        });
    membrane_case(
        "shear", [](const Mat3x2& F) { return shear_energy(F, 1.3, 0.7, false); },
        [&](std::mt19937& rg) { return noisy_F(rg, 0.4); });

    { // stable neo-hookean in vertex space
        Real ge = 0, he = 0;
        for (int t = 0; t < 25; ++t) {
            const Vec3 p0(0, 0, 0), p1(1, 0, 0), p2(0, 1, 0), p3(0, 0, 1);
            auto jit = [&](const Vec3& p) {
                return Vec3(p + 0.15 * Vec3(g(rng), g(rng), g(rng)));
            };
            TetRest rest;
            try {
                rest = tet_rest(jit(p0), jit(p1), jit(p2), jit(p3));
            } catch (const std::exception&) {
                --t;
                continue;
            }
            VecX x(12);
            for (int a = 0; a < 4; ++a) {
                const Vec3 base = a == 0 ? p0 : a == 1 ? p1 : a == 2 ? p2 : p3;
                const Vec3 world = base + 0.25 * Vec3(g(rng), g(rng), g(rng));
                x.segment<3>(3 * a) = world;
            }
            auto eval = [&](const VecX& v) {
                return stable_neo_hookean(v.segment<3>(0), v.segment<3>(3),
                                          v.segment<3>(6), v.segment<3>(9), rest,
                                          1.0, 1.7, false);
            };
            const Stencil12 d = eval(x);
            auto fval = [&](const VecX& v) { return eval(v).value; };
            auto fgrad = [&](const VecX& v) { return VecX(eval(v).grad); };
            ge = std::max(ge, rel_err(VecX(d.grad), fd_gradient(fval, x)));
            he = std::max(he, rel_err(MatX(d.hess), fd_jacobian(fgrad, x)));
        }
        record("neo-hookean", ge, he);
    }

    { // hinge bending in vertex space
        Real ge = 0, he = 0;
        for (int t = 0; t < 25; ++t) {
            const Vec3 r0(0, 0, 0), r1(1, 0, 0), r2(0.5, 0.8, 0), r3(0.5, -0.7, 0.3);
            auto jit = [&](const Vec3& p) {
                return Vec3(p + 0.12 * Vec3(g(rng), g(rng), g(rng)));
            };
            HingeRest rest;
            try {
                rest = hinge_rest(jit(r0), jit(r1), jit(r2), jit(r3));
            } catch (const std::exception&) {
                --t;
                continue;
            }
            VecX x(12);
            x.segment<3>(0) = jit(r0);
            x.segment<3>(3) = jit(r1);
            x.segment<3>(6) = jit(r2);
            x.segment<3>(9) = jit(r3);
            auto eval = [&](const VecX& v) {
                return hinge_bending(v.segment<3>(0), v.segment<3>(3),
                                     v.segment<3>(6), v.segment<3>(9), rest, 1.2,
                                     false);
            };
            const Stencil12 d = eval(x);
            auto fval = [&](const VecX& v) { return eval(v).value; };
            auto fgrad = [&](const VecX& v) { return VecX(eval(v).grad); };
            ge = std::max(ge, rel_err(VecX(d.grad), fd_gradient(fval, x)));
            he = std::max(he, rel_err(MatX(d.hess), fd_jacobian(fgrad, x)));
        }
        record("bending", ge, he);
    }

    { // affine orthogonality over the twelve body coordinates
        Real ge = 0, he = 0;
        for (int t = 0; t < 25; ++t) {
            VecX q(12);
            for (int k = 0; k < 12; ++k) q[k] = 0.3 * g(rng);
            q[3] += 1;
            q[7] += 1;
            q[11] += 1;
            auto eval = [&](const VecX& v) {
                return abd_orthogonality(Vec12(v), 1.3, 0.7, false);
            };
            const Stencil12 d = eval(q);
            auto fval = [&](const VecX& v) { return eval(v).value; };
            auto fgrad = [&](const VecX& v) { return VecX(eval(v).grad); };
            ge = std::max(ge, rel_err(VecX(d.grad), fd_gradient(fval, q)));
            he = std::max(he, rel_err(MatX(d.hess), fd_jacobian(fgrad, q)));
        }
        record("affine orthogonality", ge, he);
    }

    { // pair barriers: active stencils with a stable nearest feature
        const Real dhat = 0.6, shat = dhat * dhat, kappa = 2.0;
        const Real h = 1e-5;
        std::uniform_real_distribution<Real> coord(-1.5, 1.5);
        auto rand_x = [&](int n) {
            VecX x(n);
            for (int k = 0; k < n; ++k) x[k] = coord(rng);
            return x;
        };
        auto pt_at = [](const VecX& v) {
            return pt_dist2_derivs(v.segment<3>(0), v.segment<3>(3),
                                   v.segment<3>(6), v.segment<3>(9));
        };
        auto ee_at = [](const VecX& v) {
            return ee_dist2_derivs(v.segment<3>(0), v.segment<3>(3),
                                   v.segment<3>(6), v.segment<3>(9));
        };
        auto region_stable = [&](const VecX& x, bool pt) {
            const auto probe = [&](const VecX& v) {
                return pt ? static_cast<int>(
                                classify_pt(v.segment<3>(0), v.segment<3>(3),
                                            v.segment<3>(6), v.segment<3>(9))
                                    .region)
                          : static_cast<int>(
                                classify_ee(v.segment<3>(0), v.segment<3>(3),
                                            v.segment<3>(6), v.segment<3>(9))
                                    .region);
            };
            const auto r0 = probe(x);
            VecX xp = x;
            for (int k = 0; k < 12; ++k) {
                const Real x0 = xp[k];
                xp[k] = x0 + h;
                const auto rp = probe(xp);
                xp[k] = x0 - h;
                const auto rm = probe(xp);
                xp[k] = x0;
                if (rp != r0 || rm != r0) return false;
            }
            return true;
        };
        for (int which = 0; which < 2; ++which) {
            const bool pt = which == 0;
            Real ge = 0, he = 0;
            int done = 0;
            while (done < 25) {
                const VecX x = rand_x(12);
                const PairDerivs pd = pt ? pt_at(x) : ee_at(x);
                if (pd.dist2 < 0.05 * shat || pd.dist2 > 0.8 * shat) continue;
                if (!region_stable(x, pt)) continue;
                auto eval = [&](const VecX& v) {
                    return barrier_pair_derivs(pt ? pt_at(v) : ee_at(v), shat,
                                               kappa, false);
                };
                const BarrierDerivs d = eval(x);
                auto fval = [&](const VecX& v) { return eval(v).value; };
                auto fgrad = [&](const VecX& v) { return VecX(eval(v).grad); };
                ge = std::max(ge, rel_err(VecX(d.grad), fd_gradient(fval, x, h)));
                he = std::max(he, rel_err(MatX(d.hess), fd_jacobian(fgrad, x, h)));
                ++done;
            }
            record(pt ? "barrier point-triangle" : "barrier edge-edge", ge, he);
        }

        { // half space barrier, three coordinates
            Real ge = 0, he = 0;
            std::uniform_real_distribution<Real> gap(0.1 * dhat, 0.85 * dhat);
            for (int t = 0; t < 25; ++t) {
                VecX x(3);
                x << coord(rng), gap(rng), coord(rng);
                auto eval = [&](const VecX& v) {
                    return ground_barrier_derivs(Vec3(v), Vec3::UnitY(), 0.0, dhat,
                                                 kappa, false);
                };
                const GroundDerivs d = eval(x);
                auto fval = [&](const VecX& v) { return eval(v).value; };
                auto fgrad = [&](const VecX& v) { return VecX(eval(v).grad); };
                ge = std::max(ge, rel_err(VecX(d.grad), fd_gradient(fval, x)));
                he = std::max(he, rel_err(MatX(d.hess), fd_jacobian(fgrad, x)));
            }
            record("barrier ground", ge, he);
        }
    }

    r.summary = fmt("max grad rel %.1e (%s), max hess rel %.1e (%s)", worst_grad,
                    worst_grad_name.c_str(), worst_hess, worst_hess_name.c_str());
    return r;
}

// Hierarchy construction on the sixteen-slot fixture graph, both orderings.
inline SuiteResult mas_fixture(bool verbose = false) {
    using namespace detail;
    SuiteResult r;
    const auto edges = sixteen_slot_graph_edges();
    const Index n = sixteen_slot_graph_size();

    const Partition conn = partition_block_graph(n, edges, 4);
    const MasHierarchy hc = build_hierarchy(conn, edges, 4);
    const Index top_conn = hc.levels.back().n_parts;
    check(r, hc.n_levels() == 2 && top_conn == 1, verbose,
          fmt("connectivity aggregation: levels=%d topSubdomains=%d", hc.n_levels(),
              static_cast<int>(top_conn)));

    const Partition mort = chunk_partition(n, 4);
    const MasHierarchy hm = build_hierarchy(mort, edges, 4);
    check(r, hm.n_levels() == 3, verbose,
          fmt("slot-order chunk aggregation: levels=%d topSubdomains=%d",
              hm.n_levels(), static_cast<int>(hm.levels.back().n_parts)));

    r.summary = fmt("levels=%d, topSubdomains=%d; slot-order chunks: levels=%d",
                    hc.n_levels(), static_cast<int>(top_conn), hm.n_levels());
    return r;
}

struct StretchStats {
    Real max_s = 0;
    Real mean_s = 0;
    bool converged = true;
};

// Run the hanging-cloth scene at one limiter stiffness and measure the
// largest principal stretch per triangle at the final state.
inline StretchStats measure_drape(const std::string& scene_path, Real limit_stiffness,
                                  int steps, const ExecPolicy& pol = {}) {
    Scene scene = load_scene(scene_path);
    if (scene.meshes.empty() || !scene.meshes[0].is_shell)
        throw SceneError("stretch study expects a shell scene: " + scene_path);
    scene.meshes[0].shell.strain_limit_stiffness = limit_stiffness;

    TimeStepper stepper(scene, PrecondKind::Cemas, pol);
    SystemState s = make_state(scene);
    StretchStats out;
    for (int k = 0; k < steps; ++k)
        out.converged = stepper.step(s).converged && out.converged;

    const auto& m = scene.meshes[0];
    const Index off = scene.mesh_offset[0];
    Real sum = 0;
    for (std::size_t e = 0; e < m.tris.size(); ++e) {
        const auto& t = m.tris[e];
        const Mat3x2 F =
            membrane_deformation(s.x[off + t[0]], s.x[off + t[1]], s.x[off + t[2]],
                                 m.tri_rest_data[e].inv_rest_edges);
        const Real smax = Eigen::JacobiSVD<Mat3x2>(F).singularValues()(0);
        out.max_s = std::max(out.max_s, smax);
        sum += smax;
    }
    out.mean_s = m.tris.empty() ? 0 : sum / static_cast<Real>(m.tris.size());
    return out;
}

// Principal stretch of the drape across three limiter stiffnesses: soft limit
// bounded and tight on average, stiff limit nearly inextensible, monotone in
// between.
inline SuiteResult stretch_study(const std::string& scene_path, bool verbose = false,
                                 int steps = 80, const ExecPolicy& pol = {}) {
    using namespace detail;
    SuiteResult r;
    const Real stiffness[3] = {5e6, 5e7, 5e8};
    StretchStats st[3];
    for (int i = 0; i < 3; ++i) {
        st[i] = measure_drape(scene_path, stiffness[i], steps, pol);
        check(r, st[i].converged, verbose,
              fmt("limit %.0e Pa: max stretch %.4f, mean %.4f%s", stiffness[i],
                  st[i].max_s, st[i].mean_s,
                  st[i].converged ? "" : " (solver did not converge)"));
    }
    check(r, st[0].max_s >= 1.0 && st[0].max_s <= 1.5 && st[0].mean_s <= 1.05,
          verbose,
          fmt("soft limit bounds: max in [1.0, 1.5] and mean <= 1.05 (got %.4f / %.4f)",
              st[0].max_s, st[0].mean_s));
    check(r, st[2].max_s <= 1.12, verbose,
          fmt("stiff limit bound: max <= 1.12 (got %.4f)", st[2].max_s));
    check(r, st[0].max_s >= st[1].max_s && st[1].max_s >= st[2].max_s, verbose,
          fmt("max stretch nonincreasing in stiffness: %.4f >= %.4f >= %.4f",
              st[0].max_s, st[1].max_s, st[2].max_s));

    r.summary = fmt("max/mean: 5MPa %.3f/%.3f, 50MPa %.3f/%.3f, 0.5GPa %.3f/%.3f",
                    st[0].max_s, st[0].mean_s, st[1].max_s, st[1].mean_s, st[2].max_s,
                    st[2].mean_s);
    return r;
}

} // namespace adipc::vsuite
