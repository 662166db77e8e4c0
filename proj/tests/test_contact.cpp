#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <adipc/contact/ccd.hpp>
#include <adipc/contact/friction.hpp>

#include "test_util.hpp"

using namespace adipc;

namespace {

Vec3 rand_vec(std::mt19937& rng, Real lo = -1, Real hi = 1) {
    std::uniform_real_distribution<Real> u(lo, hi);
    return Vec3(u(rng), u(rng), u(rng));
}

VecX stack4(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    VecX x(12);
    x << a, b, c, d;
    return x;
}

Real pt_dist2_stacked(const VecX& x) {
    return pt_dist2(x.segment<3>(0), x.segment<3>(3), x.segment<3>(6),
                    x.segment<3>(9));
}

Real ee_dist2_stacked(const VecX& x) {
    return ee_dist2(x.segment<3>(0), x.segment<3>(3), x.segment<3>(6),
                    x.segment<3>(9));
}

} // namespace

TEST_CASE("point triangle classification picks the nearest feature") {
    const Vec3 t0(0, 0, 0), t1(1, 0, 0), t2(0, 1, 0);

    auto above = classify_pt(Vec3(0.25, 0.25, 0.7), t0, t1, t2);
    REQUIRE(above.region == PtRegion::Interior);
    REQUIRE(pt_dist2(Vec3(0.25, 0.25, 0.7), t0, t1, t2) == Catch::Approx(0.49));

    auto corner = classify_pt(Vec3(-1, -1, 0.5), t0, t1, t2);
    REQUIRE(corner.region == PtRegion::V0);
    REQUIRE(pt_dist2(Vec3(-1, -1, 0.5), t0, t1, t2) == Catch::Approx(2.25));

    auto edge = classify_pt(Vec3(0.5, -1, 0), t0, t1, t2);
    REQUIRE(edge.region == PtRegion::E01);
    REQUIRE(pt_dist2(Vec3(0.5, -1, 0), t0, t1, t2) == Catch::Approx(1.0));

    auto hyp = classify_pt(Vec3(1, 1, 0), t0, t1, t2);
    REQUIRE(hyp.region == PtRegion::E12);
    REQUIRE(pt_dist2(Vec3(1, 1, 0), t0, t1, t2) == Catch::Approx(0.5));

    // barycentric weights always reproduce the measured distance
    std::mt19937 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p = rand_vec(rng, -2, 2);
        const PtClass c = classify_pt(p, t0, t1, t2);
        REQUIRE(c.beta.sum() == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(c.beta.minCoeff() >= 0);
        // brute force over a fine barycentric sampling can do no better
        Real best = std::numeric_limits<Real>::max();
        for (int a = 0; a <= 40; ++a)
            for (int b = 0; a + b <= 40; ++b) {
                const Real u = a / 40.0, v = b / 40.0;
                const Vec3 q = (1 - u - v) * t0 + u * t1 + v * t2;
                best = std::min(best, (p - q).squaredNorm());
            }
        REQUIRE(pt_dist2(p, t0, t1, t2) <= best + 1e-12);
    }
}

TEST_CASE("edge edge classification covers crossing, endpoint and parallel cases") {
    const Vec3 a0(-1, 0, 0), a1(1, 0, 0);
    auto cross = classify_ee(a0, a1, Vec3(0, -1, 0.3), Vec3(0, 1, 0.3));
    REQUIRE(cross.region == EeRegion::Interior);
    REQUIRE(ee_dist2(a0, a1, Vec3(0, -1, 0.3), Vec3(0, 1, 0.3)) ==
            Catch::Approx(0.09));

    // disjoint collinear-ish segments meet at their facing endpoints
    auto ends = classify_ee(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1, 0),
                            Vec3(3, 1, 0));
    REQUIRE(ends.region == EeRegion::A1B0);
    REQUIRE(ee_dist2(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 1, 0), Vec3(3, 1, 0)) ==
            Catch::Approx(2.0));

    // exactly parallel overlapping segments fall back to a clamped feature
    auto par = classify_ee(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.2, 1, 0),
                           Vec3(1.2, 1, 0));
    REQUIRE(par.region != EeRegion::Interior);
    REQUIRE(ee_dist2(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.2, 1, 0),
                     Vec3(1.2, 1, 0)) == Catch::Approx(1.0));

    // random segment pairs: parameters beat a dense parameter sweep
    std::mt19937 rng(12);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p0 = rand_vec(rng), p1 = rand_vec(rng), q0 = rand_vec(rng),
                   q1 = rand_vec(rng);
        Real best = std::numeric_limits<Real>::max();
        for (int a = 0; a <= 40; ++a)
            for (int b = 0; b <= 40; ++b) {
                const Vec3 pa = p0 + (a / 40.0) * (p1 - p0);
                const Vec3 pb = q0 + (b / 40.0) * (q1 - q0);
                best = std::min(best, (pa - pb).squaredNorm());
            }
        REQUIRE(ee_dist2(p0, p1, q0, q1) <= best + 1e-12);
    }
}

TEST_CASE("squared distance derivatives match finite differences") {
    std::mt19937 rng(21);
    int checked_pt = 0, checked_ee = 0;
    while (checked_pt < 40 || checked_ee < 40) {
        const Vec3 a = rand_vec(rng, -1.5, 1.5), b = rand_vec(rng, -1.5, 1.5),
                   c = rand_vec(rng, -1.5, 1.5), d = rand_vec(rng, -1.5, 1.5);
        const VecX x = stack4(a, b, c, d);
        const Real h = 1e-5;

        // skip stencils whose active feature flips inside the fd probe box,
        // the piecewise definition is not differentiable exactly there
        auto region_stable_pt = [&] {
            const auto r0 = classify_pt(a, b, c, d).region;
            for (int k = 0; k < 12; ++k) {
                VecX xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                if (classify_pt(xp.segment<3>(0), xp.segment<3>(3), xp.segment<3>(6),
                                xp.segment<3>(9))
                            .region != r0 ||
                    classify_pt(xm.segment<3>(0), xm.segment<3>(3), xm.segment<3>(6),
                                xm.segment<3>(9))
                            .region != r0)
                    return false;
            }
            return true;
        };
        if (checked_pt < 40 && region_stable_pt() &&
            pt_dist2(a, b, c, d) > 1e-4) {
            const PairDerivs pd = pt_dist2_derivs(a, b, c, d);
            const VecX fd_g = testutil::fd_gradient(pt_dist2_stacked, x, h);
            REQUIRE(testutil::rel_err(VecX(pd.grad), fd_g) < 2e-6);
            const MatX fd_h = testutil::fd_jacobian(
                [&](const VecX& y) {
                    return VecX(pt_dist2_derivs(y.segment<3>(0), y.segment<3>(3),
                                                y.segment<3>(6), y.segment<3>(9))
                                    .grad);
                },
                x, h);
            REQUIRE(testutil::rel_err(MatX(pd.hess), fd_h) < 2e-5);
            REQUIRE((pd.hess - pd.hess.transpose()).norm() < 1e-10);
            ++checked_pt;
        }

        auto region_stable_ee = [&] {
            const auto r0 = classify_ee(a, b, c, d).region;
            for (int k = 0; k < 12; ++k) {
                VecX xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                if (classify_ee(xp.segment<3>(0), xp.segment<3>(3), xp.segment<3>(6),
                                xp.segment<3>(9))
                            .region != r0 ||
                    classify_ee(xm.segment<3>(0), xm.segment<3>(3), xm.segment<3>(6),
                                xm.segment<3>(9))
                            .region != r0)
                    return false;
            }
            return true;
        };
        if (checked_ee < 40 && region_stable_ee() &&
            ee_dist2(a, b, c, d) > 1e-4) {
            const PairDerivs ed = ee_dist2_derivs(a, b, c, d);
            const VecX fd_g = testutil::fd_gradient(ee_dist2_stacked, x, h);
            REQUIRE(testutil::rel_err(VecX(ed.grad), fd_g) < 2e-6);
            const MatX fd_h = testutil::fd_jacobian(
                [&](const VecX& y) {
                    return VecX(ee_dist2_derivs(y.segment<3>(0), y.segment<3>(3),
                                                y.segment<3>(6), y.segment<3>(9))
                                    .grad);
                },
                x, h);
            REQUIRE(testutil::rel_err(MatX(ed.hess), fd_h) < 2e-5);
            ++checked_ee;
        }
    }
}

TEST_CASE("contact frames are translation invariant witnesses") {
    std::mt19937 rng(31);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a = rand_vec(rng), b = rand_vec(rng), c = rand_vec(rng),
                   d = rand_vec(rng);
        const ContactFrame fp = pt_contact_frame(a, b, c, d);
        REQUIRE(fp.coeff.sum() == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(fp.dist * fp.dist == Catch::Approx(pt_dist2(a, b, c, d)));
        REQUIRE(fp.normal.norm() == Catch::Approx(1.0));
        const ContactFrame fe = ee_contact_frame(a, b, c, d);
        REQUIRE(fe.coeff.sum() == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(fe.dist * fe.dist == Catch::Approx(ee_dist2(a, b, c, d)));
    }
}

TEST_CASE("barrier activates below dhat and matches finite differences") {
    const Real dhat = 0.1, shat = dhat * dhat, kappa = 3.0;
    REQUIRE(barrier_value(shat, shat, kappa) == 0.0);
    REQUIRE(barrier_value(2 * shat, shat, kappa) == 0.0);
    REQUIRE(barrier_d1(1.5 * shat, shat, kappa) == 0.0);
    REQUIRE(barrier_value(0.5 * shat, shat, kappa) > 0.0);
    REQUIRE(barrier_value(1e-6 * shat, shat, kappa) >
            barrier_value(1e-3 * shat, shat, kappa));
    // smooth landing: value and slope vanish together as s -> shat
    REQUIRE(std::abs(barrier_d1(0.999999 * shat, shat, kappa)) < 1e-4 * kappa);

    for (Real f : {0.9, 0.5, 0.1, 0.01}) {
        const Real s = f * shat, h = 1e-7 * shat;
        const Real fd1 = (barrier_value(s + h, shat, kappa) -
                          barrier_value(s - h, shat, kappa)) /
                         (2 * h);
        REQUIRE(barrier_d1(s, shat, kappa) == Catch::Approx(fd1).epsilon(1e-5));
        const Real fd2 =
            (barrier_d1(s + h, shat, kappa) - barrier_d1(s - h, shat, kappa)) /
            (2 * h);
        REQUIRE(barrier_d2(s, shat, kappa) == Catch::Approx(fd2).epsilon(1e-5));
    }

    // stiffness heuristic scales like mass / dt^2
    const Real k0 = initial_barrier_stiffness(1.0, 0.01, dhat, 1.0);
    REQUIRE(k0 > 0);
    REQUIRE(initial_barrier_stiffness(2.0, 0.01, dhat, 1.0) ==
            Catch::Approx(2 * k0));
    REQUIRE(initial_barrier_stiffness(1.0, 0.005, dhat, 1.0) ==
            Catch::Approx(4 * k0));
    REQUIRE(initial_barrier_stiffness(1.0, 0.01, dhat, 10.0) ==
            Catch::Approx(10 * k0));
}

TEST_CASE("stencil barrier derivatives are consistent and projected psd") {
    const Real dhat = 0.5, shat = dhat * dhat, kappa = 7.0;
    const Vec3 t0(0, 0, 0), t1(1, 0, 0), t2(0, 1, 0), p(0.3, 0.3, 0.2);
    const VecX x = stack4(p, t0, t1, t2);

    auto energy = [&](const VecX& y) {
        return barrier_value(pt_dist2_stacked(y), shat, kappa);
    };
    const BarrierDerivs bd =
        barrier_pair_derivs(pt_dist2_derivs(p, t0, t1, t2), shat, kappa, false);
    REQUIRE(bd.value == Catch::Approx(energy(x)));
    const VecX fd_g = testutil::fd_gradient(energy, x, 1e-6);
    REQUIRE(testutil::rel_err(VecX(bd.grad), fd_g) < 1e-4);

    const BarrierDerivs proj =
        barrier_pair_derivs(pt_dist2_derivs(p, t0, t1, t2), shat, kappa, true);
    Eigen::SelfAdjointEigenSolver<Mat12> eig(proj.hess);
    REQUIRE(eig.eigenvalues().minCoeff() > -1e-8 * eig.eigenvalues().cwiseAbs().maxCoeff());

    // beyond the activation distance everything is identically zero
    const BarrierDerivs off = barrier_pair_derivs(
        pt_dist2_derivs(Vec3(0.3, 0.3, 0.9), t0, t1, t2), shat, kappa, true);
    REQUIRE(off.value == 0.0);
    REQUIRE(off.grad.norm() == 0.0);
    REQUIRE(off.hess.norm() == 0.0);
}

TEST_CASE("ground barrier is the one dimensional specialization") {
    const Real dhat = 0.2, kappa = 5.0;
    const Vec3 n = Vec3(0, 1, 0);
    const Real height = 0.5;
    const Vec3 x(2, 0.58, -1); // d = 0.08
    const GroundDerivs g = ground_barrier_derivs(x, n, height, dhat, kappa, false);
    REQUIRE(g.dist == Catch::Approx(0.08));
    REQUIRE(g.value ==
            Catch::Approx(barrier_value(0.08 * 0.08, dhat * dhat, kappa)));

    auto energy = [&](const VecX& y) {
        const Real d = n.dot(Vec3(y[0], y[1], y[2])) - height;
        return barrier_value(d * d, dhat * dhat, kappa);
    };
    VecX xv(3);
    xv << x;
    const VecX fd_g = testutil::fd_gradient(energy, xv, 1e-7);
    REQUIRE(testutil::rel_err(VecX(g.grad), fd_g) < 1e-5);

    const GroundDerivs proj = ground_barrier_derivs(x, n, height, dhat, kappa, true);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(proj.hess);
    REQUIRE(eig.eigenvalues().minCoeff() >= 0);

    REQUIRE(ground_barrier_derivs(Vec3(0, 0.9, 0), n, height, dhat, kappa).value ==
            0.0);
}

TEST_CASE("conservative advancement stops short of a head on impact") {
    // gap g, relative step 2g: the pair would touch halfway through the step
    const Real g = 0.3;
    const Vec3 t0(-5, 0, -5), t1(5, 0, -5), t2(0, 0, 5);
    const Real alpha = pt_ccd_toi(Vec3(0.1, g, 0.2), t0, t1, t2, Vec3(0, -2 * g, 0),
                                  Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
    REQUIRE(alpha > 0.4);
    REQUIRE(alpha <= 0.5);

    // receding pair is free
    REQUIRE(pt_ccd_toi(Vec3(0.1, g, 0.2), t0, t1, t2, Vec3(0, 2 * g, 0),
                       Vec3::Zero(), Vec3::Zero(), Vec3::Zero()) == 1.0);

    // pure common translation is free no matter how large
    const Vec3 big(100, 100, 100);
    REQUIRE(pt_ccd_toi(Vec3(0.1, g, 0.2), t0, t1, t2, big, big, big, big) == 1.0);

    const Real ag = ground_ccd_toi(Vec3(0, g, 0), Vec3(0, -2 * g, 0),
                                   Vec3::UnitY(), 0.0);
    REQUIRE(ag > 0.4);
    REQUIRE(ag <= 0.5);
    REQUIRE(ground_ccd_toi(Vec3(0, g, 0), Vec3(0, 1, 0), Vec3::UnitY(), 0.0) == 1.0);
}

TEST_CASE("conservative advancement never tunnels on random trajectories") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        std::array<Vec3, 4> x, d;
        for (auto& v : x) v = rand_vec(rng, -1, 1);
        for (auto& v : d) v = rand_vec(rng, -1.5, 1.5);
        const bool ee = trial % 2;
        auto dist_at = [&](Real t) {
            std::array<Vec3, 4> c;
            for (int i = 0; i < 4; ++i) c[i] = x[i] + t * d[i];
            return ee ? ee_dist2(c[0], c[1], c[2], c[3])
                      : pt_dist2(c[0], c[1], c[2], c[3]);
        };
        if (dist_at(0) < 1e-8) continue;
        const Real alpha =
            ee ? ee_ccd_toi(x[0], x[1], x[2], x[3], d[0], d[1], d[2], d[3])
               : pt_ccd_toi(x[0], x[1], x[2], x[3], d[0], d[1], d[2], d[3]);
        REQUIRE(alpha > 0);
        REQUIRE(alpha <= 1.0);
        for (int k = 0; k <= 64; ++k)
            REQUIRE(dist_at(alpha * k / 64.0) > 0);
    }
}

TEST_CASE("broad phase equals brute force with the same inflation") {
    // two interleaved cloth patches plus noise
    std::mt19937 rng(51);
    Scene scene;
    for (int layer = 0; layer < 2; ++layer) {
        DeformableMesh m;
        m.name = "layer" + std::to_string(layer);
        m.is_shell = true;
        TriMeshData g = make_grid(6, 6, 1, 1);
        translate(g.verts, Vec3(0.3 * layer, 0.05 * layer, 0.2 * layer));
        m.rest = g.verts;
        m.tris = g.tris;
        scene.meshes.push_back(m);
    }
    scene.finalize();
    const ContactSurface surf = build_contact_surface(scene);
    SystemState st = make_state(scene);
    for (auto& p : st.x) p += 0.02 * rand_vec(rng);
    const std::vector<Vec3> pos = contact_node_positions(scene, st);

    const Real inflate = 0.11;
    const ContactCandidates cand = proximity_candidates(surf, pos, inflate);

    auto aabb_of = [&](std::initializer_list<Index> nodes) {
        Aabb b;
        for (Index n : nodes) b.grow(pos[n]);
        b.inflate(inflate / 2);
        return b;
    };
    std::vector<std::array<Index, 2>> brute_pt, brute_ee;
    for (Index vi = 0; vi < static_cast<Index>(surf.verts.size()); ++vi)
        for (Index ti = 0; ti < static_cast<Index>(surf.tris.size()); ++ti) {
            const Index v = surf.verts[vi];
            const auto& t = surf.tris[ti];
            if (v == t[0] || v == t[1] || v == t[2]) continue;
            if (aabb_of({v}).overlaps(aabb_of({t[0], t[1], t[2]})))
                brute_pt.push_back({vi, ti});
        }
    for (Index i = 0; i < static_cast<Index>(surf.edges.size()); ++i)
        for (Index j = i + 1; j < static_cast<Index>(surf.edges.size()); ++j) {
            const auto &a = surf.edges[i], &b = surf.edges[j];
            if (a[0] == b[0] || a[0] == b[1] || a[1] == b[0] || a[1] == b[1])
                continue;
            if (aabb_of({a[0], a[1]}).overlaps(aabb_of({b[0], b[1]})))
                brute_ee.push_back({i, j});
        }
    REQUIRE(cand.pt == brute_pt);
    REQUIRE(cand.ee == brute_ee);
    REQUIRE(!cand.pt.empty());
    REQUIRE(!cand.ee.empty());

    // every truly close pair is found
    for (Index vi = 0; vi < static_cast<Index>(surf.verts.size()); ++vi)
        for (Index ti = 0; ti < static_cast<Index>(surf.tris.size()); ++ti) {
            const Index v = surf.verts[vi];
            const auto& t = surf.tris[ti];
            if (v == t[0] || v == t[1] || v == t[2]) continue;
            if (pt_dist2(pos[v], pos[t[0]], pos[t[1]], pos[t[2]]) <
                inflate * inflate)
                REQUIRE(std::binary_search(cand.pt.begin(), cand.pt.end(),
                                           std::array<Index, 2>{vi, ti}));
        }

    // swept variant catches pairs that only approach mid step
    std::vector<Vec3> disp(pos.size(), Vec3::Zero());
    const ContactCandidates still = ccd_candidates(surf, pos, disp, inflate);
    REQUIRE(still.pt == cand.pt);
    REQUIRE(still.ee == cand.ee);
}

TEST_CASE("friction smoothing is c2 and flat at the origin") {
    const Real eps = 0.05;
    REQUIRE(friction_f0(eps, eps) == Catch::Approx(eps));
    REQUIRE(friction_f0(2 * eps, eps) == 2 * eps);
    REQUIRE(friction_f1(eps, eps) == Catch::Approx(1.0));
    REQUIRE(friction_f2(eps, eps) == Catch::Approx(0.0));
    REQUIRE(friction_f1(0, eps) == 0.0);
    REQUIRE(friction_f1_over_y(0, eps) == Catch::Approx(2 / eps));
    for (Real y : {0.1 * eps, 0.6 * eps, 0.99 * eps, 1.7 * eps}) {
        const Real h = 1e-7 * eps;
        const Real fd1 = (friction_f0(y + h, eps) - friction_f0(y - h, eps)) / (2 * h);
        REQUIRE(friction_f1(y, eps) == Catch::Approx(fd1).epsilon(1e-5));
        const Real fd2 = (friction_f1(y + h, eps) - friction_f1(y - h, eps)) / (2 * h);
        REQUIRE(friction_f2(y, eps) == Catch::Approx(fd2).epsilon(1e-4));
    }
}

TEST_CASE("friction derivatives resist sliding and match finite differences") {
    const Real eps = 0.01, mu = 0.4;
    FrictionConstraint c;
    c.nodes = {0, 1, 2, 3};
    c.n_nodes = 4;
    c.coeff = Vec4(1, -0.2, -0.3, -0.5);
    tangent_basis(Vec3::UnitY(), c.t1, c.t2);
    c.lambda = 2.5;

    std::mt19937 rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        std::array<Vec3, 4> dx;
        for (auto& v : dx) v = 0.03 * rand_vec(rng);
        const FrictionDerivs fd = friction_derivs(c, dx, mu, eps);

        auto energy = [&](const VecX& y) {
            std::array<Vec3, 4> z;
            for (int k = 0; k < 4; ++k) z[k] = y.segment<3>(3 * k);
            return friction_derivs(c, z, mu, eps).value;
        };
        const VecX x0 = stack4(dx[0], dx[1], dx[2], dx[3]);
        const VecX fd_g = testutil::fd_gradient(energy, x0, 1e-7);
        REQUIRE(testutil::rel_err(VecX(fd.grad), fd_g) < 1e-4);

        const MatX fd_h = testutil::fd_jacobian(
            [&](const VecX& y) {
                std::array<Vec3, 4> z;
                for (int k = 0; k < 4; ++k) z[k] = y.segment<3>(3 * k);
                return VecX(friction_derivs(c, z, mu, eps).grad);
            },
            x0, 1e-6);
        REQUIRE(testutil::rel_err(MatX(fd.hess), fd_h) < 1e-4);

        Eigen::SelfAdjointEigenSolver<Mat12> eig(fd.hess);
        REQUIRE(eig.eigenvalues().minCoeff() > -1e-10);
    }

    // the friction force opposes the sliding direction once outside eps
    std::array<Vec3, 4> slide = {Vec3(0.1, 0, 0), Vec3::Zero(), Vec3::Zero(),
                                 Vec3::Zero()};
    const FrictionDerivs fd = friction_derivs(c, slide, mu, eps);
    REQUIRE(fd.value == Catch::Approx(mu * c.lambda * 0.1));
    const Vec3 force = -fd.grad.head<3>();
    REQUIRE(force.x() < 0);
    REQUIRE(force.norm() == Catch::Approx(mu * c.lambda));

    // at zero displacement the energy is stationary with positive curvature
    std::array<Vec3, 4> zero = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                Vec3::Zero()};
    const FrictionDerivs f0 = friction_derivs(c, zero, mu, eps);
    REQUIRE(f0.grad.norm() == 0.0);
    REQUIRE(f0.hess.trace() > 0);
}

TEST_CASE("friction constraints freeze the touching set with positive pressure") {
    Scene scene;
    DeformableMesh m;
    m.name = "pad";
    m.is_shell = true;
    TriMeshData g = make_grid(3, 3, 0.4, 0.4);
    m.rest = g.verts;
    m.tris = g.tris;
    scene.meshes.push_back(m);
    scene.ground.enabled = true;
    scene.ground.height = 0;
    scene.finalize();

    // rotate the pad into the xz plane a hair above the ground
    SystemState s = make_state(scene);
    for (auto& p : s.x) p = Vec3(p.x(), 0.004, p.y());

    const ContactSurface surf = build_contact_surface(scene);
    const std::vector<Vec3> pos = contact_node_positions(scene, s);
    const Real dhat = 0.01, kappa = 100;
    const auto cons = build_friction_constraints(surf, pos, scene.ground, dhat, kappa);
    REQUIRE(cons.size() == 9); // every pad vertex touches the ground
    for (const auto& c : cons) {
        REQUIRE(c.n_nodes == 1);
        REQUIRE(c.lambda > 0);
        REQUIRE(std::abs(c.t1.dot(Vec3::UnitY())) < 1e-12);
        REQUIRE(std::abs(c.t2.dot(Vec3::UnitY())) < 1e-12);
        REQUIRE(std::abs(c.t1.dot(c.t2)) < 1e-12);
    }
}
