#pragma once

#include <chrono>
#include <utility>

#include "../contact/ccd.hpp"
#include "../precond/block_jacobi.hpp"
#include "../precond/hierarchy.hpp"
#include "incremental_potential.hpp"
#include "pcg.hpp"

namespace adipc {

enum class PrecondKind { Cemas, MasChunk, BlockJacobi };

struct StepStats {
    int newton_iters = 0;
    int cg_iters = 0;      // summed over the Newton solves of the step
    int pcg_max_iters = 0; // largest single solve
    bool converged = false;
    bool pcg_ok = true;      // every solve reached its relative tolerance
    bool ip_monotone = true; // energy strictly decreased at every accepted iterate
    double assembly_s = 0, pcg_s = 0, ccd_s = 0, line_search_s = 0;
    Real min_distance = 0;
    Real ip_initial = 0, ip_final = 0;
};

// Projected Newton over the incremental potential with a collision filtered
// backtracking line search. The level-zero preconditioner partition is fixed
// at construction; the merge hierarchy is rebuilt from the live sparsity at
// every Newton iteration.
class TimeStepper {
public:
    explicit TimeStepper(const Scene& scene, PrecondKind kind = PrecondKind::Cemas,
                         ExecPolicy pol = {})
        : scene_(&scene), kind_(kind), pol_(pol),
          surf_(build_contact_surface(scene)), dofs_(make_dof_map(scene)),
          ip_(scene, surf_, dofs_, pol_) {
        const auto& cfg = scene.config;
        fem_pinned_.assign(scene.n_fem_vertices, 0);
        for (std::size_t mi = 0; mi < scene.meshes.size(); ++mi)
            for (Index p : scene.meshes[mi].pinned)
                fem_pinned_[scene.mesh_offset[mi] + p] = 1;

        Real mass_sum = 0;
        Index mass_count = 0;
        for (const auto& m : scene.meshes)
            for (Real mv : m.vertex_mass) {
                mass_sum += mv;
                ++mass_count;
            }
        for (const auto& b : scene.bodies) {
            body_mass_llt_.emplace_back(b.reduced_mass);
            Real far = 0;
            for (const auto& r : b.rest) far = std::max(far, r.norm());
            max_xbar_.push_back(far);
            for (Real mv : b.vertex_mass) {
                mass_sum += mv;
                ++mass_count;
            }
        }
        kappa_init_ = initial_barrier_stiffness(mass_sum / mass_count, cfg.dt,
                                                scene.dhat(), cfg.barrier_scale);
        kappa_ = kappa_init_;

        l0_cemas_ = partition_block_graph(dofs_.n_blocks(), rest_edges(),
                                          cfg.subdomain);
        l0_chunk_ = chunk_partition(dofs_.n_blocks(), cfg.subdomain);
    }

    StepStats step(SystemState& s) {
        using clock = std::chrono::steady_clock;
        auto sec = [](clock::time_point a, clock::time_point b) {
            return std::chrono::duration<double>(b - a).count();
        };
        StepStats st;
        const auto& cfg = scene_->config;
        const Real dt = cfg.dt;
        const Real l = scene_->length_scale;
        const Real dhat = scene_->dhat();
        const Real tol = cfg.newton_tol_rel * l * dt;

        apply_scripts(*scene_, s);

        std::vector<Vec3> xt(s.x.size());
        for (Index i = 0; i < static_cast<Index>(s.x.size()); ++i)
            xt[i] = fem_pinned_[i]
                        ? s.x[i]
                        : Vec3(s.x[i] + dt * s.v[i] + dt * dt * cfg.gravity);
        std::vector<Vec12> qt(s.q.size());
        for (std::size_t b = 0; b < s.q.size(); ++b)
            qt[b] = scene_->bodies[b].pinned
                        ? s.q[b]
                        : Vec12(s.q[b] + dt * s.qd[b] +
                                dt * dt *
                                    body_mass_llt_[b].solve(
                                        scene_->bodies[b].gravity_force(
                                            cfg.gravity)));
        ip_.set_targets(std::move(xt), std::move(qt));
        ip_.set_contact(dhat, kappa_);

        const std::vector<Vec3> x_start = s.x;
        const std::vector<Vec12> q_start = s.q;
        if (cfg.friction_mu > 0) {
            std::vector<Vec3> pos0 = contact_node_positions(*scene_, s);
            std::vector<FrictionConstraint> constraints =
                build_friction_constraints(surf_, pos0, scene_->ground, dhat,
                                           kappa_);
            ip_.set_friction(std::move(constraints), std::move(pos0),
                             cfg.friction_mu,
                             cfg.static_friction_tol_rel * l * dt);
        } else {
            ip_.clear_friction();
        }

        Real energy = ip_.value(s);
        st.ip_initial = energy;
        SystemState trial = s;
        Real iter_min_dist = std::numeric_limits<Real>::max();

        for (int it = 0; it < cfg.max_newton; ++it) {
            const auto t0 = clock::now();
            ip_.assemble(s, grad_, hess_);
            const auto t1 = clock::now();
            st.assembly_s += sec(t0, t1);

            build_preconditioner(hess_);
            const VecX rhs = -grad_;
            const PcgResult pr = pcg_solve(hess_, rhs, *precond_, cfg.pcg_rel_tol,
                                           cfg.pcg_restart, cfg.max_pcg, pol_,
                                           dir_);
            const auto t2 = clock::now();
            st.pcg_s += sec(t1, t2);
            st.cg_iters += pr.iters;
            st.pcg_max_iters = std::max(st.pcg_max_iters, pr.iters);
            if (!pr.converged) st.pcg_ok = false;
            ++st.newton_iters;

            const Real step_size = step_inf_norm(dir_);
            if (step_size <= tol) {
                st.converged = true;
                break;
            }

            const auto t3 = clock::now();
            node_displacements(dir_);
            const std::vector<Vec3> pos = contact_node_positions(*scene_, s);
            Real alpha = scene_ccd_step(surf_, pos, node_disp_, scene_->ground,
                                        dhat, pol_);
            const auto t4 = clock::now();
            st.ccd_s += sec(t3, t4);

            bool accepted = false;
            Real trial_energy = energy;
            for (int ls = 0; ls < 64; ++ls) {
                apply_direction(s, alpha, trial);
                trial_energy = ip_.value(trial);
                if (trial_energy < energy) {
                    accepted = true;
                    break;
                }
                if (alpha * step_size < 1e-12 * l) break;
                alpha /= 2;
            }
            st.line_search_s += sec(t4, clock::now());
            if (!accepted) break; // no descent left at this resolution
            if (!(trial_energy < energy)) st.ip_monotone = false;

            s.x.swap(trial.x);
            s.q.swap(trial.q);
            energy = trial_energy;
            iter_min_dist = std::min(
                iter_min_dist,
                scene_min_distance(surf_, contact_node_positions(*scene_, s),
                                   scene_->ground, dhat));
        }
        st.ip_final = energy;

        for (std::size_t i = 0; i < s.x.size(); ++i)
            s.v[i] = (s.x[i] - x_start[i]) / dt;
        for (std::size_t b = 0; b < s.q.size(); ++b)
            s.qd[b] = (s.q[b] - q_start[b]) / dt;

        // reported distance is the minimum over every accepted iterate plus
        // the end state; the stiffness policy keys on the end state only, so
        // a transient dip the line search already resolved does not tighten
        // the barrier
        const Real end_dist = scene_min_distance(
            surf_, contact_node_positions(*scene_, s), scene_->ground, dhat);
        st.min_distance = std::min(iter_min_dist, end_dist);
        if (end_dist < dhat / 2 && kappa_ < 1e8 * kappa_init_) kappa_ *= 2;
        return st;
    }

    Real barrier_stiffness() const { return kappa_; }
    Real initial_stiffness() const { return kappa_init_; }
    const SortedSymBlockCoo& last_hessian() const { return hess_; }
    const DofMap& dofs() const { return dofs_; }
    const ContactSurface& surface() const { return surf_; }

private:
    // Connectivity of the rest configuration: element cliques for the meshes,
    // a four-slot clique per body. Fixes the level-zero subdomains.
    std::vector<std::pair<Index, Index>> rest_edges() const {
        std::vector<std::pair<Index, Index>> edges;
        auto clique = [&edges](const Index* ids, int n) {
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    edges.emplace_back(std::min(ids[a], ids[b]),
                                       std::max(ids[a], ids[b]));
        };
        for (std::size_t mi = 0; mi < scene_->meshes.size(); ++mi) {
            const auto& m = scene_->meshes[mi];
            const Index off = scene_->mesh_offset[mi];
            if (m.is_shell) {
                for (const auto& t : m.tris) {
                    const Index ids[3] = {t[0] + off, t[1] + off, t[2] + off};
                    clique(ids, 3);
                }
                for (const auto& h : m.hinges) {
                    const Index ids[4] = {h[0] + off, h[1] + off, h[2] + off,
                                          h[3] + off};
                    clique(ids, 4);
                }
            } else {
                for (const auto& t : m.tets) {
                    const Index ids[4] = {t[0] + off, t[1] + off, t[2] + off,
                                          t[3] + off};
                    clique(ids, 4);
                }
            }
        }
        for (std::size_t b = 0; b < scene_->bodies.size(); ++b) {
            const Index base = dofs_.body_block_base(static_cast<Index>(b));
            const Index ids[4] = {base, base + 1, base + 2, base + 3};
            clique(ids, 4);
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return edges;
    }

    void build_preconditioner(const SortedSymBlockCoo& A) {
        if (kind_ == PrecondKind::BlockJacobi) {
            jacobi_.build(A);
            precond_ = &jacobi_;
            return;
        }
        const Partition& l0 =
            kind_ == PrecondKind::Cemas ? l0_cemas_ : l0_chunk_;
        const MasHierarchy h =
            build_hierarchy(l0, block_edges(A), scene_->config.max_levels);
        mas_.build(A, h);
        precond_ = &mas_;
    }

    Real step_inf_norm(const VecX& d) const {
        Real worst = 0;
        for (Index i = 0; i < scene_->n_fem_vertices; ++i)
            worst = std::max(worst, d.segment<3>(3 * i).norm());
        for (std::size_t b = 0; b < scene_->bodies.size(); ++b) {
            const Index base = dofs_.body_block_base(static_cast<Index>(b));
            // |dp| + |dA|_F max|xbar| bounds the motion of any body vertex
            worst = std::max(worst, d.segment<3>(3 * base).norm() +
                                        d.segment<9>(3 * base + 3).norm() *
                                            max_xbar_[b]);
        }
        return worst;
    }

    // Per contact node displacement induced by the direction; exact for the
    // bodies because world positions are linear in q.
    void node_displacements(const VecX& d) {
        node_disp_.resize(dofs_.n_nodes());
        for (Index i = 0; i < dofs_.n_fem_nodes; ++i)
            node_disp_[i] = d.segment<3>(3 * i);
        for (Index n = dofs_.n_fem_nodes; n < dofs_.n_nodes(); ++n) {
            const Index base = dofs_.body_block_base(dofs_.body_of(n));
            node_disp_[n] = dofs_.jacobian(n) * d.segment<12>(3 * base);
        }
    }

    void apply_direction(const SystemState& s, Real alpha, SystemState& out) const {
        for (Index i = 0; i < static_cast<Index>(s.x.size()); ++i)
            out.x[i] = s.x[i] + alpha * dir_.segment<3>(3 * i);
        for (std::size_t b = 0; b < s.q.size(); ++b) {
            const Index base = dofs_.body_block_base(static_cast<Index>(b));
            out.q[b] = s.q[b] + alpha * dir_.segment<12>(3 * base);
        }
    }

    const Scene* scene_;
    PrecondKind kind_;
    ExecPolicy pol_;
    ContactSurface surf_;
    DofMap dofs_;
    IncrementalPotential ip_;

    std::vector<char> fem_pinned_;
    std::vector<Eigen::LLT<Mat12>> body_mass_llt_;
    std::vector<Real> max_xbar_;
    Real kappa_ = 0, kappa_init_ = 0;
    Partition l0_cemas_, l0_chunk_;

    MasPreconditioner mas_;
    BlockJacobiPreconditioner jacobi_;
    const Preconditioner* precond_ = nullptr;

    VecX grad_, dir_;
    SortedSymBlockCoo hess_;
    std::vector<Vec3> node_disp_;
};

} // namespace adipc
