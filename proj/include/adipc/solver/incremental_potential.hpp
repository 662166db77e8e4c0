#pragma once

#include <limits>
#include <vector>

#include "../contact/barrier.hpp"
#include "../contact/friction.hpp"
#include "../energy/abd_energy.hpp"
#include "../scene/scene.hpp"
#include "../sparse/abd_reduce.hpp"

namespace adipc {

// Objective of one implicit Euler step,
//   1/2 |x - xtilde|_M^2 + dt^2 (elastic + orthogonality + barrier + friction),
// over the block-slot dof space: one 3x3 slot per deformable vertex, then four
// slots per affine body. Pinned dofs keep an identity diagonal and a zero
// gradient so the solve leaves them untouched.
class IncrementalPotential {
public:
    IncrementalPotential(const Scene& scene, const ContactSurface& surf,
                         const DofMap& dofs, const ExecPolicy& pol)
        : scene_(&scene), surf_(&surf), dofs_(&dofs), pol_(pol) {
        slot_pinned_.assign(dofs.n_blocks(), 0);
        for (std::size_t mi = 0; mi < scene.meshes.size(); ++mi)
            for (Index p : scene.meshes[mi].pinned)
                slot_pinned_[scene.mesh_offset[mi] + p] = 1;
        for (std::size_t b = 0; b < scene.bodies.size(); ++b)
            if (scene.bodies[b].pinned)
                for (Index k = 0; k < 4; ++k)
                    slot_pinned_[dofs.body_block_base(static_cast<Index>(b)) + k] = 1;
    }

    void set_targets(std::vector<Vec3> x_tilde, std::vector<Vec12> q_tilde) {
        x_tilde_ = std::move(x_tilde);
        q_tilde_ = std::move(q_tilde);
    }

    void set_contact(Real dhat, Real kappa) {
        dhat_ = dhat;
        kappa_ = kappa;
    }

    // base holds the contact-node positions at the step start; eps is the
    // displacement below which friction smooths to static.
    void set_friction(std::vector<FrictionConstraint> constraints,
                      std::vector<Vec3> base, Real mu, Real eps) {
        friction_ = std::move(constraints);
        fr_base_ = std::move(base);
        mu_ = mu;
        fr_eps_ = eps;
    }

    void clear_friction() {
        friction_.clear();
        mu_ = 0;
    }

    const std::vector<char>& slot_pinned() const { return slot_pinned_; }

    Real value(const SystemState& s) const {
        const Scene& sc = *scene_;
        const Real dt2 = sc.config.dt * sc.config.dt;
        Real val = 0;

        for (std::size_t mi = 0; mi < sc.meshes.size(); ++mi) {
            const auto& m = sc.meshes[mi];
            const Index off = sc.mesh_offset[mi];
            for (Index v = 0; v < m.n_verts(); ++v)
                val += 0.5 * m.vertex_mass[v] *
                       (s.x[off + v] - x_tilde_[off + v]).squaredNorm();
        }
        for (std::size_t b = 0; b < sc.bodies.size(); ++b) {
            const Vec12 dq = s.q[b] - q_tilde_[b];
            val += 0.5 * dq.dot(sc.bodies[b].reduced_mass * dq);
        }

        for (std::size_t mi = 0; mi < sc.meshes.size(); ++mi) {
            const auto& m = sc.meshes[mi];
            const Index off = sc.mesh_offset[mi];
            if (m.is_shell) {
                const Real a_t_scale = m.shell.thickness;
                for (std::size_t t = 0; t < m.tris.size(); ++t) {
                    const auto& tr = m.tris[t];
                    const Mat3x2 F = membrane_deformation(
                        s.x[off + tr[0]], s.x[off + tr[1]], s.x[off + tr[2]],
                        m.tri_rest_data[t].inv_rest_edges);
                    const Real a_t = m.tri_rest_data[t].area * a_t_scale;
                    val += dt2 * fbw_membrane(F, m.shell.stretch_stiffness, a_t,
                                              false)
                                     .value;
                    val += dt2 * cubic_strain_limit(
                                     F, m.shell.strain_limit_stiffness, a_t)
                                     .value;
                    val += dt2 * shear_energy(F,
                                              m.shell.shear_fraction *
                                                  m.shell.stretch_stiffness,
                                              a_t, false)
                                     .value;
                }
                for (std::size_t h = 0; h < m.hinges.size(); ++h) {
                    const auto& hg = m.hinges[h];
                    const Real th =
                        dihedral_angle(s.x[off + hg[0]], s.x[off + hg[1]],
                                       s.x[off + hg[2]], s.x[off + hg[3]]);
                    const Real d = th - m.hinge_rest_data[h].rest_angle;
                    val += dt2 * m.shell.bending_stiffness *
                           m.hinge_rest_data[h].weight * d * d;
                }
            } else {
                for (std::size_t t = 0; t < m.tets.size(); ++t) {
                    const auto& te = m.tets[t];
                    val += dt2 * stable_neo_hookean(
                                     s.x[off + te[0]], s.x[off + te[1]],
                                     s.x[off + te[2]], s.x[off + te[3]],
                                     m.tet_rest_data[t], m.solid.mu(),
                                     m.solid.lambda(), false)
                                     .value;
                }
            }
        }
        for (std::size_t b = 0; b < sc.bodies.size(); ++b)
            val += dt2 * abd_orthogonality(s.q[b], sc.bodies[b].mat.kappa,
                                           sc.bodies[b].volume, false)
                             .value;

        const std::vector<Vec3> pos = contact_node_positions(sc, s);
        const Real shat = dhat_ * dhat_;
        const ContactCandidates cand = proximity_candidates(*surf_, pos, dhat_);
        for (const auto& c : cand.pt) {
            const Index v = surf_->verts[c[0]];
            const auto& t = surf_->tris[c[1]];
            const Real d2 = pt_dist2(pos[v], pos[t[0]], pos[t[1]], pos[t[2]]);
            if (d2 <= 0) return std::numeric_limits<Real>::infinity();
            if (d2 < shat) val += dt2 * barrier_value(d2, shat, kappa_);
        }
        for (const auto& c : cand.ee) {
            const auto& ea = surf_->edges[c[0]];
            const auto& eb = surf_->edges[c[1]];
            const Real d2 = ee_dist2(pos[ea[0]], pos[ea[1]], pos[eb[0]], pos[eb[1]]);
            if (d2 <= 0) return std::numeric_limits<Real>::infinity();
            if (d2 < shat) val += dt2 * barrier_value(d2, shat, kappa_);
        }
        if (sc.ground.enabled)
            for (Index v : surf_->verts) {
                const Real d = sc.ground.normal.dot(pos[v]) - sc.ground.height;
                if (d <= 0) return std::numeric_limits<Real>::infinity();
                if (d < dhat_) val += dt2 * barrier_value(d * d, shat, kappa_);
            }

        for (const auto& c : friction_) {
            Vec3 w = Vec3::Zero();
            for (int k = 0; k < c.n_nodes; ++k)
                w += c.coeff[k] * (pos[c.nodes[k]] - fr_base_[c.nodes[k]]);
            const Real y = Vec2(c.t1.dot(w), c.t2.dot(w)).norm();
            val += dt2 * mu_ * c.lambda * friction_f0(y, fr_eps_);
        }
        return val;
    }

    // Builds the gradient and the reduced block Hessian; returns the value.
    Real assemble(const SystemState& s, VecX& grad, SortedSymBlockCoo& hess) {
        const Scene& sc = *scene_;
        const Real dt2 = sc.config.dt * sc.config.dt;
        const Index n_blocks = dofs_->n_blocks();
        grad = VecX::Zero(3 * n_blocks);
        stream_.clear();
        Real val = 0;

        for (std::size_t mi = 0; mi < sc.meshes.size(); ++mi) {
            const auto& m = sc.meshes[mi];
            const Index off = sc.mesh_offset[mi];
            for (Index v = 0; v < m.n_verts(); ++v) {
                const Vec3 dx = s.x[off + v] - x_tilde_[off + v];
                const Real mass = m.vertex_mass[v];
                val += 0.5 * mass * dx.squaredNorm();
                grad.segment<3>(3 * (off + v)) += mass * dx;
                stream_.emit(off + v, off + v, mass * Mat3::Identity());
            }
        }
        for (std::size_t b = 0; b < sc.bodies.size(); ++b) {
            const Index base = dofs_->body_block_base(static_cast<Index>(b));
            const Vec12 dq = s.q[b] - q_tilde_[b];
            const Vec12 g = sc.bodies[b].reduced_mass * dq;
            val += 0.5 * dq.dot(g);
            grad.segment<12>(3 * base) += g;
            split_sym_12x12(base, sc.bodies[b].reduced_mass, stream_);
        }

        for (std::size_t mi = 0; mi < sc.meshes.size(); ++mi) {
            const auto& m = sc.meshes[mi];
            const Index off = sc.mesh_offset[mi];
            if (m.is_shell) {
                tri_scratch_.resize(m.tris.size());
                parallel_for(static_cast<std::int64_t>(m.tris.size()), pol_,
                             [&](std::int64_t t) {
                                 tri_scratch_[t] = membrane_stencil(m, s, off, t);
                             });
                for (std::size_t t = 0; t < m.tris.size(); ++t) {
                    const auto& tr = m.tris[t];
                    val += dt2 * tri_scratch_[t].value;
                    scatter9({off + tr[0], off + tr[1], off + tr[2]},
                             tri_scratch_[t], dt2, grad);
                }
                hinge_scratch_.resize(m.hinges.size());
                parallel_for(static_cast<std::int64_t>(m.hinges.size()), pol_,
                             [&](std::int64_t h) {
                                 const auto& hg = m.hinges[h];
                                 hinge_scratch_[h] = hinge_bending(
                                     s.x[off + hg[0]], s.x[off + hg[1]],
                                     s.x[off + hg[2]], s.x[off + hg[3]],
                                     m.hinge_rest_data[h],
                                     m.shell.bending_stiffness);
                             });
                for (std::size_t h = 0; h < m.hinges.size(); ++h) {
                    const auto& hg = m.hinges[h];
                    val += dt2 * hinge_scratch_[h].value;
                    scatter12({off + hg[0], off + hg[1], off + hg[2], off + hg[3]},
                              4, hinge_scratch_[h].grad, hinge_scratch_[h].hess,
                              dt2, grad, stream_);
                }
            } else {
                tet_scratch_.resize(m.tets.size());
                parallel_for(static_cast<std::int64_t>(m.tets.size()), pol_,
                             [&](std::int64_t t) {
                                 const auto& te = m.tets[t];
                                 tet_scratch_[t] = stable_neo_hookean(
                                     s.x[off + te[0]], s.x[off + te[1]],
                                     s.x[off + te[2]], s.x[off + te[3]],
                                     m.tet_rest_data[t], m.solid.mu(),
                                     m.solid.lambda());
                             });
                for (std::size_t t = 0; t < m.tets.size(); ++t) {
                    const auto& te = m.tets[t];
                    val += dt2 * tet_scratch_[t].value;
                    scatter12({off + te[0], off + te[1], off + te[2], off + te[3]},
                              4, tet_scratch_[t].grad, tet_scratch_[t].hess, dt2,
                              grad, stream_);
                }
            }
        }
        for (std::size_t b = 0; b < sc.bodies.size(); ++b) {
            const Stencil12 st = abd_orthogonality(
                s.q[b], sc.bodies[b].mat.kappa, sc.bodies[b].volume);
            const Index base = dofs_->body_block_base(static_cast<Index>(b));
            val += dt2 * st.value;
            grad.segment<12>(3 * base) += dt2 * st.grad;
            split_sym_12x12(base, Mat12(dt2 * st.hess), stream_);
        }

        val += assemble_contact(s, dt2, grad);

        for (Index slot = 0; slot < n_blocks; ++slot)
            if (slot_pinned_[slot]) grad.segment<3>(3 * slot).setZero();
        filter_pinned();
        sort_stream(stream_, pol_);
        hess = fast_hash_reduction(stream_, n_blocks, pol_);
        return val;
    }

private:
    struct Stencil9 {
        Real value = 0;
        Vec9 grad = Vec9::Zero();
        Mat9 hess = Mat9::Zero();
    };
    struct PairScratch {
        BarrierDerivs bd;
        std::array<Index, 4> nodes;
        Real dist2 = 0;
    };

    Stencil9 membrane_stencil(const DeformableMesh& m, const SystemState& s,
                              Index off, std::size_t t) const {
        const auto& tr = m.tris[t];
        const auto& rest = m.tri_rest_data[t];
        const Mat3x2 F =
            membrane_deformation(s.x[off + tr[0]], s.x[off + tr[1]],
                                 s.x[off + tr[2]], rest.inv_rest_edges);
        const Real a_t = rest.area * m.shell.thickness;
        MembraneDerivs d = fbw_membrane(F, m.shell.stretch_stiffness, a_t);
        const MembraneDerivs lim =
            cubic_strain_limit(F, m.shell.strain_limit_stiffness, a_t);
        const MembraneDerivs sh = shear_energy(
            F, m.shell.shear_fraction * m.shell.stretch_stiffness, a_t);
        d.value += lim.value + sh.value;
        d.dF += lim.dF + sh.dF;
        d.hess += lim.hess + sh.hess;

        const Eigen::Matrix<Real, 6, 9> J = membrane_dFdx(rest.inv_rest_edges);
        Vec6 g6;
        g6 << d.dF.col(0), d.dF.col(1);
        Stencil9 out;
        out.value = d.value;
        out.grad = J.transpose() * g6;
        out.hess = J.transpose() * d.hess * J;
        return out;
    }

    void scatter9(const std::array<Index, 3>& slots, const Stencil9& st,
                  Real scale, VecX& grad) {
        for (int a = 0; a < 3; ++a)
            grad.segment<3>(3 * slots[a]) += scale * st.grad.segment<3>(3 * a);
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                stream_.emit(slots[a], slots[b],
                             scale * st.hess.block<3, 3>(3 * a, 3 * b));
    }

    static void scatter12(const std::array<Index, 4>& ids, int n, const Vec12& g,
                          const Mat12& h, Real scale, VecX& grad,
                          BlockTripletStream& out) {
        for (int a = 0; a < n; ++a)
            grad.segment<3>(3 * ids[a]) += scale * g.segment<3>(3 * a);
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b)
                out.emit(ids[a], ids[b], scale * h.block<3, 3>(3 * a, 3 * b));
    }

    // Barrier, ground and friction terms live in contact-node space; their
    // blocks go through the body jacobians before joining the dof stream.
    Real assemble_contact(const SystemState& s, Real dt2, VecX& grad) {
        const Scene& sc = *scene_;
        Real val = 0;
        const std::vector<Vec3> pos = contact_node_positions(sc, s);
        const Real shat = dhat_ * dhat_;
        node_grad_.assign(dofs_->n_nodes(), Vec3::Zero());
        node_stream_.clear();

        const ContactCandidates cand = proximity_candidates(*surf_, pos, dhat_);
        pair_scratch_.resize(cand.pt.size() + cand.ee.size());
        parallel_for(static_cast<std::int64_t>(cand.pt.size()), pol_,
                     [&](std::int64_t i) {
                         const Index v = surf_->verts[cand.pt[i][0]];
                         const auto& t = surf_->tris[cand.pt[i][1]];
                         const PairDerivs pd = pt_dist2_derivs(
                             pos[v], pos[t[0]], pos[t[1]], pos[t[2]]);
                         pair_scratch_[i] = {
                             barrier_pair_derivs(pd, shat, kappa_),
                             {v, t[0], t[1], t[2]},
                             pd.dist2};
                     });
        const std::size_t ee_base = cand.pt.size();
        parallel_for(static_cast<std::int64_t>(cand.ee.size()), pol_,
                     [&](std::int64_t i) {
                         const auto& ea = surf_->edges[cand.ee[i][0]];
                         const auto& eb = surf_->edges[cand.ee[i][1]];
                         const PairDerivs pd = ee_dist2_derivs(
                             pos[ea[0]], pos[ea[1]], pos[eb[0]], pos[eb[1]]);
                         pair_scratch_[ee_base + i] = {
                             barrier_pair_derivs(pd, shat, kappa_),
                             {ea[0], ea[1], eb[0], eb[1]},
                             pd.dist2};
                     });
        for (const auto& p : pair_scratch_) {
            if (p.dist2 >= shat) continue;
            val += dt2 * p.bd.value;
            for (int a = 0; a < 4; ++a)
                node_grad_[p.nodes[a]] += dt2 * p.bd.grad.segment<3>(3 * a);
            for (int a = 0; a < 4; ++a)
                for (int b = a; b < 4; ++b)
                    node_stream_.emit(p.nodes[a], p.nodes[b],
                                      dt2 * p.bd.hess.block<3, 3>(3 * a, 3 * b));
        }

        if (sc.ground.enabled)
            for (Index v : surf_->verts) {
                const GroundDerivs gd =
                    ground_barrier_derivs(pos[v], sc.ground.normal,
                                          sc.ground.height, dhat_, kappa_);
                if (!(gd.dist > 0) || gd.dist >= dhat_) continue;
                val += dt2 * gd.value;
                node_grad_[v] += dt2 * gd.grad;
                node_stream_.emit(v, v, dt2 * gd.hess);
            }

        for (const auto& c : friction_) {
            std::array<Vec3, 4> dx = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                      Vec3::Zero()};
            for (int k = 0; k < c.n_nodes; ++k)
                dx[k] = pos[c.nodes[k]] - fr_base_[c.nodes[k]];
            const FrictionDerivs fd = friction_derivs(c, dx, mu_, fr_eps_);
            val += dt2 * fd.value;
            for (int a = 0; a < c.n_nodes; ++a)
                node_grad_[c.nodes[a]] += dt2 * fd.grad.segment<3>(3 * a);
            for (int a = 0; a < c.n_nodes; ++a)
                for (int b = a; b < c.n_nodes; ++b)
                    node_stream_.emit(c.nodes[a], c.nodes[b],
                                      dt2 * fd.hess.block<3, 3>(3 * a, 3 * b));
        }

        const BlockTripletStream reduced =
            two_level_abd_reduce(node_stream_, *dofs_, pol_);
        stream_.append(reduced);

        for (Index n = 0; n < dofs_->n_nodes(); ++n) {
            if (node_grad_[n].squaredNorm() == 0) continue;
            if (dofs_->is_fem(n))
                grad.segment<3>(3 * n) += node_grad_[n];
            else
                grad.segment<12>(
                    3 * dofs_->body_block_base(dofs_->body_of(n))) +=
                    dofs_->jacobian(n).transpose() * node_grad_[n];
        }
        return val;
    }

    // Drop every block touching a pinned slot, then put an identity on each
    // pinned diagonal so the matrix stays positive definite.
    void filter_pinned() {
        std::size_t w = 0;
        for (std::size_t i = 0; i < stream_.size(); ++i) {
            const Index r = block_key_row(stream_.keys[i]);
            const Index c = block_key_col(stream_.keys[i]);
            if (slot_pinned_[r] || slot_pinned_[c]) continue;
            stream_.keys[w] = stream_.keys[i];
            stream_.values[w] = stream_.values[i];
            ++w;
        }
        stream_.keys.resize(w);
        stream_.values.resize(w);
        for (Index slot = 0; slot < static_cast<Index>(slot_pinned_.size()); ++slot)
            if (slot_pinned_[slot])
                stream_.emit(slot, slot, Mat3::Identity());
    }

    const Scene* scene_;
    const ContactSurface* surf_;
    const DofMap* dofs_;
    ExecPolicy pol_;
    std::vector<char> slot_pinned_;

    std::vector<Vec3> x_tilde_;
    std::vector<Vec12> q_tilde_;
    Real dhat_ = 0, kappa_ = 0;
    std::vector<FrictionConstraint> friction_;
    std::vector<Vec3> fr_base_;
    Real mu_ = 0, fr_eps_ = 1;

    BlockTripletStream stream_, node_stream_;
    std::vector<Vec3> node_grad_;
    std::vector<Stencil12> tet_scratch_, hinge_scratch_;
    std::vector<Stencil9> tri_scratch_;
    std::vector<PairScratch> pair_scratch_;
};

} // namespace adipc
