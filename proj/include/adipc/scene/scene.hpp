#pragma once

#include <limits>

#include "../sparse/abd_reduce.hpp"
#include "mesh.hpp"

namespace adipc {

struct GroundPlane {
    bool enabled = false;
    Real height = 0;
    Vec3 normal = Vec3::UnitY();
};

struct SceneConfig {
    Real dt = 1e-2;
    Vec3 gravity = Vec3(0, -9.81, 0);
    Real dhat_rel = 1e-3;               // barrier range as fraction of scene size
    Real newton_tol_rel = 1e-2;         // of scene size times dt
    Real pcg_rel_tol = 1e-4;
    int pcg_restart = 250;
    int max_newton = 256;
    int max_pcg = 100000;
    int subdomain = 16;
    int max_levels = 4;
    Real friction_mu = 0;
    Real static_friction_tol_rel = 1e-3; // slip speed threshold, scene sizes per second
    Real barrier_scale = 1e3;            // multiplies the inertia-matched kappa
};

struct SystemState {
    std::vector<Vec3> x, v;   // deformable vertices
    std::vector<Vec12> q, qd; // affine bodies
};

struct Scene {
    SceneConfig config;
    GroundPlane ground;
    std::vector<DeformableMesh> meshes;
    std::vector<AffineBody> bodies;

    Real length_scale = 0;
    std::vector<Index> mesh_offset; // into the fem vertex range
    std::vector<Index> body_offset; // into the contact-node range, after fem
    Index n_fem_vertices = 0;

    Real dhat() const { return config.dhat_rel * length_scale; }

    void finalize() {
        if (meshes.empty() && bodies.empty())
            throw std::invalid_argument("scene declares no meshes or bodies");
        mesh_offset.clear();
        n_fem_vertices = 0;
        for (auto& m : meshes) {
            finalize_mesh(m);
            mesh_offset.push_back(n_fem_vertices);
            n_fem_vertices += m.n_verts();
        }
        body_offset.clear();
        Index off = n_fem_vertices;
        for (auto& b : bodies) {
            finalize_body(b);
            body_offset.push_back(off);
            off += b.n_verts();
        }
        Vec3 lo = Vec3::Constant(std::numeric_limits<Real>::max());
        Vec3 hi = -lo;
        auto grow = [&](const Vec3& p) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        };
        for (const auto& m : meshes)
            for (const auto& p : m.rest) grow(p);
        for (const auto& b : bodies)
            for (const auto& p : b.rest) grow(p);
        length_scale = (hi - lo).norm();
        if (!(length_scale > 0))
            throw std::invalid_argument("scene rest geometry has zero extent");
    }
};

// Bodies start with the identity transform, so world equals rest.
inline SystemState make_state(const Scene& scene) {
    SystemState s;
    s.x.reserve(scene.n_fem_vertices);
    for (const auto& m : scene.meshes)
        s.x.insert(s.x.end(), m.rest.begin(), m.rest.end());
    s.v.assign(scene.n_fem_vertices, Vec3::Zero());
    for (std::size_t b = 0; b < scene.bodies.size(); ++b) {
        Vec12 q = Vec12::Zero();
        q[3] = q[7] = q[11] = 1;
        s.q.push_back(q);
        s.qd.push_back(Vec12::Zero());
    }
    return s;
}

inline DofMap make_dof_map(const Scene& scene) {
    DofMap map;
    map.n_fem_nodes = scene.n_fem_vertices;
    map.n_bodies = static_cast<Index>(scene.bodies.size());
    for (std::size_t b = 0; b < scene.bodies.size(); ++b)
        for (const auto& rest : scene.bodies[b].rest) {
            map.abd_node_body.push_back(static_cast<Index>(b));
            map.abd_node_jacobian.push_back(abd_jacobian(rest));
        }
    return map;
}

// World positions over the whole contact-node universe (fem then bodies).
inline std::vector<Vec3> contact_node_positions(const Scene& scene,
                                                const SystemState& s) {
    std::vector<Vec3> p = s.x;
    p.reserve(p.size());
    for (std::size_t b = 0; b < scene.bodies.size(); ++b)
        for (const auto& rest : scene.bodies[b].rest)
            p.push_back(affine_point(s.q[b], rest));
    return p;
}

// One step of the scripted pin motion, applied directly to pinned vertices.
inline void apply_scripts(const Scene& scene, SystemState& s) {
    for (std::size_t mi = 0; mi < scene.meshes.size(); ++mi) {
        const auto& m = scene.meshes[mi];
        if (!m.script.any() || m.pinned.empty()) continue;
        Mat3 R = Mat3::Identity();
        if (m.script.rotate_deg_per_step != 0)
            R = Eigen::AngleAxisd(m.script.rotate_deg_per_step * M_PI / 180.0,
                                  m.script.rotate_axis.normalized())
                    .toRotationMatrix();
        for (Index p : m.pinned) {
            Vec3& x = s.x[scene.mesh_offset[mi] + p];
            x = R * (x - m.script.rotate_center) + m.script.rotate_center +
                m.script.translate_per_step;
        }
    }
}

} // namespace adipc
