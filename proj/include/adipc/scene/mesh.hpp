#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "../core/types.hpp"
#include "../energy/bending.hpp"
#include "../energy/membrane.hpp"
#include "../energy/neo_hookean.hpp"
#include "../geometry/shapes.hpp"

namespace adipc {

struct ShellMaterial {
    Real density = 200;
    Real thickness = 1e-3;
    Real stretch_stiffness = 5e4;      // membrane lambda, Pa
    Real strain_limit_stiffness = 5e6; // cubic limiter lambda', Pa
    Real shear_fraction = 0.3;         // shear stiffness as a fraction of stretch
    Real bending_stiffness = 1e-6;     // Pa m^3 scale folded into the hinge weight
};

struct SolidMaterial {
    Real density = 1000;
    Real youngs = 1e6;
    Real poisson = 0.3;
    Real mu() const { return youngs / (2 * (1 + poisson)); }
    Real lambda() const {
        return youngs * poisson / ((1 + poisson) * (1 - 2 * poisson));
    }
};

struct AbdMaterial {
    Real density = 1000;
    Real kappa = 1e8; // orthogonality stiffness, Pa
};

// Kinematic motion applied to pinned vertices once per step.
struct ScriptedMotion {
    Vec3 translate_per_step = Vec3::Zero();
    Vec3 rotate_axis = Vec3::UnitY();
    Real rotate_deg_per_step = 0;
    Vec3 rotate_center = Vec3::Zero();
    bool any() const {
        return translate_per_step.squaredNorm() > 0 || rotate_deg_per_step != 0;
    }
};

namespace detail {

struct TriKey {
    std::array<Index, 3> sorted;
    bool operator<(const TriKey& o) const { return sorted < o.sorted; }
};

} // namespace detail

// Boundary triangles of a tet mesh, wound outward.
inline std::vector<std::array<Index, 3>> extract_boundary(
    const std::vector<std::array<Index, 4>>& tets) {
    // face k of a tet is opposite vertex k, wound away from it
    static const int kFace[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    std::map<detail::TriKey, std::pair<std::array<Index, 3>, int>> faces;
    for (const auto& t : tets)
        for (const auto& f : kFace) {
            std::array<Index, 3> tri = {t[f[0]], t[f[1]], t[f[2]]};
            detail::TriKey key{tri};
            std::sort(key.sorted.begin(), key.sorted.end());
            auto it = faces.find(key);
            if (it == faces.end())
                faces.emplace(key, std::make_pair(tri, 1));
            else
                ++it->second.second;
        }
    std::vector<std::array<Index, 3>> out;
    for (const auto& [k, v] : faces)
        if (v.second == 1) out.push_back(v.first);
    return out;
}

inline std::vector<std::array<Index, 2>> extract_edges(
    const std::vector<std::array<Index, 3>>& tris) {
    std::vector<std::array<Index, 2>> edges;
    for (const auto& t : tris)
        for (int a = 0; a < 3; ++a) {
            Index u = t[a], v = t[(a + 1) % 3];
            if (u > v) std::swap(u, v);
            edges.push_back({u, v});
        }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

// Interior edges shared by two triangles -> hinge stencils (e0, e1, w0, w1)
// where the first wing belongs to the triangle traversing e0 -> e1.
inline std::vector<std::array<Index, 4>> build_hinges(
    const std::vector<std::array<Index, 3>>& tris) {
    std::map<std::pair<Index, Index>, std::array<Index, 2>> half; // edge -> (wing, dir)
    std::vector<std::array<Index, 4>> hinges;
    for (const auto& t : tris)
        for (int a = 0; a < 3; ++a) {
            const Index u = t[a], v = t[(a + 1) % 3], w = t[(a + 2) % 3];
            const auto key = std::minmax(u, v);
            auto it = half.find({key.first, key.second});
            if (it == half.end()) {
                half[{key.first, key.second}] = {w, u == key.first ? Index(0) : Index(1)};
            } else {
                const Index w0 = it->second[0];
                // orient so x2 wings the triangle running e0 -> e1
                if (it->second[1] == 0)
                    hinges.push_back({key.first, key.second, w0, w});
                else
                    hinges.push_back({key.first, key.second, w, w0});
            }
        }
    return hinges;
}

struct DeformableMesh {
    std::string name;
    bool is_shell = false;
    std::vector<Vec3> rest;
    std::vector<std::array<Index, 4>> tets;
    std::vector<std::array<Index, 3>> tris; // shell faces or extracted boundary
    std::vector<std::array<Index, 2>> edges;
    std::vector<std::array<Index, 4>> hinges;

    ShellMaterial shell;
    SolidMaterial solid;

    std::vector<TetRest> tet_rest_data;
    std::vector<MembraneRest> tri_rest_data;
    std::vector<HingeRest> hinge_rest_data;
    std::vector<Real> vertex_mass;

    std::vector<Index> pinned;
    ScriptedMotion script;

    Index n_verts() const { return static_cast<Index>(rest.size()); }
};

// Uniform lumping: a quarter of each tet mass, a third of each shell face
// mass. Every vertex must end up with positive mass.
inline void compute_masses(DeformableMesh& m) {
    m.vertex_mass.assign(m.rest.size(), 0.0);
    if (m.is_shell) {
        for (std::size_t t = 0; t < m.tris.size(); ++t) {
            const Real mt =
                m.shell.density * m.tri_rest_data[t].area * m.shell.thickness;
            for (Index v : m.tris[t]) m.vertex_mass[v] += mt / 3;
        }
    } else {
        for (std::size_t t = 0; t < m.tets.size(); ++t) {
            const Real mt = m.solid.density * m.tet_rest_data[t].volume;
            for (Index v : m.tets[t]) m.vertex_mass[v] += mt / 4;
        }
    }
    for (std::size_t v = 0; v < m.vertex_mass.size(); ++v)
        if (!(m.vertex_mass[v] > 0))
            throw std::invalid_argument("mesh '" + m.name + "': vertex " +
                                        std::to_string(v) + " carries no mass");
}

inline void finalize_mesh(DeformableMesh& m) {
    if (m.is_shell) {
        m.tri_rest_data.clear();
        for (const auto& t : m.tris)
            m.tri_rest_data.push_back(membrane_rest(m.rest[t[0]], m.rest[t[1]], m.rest[t[2]]));
        m.hinges = build_hinges(m.tris);
        m.hinge_rest_data.clear();
        for (const auto& h : m.hinges)
            m.hinge_rest_data.push_back(
                hinge_rest(m.rest[h[0]], m.rest[h[1]], m.rest[h[2]], m.rest[h[3]]));
    } else {
        m.tet_rest_data.clear();
        for (const auto& t : m.tets)
            m.tet_rest_data.push_back(
                tet_rest(m.rest[t[0]], m.rest[t[1]], m.rest[t[2]], m.rest[t[3]]));
        m.tris = extract_boundary(m.tets);
    }
    m.edges = extract_edges(m.tris);
    compute_masses(m);
    for (Index p : m.pinned)
        if (p < 0 || p >= m.n_verts())
            throw std::invalid_argument("mesh '" + m.name + "': pinned vertex " +
                                        std::to_string(p) + " out of range");
    std::sort(m.pinned.begin(), m.pinned.end());
    m.pinned.erase(std::unique(m.pinned.begin(), m.pinned.end()), m.pinned.end());
}

// Jacobian of a body vertex position w.r.t. its 12 generalized coordinates.
inline Mat3x12 abd_jacobian(const Vec3& rest) {
    Mat3x12 J = Mat3x12::Zero();
    J.block<3, 3>(0, 0) = Mat3::Identity();
    for (int r = 0; r < 3; ++r) J.block<1, 3>(r, 3 + 3 * r) = rest.transpose();
    return J;
}

struct AffineBody {
    std::string name;
    std::vector<Vec3> rest;
    std::vector<std::array<Index, 4>> tets;
    std::vector<std::array<Index, 3>> surface_tris;
    std::vector<std::array<Index, 2>> surface_edges;
    AbdMaterial mat;
    std::vector<Real> vertex_mass;
    Real volume = 0;
    Mat12 reduced_mass = Mat12::Zero();
    bool pinned = false;

    Index n_verts() const { return static_cast<Index>(rest.size()); }

    Vec12 gravity_force(const Vec3& g) const {
        Vec12 f = Vec12::Zero();
        Real total = 0;
        Vec3 weighted = Vec3::Zero();
        for (std::size_t i = 0; i < rest.size(); ++i) {
            total += vertex_mass[i];
            weighted += vertex_mass[i] * rest[i];
        }
        f.head<3>() = total * g;
        for (int r = 0; r < 3; ++r) f.segment<3>(3 + 3 * r) = g[r] * weighted;
        return f;
    }
};

inline void finalize_body(AffineBody& b) {
    if (b.rest.size() < 2)
        throw std::invalid_argument("body '" + b.name +
                                    "': needs at least a full tet of vertices");
    b.vertex_mass.assign(b.rest.size(), 0.0);
    b.volume = 0;
    for (const auto& t : b.tets) {
        const TetRest r = tet_rest(b.rest[t[0]], b.rest[t[1]], b.rest[t[2]], b.rest[t[3]]);
        b.volume += r.volume;
        for (Index v : t) b.vertex_mass[v] += b.mat.density * r.volume / 4;
    }
    for (std::size_t v = 0; v < b.vertex_mass.size(); ++v)
        if (!(b.vertex_mass[v] > 0))
            throw std::invalid_argument("body '" + b.name + "': vertex " +
                                        std::to_string(v) + " carries no mass");
    b.surface_tris = extract_boundary(b.tets);
    b.surface_edges = extract_edges(b.surface_tris);

    b.reduced_mass.setZero();
    for (std::size_t i = 0; i < b.rest.size(); ++i) {
        const Mat3x12 J = abd_jacobian(b.rest[i]);
        b.reduced_mass += b.vertex_mass[i] * J.transpose() * J;
    }
    Eigen::LLT<Mat12> llt(b.reduced_mass);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("body '" + b.name +
                                    "': reduced mass is not positive definite");
}

} // namespace adipc
