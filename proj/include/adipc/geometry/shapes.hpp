#pragma once

#include <array>
#include <vector>

#include "../core/types.hpp"

namespace adipc {

struct TriMeshData {
    std::vector<Vec3> verts;
    std::vector<std::array<Index, 3>> tris;
};

struct TetMeshData {
    std::vector<Vec3> verts;
    std::vector<std::array<Index, 4>> tets;
};

// Regular cloth grid in the XY plane, vertex id = j * nx + i.
inline TriMeshData make_grid(int nx, int ny, Real sx, Real sy) {
    TriMeshData m;
    m.verts.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.verts.push_back(Vec3(sx * i / (nx - 1), sy * j / (ny - 1), 0));
    auto id = [nx](int i, int j) { return static_cast<Index>(j * nx + i); };
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            // alternate the diagonal to keep the drape symmetric
            if ((i + j) % 2 == 0) {
                m.tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                m.tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            } else {
                m.tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
                m.tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        }
    return m;
}

namespace detail {

// Six positively oriented tets around the main cube diagonal; identical for
// every cell, so shared faces match.
constexpr std::array<std::array<int, 4>, 6> kCubeTets = {{{0, 1, 3, 7},
                                                          {0, 3, 2, 7},
                                                          {0, 2, 6, 7},
                                                          {0, 6, 4, 7},
                                                          {0, 4, 5, 7},
                                                          {0, 5, 1, 7}}};

} // namespace detail

// Axis-aligned tet block with (nx, ny, nz) cells spanning (sx, sy, sz).
inline TetMeshData make_box_tets(int nx, int ny, int nz, Real sx, Real sy, Real sz) {
    TetMeshData m;
    const int vx = nx + 1, vy = ny + 1, vz = nz + 1;
    auto vid = [&](int i, int j, int k) {
        return static_cast<Index>((k * vy + j) * vx + i);
    };
    for (int k = 0; k < vz; ++k)
        for (int j = 0; j < vy; ++j)
            for (int i = 0; i < vx; ++i)
                m.verts.push_back(Vec3(sx * i / nx, sy * j / ny, sz * k / nz));
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                Index c[8];
                for (int b = 0; b < 8; ++b)
                    c[b] = vid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
                for (const auto& t : detail::kCubeTets)
                    m.tets.push_back({c[t[0]], c[t[1]], c[t[2]], c[t[3]]});
            }
    return m;
}

// Blocky ellipsoid: keep box cells whose center lies inside, then compact.
inline TetMeshData make_ellipsoid_tets(int n, Real rx, Real ry, Real rz) {
    TetMeshData box = make_box_tets(n, n, n, 2 * rx, 2 * ry, 2 * rz);
    const Vec3 center(rx, ry, rz);
    TetMeshData m;
    std::vector<Index> remap(box.verts.size(), kInvalid);
    for (const auto& t : box.tets) {
        Vec3 c = Vec3::Zero();
        for (Index v : t) c += box.verts[v];
        c /= 4;
        const Vec3 d = c - center;
        if (d.x() * d.x() / (rx * rx) + d.y() * d.y() / (ry * ry) +
                d.z() * d.z() / (rz * rz) >
            1.0)
            continue;
        std::array<Index, 4> nt;
        for (int a = 0; a < 4; ++a) {
            if (remap[t[a]] == kInvalid) {
                remap[t[a]] = static_cast<Index>(m.verts.size());
                m.verts.push_back(box.verts[t[a]]);
            }
            nt[a] = remap[t[a]];
        }
        m.tets.push_back(nt);
    }
    return m;
}

inline void translate(std::vector<Vec3>& verts, const Vec3& d) {
    for (auto& v : verts) v += d;
}

} // namespace adipc
