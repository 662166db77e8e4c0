#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../geometry/shapes.hpp"

namespace adipc {

struct MeshIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Accepts "f 1 2 3", "f 1/4 2/5 3/6", "f 1//7 ..."; only the vertex index matters.
inline Index obj_vertex_index(const std::string& token, Index n_vertices, int line) {
    const std::size_t slash = token.find('/');
    const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
    long v = 0;
    try {
        v = std::stol(head);
    } catch (const std::exception&) {
        throw MeshIoError("line " + std::to_string(line) + ": bad face index '" +
                          token + "'");
    }
    if (v < 0) v = n_vertices + 1 + v; // negative indices count from the end
    if (v < 1 || v > n_vertices)
        throw MeshIoError("line " + std::to_string(line) + ": face index " + head +
                          " out of range [1," + std::to_string(n_vertices) + "]");
    return static_cast<Index>(v - 1);
}

} // namespace detail

inline TriMeshData load_obj(std::istream& in) {
    TriMeshData mesh;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z()))
                throw MeshIoError("line " + std::to_string(lineno) +
                                  ": vertex needs 3 coordinates");
            mesh.verts.push_back(p);
        } else if (tag == "f") {
            std::vector<Index> poly;
            std::string tok;
            while (ls >> tok)
                poly.push_back(detail::obj_vertex_index(
                    tok, static_cast<Index>(mesh.verts.size()), lineno));
            if (poly.size() < 3)
                throw MeshIoError("line " + std::to_string(lineno) +
                                  ": face needs at least 3 vertices");
            for (std::size_t k = 2; k < poly.size(); ++k)
                mesh.tris.push_back({poly[0], poly[k - 1], poly[k]});
        }
        // v/f are all we consume; vn, vt, o, g, s, mtllib pass through silently
    }
    return mesh;
}

inline TriMeshData load_obj_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw MeshIoError("cannot open mesh file: " + path);
    return load_obj(f);
}

inline void save_obj(std::ostream& out, const std::vector<Vec3>& vertices,
                     const std::vector<std::array<Index, 3>>& triangles,
                     const std::string& object_name = "") {
    out << std::setprecision(17);
    if (!object_name.empty()) out << "o " << object_name << "\n";
    for (const auto& p : vertices)
        out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
    for (const auto& t : triangles)
        out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

// Tet format: first line "<n_vertices> <n_tets>", then vertex lines "x y z",
// then tet lines with four 0-based vertex indices.
inline TetMeshData load_tet_mesh(std::istream& in) {
    TetMeshData mesh;
    std::string line;
    int lineno = 0;
    long nv = -1, nt = -1;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        if (nv < 0) {
            if (!(ls >> nv >> nt)) {
                std::string any;
                if (std::istringstream(line) >> any)
                    throw MeshIoError("line " + std::to_string(lineno) +
                                      ": expected header '<n_vertices> <n_tets>'");
                continue;
            }
            if (nv <= 0 || nt < 0)
                throw MeshIoError("line " + std::to_string(lineno) +
                                  ": bad mesh sizes in header");
            continue;
        }
        if (static_cast<long>(mesh.verts.size()) < nv) {
            Vec3 p;
            if (!(ls >> p.x() >> p.y() >> p.z())) {
                std::string any;
                if (std::istringstream(line) >> any)
                    throw MeshIoError("line " + std::to_string(lineno) +
                                      ": vertex needs 3 coordinates");
                continue;
            }
            mesh.verts.push_back(p);
            continue;
        }
        if (static_cast<long>(mesh.tets.size()) < nt) {
            long a, b, c, d;
            if (!(ls >> a >> b >> c >> d)) {
                std::string any;
                if (std::istringstream(line) >> any)
                    throw MeshIoError("line " + std::to_string(lineno) +
                                      ": tet needs 4 vertex indices");
                continue;
            }
            for (long v : {a, b, c, d})
                if (v < 0 || v >= nv)
                    throw MeshIoError("line " + std::to_string(lineno) +
                                      ": tet index " + std::to_string(v) +
                                      " out of range [0," + std::to_string(nv - 1) +
                                      "]");
            mesh.tets.push_back({static_cast<Index>(a), static_cast<Index>(b),
                                 static_cast<Index>(c), static_cast<Index>(d)});
        }
    }
    if (nv < 0) throw MeshIoError("tet mesh is missing its size header");
    if (static_cast<long>(mesh.verts.size()) != nv ||
        static_cast<long>(mesh.tets.size()) != nt)
        throw MeshIoError("tet mesh ended early: got " +
                          std::to_string(mesh.verts.size()) + "/" +
                          std::to_string(nv) + " vertices and " +
                          std::to_string(mesh.tets.size()) + "/" + std::to_string(nt) +
                          " tets");
    return mesh;
}

inline TetMeshData load_tet_mesh_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw MeshIoError("cannot open mesh file: " + path);
    return load_tet_mesh(f);
}

inline void save_tet_mesh(std::ostream& out, const TetMeshData& mesh) {
    out << std::setprecision(17);
    out << mesh.verts.size() << " " << mesh.tets.size() << "\n";
    for (const auto& p : mesh.verts)
        out << p.x() << " " << p.y() << " " << p.z() << "\n";
    for (const auto& t : mesh.tets)
        out << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
}

} // namespace adipc
