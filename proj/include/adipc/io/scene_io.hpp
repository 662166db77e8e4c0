#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "../scene/scene.hpp"
#include "mesh_io.hpp"
#include "toml_lite.hpp"

namespace adipc {

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void read_config(const TomlTable& t, SceneConfig& c) {
    c.dt = t.number("dt", c.dt);
    c.gravity = t.vec3("gravity", c.gravity);
    c.dhat_rel = t.number("dhat_rel", c.dhat_rel);
    c.newton_tol_rel = t.number("newton_tol_rel", c.newton_tol_rel);
    c.pcg_rel_tol = t.number("pcg_rel_tol", c.pcg_rel_tol);
    c.pcg_restart = static_cast<int>(t.number("pcg_restart", c.pcg_restart));
    c.max_newton = static_cast<int>(t.number("max_newton", c.max_newton));
    c.max_pcg = static_cast<int>(t.number("max_pcg", c.max_pcg));
    c.subdomain = static_cast<int>(t.number("subdomain", c.subdomain));
    c.max_levels = static_cast<int>(t.number("max_levels", c.max_levels));
    c.friction_mu = t.number("friction_mu", c.friction_mu);
    c.static_friction_tol_rel =
        t.number("static_friction_tol_rel", c.static_friction_tol_rel);
    c.barrier_scale = t.number("barrier_scale", c.barrier_scale);
}

inline ScriptedMotion read_script(const TomlTable& t) {
    ScriptedMotion s;
    s.translate_per_step = t.vec3("script_translate", s.translate_per_step);
    s.rotate_axis = t.vec3("script_rotate_axis", s.rotate_axis);
    s.rotate_deg_per_step = t.number("script_rotate_deg", s.rotate_deg_per_step);
    s.rotate_center = t.vec3("script_rotate_center", s.rotate_center);
    return s;
}

// pin = "all", pin = [indices], or pin_box = [x0,y0,z0,x1,y1,z1] on rest
// positions (after translate); the selections are merged.
inline std::vector<Index> read_pins(const TomlTable& t,
                                    const std::vector<Vec3>& rest) {
    std::vector<Index> out;
    if (t.has("pin")) {
        const TomlValue& v = t.kv.at("pin");
        if (v.kind == TomlValue::Kind::String) {
            if (v.str != "all")
                throw SceneError("line " + std::to_string(v.line) +
                                 ": pin must be \"all\" or an index list");
            for (Index i = 0; i < static_cast<Index>(rest.size()); ++i)
                out.push_back(i);
        } else {
            for (Real r : t.numbers("pin", {}))
                out.push_back(static_cast<Index>(r));
        }
    }
    if (t.has("pin_box")) {
        const auto box = t.numbers("pin_box", {});
        if (box.size() != 6)
            throw SceneError("line " + std::to_string(t.kv.at("pin_box").line) +
                             ": pin_box needs [x0,y0,z0,x1,y1,z1]");
        const Vec3 lo(box[0], box[1], box[2]), hi(box[3], box[4], box[5]);
        for (Index i = 0; i < static_cast<Index>(rest.size()); ++i) {
            const Vec3& p = rest[i];
            if ((p.array() >= lo.array()).all() && (p.array() <= hi.array()).all())
                out.push_back(i);
        }
    }
    return out;
}

inline std::string resolved(const std::string& base_dir, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute() || base_dir.empty()) return rel;
    return (std::filesystem::path(base_dir) / p).string();
}

inline TetMeshData read_tet_source(const TomlTable& t, const std::string& base_dir,
                                   const std::string& what) {
    TetMeshData data;
    if (t.has("mesh")) {
        data = load_tet_mesh_file(resolved(base_dir, t.str("mesh", "")));
    } else {
        const std::string gen = t.str("generate", "");
        if (gen == "box") {
            const auto res = t.numbers("resolution", {2, 2, 2});
            if (res.size() != 3)
                throw SceneError(what + " box resolution needs 3 values");
            const Vec3 size = t.vec3("size", Vec3(1, 1, 1));
            data = make_box_tets(static_cast<int>(res[0]), static_cast<int>(res[1]),
                                 static_cast<int>(res[2]), size.x(), size.y(),
                                 size.z());
        } else if (gen == "ellipsoid") {
            const auto res = t.numbers("resolution", {8});
            const Vec3 size = t.vec3("size", Vec3(1, 1, 1));
            data = make_ellipsoid_tets(static_cast<int>(res[0]), size.x() / 2,
                                       size.y() / 2, size.z() / 2);
        } else {
            throw SceneError(what + " needs mesh = \"file\" or generate = "
                                    "\"box\"/\"ellipsoid\", got '" +
                             gen + "'");
        }
    }
    translate(data.verts, t.vec3("translate", Vec3::Zero()));
    return data;
}

} // namespace detail

inline Scene scene_from_toml(const TomlDoc& doc, const std::string& base_dir = "") {
    Scene scene;
    if (const TomlTable* sim = doc.find("simulation"))
        detail::read_config(*sim, scene.config);
    if (const TomlTable* g = doc.find("ground")) {
        scene.ground.enabled = g->boolean("enabled", true);
        scene.ground.height = g->number("height", 0.0);
        scene.ground.normal = g->vec3("normal", Vec3::UnitY()).normalized();
    }

    int anon = 0;
    for (const TomlTable* t : doc.find_all("shell")) {
        DeformableMesh m;
        m.is_shell = true;
        m.name = t->str("name", "shell" + std::to_string(anon++));
        TriMeshData data;
        if (t->has("mesh")) {
            data = load_obj_file(detail::resolved(base_dir, t->str("mesh", "")));
        } else if (t->str("generate", "") == "grid") {
            const auto res = t->numbers("resolution", {2, 2});
            if (res.size() != 2)
                throw SceneError("shell '" + m.name +
                                 "': grid resolution needs 2 values");
            const auto size = t->numbers("size", {1, 1});
            data = make_grid(static_cast<int>(res[0]), static_cast<int>(res[1]),
                             size[0], size.size() > 1 ? size[1] : size[0]);
        } else {
            throw SceneError("shell '" + m.name +
                             "': needs mesh = \"file\" or generate = \"grid\"");
        }
        translate(data.verts, t->vec3("translate", Vec3::Zero()));
        m.rest = data.verts;
        m.tris = data.tris;
        m.shell.density = t->number("density", m.shell.density);
        m.shell.thickness = t->number("thickness", m.shell.thickness);
        m.shell.stretch_stiffness =
            t->number("stretch_stiffness", m.shell.stretch_stiffness);
        m.shell.strain_limit_stiffness =
            t->number("strain_limit_stiffness", m.shell.strain_limit_stiffness);
        m.shell.shear_fraction = t->number("shear_fraction", m.shell.shear_fraction);
        m.shell.bending_stiffness =
            t->number("bending_stiffness", m.shell.bending_stiffness);
        m.pinned = detail::read_pins(*t, m.rest);
        m.script = detail::read_script(*t);
        scene.meshes.push_back(std::move(m));
    }

    for (const TomlTable* t : doc.find_all("solid")) {
        DeformableMesh m;
        m.is_shell = false;
        m.name = t->str("name", "solid" + std::to_string(anon++));
        TetMeshData data = detail::read_tet_source(*t, base_dir, "solid '" + m.name + "'");
        m.rest = data.verts;
        m.tets = data.tets;
        m.solid.density = t->number("density", m.solid.density);
        m.solid.youngs = t->number("youngs", m.solid.youngs);
        m.solid.poisson = t->number("poisson", m.solid.poisson);
        m.pinned = detail::read_pins(*t, m.rest);
        m.script = detail::read_script(*t);
        scene.meshes.push_back(std::move(m));
    }

    for (const TomlTable* t : doc.find_all("body")) {
        AffineBody b;
        b.name = t->str("name", "body" + std::to_string(anon++));
        TetMeshData data = detail::read_tet_source(*t, base_dir, "body '" + b.name + "'");
        b.rest = data.verts;
        b.tets = data.tets;
        b.mat.density = t->number("density", b.mat.density);
        b.mat.kappa = t->number("kappa", b.mat.kappa);
        b.pinned = t->boolean("pinned", false);
        scene.bodies.push_back(std::move(b));
    }

    scene.finalize();
    return scene;
}

inline Scene load_scene(const std::string& path) {
    try {
        const TomlDoc doc = parse_toml_file(path);
        return scene_from_toml(doc,
                               std::filesystem::path(path).parent_path().string());
    } catch (const SceneError&) {
        throw;
    } catch (const std::exception& e) {
        throw SceneError("scene '" + path + "': " + e.what());
    }
}

// Per-step solver counters: one csv row per simulated step.
struct StatsWriter {
    std::ofstream out;

    explicit StatsWriter(const std::string& path, long seed = -1) : out(path) {
        if (!out) throw std::runtime_error("cannot open stats file: " + path);
        out << "# schema: stats-v1\n";
        if (seed >= 0) out << "# seed: " << seed << "\n";
        out << "step,newtonIters,cgIters,assemblyTime,pcgTime,ccdTime,"
               "lineSearchTime,minDistance\n";
        out << std::setprecision(17);
    }

    void row(int step, int newton_iters, long cg_iters, double assembly_s,
             double pcg_s, double ccd_s, double line_search_s, double min_distance) {
        out << step << ',' << newton_iters << ',' << cg_iters << ',' << assembly_s
            << ',' << pcg_s << ',' << ccd_s << ',' << line_search_s << ','
            << min_distance << '\n';
    }
};

inline std::string frame_file_name(int frame) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%05d.obj", frame);
    return buf;
}

// Writes every mesh surface and body surface as one obj with per-object names.
inline std::string export_frame(const Scene& scene, const SystemState& s,
                                const std::string& dir, int frame) {
    std::filesystem::create_directories(dir);
    const std::string path =
        (std::filesystem::path(dir) / frame_file_name(frame)).string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open frame file: " + path);
    out << std::setprecision(9);
    Index base = 0;
    for (std::size_t mi = 0; mi < scene.meshes.size(); ++mi) {
        const auto& m = scene.meshes[mi];
        out << "o " << m.name << "\n";
        for (Index v = 0; v < m.n_verts(); ++v) {
            const Vec3& p = s.x[scene.mesh_offset[mi] + v];
            out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
        }
        for (const auto& t : m.tris)
            out << "f " << base + t[0] + 1 << " " << base + t[1] + 1 << " "
                << base + t[2] + 1 << "\n";
        base += m.n_verts();
    }
    for (std::size_t bi = 0; bi < scene.bodies.size(); ++bi) {
        const auto& b = scene.bodies[bi];
        out << "o " << b.name << "\n";
        for (Index v = 0; v < b.n_verts(); ++v) {
            const Vec3 p = affine_point(s.q[bi], b.rest[v]);
            out << "v " << p.x() << " " << p.y() << " " << p.z() << "\n";
        }
        for (const auto& t : b.surface_tris)
            out << "f " << base + t[0] + 1 << " " << base + t[1] + 1 << " "
                << base + t[2] + 1 << "\n";
        base += b.n_verts();
    }
    return path;
}

} // namespace adipc
