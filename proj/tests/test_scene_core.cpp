#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <adipc/io/scene_io.hpp>

using namespace adipc;

namespace {

std::filesystem::path tmp_dir() {
    auto p = std::filesystem::temp_directory_path() / "adipc_scene_core";
    std::filesystem::create_directories(p);
    return p;
}

std::string write_tmp(const std::string& name, const std::string& content) {
    const auto path = tmp_dir() / name;
    std::ofstream f(path);
    f << content;
    return path.string();
}

} // namespace

TEST_CASE("affine point evaluates p + A rest and matches the jacobian") {
    Vec12 q;
    q << 0.5, -1, 2, 1, 2, 3, 4, 5, 6, 7, 8, 10;
    const Vec3 rest(1, 1, 1);
    const Vec3 x = affine_point(q, rest);
    REQUIRE(x.x() == 6.5);
    REQUIRE(x.y() == 14.0);
    REQUIRE(x.z() == 27.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<Real> u(-2, 2);
    for (int trial = 0; trial < 20; ++trial) {
        Vec12 qr;
        Vec3 pr;
        for (int i = 0; i < 12; ++i) qr[i] = u(rng);
        for (int i = 0; i < 3; ++i) pr[i] = u(rng);
        const Vec3 direct = affine_point(qr, pr);
        const Vec3 via_j = abd_jacobian(pr) * qr;
        REQUIRE((direct - via_j).norm() < 1e-14 * (1 + direct.norm()));
    }
}

TEST_CASE("grid generator produces the expected counts and spans") {
    const TriMeshData g = make_grid(5, 4, 2.0, 1.5);
    REQUIRE(g.verts.size() == 20);
    REQUIRE(g.tris.size() == 2 * 4 * 3);
    REQUIRE(g.verts.front() == Vec3(0, 0, 0));
    REQUIRE(g.verts.back() == Vec3(2.0, 1.5, 0));
    // every triangle has positive area
    for (const auto& t : g.tris) {
        const Vec3 n = (g.verts[t[1]] - g.verts[t[0]])
                           .cross(g.verts[t[2]] - g.verts[t[0]]);
        REQUIRE(n.norm() > 0);
    }
}

TEST_CASE("box generator tets are positively oriented and tile the volume") {
    const TetMeshData b = make_box_tets(3, 2, 2, 1.2, 0.8, 0.5);
    REQUIRE(b.verts.size() == 4 * 3 * 3);
    REQUIRE(b.tets.size() == 6 * 3 * 2 * 2);
    Real volume = 0;
    for (const auto& t : b.tets) {
        const TetRest r =
            tet_rest(b.verts[t[0]], b.verts[t[1]], b.verts[t[2]], b.verts[t[3]]);
        REQUIRE(r.volume > 0);
        volume += r.volume;
    }
    REQUIRE_THAT(volume, Catch::Matchers::WithinRel(1.2 * 0.8 * 0.5, 1e-12));
}

TEST_CASE("ellipsoid generator keeps a compact interior subset") {
    const TetMeshData e = make_ellipsoid_tets(6, 0.5, 0.3, 0.4);
    REQUIRE(!e.tets.empty());
    std::vector<bool> used(e.verts.size(), false);
    Real volume = 0;
    for (const auto& t : e.tets) {
        for (Index v : t) used[v] = true;
        volume +=
            tet_rest(e.verts[t[0]], e.verts[t[1]], e.verts[t[2]], e.verts[t[3]])
                .volume;
    }
    for (bool u : used) REQUIRE(u); // compaction leaves no orphan vertices
    REQUIRE(volume < 0.5 * 0.3 * 0.4 * 8); // strictly inside the bounding box
    REQUIRE(volume > 0.3 * (4.0 / 3.0) * M_PI * 0.5 * 0.3 * 0.4 * 0.25);
}

TEST_CASE("boundary faces of a tet mesh are wound outward") {
    const TetMeshData b = make_box_tets(1, 1, 1, 1, 1, 1);
    const auto boundary = extract_boundary(b.tets);
    REQUIRE(boundary.size() == 12); // two triangles per cube face
    const Vec3 center = Vec3::Constant(0.5);
    for (const auto& f : boundary) {
        const Vec3 a = b.verts[f[0]], bb = b.verts[f[1]], c = b.verts[f[2]];
        const Vec3 n = (bb - a).cross(c - a);
        REQUIRE(n.dot((a + bb + c) / 3 - center) > 0);
    }
    REQUIRE(extract_edges(boundary).size() == 18); // V - E + F = 2
}

TEST_CASE("hinge extraction finds interior edges with flat rest angles") {
    const TriMeshData g = make_grid(3, 3, 1, 1);
    DeformableMesh m;
    m.name = "flat";
    m.is_shell = true;
    m.rest = g.verts;
    m.tris = g.tris;
    finalize_mesh(m);
    REQUIRE(m.edges.size() == 16);
    REQUIRE(m.hinges.size() == 8);
    for (const auto& r : m.hinge_rest_data) {
        REQUIRE(r.rest_angle == 0.0);
        REQUIRE(r.weight > 0);
    }
    // non-flat pair: fold two triangles along the shared edge
    const Real theta = dihedral_angle(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 1, 0),
                                      Vec3(0.5, -0.6, 0.6));
    REQUIRE(std::abs(theta) > 0.1);
}

TEST_CASE("tet mass lumping splits element mass evenly") {
    DeformableMesh m;
    m.name = "one_tet";
    m.rest = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    m.tets = {{0, 1, 2, 3}};
    m.solid.density = 1000;
    finalize_mesh(m);
    for (Real mass : m.vertex_mass)
        REQUIRE_THAT(mass, Catch::Matchers::WithinRel(1000.0 / 6.0 / 4.0, 1e-15));
    REQUIRE(m.tris.size() == 4);
    REQUIRE(m.edges.size() == 6);
}

TEST_CASE("mesh finalize rejects bad pins and unreferenced vertices") {
    DeformableMesh m;
    m.name = "bad";
    m.rest = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    m.tets = {{0, 1, 2, 3}};
    m.pinned = {7};
    REQUIRE_THROWS_AS(finalize_mesh(m), std::invalid_argument);

    DeformableMesh loose;
    loose.name = "loose";
    loose.rest = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                  Vec3(5, 5, 5)};
    loose.tets = {{0, 1, 2, 3}};
    REQUIRE_THROWS_WITH(finalize_mesh(loose),
                        Catch::Matchers::ContainsSubstring("carries no mass"));
}

TEST_CASE("affine body reduced mass is spd and reproduces the gravity force") {
    AffineBody b;
    b.name = "block";
    TetMeshData data = make_box_tets(2, 2, 2, 0.4, 0.3, 0.2);
    translate(data.verts, Vec3(1, 2, 3)); // rest frame far from the origin
    b.rest = data.verts;
    b.tets = data.tets;
    b.mat.density = 1200;
    finalize_body(b);

    REQUIRE_THAT(b.volume, Catch::Matchers::WithinRel(0.4 * 0.3 * 0.2, 1e-12));
    Eigen::LLT<Mat12> llt(b.reduced_mass);
    REQUIRE(llt.info() == Eigen::Success);
    REQUIRE((b.reduced_mass - b.reduced_mass.transpose()).norm() < 1e-12);

    // M_r * [g; 0] equals the generalized gravity force, so a free body under
    // gravity accelerates without any affine deformation
    const Vec3 g(0, -9.81, 0);
    Vec12 ghat = Vec12::Zero();
    ghat.head<3>() = g;
    const Vec12 residual = b.reduced_mass * ghat - b.gravity_force(g);
    REQUIRE(residual.norm() < 1e-9 * b.gravity_force(g).norm());

    AffineBody empty;
    empty.name = "empty";
    empty.rest = {Vec3(0, 0, 0)};
    REQUIRE_THROWS_AS(finalize_body(empty), std::invalid_argument);
}

TEST_CASE("obj io round trips vertices and triangulates polygons") {
    std::ostringstream out;
    const std::vector<Vec3> verts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0),
                                     Vec3(0, 1, 0.25)};
    const std::vector<std::array<Index, 3>> tris = {{0, 1, 2}, {0, 2, 3}};
    save_obj(out, verts, tris, "patch");

    std::istringstream in(out.str());
    const TriMeshData back = load_obj(in);
    REQUIRE(back.verts.size() == 4);
    REQUIRE(back.tris.size() == 2);
    for (int i = 0; i < 4; ++i) REQUIRE((back.verts[i] - verts[i]).norm() == 0.0);
    REQUIRE(back.tris[0] == tris[0]);
    REQUIRE(back.tris[1] == tris[1]);

    // quads fan-triangulate, v/vt/vn references keep only the vertex index
    std::istringstream quad("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1 2/2 3/3 4/4\n");
    const TriMeshData q = load_obj(quad);
    REQUIRE(q.tris.size() == 2);
    REQUIRE(q.tris[0] == std::array<Index, 3>{0, 1, 2});
    REQUIRE(q.tris[1] == std::array<Index, 3>{0, 2, 3});

    std::istringstream bad("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    REQUIRE_THROWS_WITH(load_obj(bad),
                        Catch::Matchers::ContainsSubstring("line 4"));
}

TEST_CASE("tet file io round trips and reports the offending line") {
    TetMeshData m;
    m.verts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
               Vec3(1, 1, 1)};
    m.tets = {{0, 1, 2, 3}, {1, 2, 3, 4}};
    std::ostringstream out;
    save_tet_mesh(out, m);

    std::istringstream in(out.str());
    const TetMeshData back = load_tet_mesh(in);
    REQUIRE(back.verts.size() == 5);
    REQUIRE(back.tets.size() == 2);
    for (int i = 0; i < 5; ++i) REQUIRE((back.verts[i] - m.verts[i]).norm() == 0.0);
    REQUIRE(back.tets == m.tets);

    std::istringstream bad("2 1\n0 0 0\n1 0 0\n0 1 5 3\n");
    REQUIRE_THROWS_WITH(load_tet_mesh(bad),
                        Catch::Matchers::ContainsSubstring("line 4"));

    std::istringstream truncated("4 2\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n0 1 2 3\n");
    REQUIRE_THROWS_WITH(load_tet_mesh(truncated),
                        Catch::Matchers::ContainsSubstring("ended early"));
}

TEST_CASE("toml subset parser handles tables, arrays and comments") {
    std::istringstream in(R"(# top comment
title = "demo"   # trailing comment
count = 3
ratio = 2.5e-1
flag = true

[alpha]
vec = [1, 2, 3]
names = ["a", "b"]

[[item]]
id = 1
[[item]]
id = 2
)");
    const TomlDoc doc = parse_toml(in);
    REQUIRE(doc.root.str("title", "") == "demo");
    REQUIRE(doc.root.number("count") == 3.0);
    REQUIRE(doc.root.number("ratio") == 0.25);
    REQUIRE(doc.root.boolean("flag", false));
    const TomlTable* alpha = doc.find("alpha");
    REQUIRE(alpha != nullptr);
    REQUIRE(alpha->vec3("vec", Vec3::Zero()) == Vec3(1, 2, 3));
    REQUIRE(alpha->kv.at("names").sarr == std::vector<std::string>{"a", "b"});
    REQUIRE(doc.find_all("item").size() == 2);
    REQUIRE(doc.find_all("item")[1]->number("id") == 2.0);

    std::istringstream bad("good = 1\nbroken value\n");
    REQUIRE_THROWS_WITH(parse_toml(bad),
                        Catch::Matchers::ContainsSubstring("line 2"));
    std::istringstream badval("x = @nope\n");
    REQUIRE_THROWS_WITH(parse_toml(badval),
                        Catch::Matchers::ContainsSubstring("line 1"));
    std::istringstream missing("[t]\na = 1\n");
    REQUIRE_THROWS_WITH(parse_toml(missing).find("t")->number("b"),
                        Catch::Matchers::ContainsSubstring("missing key 'b'"));
}

TEST_CASE("scene loads from toml with generators, pins and ground") {
    std::istringstream in(R"(
[simulation]
dt = 0.005
gravity = [0, -10, 0]
subdomain = 32
friction_mu = 0.2

[ground]
enabled = true
height = -0.5
normal = [0, 2, 0]

[[shell]]
name = "cloth"
generate = "grid"
resolution = [4, 3]
size = [1.0, 0.6]
translate = [0, 1, 0]
pin_box = [-0.01, 0.99, -0.01, 0.01, 1.61, 0.01]
density = 150

[[solid]]
name = "jelly"
generate = "box"
resolution = [2, 2, 2]
size = [0.3, 0.3, 0.3]
youngs = 2e6

[[body]]
name = "brick"
generate = "box"
resolution = [1, 1, 1]
size = [0.2, 0.2, 0.2]
translate = [2, 0, 0]
kappa = 1e9
)");
    const TomlDoc doc = parse_toml(in);
    const Scene scene = scene_from_toml(doc);

    REQUIRE(scene.config.dt == 0.005);
    REQUIRE(scene.config.gravity == Vec3(0, -10, 0));
    REQUIRE(scene.config.subdomain == 32);
    REQUIRE(scene.config.friction_mu == 0.2);
    REQUIRE(scene.ground.enabled);
    REQUIRE(scene.ground.height == -0.5);
    REQUIRE(scene.ground.normal == Vec3(0, 1, 0)); // normalized

    REQUIRE(scene.meshes.size() == 2);
    REQUIRE(scene.bodies.size() == 1);
    const auto& cloth = scene.meshes[0];
    REQUIRE(cloth.is_shell);
    REQUIRE(cloth.n_verts() == 12);
    REQUIRE(cloth.shell.density == 150);
    // pin_box catches the left edge column i = 0 (x = 0 after translate)
    REQUIRE(cloth.pinned == std::vector<Index>{0, 4, 8});

    const auto& jelly = scene.meshes[1];
    REQUIRE(!jelly.is_shell);
    REQUIRE(jelly.solid.youngs == 2e6);
    REQUIRE(jelly.tets.size() == 6 * 8);

    REQUIRE(scene.bodies[0].mat.kappa == 1e9);
    REQUIRE(scene.n_fem_vertices == 12 + 27);
    REQUIRE(scene.mesh_offset == std::vector<Index>{0, 12});
    REQUIRE(scene.body_offset == std::vector<Index>{39});

    // scene extent covers cloth at y=1 through the brick at x=2
    REQUIRE(scene.length_scale > 2.0);

    const SystemState s = make_state(scene);
    REQUIRE(s.x.size() == 39);
    REQUIRE(s.q.size() == 1);
    const auto p = contact_node_positions(scene, s);
    REQUIRE(p.size() == 39 + 8);
    REQUIRE((p[39] - scene.bodies[0].rest[0]).norm() == 0.0); // identity transform

    const DofMap map = make_dof_map(scene);
    REQUIRE(map.n_fem_nodes == 39);
    REQUIRE(map.n_bodies == 1);
    REQUIRE(map.n_blocks() == 39 + 4);
}

TEST_CASE("scene file loads meshes relative to its own directory") {
    TetMeshData m;
    m.verts = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    m.tets = {{0, 1, 2, 3}};
    std::ostringstream tet;
    save_tet_mesh(tet, m);
    write_tmp("single.tet", tet.str());
    const std::string scene_path = write_tmp("rel.toml", R"(
[[solid]]
name = "from_file"
mesh = "single.tet"
)");
    const Scene scene = load_scene(scene_path);
    REQUIRE(scene.meshes.size() == 1);
    REQUIRE(scene.meshes[0].n_verts() == 4);
    REQUIRE(scene.meshes[0].tets.size() == 1);

    REQUIRE_THROWS_AS(load_scene(write_tmp("empty.toml", "# nothing\n")),
                      SceneError);
}

TEST_CASE("unit square scene has a sqrt2 length scale") {
    Scene scene;
    DeformableMesh m;
    m.name = "square";
    m.is_shell = true;
    const TriMeshData g = make_grid(2, 2, 1, 1);
    m.rest = g.verts;
    m.tris = g.tris;
    scene.meshes.push_back(m);
    scene.finalize();
    REQUIRE_THAT(scene.length_scale, Catch::Matchers::WithinRel(std::sqrt(2.0), 1e-15));
    REQUIRE_THAT(scene.dhat(), Catch::Matchers::WithinRel(std::sqrt(2.0) * 1e-3, 1e-15));
}

TEST_CASE("stats writer emits the schema header and parsable rows") {
    const std::string path = (tmp_dir() / "stats.csv").string();
    {
        StatsWriter w(path);
        w.row(0, 3, 42, 0.5, 1.25, 0.125, 0.0625, 1e-3);
    }
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "# schema: stats-v1");
    REQUIRE(std::getline(in, line));
    REQUIRE(line ==
            "step,newtonIters,cgIters,assemblyTime,pcgTime,ccdTime,"
            "lineSearchTime,minDistance");
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "0,3,42,0.5,1.25,0.125,0.0625,0.001");
}

TEST_CASE("frame export writes named objects with zero padded numbering") {
    Scene scene;
    DeformableMesh m;
    m.name = "patch";
    m.is_shell = true;
    const TriMeshData g = make_grid(2, 2, 1, 1);
    m.rest = g.verts;
    m.tris = g.tris;
    scene.meshes.push_back(m);

    AffineBody b;
    b.name = "cube";
    const TetMeshData box = make_box_tets(1, 1, 1, 0.2, 0.2, 0.2);
    b.rest = box.verts;
    b.tets = box.tets;
    scene.bodies.push_back(b);
    scene.finalize();

    SystemState s = make_state(scene);
    s.q[0].head<3>() = Vec3(0, 3, 0); // translated body
    const std::string dir = (tmp_dir() / "frames").string();
    const std::string path = export_frame(scene, s, dir, 7);
    REQUIRE(path.find("frame_00007.obj") != std::string::npos);

    const TriMeshData back = load_obj_file(path);
    REQUIRE(back.verts.size() == 4 + 8);
    REQUIRE(back.tris.size() == 2 + 12);
    REQUIRE((back.verts[4 + 0] - Vec3(0, 3, 0)).norm() < 1e-8);

    std::ifstream in(path);
    std::string first;
    REQUIRE(std::getline(in, first));
    REQUIRE(first == "o patch");
}

TEST_CASE("scripted motion moves only pinned vertices") {
    Scene scene;
    DeformableMesh m;
    m.name = "strip";
    m.is_shell = true;
    const TriMeshData g = make_grid(3, 2, 1, 1);
    m.rest = g.verts;
    m.tris = g.tris;
    m.pinned = {0, 3};
    m.script.translate_per_step = Vec3(0.1, 0, 0);
    scene.meshes.push_back(m);
    scene.finalize();

    SystemState s = make_state(scene);
    const std::vector<Vec3> before = s.x;
    apply_scripts(scene, s);
    REQUIRE((s.x[0] - (before[0] + Vec3(0.1, 0, 0))).norm() == 0.0);
    REQUIRE((s.x[3] - (before[3] + Vec3(0.1, 0, 0))).norm() == 0.0);
    for (Index i : {1, 2, 4, 5}) REQUIRE((s.x[i] - before[i]).norm() == 0.0);

    // rotation about a pinned vertex keeps that vertex fixed
    scene.meshes[0].script = ScriptedMotion{};
    scene.meshes[0].script.rotate_deg_per_step = 90;
    scene.meshes[0].script.rotate_axis = Vec3::UnitZ();
    scene.meshes[0].script.rotate_center = before[0];
    SystemState r = make_state(scene);
    apply_scripts(scene, r);
    REQUIRE((r.x[0] - before[0]).norm() < 1e-12);
    // vertex 3 sits at (0,1,0) relative row; rotating (0,1,0)-about-origin by
    // 90 degrees around z sends the offset (0,1,0) to (-1,0,0)
    REQUIRE((r.x[3] - (before[0] + Vec3(-1, 0, 0))).norm() < 1e-12);
}
