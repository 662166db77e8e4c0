#include <catch2/catch_amalgamated.hpp>

#include <adipc/io/mesh_io.hpp>
#include <adipc/io/scene_io.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using namespace adipc;

namespace {

int cli(const std::string& args) {
    const std::string cmd =
        std::string(ADIPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "adipc_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// 10x10 pinned swatch, small enough that one cli invocation stays subsecond.
fs::path small_scene() {
    static fs::path path;
    if (path.empty()) {
        path = fs::temp_directory_path() / "adipc_cli" / "swatch.toml";
        fs::create_directories(path.parent_path());
        std::ofstream f(path);
        f << "[simulation]\n"
             "dt = 0.01\n"
             "\n"
             "[[shell]]\n"
             "name = \"swatch\"\n"
             "generate = \"grid\"\n"
             "resolution = [10, 10]\n"
             "size = [0.3, 0.3]\n"
             "pin = [90, 99]\n";
    }
    return path;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Data rows of a stats.csv, comments and header stripped, split on commas.
std::vector<std::vector<std::string>> stats_rows(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> cols;
        std::stringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) cols.push_back(tok);
        rows.push_back(cols);
    }
    return rows;
}

long total_cg(const fs::path& stats) {
    long total = 0;
    for (const auto& r : stats_rows(stats)) total += std::stol(r.at(2));
    return total;
}

} // namespace

TEST_CASE("run writes the requested frames and a versioned stats file") {
    const fs::path out = fresh_dir("run");
    REQUIRE(cli("run --scene " + small_scene().string() +
                " --frames 4 --out " + out.string()) == 0);

    for (int f = 0; f < 4; ++f) REQUIRE(fs::exists(out / frame_file_name(f)));
    REQUIRE(!fs::exists(out / frame_file_name(4)));

    const std::string stats = slurp(out / "stats.csv");
    REQUIRE(stats.rfind("# schema: stats-v1\n", 0) == 0);
    const auto rows = stats_rows(out / "stats.csv");
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        REQUIRE(r.size() == 8);
        REQUIRE(std::stod(r[7]) > 0); // min contact distance stays positive
    }
    REQUIRE(rows[3][0] == "3");

    // the frame is a loadable obj with one vertex per cloth node
    const TriMeshData frame = load_obj_file((out / frame_file_name(3)).string());
    REQUIRE(frame.verts.size() == 100);
    REQUIRE(!frame.tris.empty());
}

TEST_CASE("exit codes distinguish usage errors from scene errors") {
    REQUIRE(cli("") == 1);
    REQUIRE(cli("no-such-command") == 1);
    REQUIRE(cli("run --scene x.toml --precond zebra") == 1);
    REQUIRE(cli("run --scene x.toml --subdomain 24") == 1);
    REQUIRE(cli("verify no-such-suite") == 1);

    const fs::path missing =
        fs::temp_directory_path() / "adipc_cli" / "missing.toml";
    fs::remove(missing);
    REQUIRE(cli("run --scene " + missing.string()) == 2);

    const fs::path bad = fresh_dir("bad") / "bad.toml";
    std::ofstream(bad) << "[[shell]]\nname = \"x\"\n"; // no geometry source
    REQUIRE(cli("run --scene " + bad.string()) == 2);
}

TEST_CASE("deterministic reruns reproduce output byte for byte") {
    const fs::path a = fresh_dir("det_a");
    const fs::path b = fresh_dir("det_b");
    const std::string args = "run --scene " + small_scene().string() +
                             " --frames 3 --deterministic --seed 11 --out ";
    REQUIRE(cli(args + a.string()) == 0);
    REQUIRE(cli(args + b.string()) == 0);

    const std::string sa = slurp(a / "stats.csv");
    REQUIRE(sa == slurp(b / "stats.csv"));
    REQUIRE(sa.find("# seed: 11\n") != std::string::npos);
    REQUIRE(slurp(a / frame_file_name(2)) == slurp(b / frame_file_name(2)));
}

TEST_CASE("preconditioners agree on the final geometry") {
    const fs::path a = fresh_dir("cemas");
    const fs::path b = fresh_dir("jacobi");
    const int frames = 6;
    const std::string base = "run --scene " + small_scene().string() +
                             " --frames " + std::to_string(frames);
    REQUIRE(cli(base + " --precond cemas16 --out " + a.string()) == 0);
    REQUIRE(cli(base + " --precond blockJacobi --out " + b.string()) == 0);

    const TriMeshData ma =
        load_obj_file((a / frame_file_name(frames - 1)).string());
    const TriMeshData mb =
        load_obj_file((b / frame_file_name(frames - 1)).string());
    REQUIRE(ma.verts.size() == mb.verts.size());
    Real worst = 0;
    for (std::size_t i = 0; i < ma.verts.size(); ++i)
        worst = std::max(worst, (ma.verts[i] - mb.verts[i]).norm());

    const Real l = load_scene(small_scene().string()).length_scale;
    INFO("max vertex deviation " << worst << " vs budget " << 1e-4 * l);
    REQUIRE(worst <= 1e-4 * l);

    // same trajectory, different Krylov work
    REQUIRE(total_cg(a / "stats.csv") != total_cg(b / "stats.csv"));
}

TEST_CASE("dump-hessian leaves a parseable system matrix behind") {
    const fs::path out = fresh_dir("dump");
    REQUIRE(cli("run --scene " + small_scene().string() +
                " --frames 1 --dump-hessian --out " + out.string()) == 0);

    std::ifstream f(out / "hessian.txt");
    REQUIRE(f.good());
    long n_rows = 0, n_blocks = 0;
    REQUIRE((f >> n_rows >> n_blocks));
    REQUIRE(n_rows == 100);
    REQUIRE(n_blocks >= n_rows); // at least the diagonal is present
    double first_entry = 0;
    long r = 0, c = 0;
    REQUIRE((f >> r >> c >> first_entry));
    REQUIRE(r >= 0);
    REQUIRE(c >= r); // upper-triangle storage
}

TEST_CASE("verify suites run through the cli") {
    REQUIRE(cli("verify mas-fixture") == 0);
    REQUIRE(cli("verify fd-checks") == 0);
}
