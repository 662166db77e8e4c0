#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "CLI11.hpp"

#include <adipc/io/scene_io.hpp>
#include <adipc/solver/newton.hpp>

#include "verify_suites.hpp"

namespace {

using namespace adipc;

// Exit codes are a stable contract: 0 success, 1 usage, 2 scene error,
// 3 solver or verification failure.
enum ExitCode { kOk = 0, kUsage = 1, kSceneError = 2, kSolverError = 3 };

struct RunManifest {
    std::string scene;
    std::string out_dir = "out";
    int frames = 10;
    std::string precond = "cemas16";
    int subdomain = 0; // 0 keeps the preconditioner's own default
    int threads = 0;
    bool deterministic = false;
    long seed = -1; // provenance only; the stepper itself draws no randomness
    bool dump_hessian = false;
};

int do_run(const RunManifest& man) {
    PrecondKind kind = PrecondKind::Cemas;
    int subdomain = 16;
    if (man.precond == "cemas16") {
        kind = PrecondKind::Cemas;
        subdomain = 16;
    } else if (man.precond == "cemas32") {
        kind = PrecondKind::Cemas;
        subdomain = 32;
    } else if (man.precond == "blockJacobi") {
        kind = PrecondKind::BlockJacobi;
    } else if (man.precond == "masMortonFixture") {
        kind = PrecondKind::MasChunk;
    }
    if (man.subdomain > 0) subdomain = man.subdomain;

    Scene scene;
    try {
        scene = load_scene(man.scene);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSceneError;
    }
    scene.config.subdomain = subdomain;

    ExecPolicy pol;
    pol.deterministic = man.deterministic;
    if (man.threads > 0) pol.threads = man.threads;

    try {
        std::filesystem::create_directories(man.out_dir);
        TimeStepper stepper(scene, kind, pol);
        SystemState s = make_state(scene);
        StatsWriter stats(
            (std::filesystem::path(man.out_dir) / "stats.csv").string(),
            man.seed);

        long newton_total = 0, cg_total = 0;
        double assembly_s = 0, pcg_s = 0, ccd_s = 0, line_search_s = 0;
        int pcg_flagged = 0;
        Real min_dist = std::numeric_limits<Real>::max();
        const auto t0 = std::chrono::steady_clock::now();

        for (int f = 0; f < man.frames; ++f) {
            const StepStats st = stepper.step(s);
            // Wall-clock timings can never reproduce bitwise; deterministic
            // runs zero them so two identical invocations emit identical CSVs.
            const bool det = man.deterministic;
            stats.row(f, st.newton_iters, st.cg_iters,
                      det ? 0.0 : st.assembly_s, det ? 0.0 : st.pcg_s,
                      det ? 0.0 : st.ccd_s, det ? 0.0 : st.line_search_s,
                      st.min_distance);
            export_frame(scene, s, man.out_dir, f);
            newton_total += st.newton_iters;
            cg_total += st.cg_iters;
            assembly_s += st.assembly_s;
            pcg_s += st.pcg_s;
            ccd_s += st.ccd_s;
            line_search_s += st.line_search_s;
            min_dist = std::min(min_dist, st.min_distance);
            if (!st.pcg_ok) ++pcg_flagged;
            if (!st.converged) {
                std::fprintf(stderr,
                             "error: newton did not converge at step %d (cap %d)\n",
                             f, scene.config.max_newton);
                return kSolverError;
            }
        }
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - t0)
                                .count();

        if (man.dump_hessian) {
            const std::string path =
                (std::filesystem::path(man.out_dir) / "hessian.txt").string();
            std::ofstream h(path);
            if (!h) throw std::runtime_error("cannot open " + path);
            dump_block_coo(stepper.last_hessian(), h);
        }

        std::printf("summary\n");
        std::printf("  scene         %s\n", man.scene.c_str());
        std::printf("  preconditioner %s (subdomain %d)\n", man.precond.c_str(),
                    subdomain);
        std::printf("  steps         %d\n", man.frames);
        std::printf("  newton iters  %ld total, %.2f per step\n", newton_total,
                    man.frames ? double(newton_total) / man.frames : 0.0);
        std::printf("  cg iters      %ld total, %.1f per newton\n", cg_total,
                    newton_total ? double(cg_total) / newton_total : 0.0);
        std::printf("  assembly      %.3f s\n", assembly_s);
        std::printf("  pcg           %.3f s\n", pcg_s);
        std::printf("  ccd           %.3f s\n", ccd_s);
        std::printf("  line search   %.3f s\n", line_search_s);
        if (min_dist < std::numeric_limits<Real>::max())
            std::printf("  min distance  %.3e\n", min_dist);
        if (pcg_flagged)
            std::printf("  pcg max-iter  flagged in %d steps\n", pcg_flagged);
        std::printf("  wall clock    %.3f s\n", wall);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolverError;
    }
    return kOk;
}

int do_verify(const std::string& suite, const std::string& scene_path, int threads,
              long seed) {
    ExecPolicy pol;
    if (threads > 0) pol.threads = threads;
    std::printf("verify %s\n", suite.c_str());
    vsuite::SuiteResult res;
    try {
        if (suite == "kernel-oracles")
            res = vsuite::kernel_oracles(true, seed);
        else if (suite == "sl-eigensystem")
            res = vsuite::sl_eigensystem(true, seed);
        else if (suite == "fd-checks")
            res = vsuite::fd_checks(true, seed);
        else if (suite == "mas-fixture")
            res = vsuite::mas_fixture(true);
        else
            res = vsuite::stretch_study(scene_path, true, 80, pol);
    } catch (const SceneError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSceneError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolverError;
    }
    std::printf("%s: %s (%s)\n", suite.c_str(), res.pass ? "pass" : "FAIL",
                res.summary.c_str());
    return res.pass ? kOk : kSolverError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stiff affine-deformable contact simulator"};
    app.require_subcommand(1);

    RunManifest man;
    CLI::App* run = app.add_subcommand("run", "simulate a scene, write frames and stats");
    run->add_option("--scene", man.scene, "scene file (toml)")->required();
    run->add_option("--frames", man.frames, "number of steps to simulate")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", man.out_dir, "output directory (default out)");
    run->add_option("--precond", man.precond, "preconditioner choice")
        ->check(CLI::IsMember(
            {"cemas16", "cemas32", "blockJacobi", "masMortonFixture"}));
    run->add_option("--subdomain", man.subdomain, "subdomain capacity override")
        ->check(CLI::IsMember({16, 32}));
    run->add_option("--threads", man.threads, "worker thread count")
        ->envname("ADIPC_THREADS");
    run->add_flag("--deterministic", man.deterministic,
                  "sequential reductions, bitwise reproducible output");
    run->add_option("--seed", man.seed, "recorded in the stats.csv header");
    run->add_flag("--dump-hessian", man.dump_hessian,
                  "write the final system matrix to <out>/hessian.txt");

    std::string suite;
    std::string verify_scene = "scenes/drape.toml";
    int verify_threads = 0;
    CLI::App* verify = app.add_subcommand("verify", "run a scripted check suite");
    verify
        ->add_option("suite", suite,
                     "one of fd-checks, kernel-oracles, sl-eigensystem, "
                     "mas-fixture, stretch-study")
        ->required()
        ->check(CLI::IsMember({"fd-checks", "kernel-oracles", "sl-eigensystem",
                               "mas-fixture", "stretch-study"}));
    verify->add_option("--scene", verify_scene,
                       "hanging cloth scene used by stretch-study");
    verify->add_option("--threads", verify_threads, "worker thread count")
        ->envname("ADIPC_THREADS");
    long verify_seed = -1;
    verify->add_option("--seed", verify_seed,
                       "seed for the randomized suites (default: fixed)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (verify->parsed())
        return do_verify(suite, verify_scene, verify_threads, verify_seed);
    return do_run(man);
}
