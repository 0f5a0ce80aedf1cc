#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "cshe/driver.hpp"

// Exit codes: 0 pass, 1 error (bad config, missing file), 2 suite failure.
int main(int argc, char** argv) {
    CLI::App app{"corner-singularity decomposition toolkit for the stochastic heat equation"};
    app.require_subcommand(1);
    app.fallthrough(); // accept global flags after the subcommand

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    app.add_option("--config", config_path, "run configuration file (key = value sections)");
    app.add_option("--out", out_dir, "output directory (overrides run.output)");
    app.add_option("--seed", seed, "master seed (overrides run.seed)")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--threads", threads, "worker threads (overrides run.threads, 0 = hardware)");

    auto* sim = app.add_subcommand("simulate", "sample trajectories into the binary store");
    auto* dec = app.add_subcommand("decompose", "split stored trajectories and emit diagnostics");
    auto* ver = app.add_subcommand("verify", "run an estimate suite");
    std::string suite;
    ver->add_option("suite", suite, "helmholtz | grisvard | main-estimate | hs-operator")
        ->required();
    auto* exa = app.add_subcommand("example", "run a worked experiment");
    int which = 1;
    exa->add_option("which", which, "1 or 2")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cshe::RunConfig config = config_path.empty()
                                     ? cshe::RunConfig{}
                                     : cshe::RunConfig::from_file(config_path);
        if (!out_dir.empty()) config.output = out_dir;
        if (seed_set) config.seed = seed;
        if (threads >= 0) config.threads = threads;
        config.validate();

        bool pass = true;
        if (sim->parsed()) pass = cshe::cmd_simulate(config);
        if (dec->parsed()) pass = cshe::cmd_decompose(config);
        if (ver->parsed()) pass = cshe::cmd_verify(config, suite);
        if (exa->parsed()) pass = cshe::cmd_example(config, which);
        if (!pass) {
            std::fprintf(stderr, "suite failed (see reports in %s)\n", config.output.c_str());
            return 2;
        }
        return 0;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
}
