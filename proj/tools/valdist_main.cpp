#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "valdist/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"valdist - value-distribution and normal-family analysis of meromorphic functions"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "execute every task in a config file");
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool parallel = false, verbose = false;
    run->add_option("config", config_path, "JSON config file (see docs/config.schema.json)")
        ->required();
    run->add_option("--out", out_dir, "output directory (overrides settings.output_dir)");
    run->add_option("--seed", seed, "seed for deterministic contour nudges");
    run->add_flag("--parallel", parallel, "run independent tasks concurrently");
    run->add_flag("--verbose", verbose, "progress lines on stderr");

    CLI11_PARSE(app, argc, argv);

    valdist::RunOverrides ov;
    if (!out_dir.empty()) ov.out_dir = out_dir;
    if (run->count("--seed")) ov.seed = seed;
    if (parallel) ov.parallel = true;
    ov.verbose = verbose;

    try {
        const valdist::RunResult res = valdist::run_config_file(config_path, ov);
        if (verbose)
            std::fprintf(stderr, "[valdist] %zu report(s) written\n", res.report_files.size());
        return res.exit_code;
    } catch (const valdist::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const valdist::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
