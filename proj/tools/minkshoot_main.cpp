#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "minkshoot/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Radial nodal solutions of the Minkowski-curvature equation by shooting"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<int> threads;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", threads, "OpenMP thread count")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for randomized validation");

    for (const char* name : {"solve", "sweep", "periodic", "validate", "plot"}) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
    }
    app.get_subcommand("solve")->description("scan + bisection for the requested nodal classes");
    app.get_subcommand("sweep")->description("solution counts over a lambda grid");
    app.get_subcommand("periodic")->description("twist check and fixed points of the periodic return map");
    app.get_subcommand("validate")->description("invariant battery; exit 0 only if every check passes");
    app.get_subcommand("plot")->description("re-render SVG plots from an output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    minkshoot::cli::RunConfig cfg;
    try {
        if (config_path.empty()) {
            if (command != "plot") {
                std::cerr << "error: --config is required for " << command << '\n';
                return 1;
            }
            cfg.out_dir = out_dir;
            if (threads) cfg.threads = *threads;
            if (seed) cfg.seed = *seed;
        } else {
            cfg = minkshoot::cli::load_config(config_path, out_dir, threads, seed);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return minkshoot::cli::run(command, cfg);
}
