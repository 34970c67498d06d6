#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include "json.hpp"
#include "minkshoot/model.hpp"
#include "minkshoot/rotation.hpp"
#include "minkshoot/shoot.hpp"

namespace minkshoot::cli {

enum ExitCode : int { Ok = 0, Failure = 1, Incomplete = 3 };

struct RunConfig {
    nlohmann::json doc = nlohmann::json::object();
    std::filesystem::path base_dir = ".";  // relative paths in the config resolve here
    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 42;
    int threads = 0;  // 0 keeps the OpenMP default
};

/// Reads the JSON config at `path`. Flags given on the command line override
/// the `seed` and `threads` keys of the document.
RunConfig load_config(const std::filesystem::path& path, const std::filesystem::path& out,
                      std::optional<int> threads = {}, std::optional<std::uint64_t> seed = {});

/// Radial problem of the config: inline object or path to a problem file.
ProblemSpec config_problem(const RunConfig& config);
SolverConfig solver_config(const RunConfig& config);
/// Comparison bounds from validate.rotation (expressions in s).
BoundPair config_bounds(const RunConfig& config);

int cmd_solve(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_periodic(const RunConfig& config);
int cmd_validate(const RunConfig& config);
int cmd_plot(const RunConfig& config);

/// Applies the thread count, runs the command, writes metadata.json (the only
/// output carrying timestamps) and maps exceptions to exit code 1.
int run(std::string_view command, const RunConfig& config);

}  // namespace minkshoot::cli
