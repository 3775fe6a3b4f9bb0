#pragma once

#include "vh/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace vh {

enum ExitCode : int { ExitPass = 0, ExitVerification = 1, ExitConfig = 2, ExitIntegrity = 3 };

// Each command writes <name>.json plus CSV tables into out and returns an exit code.
int cmd_norm(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_decompose(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_paraproduct(const RunConfig& cfg, const std::filesystem::path& out);
int cmd_verify_czo(const RunConfig& cfg, const std::filesystem::path& out);

struct CommandOptions {
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::optional<int> grid_level;
    std::optional<std::uint64_t> seed;
};

// Loads the config, dispatches, and maps exceptions onto the exit-code contract.
int run_command(const CommandOptions& opt, std::ostream& err);

} // namespace vh
