#pragma once

#include "lattice_lab/config.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lattice_lab {

enum class Command { Params, Stationary, Evolve, Flow, Residuals, Scan, Sweep };

[[nodiscard]] std::string_view to_string(Command c) noexcept;
[[nodiscard]] Command parse_command(std::string_view name);
[[nodiscard]] const std::vector<std::string>& command_names();

struct RunOptions {
    /// Overrides the config's output_dir.
    std::optional<std::filesystem::path> out_dir;
    unsigned threads = 1;
};

struct RunResult {
    int exit_code = 0;
    std::filesystem::path run_dir;
};

/// 16 hex digits of FNV-1a over the command name and the compact dump of the
/// config document.
[[nodiscard]] std::string config_hash(Command command, const nlohmann::json& raw);

/// Executes one command and writes its artifacts plus metadata.json into
/// <out>/<command>-<hash>. Diagnostics go to err; `params` also prints its
/// JSON to out. Exit codes: 0 success, 1 validation error, 2 numerical
/// failure.
RunResult run(Command command, const RunConfig& config, const RunOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace lattice_lab
