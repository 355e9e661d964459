#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace fairres::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitInputError = 2;

// Runs `command` with a fully resolved configuration, writing its artifacts
// and <command>.manifest.json into out_dir. Library errors propagate.
int execute(const std::string& command, const nlohmann::json& config,
            const std::filesystem::path& out_dir, std::ostream& out);

// Parses the command line, dispatches, and maps errors to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fairres::cli
