#pragma once

// Command-line front end. Subcommands: synth, pretrain, finetune, eval,
// compare, retrieve, replay. Exit codes: 0 success, 1 usage error,
// 2 data or contract error.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "tcssl/experiment.hpp"

namespace tcssl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the tool with `args` (without the program name).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Where a command's run manifest is written, given its --out value.
std::filesystem::path run_manifest_path(const std::string& command, const std::filesystem::path& out);

}  // namespace tcssl
