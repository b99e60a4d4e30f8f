#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bilap/cli/config.hpp"

namespace bilap::cli {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

const std::vector<std::string>& command_names();

// $BILAP_OUTPUT_DIR, else "bilap-out".
std::string default_output_dir();

// Runs one subcommand into dir and writes manifest.json there; on failure the
// partial outputs stay and a FAILED marker is added. Returns the exit code.
int run_command(const std::string& command, const Config& c, const std::string& dir, std::ostream& out,
                std::ostream& err);

// Re-runs a manifest into dir and compares output hashes byte for byte.
int replay_manifest(const std::string& manifest_path, const std::string& dir, std::ostream& out,
                    std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace bilap::cli
