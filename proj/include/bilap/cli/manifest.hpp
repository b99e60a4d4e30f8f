#pragma once

#include <string>
#include <vector>

#include "bilap/cli/config.hpp"

namespace bilap::cli {

struct OutputFile {
    std::string name;  // relative to the output directory
    std::string fnv1a;
};

// Everything needed to reproduce a run: the command, the canonical config and
// the hashes of what it wrote. No timestamps, so re-runs compare byte for byte.
struct Manifest {
    std::string command;
    std::string config_text;  // Config::canonical_text()
    std::string config_hash;
    long seed = 0;
    std::string library_version;
    std::string compiler;
    std::string eigen_version;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // path, fnv1a
    std::vector<OutputFile> outputs;
    int exit_code = 0;
};

Manifest make_manifest(const std::string& command, const Config& c);
void write_manifest(const Manifest& m, const std::string& dir);
Manifest read_manifest(const std::string& path);

std::string file_hash(const std::string& path);

// Marker left beside partial outputs when a command fails.
void write_failure_marker(const std::string& dir, int exit_code, const std::string& message);

}  // namespace bilap::cli
