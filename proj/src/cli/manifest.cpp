#include "bilap/cli/manifest.hpp"

#include <Eigen/Core>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "bilap/errors.hpp"

#ifndef BILAP_VERSION
#define BILAP_VERSION "unknown"
#endif

namespace bilap::cli {

using nlohmann::ordered_json;

namespace {

std::string read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string file_hash(const std::string& path) { return hex64(fnv1a64(read_all(path))); }

Manifest make_manifest(const std::string& command, const Config& c) {
    Manifest m;
    m.command = command;
    m.config_text = c.canonical_text();
    m.config_hash = hex64(fnv1a64(m.config_text));
    m.seed = c.get_int("seed");
    m.library_version = BILAP_VERSION;
#if defined(__clang__)
    m.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
    m.compiler = "gcc " __VERSION__;
#else
    m.compiler = "unknown";
#endif
    m.eigen_version = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION);
    return m;
}

void write_manifest(const Manifest& m, const std::string& dir) {
    ordered_json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["versions"] = {{"bilap", m.library_version}, {"compiler", m.compiler}, {"eigen", m.eigen_version}};
    j["config"] = m.config_text;
    ordered_json inputs = ordered_json::array();
    for (const auto& [path, h] : m.input_hashes) inputs.push_back({{"path", path}, {"fnv1a", h}});
    j["inputs"] = inputs;
    ordered_json outputs = ordered_json::array();
    for (const OutputFile& f : m.outputs) outputs.push_back({{"name", f.name}, {"fnv1a", f.fnv1a}});
    j["outputs"] = outputs;
    j["exit_code"] = m.exit_code;
    std::ofstream out(dir + "/manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
    if (!out) throw NumericalError("cannot write manifest in '" + dir + "'");
}

Manifest read_manifest(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_all(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest '" + path + "': " + e.what());
    }
    Manifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.config_text = j.at("config").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<long>();
        m.library_version = j.at("versions").at("bilap").get<std::string>();
        m.compiler = j.at("versions").at("compiler").get<std::string>();
        m.eigen_version = j.at("versions").at("eigen").get<std::string>();
        for (const auto& in : j.at("inputs"))
            m.input_hashes.emplace_back(in.at("path").get<std::string>(), in.at("fnv1a").get<std::string>());
        for (const auto& out : j.at("outputs"))
            m.outputs.push_back({out.at("name").get<std::string>(), out.at("fnv1a").get<std::string>()});
        m.exit_code = j.at("exit_code").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("manifest '" + path + "': " + e.what());
    }
    if (hex64(fnv1a64(m.config_text)) != m.config_hash)
        throw ValidationError("manifest '" + path + "': config hash mismatch");
    return m;
}

void write_failure_marker(const std::string& dir, int exit_code, const std::string& message) {
    std::ofstream out(dir + "/FAILED");
    out << "exit_code " << exit_code << "\n" << message << "\n";
}

}  // namespace bilap::cli
