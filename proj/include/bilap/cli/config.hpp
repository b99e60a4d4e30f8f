#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bilap/energy.hpp"
#include "bilap/flow.hpp"
#include "bilap/morse.hpp"

namespace bilap::cli {

enum class KeyType { Int, Real, String, RealList };

struct KeySpec {
    std::string key;
    KeyType type;
    std::string default_value;
    std::string help;
};

// Every recognized key with its type and default, in canonical order.
const std::vector<KeySpec>& config_schema();

// Flat typed key = value configuration. Values are kept as validated text so
// the canonical form (and its hash) does not depend on floating-point output.
class Config {
public:
    Config();  // all defaults

    // "key = value" lines; '#' starts a comment. Unknown keys, duplicate keys
    // and ill-typed values raise ValidationError. Returns the keys set.
    std::vector<std::string> merge_text(const std::string& text, const std::string& origin);
    std::vector<std::string> merge_file(const std::string& path);
    void set(const std::string& key, const std::string& value);

    bool is_default(const std::string& key) const;
    long get_int(const std::string& key) const;
    double get_real(const std::string& key) const;
    const std::string& get_string(const std::string& key) const;
    std::vector<double> get_list(const std::string& key) const;
    // A list padded with zeros to length n (longer lists are rejected).
    Vec get_point(const std::string& key, int n) const;

    // One "key = value" line per key in schema order.
    std::string canonical_text() const;
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t h);

// Typed views of a validated config.
int dimension(const Config& c);
EnergySpec energy_spec(const Config& c);
FlowSpec flow_spec(const Config& c);
AssumptionOptions assumption_options(const Config& c);

}  // namespace bilap::cli
