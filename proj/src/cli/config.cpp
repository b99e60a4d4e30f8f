#include "bilap/cli/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bilap/constants.hpp"
#include "bilap/errors.hpp"

namespace bilap::cli {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

bool parse_int(const std::string& s, long& out) {
    if (s.empty()) return false;
    errno = 0;
    char* end = nullptr;
    out = std::strtol(s.c_str(), &end, 10);
    return errno == 0 && end == s.c_str() + s.size();
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

const KeySpec& find_key(const std::string& key) {
    for (const KeySpec& k : config_schema())
        if (k.key == key) return k;
    throw ValidationError("unknown config key '" + key + "'");
}

void check_value(const KeySpec& k, const std::string& v) {
    double r;
    long i;
    switch (k.type) {
        case KeyType::Int:
            if (!parse_int(v, i)) throw ValidationError(k.key + ": expected an integer, got '" + v + "'");
            break;
        case KeyType::Real:
            if (!parse_real(v, r)) throw ValidationError(k.key + ": expected a real number, got '" + v + "'");
            break;
        case KeyType::RealList:
            if (v.empty()) break;
            for (const std::string& part : split_commas(v))
                if (!parse_real(part, r))
                    throw ValidationError(k.key + ": expected comma-separated reals, got '" + v + "'");
            break;
        case KeyType::String:
            break;
    }
}

void require_positive(const Config& c, const std::string& key) {
    if (!(c.get_real(key) > 0.0)) throw ValidationError(key + " must be positive");
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
    using T = KeyType;
    static const std::vector<KeySpec> schema = {
        {"dim", T::Int, "7", "dimension n, 5..10 (flows need n >= 7)"},
        {"k_field", T::String, "single-bump", "catalogue name, optionally with parameters"},
        {"seed", T::Int, "1", "seed for sampled checks"},
        {"output_dir", T::String, "", "output directory (else --out, else $BILAP_OUTPUT_DIR)"},

        {"quad.radial_nodes", T::Int, "10", "Gauss nodes per radial panel"},
        {"quad.angular_nodes", T::Int, "16", "Gauss nodes per polar angle"},
        {"quad.panel_width", T::Real, "0.5", "radial panel width in log(lambda rho)"},
        {"quad.rel_tol", T::Real, "1e-11", "relative quadrature tolerance"},

        {"ode.initial_step", T::Real, "1e-3", ""},
        {"ode.rel_tol", T::Real, "1e-8", ""},
        {"ode.abs_tol", T::Real, "1e-10", ""},
        {"ode.max_steps", T::Int, "200000", ""},
        {"ode.t_max", T::Real, "1e4", ""},

        {"flow.d0", T::Real, "0.1", ""},
        {"flow.C1", T::Real, "10", ""},
        {"flow.C2", T::Real, "100", ""},
        {"flow.M", T::Real, "100", ""},
        {"flow.M1", T::Real, "10", ""},
        {"flow.M2", T::Real, "100", ""},
        {"flow.m", T::Real, "100", ""},
        {"flow.eps", T::Real, "0.05", "V(p, eps) threshold"},
        {"flow.lambda_cap", T::Real, "1e3", "CPI detection scale"},
        {"flow.eta", T::Real, "1e-2", "V_eta negative-part threshold"},
        {"flow.cpi_tol", T::Real, "1e-3", "|a - y| at CPI detection"},
        {"flow.drift", T::Real, "1", "grad K drift near critical points"},
        {"flow.band", T::Real, "0.1", "relative half-width of blending bands"},
        {"flow.lambda_escape", T::Real, "1e6", "budget stop without CPI"},

        {"green.x", T::RealList, "0", "first probe point (zero padded)"},
        {"green.y", T::RealList, "0.3,0.2", "second probe point (zero padded)"},

        {"expansion.lambdas", T::RealList, "25,50,100,200", "lambda ladder"},
        {"expansion.a", T::RealList, "0.1,0.05", "bubble center"},
        {"expansion.mode", T::String, "exact", "exact | asymptotic projection"},

        {"init.mode", T::String, "bubbles", "bubbles | f-lambda"},
        {"init.p", T::Int, "1", "number of bubbles (bubbles mode)"},
        {"init.a1", T::RealList, "0.3,0.1", ""},
        {"init.lambda1", T::Real, "30", ""},
        {"init.a2", T::RealList, "", ""},
        {"init.lambda2", T::Real, "30", ""},
        {"init.alpha", T::Real, "0.5", "f-lambda weight"},
        {"init.y0", T::RealList, "", "f-lambda first center; empty means the absolute max of K"},
        {"init.x", T::RealList, "", "f-lambda second center"},
        {"init.lambda", T::Real, "50", "f-lambda concentration"},

        {"batch.point", T::Int, "1", "critical point id y_i (K-descending order)"},
        {"batch.radius", T::Real, "0.05", "x samples on a sphere of this radius around y_i"},
        {"batch.samples", T::Int, "4", "number of x samples"},
        {"batch.alphas", T::RealList, "0.25,0.5,0.75", "alpha grid"},
        {"batch.lambda", T::Real, "50", ""},

        {"morse.seeds_per_axis", T::Int, "9", ""},
        {"assumptions.boundary_samples", T::Int, "2000", ""},
        {"assumptions.shooting_directions", T::Int, "8", ""},

        {"decompose.grid", T::String, "", "axisymmetric grid file"},
        {"decompose.p", T::Int, "1", "number of bubbles"},
        {"decompose.mode", T::String, "exact", "exact | asymptotic projection"},
    };
    return schema;
}

Config::Config() {
    for (const KeySpec& k : config_schema()) values_[k.key] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
    const KeySpec& k = find_key(key);
    std::string v = trim(value);
    if (v.find_first_of("#\n") != std::string::npos) throw ValidationError(key + ": value may not contain '#' or newlines");
    check_value(k, v);
    values_[key] = v;
}

std::vector<std::string> Config::merge_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (!seen.insert(key).second)
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        try {
            set(key, line.substr(eq + 1));
        } catch (const ValidationError& e) {
            throw ValidationError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return {seen.begin(), seen.end()};
}

std::vector<std::string> Config::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return merge_text(ss.str(), path);
}

bool Config::is_default(const std::string& key) const {
    return values_.at(key) == find_key(key).default_value;
}

long Config::get_int(const std::string& key) const {
    long v = 0;
    parse_int(values_.at(key), v);
    return v;
}

double Config::get_real(const std::string& key) const {
    double v = 0.0;
    parse_real(values_.at(key), v);
    return v;
}

const std::string& Config::get_string(const std::string& key) const { return values_.at(key); }

std::vector<double> Config::get_list(const std::string& key) const {
    std::vector<double> out;
    const std::string& v = values_.at(key);
    if (v.empty()) return out;
    for (const std::string& part : split_commas(v)) {
        double r = 0.0;
        parse_real(part, r);
        out.push_back(r);
    }
    return out;
}

Vec Config::get_point(const std::string& key, int n) const {
    std::vector<double> xs = get_list(key);
    if (static_cast<int>(xs.size()) > n)
        throw ValidationError(key + ": " + std::to_string(xs.size()) + " coordinates for dimension " +
                              std::to_string(n));
    Vec p = Vec::Zero(n);
    for (size_t i = 0; i < xs.size(); ++i) p[static_cast<int>(i)] = xs[i];
    return p;
}

std::string Config::canonical_text() const {
    std::string out;
    for (const KeySpec& k : config_schema()) out += k.key + " = " + values_.at(k.key) + "\n";
    return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int dimension(const Config& c) {
    int n = static_cast<int>(c.get_int("dim"));
    require_dimension(n);
    return n;
}

EnergySpec energy_spec(const Config& c) {
    EnergySpec s;
    if (c.get_int("quad.radial_nodes") < 2 || c.get_int("quad.angular_nodes") < 2)
        throw ValidationError("quad node counts must be at least 2");
    require_positive(c, "quad.panel_width");
    require_positive(c, "quad.rel_tol");
    s.quad.radial_nodes = static_cast<int>(c.get_int("quad.radial_nodes"));
    s.quad.angular_nodes = static_cast<int>(c.get_int("quad.angular_nodes"));
    s.quad.panel_width = c.get_real("quad.panel_width");
    s.quad.rel_tol = c.get_real("quad.rel_tol");
    s.quad.seed = static_cast<std::uint64_t>(c.get_int("seed"));
    return s;
}

FlowSpec flow_spec(const Config& c) {
    for (const char* k : {"flow.d0", "flow.C1", "flow.C2", "flow.M", "flow.M1", "flow.M2", "flow.m", "flow.eps",
                          "flow.lambda_cap", "flow.eta", "flow.cpi_tol", "flow.drift", "flow.band",
                          "flow.lambda_escape", "ode.initial_step", "ode.rel_tol", "ode.abs_tol", "ode.t_max"})
        require_positive(c, k);
    if (c.get_int("ode.max_steps") <= 0) throw ValidationError("ode.max_steps must be positive");
    FlowSpec s;
    FlowConstants& k = s.constants;
    k.d0 = c.get_real("flow.d0");
    k.C1 = c.get_real("flow.C1");
    k.C2 = c.get_real("flow.C2");
    k.M = c.get_real("flow.M");
    k.M1 = c.get_real("flow.M1");
    k.M2 = c.get_real("flow.M2");
    k.m = c.get_real("flow.m");
    k.eps = c.get_real("flow.eps");
    k.lambda_cap = c.get_real("flow.lambda_cap");
    k.cpi_tol = c.get_real("flow.cpi_tol");
    k.drift = c.get_real("flow.drift");
    k.band = c.get_real("flow.band");
    s.ode.initial_step = c.get_real("ode.initial_step");
    s.ode.rel_tol = c.get_real("ode.rel_tol");
    s.ode.abs_tol = c.get_real("ode.abs_tol");
    s.ode.max_steps = c.get_int("ode.max_steps");
    s.ode.t_max = c.get_real("ode.t_max");
    s.lambda_escape = c.get_real("flow.lambda_escape");
    return s;
}

AssumptionOptions assumption_options(const Config& c) {
    AssumptionOptions o;
    if (c.get_int("assumptions.boundary_samples") <= 0) throw ValidationError("assumptions.boundary_samples must be positive");
    if (c.get_int("assumptions.shooting_directions") < 0)
        throw ValidationError("assumptions.shooting_directions must be non-negative");
    o.boundary_samples = static_cast<int>(c.get_int("assumptions.boundary_samples"));
    o.shooting_directions = static_cast<int>(c.get_int("assumptions.shooting_directions"));
    o.seed = static_cast<std::uint64_t>(c.get_int("seed"));
    return o;
}

}  // namespace bilap::cli
