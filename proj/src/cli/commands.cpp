#include "bilap/cli/commands.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "bilap/bubbles.hpp"
#include "bilap/cli/manifest.hpp"
#include "bilap/constants.hpp"
#include "bilap/energy.hpp"
#include "bilap/errors.hpp"
#include "bilap/flow.hpp"
#include "bilap/green.hpp"
#include "bilap/kfield.hpp"
#include "bilap/morse.hpp"
#include "bilap/projection.hpp"

namespace bilap::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::vector<double> to_vector(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

ordered_json bubble_json(const Bubble& b) {
    return {{"a", to_vector(b.a)}, {"lambda", b.lambda}, {"d", boundary_distance(b.a)}};
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

PdeltaMode parse_mode(const std::string& key, const std::string& v) {
    if (v == "exact") return PdeltaMode::Exact;
    if (v == "asymptotic") return PdeltaMode::Asymptotic;
    throw ValidationError(key + ": expected exact | asymptotic, got '" + v + "'");
}

void require_flow_dimension(int n) {
    if (n < 7) throw ValidationError("flows need dim >= 7 (got " + std::to_string(n) + ")");
}

void require_interior(const Vec& x, const std::string& what) {
    if (!(x.norm() < 1.0)) throw ValidationError(what + " must lie in the open unit ball");
}

// Files written by one command, in order.
class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}
    void write(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ + "/" + name, std::ios::binary);
        out << content;
        if (!out) throw NumericalError("cannot write '" + dir_ + "/" + name + "'");
        names_.push_back(name);
    }
    void json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::vector<std::string> names_;
};

ordered_json constant_set_json(const ConstantSet& s) {
    ordered_json j;
    j["n"] = s.n;
    j["p"] = critical_exponent(s.n);
    j["q"] = sobolev_exponent(s.n);
    j["c_n"] = s.c_n;
    j["S_n"] = s.S_n;
    j["c2"] = s.c2;
    j["c3"] = s.c3;
    j["c4"] = s.c4;
    j["c2_over_c3"] = s.c2 / s.c3;
    j["kappa_n"] = kappa_n(s.n);
    j["robin_center"] = robin_center(s.n);
    return j;
}

void cmd_constants(const Config& c, Outputs& o, std::ostream& out) {
    ordered_json j = constant_set_json(constant_set(dimension(c)));
    o.json("constants.json", j);
    out << j.dump(2) << "\n";
}

void cmd_green(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    Vec x = c.get_point("green.x", n), y = c.get_point("green.y", n);
    require_interior(x, "green.x");
    require_interior(y, "green.y");
    if ((x - y).norm() < 1e-8) throw ValidationError("green: probe points coincide");
    ordered_json j;
    j["n"] = n;
    j["x"] = to_vector(x);
    j["y"] = to_vector(y);
    j["G"] = green_G(x, y);
    j["H"] = regular_part_H(x, y);
    j["grad_H_x"] = to_vector(grad_H(x, y));
    j["robin_x"] = robin(x);
    j["robin_y"] = robin(y);
    o.json("green.json", j);
    out << j.dump(2) << "\n";
}

void cmd_verify_expansion(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    KField K = catalogued_k(c.get_string("k_field"), n);
    Vec a = c.get_point("expansion.a", n);
    require_interior(a, "expansion.a");
    std::vector<double> lambdas = c.get_list("expansion.lambdas");
    if (lambdas.empty()) throw ValidationError("expansion.lambdas is empty");
    for (size_t i = 0; i < lambdas.size(); ++i)
        if (!(lambdas[i] > 0.0) || (i > 0 && lambdas[i] <= lambdas[i - 1]))
            throw ValidationError("expansion.lambdas must be positive and increasing");
    PdeltaMode mode = parse_mode("expansion.mode", c.get_string("expansion.mode"));
    EnergySpec spec = energy_spec(c);

    std::string csv = "lambda,J_quad,J_exp,gap,order_estimate\n";
    std::vector<double> gaps;
    ordered_json rows = ordered_json::array();
    for (size_t i = 0; i < lambdas.size(); ++i) {
        Configuration cfg{{Bubble{a, lambdas[i]}}, {1.0}, mode};
        EnergyReport r = energy_report(cfg, K, spec);
        double gap = std::abs(r.J_quadrature - r.J_expansion) / std::abs(r.J_quadrature);
        std::string order;
        if (i > 0) order = fmt(std::log(gap / gaps.back()) / std::log(lambdas[i] / lambdas[i - 1]));
        gaps.push_back(gap);
        csv += fmt(lambdas[i]) + "," + fmt(r.J_quadrature) + "," + fmt(r.J_expansion) + "," + fmt(gap) + "," + order +
               "\n";
        rows.push_back({{"lambda", lambdas[i]},
                        {"J_quad", r.J_quadrature},
                        {"J_exp", r.J_expansion},
                        {"leading", r.leading},
                        {"delta_k_term", r.delta_k_term},
                        {"h_term", r.h_term},
                        {"eps_term", r.eps_term},
                        {"gap", gap}});
    }
    o.write("expansion.csv", csv);

    // Least-squares slope of log gap against log lambda.
    double slope = std::numeric_limits<double>::quiet_NaN();
    if (lambdas.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < lambdas.size(); ++i) {
            mx += std::log(lambdas[i]);
            my += std::log(gaps[i]);
        }
        mx /= lambdas.size();
        my /= lambdas.size();
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < lambdas.size(); ++i) {
            double dx = std::log(lambdas[i]) - mx;
            sxy += dx * (std::log(gaps[i]) - my);
            sxx += dx * dx;
        }
        slope = sxy / sxx;
    }
    bool monotone = true;
    for (size_t i = 1; i < gaps.size(); ++i) monotone = monotone && gaps[i] < gaps[i - 1];
    ordered_json j;
    j["n"] = n;
    j["k_field"] = K.name();
    j["a"] = to_vector(a);
    j["mode"] = c.get_string("expansion.mode");
    j["rows"] = rows;
    j["loglog_slope"] = slope;
    j["gap_monotone_decreasing"] = monotone;
    o.json("expansion.json", j);
    out << "gap slope " << fmt(slope) << (monotone ? " (monotone)" : " (not monotone)") << "\n";
}

FlowState flow_init(const Config& c, const KField& K, const CriticalPointSearch& cps) {
    int n = K.dim();
    const std::string& mode = c.get_string("init.mode");
    if (mode == "bubbles") {
        long p = c.get_int("init.p");
        if (p != 1 && p != 2) throw ValidationError("init.p must be 1 or 2");
        FlowState s;
        s.p = static_cast<int>(p);
        for (int i = 1; i <= p; ++i) {
            std::string ka = "init.a" + std::to_string(i), kl = "init.lambda" + std::to_string(i);
            if (c.get_list(ka).empty()) throw ValidationError(ka + " is required");
            Vec a = c.get_point(ka, n);
            require_interior(a, ka);
            if (!(c.get_real(kl) > 0.0)) throw ValidationError(kl + " must be positive");
            s.bubbles.push_back({a, c.get_real(kl)});
        }
        return s;
    }
    if (mode == "f-lambda") {
        if (cps.points.empty()) throw ValidationError("f-lambda: K has no nondegenerate critical points");
        Vec y0 = c.get_list("init.y0").empty() ? cps.points.front().y : c.get_point("init.y0", n);
        if (c.get_list("init.x").empty()) throw ValidationError("init.x is required for f-lambda");
        Vec x = c.get_point("init.x", n);
        require_interior(y0, "init.y0");
        require_interior(x, "init.x");
        double alpha = c.get_real("init.alpha");
        if (alpha < 0.0 || alpha > 1.0) throw ValidationError("init.alpha must lie in [0, 1]");
        if (!(c.get_real("init.lambda") > 0.0)) throw ValidationError("init.lambda must be positive");
        return f_lambda_initial(alpha, y0, x, c.get_real("init.lambda"), K);
    }
    throw ValidationError("init.mode: expected bubbles | f-lambda, got '" + mode + "'");
}

std::string trace_csv(const FlowTrace& tr, int n) {
    size_t p = tr.samples.empty() ? 1 : tr.samples.front().bubbles.size();
    std::string csv = "time";
    for (size_t i = 1; i <= p; ++i)
        for (int k = 1; k <= n; ++k) csv += ",a" + std::to_string(i) + "_" + std::to_string(k);
    for (size_t i = 1; i <= p; ++i) csv += ",lambda" + std::to_string(i);
    csv += ",J,regime";
    for (size_t i = 1; i <= p; ++i) csv += ",d" + std::to_string(i);
    csv += ",eps12\n";
    for (const FlowSample& s : tr.samples) {
        std::string row = fmt(s.t);
        for (const Bubble& b : s.bubbles)
            for (int k = 0; k < n; ++k) row += "," + fmt(b.a[k]);
        for (const Bubble& b : s.bubbles) row += "," + fmt(b.lambda);
        row += "," + fmt(s.J) + "," + s.regime;
        for (const Bubble& b : s.bubbles) row += "," + fmt(boundary_distance(b.a));
        row += "," + (p == 2 ? fmt(s.eps12) : std::string("")) + "\n";
        csv += row;
    }
    return csv;
}

ordered_json cpi_record_json(const CpiRecord& r) {
    ordered_json pts = ordered_json::array();
    for (const Vec& y : r.points) pts.push_back(to_vector(y));
    return {{"points", pts},
            {"point_ids", r.point_ids},
            {"level", r.level},
            {"morse_index_at_infinity", r.morse_index_at_infinity},
            {"conditions", r.conditions}};
}

void cmd_flow(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    require_flow_dimension(n);
    KField K = catalogued_k(c.get_string("k_field"), n);
    FlowSpec spec = flow_spec(c);
    CriticalPointSearch cps = find_critical_points(K, static_cast<int>(c.get_int("morse.seeds_per_axis")));
    FlowState init = flow_init(c, K, cps);
    FlowResult r = integrate_flow(init, K, cps, spec);
    o.write("trace.csv", trace_csv(r.trace, n));

    ordered_json j;
    j["terminal"] = to_string(r.terminal);
    j["time"] = r.final_state.time;
    ordered_json bs = ordered_json::array();
    for (const Bubble& b : r.final_state.bubbles) bs.push_back(bubble_json(b));
    j["bubbles"] = bs;
    j["alphas"] = r.final_state.alphas;
    j["J"] = r.final_J;
    j["exit_reason"] = r.exit_reason;
    j["cpi"] = r.cpi ? cpi_record_json(*r.cpi) : ordered_json(nullptr);
    j["accepted_steps"] = r.trace.accepted;
    j["rejected_steps"] = r.trace.rejected;
    j["energy_violations"] = r.trace.energy_violations;
    j["max_energy_rise"] = r.trace.max_energy_rise;
    ordered_json ev = ordered_json::array();
    for (const FlowEvent& e : r.trace.events) ev.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
    j["events"] = ev;
    o.json("terminal.json", j);
    out << "terminal " << to_string(r.terminal) << " at t = " << fmt(r.final_state.time) << ", J = " << fmt(r.final_J)
        << "\n";
}

void cmd_flow_batch(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    require_flow_dimension(n);
    KField K = catalogued_k(c.get_string("k_field"), n);
    FlowSpec spec = flow_spec(c);
    CriticalPointSearch cps = find_critical_points(K, static_cast<int>(c.get_int("morse.seeds_per_axis")));
    long id = c.get_int("batch.point");
    if (id < 1 || id >= static_cast<long>(cps.points.size()))
        throw ValidationError("batch.point must name a critical point other than the absolute max (1.." +
                              std::to_string(static_cast<long>(cps.points.size()) - 1) + ")");
    long samples = c.get_int("batch.samples");
    double radius = c.get_real("batch.radius");
    if (samples <= 0 || !(radius > 0.0)) throw ValidationError("batch.samples and batch.radius must be positive");
    std::vector<double> alphas = c.get_list("batch.alphas");
    if (alphas.empty()) throw ValidationError("batch.alphas is empty");
    for (double a : alphas)
        if (a < 0.0 || a > 1.0) throw ValidationError("batch.alphas must lie in [0, 1]");

    const Vec& y0 = cps.points.front().y;
    const Vec& yi = cps.points[static_cast<size_t>(id)].y;
    std::mt19937_64 rng(static_cast<std::uint64_t>(c.get_int("seed")));
    std::normal_distribution<double> normal;
    std::vector<Vec> xs;
    for (long s = 0; s < samples; ++s) {
        Vec d(n);
        for (int k = 0; k < n; ++k) d[k] = normal(rng);
        Vec x = yi + radius * d.normalized();
        require_interior(x, "batch sample");
        xs.push_back(x);
    }
    IntersectionEstimate e = estimate_intersection_number(y0, yi, xs, alphas, c.get_real("batch.lambda"), K, spec);
    ordered_json samples_json = ordered_json::array();
    for (const Vec& x : xs) samples_json.push_back(to_vector(x));
    ordered_json j;
    j["n"] = n;
    j["k_field"] = K.name();
    j["y0"] = to_vector(y0);
    j["yi"] = to_vector(yi);
    j["x_samples"] = samples_json;
    j["alphas"] = alphas;
    j["lambda"] = c.get_real("batch.lambda");
    j["samples"] = e.samples;
    j["hits"] = e.hits;
    j["other_cpi"] = e.other_cpi;
    j["exits"] = e.exits;
    j["unresolved"] = e.unresolved;
    j["parity"] = e.parity;
    j["refined_hits"] = e.refined_hits;
    j["refined_parity"] = e.refined_parity;
    j["stable"] = e.stable;
    j["heuristic"] = e.heuristic;
    o.json("batch.json", j);
    out << "hits " << e.hits << " of " << e.samples << ", parity " << e.parity << (e.stable ? "" : " (unstable)")
        << " [heuristic]\n";
}

ordered_json assumptions_json(const AssumptionReport& r) {
    ordered_json res = ordered_json::array();
    for (const AssumptionResult& a : r.results)
        res.push_back({{"name", a.name}, {"status", a.status}, {"detail", a.detail}, {"witnesses", a.witnesses}});
    ordered_json dims = ordered_json::array();
    for (const ManifoldDims& m : r.manifolds)
        dims.push_back({{"point_id", m.point_id}, {"stable", m.stable}, {"unstable", m.unstable}});
    ordered_json j;
    j["n"] = r.n;
    j["results"] = res;
    j["manifold_dimensions"] = dims;
    j["min_K_sampled"] = r.min_K_sampled;
    return j;
}

ordered_json critical_point_json(const KField& K, const CriticalPoint& p, int id) {
    ordered_json j;
    j["id"] = id;
    j["y"] = to_vector(p.y);
    j["K"] = p.K_value;
    j["morse_index"] = p.morse_index;
    j["laplacian_K"] = p.laplacian_K;
    if (K.dim() == 6) j["robin"] = p.robin_value;
    j["cpi_condition"] = cpi_condition(K, p);
    j["eigenvalues"] = to_vector(p.eigenvalues);
    j["grad_norm"] = p.grad_norm;
    return j;
}

void cmd_enumerate_cpi(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    KField K = catalogued_k(c.get_string("k_field"), n);
    CriticalPointSearch cps = find_critical_points(K, static_cast<int>(c.get_int("morse.seeds_per_axis")));
    CpiEnumeration single = enumerate_cpi_single(K, cps);
    ordered_json pts = ordered_json::array();
    for (size_t i = 0; i < cps.points.size(); ++i) pts.push_back(critical_point_json(K, cps.points[i], static_cast<int>(i)));
    ordered_json singles = ordered_json::array();
    for (const CpiRecord& r : single.records) singles.push_back(cpi_record_json(r));
    ordered_json j;
    j["n"] = n;
    j["k_field"] = K.name();
    j["critical_points"] = pts;
    j["degenerate_points"] = static_cast<int>(cps.degenerate.size());
    j["single"] = singles;
    j["excluded"] = single.excluded;
    j["indeterminate"] = single.indeterminate;
    size_t pair_count = 0;
    if (n >= 7) {
        CpiEnumeration pairs = enumerate_cpi_pairs(K, cps);
        ordered_json pr = ordered_json::array();
        for (const CpiRecord& r : pairs.records) pr.push_back(cpi_record_json(r));
        j["pairs"] = pr;
        pair_count = pairs.records.size();
    } else {
        j["pairs"] = nullptr;
    }
    AssumptionOptions ao = assumption_options(c);
    j["assumptions"] = assumptions_json(check_assumptions(K, ao));
    o.json("cpi.json", j);
    out << single.records.size() << " single-mass and " << pair_count << " two-mass critical points at infinity\n";
}

void cmd_check_assumptions(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    KField K = catalogued_k(c.get_string("k_field"), n);
    AssumptionReport r = check_assumptions(K, assumption_options(c));
    ordered_json j = assumptions_json(r);
    j["k_field"] = K.name();
    o.json("assumptions.json", j);
    for (const AssumptionResult& a : r.results) out << a.name << ": " << a.status << "\n";
}

void cmd_decompose(const Config& c, Outputs& o, std::ostream& out) {
    int n = dimension(c);
    const std::string& path = c.get_string("decompose.grid");
    if (path.empty()) throw ValidationError("decompose.grid is required");
    AxisymmetricGrid g = read_grid(path);
    if (g.n != n) throw ValidationError("grid dimension " + std::to_string(g.n) + " differs from dim " + std::to_string(n));
    long p = c.get_int("decompose.p");
    if (p < 1 || p > 2) throw ValidationError("decompose.p must be 1 or 2");
    DecomposeOptions opt;
    opt.mode = parse_mode("decompose.mode", c.get_string("decompose.mode"));
    DecomposeResult r = decompose(to_sampled(g), static_cast<int>(p), opt);
    ordered_json bs = ordered_json::array();
    for (const Bubble& b : r.config.bubbles) bs.push_back(bubble_json(b));
    ordered_json j;
    j["n"] = n;
    j["grid"] = path;
    j["bubbles"] = bs;
    j["alphas"] = r.config.alphas;
    j["residual_norm"] = r.residual_norm;
    j["v0_residuals"] = r.v0_residuals;
    j["iterations"] = r.iterations;
    j["degenerate"] = r.degenerate;
    o.json("decompose.json", j);
    out << "residual norm " << fmt(r.residual_norm) << " after " << r.iterations << " iterations\n";
}

using Handler = void (*)(const Config&, Outputs&, std::ostream&);

Handler handler(const std::string& name) {
    if (name == "constants") return cmd_constants;
    if (name == "green") return cmd_green;
    if (name == "verify-expansion") return cmd_verify_expansion;
    if (name == "flow") return cmd_flow;
    if (name == "flow-batch") return cmd_flow_batch;
    if (name == "enumerate-cpi") return cmd_enumerate_cpi;
    if (name == "check-assumptions") return cmd_check_assumptions;
    if (name == "decompose") return cmd_decompose;
    throw ValidationError("unknown command '" + name + "'");
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"constants", "green", "verify-expansion", "flow",
                                                   "flow-batch", "enumerate-cpi", "check-assumptions", "decompose"};
    return names;
}

std::string default_output_dir() {
    const char* env = std::getenv("BILAP_OUTPUT_DIR");
    return env && *env ? env : "bilap-out";
}

int run_command(const std::string& command, const Config& c, const std::string& dir, std::ostream& out,
                std::ostream& err) {
    Handler h = handler(command);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        err << "error: cannot create output directory '" << dir << "': " << ec.message() << "\n";
        return kExitValidation;
    }
    fs::remove(dir + "/FAILED", ec);

    Outputs o(dir);
    Manifest m = make_manifest(command, c);
    int code = kExitOk;
    std::string message;
    try {
        if (command == "decompose" && !c.get_string("decompose.grid").empty())
            m.input_hashes.emplace_back(c.get_string("decompose.grid"), file_hash(c.get_string("decompose.grid")));
        h(c, o, out);
    } catch (const ValidationError& e) {
        code = kExitValidation;
        message = e.what();
    } catch (const NumericalError& e) {
        code = kExitNumerical;
        message = e.what();
    } catch (const std::exception& e) {
        code = kExitNumerical;
        message = e.what();
    }
    for (const std::string& name : o.names()) m.outputs.push_back({name, file_hash(dir + "/" + name)});
    m.exit_code = code;
    write_manifest(m, dir);
    if (code != kExitOk) {
        write_failure_marker(dir, code, message);
        err << "error: " << message << "\n";
    }
    return code;
}

int replay_manifest(const std::string& manifest_path, const std::string& dir, std::ostream& out,
                    std::ostream& err) {
    Manifest m = read_manifest(manifest_path);
    for (const auto& [path, hash] : m.input_hashes)
        if (file_hash(path) != hash) {
            err << "error: input '" << path << "' changed since the manifest was written\n";
            return kExitValidation;
        }
    Config c;
    c.merge_text(m.config_text, manifest_path);
    std::ostringstream sink;
    int code = run_command(m.command, c, dir, sink, err);
    bool same = code == m.exit_code;
    if (!same) out << "exit code " << code << " differs from recorded " << m.exit_code << "\n";
    for (const OutputFile& f : m.outputs) {
        std::string path = dir + "/" + f.name;
        bool ok = fs::exists(path) && file_hash(path) == f.fnv1a;
        out << (ok ? "identical " : "differs ") << f.name << "\n";
        same = same && ok;
    }
    return same ? kExitOk : kExitNumerical;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Bubble analysis for the biharmonic prescribed-curvature problem on the unit ball"};
    app.require_subcommand(1);

    struct Common {
        std::string config, out, k_field, init, constants, grid, probe, ladder;
        std::vector<std::string> sets;
        int dim = 0, p = 0;
        long seed = -1;
    } o;

    for (const std::string& name : command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", o.config, "key = value config file");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--dim", o.dim, "dimension n");
        sub->add_option("--seed", o.seed, "seed");
        sub->add_option("--set", o.sets, "key=value override (repeatable)");
        if (name != "constants" && name != "green" && name != "decompose")
            sub->add_option("--k-field", o.k_field, "catalogue name");
        if (name == "green") sub->add_option("--probe", o.probe, "x;y as comma-separated coordinates");
        if (name == "verify-expansion") sub->add_option("--lambda-ladder", o.ladder, "comma-separated lambdas");
        if (name == "flow" || name == "flow-batch") {
            sub->add_option("--init", o.init, "file with init.* keys");
            sub->add_option("--constants", o.constants, "file with flow.* and ode.* keys");
        }
        if (name == "decompose") {
            sub->add_option("--grid", o.grid, "axisymmetric grid file");
            sub->add_option("--p", o.p, "number of bubbles");
        }
    }
    std::string manifest, replay_out;
    CLI::App* replay = app.add_subcommand("replay", "re-run a manifest and compare outputs");
    replay->add_option("--manifest", manifest, "manifest.json")->required();
    replay->add_option("--out", replay_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (replay->parsed()) return replay_manifest(manifest, replay_out, std::cout, std::cerr);

        std::string command = app.get_subcommands().front()->get_name();
        Config c;
        if (!o.config.empty()) c.merge_file(o.config);
        auto merge_restricted = [&](const std::string& path, const std::vector<std::string>& prefixes) {
            Config scratch;
            for (const std::string& key : scratch.merge_file(path)) {
                bool allowed = false;
                for (const std::string& pre : prefixes) allowed = allowed || key.rfind(pre, 0) == 0;
                if (!allowed) throw ValidationError(path + ": key '" + key + "' not allowed here");
                c.set(key, scratch.get_string(key));
            }
        };
        if (!o.init.empty()) merge_restricted(o.init, {"init."});
        if (!o.constants.empty()) merge_restricted(o.constants, {"flow.", "ode."});
        if (o.dim != 0) c.set("dim", std::to_string(o.dim));
        if (o.seed >= 0) c.set("seed", std::to_string(o.seed));
        if (!o.k_field.empty()) c.set("k_field", o.k_field);
        if (!o.ladder.empty()) c.set("expansion.lambdas", o.ladder);
        if (!o.grid.empty()) c.set("decompose.grid", o.grid);
        if (o.p != 0) c.set("decompose.p", std::to_string(o.p));
        if (!o.probe.empty()) {
            size_t semi = o.probe.find(';');
            if (semi == std::string::npos) throw ValidationError("--probe expects 'x;y'");
            c.set("green.x", o.probe.substr(0, semi));
            c.set("green.y", o.probe.substr(semi + 1));
        }
        for (const std::string& s : o.sets) {
            size_t eq = s.find('=');
            if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
            c.set(s.substr(0, eq), s.substr(eq + 1));
        }
        std::string dir = !o.out.empty()                         ? o.out
                          : !c.get_string("output_dir").empty() ? c.get_string("output_dir")
                                                                 : default_output_dir();
        return run_command(command, c, dir, std::cout, std::cerr);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

}  // namespace bilap::cli
