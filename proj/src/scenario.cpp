#include "agehopf/scenario.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace agehopf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw std::invalid_argument("scenario: " + key + ": " + what);
}

void reject_unknown_keys(const json& node, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& item : node.items())
        if (!allowed.count(item.key()))
            fail(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
}

double get_number(const json& node, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    if (!node.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required value");
    }
    if (!node[key].is_number()) fail(path + "." + key, "expected a number");
    return node[key].get<double>();
}

int get_int(const json& node, const std::string& path, const std::string& key, int fallback) {
    if (!node.contains(key)) return fallback;
    if (!node[key].is_number_integer()) fail(path + "." + key, "expected an integer");
    return node[key].get<int>();
}

std::string get_string(const json& node, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!node.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required value");
    }
    if (!node[key].is_string()) fail(path + "." + key, "expected a string");
    return node[key].get<std::string>();
}

std::vector<double> get_array(const json& node, const std::string& path, const std::string& key,
                              bool required) {
    if (!node.contains(key)) {
        if (required) fail(path + "." + key, "missing required value");
        return {};
    }
    if (!node[key].is_array()) fail(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : node[key]) {
        if (!v.is_number()) fail(path + "." + key, "expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void parse_kernel(const json& node, Scenario::KernelBlock& k) {
    reject_unknown_keys(node, "kernel",
                        {"family", "shape", "rate", "scale", "breakpoints", "levels", "values",
                         "mortality", "normalization"});
    k.family = get_string(node, "kernel", "family");
    if (k.family != "gamma" && k.family != "piecewise" && k.family != "table")
        fail("kernel.family", "unknown kernel family '" + k.family +
                                  "' (supported: gamma, piecewise, table)");
    k.mortality = get_number(node, "kernel", "mortality");
    if (k.mortality < 0.0) fail("kernel.mortality", "must be nonnegative");
    k.normalization = get_string(node, "kernel", "normalization");
    if (k.normalization != "scale_b0" && k.normalization != "solve_m" &&
        k.normalization != "assert")
        fail("kernel.normalization", "must be one of scale_b0, solve_m, assert");
    if (k.family == "gamma") {
        k.shape = get_int(node, "kernel", "shape", 0);
        if (k.shape < 1) fail("kernel.shape", "must be a positive integer");
        k.rate = get_number(node, "kernel", "rate");
        k.scale = get_number(node, "kernel", "scale", 1.0);
        if (k.rate <= 0.0) fail("kernel.rate", "must be positive");
        if (k.scale <= 0.0) fail("kernel.scale", "must be positive");
    } else {
        k.breakpoints = get_array(node, "kernel", "breakpoints", true);
        const char* level_key = node.contains("values") ? "values" : "levels";
        k.levels = get_array(node, "kernel", level_key, true);
        if (k.breakpoints.size() != k.levels.size() + 1)
            fail("kernel.breakpoints", "need exactly levels.size()+1 breakpoints");
    }
}

void parse_nonlinearity(const json& node, Scenario::NonlinearityBlock& nl) {
    reject_unknown_keys(node, "nonlinearity", {"family", "coefficients"});
    nl.family = get_string(node, "nonlinearity", "family");
    if (nl.family != "ricker" && nl.family != "beverton_holt" && nl.family != "poly")
        fail("nonlinearity.family",
             "unknown family '" + nl.family + "' (supported: ricker, beverton_holt, poly)");
    if (nl.family == "poly") {
        nl.coefficients = get_array(node, "nonlinearity", "coefficients", true);
        if (nl.coefficients.empty()) fail("nonlinearity.coefficients", "must be nonempty");
    }
}

void parse_perturbation(const json& node, Scenario::Perturbation& p) {
    reject_unknown_keys(node, "analysis.perturbation",
                        {"kind", "epsilon", "omega", "edges", "values", "kappa"});
    p.kind = get_string(node, "analysis.perturbation", "kind", std::string("cosine"));
    if (p.kind != "none" && p.kind != "cosine" && p.kind != "bump" && p.kind != "table" &&
        p.kind != "exponential")
        fail("analysis.perturbation.kind",
             "must be one of none, cosine, bump, table, exponential");
    p.epsilon = get_number(node, "analysis.perturbation", "epsilon", 1e-3);
    if (node.contains("omega")) p.omega = get_number(node, "analysis.perturbation", "omega");
    p.edges = get_array(node, "analysis.perturbation", "edges", false);
    p.values = get_array(node, "analysis.perturbation", "values", false);
    p.kappa = get_number(node, "analysis.perturbation", "kappa", 1.0);
    if ((p.kind == "bump" || p.kind == "table") && p.edges.size() != p.values.size() + 1)
        fail("analysis.perturbation.edges", "need exactly values.size()+1 edges");
}

void parse_tolerances(const json& node, Scenario::AnalysisBlock& a) {
    reject_unknown_keys(node, "analysis.tolerances",
                        {"root", "resonance", "simplicity", "transversality", "equilibrium",
                         "branch", "quad", "tail"});
    a.tol.root_tol = get_number(node, "analysis.tolerances", "root", a.tol.root_tol);
    a.tol.res_tol = get_number(node, "analysis.tolerances", "resonance", a.tol.res_tol);
    a.tol.simp_tol = get_number(node, "analysis.tolerances", "simplicity", a.tol.simp_tol);
    a.tol.trans_tol =
        get_number(node, "analysis.tolerances", "transversality", a.tol.trans_tol);
    a.tol.eq_tol = get_number(node, "analysis.tolerances", "equilibrium", a.tol.eq_tol);
    a.branch_tol = get_number(node, "analysis.tolerances", "branch", a.branch_tol);
    a.quad.quad_tol = get_number(node, "analysis.tolerances", "quad", a.quad.quad_tol);
    a.quad.tail_tol = get_number(node, "analysis.tolerances", "tail", a.quad.tail_tol);
    for (double t : {a.tol.root_tol, a.tol.res_tol, a.tol.simp_tol, a.tol.trans_tol,
                     a.tol.eq_tol, a.branch_tol, a.quad.quad_tol, a.quad.tail_tol})
        if (!(t > 0.0)) fail("analysis.tolerances", "all tolerances must be positive");
}

void parse_analysis(const json& node, Scenario::AnalysisBlock& a) {
    reject_unknown_keys(node, "analysis",
                        {"nu_range", "omega_range", "equilibrium_guess", "nu", "dt", "horizon",
                         "settle_fraction", "perturbation", "s_grid", "s_max", "s_count", "K_max",
                         "N", "scan_nu_points", "scan_omega_points", "diagram_points",
                         "sweep_points", "tolerances"});
    a.nu_range = get_array(node, "analysis", "nu_range", false);
    a.omega_range = get_array(node, "analysis", "omega_range", false);
    if (!a.nu_range.empty() && (a.nu_range.size() != 2 || !(a.nu_range[0] < a.nu_range[1])))
        fail("analysis.nu_range", "expected [lo, hi] with lo < hi");
    if (!a.omega_range.empty() &&
        (a.omega_range.size() != 2 || !(a.omega_range[0] < a.omega_range[1])))
        fail("analysis.omega_range", "expected [lo, hi] with lo < hi");
    a.equilibrium_guess = get_number(node, "analysis", "equilibrium_guess", 1.0);
    if (node.contains("nu")) a.nu = get_number(node, "analysis", "nu");
    a.dt = get_number(node, "analysis", "dt", 0.01);
    if (!(a.dt > 0.0)) fail("analysis.dt", "must be positive");
    a.horizon = get_number(node, "analysis", "horizon", 2000.0);
    if (!(a.horizon >= a.dt)) fail("analysis.horizon", "must be at least dt");
    a.settle_fraction = get_number(node, "analysis", "settle_fraction", 0.2);
    if (a.settle_fraction < 0.0 || a.settle_fraction >= 1.0)
        fail("analysis.settle_fraction", "must lie in [0, 1)");
    if (node.contains("perturbation")) parse_perturbation(node["perturbation"], a.perturbation);
    if (node.contains("s_grid")) {
        a.s_grid = get_array(node, "analysis", "s_grid", true);
    } else {
        const double s_max = get_number(node, "analysis", "s_max", 1e-2);
        const int count = get_int(node, "analysis", "s_count", 10);
        if (!(s_max > 0.0)) fail("analysis.s_max", "must be positive");
        if (count < 1) fail("analysis.s_count", "must be at least 1");
        for (int i = 0; i <= count; ++i) a.s_grid.push_back(s_max * i / count);
    }
    for (std::size_t i = 0; i + 1 < a.s_grid.size(); ++i)
        if (!(a.s_grid[i] < a.s_grid[i + 1])) fail("analysis.s_grid", "must be increasing");
    a.k_max = get_int(node, "analysis", "K_max", 20);
    if (a.k_max < 2) fail("analysis.K_max", "must be at least 2");
    a.order = get_int(node, "analysis", "N", 32);
    if (a.order < 4) fail("analysis.N", "must be at least 4");
    a.scan_nu_points = get_int(node, "analysis", "scan_nu_points", 48);
    a.scan_omega_points = get_int(node, "analysis", "scan_omega_points", 48);
    a.diagram_points = get_int(node, "analysis", "diagram_points", 15);
    a.sweep_points = get_int(node, "analysis", "sweep_points", 64);
    for (int v : {a.scan_nu_points, a.scan_omega_points, a.diagram_points, a.sweep_points})
        if (v < 2) fail("analysis", "grid point counts must be at least 2");
    if (node.contains("tolerances")) parse_tolerances(node["tolerances"], a);
}

void parse_output(const json& node, Scenario::OutputBlock& o) {
    reject_unknown_keys(node, "output", {"dir", "formats"});
    o.dir = get_string(node, "output", "dir", std::string("out"));
    if (node.contains("formats")) {
        if (!node["formats"].is_array()) fail("output.formats", "expected an array of strings");
        o.formats.clear();
        for (const auto& v : node["formats"]) {
            if (!v.is_string()) fail("output.formats", "expected an array of strings");
            const std::string f = v.get<std::string>();
            if (f != "csv" && f != "json" && f != "orbits")
                fail("output.formats", "unknown format '" + f + "'");
            o.formats.push_back(f);
        }
    }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& source_name) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("scenario: " + source_name + ": " + e.what());
    }
    if (!root.is_object()) throw std::invalid_argument("scenario: top level must be an object");
    reject_unknown_keys(root, "", {"kernel", "nonlinearity", "analysis", "output"});
    if (!root.contains("kernel")) fail("kernel", "missing required block");
    if (!root.contains("nonlinearity")) fail("nonlinearity", "missing required block");

    Scenario sc;
    sc.source_path = source_name;
    sc.hash = fnv1a_hex(text);
    parse_kernel(root["kernel"], sc.kernel);
    parse_nonlinearity(root["nonlinearity"], sc.nonlinearity);
    if (root.contains("analysis")) parse_analysis(root["analysis"], sc.analysis);
    if (root.contains("output")) parse_output(root["output"], sc.output);
    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

BirthKernel Scenario::make_kernel() const {
    NormalizationMode mode = NormalizationMode::AssertNormalized;
    if (kernel.normalization == "scale_b0") mode = NormalizationMode::ScaleB0;
    if (kernel.normalization == "solve_m") mode = NormalizationMode::SolveM;
    if (kernel.family == "gamma")
        return normalize(
            BirthKernel::gamma(kernel.shape, kernel.rate, kernel.scale, kernel.mortality,
                               analysis.quad),
            mode);
    return normalize(BirthKernel::piecewise_constant(kernel.breakpoints, kernel.levels,
                                                     kernel.mortality, analysis.quad),
                     mode);
}

Nonlinearity Scenario::make_nonlinearity() const {
    if (nonlinearity.family == "ricker") return Nonlinearity::ricker();
    if (nonlinearity.family == "beverton_holt") return Nonlinearity::beverton_holt();
    return Nonlinearity::polynomial(nonlinearity.coefficients);
}

}  // namespace agehopf
