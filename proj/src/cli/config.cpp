#include "fpdiff/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "fpdiff/error.hpp"

namespace fpdiff::cli {

namespace {

using Kind = ExperimentKind;

const std::vector<Kind> kAllKinds = {Kind::Solve,         Kind::Response,      Kind::Spectrum,
                                     Kind::HoelderScan,   Kind::TaylorCheck,   Kind::PressureCheck,
                                     Kind::ExampleComposition, Kind::ExampleAffine};
const std::vector<Kind> kTransferKinds = {Kind::Solve,       Kind::Response,    Kind::Spectrum,
                                          Kind::HoelderScan, Kind::TaylorCheck, Kind::PressureCheck};

[[noreturn]] void fail_at(int line, int column, const std::string& what) {
    throw Error(ErrorCode::ConfigParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) throw std::invalid_argument("empty number");
    const auto caret = t.find('^');
    if (caret != std::string::npos) {
        return std::pow(parse_double(t.substr(0, caret)), parse_double(t.substr(caret + 1)));
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || !std::isfinite(v)) throw std::invalid_argument("not a number: " + t);
    return v;
}

long long parse_integer(const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 0);
    if (t.empty() || end == t.c_str() || *end != '\0') throw std::invalid_argument("not an integer: " + t);
    return v;
}

// Keys with an index suffix: map.perturbation.<i>, weight.coupling.<i> (i >= 1).
std::optional<std::pair<std::string, std::size_t>> indexed_key(const std::string& key) {
    for (const std::string prefix : {"map.perturbation.", "weight.coupling."}) {
        if (key.rfind(prefix, 0) == 0) {
            const std::string idx = key.substr(prefix.size());
            if (idx.empty() || !std::all_of(idx.begin(), idx.end(), [](unsigned char c) { return std::isdigit(c); })) {
                return std::nullopt;
            }
            const auto i = static_cast<std::size_t>(std::stoul(idx));
            if (i == 0) return std::nullopt;
            return std::make_pair(prefix.substr(0, prefix.size() - 1), i);
        }
    }
    return std::nullopt;
}

const std::map<std::string, std::vector<Kind>>& key_table() {
    static const std::map<std::string, std::vector<Kind>> table = [] {
        std::map<std::string, std::vector<Kind>> t;
        t["kind"] = kAllKinds;
        t["seed"] = kAllKinds;
        t["assertions"] = kAllKinds;
        for (const char* k : {"resolution", "degree", "map.base", "map.perturbation", "map.u_power", "weight",
                              "weight.constant", "weight.potential", "weight.coupling", "u0", "tol"}) {
            t[k] = kTransferKinds;
        }
        t["direction"] = {Kind::Response, Kind::HoelderScan, Kind::TaylorCheck};
        t["deltas"] = {Kind::HoelderScan, Kind::TaylorCheck, Kind::ExampleComposition, Kind::ExampleAffine};
        t["fd_step"] = {Kind::Response, Kind::ExampleComposition, Kind::ExampleAffine};
        t["alpha"] = {Kind::HoelderScan, Kind::TaylorCheck, Kind::ExampleAffine};
        t["beta"] = {Kind::HoelderScan, Kind::TaylorCheck};
        t["observable"] = {Kind::Response};
        t["observables"] = {Kind::PressureCheck};
        t["expect.lambda"] = {Kind::Spectrum, Kind::Solve};
        t["expect.slope"] = {Kind::HoelderScan};
        t["interval_points"] = {Kind::ExampleComposition, Kind::ExampleAffine};
        t["samples"] = {Kind::ExampleComposition, Kind::ExampleAffine};
        t["r"] = {Kind::ExampleComposition};
        t["r_prime"] = {Kind::ExampleComposition};
        t["slope_c"] = {Kind::ExampleComposition};
        t["affine.family"] = {Kind::ExampleAffine};
        t["affine.amplitude"] = {Kind::ExampleAffine};
        t["affine.epsilon"] = {Kind::ExampleAffine};
        return t;
    }();
    return table;
}

Kind parse_kind(const ConfigValue& v) {
    for (Kind k : kAllKinds) {
        if (kind_name(k) == trim(v.text)) return k;
    }
    fail_at(v.line, v.column, "unknown experiment kind '" + trim(v.text) + "'");
}

Eigen::VectorXd to_vector(const std::vector<double>& xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
    return v;
}

std::vector<double> dyadic(int from, int to) {
    std::vector<double> out;
    for (int e = from; e <= to; ++e) out.push_back(std::ldexp(1.0, -e));
    return out;
}

} // namespace

std::string_view kind_name(ExperimentKind kind) noexcept {
    switch (kind) {
    case Kind::Solve: return "solve";
    case Kind::Response: return "response";
    case Kind::Spectrum: return "spectrum";
    case Kind::HoelderScan: return "hoelder-scan";
    case Kind::TaylorCheck: return "taylor-check";
    case Kind::PressureCheck: return "pressure-check";
    case Kind::ExampleComposition: return "example-composition";
    case Kind::ExampleAffine: return "example-affine";
    }
    return "unknown";
}

const std::vector<std::string>& assertion_names(ExperimentKind kind) {
    static const std::map<Kind, std::vector<std::string>> names = {
        {Kind::Solve, {"residual", "positive", "matches_eigenvector", "lambda"}},
        {Kind::Spectrum,
         {"lambda", "eigen_residual", "projector", "decomposition", "positive", "gap", "decay", "duality"}},
        {Kind::Response, {"fd_match", "route_equivalence", "orthogonality", "lambda_fd", "measure_fd"}},
        {Kind::HoelderScan, {"operator_slope", "eigenvector_slope", "expected_slope"}},
        {Kind::TaylorCheck, {"order"}},
        {Kind::PressureCheck, {"identity"}},
        {Kind::ExampleComposition,
         {"ball", "contraction", "q_bound", "zero_fixed_point", "derivative_at_zero", "constant_parameter",
          "taylor_order", "second_derivative", "second_derivative_closed_form", "second_derivative_constant"}},
        {Kind::ExampleAffine,
         {"series", "constant_g", "contraction_seminorm", "contraction_full", "holder_slope", "second_derivative"}},
    };
    return names.at(kind);
}

std::map<std::string, ConfigValue> parse_key_values(const std::string& text) {
    std::map<std::string, ConfigValue> out;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        const int key_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
        if (eq == std::string::npos) fail_at(line_no, key_col, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) fail_at(line_no, key_col, "missing key before '='");
        for (char c : key) {
            if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) {
                fail_at(line_no, key_col, "invalid character in key '" + key + "'");
            }
        }
        const std::string rest = line.substr(eq + 1);
        const auto vstart = rest.find_first_not_of(" \t");
        const int value_col = static_cast<int>(eq + 2 + (vstart == std::string::npos ? 0 : vstart));
        if (out.count(key)) {
            fail_at(line_no, key_col, "duplicate key '" + key + "' (first on line " + std::to_string(out[key].line) + ")");
        }
        out[key] = ConfigValue{trim(rest), line_no, value_col};
    }
    return out;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    if (trim(text).empty()) return out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(item));
    return out;
}

TrigSeries parse_series(const std::string& text) {
    TrigSeries s;
    if (trim(text).empty()) return s;
    for (const auto& item : split(text, ',')) {
        const auto parts = split(item, ':');
        const long long k = parse_integer(parts.at(0));
        if (k == 0) {
            if (parts.size() != 2) throw std::invalid_argument("constant term takes the form 0:c");
            s.c0 += parse_double(parts[1]);
            continue;
        }
        if (k < 0 || parts.size() != 3) throw std::invalid_argument("series term takes the form k:a:b with k >= 1");
        s.terms.push_back({static_cast<int>(k), parse_double(parts[1]), parse_double(parts[2])});
    }
    return s;
}

double ExperimentConfig::tolerance(const std::string& assertion, double fallback) const {
    const auto it = tolerances.find(assertion);
    return it == tolerances.end() ? fallback : it->second;
}

bool ExperimentConfig::wants(const std::string& assertion) const {
    return std::find(assertions.begin(), assertions.end(), assertion) != assertions.end();
}

ExperimentConfig parse_config(const std::string& text) {
    const auto entries = parse_key_values(text);
    const auto kind_it = entries.find("kind");
    if (kind_it == entries.end()) fail_at(1, 1, "missing required key 'kind'");

    ExperimentConfig cfg;
    cfg.kind = parse_kind(kind_it->second);
    const auto& table = key_table();

    std::map<std::size_t, TrigSeries> perturbations, couplings;
    std::optional<ConfigValue> assertions_value;
    std::set<std::string> seen;

    for (const auto& [key, value] : entries) {
        const auto& v = value;
        std::string base = key;
        std::size_t index = 0;
        if (const auto ik = indexed_key(key)) {
            base = ik->first;
            index = ik->second;
        }
        const bool is_tolerance = key.rfind("tolerance.", 0) == 0;
        if (!is_tolerance) {
            const auto row = table.find(base);
            if (row == table.end() || (base != key && index == 0) ||
                (row != table.end() && (base == "map.perturbation" || base == "weight.coupling") && index == 0)) {
                fail_at(v.line, 1, "unknown key '" + key + "'");
            }
            if (std::find(row->second.begin(), row->second.end(), cfg.kind) == row->second.end()) {
                fail_at(v.line, 1, "key '" + key + "' does not apply to kind " + std::string(kind_name(cfg.kind)));
            }
        }
        try {
            if (is_tolerance) {
                const std::string name = key.substr(std::string("tolerance.").size());
                const auto& names = assertion_names(cfg.kind);
                if (std::find(names.begin(), names.end(), name) == names.end()) {
                    fail_at(v.line, 1, "unknown key '" + key + "': no assertion '" + name + "' for kind " +
                                           std::string(kind_name(cfg.kind)));
                }
                const double t = parse_double(v.text);
                if (!(t > 0.0)) fail_at(v.line, v.column, "tolerances must be positive");
                cfg.tolerances[name] = t;
            } else if (key == "kind") {
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(parse_integer(v.text));
            } else if (key == "assertions") {
                assertions_value = v;
            } else if (key == "resolution") {
                const long long n = parse_integer(v.text);
                if (n < 8 || n % 2 != 0) fail_at(v.line, v.column, "resolution must be even and >= 8");
                cfg.resolution = static_cast<std::size_t>(n);
            } else if (key == "degree") {
                cfg.degree = static_cast<int>(parse_integer(v.text));
                if (cfg.degree < 2) fail_at(v.line, v.column, "degree must be >= 2");
            } else if (key == "map.base") {
                cfg.map_base = parse_series(v.text);
            } else if (base == "map.perturbation") {
                perturbations[index] = parse_series(v.text);
            } else if (key == "map.u_power") {
                cfg.u_power = parse_double(v.text);
                if (!(cfg.u_power > 0.0 && cfg.u_power <= 1.0)) fail_at(v.line, v.column, "u_power must lie in (0, 1]");
            } else if (key == "weight") {
                cfg.weight = trim(v.text);
                if (cfg.weight != "geometric" && cfg.weight != "constant") {
                    fail_at(v.line, v.column, "weight must be 'geometric' or 'constant'");
                }
            } else if (key == "weight.constant") {
                cfg.weight_constant = parse_double(v.text);
                if (!(cfg.weight_constant > 0.0)) fail_at(v.line, v.column, "weight.constant must be positive");
            } else if (key == "weight.potential") {
                cfg.potential = parse_series(v.text);
            } else if (base == "weight.coupling") {
                couplings[index] = parse_series(v.text);
            } else if (key == "u0") {
                cfg.u0 = to_vector(parse_number_list(v.text));
            } else if (key == "direction") {
                cfg.direction = to_vector(parse_number_list(v.text));
            } else if (key == "deltas") {
                cfg.deltas = parse_number_list(v.text);
                if (cfg.deltas.empty()) fail_at(v.line, v.column, "deltas must not be empty");
            } else if (key == "tol") {
                cfg.tol = parse_double(v.text);
                if (!(cfg.tol > 0.0)) fail_at(v.line, v.column, "tol must be positive");
            } else if (key == "fd_step") {
                cfg.fd_step = parse_double(v.text);
                if (!(cfg.fd_step > 0.0)) fail_at(v.line, v.column, "fd_step must be positive");
            } else if (key == "alpha") {
                cfg.alpha = parse_double(v.text);
            } else if (key == "beta") {
                cfg.beta = parse_double(v.text);
            } else if (key == "observable") {
                cfg.observable = parse_series(v.text);
            } else if (key == "observables") {
                const long long n = parse_integer(v.text);
                if (n < 1) fail_at(v.line, v.column, "observables must be >= 1");
                cfg.observables = static_cast<std::size_t>(n);
            } else if (key == "expect.lambda") {
                cfg.expect_lambda = parse_double(v.text);
            } else if (key == "expect.slope") {
                cfg.expect_slope = parse_double(v.text);
            } else if (key == "interval_points") {
                const long long n = parse_integer(v.text);
                if (n < 8) fail_at(v.line, v.column, "interval_points must be >= 8");
                cfg.interval_points = static_cast<std::size_t>(n);
            } else if (key == "samples") {
                const long long n = parse_integer(v.text);
                if (n < 1) fail_at(v.line, v.column, "samples must be >= 1");
                cfg.samples = static_cast<std::size_t>(n);
            } else if (key == "r") {
                cfg.r = parse_double(v.text);
            } else if (key == "r_prime") {
                cfg.r_prime = parse_double(v.text);
            } else if (key == "slope_c") {
                cfg.slope_c = parse_double(v.text);
            } else if (key == "affine.family") {
                cfg.affine_family = trim(v.text);
                if (cfg.affine_family != "kink" && cfg.affine_family != "lipschitz" && cfg.affine_family != "cubic" &&
                    cfg.affine_family != "constant") {
                    fail_at(v.line, v.column, "affine.family must be kink, lipschitz, cubic or constant");
                }
            } else if (key == "affine.amplitude") {
                cfg.affine_amplitude = parse_double(v.text);
            } else if (key == "affine.epsilon") {
                cfg.affine_epsilon = parse_double(v.text);
            }
        } catch (const std::invalid_argument& e) {
            fail_at(v.line, v.column, "bad value for '" + key + "': " + e.what());
        } catch (const std::out_of_range& e) {
            fail_at(v.line, v.column, "bad value for '" + key + "': out of range");
        }
        seen.insert(key);
    }

    // Parameter dimension: the largest index among perturbations and weight couplings.
    std::size_t dim = 0;
    if (!perturbations.empty()) dim = std::max(dim, perturbations.rbegin()->first);
    if (!couplings.empty()) dim = std::max(dim, couplings.rbegin()->first);
    if (dim == 0) dim = 1;
    cfg.perturbations.assign(dim, TrigSeries{});
    cfg.couplings.assign(dim, TrigSeries{});
    for (auto& [i, s] : perturbations) cfg.perturbations[i - 1] = s;
    for (auto& [i, s] : couplings) cfg.couplings[i - 1] = s;

    const auto d = static_cast<Eigen::Index>(dim);
    const bool transfer = std::find(kTransferKinds.begin(), kTransferKinds.end(), cfg.kind) != kTransferKinds.end();
    if (transfer) {
        if (cfg.u0.size() == 0) cfg.u0 = Eigen::VectorXd::Zero(d);
        if (cfg.direction.size() == 0) cfg.direction = Eigen::VectorXd::Ones(d);
        const auto check_dim = [&](const Eigen::VectorXd& v, const char* name) {
            if (v.size() != d) {
                const auto& cv = entries.at(name);
                fail_at(cv.line, cv.column, std::string(name) + " has " + std::to_string(v.size()) +
                                                " entries, parameter dimension is " + std::to_string(dim));
            }
        };
        if (entries.count("u0")) check_dim(cfg.u0, "u0");
        if (entries.count("direction")) check_dim(cfg.direction, "direction");
    }
    if (cfg.deltas.empty()) {
        switch (cfg.kind) {
        case Kind::TaylorCheck: cfg.deltas = dyadic(4, 12); break;
        case Kind::HoelderScan: cfg.deltas = dyadic(4, 12); break;
        case Kind::ExampleComposition: cfg.deltas = dyadic(3, 10); break;
        case Kind::ExampleAffine: cfg.deltas = dyadic(3, 14); break;
        default: break;
        }
    }
    if (!entries.count("fd_step")) {
        if (cfg.kind == Kind::ExampleComposition) cfg.fd_step = 1e-2;
        if (cfg.kind == Kind::ExampleAffine) cfg.fd_step = 1e-3;
    }
    if (!entries.count("alpha") && cfg.kind == Kind::ExampleAffine) cfg.alpha = 0.5;

    // Assertions that need extra inputs are only defaulted on when those are present.
    const auto applicable = [&](const std::string& a) {
        if (a == "lambda") return cfg.expect_lambda.has_value();
        if (a == "duality") return cfg.weight == "geometric" && cfg.potential.empty();
        if (a == "measure_fd") return cfg.observable.has_value();
        if (a == "expected_slope") return cfg.expect_slope.has_value();
        if (a == "second_derivative" && cfg.kind == Kind::ExampleAffine) {
            return cfg.affine_family == "lipschitz" || cfg.affine_family == "cubic";
        }
        if (a == "constant_g") return cfg.affine_family == "constant";
        return true;
    };
    const auto& names = assertion_names(cfg.kind);
    if (assertions_value) {
        for (const auto& a : split(assertions_value->text, ',')) {
            if (std::find(names.begin(), names.end(), a) == names.end()) {
                fail_at(assertions_value->line, assertions_value->column,
                        "unknown assertion '" + a + "' for kind " + std::string(kind_name(cfg.kind)));
            }
            if (!applicable(a)) {
                fail_at(assertions_value->line, assertions_value->column,
                        "assertion '" + a + "' needs inputs this config does not provide");
            }
            if (cfg.wants(a)) fail_at(assertions_value->line, assertions_value->column, "assertion '" + a + "' listed twice");
            cfg.assertions.push_back(a);
        }
    } else {
        for (const auto& a : names) {
            if (applicable(a)) cfg.assertions.push_back(a);
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigParseError) {
            const std::string detail = std::string(e.what()).substr(to_string(e.code()).size() + 2);
            throw Error(ErrorCode::ConfigParseError, path.string() + ": " + detail);
        }
        throw;
    }
}

MapFamily build_map(const ExperimentConfig& cfg) {
    std::vector<TrigSeries> perturbations;
    for (const auto& p : cfg.perturbations) {
        TrigSeries s = TrigSeries::normalized({p.terms.begin(), p.terms.end()});
        s.c0 = p.c0;
        perturbations.push_back(std::move(s));
    }
    TrigSeries base = TrigSeries::normalized({cfg.map_base.terms.begin(), cfg.map_base.terms.end()});
    base.c0 = cfg.map_base.c0;
    return trig_family(cfg.degree, std::move(base), std::move(perturbations), cfg.u_power);
}

Weight build_weight(const ExperimentConfig& cfg, const MapFamily& map) {
    Weight base = cfg.weight == "geometric" ? geometric_weight(map) : constant_weight(cfg.weight_constant, map.param_dim);
    bool plain = cfg.potential.empty();
    for (const auto& c : cfg.couplings) plain = plain && c.empty();
    if (plain) return base;
    return exponential_weight(std::move(base), cfg.potential, cfg.couplings);
}

} // namespace fpdiff::cli
