#include "breather/lab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace breather::lab {

namespace {

using Ints = std::vector<std::int64_t>;
using Reals = std::vector<double>;

// Required keys keep an example value for default_config_text.
ParamSpec req(std::string key, ValueType type, Value example, std::string doc,
              std::vector<std::string> choices = {}) {
    return {std::move(key), type, true, std::move(example), std::move(choices), std::move(doc)};
}

ParamSpec opt(std::string key, ValueType type, Value fallback, std::string doc,
              std::vector<std::string> choices = {}) {
    return {std::move(key), type, false, std::move(fallback), std::move(choices), std::move(doc)};
}

constexpr double kTwoPi = 6.283185307179586;
constexpr double kFirstZeroRadius = 1.8137993642342178;  // pi / sqrt(3)

std::vector<ParamSpec> residual_schema() {
    using enum ValueType;
    return {
        req("family", string, std::string("breather"), "solution family", {"plane", "breather", "off_shell", "wrong_sign"}),
        opt("form", string, std::string("kg"), "residual operator", {"kg", "qhj"}),
        opt("alpha", real, 0.3, "breather intensity"),
        opt("l", integer, std::int64_t{0}, "orbital index of the breather term"),
        opt("n", integer, std::int64_t{0}, "azimuthal index of the breather term"),
        opt("boost_v", real, 0.0, "boost velocity along x"),
        opt("momentum", real, 0.0, "plane-wave momentum along x"),
        opt("omega", real, 0.9, "frequency of the off-shell control"),
        opt("potential", real, 0.1, "e U of the wrong-sign control"),
        opt("half_extent", real, 6.0, "spatial box is [-half_extent, half_extent]^3"),
        opt("time_extent", real, kTwoPi, "time window [0, time_extent]"),
        opt("levels", integer_list, Ints{17, 33, 65}, "points per axis at each refinement"),
        opt("stencil_order", integer, std::int64_t{2}, "finite-difference order (2 or 4)"),
        opt("order_tolerance", real, 0.2, "allowed deviation of the measured order"),
        opt("plateau_tolerance", real, 0.05, "relative tolerance on control plateaus"),
        opt("unwrap", boolean, true, "qhj form: unwrap S from sampled Psi instead of the closed form"),
    };
}

std::vector<ParamSpec> evolve_schema() {
    using enum ValueType;
    return {
        req("periods", real, 5.0, "duration in breather periods (pi each)"),
        opt("alpha", real, 0.3, "breather intensity"),
        opt("half_extent", real, 4.0, "spatial box half width"),
        opt("h", real, 0.05, "grid spacing"),
        opt("dt_factor", real, 0.5, "dt = dt_factor * h"),
        opt("boundary", string, std::string("analytic_dirichlet"), "boundary condition",
            {"analytic_dirichlet", "periodic"}),
        opt("radius", real, kFirstZeroRadius, "localization radius"),
        opt("probe_every", integer, std::int64_t{63}, "steps between probe samples"),
        opt("l2_tolerance", real, 5e-3, "bound on the final relative L2 error"),
        opt("drift_tolerance", real, 0.1, "bound on the relative localization drift"),
        opt("write_field", boolean, false, "dump the final field in BRTH format"),
    };
}

std::vector<ParamSpec> boost_schema() {
    using enum ValueType;
    return {
        req("v", real, 0.3, "boost velocity along x"),
        opt("alpha", real, 0.3, "breather intensity"),
        opt("h", real, 0.1, "evolution grid spacing"),
        opt("dt_factor", real, 0.5, "dt = dt_factor * h"),
        opt("duration", real, 10.0, "evolution time"),
        opt("sample_interval", real, 1.0, "time between envelope samples"),
        opt("half_width", real, 4.0, "box half width around the moving envelope"),
        opt("velocity_tolerance", real, 0.01, "allowed drift-velocity error"),
        opt("levels", integer_list, Ints{17, 33, 65}, "points per axis for the residual study"),
        opt("half_extent", real, 6.0, "residual box half width"),
        opt("time_extent", real, kTwoPi, "residual time window"),
        opt("order_tolerance", real, 0.2, "allowed order deviation"),
    };
}

std::vector<ParamSpec> quantize_schema() {
    using enum ValueType;
    return {
        req("d", real, 50.0, "train period"),
        opt("alpha", real, 0.1, "breather intensity"),
        opt("K", integer, std::int64_t{200}, "images on each side"),
        opt("n_max", integer, std::int64_t{5}, "highest quantum number scanned"),
        opt("subdivisions", integer, std::int64_t{4}, "scan points per half quantum"),
        opt("samples", integer, std::int64_t{10}, "random sample points"),
        opt("path_step", real, 0.05, "branch-tracking step along x"),
        opt("quantized_factor", real, 10.0, "quantized defect must stay below this many certificates"),
        opt("midpoint_factor", real, 50.0, "midpoint defect must exceed this many certificates"),
        opt("runtime_limit", real, 60.0, "seconds allowed for the scan"),
    };
}

std::vector<ParamSpec> two_wall_schema() {
    using enum ValueType;
    return {
        req("d", real, 50.0, "doubled period (walls at 0 and d/2)"),
        opt("alpha", real, 0.1, "breather intensity"),
        opt("K", integer, std::int64_t{200}, "images on each side"),
        opt("n", integer, std::int64_t{1}, "quantum number, p = 2 pi n / d"),
        opt("samples", integer, std::int64_t{11}, "points across the interval"),
        opt("path_step", real, 0.05, "branch-tracking step"),
        opt("quantized_factor", real, 10.0, "wall continuity bound in certificates"),
    };
}

std::vector<ParamSpec> torus_schema() {
    using enum ValueType;
    return {
        req("R", real, 200.0, "centerline radius"),
        opt("d_duct", real, 10.0, "duct width"),
        opt("modes", integer_list, Ints{5, 10}, "mode numbers n"),
        opt("alpha", real, 0.1, "breather intensity"),
        opt("samples", integer, std::int64_t{20000}, "angular samples on the centerline"),
        opt("times", real_list, Reals{0.0, 250.0, 500.0, 1000.0}, "tracking times"),
        opt("winding_tolerance", real, 1e-8, "relative winding tolerance"),
        opt("tracking_cells", real, 1.0, "tracking tolerance in angular cells"),
    };
}

std::vector<ParamSpec> semiclassical_schema() {
    using enum ValueType;
    return {
        req("omega0", real, 0.01, "oscillator frequency of the quadratic potential"),
        opt("beta", real, 0.002, "initial curvature of S_c"),
        opt("p0", real, 0.02, "initial momentum"),
        opt("hbar", real, 1.0, "hbar in the correction"),
        opt("t_final", real, 100.0, "end of the correction window"),
        opt("x_half", real, 20.0, "half width of the 1D grid"),
        opt("nx", integer, std::int64_t{81}, "grid points in x"),
        opt("nt", integer, std::int64_t{201}, "grid time levels"),
        opt("oracle_nx", integer, std::int64_t{401}, "points of the direct integration"),
        opt("oracle_dt", real, 0.01, "time step of the direct integration"),
        opt("rel_tolerance", real, 1e-4, "relative tolerance against the direct integration"),
        opt("trajectory_dt", real, 0.1, "RK4 step of the trajectory"),
        opt("g", real, 0.001, "uniform field strength"),
        opt("levels", integer_list, Ints{17, 33, 65}, "refinements of the classical residual study"),
        opt("half_extent", real, 10.0, "classical residual box half width"),
        opt("time_extent", real, 20.0, "classical residual time window"),
        opt("order_tolerance", real, 0.2, "allowed order deviation"),
        opt("potentials", real_list, Reals{0.0, 0.01, 0.02}, "constant backgrounds U"),
        opt("alpha", real, 0.1, "breather intensity for the frequency lock"),
        opt("periods", integer, std::int64_t{10}, "clock periods in the frequency-lock window"),
        opt("rate_tolerance", real, 1e-3, "allowed phase-rate error"),
    };
}

std::vector<ParamSpec> advect_schema() {
    using enum ValueType;
    return {
        req("v", real, 0.6, "background group velocity along x"),
        opt("width", real, 1.0, "Gaussian width"),
        opt("half_extent", real, 10.0, "grid half width"),
        opt("t_final", real, 5.0, "transport time"),
        opt("levels", integer_list, Ints{101, 201, 401}, "grid points per refinement"),
        opt("cfl", real, 0.4, "Courant number"),
        opt("order_min", real, 1.8, "lowest acceptable order"),
        opt("drift_max", real, 0.01, "largest acceptable amplitude drift"),
    };
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

template <typename T>
bool parse_number(const std::string& s, T& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

const char* type_name(ValueType t) {
    switch (t) {
        case ValueType::integer: return "an integer";
        case ValueType::real: return "a real number";
        case ValueType::boolean: return "true or false";
        case ValueType::string: return "a string";
        case ValueType::integer_list: return "a comma-separated list of integers";
        case ValueType::real_list: return "a comma-separated list of reals";
    }
    return "?";
}

Value convert(const ParamSpec& spec, const std::string& raw, std::size_t line) {
    auto mismatch = [&]() {
        return ConfigError(at_line(line) + "key '" + spec.key + "' expects " + type_name(spec.type) + ", got '" +
                           raw + "'");
    };
    switch (spec.type) {
        case ValueType::integer: {
            std::int64_t v = 0;
            if (!parse_number(raw, v)) throw mismatch();
            return v;
        }
        case ValueType::real: {
            double v = 0;
            if (!parse_number(raw, v)) throw mismatch();
            return v;
        }
        case ValueType::boolean:
            if (raw == "true") return true;
            if (raw == "false") return false;
            throw mismatch();
        case ValueType::string:
            if (raw.empty()) throw mismatch();
            if (!spec.choices.empty() &&
                std::find(spec.choices.begin(), spec.choices.end(), raw) == spec.choices.end()) {
                std::string all;
                for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
                throw ConfigError(at_line(line) + "key '" + spec.key + "' must be one of {" + all + "}, got '" +
                                  raw + "'");
            }
            return raw;
        case ValueType::integer_list: {
            Ints out;
            for (const auto& p : split_list(raw)) {
                std::int64_t v = 0;
                if (!parse_number(p, v)) throw mismatch();
                out.push_back(v);
            }
            if (out.empty()) throw mismatch();
            return out;
        }
        case ValueType::real_list: {
            Reals out;
            for (const auto& p : split_list(raw)) {
                double v = 0;
                if (!parse_number(p, v)) throw mismatch();
                out.push_back(v);
            }
            if (out.empty()) throw mismatch();
            return out;
        }
    }
    throw mismatch();
}

struct Entry {
    std::string value;
    std::size_t line;
};

template <typename T>
const T& fetch(const std::map<std::string, Value>& m, const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw ConfigError("parameter '" + key + "' is not set");
    const T* v = std::get_if<T>(&it->second);
    if (!v) throw ConfigError("parameter '" + key + "' has a different type");
    return *v;
}

}  // namespace

std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::residual: return "residual";
        case Experiment::evolve: return "evolve";
        case Experiment::boost_check: return "boost-check";
        case Experiment::quantize_scan: return "quantize-scan";
        case Experiment::two_wall: return "two-wall";
        case Experiment::torus: return "torus";
        case Experiment::semiclassical: return "semiclassical";
        case Experiment::advect: return "advect";
    }
    return "?";
}

const std::vector<Experiment>& all_experiments() {
    static const std::vector<Experiment> all{Experiment::residual,      Experiment::evolve,
                                             Experiment::boost_check,   Experiment::quantize_scan,
                                             Experiment::two_wall,      Experiment::torus,
                                             Experiment::semiclassical, Experiment::advect};
    return all;
}

Experiment parse_experiment(std::string_view name) {
    for (const auto e : all_experiments()) {
        if (to_string(e) == name) return e;
    }
    std::string all;
    for (const auto e : all_experiments()) all += (all.empty() ? "" : ", ") + std::string(to_string(e));
    throw ConfigError("unknown experiment '" + std::string(name) + "' (expected one of " + all + ")");
}

const std::vector<ParamSpec>& schema(Experiment e) {
    static const std::map<Experiment, std::vector<ParamSpec>> all{
        {Experiment::residual, residual_schema()},
        {Experiment::evolve, evolve_schema()},
        {Experiment::boost_check, boost_schema()},
        {Experiment::quantize_scan, quantize_schema()},
        {Experiment::two_wall, two_wall_schema()},
        {Experiment::torus, torus_schema()},
        {Experiment::semiclassical, semiclassical_schema()},
        {Experiment::advect, advect_schema()},
    };
    return all.at(e);
}

std::int64_t ExperimentConfig::integer(const std::string& key) const { return fetch<std::int64_t>(parameters, key); }
double ExperimentConfig::real(const std::string& key) const { return fetch<double>(parameters, key); }
bool ExperimentConfig::boolean(const std::string& key) const { return fetch<bool>(parameters, key); }
const std::string& ExperimentConfig::string(const std::string& key) const {
    return fetch<std::string>(parameters, key);
}
const std::vector<std::int64_t>& ExperimentConfig::integers(const std::string& key) const {
    return fetch<Ints>(parameters, key);
}
const std::vector<double>& ExperimentConfig::reals(const std::string& key) const {
    return fetch<Reals>(parameters, key);
}

ExperimentConfig parse_config(std::string_view text) {
    std::map<std::string, std::map<std::string, Entry>> sections;
    std::map<std::string, std::size_t> section_lines;
    std::string current;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(at_line(line_no) + "malformed section header '" + line + "'");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (current != "experiment" && current != "parameters") {
                throw ConfigError(at_line(line_no) + "unknown section [" + current + "]");
            }
            if (section_lines.contains(current)) {
                throw ConfigError(at_line(line_no) + "section [" + current + "] repeats the one at line " +
                                  std::to_string(section_lines[current]));
            }
            section_lines[current] = line_no;
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(at_line(line_no) + "expected 'key = value', got '" + line + "'");
        if (current.empty()) throw ConfigError(at_line(line_no) + "key outside of any section");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError(at_line(line_no) + "empty key");
        auto& sec = sections[current];
        if (const auto it = sec.find(key); it != sec.end()) {
            throw ConfigError(at_line(line_no) + "duplicate key '" + key + "' (lines " +
                              std::to_string(it->second.line) + " and " + std::to_string(line_no) + ")");
        }
        sec[key] = {value, line_no};
    }

    if (!sections.contains("experiment")) throw ConfigError("missing [experiment] section");
    auto& exp = sections["experiment"];
    const std::size_t exp_line = section_lines["experiment"];
    if (!exp.contains("name")) {
        throw ConfigError(at_line(exp_line) + "[experiment] section must set 'name'");
    }
    ExperimentConfig cfg;
    try {
        cfg.experiment = parse_experiment(exp["name"].value);
    } catch (const ConfigError& e) {
        throw ConfigError(at_line(exp["name"].line) + e.what());
    }
    for (const auto& [key, entry] : exp) {
        if (key == "name") continue;
        if (key == "seed") {
            if (!parse_number(entry.value, cfg.seed)) {
                throw ConfigError(at_line(entry.line) + "key 'seed' expects a non-negative integer, got '" +
                                  entry.value + "'");
            }
            continue;
        }
        throw ConfigError(at_line(entry.line) + "unknown key '" + key + "' in [experiment]");
    }

    const auto& specs = schema(cfg.experiment);
    const auto& given = sections["parameters"];
    for (const auto& [key, entry] : given) {
        const bool known = std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.key == key; });
        if (!known) {
            throw ConfigError(at_line(entry.line) + "unknown key '" + key + "' for experiment " +
                              std::string(to_string(cfg.experiment)));
        }
    }
    for (const auto& spec : specs) {
        if (const auto it = given.find(spec.key); it != given.end()) {
            cfg.parameters[spec.key] = convert(spec, it->second.value, it->second.line);
        } else if (spec.required) {
            const std::size_t where = section_lines.contains("parameters") ? section_lines["parameters"] : exp_line;
            throw ConfigError(at_line(where) + "missing required key '" + spec.key + "' for experiment " +
                              std::string(to_string(cfg.experiment)));
        } else {
            cfg.parameters[spec.key] = spec.fallback;
            cfg.defaulted.push_back(spec.key);
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_value(const Value& v) {
    struct Visitor {
        std::string operator()(std::int64_t x) const { return std::to_string(x); }
        std::string operator()(double x) const {
            char buf[32];
            const auto r = std::to_chars(buf, buf + sizeof buf, x);  // shortest round-trip form
            return std::string(buf, r.ptr);
        }
        std::string operator()(bool x) const { return x ? "true" : "false"; }
        std::string operator()(const std::string& x) const { return x; }
        std::string operator()(const Ints& xs) const {
            std::string s;
            for (const auto x : xs) s += (s.empty() ? "" : ", ") + (*this)(x);
            return s;
        }
        std::string operator()(const Reals& xs) const {
            std::string s;
            for (const auto x : xs) s += (s.empty() ? "" : ", ") + (*this)(x);
            return s;
        }
    };
    return std::visit(Visitor{}, v);
}

std::string default_config_text(Experiment e) {
    std::ostringstream os;
    os << "[experiment]\nname = " << to_string(e) << "\nseed = 1\n\n[parameters]\n";
    for (const auto& spec : schema(e)) {
        os << "# " << spec.doc << "\n";
        os << spec.key << " = " << format_value(spec.fallback) << "\n";
    }
    return os.str();
}

}  // namespace breather::lab
