#include "multifrac/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace multifrac {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown field '" + it.key() + "' in " + where);
}

double get_num(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError("field '" + key + "' must be a number");
    return obj[key].get<double>();
}

std::uint64_t get_u64(const json& obj, const std::string& key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned())
        throw ConfigError("field '" + key + "' must be a non-negative integer");
    return obj[key].get<std::uint64_t>();
}

std::vector<double> get_vec(const json& obj, const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_array())
        throw ConfigError("field '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : obj[key]) {
        if (!x.is_number()) throw ConfigError("field '" + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

UniformGrid parse_grid(const json& g) {
    reject_unknown(g, {"t_min", "t_max", "n_cells"}, "grid");
    const double t_min = get_num(g, "t_min", 0.0);
    const double t_max = get_num(g, "t_max", 1.0);
    const std::uint64_t n = get_u64(g, "n_cells", 1024);
    try {
        return UniformGrid(t_min, t_max, static_cast<std::size_t>(n));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

KernelSpec parse_kernel(const json& k, double default_h_upper) {
    reject_unknown(k, {"family", "lambda", "cutoff", "sigma", "bounds", "h_upper"}, "kernel");
    KernelSpec spec;
    const std::string family = k.contains("family") ? k["family"].get<std::string>() : "ito_mbm";
    if (family == "ito_mbm") {
        spec.family = ItoMbmFamily{};
    } else if (family == "matern") {
        spec.family = MaternFamily{get_num(k, "lambda", 4.0)};
    } else if (family == "log_modified") {
        spec.family = LogModifiedFamily{};
    } else if (family == "truncated") {
        spec.family = TruncatedFamily{get_num(k, "cutoff", 1.0)};
    } else {
        throw ConfigError("unknown kernel family '" + family + "'");
    }
    spec.sigma = get_num(k, "sigma", 1.0);
    const double h_upper = get_num(k, "h_upper", default_h_upper);
    if (k.contains("bounds")) {
        const json& b = k["bounds"];
        reject_unknown(b, {"l_bar", "r_lower", "rho"}, "kernel.bounds");
        const ConditionABounds defaults = default_bounds(spec, h_upper);
        spec.bounds.l_bar = get_num(b, "l_bar", defaults.l_bar);
        spec.bounds.r_lower = get_num(b, "r_lower", defaults.r_lower);
        spec.bounds.rho = get_num(b, "rho", defaults.rho);
    } else {
        spec.bounds = default_bounds(spec, h_upper);
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

HurstSpec parse_hurst(const json& h) {
    reject_unknown(h,
                   {"variant", "value", "times", "values", "levels", "breakpoints", "center",
                    "amplitude", "driver_hurst", "driver_seed", "atoms", "weights"},
                   "hurst");
    HurstSpec spec;
    const std::string variant =
        h.contains("variant") ? h["variant"].get<std::string>() : "constant";
    if (variant == "constant") {
        spec.variant = ConstantHurst{get_num(h, "value", 0.5)};
    } else if (variant == "deterministic_function") {
        spec.variant = TableHurst{get_vec(h, "times"), get_vec(h, "values")};
    } else if (variant == "step") {
        spec.variant = StepHurst{get_vec(h, "levels"), get_vec(h, "breakpoints")};
    } else if (variant == "tanh_of_fbm") {
        spec.variant = TanhFbmHurst{get_num(h, "center", 0.9), get_num(h, "amplitude", 0.05),
                                    get_num(h, "driver_hurst", 0.2),
                                    get_u64(h, "driver_seed", 0)};
    } else if (variant == "stationary_constant_per_path") {
        try {
            spec.variant =
                StationaryConstantHurst{FiniteDistribution(get_vec(h, "atoms"),
                                                           get_vec(h, "weights"))};
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else {
        throw ConfigError("unknown hurst variant '" + variant + "'");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

}  // namespace

void RunConfig::finalize() {
    sim.grid = grid;
    sim.seed = seed;
    try {
        sim.validate();
        kernel.validate();
        hurst.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, {"schema", "seed", "grid", "kernel", "hurst", "sim", "analysis"},
                   "config");
    if (!doc.contains("schema") || !doc["schema"].is_number_integer() ||
        doc["schema"].get<int>() != 1)
        throw ConfigError("config requires \"schema\": 1");

    RunConfig cfg;
    cfg.seed = get_u64(doc, "seed", 42);
    if (doc.contains("grid")) cfg.grid = parse_grid(doc["grid"]);
    if (doc.contains("hurst")) cfg.hurst = parse_hurst(doc["hurst"]);
    // envelope defaults follow the declared Hurst range
    const double h_upper = hurst_upper_bound(cfg.hurst);
    if (doc.contains("kernel")) {
        cfg.kernel = parse_kernel(doc["kernel"], h_upper);
    } else {
        cfg.kernel.bounds = default_bounds(cfg.kernel, h_upper);
    }
    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        reject_unknown(s,
                       {"substeps", "tol_truncation", "singular_cell", "stream_id", "n_paths"},
                       "sim");
        cfg.sim.substeps = static_cast<std::size_t>(get_u64(s, "substeps", 8));
        cfg.sim.tol_truncation = get_num(s, "tol_truncation", 1e-3);
        if (s.contains("singular_cell")) {
            const std::string mode = s["singular_cell"].get<std::string>();
            if (mode == "left_point") {
                cfg.sim.singular_cell = SingularCellMode::left_point;
            } else if (mode == "variance_matched") {
                cfg.sim.singular_cell = SingularCellMode::variance_matched;
            } else {
                throw ConfigError("unknown singular_cell mode '" + mode + "'");
            }
        }
        cfg.sim.stream_id = get_u64(s, "stream_id", 0);
        cfg.n_paths = static_cast<std::size_t>(get_u64(s, "n_paths", 1));
        if (cfg.n_paths == 0) throw ConfigError("n_paths must be >= 1");
    }
    if (doc.contains("analysis")) {
        const json& a = doc["analysis"];
        reject_unknown(a, {"n_paths", "kc_p", "kc_claim"}, "analysis");
        cfg.analysis.n_paths = static_cast<std::size_t>(get_u64(a, "n_paths", 0));
        cfg.analysis.kc_p = get_num(a, "kc_p", 4.0);
        cfg.analysis.kc_claim = get_num(a, "kc_claim", 0.0);
    }
    cfg.finalize();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string hurst_spec_to_json(const HurstSpec& spec) {
    json j;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ConstantHurst>) {
                j["variant"] = "constant";
                j["value"] = v.value;
            } else if constexpr (std::is_same_v<T, TableHurst>) {
                j["variant"] = "deterministic_function";
                j["times"] = v.times;
                j["values"] = v.values;
            } else if constexpr (std::is_same_v<T, StepHurst>) {
                j["variant"] = "step";
                j["levels"] = v.levels;
                j["breakpoints"] = v.breakpoints;
            } else if constexpr (std::is_same_v<T, TanhFbmHurst>) {
                j["variant"] = "tanh_of_fbm";
                j["center"] = v.center;
                j["amplitude"] = v.amplitude;
                j["driver_hurst"] = v.driver_hurst;
                j["driver_seed"] = v.driver_seed;
            } else {
                j["variant"] = "stationary_constant_per_path";
                j["atoms"] = v.distribution.atoms;
                j["weights"] = v.distribution.weights;
            }
        },
        spec.variant);
    return j.dump();
}

std::string kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, ItoMbmFamily>) {
                j["family"] = "ito_mbm";
            } else if constexpr (std::is_same_v<T, MaternFamily>) {
                j["family"] = "matern";
                j["lambda"] = v.lambda;
            } else if constexpr (std::is_same_v<T, LogModifiedFamily>) {
                j["family"] = "log_modified";
            } else {
                j["family"] = "truncated";
                j["cutoff"] = v.cutoff;
            }
        },
        spec.family);
    if (const auto* c = std::get_if<double>(&spec.sigma)) j["sigma"] = *c;
    j["bounds"] = {{"l_bar", spec.bounds.l_bar},
                   {"r_lower", spec.bounds.r_lower},
                   {"rho", spec.bounds.rho}};
    return j.dump();
}

}  // namespace multifrac
