#pragma once

// Experiment definition files.
//
//   {
//     "name": "figure3",                       (optional, default: family name)
//     "description": "...",                    (optional)
//     "family": "categorical_grouping",
//     "params": { "num_categories": 20, "cutoff": 4 },
//     "grid": { "n": [5, 10], "m": ["n", 1], "protocol": ["leaky"], "noise_sigma": [0.25, 1.5] },
//     "mc": { "reps": 100000, "seed": 1 },
//     "output": { "path": "figure3.csv" }
//   }
//
// Any numeric family parameter may be swept by listing it under "grid"; the
// grid is the cartesian product of every list. Unknown keys are errors.

#include "prepbias/experiments.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace prepbias {

struct GridPoint {
    ExperimentConfig config;
    double p_or_c = 0.0;
    double extra_param = 0.0;
};

struct RunManifest {
    std::string config_path;
    std::string name;
    std::vector<GridPoint> grid;
    std::int64_t n_reps = 0;
    std::uint64_t seed = 1;
    std::string output_path;
};

namespace detail {

using nlohmann::json;

inline const std::set<std::string>& numeric_param_keys(FamilyKind kind) {
    static const std::set<std::string> varsel{"p", "big_m", "scale_c", "select_k"};
    static const std::set<std::string> categorical{"num_categories", "cutoff", "noise_sigma"};
    static const std::set<std::string> lasso{"p", "lambda", "noise_sigma", "tol", "max_iter"};
    static const std::set<std::string> pathological{};
    switch (kind) {
        case FamilyKind::varsel_linreg: return varsel;
        case FamilyKind::categorical_grouping: return categorical;
        case FamilyKind::rescaled_lasso: return lasso;
        default: return pathological;
    }
}

inline const std::set<std::string>& enum_param_keys(FamilyKind kind) {
    static const std::set<std::string> varsel{"base_dist", "selection_score"};
    static const std::set<std::string> lasso{"variant", "design"};
    static const std::set<std::string> pathological{"x0"};
    static const std::set<std::string> none{};
    switch (kind) {
        case FamilyKind::varsel_linreg: return varsel;
        case FamilyKind::rescaled_lasso: return lasso;
        case FamilyKind::pathological: return pathological;
        default: return none;
    }
}

inline FamilyKind parse_family(const json& value) {
    if (!value.is_string()) throw ConfigError("family: expected a string");
    const auto name = value.get<std::string>();
    if (name == "varsel_linreg") return FamilyKind::varsel_linreg;
    if (name == "categorical_grouping") return FamilyKind::categorical_grouping;
    if (name == "rescaled_lasso") return FamilyKind::rescaled_lasso;
    if (name == "pathological") return FamilyKind::pathological;
    throw ConfigError("family: unknown family '" + name + "'");
}

inline void check_keys(const json& object, const std::string& where, const std::set<std::string>& allowed) {
    if (!object.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : object.items())
        if (!allowed.contains(item.key())) throw ConfigError(where + "." + item.key() + ": unknown key");
}

inline double as_number(const json& value, const std::string& key) {
    if (!value.is_number()) throw ConfigError(key + ": expected a number");
    return value.get<double>();
}

inline std::int64_t as_integer(const json& value, const std::string& key) {
    if (!value.is_number_integer()) throw ConfigError(key + ": expected an integer");
    return value.get<std::int64_t>();
}

inline std::string as_string(const json& value, const std::string& key) {
    if (!value.is_string()) throw ConfigError(key + ": expected a string");
    return value.get<std::string>();
}

/// Integer-valued parameters must be integral even when they come from a numeric list.
inline Index to_index(double value, const std::string& key) {
    if (value != static_cast<double>(static_cast<std::int64_t>(value)))
        throw ConfigError(key + ": expected an integer");
    return static_cast<Index>(value);
}

inline bool is_integer_key(const std::string& key) {
    return key == "p" || key == "big_m" || key == "select_k" || key == "num_categories" || key == "cutoff" ||
           key == "max_iter";
}

/// Builds one ExperimentConfig from resolved numeric values and enum strings.
inline ExperimentConfig build_config(FamilyKind kind, const std::map<std::string, double>& numbers,
                                     const json& params, Index n, Index m, EvalProtocol protocol) {
    auto number = [&](const std::string& key) -> double {
        const auto it = numbers.find(key);
        if (it == numbers.end()) throw ConfigError("params." + key + ": missing");
        return it->second;
    };
    auto number_or = [&](const std::string& key, double fallback) {
        const auto it = numbers.find(key);
        return it == numbers.end() ? fallback : it->second;
    };
    auto text_or = [&](const std::string& key, const std::string& fallback) {
        return params.contains(key) ? as_string(params.at(key), "params." + key) : fallback;
    };

    ExperimentConfig cfg;
    cfg.protocol = protocol;
    switch (kind) {
        case FamilyKind::varsel_linreg: {
            VarSelConfig v;
            v.p = to_index(number("p"), "params.p");
            v.big_m = to_index(number("big_m"), "params.big_m");
            v.scale_c = number("scale_c");
            v.select_k = to_index(number("select_k"), "params.select_k");
            const auto base = text_or("base_dist", "gaussian");
            if (base == "gaussian") v.base_dist = BaseDist::gaussian;
            else if (base == "student_t4") v.base_dist = BaseDist::student_t4;
            else throw ConfigError("params.base_dist: expected 'gaussian' or 'student_t4'");
            const auto score = text_or("selection_score", "variance");
            if (score == "variance") cfg.selection_score = SelectionScore::variance;
            else if (score == "sum_squares") cfg.selection_score = SelectionScore::sum_squares;
            else throw ConfigError("params.selection_score: expected 'variance' or 'sum_squares'");
            v.n = n;
            v.m = m;
            cfg.params = v;
            break;
        }
        case FamilyKind::categorical_grouping: {
            CategoricalConfig c;
            c.num_categories = static_cast<int>(to_index(number("num_categories"), "params.num_categories"));
            c.cutoff = static_cast<int>(to_index(number("cutoff"), "params.cutoff"));
            c.noise_sigma = number("noise_sigma");
            c.n = n;
            c.m = m;
            cfg.params = c;
            break;
        }
        case FamilyKind::rescaled_lasso: {
            LassoConfig l;
            l.p = to_index(number("p"), "params.p");
            l.lambda = number("lambda");
            l.noise_sigma = number("noise_sigma");
            const auto variant = text_or("variant", "full_cd");
            if (variant == "full_cd") l.variant = LassoVariant::full_cd;
            else if (variant == "simplified") l.variant = LassoVariant::simplified;
            else throw ConfigError("params.variant: expected 'full_cd' or 'simplified'");
            const auto design = text_or("design", "gaussian");
            if (design == "gaussian") l.design = LassoDesign::gaussian;
            else if (design == "orthogonal") l.design = LassoDesign::orthogonal;
            else throw ConfigError("params.design: expected 'gaussian' or 'orthogonal'");
            cfg.lasso_options.tol = number_or("tol", cfg.lasso_options.tol);
            cfg.lasso_options.max_iter = to_index(number_or("max_iter", static_cast<double>(cfg.lasso_options.max_iter)),
                                                  "params.max_iter");
            if (!(cfg.lasso_options.tol > 0.0)) throw ConfigError("params.tol: must be > 0");
            if (cfg.lasso_options.max_iter < 1) throw ConfigError("params.max_iter: must be >= 1");
            l.n = n;
            l.m = m;
            cfg.params = l;
            break;
        }
        case FamilyKind::pathological: {
            PathologicalConfig pc;
            if (params.contains("x0")) {
                const auto& x0 = params.at("x0");
                if (!x0.is_array()) throw ConfigError("params.x0: expected an array of numbers");
                pc.x0.clear();
                for (const auto& v : x0) pc.x0.push_back(as_number(v, "params.x0"));
            }
            pc.n = n;
            pc.m = m;
            cfg.params = pc;
            break;
        }
    }
    try {
        std::visit([](const auto& p) { p.validate(); }, cfg.params);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("grid point n=") + std::to_string(n) + " m=" + std::to_string(m) + ": " +
                          e.what());
    }
    return cfg;
}

inline double p_or_c_of(const ExperimentConfig& cfg) {
    switch (cfg.family()) {
        case FamilyKind::varsel_linreg: return static_cast<double>(std::get<VarSelConfig>(cfg.params).p);
        case FamilyKind::categorical_grouping:
            return static_cast<double>(std::get<CategoricalConfig>(cfg.params).num_categories);
        case FamilyKind::rescaled_lasso: return static_cast<double>(std::get<LassoConfig>(cfg.params).p);
        default: return 1.0;
    }
}

/// Per-family swept parameter reported in the CSV's extra_param column.
inline double extra_param_of(const ExperimentConfig& cfg) {
    switch (cfg.family()) {
        case FamilyKind::varsel_linreg: return std::get<VarSelConfig>(cfg.params).scale_c;
        case FamilyKind::categorical_grouping: return std::get<CategoricalConfig>(cfg.params).noise_sigma;
        case FamilyKind::rescaled_lasso: return std::get<LassoConfig>(cfg.params).lambda;
        default: return std::get<PathologicalConfig>(cfg.params).x0.front();
    }
}

}  // namespace detail

/// Parses and validates an experiment definition. Throws ConfigError naming the offending key.
inline RunManifest parse_manifest(const std::string& text, const std::string& config_path = {}) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    detail::check_keys(root, "config", {"name", "description", "family", "params", "grid", "mc", "output"});
    if (!root.contains("family")) throw ConfigError("family: missing");
    const FamilyKind kind = detail::parse_family(root.at("family"));

    RunManifest manifest;
    manifest.config_path = config_path;
    manifest.name = root.contains("name") ? detail::as_string(root.at("name"), "name") : std::string(family_name(kind));
    if (root.contains("description")) detail::as_string(root.at("description"), "description");

    const auto& numeric_keys = detail::numeric_param_keys(kind);
    const auto& enum_keys = detail::enum_param_keys(kind);

    // params
    const json params = root.contains("params") ? root.at("params") : json::object();
    std::set<std::string> allowed_params(numeric_keys);
    allowed_params.insert(enum_keys.begin(), enum_keys.end());
    detail::check_keys(params, "params", allowed_params);
    std::map<std::string, double> fixed;
    for (const auto& item : params.items()) {
        if (!numeric_keys.contains(item.key())) continue;
        const double v = detail::as_number(item.value(), "params." + item.key());
        if (detail::is_integer_key(item.key())) detail::to_index(v, "params." + item.key());
        fixed[item.key()] = v;
    }

    // grid
    if (!root.contains("grid")) throw ConfigError("grid: missing");
    const json& grid = root.at("grid");
    std::set<std::string> allowed_grid{"n", "m", "protocol"};
    allowed_grid.insert(numeric_keys.begin(), numeric_keys.end());
    detail::check_keys(grid, "grid", allowed_grid);
    auto list_of = [&](const std::string& key) -> const json& {
        if (!grid.contains(key)) throw ConfigError("grid." + key + ": missing");
        const json& v = grid.at(key);
        if (!v.is_array() || v.empty()) throw ConfigError("grid." + key + ": expected a non-empty array");
        return v;
    };
    std::vector<Index> ns;
    for (const auto& v : list_of("n")) {
        const auto n = detail::as_integer(v, "grid.n");
        if (n < 1) throw ConfigError("grid.n: values must be >= 1");
        ns.push_back(static_cast<Index>(n));
    }
    // m entries: integer, or "n" for m = n
    std::vector<std::int64_t> ms;
    for (const auto& v : list_of("m")) {
        if (v.is_string()) {
            if (v.get<std::string>() != "n") throw ConfigError("grid.m: strings other than \"n\" are not allowed");
            ms.push_back(-1);
        } else {
            const auto m = detail::as_integer(v, "grid.m");
            if (m < 1) throw ConfigError("grid.m: values must be >= 1");
            ms.push_back(m);
        }
    }
    std::vector<EvalProtocol> protocols;
    if (grid.contains("protocol")) {
        for (const auto& v : list_of("protocol")) {
            const auto name = detail::as_string(v, "grid.protocol");
            if (name == "leaky") protocols.push_back(EvalProtocol::leaky);
            else if (name == "proper") protocols.push_back(EvalProtocol::proper);
            else throw ConfigError("grid.protocol: expected 'leaky' or 'proper'");
        }
    } else {
        protocols.push_back(EvalProtocol::leaky);
    }
    std::vector<std::pair<std::string, std::vector<double>>> sweeps;
    for (const auto& item : grid.items()) {
        if (!numeric_keys.contains(item.key())) continue;
        if (fixed.contains(item.key()))
            throw ConfigError("grid." + item.key() + ": also set in params");
        std::vector<double> values;
        for (const auto& v : list_of(item.key())) {
            const double x = detail::as_number(v, "grid." + item.key());
            if (detail::is_integer_key(item.key())) detail::to_index(x, "grid." + item.key());
            values.push_back(x);
        }
        sweeps.emplace_back(item.key(), std::move(values));
    }

    // cartesian product: sweeps (alphabetical key order), then n, m, protocol
    std::vector<std::map<std::string, double>> combos{fixed};
    for (const auto& [key, values] : sweeps) {
        std::vector<std::map<std::string, double>> next;
        for (const auto& base : combos)
            for (double v : values) {
                auto combo = base;
                combo[key] = v;
                next.push_back(std::move(combo));
            }
        combos = std::move(next);
    }
    for (const auto& combo : combos)
        for (Index n : ns)
            for (std::int64_t m_raw : ms)
                for (EvalProtocol protocol : protocols) {
                    const Index m = m_raw < 0 ? n : static_cast<Index>(m_raw);
                    GridPoint point;
                    point.config = detail::build_config(kind, combo, params, n, m, protocol);
                    point.p_or_c = detail::p_or_c_of(point.config);
                    point.extra_param = detail::extra_param_of(point.config);
                    manifest.grid.push_back(std::move(point));
                }

    // mc
    if (!root.contains("mc")) throw ConfigError("mc: missing");
    const json& mc = root.at("mc");
    detail::check_keys(mc, "mc", {"reps", "seed"});
    if (!mc.contains("reps")) throw ConfigError("mc.reps: missing");
    manifest.n_reps = detail::as_integer(mc.at("reps"), "mc.reps");
    if (manifest.n_reps < 2) throw ConfigError("mc.reps: must be >= 2");
    if (mc.contains("seed")) {
        const auto seed = detail::as_integer(mc.at("seed"), "mc.seed");
        if (seed < 0) throw ConfigError("mc.seed: must be >= 0");
        manifest.seed = static_cast<std::uint64_t>(seed);
    }

    // output
    if (root.contains("output")) {
        const json& output = root.at("output");
        detail::check_keys(output, "output", {"path"});
        if (output.contains("path")) manifest.output_path = detail::as_string(output.at("path"), "output.path");
    }
    if (manifest.output_path.empty()) manifest.output_path = manifest.name + ".csv";
    return manifest;
}

inline RunManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str(), path);
}

}  // namespace prepbias
