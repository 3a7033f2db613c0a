#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/eval.hpp"
#include "bankml/model_io.hpp"

namespace bankml {

enum class ModelKind { logreg, forest, svm };

inline ModelKind parse_model_kind(const std::string& s) {
    if (s == "logreg") return ModelKind::logreg;
    if (s == "forest") return ModelKind::forest;
    if (s == "svm") return ModelKind::svm;
    throw ConfigError("unknown model '" + s + "', expected logreg, forest, or svm");
}

inline std::string model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::logreg: return "logreg";
        case ModelKind::forest: return "forest";
        case ModelKind::svm: return "svm";
    }
    return "";
}

namespace detail {

inline std::size_t json_to_count(const std::string& name, const json& v) {
    if (v.is_number_integer()) {
        const auto i = v.get<long long>();
        if (i < 0) throw ConfigError("parameter '" + name + "' must be non-negative");
        return static_cast<std::size_t>(i);
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && d == std::floor(d)) return static_cast<std::size_t>(d);
    }
    throw ConfigError("parameter '" + name + "' must be a non-negative integer");
}

inline double json_to_number(const std::string& name, const json& v) {
    if (!v.is_number()) throw ConfigError("parameter '" + name + "' must be a number");
    return v.get<double>();
}

struct SvmParams {
    double C = 1.0;
    std::string kernel = "linear";
    double gamma = 0.0; // 0 resolves to 1/m at fit time
    double tol = 1e-3;
    int max_passes = 1000;
};

inline Kernel resolve_kernel(const SvmParams& p, std::size_t m) {
    if (p.kernel == "linear") return Kernel::linear();
    if (p.kernel == "rbf") {
        return Kernel::rbf(p.gamma > 0.0 ? p.gamma : 1.0 / static_cast<double>(m));
    }
    throw ConfigError("unknown kernel '" + p.kernel + "', expected linear or rbf");
}

} // namespace detail

// One fit from a named-parameter assignment; unknown names are rejected so
// grid configs fail loudly. SVM calibration is skipped inside
// cross-validation, where only the sign is scored.
inline AnyModel fit_any(ModelKind kind, const ParamSet& params, const Dataset& d,
                        std::uint64_t seed, unsigned jobs, bool calibrate) {
    AnyModel any;
    any.kind = model_kind_name(kind);
    switch (kind) {
        case ModelKind::logreg: {
            LogisticConfig cfg;
            for (const auto& [name, v] : params) {
                if (name == "ridge") {
                    cfg.ridge = detail::json_to_number(name, v);
                } else if (name == "max_iter") {
                    cfg.max_iter = static_cast<int>(detail::json_to_count(name, v));
                } else if (name == "grad_tol") {
                    cfg.grad_tol = detail::json_to_number(name, v);
                } else {
                    throw ConfigError("unknown logreg parameter '" + name + "'");
                }
            }
            any.logreg = fit_logistic(d, cfg);
            break;
        }
        case ModelKind::forest: {
            ForestConfig cfg;
            cfg.seed = seed;
            cfg.jobs = jobs;
            for (const auto& [name, v] : params) {
                if (name == "B") {
                    cfg.trees = detail::json_to_count(name, v);
                } else if (name == "p") {
                    cfg.features_per_split = detail::json_to_count(name, v);
                } else if (name == "min_samples_split") {
                    cfg.min_samples_split = detail::json_to_count(name, v);
                } else if (name == "bootstrap") {
                    if (!v.is_boolean()) throw ConfigError("parameter 'bootstrap' must be a boolean");
                    cfg.bootstrap = v.get<bool>();
                } else {
                    throw ConfigError("unknown forest parameter '" + name + "'");
                }
            }
            any.forest = fit_forest(d, cfg);
            break;
        }
        case ModelKind::svm: {
            detail::SvmParams p;
            for (const auto& [name, v] : params) {
                if (name == "C") {
                    p.C = detail::json_to_number(name, v);
                } else if (name == "kernel") {
                    if (v.is_string()) {
                        p.kernel = v.get<std::string>();
                    } else if (v.is_object()) {
                        p.kernel = v.at("type").get<std::string>();
                        if (v.contains("gamma")) p.gamma = v.at("gamma").get<double>();
                    } else {
                        throw ConfigError("parameter 'kernel' must be a string or object");
                    }
                } else if (name == "gamma") {
                    p.gamma = detail::json_to_number(name, v);
                } else if (name == "tol") {
                    p.tol = detail::json_to_number(name, v);
                } else if (name == "max_passes") {
                    p.max_passes = static_cast<int>(detail::json_to_count(name, v));
                } else {
                    throw ConfigError("unknown svm parameter '" + name + "'");
                }
            }
            SvmConfig cfg;
            cfg.C = p.C;
            cfg.kernel = detail::resolve_kernel(p, d.m());
            cfg.tol = p.tol;
            cfg.max_passes = p.max_passes;
            cfg.seed = seed;
            SvmModel model = fit_svm(d, cfg);
            if (calibrate) model = fit_platt(std::move(model), d);
            any.svm = std::move(model);
            break;
        }
    }
    return any;
}

inline bool model_converged(const AnyModel& any) {
    if (any.logreg) return any.logreg->converged;
    if (any.svm) return any.svm->converged;
    return true;
}

inline std::vector<std::string> model_warnings(const AnyModel& any) {
    if (any.logreg) return any.logreg->warnings;
    if (any.svm) return any.svm->warnings;
    return {};
}

inline json model_to_json(const AnyModel& any) {
    if (any.logreg) return model_to_json(*any.logreg);
    if (any.forest) return model_to_json(*any.forest);
    return model_to_json(*any.svm);
}

inline TrainFactory cv_factory(ModelKind kind, std::uint64_t seed) {
    return [kind, seed](const ParamSet& params) -> TrainFn {
        return [kind, seed, params](const Dataset& train) -> Predictor {
            auto model = std::make_shared<AnyModel>(
                fit_any(kind, params, train, seed, 1, /*calibrate=*/false));
            return [model](const std::vector<double>& x) { return model->predict(x); };
        };
    };
}

inline std::vector<GridAxis> default_grid(ModelKind kind, std::size_t m) {
    switch (kind) {
        case ModelKind::logreg:
            return {{"ridge", {1e-8, 1e-4, 1e-2}}};
        case ModelKind::forest: {
            GridAxis p_axis{"p", {}};
            const auto top =
                static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m)))) + 1;
            for (std::size_t p = 1; p <= top; ++p) p_axis.values.push_back(p);
            return {{"B", {50, 100, 200}}, std::move(p_axis)};
        }
        case ModelKind::svm:
            return {{"C", {0.1, 1.0, 10.0, 100.0}}, {"kernel", {"linear", "rbf"}}};
    }
    return {};
}

struct GridConfig {
    ModelKind kind;
    std::vector<GridAxis> axes;
    std::size_t folds = 5;
    std::optional<std::uint64_t> seed;
};

// Config file layout: {"model": ..., "axes": {name: [values], ...},
// "folds": k, "seed": s}; axis order follows the file.
inline GridConfig parse_grid_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::ordered_json::exception& e) {
        throw DataError("invalid JSON in '" + path + "': " + e.what());
    }
    GridConfig cfg;
    try {
        cfg.kind = parse_model_kind(j.at("model").get<std::string>());
        if (j.contains("folds")) cfg.folds = j.at("folds").get<std::size_t>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& [name, values] : j.at("axes").items()) {
            GridAxis axis{name, {}};
            if (!values.is_array()) {
                throw ConfigError("grid axis '" + name + "' must be an array of values");
            }
            for (const auto& v : values) axis.values.push_back(v);
            cfg.axes.push_back(std::move(axis));
        }
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ConfigError("bad grid config '" + path + "': " + e.what());
    }
    if (cfg.axes.empty()) throw ConfigError("grid config '" + path + "' declares no axes");
    return cfg;
}

inline std::string render_grid_csv(const GridResult& res) {
    std::string out;
    const auto& first = res.rows.front().params;
    for (const auto& [name, _] : first) out += csv::quote(name) + ",";
    std::size_t k = 0;
    for (const auto& row : res.rows) {
        if (!row.failed) {
            k = row.fold_scores.size();
            break;
        }
    }
    for (std::size_t f = 1; f <= k; ++f) out += "fold" + std::to_string(f) + ",";
    out += "mean\n";
    for (const auto& row : res.rows) {
        for (const auto& [_, v] : row.params) {
            if (v.is_string()) {
                out += csv::quote(v.get<std::string>());
            } else {
                out += v.dump();
            }
            out += ",";
        }
        if (row.failed) {
            for (std::size_t f = 0; f < k; ++f) out += "NA,";
            out += "NA\n";
            continue;
        }
        for (double s : row.fold_scores) {
            out += std::isnan(s) ? "NA" : csv::format_double(s);
            out += ",";
        }
        out += csv::format_double(row.mean) + "\n";
    }
    return out;
}

} // namespace bankml
