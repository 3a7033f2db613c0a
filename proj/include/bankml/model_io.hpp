#pragma once

#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/forest.hpp"
#include "bankml/logistic.hpp"
#include "bankml/standardize.hpp"
#include "bankml/svm.hpp"

namespace bankml {

using nlohmann::json;

inline json standardization_to_json(const Standardization& s) {
    json arr = json::array();
    for (std::size_t j = 0; j < s.mean.size(); ++j) {
        arr.push_back({{"mean", s.mean[j]}, {"std", s.std[j]}});
    }
    return arr;
}

inline Standardization standardization_from_json(const json& arr) {
    Standardization s;
    for (const auto& e : arr) {
        s.mean.push_back(e.at("mean").get<double>());
        s.std.push_back(e.at("std").get<double>());
    }
    return s;
}

// ---- logistic ----

inline json model_to_json(const LogisticModel& m) {
    json j;
    j["model"] = "logreg";
    j["schema"] = m.feature_codes;
    j["beta0"] = m.beta0;
    j["beta"] = m.beta;
    j["standardization"] =
        m.standardization ? standardization_to_json(*m.standardization) : json(nullptr);
    json diag;
    diag["converged"] = m.converged;
    diag["iterations"] = m.iterations;
    if (std::isfinite(m.final_grad_norm)) diag["final_grad_norm"] = m.final_grad_norm;
    diag["warnings"] = m.warnings;
    j["diagnostics"] = diag;
    return j;
}

inline LogisticModel logistic_from_json(const json& j) {
    LogisticModel m;
    m.feature_codes = j.at("schema").get<std::vector<std::string>>();
    m.beta0 = j.at("beta0").get<double>();
    m.beta = j.at("beta").get<std::vector<double>>();
    if (!j.at("standardization").is_null()) {
        m.standardization = standardization_from_json(j.at("standardization"));
    }
    const auto& diag = j.at("diagnostics");
    m.converged = diag.at("converged").get<bool>();
    m.iterations = diag.at("iterations").get<int>();
    if (diag.contains("final_grad_norm")) {
        m.final_grad_norm = diag.at("final_grad_norm").get<double>();
    }
    m.warnings = diag.at("warnings").get<std::vector<std::string>>();
    return m;
}

// ---- forest ----

inline json tree_to_json(const TreeNode& node) {
    if (node.is_leaf()) {
        return json{{"counts", {node.counts[0], node.counts[1]}}};
    }
    json j;
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["left"] = tree_to_json(*node.left);
    j["right"] = tree_to_json(*node.right);
    return j;
}

inline std::unique_ptr<TreeNode> tree_from_json(const json& j) {
    auto node = std::make_unique<TreeNode>();
    if (j.contains("counts")) {
        node->counts[0] = j.at("counts").at(0).get<std::size_t>();
        node->counts[1] = j.at("counts").at(1).get<std::size_t>();
        return node;
    }
    node->feature = j.at("feature").get<int>();
    node->threshold = j.at("threshold").get<double>();
    node->left = tree_from_json(j.at("left"));
    node->right = tree_from_json(j.at("right"));
    node->counts[0] = node->left->counts[0] + node->right->counts[0];
    node->counts[1] = node->left->counts[1] + node->right->counts[1];
    return node;
}

inline json model_to_json(const Forest& f) {
    json j;
    j["model"] = "forest";
    j["schema"] = f.feature_codes;
    j["B"] = f.tree_count();
    j["p"] = f.features_per_split;
    j["seed"] = f.seed;
    if (f.oob_accuracy) j["oob_accuracy"] = *f.oob_accuracy;
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(tree_to_json(*t));
    j["trees"] = std::move(trees);
    return j;
}

inline Forest forest_from_json(const json& j) {
    Forest f;
    f.feature_codes = j.at("schema").get<std::vector<std::string>>();
    f.features_per_split = j.at("p").get<std::size_t>();
    f.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("oob_accuracy")) f.oob_accuracy = j.at("oob_accuracy").get<double>();
    for (const auto& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
    if (f.trees.size() != j.at("B").get<std::size_t>()) {
        throw DataError("forest model: tree count does not match B");
    }
    return f;
}

// ---- svm ----

inline json model_to_json(const SvmModel& m) {
    json j;
    j["model"] = "svm";
    j["schema"] = m.feature_codes;
    json kernel;
    kernel["type"] = m.kernel.name();
    if (m.kernel.type == Kernel::Type::rbf) kernel["gamma"] = m.kernel.gamma;
    j["kernel"] = kernel;
    j["C"] = m.C;
    j["support_vectors"] = m.support_vectors;
    j["alphas"] = m.alphas;
    j["labels"] = m.sv_labels;
    j["b"] = m.b;
    if (!m.w.empty()) j["w"] = m.w;
    j["platt"] = m.platt ? json{{"a", m.platt->a}, {"b", m.platt->b}} : json(nullptr);
    j["standardization"] = standardization_to_json(m.standardization);
    json diag;
    diag["converged"] = m.converged;
    diag["warnings"] = m.warnings;
    j["diagnostics"] = diag;
    return j;
}

inline SvmModel svm_from_json(const json& j) {
    SvmModel m;
    m.feature_codes = j.at("schema").get<std::vector<std::string>>();
    const auto& kernel = j.at("kernel");
    if (kernel.at("type").get<std::string>() == "linear") {
        m.kernel = Kernel::linear();
    } else if (kernel.at("type").get<std::string>() == "rbf") {
        m.kernel = Kernel::rbf(kernel.at("gamma").get<double>());
    } else {
        throw DataError("svm model: unknown kernel type");
    }
    m.C = j.at("C").get<double>();
    m.support_vectors = j.at("support_vectors").get<std::vector<std::vector<double>>>();
    m.alphas = j.at("alphas").get<std::vector<double>>();
    m.sv_labels = j.at("labels").get<std::vector<int>>();
    m.b = j.at("b").get<double>();
    if (j.contains("w")) m.w = j.at("w").get<std::vector<double>>();
    if (!j.at("platt").is_null()) {
        m.platt = PlattScaling{j.at("platt").at("a").get<double>(),
                               j.at("platt").at("b").get<double>()};
    }
    m.standardization = standardization_from_json(j.at("standardization"));
    const auto& diag = j.at("diagnostics");
    m.converged = diag.at("converged").get<bool>();
    m.warnings = diag.at("warnings").get<std::vector<std::string>>();
    return m;
}

// ---- any model ----

struct AnyModel {
    std::string kind; // logreg | forest | svm
    std::optional<LogisticModel> logreg;
    std::optional<Forest> forest;
    std::optional<SvmModel> svm;

    const std::vector<std::string>& feature_codes() const {
        if (logreg) return logreg->feature_codes;
        if (forest) return forest->feature_codes;
        return svm->feature_codes;
    }

    int predict(const std::vector<double>& x) const {
        if (logreg) return logreg->predict(x);
        if (forest) return forest->predict(x);
        return svm->predict(x);
    }

    double proba(const std::vector<double>& x) const {
        if (logreg) return logreg->predict_proba(x);
        if (forest) return forest->predict_proba(x);
        return svm->predict_proba(x);
    }
};

inline AnyModel model_from_json(const json& j) {
    AnyModel any;
    any.kind = j.at("model").get<std::string>();
    if (any.kind == "logreg") {
        any.logreg = logistic_from_json(j);
    } else if (any.kind == "forest") {
        any.forest = forest_from_json(j);
    } else if (any.kind == "svm") {
        any.svm = svm_from_json(j);
    } else {
        throw DataError("unknown model kind '" + any.kind + "'");
    }
    return any;
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("invalid JSON in '" + path + "': " + e.what());
    }
    return j;
}

inline AnyModel load_model(const std::string& path) { return model_from_json(load_json_file(path)); }

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << content;
    if (!out) throw DataError("failed writing '" + path + "'");
}

inline void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace bankml
