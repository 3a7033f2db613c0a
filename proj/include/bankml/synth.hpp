#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/rng.hpp"

namespace bankml {

// Documented generator recipes:
//   "gaussian"         class-conditional unit Gaussians, bankrupt mean shifted
//                      so the class centroids sit 1 apart
//   "gaussian-sep<x>"  same with centroid distance <x>, e.g. gaussian-sep2
//   "xor-pair"         the first two features form four clusters in an XOR
//                      layout (no separating hyperplane); the rest is noise
inline Dataset synth_dataset(std::size_t n_active, std::size_t n_bankrupt,
                             const FeatureSchema& schema, const std::string& recipe,
                             std::uint64_t seed) {
    if (n_active < 1 || n_bankrupt < 1) {
        throw ConfigError("synth: both class counts must be at least 1");
    }
    const std::size_t m = schema.size();
    if (m == 0) throw ConfigError("synth: schema has no features");

    enum class Mode { gaussian, xor_pair };
    Mode mode = Mode::gaussian;
    double separation = 1.0;
    if (recipe == "gaussian") {
        mode = Mode::gaussian;
    } else if (recipe.rfind("gaussian-sep", 0) == 0) {
        const std::string arg = recipe.substr(12);
        try {
            std::size_t used = 0;
            separation = std::stod(arg, &used);
            if (used != arg.size()) throw std::invalid_argument(arg);
        } catch (const std::exception&) {
            throw ConfigError("synth: bad separation in recipe '" + recipe + "'");
        }
        if (!(separation > 0.0)) {
            throw ConfigError("synth: separation must be positive in recipe '" + recipe + "'");
        }
    } else if (recipe == "xor-pair") {
        mode = Mode::xor_pair;
        if (m < 2) throw ConfigError("synth: recipe 'xor-pair' needs at least 2 features");
    } else {
        throw ConfigError("synth: unknown recipe '" + recipe + "'");
    }

    Dataset d;
    d.schema = schema;
    Rng rng(seed);

    const double shift = separation / std::sqrt(static_cast<double>(m));
    constexpr double kClusterSigma = 0.35;

    const auto emit = [&](int label, std::size_t i) {
        BankRecord rec;
        rec.bank_id = (label == kBankrupt ? "bankrupt-" : "active-") + std::to_string(i + 1);
        rec.label = label;
        rec.values.resize(m);
        if (mode == Mode::gaussian) {
            const double mu = label == kBankrupt ? shift : 0.0;
            for (std::size_t j = 0; j < m; ++j) rec.values[j] = mu + rng.normal();
        } else {
            // Bankrupt sits on the (+,+)/(-,-) diagonal, active on the other.
            const double sgn = rng.uniform_index(2) == 0 ? 1.0 : -1.0;
            const double c0 = sgn;
            const double c1 = label == kBankrupt ? sgn : -sgn;
            rec.values[0] = c0 + kClusterSigma * rng.normal();
            rec.values[1] = c1 + kClusterSigma * rng.normal();
            for (std::size_t j = 2; j < m; ++j) rec.values[j] = rng.normal();
        }
        d.records.push_back(std::move(rec));
    };

    for (std::size_t i = 0; i < n_active; ++i) emit(kActive, i);
    for (std::size_t i = 0; i < n_bankrupt; ++i) emit(kBankrupt, i);
    return d;
}

} // namespace bankml
