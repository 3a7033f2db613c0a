#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/parallel.hpp"
#include "bankml/rng.hpp"

namespace bankml {

// Orientation fixed: bankrupt is the positive class; rows are actual,
// columns predicted.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fn + fp + tn; }
};

inline ConfusionMatrix confusion(const std::vector<int>& actual,
                                 const std::vector<int>& predicted) {
    if (actual.size() != predicted.size()) {
        throw std::invalid_argument("confusion: label list length mismatch");
    }
    if (actual.empty()) throw std::invalid_argument("confusion: empty label lists");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const int a = actual[i];
        const int p = predicted[i];
        if ((a != kActive && a != kBankrupt) || (p != kActive && p != kBankrupt)) {
            throw std::invalid_argument("confusion: labels must be 0 (active) or 1 (bankrupt)");
        }
        if (a == kBankrupt) {
            p == kBankrupt ? ++cm.tp : ++cm.fn;
        } else {
            p == kBankrupt ? ++cm.fp : ++cm.tn;
        }
    }
    return cm;
}

inline double accuracy(const ConfusionMatrix& cm) {
    const std::size_t total = cm.total();
    if (total == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(total);
}

using Predictor = std::function<int(const std::vector<double>&)>;
using TrainFn = std::function<Predictor(const Dataset&)>;

inline ConfusionMatrix evaluate(const Dataset& d, const Predictor& predict) {
    if (d.n() == 0) throw DataError("evaluate: empty dataset");
    std::vector<int> actual;
    std::vector<int> predicted;
    actual.reserve(d.n());
    predicted.reserve(d.n());
    for (const auto& r : d.records) {
        actual.push_back(r.label);
        predicted.push_back(predict(r.values));
    }
    return confusion(actual, predicted);
}

// Seeded shuffle, then contiguous chunks; the first n mod k folds take the
// extra element.
inline std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t k,
                                                           std::uint64_t seed) {
    if (k < 2) throw ConfigError("kfold: k must be at least 2");
    if (n < k) throw DataError("kfold: fewer records than folds");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::vector<std::size_t>> folds(k);
    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        folds[f].assign(order.begin() + pos, order.begin() + pos + size);
        pos += size;
    }
    return folds;
}

inline Dataset dataset_subset(const Dataset& d, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.schema = d.schema;
    out.records.reserve(indices.size());
    for (std::size_t i : indices) out.records.push_back(d.records.at(i));
    return out;
}

struct CvResult {
    std::vector<double> fold_scores; // NaN marks a skipped fold
    double mean = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::string> warnings;
};

// Per-fold holdout accuracy against a model trained on the complement.
// Folds whose training complement is single-class are skipped with a warning
// and excluded from the mean.
inline CvResult cross_validate_on_folds(const Dataset& d,
                                        const std::vector<std::vector<std::size_t>>& folds,
                                        const TrainFn& train) {
    CvResult res;
    res.fold_scores.assign(folds.size(), std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0;
    std::size_t counted = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> train_idx;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g == f) continue;
            train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
        }
        const Dataset train_set = dataset_subset(d, train_idx);
        if (train_set.count_label(kActive) == 0 || train_set.count_label(kBankrupt) == 0) {
            res.warnings.push_back("fold " + std::to_string(f + 1) +
                                   " skipped: training complement has a single class");
            continue;
        }
        const Predictor predict = train(train_set);
        const Dataset test_set = dataset_subset(d, folds[f]);
        res.fold_scores[f] = accuracy(evaluate(test_set, predict));
        sum += res.fold_scores[f];
        ++counted;
    }
    if (counted == 0) throw FitError("cross-validation: every fold was skipped");
    res.mean = sum / static_cast<double>(counted);
    return res;
}

inline CvResult cross_validate(const Dataset& d, const TrainFn& train, std::size_t k,
                               std::uint64_t seed) {
    return cross_validate_on_folds(d, kfold_indices(d.n(), k, seed), train);
}

// One hyperparameter assignment: values in declared axis order.
using ParamSet = std::vector<std::pair<std::string, nlohmann::json>>;
using TrainFactory = std::function<TrainFn(const ParamSet&)>;

struct GridAxis {
    std::string name;
    std::vector<nlohmann::json> values;
};

struct GridRow {
    ParamSet params;
    std::vector<double> fold_scores;
    double mean = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
    std::string error;
    std::vector<std::string> warnings;
};

struct GridResult {
    std::vector<GridRow> rows;
    std::size_t best_index = 0;
    std::vector<std::string> warnings;

    const GridRow& best() const { return rows[best_index]; }
};

// Exhaustive search over the axis product, every combination scored by
// cross-validation on one shared fold assignment. Ties keep the earliest
// combination in declared axis order (the first axis varies slowest).
inline GridResult grid_search(const Dataset& d, const std::vector<GridAxis>& axes,
                              std::size_t folds, std::uint64_t seed, const TrainFactory& factory,
                              unsigned jobs = 1) {
    if (axes.empty()) throw ConfigError("grid search: no axes given");
    std::size_t combos = 1;
    for (const auto& ax : axes) {
        if (ax.values.empty()) throw ConfigError("grid search: axis '" + ax.name + "' is empty");
        combos *= ax.values.size();
    }

    const auto fold_sets = kfold_indices(d.n(), folds, seed);

    GridResult res;
    res.rows.resize(combos);
    parallel_for(combos, jobs, [&](std::size_t c) {
        GridRow& row = res.rows[c];
        std::size_t rem = c;
        for (auto it = axes.rbegin(); it != axes.rend(); ++it) {
            row.params.emplace_back(it->name, it->values[rem % it->values.size()]);
            rem /= it->values.size();
        }
        std::reverse(row.params.begin(), row.params.end());
        try {
            const CvResult cv = cross_validate_on_folds(d, fold_sets, factory(row.params));
            row.fold_scores = cv.fold_scores;
            row.mean = cv.mean;
            row.warnings = cv.warnings;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
    });

    bool any = false;
    for (std::size_t c = 0; c < combos; ++c) {
        const auto& row = res.rows[c];
        for (const auto& w : row.warnings) {
            res.warnings.push_back("combination " + std::to_string(c + 1) + ": " + w);
        }
        if (row.failed) {
            res.warnings.push_back("combination " + std::to_string(c + 1) + " failed: " +
                                   row.error);
            continue;
        }
        if (!any || row.mean > res.rows[res.best_index].mean) {
            res.best_index = c;
            any = true;
        }
    }
    if (!any) throw FitError("grid search: every combination failed to fit");
    return res;
}

} // namespace bankml
