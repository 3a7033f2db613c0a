#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/linalg.hpp"
#include "bankml/parallel.hpp"
#include "bankml/rng.hpp"

namespace bankml {

// Binary CART node: a leaf iff left is null. Rows with value <= threshold go
// left, the rest go right. counts is the leaf's per-class training tally,
// indexed by label.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;
    std::array<std::size_t, 2> counts{0, 0};

    bool is_leaf() const { return left == nullptr; }
};

struct ForestConfig {
    std::size_t trees = 100;
    std::size_t features_per_split = 0; // 0 means floor(sqrt(m))
    std::uint64_t seed = 0;
    std::size_t min_samples_split = 2;
    bool bootstrap = true; // off only for debugging single trees
    unsigned jobs = 1;
};

struct Forest {
    std::vector<std::string> feature_codes;
    std::vector<std::unique_ptr<TreeNode>> trees;
    std::size_t features_per_split = 0;
    std::uint64_t seed = 0;
    std::optional<double> oob_accuracy;
    std::vector<std::vector<std::uint8_t>> inbag; // [tree][record], diagnostics only

    std::size_t tree_count() const { return trees.size(); }

    double predict_proba(std::span<const double> x) const;
    int predict(std::span<const double> x) const {
        return predict_proba(x) >= 0.5 ? kBankrupt : kActive;
    }
};

// Gini impurity: 1 - sum of squared class frequencies.
inline double gini(std::span<const std::size_t> class_counts) {
    std::size_t total = 0;
    for (std::size_t c : class_counts) total += c;
    if (total == 0) throw std::invalid_argument("gini: empty counts");
    double impurity = 1.0;
    for (std::size_t c : class_counts) {
        const double f = static_cast<double>(c) / static_cast<double>(total);
        impurity -= f * f;
    }
    return impurity;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double weighted_gini = 0.0;
};

namespace detail {

// Midpoint of consecutive distinct values, nudged back onto the lower value
// when rounding would collapse the right child.
inline double split_threshold(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid >= hi ? lo : mid;
}

inline int leaf_class(const std::array<std::size_t, 2>& counts) {
    return counts[kBankrupt] >= counts[kActive] ? kBankrupt : kActive;
}

} // namespace detail

// Minimum child-size-weighted Gini over every candidate feature and every
// midpoint between consecutive distinct sorted values. Ties prefer the lower
// feature index, then the lower threshold. Empty when nothing separates rows.
inline std::optional<Split> best_split(const std::vector<std::vector<double>>& X,
                                       const std::vector<int>& y,
                                       const std::vector<std::size_t>& rows,
                                       const std::vector<std::size_t>& candidate_features) {
    if (rows.empty()) throw std::invalid_argument("best_split: no rows");
    if (candidate_features.empty()) throw std::invalid_argument("best_split: no candidate features");

    std::optional<Split> best;
    const double n = static_cast<double>(rows.size());

    std::vector<std::pair<double, int>> col;
    for (std::size_t f : candidate_features) {
        col.clear();
        col.reserve(rows.size());
        for (std::size_t r : rows) col.emplace_back(X[r][f], y[r]);
        std::sort(col.begin(), col.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        std::array<std::size_t, 2> left{0, 0};
        std::array<std::size_t, 2> right{0, 0};
        for (const auto& [v, label] : col) ++right[static_cast<std::size_t>(label)];

        for (std::size_t i = 0; i + 1 < col.size(); ++i) {
            const auto label = static_cast<std::size_t>(col[i].second);
            ++left[label];
            --right[label];
            if (col[i].first == col[i + 1].first) continue;

            const double nl = static_cast<double>(i + 1);
            const double nr = n - nl;
            const double wg = (nl * gini(left) + nr * gini(right)) / n;
            const double t = detail::split_threshold(col[i].first, col[i + 1].first);
            const int fi = static_cast<int>(f);
            const bool better =
                !best || wg < best->weighted_gini ||
                (wg == best->weighted_gini &&
                 (fi < best->feature || (fi == best->feature && t < best->threshold)));
            if (better) best = Split{fi, t, wg};
        }
    }
    return best;
}

namespace detail {

inline std::array<std::size_t, 2> count_classes(const std::vector<int>& y,
                                                const std::vector<std::size_t>& rows) {
    std::array<std::size_t, 2> counts{0, 0};
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y[r])];
    return counts;
}

// p distinct feature indices drawn uniformly via a partial Fisher-Yates pass.
inline std::vector<std::size_t> draw_features(std::size_t m, std::size_t p, Rng& rng) {
    std::vector<std::size_t> pool(m);
    for (std::size_t i = 0; i < m; ++i) pool[i] = i;
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t j = i + rng.uniform_index(m - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(p);
    return pool;
}

} // namespace detail

// Unpruned recursive CART build; leaves form where the node is pure, too
// small to split, or no candidate split separates it.
inline std::unique_ptr<TreeNode> build_tree(const std::vector<std::vector<double>>& X,
                                            const std::vector<int>& y,
                                            const std::vector<std::size_t>& rows,
                                            std::size_t features_per_split,
                                            std::size_t min_samples_split, Rng& rng) {
    if (rows.empty()) throw std::invalid_argument("build_tree: no rows");
    const std::size_t m = X.front().size();
    if (features_per_split < 1 || features_per_split > m) {
        throw ConfigError("build_tree: features_per_split must lie in [1, feature count]");
    }

    auto node = std::make_unique<TreeNode>();
    node->counts = detail::count_classes(y, rows);

    const bool pure = node->counts[0] == 0 || node->counts[1] == 0;
    if (pure || rows.size() < min_samples_split) return node;

    const auto candidates = detail::draw_features(m, features_per_split, rng);
    const auto split = best_split(X, y, rows, candidates);
    if (!split) return node;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
        (X[r][static_cast<std::size_t>(split->feature)] <= split->threshold ? left_rows
                                                                            : right_rows)
            .push_back(r);
    }
    node->feature = split->feature;
    node->threshold = split->threshold;
    node->left = build_tree(X, y, left_rows, features_per_split, min_samples_split, rng);
    node->right = build_tree(X, y, right_rows, features_per_split, min_samples_split, rng);
    return node;
}

inline int tree_predict(const TreeNode& root, std::span<const double> x) {
    const TreeNode* node = &root;
    while (!node->is_leaf()) {
        const auto f = static_cast<std::size_t>(node->feature);
        if (f >= x.size()) throw std::invalid_argument("tree_predict: feature dimension mismatch");
        node = x[f] <= node->threshold ? node->left.get() : node->right.get();
    }
    return detail::leaf_class(node->counts);
}

inline double Forest::predict_proba(std::span<const double> x) const {
    if (x.size() != feature_codes.size()) {
        throw std::invalid_argument("forest: feature dimension mismatch");
    }
    std::size_t bankrupt_votes = 0;
    for (const auto& t : trees) {
        if (tree_predict(*t, x) == kBankrupt) ++bankrupt_votes;
    }
    return static_cast<double>(bankrupt_votes) / static_cast<double>(trees.size());
}

// Bagged ensemble: tree b grows on a seeded bootstrap of the n records using
// an independent stream derived from the master seed, so builds are
// reproducible, parallel-safe, and stable under increasing tree counts.
inline Forest fit_forest(const Dataset& d, const ForestConfig& cfg = {}) {
    if (d.n() == 0) throw DataError("forest fit: empty dataset");
    if (cfg.trees < 1) throw ConfigError("forest fit: tree count must be at least 1");
    if (cfg.min_samples_split < 2) throw ConfigError("forest fit: min_samples_split must be >= 2");

    const std::size_t n = d.n();
    const std::size_t m = d.m();
    const std::size_t p = cfg.features_per_split == 0
                              ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                                             std::floor(std::sqrt(m))))
                              : cfg.features_per_split;
    if (p < 1 || p > m) throw ConfigError("forest fit: features_per_split must lie in [1, m]");

    std::vector<std::vector<double>> X;
    std::vector<int> y;
    X.reserve(n);
    y.reserve(n);
    for (const auto& r : d.records) {
        X.push_back(r.values);
        y.push_back(r.label);
    }

    Forest f;
    f.feature_codes = d.schema.codes();
    f.features_per_split = p;
    f.seed = cfg.seed;
    f.trees.resize(cfg.trees);
    f.inbag.assign(cfg.trees, std::vector<std::uint8_t>(n, 0));

    parallel_for(cfg.trees, cfg.jobs, [&](std::size_t b) {
        Rng rng(derive_seed(cfg.seed, b));
        std::vector<std::size_t> rows(n);
        if (cfg.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) {
                rows[i] = rng.uniform_index(n);
                f.inbag[b][rows[i]] = 1;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                rows[i] = i;
                f.inbag[b][i] = 1;
            }
        }
        f.trees[b] = build_tree(X, y, rows, p, cfg.min_samples_split, rng);
    });

    // Out-of-bag vote per record, reported only when every record was left
    // out by at least one tree.
    std::size_t covered = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t votes = 0;
        std::size_t bankrupt_votes = 0;
        for (std::size_t b = 0; b < cfg.trees; ++b) {
            if (f.inbag[b][i]) continue;
            ++votes;
            if (tree_predict(*f.trees[b], X[i]) == kBankrupt) ++bankrupt_votes;
        }
        if (votes == 0) continue;
        ++covered;
        const int pred = 2 * bankrupt_votes >= votes ? kBankrupt : kActive;
        if (pred == y[i]) ++correct;
    }
    if (covered == n) {
        f.oob_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    }
    return f;
}

} // namespace bankml
