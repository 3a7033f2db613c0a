#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/linalg.hpp"
#include "bankml/rng.hpp"

namespace bankml {

struct SmoteConfig {
    std::size_t k = 5;         // neighbour count, must stay below the minority size
    double target_ratio = 1.0; // minority:majority size ratio to reach, in (0, 1]
    std::uint64_t seed = 0;
};

// The less frequent of the two labels; a tie counts bankrupt as the minority.
inline int minority_label(const Dataset& d) {
    const std::size_t active = d.count_label(kActive);
    const std::size_t bankrupt = d.count_label(kBankrupt);
    return bankrupt <= active ? kBankrupt : kActive;
}

// Indices (into d.records) of the k minority-class records nearest to the
// record at sample_index under Euclidean distance, the sample itself
// excluded. Ties break toward the lower record index.
inline std::vector<std::size_t> knn_minority(const Dataset& d, std::size_t sample_index,
                                             std::size_t k) {
    if (sample_index >= d.n()) throw std::invalid_argument("knn_minority: sample index out of range");
    const int minority = d.records[sample_index].label;

    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < d.n(); ++i) {
        if (d.records[i].label == minority && i != sample_index) pool.push_back(i);
    }
    if (k == 0) throw ConfigError("knn_minority: k must be at least 1");
    if (k > pool.size()) {
        throw DataError("knn_minority: k = " + std::to_string(k) +
                        " but only " + std::to_string(pool.size()) +
                        " other minority records exist");
    }

    const auto& sample = d.records[sample_index].values;
    std::vector<std::pair<double, std::size_t>> by_distance;
    by_distance.reserve(pool.size());
    for (std::size_t i : pool) {
        by_distance.emplace_back(squared_distance(sample, d.records[i].values), i);
    }
    std::sort(by_distance.begin(), by_distance.end());

    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(by_distance[i].second);
    return out;
}

// Point on the closed segment between sample and neighbour:
// sample + gap * (neighbour - sample).
inline std::vector<double> synthesize(std::span<const double> sample,
                                      std::span<const double> neighbour, double gap) {
    if (sample.size() != neighbour.size()) {
        throw std::invalid_argument("synthesize: dimension mismatch");
    }
    if (!(gap >= 0.0 && gap <= 1.0)) {
        throw std::invalid_argument("synthesize: gap must lie in [0, 1]");
    }
    std::vector<double> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        out[i] = sample[i] + gap * (neighbour[i] - sample[i]);
    }
    return out;
}

// Appends synthetic minority records until the minority count reaches
// round(target_ratio * majority count). Parents are cycled in record order;
// each synthetic point interpolates toward a uniformly chosen one of the
// parent's k nearest minority neighbours at a uniform gap.
inline Dataset balance(const Dataset& d, const SmoteConfig& cfg) {
    if (cfg.k < 1) throw ConfigError("SMOTE k must be at least 1");
    if (!(cfg.target_ratio > 0.0 && cfg.target_ratio <= 1.0)) {
        throw ConfigError("SMOTE target ratio must lie in (0, 1]");
    }
    const std::size_t active = d.count_label(kActive);
    const std::size_t bankrupt = d.count_label(kBankrupt);
    if (active == 0 || bankrupt == 0) {
        throw DataError("SMOTE requires both classes to be present");
    }

    const int minority = minority_label(d);
    const std::size_t minority_count = minority == kBankrupt ? bankrupt : active;
    const std::size_t majority_count = minority == kBankrupt ? active : bankrupt;

    const long long target =
        round_half_even(cfg.target_ratio * static_cast<double>(majority_count));
    const long long deficit = target - static_cast<long long>(minority_count);

    Dataset out = d;
    if (deficit <= 0) return out;

    if (cfg.k >= minority_count) {
        throw DataError("SMOTE k = " + std::to_string(cfg.k) +
                        " must be smaller than the minority class size " +
                        std::to_string(minority_count));
    }

    std::vector<std::size_t> minority_indices;
    for (std::size_t i = 0; i < d.n(); ++i) {
        if (d.records[i].label == minority) minority_indices.push_back(i);
    }
    std::vector<std::vector<std::size_t>> neighbours;
    neighbours.reserve(minority_indices.size());
    for (std::size_t idx : minority_indices) {
        neighbours.push_back(knn_minority(d, idx, cfg.k));
    }

    Rng rng(cfg.seed);
    for (long long s = 0; s < deficit; ++s) {
        const std::size_t parent_slot = static_cast<std::size_t>(s) % minority_indices.size();
        const std::size_t parent = minority_indices[parent_slot];
        const std::size_t neighbour = neighbours[parent_slot][rng.uniform_index(cfg.k)];
        const double gap = rng.uniform01();

        BankRecord rec;
        rec.bank_id = "synthetic-" + std::to_string(s + 1);
        rec.values = synthesize(d.records[parent].values, d.records[neighbour].values, gap);
        rec.label = minority;
        out.records.push_back(std::move(rec));
    }
    return out;
}

} // namespace bankml
