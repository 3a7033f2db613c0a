#pragma once

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/rng.hpp"

namespace testutil {

// Fresh per-test scratch directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() /
                     ("bankml-test-" + tag + "-" + std::to_string(::getpid()) + "-" +
                      std::to_string(counter++));
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline bankml::FeatureSchema schema_of(std::size_t m) {
    std::vector<bankml::Feature> specs;
    for (std::size_t j = 0; j < m; ++j) {
        specs.push_back({"f" + std::to_string(j + 1), "feature " + std::to_string(j + 1)});
    }
    return bankml::FeatureSchema(std::move(specs));
}

inline bankml::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels) {
    bankml::Dataset d;
    d.schema = schema_of(rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        bankml::BankRecord r;
        r.bank_id = "bank-" + std::to_string(i + 1);
        r.values = rows[i];
        r.label = labels[i];
        d.records.push_back(std::move(r));
    }
    return d;
}

// Random two-class dataset with class-shifted Gaussian features.
inline bankml::Dataset random_dataset(std::size_t n_active, std::size_t n_bankrupt,
                                      std::size_t m, std::uint64_t seed, double shift = 1.0) {
    bankml::Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n_active + n_bankrupt; ++i) {
        const int label = i < n_active ? bankml::kActive : bankml::kBankrupt;
        std::vector<double> row(m);
        for (std::size_t j = 0; j < m; ++j) {
            row[j] = rng.normal() + (label == bankml::kBankrupt ? shift : 0.0);
        }
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    return make_dataset(rows, labels);
}

} // namespace testutil
