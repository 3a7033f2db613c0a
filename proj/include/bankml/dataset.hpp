#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bankml/errors.hpp"
#include "bankml/linalg.hpp"
#include "bankml/rng.hpp"

namespace bankml {

// ---------------------------------------------------------------------------
// Calendar quarter, formatted as "YYYY-Qn".

struct Quarter {
    int year = 0;
    int q = 1; // 1..4

    auto operator<=>(const Quarter&) const = default;

    std::string str() const {
        return std::to_string(year) + "-Q" + std::to_string(q);
    }

    static Quarter parse(std::string_view s) {
        // accepted form: 4+ digit year, "-Q", digit 1..4
        const auto dash = s.find("-Q");
        if (dash == std::string_view::npos || dash == 0 || dash + 2 != s.size() - 1) {
            throw DataError("invalid period '" + std::string(s) + "', expected YYYY-Qn");
        }
        int year = 0;
        const auto yr = std::from_chars(s.data(), s.data() + dash, year);
        if (yr.ec != std::errc{} || yr.ptr != s.data() + dash) {
            throw DataError("invalid period year in '" + std::string(s) + "'");
        }
        const char qc = s.back();
        if (qc < '1' || qc > '4') {
            throw DataError("invalid quarter in '" + std::string(s) + "', expected 1-4");
        }
        return Quarter{year, qc - '0'};
    }
};

// ---------------------------------------------------------------------------
// Feature schema: ordered, uniquely coded ratio columns.

struct Feature {
    std::string code;
    std::string description;

    bool operator==(const Feature&) const = default;
};

class FeatureSchema {
public:
    FeatureSchema() = default;

    explicit FeatureSchema(std::vector<Feature> features) : features_(std::move(features)) {
        std::set<std::string> seen;
        for (const auto& f : features_) {
            if (f.code.empty()) throw DataError("schema feature code must be non-empty");
            if (!seen.insert(f.code).second) {
                throw DataError("duplicate schema feature code '" + f.code + "'");
            }
        }
    }

    std::size_t size() const { return features_.size(); }
    const std::vector<Feature>& features() const { return features_; }
    const std::string& code(std::size_t i) const { return features_.at(i).code; }

    std::vector<std::string> codes() const {
        std::vector<std::string> out;
        out.reserve(features_.size());
        for (const auto& f : features_) out.push_back(f.code);
        return out;
    }

    bool operator==(const FeatureSchema&) const = default;

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (const auto& f : features_) {
            arr.push_back({{"code", f.code}, {"description", f.description}});
        }
        return arr;
    }

    static FeatureSchema from_json(const nlohmann::json& arr) {
        if (!arr.is_array()) throw DataError("schema JSON must be a list of {code, description}");
        std::vector<Feature> fs;
        for (const auto& item : arr) {
            Feature f;
            f.code = item.at("code").get<std::string>();
            f.description = item.value("description", std::string{});
            fs.push_back(std::move(f));
        }
        return FeatureSchema(std::move(fs));
    }

    static FeatureSchema from_codes(const std::vector<std::string>& codes) {
        std::vector<Feature> fs;
        fs.reserve(codes.size());
        for (const auto& c : codes) fs.push_back({c, ""});
        return FeatureSchema(std::move(fs));
    }

    static FeatureSchema load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open schema file '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("schema file '" + path + "' is not valid JSON: " + e.what());
        }
        return from_json(j);
    }

private:
    std::vector<Feature> features_;
};

// The 20 CAMELS ratios used for commercial banks.
inline FeatureSchema commercial_schema() {
    return FeatureSchema({
        {"CA1", "Shareholders' equity / total assets"},
        {"CA2", "Shareholders' equity / total loans"},
        {"CA3", "(Shareholders' equity + net profit) / (total assets + off balance sheet commitments)"},
        {"AQ1", "Permanent assets / total assets"},
        {"AQ2", "Total loans / total assets"},
        {"AQ3", "Loans under follow-up / total loans"},
        {"AQ4", "Specific provision / total loans"},
        {"AQ5", "Specific provision / total loans"},
        {"M1", "Personnel expenses / average assets"},
        {"E1", "Net profit / average assets"},
        {"E2", "Net profit / average shareholders' equity"},
        {"E3", "Income before taxes / average assets"},
        {"E4", "Interest income / total operating income"},
        {"E5", "Non-interest expenses / total operating income"},
        {"L1", "Liquid assets / total assets"},
        {"L2", "Total loans / total deposits"},
        {"SMR1", "Trading securities / total assets"},
        {"SMR2", "FX assets / FX liabilities"},
        {"SMR3", "Net interest income / average assets"},
        {"SMR4", "Net balance sheet position / total shareholders' equity"},
    });
}

// The 5 CAMEL ratios used for rural banks.
inline FeatureSchema rural_schema() {
    return FeatureSchema({
        {"CAR", "Capital to risk-weighted assets"},
        {"AssetQuality", "Classified earning assets / total earning assets"},
        {"NPM", "Net income / operating income"},
        {"ROA", "Net income / total assets"},
        {"LDR", "Total lending / total deposits"},
    });
}

// ---------------------------------------------------------------------------
// Records and datasets.

constexpr int kActive = 0;
constexpr int kBankrupt = 1;

struct BankRecord {
    std::string bank_id;
    std::optional<Quarter> period;
    std::vector<double> values; // one per schema feature; NaN marks missing
    int label = kActive;        // 0 = active, 1 = bankrupt

    bool has_missing() const {
        return std::any_of(values.begin(), values.end(),
                           [](double v) { return !std::isfinite(v); });
    }
};

struct Dataset {
    FeatureSchema schema;
    std::vector<BankRecord> records;

    std::size_t n() const { return records.size(); }
    std::size_t m() const { return schema.size(); }

    std::size_t count_label(int label) const {
        return static_cast<std::size_t>(
            std::count_if(records.begin(), records.end(),
                          [label](const BankRecord& r) { return r.label == label; }));
    }
};

struct SplitPair {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
};

struct CleanResult {
    Dataset data;
    std::size_t removed = 0;
    // Set when cleaning dropped every record.
    bool emptied = false;
};

// ---------------------------------------------------------------------------
// CSV plumbing. Comma-separated, double quotes escape fields that contain
// commas or quotes, CRLF tolerated.

namespace csv {

inline std::vector<std::string> split_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw DataError("line " + std::to_string(line_no) + ": unterminated quoted field");
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace csv

inline bool is_missing_marker(const std::string& trimmed) {
    if (trimmed.empty()) return true;
    const std::string low = csv::lower(trimmed);
    return low == "na" || low == "nan";
}

// ---------------------------------------------------------------------------
// Ingestion. Rows are kept verbatim: missing markers become NaN and survive
// until clean() removes them.

inline Dataset ingest_csv(const std::string& path, const FeatureSchema& schema,
                          const std::string& label_column = "label") {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("file '" + path + "' is empty, expected a header row");
    auto header = csv::split_line(line, 1);
    for (auto& h : header) h = csv::trim(h);

    auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        return std::nullopt;
    };

    const auto id_col = find_column("bank_id");
    if (!id_col) throw DataError("missing required column 'bank_id' in '" + path + "'");
    const auto label_col = find_column(label_column);
    if (!label_col) throw DataError("missing required label column '" + label_column + "' in '" + path + "'");
    const auto period_col = find_column("period");

    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.size());
    for (const auto& f : schema.features()) {
        const auto col = find_column(f.code);
        if (!col) throw DataError("missing required column '" + f.code + "' in '" + path + "'");
        feature_cols.push_back(*col);
    }

    Dataset d;
    d.schema = schema;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line, line_no);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }

        BankRecord rec;
        rec.bank_id = csv::trim(fields[*id_col]);
        if (period_col) {
            const std::string p = csv::trim(fields[*period_col]);
            if (!p.empty()) rec.period = Quarter::parse(p);
        }

        rec.values.reserve(schema.size());
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string cell = csv::trim(fields[feature_cols[f]]);
            if (is_missing_marker(cell)) {
                rec.values.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
                throw DataError("line " + std::to_string(line_no) + ", column '" +
                                schema.code(f) + "': cannot parse '" + cell + "' as a number");
            }
            rec.values.push_back(v);
        }

        const std::string raw_label = csv::lower(csv::trim(fields[*label_col]));
        if (raw_label == "0" || raw_label == "active") {
            rec.label = kActive;
        } else if (raw_label == "1" || raw_label == "bankrupt") {
            rec.label = kBankrupt;
        } else {
            throw DataError("line " + std::to_string(line_no) + ", column '" + label_column +
                            "': label '" + csv::trim(fields[*label_col]) +
                            "' not in {0, 1, active, bankrupt}");
        }
        d.records.push_back(std::move(rec));
    }
    return d;
}

inline std::string render_csv(const Dataset& d, const std::string& label_column = "label") {
    const bool any_period = std::any_of(d.records.begin(), d.records.end(),
                                        [](const BankRecord& r) { return r.period.has_value(); });
    std::ostringstream out;
    out << "bank_id";
    if (any_period) out << ",period";
    for (const auto& f : d.schema.features()) out << ',' << csv::quote(f.code);
    out << ',' << label_column << '\n';
    for (const auto& r : d.records) {
        out << csv::quote(r.bank_id);
        if (any_period) {
            out << ',';
            if (r.period) out << r.period->str();
        }
        for (double v : r.values) {
            out << ',';
            if (std::isfinite(v)) {
                out << csv::format_double(v);
            } else {
                out << "NA";
            }
        }
        out << ',' << r.label << '\n';
    }
    return out.str();
}

inline void write_csv(const Dataset& d, const std::string& path,
                      const std::string& label_column = "label") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file '" + path + "'");
    out << render_csv(d, label_column);
}

// ---------------------------------------------------------------------------
// Cleaning: row-wise deletion of records with any non-finite value.

inline CleanResult clean(const Dataset& d) {
    CleanResult result;
    result.data.schema = d.schema;
    for (const auto& r : d.records) {
        if (r.has_missing()) {
            ++result.removed;
        } else {
            result.data.records.push_back(r);
        }
    }
    result.emptied = result.data.records.empty() && result.removed > 0;
    return result;
}

// ---------------------------------------------------------------------------
// Seeded train/test partition. Train size is fraction*n rounded half-to-even;
// stratified splits apportion that total across classes by largest remainder.

inline SplitPair split(const Dataset& d, double train_fraction, std::uint64_t seed,
                       bool stratified) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train fraction must lie strictly between 0 and 1");
    }
    const std::size_t n = d.n();
    if (n < 2) throw DataError("cannot split a dataset with fewer than 2 records");

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const std::size_t train_total =
        static_cast<std::size_t>(round_half_even(train_fraction * static_cast<double>(n)));

    std::vector<bool> to_train(n, false);
    if (!stratified) {
        for (std::size_t i = 0; i < train_total; ++i) to_train[order[i]] = true;
    } else {
        const std::size_t n0 = d.count_label(kActive);
        const std::size_t n1 = d.count_label(kBankrupt);
        if (n0 == 0 || n1 == 0) {
            throw DataError("stratified split requires both classes to be present");
        }
        const double t0 = train_fraction * static_cast<double>(n0);
        const double t1 = train_fraction * static_cast<double>(n1);
        std::size_t quota[2] = {static_cast<std::size_t>(std::floor(t0)),
                                static_cast<std::size_t>(std::floor(t1))};
        std::size_t leftover = train_total - quota[0] - quota[1];
        const double frac[2] = {t0 - std::floor(t0), t1 - std::floor(t1)};
        // hand leftover seats to the classes with the largest fractional part
        if (leftover >= 2) {
            ++quota[0];
            ++quota[1];
            leftover -= 2;
        }
        if (leftover == 1) {
            if (frac[1] > frac[0]) {
                ++quota[1];
            } else {
                ++quota[0];
            }
        }
        std::size_t taken[2] = {0, 0};
        for (std::size_t idx : order) {
            const int label = d.records[idx].label;
            if (taken[label] < quota[label]) {
                to_train[idx] = true;
                ++taken[label];
            }
        }
    }

    SplitPair pair;
    pair.seed = seed;
    pair.train_fraction = train_fraction;
    pair.train.schema = d.schema;
    pair.test.schema = d.schema;
    for (std::size_t idx : order) {
        (to_train[idx] ? pair.train : pair.test).records.push_back(d.records[idx]);
    }
    return pair;
}

} // namespace bankml
