#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace bankml {

// Per-feature affine map x -> (x - mean) / std fitted on training data.
// Population standard deviation; constant features keep std = 1 so they
// map to zero instead of blowing up.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> std;

    static Standardization fit(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw std::invalid_argument("standardize: no rows");
        const std::size_t m = rows.front().size();
        Standardization s;
        s.mean.assign(m, 0.0);
        s.std.assign(m, 0.0);
        for (const auto& r : rows) {
            if (r.size() != m) throw std::invalid_argument("standardize: ragged rows");
            for (std::size_t j = 0; j < m; ++j) s.mean[j] += r[j];
        }
        for (std::size_t j = 0; j < m; ++j) s.mean[j] /= static_cast<double>(rows.size());
        for (const auto& r : rows) {
            for (std::size_t j = 0; j < m; ++j) {
                const double c = r[j] - s.mean[j];
                s.std[j] += c * c;
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            s.std[j] = std::sqrt(s.std[j] / static_cast<double>(rows.size()));
            if (s.std[j] == 0.0) s.std[j] = 1.0;
        }
        return s;
    }

    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != mean.size()) throw std::invalid_argument("standardize: dimension mismatch");
        std::vector<double> out(x.size());
        for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / std[j];
        return out;
    }

    std::vector<std::vector<double>> apply_all(const std::vector<std::vector<double>>& rows) const {
        std::vector<std::vector<double>> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(apply(r));
        return out;
    }
};

} // namespace bankml
