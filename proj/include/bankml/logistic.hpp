#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/linalg.hpp"
#include "bankml/standardize.hpp"

namespace bankml {

struct LogisticConfig {
    double ridge = 1e-8;
    int max_iter = 100;
    double grad_tol = 1e-8;
    bool standardize = true;
};

struct LogisticModel {
    std::vector<std::string> feature_codes;
    double beta0 = 0.0;
    std::vector<double> beta;
    bool converged = false;
    int iterations = 0;
    double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
    std::optional<Standardization> standardization;
    std::vector<std::string> warnings;
    std::vector<double> ll_trace; // penalized log-likelihood at start and after each accepted step

    double predict_proba(std::span<const double> x) const {
        if (x.size() != beta.size()) {
            throw std::invalid_argument("logistic: feature dimension mismatch");
        }
        for (double v : x) {
            if (!std::isfinite(v)) throw std::invalid_argument("logistic: non-finite feature value");
        }
        double z = beta0;
        if (standardization) {
            const auto zx = standardization->apply(x);
            z += dot(zx, beta);
        } else {
            z += dot(x, beta);
        }
        return sigmoid(z);
    }

    int predict(std::span<const double> x) const {
        return predict_proba(x) >= 0.5 ? kBankrupt : kActive;
    }
};

// Unpenalized log-likelihood of (beta0, beta) on d's raw feature values,
// probabilities clamped to [1e-15, 1 - 1e-15] before the logs.
inline double log_likelihood(double beta0, const std::vector<double>& beta, const Dataset& d) {
    if (d.n() == 0) throw DataError("log_likelihood: empty dataset");
    constexpr double eps = 1e-15;
    double ll = 0.0;
    for (const auto& r : d.records) {
        if (r.values.size() != beta.size()) {
            throw std::invalid_argument("log_likelihood: feature dimension mismatch");
        }
        const double p = std::clamp(sigmoid(beta0 + dot(r.values, beta)), eps, 1.0 - eps);
        ll += r.label == kBankrupt ? std::log(p) : std::log1p(-p);
    }
    return ll;
}

// Gradient of the unpenalized log-likelihood: (sum of residuals,
// feature-weighted residual sums).
inline std::pair<double, std::vector<double>> score(double beta0, const std::vector<double>& beta,
                                                    const Dataset& d) {
    if (d.n() == 0) throw DataError("score: empty dataset");
    double g0 = 0.0;
    std::vector<double> g(beta.size(), 0.0);
    for (const auto& r : d.records) {
        if (r.values.size() != beta.size()) {
            throw std::invalid_argument("score: feature dimension mismatch");
        }
        const double resid = static_cast<double>(r.label) - sigmoid(beta0 + dot(r.values, beta));
        g0 += resid;
        for (std::size_t j = 0; j < beta.size(); ++j) g[j] += r.values[j] * resid;
    }
    return {g0, g};
}

namespace detail {

inline double penalized_ll(double beta0, const std::vector<double>& beta, const Dataset& d,
                           double ridge) {
    double pen = 0.0;
    for (double b : beta) pen += b * b;
    return log_likelihood(beta0, beta, d) - 0.5 * ridge * pen;
}

} // namespace detail

// Newton-Raphson maximum-likelihood fit with step-halving. The ridge term
// penalizes the coefficients only, never the intercept, so ridge = 0 is the
// plain MLE and the tiny default merely keeps separable data finite.
inline LogisticModel fit_logistic(const Dataset& d, const LogisticConfig& cfg = {}) {
    if (d.n() == 0) throw DataError("logistic fit: empty dataset");
    if (cfg.ridge < 0.0) throw ConfigError("logistic fit: ridge must be non-negative");
    if (cfg.max_iter < 0) throw ConfigError("logistic fit: max_iter must be non-negative");
    if (!(cfg.grad_tol > 0.0)) throw ConfigError("logistic fit: grad_tol must be positive");

    const std::size_t m = d.m();
    LogisticModel model;
    model.feature_codes = d.schema.codes();
    model.beta.assign(m, 0.0);

    Dataset work = d;
    if (cfg.standardize) {
        std::vector<std::vector<double>> rows;
        rows.reserve(d.n());
        for (const auto& r : d.records) rows.push_back(r.values);
        model.standardization = Standardization::fit(rows);
        for (auto& r : work.records) r.values = model.standardization->apply(r.values);
    }

    const std::size_t positives = d.count_label(kBankrupt);
    if (positives == 0 || positives == d.n()) {
        const double n = static_cast<double>(d.n());
        const double rate =
            std::clamp(static_cast<double>(positives) / n, 1.0 / (n + 1.0), n / (n + 1.0));
        model.beta0 = std::log(rate / (1.0 - rate));
        model.converged = false;
        model.final_grad_norm = std::numeric_limits<double>::quiet_NaN();
        model.warnings.push_back(
            "training data contains a single class; fitted an intercept-only model");
        return model;
    }

    double cur_ll = detail::penalized_ll(model.beta0, model.beta, work, cfg.ridge);
    model.ll_trace.push_back(cur_ll);

    for (int iter = 0;; ++iter) {
        // Penalized gradient.
        auto [g0, g] = score(model.beta0, model.beta, work);
        for (std::size_t j = 0; j < m; ++j) g[j] -= cfg.ridge * model.beta[j];
        double gnorm = g0 * g0;
        for (double v : g) gnorm += v * v;
        gnorm = std::sqrt(gnorm);

        model.iterations = iter;
        model.final_grad_norm = gnorm;
        if (gnorm <= cfg.grad_tol) {
            model.converged = true;
            return model;
        }
        if (iter >= cfg.max_iter) {
            model.warnings.push_back("stopped at max_iter without reaching the gradient tolerance");
            return model;
        }

        // Newton system: (X'WX + ridge I) s = g, intercept unpenalized.
        std::vector<std::vector<double>> h(m + 1, std::vector<double>(m + 1, 0.0));
        for (const auto& r : work.records) {
            const double p = sigmoid(model.beta0 + dot(r.values, model.beta));
            const double w = p * (1.0 - p);
            h[0][0] += w;
            for (std::size_t j = 0; j < m; ++j) {
                h[0][j + 1] += w * r.values[j];
                for (std::size_t k = j; k < m; ++k) {
                    h[j + 1][k + 1] += w * r.values[j] * r.values[k];
                }
            }
        }
        for (std::size_t j = 0; j < m; ++j) {
            h[j + 1][j + 1] += cfg.ridge;
            h[j + 1][0] = h[0][j + 1];
            for (std::size_t k = j + 1; k < m; ++k) h[k + 1][j + 1] = h[j + 1][k + 1];
        }
        std::vector<double> rhs(m + 1);
        rhs[0] = g0;
        for (std::size_t j = 0; j < m; ++j) rhs[j + 1] = g[j];

        const auto step = solve_linear(h, rhs);
        if (!step) {
            model.warnings.push_back(
                "Newton step failed on a singular Hessian; set ridge > 0 to regularize");
            return model;
        }

        // Halve until the penalized log-likelihood strictly increases.
        bool accepted = false;
        double t = 1.0;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            double cand0 = model.beta0 + t * (*step)[0];
            std::vector<double> cand = model.beta;
            for (std::size_t j = 0; j < m; ++j) cand[j] += t * (*step)[j + 1];
            const double cand_ll = detail::penalized_ll(cand0, cand, work, cfg.ridge);
            if (cand_ll > cur_ll) {
                model.beta0 = cand0;
                model.beta = std::move(cand);
                cur_ll = cand_ll;
                model.ll_trace.push_back(cur_ll);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            model.warnings.push_back(
                "step search could not improve the objective; stopping before the tolerance");
            return model;
        }
    }
}

} // namespace bankml
