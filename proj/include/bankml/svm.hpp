#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/linalg.hpp"
#include "bankml/logistic.hpp"
#include "bankml/rng.hpp"
#include "bankml/standardize.hpp"

namespace bankml {

struct Kernel {
    enum class Type { linear, rbf };
    Type type = Type::linear;
    double gamma = 0.0;

    static Kernel linear() { return {Type::linear, 0.0}; }
    static Kernel rbf(double gamma) { return {Type::rbf, gamma}; }

    double operator()(std::span<const double> a, std::span<const double> b) const {
        if (type == Type::linear) return dot(a, b);
        return std::exp(-gamma * squared_distance(a, b));
    }

    std::string name() const { return type == Type::linear ? "linear" : "rbf"; }
};

struct PlattScaling {
    double a = 0.0;
    double b = 0.0;
};

struct SvmConfig {
    double C = 1.0;
    Kernel kernel = Kernel::linear();
    double tol = 1e-3;
    int max_passes = 1000;
    std::uint64_t seed = 0;
};

struct SvmModel {
    std::vector<std::string> feature_codes;
    Kernel kernel;
    double C = 1.0;
    std::vector<std::vector<double>> support_vectors; // stored standardized
    std::vector<double> alphas;
    std::vector<int> sv_labels; // +1 bankrupt, -1 active
    std::vector<std::size_t> sv_indices; // positions in the training set
    double b = 0.0;
    std::vector<double> w; // cached for the linear kernel
    std::optional<PlattScaling> platt;
    Standardization standardization;
    bool converged = false;
    std::vector<std::string> warnings;

    double decision_value(std::span<const double> x) const {
        const auto z = standardization.apply(x);
        double f = b;
        for (std::size_t i = 0; i < support_vectors.size(); ++i) {
            f += alphas[i] * sv_labels[i] * kernel(support_vectors[i], z);
        }
        return f;
    }

    int predict(std::span<const double> x) const {
        return decision_value(x) >= 0.0 ? kBankrupt : kActive;
    }

    double predict_proba(std::span<const double> x) const {
        if (!platt) throw ConfigError("svm: probability requested from an uncalibrated model");
        return sigmoid(-(platt->a * decision_value(x) + platt->b));
    }
};

namespace detail {

// Sequential minimal optimization over the soft-margin dual: repeatedly pick
// a violating pair, solve its two-variable subproblem analytically, and keep
// an exact error cache. The pass budget caps full sweeps.
class Smo {
  public:
    Smo(const std::vector<std::vector<double>>& Z, const std::vector<int>& y, double C,
        const Kernel& kernel, double tol, std::uint64_t seed)
        : Z_(Z), y_(y), C_(C), tol_(tol), n_(Z.size()), rng_(seed) {
        K_.assign(n_, std::vector<double>(n_, 0.0));
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = i; j < n_; ++j) {
                K_[i][j] = K_[j][i] = kernel(Z[i], Z[j]);
            }
        }
        alpha_.assign(n_, 0.0);
        err_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) err_[i] = -y_[i];
    }

    // Platt's outer loop, alternating full sweeps with non-bound sweeps.
    // Returns false when the pass budget ran out first.
    bool run(int& passes_left) {
        bool examine_all = true;
        std::size_t num_changed = 0;
        while (num_changed > 0 || examine_all) {
            if (passes_left-- <= 0) return false;
            num_changed = 0;
            for (std::size_t i = 0; i < n_; ++i) {
                if (examine_all || non_bound(alpha_[i])) num_changed += examine(i);
            }
            if (examine_all) {
                examine_all = false;
            } else if (num_changed == 0) {
                examine_all = true;
            }
        }
        return true;
    }

    // Bias from margin support vectors when any exist, then an exact error
    // cache rebuild to shed accumulated drift.
    void recompute_bias_and_errors() {
        double sum = 0.0;
        std::size_t margin = 0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!non_bound(alpha_[i])) continue;
            sum += y_[i] - raw_sum(i);
            ++margin;
        }
        if (margin > 0) b_ = sum / static_cast<double>(margin);
        for (std::size_t i = 0; i < n_; ++i) err_[i] = raw_sum(i) + b_ - y_[i];
    }

    bool kkt_satisfied() const {
        for (std::size_t i = 0; i < n_; ++i) {
            const double r = y_[i] * err_[i]; // = y*f - 1
            if (alpha_[i] < kAlphaEps) {
                if (r < -tol_) return false;
            } else if (alpha_[i] > C_ - kAlphaEps) {
                if (r > tol_) return false;
            } else if (std::abs(r) > tol_) {
                return false;
            }
        }
        return true;
    }

    const std::vector<double>& alpha() const { return alpha_; }
    double bias() const { return b_; }

    static constexpr double kAlphaEps = 1e-8;

  private:
    bool non_bound(double a) const { return a > kAlphaEps && a < C_ - kAlphaEps; }

    double raw_sum(std::size_t i) const {
        double f = 0.0;
        for (std::size_t j = 0; j < n_; ++j) f += alpha_[j] * y_[j] * K_[j][i];
        return f;
    }

    std::size_t examine(std::size_t i2) {
        const double alph2 = alpha_[i2];
        const double r2 = y_[i2] * err_[i2];
        const bool violates =
            (r2 < -tol_ && alph2 < C_ - kAlphaEps) || (r2 > tol_ && alph2 > kAlphaEps);
        if (!violates) return 0;

        // Best partner by error gap among non-bound points.
        std::size_t best = n_;
        double best_gap = -1.0;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!non_bound(alpha_[i])) continue;
            const double gap = std::abs(err_[i] - err_[i2]);
            if (gap > best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        if (best < n_ && take_step(best, i2)) return 1;

        std::size_t start = rng_.uniform_index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start + k) % n_;
            if (non_bound(alpha_[i1]) && take_step(i1, i2)) return 1;
        }
        start = rng_.uniform_index(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t i1 = (start + k) % n_;
            if (take_step(i1, i2)) return 1;
        }
        return 0;
    }

    bool take_step(std::size_t i1, std::size_t i2) {
        if (i1 == i2) return false;
        const double alph1 = alpha_[i1];
        const double alph2 = alpha_[i2];
        const int y1 = y_[i1];
        const int y2 = y_[i2];
        const double E1 = err_[i1];
        const double E2 = err_[i2];
        const double s = y1 * y2;

        double L, H;
        if (y1 != y2) {
            L = std::max(0.0, alph2 - alph1);
            H = std::min(C_, C_ + alph2 - alph1);
        } else {
            L = std::max(0.0, alph1 + alph2 - C_);
            H = std::min(C_, alph1 + alph2);
        }
        if (L >= H) return false;

        const double k11 = K_[i1][i1];
        const double k12 = K_[i1][i2];
        const double k22 = K_[i2][i2];
        const double eta = k11 + k22 - 2.0 * k12;

        double a2;
        if (eta > 1e-15) {
            a2 = std::clamp(alph2 + y2 * (E1 - E2) / eta, L, H);
        } else {
            // Degenerate curvature: the restricted dual gain
            // slope*t - eta*t^2/2 peaks at an interval endpoint.
            const double slope = y2 * (E1 - E2);
            const auto gain = [&](double a) {
                const double t = a - alph2;
                return slope * t - 0.5 * eta * t * t;
            };
            const double gl = gain(L);
            const double gh = gain(H);
            if (gl > gh + 1e-12) {
                a2 = L;
            } else if (gh > gl + 1e-12) {
                a2 = H;
            } else {
                return false;
            }
        }
        if (std::abs(a2 - alph2) < 1e-10 * (a2 + alph2 + 1e-10)) return false;

        double a1 = alph1 + s * (alph2 - a2);
        if (a1 < 0.0) a1 = 0.0;
        if (a1 > C_) a1 = C_;

        const double d1 = a1 - alph1;
        const double d2 = a2 - alph2;
        const double b1 = b_ - E1 - y1 * d1 * k11 - y2 * d2 * k12;
        const double b2 = b_ - E2 - y1 * d1 * k12 - y2 * d2 * k22;
        double bnew;
        if (a1 > kAlphaEps && a1 < C_ - kAlphaEps) {
            bnew = b1;
        } else if (a2 > kAlphaEps && a2 < C_ - kAlphaEps) {
            bnew = b2;
        } else {
            bnew = 0.5 * (b1 + b2);
        }

        for (std::size_t i = 0; i < n_; ++i) {
            err_[i] += y1 * d1 * K_[i1][i] + y2 * d2 * K_[i2][i] + (bnew - b_);
        }
        alpha_[i1] = a1;
        alpha_[i2] = a2;
        b_ = bnew;
        return true;
    }

    const std::vector<std::vector<double>>& Z_;
    const std::vector<int>& y_;
    double C_;
    double tol_;
    std::size_t n_;
    Rng rng_;
    std::vector<std::vector<double>> K_;
    std::vector<double> alpha_;
    std::vector<double> err_;
    double b_ = 0.0;
};

} // namespace detail

inline SvmModel fit_svm(const Dataset& d, const SvmConfig& cfg = {}) {
    if (d.n() < 2) throw DataError("svm fit: need at least two records");
    if (!(cfg.C > 0.0)) throw ConfigError("svm fit: C must be positive");
    if (cfg.kernel.type == Kernel::Type::rbf && !(cfg.kernel.gamma > 0.0)) {
        throw ConfigError("svm fit: rbf gamma must be positive");
    }
    if (!(cfg.tol > 0.0)) throw ConfigError("svm fit: tol must be positive");
    if (cfg.max_passes < 1) throw ConfigError("svm fit: max_passes must be at least 1");
    const std::size_t positives = d.count_label(kBankrupt);
    if (positives == 0 || positives == d.n()) {
        throw DataError("svm fit: training data must contain both classes");
    }

    const std::size_t n = d.n();
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (const auto& r : d.records) rows.push_back(r.values);

    SvmModel model;
    model.feature_codes = d.schema.codes();
    model.kernel = cfg.kernel;
    model.C = cfg.C;
    model.standardization = Standardization::fit(rows);
    const auto Z = model.standardization.apply_all(rows);

    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = d.records[i].label == kBankrupt ? +1 : -1;
    }

    detail::Smo smo(Z, y, cfg.C, cfg.kernel, cfg.tol, cfg.seed);
    int passes_left = cfg.max_passes;
    for (int attempt = 0; attempt < 5; ++attempt) {
        const bool natural = smo.run(passes_left);
        smo.recompute_bias_and_errors();
        if (smo.kkt_satisfied()) {
            model.converged = true;
            break;
        }
        if (!natural) break;
    }
    if (!model.converged) {
        model.warnings.push_back(
            "optimizer stopped before every sample met the KKT conditions; raise max_passes");
    }

    model.b = smo.bias();
    for (std::size_t i = 0; i < n; ++i) {
        const double a = smo.alpha()[i];
        if (a <= detail::Smo::kAlphaEps) continue;
        model.support_vectors.push_back(Z[i]);
        model.alphas.push_back(std::min(a, cfg.C));
        model.sv_labels.push_back(y[i]);
        model.sv_indices.push_back(i);
    }
    if (cfg.kernel.type == Kernel::Type::linear) {
        model.w.assign(d.m(), 0.0);
        for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
            for (std::size_t j = 0; j < d.m(); ++j) {
                model.w[j] += model.alphas[i] * model.sv_labels[i] * model.support_vectors[i][j];
            }
        }
    }
    return model;
}

// Sigmoid calibration p(bankrupt | x) = 1 / (1 + exp(a*f(x) + b)), fitted by
// a ridge-stabilized one-dimensional logistic regression on the training
// decision values.
inline SvmModel fit_platt(SvmModel model, const Dataset& d, int max_iter = 100) {
    if (d.n() == 0) throw DataError("platt fit: empty dataset");
    const std::size_t positives = d.count_label(kBankrupt);
    if (positives == 0 || positives == d.n()) {
        throw DataError("platt fit: calibration data must contain both classes");
    }

    Dataset one_d;
    one_d.schema = FeatureSchema::from_codes({"decision_value"});
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& r : d.records) {
        const double f = model.decision_value(r.values);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
        BankRecord rec;
        rec.bank_id = r.bank_id;
        rec.values = {f};
        rec.label = r.label;
        one_d.records.push_back(std::move(rec));
    }
    if (!(hi - lo > 1e-12)) {
        throw FitError("platt fit: decision values are all identical; nothing to calibrate");
    }

    LogisticConfig lc;
    lc.ridge = 1e-6;
    lc.max_iter = max_iter;
    lc.standardize = true;
    const LogisticModel lm = fit_logistic(one_d, lc);

    const double mu = lm.standardization->mean[0];
    const double sigma = lm.standardization->std[0];
    PlattScaling p;
    p.a = -lm.beta[0] / sigma;
    p.b = -lm.beta0 + lm.beta[0] * mu / sigma;
    model.platt = p;
    if (p.a >= 0.0) {
        model.warnings.push_back(
            "platt slope is non-negative; probabilities decrease with the decision value");
    }
    return model;
}

} // namespace bankml
