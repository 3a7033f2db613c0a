#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bankml/bankml.hpp"
#include "bankml/model_io.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bankml;

TEST(Kernels, KnownValues) {
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{3.0, -1.0};
    EXPECT_DOUBLE_EQ(Kernel::linear()(a, b), 1.0);
    EXPECT_DOUBLE_EQ(Kernel::rbf(0.5)(a, a), 1.0);
    EXPECT_NEAR(Kernel::rbf(0.5)(a, b), std::exp(-0.5 * 13.0), 1e-15);
    EXPECT_DOUBLE_EQ(Kernel::rbf(2.0)(a, b), Kernel::rbf(2.0)(b, a));
}

TEST(Svm, TwoPointHardMarginHasTheTextbookSolution) {
    const auto d = testutil::make_dataset({{-1.0}, {1.0}}, {0, 1});
    SvmConfig cfg;
    cfg.C = 1e6;
    const auto m = fit_svm(d, cfg);
    ASSERT_TRUE(m.converged);
    ASSERT_EQ(m.support_vectors.size(), 2u);
    ASSERT_EQ(m.w.size(), 1u);
    EXPECT_NEAR(m.w[0], 1.0, 1e-6);
    EXPECT_NEAR(m.b, 0.0, 1e-6);
    EXPECT_NEAR(m.alphas[0], 0.5, 1e-6);
    EXPECT_NEAR(m.alphas[1], 0.5, 1e-6);
    // Both points sit exactly on the margin.
    EXPECT_NEAR(m.decision_value(std::vector<double>{1.0}), 1.0, 1e-6);
    EXPECT_NEAR(m.decision_value(std::vector<double>{-1.0}), -1.0, 1e-6);
    EXPECT_EQ(m.predict(std::vector<double>{0.2}), kBankrupt);
    EXPECT_EQ(m.predict(std::vector<double>{-0.2}), kActive);
}

TEST(Svm, DecisionSignDrivesTheClassWithTiesBankrupt) {
    SvmModel m;
    m.feature_codes = {"f1"};
    m.b = 0.0;
    m.standardization.mean = {0.0};
    m.standardization.std = {1.0};
    EXPECT_DOUBLE_EQ(m.decision_value(std::vector<double>{3.0}), 0.0);
    EXPECT_EQ(m.predict(std::vector<double>{3.0}), kBankrupt); // f == 0 counts bankrupt
    m.b = -0.5;
    EXPECT_EQ(m.predict(std::vector<double>{3.0}), kActive);
}

namespace {

struct TrainedCase {
    Dataset data;
    SvmModel model;
    SvmConfig cfg;
};

TrainedCase train_case(std::uint64_t seed, double C, Kernel kernel, double shift = 1.5,
                       double tol = 1e-3) {
    TrainedCase tc;
    tc.data = testutil::random_dataset(16, 14, 2, seed, shift);
    tc.cfg.C = C;
    tc.cfg.kernel = kernel;
    tc.cfg.tol = tol;
    tc.cfg.max_passes = 20000;
    tc.cfg.seed = seed;
    tc.model = fit_svm(tc.data, tc.cfg);
    return tc;
}

double alpha_of(const SvmModel& m, std::size_t train_index) {
    for (std::size_t s = 0; s < m.sv_indices.size(); ++s) {
        if (m.sv_indices[s] == train_index) return m.alphas[s];
    }
    return 0.0;
}

} // namespace

TEST(Svm, KktConditionsHoldAtTheSolution) {
    for (std::uint64_t seed : {1, 2, 3}) {
        for (const Kernel& k : {Kernel::linear(), Kernel::rbf(0.5)}) {
            const auto tc = train_case(seed, 1.0, k);
            ASSERT_TRUE(tc.model.converged) << seed << " " << k.name();
            for (std::size_t i = 0; i < tc.data.n(); ++i) {
                const double yi = tc.data.records[i].label == kBankrupt ? 1.0 : -1.0;
                const double yf = yi * tc.model.decision_value(tc.data.records[i].values);
                const double a = alpha_of(tc.model, i);
                const double tol = tc.cfg.tol + 1e-9;
                if (a < 1e-8) {
                    EXPECT_GE(yf, 1.0 - tol) << "free point inside margin, i = " << i;
                } else if (a > tc.cfg.C - 1e-8) {
                    EXPECT_LE(yf, 1.0 + tol) << "bound point outside margin, i = " << i;
                } else {
                    EXPECT_NEAR(yf, 1.0, tol) << "margin SV off the margin, i = " << i;
                }
            }
        }
    }
}

TEST(Svm, DualFeasibilityHolds) {
    for (std::uint64_t seed : {4, 5, 6}) {
        const auto tc = train_case(seed, 2.0, Kernel::rbf(1.0));
        double sum = 0.0;
        for (std::size_t s = 0; s < tc.model.alphas.size(); ++s) {
            EXPECT_GE(tc.model.alphas[s], 0.0);
            EXPECT_LE(tc.model.alphas[s], tc.cfg.C);
            sum += tc.model.alphas[s] * tc.model.sv_labels[s];
        }
        EXPECT_NEAR(sum, 0.0, 1e-6);
    }
}

TEST(Svm, DualObjectiveMatchesTheProjectionOracle) {
    struct Instance {
        std::uint64_t seed;
        double C;
        Kernel kernel;
    };
    const std::vector<Instance> instances{
        {11, 0.3, Kernel::linear()},
        {12, 2.0, Kernel::linear()},
        {13, 0.5, Kernel::rbf(0.7)},
        {14, 2.0, Kernel::rbf(1.3)},
    };
    for (const auto& inst : instances) {
        const auto tc = train_case(inst.seed, inst.C, inst.kernel, 1.0, /*tol=*/1e-6);
        ASSERT_TRUE(tc.model.converged) << inst.seed;
        ASSERT_EQ(tc.data.n(), 30u);

        // Kernel matrix on the standardized rows the optimizer saw.
        std::vector<std::vector<double>> rows;
        std::vector<int> y;
        for (const auto& r : tc.data.records) {
            rows.push_back(r.values);
            y.push_back(r.label == kBankrupt ? 1 : -1);
        }
        const auto Z = tc.model.standardization.apply_all(rows);
        std::vector<std::vector<double>> K(Z.size(), std::vector<double>(Z.size()));
        for (std::size_t i = 0; i < Z.size(); ++i) {
            for (std::size_t j = 0; j < Z.size(); ++j) K[i][j] = inst.kernel(Z[i], Z[j]);
        }

        std::vector<double> alpha(Z.size(), 0.0);
        for (std::size_t s = 0; s < tc.model.sv_indices.size(); ++s) {
            alpha[tc.model.sv_indices[s]] = tc.model.alphas[s];
        }
        const double mine = oracle::dual_objective(K, y, alpha);
        const double ref = oracle::projected_gradient_dual(K, y, inst.C);
        EXPECT_NEAR(mine, ref, 1e-3) << "seed " << inst.seed << " C " << inst.C << " "
                                     << inst.kernel.name();
    }
}

TEST(Svm, LinearWeightVectorReproducesTheExpansion) {
    const auto tc = train_case(21, 1.0, Kernel::linear());
    ASSERT_EQ(tc.model.w.size(), 2u);
    Rng rng(77);
    for (int rep = 0; rep < 30; ++rep) {
        const std::vector<double> x{rng.normal(), rng.normal()};
        const auto z = tc.model.standardization.apply(x);
        const double via_w = dot(z, tc.model.w) + tc.model.b;
        EXPECT_NEAR(tc.model.decision_value(x), via_w, 1e-10);
    }
}

TEST(Svm, XorNeedsTheRbfKernel) {
    const auto d = testutil::make_dataset(
        {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}}, {1, 1, 0, 0});

    SvmConfig lin;
    lin.C = 10.0;
    const auto ml = fit_svm(d, lin);
    std::size_t correct_linear = 0;
    for (const auto& r : d.records) {
        if (ml.predict(r.values) == r.label) ++correct_linear;
    }
    EXPECT_LE(correct_linear, 3u); // no separating hyperplane exists

    SvmConfig rbf;
    rbf.C = 10.0;
    rbf.kernel = Kernel::rbf(1.0);
    const auto mr = fit_svm(d, rbf);
    ASSERT_TRUE(mr.converged);
    for (const auto& r : d.records) {
        EXPECT_EQ(mr.predict(r.values), r.label);
    }
}

TEST(Svm, SameSeedReproducesByteForByte) {
    const auto d = testutil::random_dataset(15, 15, 3, 61);
    SvmConfig cfg;
    cfg.kernel = Kernel::rbf(0.8);
    cfg.seed = 5;
    const auto a = fit_svm(d, cfg);
    const auto b = fit_svm(d, cfg);
    EXPECT_EQ(model_to_json(a).dump(), model_to_json(b).dump());
}

TEST(Svm, RejectsBadConfigAndDegenerateData) {
    const auto d = testutil::random_dataset(6, 6, 2, 71);
    SvmConfig cfg;
    cfg.C = 0.0;
    EXPECT_THROW(fit_svm(d, cfg), ConfigError);
    cfg = {};
    cfg.kernel = Kernel::rbf(-1.0);
    EXPECT_THROW(fit_svm(d, cfg), ConfigError);
    cfg = {};
    cfg.tol = 0.0;
    EXPECT_THROW(fit_svm(d, cfg), ConfigError);
    cfg = {};
    cfg.max_passes = 0;
    EXPECT_THROW(fit_svm(d, cfg), ConfigError);

    EXPECT_THROW(fit_svm(testutil::random_dataset(8, 0, 2, 72), {}), DataError);
    EXPECT_THROW(fit_svm(testutil::make_dataset({{1.0}}, {1}), {}), DataError);
}

TEST(Platt, ScalingFormulaIsPinned) {
    SvmModel m;
    m.feature_codes = {"f1"};
    m.b = 0.0;
    m.standardization.mean = {0.0};
    m.standardization.std = {1.0};
    m.support_vectors = {{1.0}};
    m.alphas = {1.0};
    m.sv_labels = {1};
    m.kernel = Kernel::linear();

    EXPECT_THROW(m.predict_proba(std::vector<double>{0.5}), ConfigError);

    m.platt = PlattScaling{-2.0, 0.0};
    // decision_value(x) = x here, so p = sigmoid(2 * f).
    EXPECT_NEAR(m.predict_proba(std::vector<double>{0.0}), 0.5, 1e-15);
    EXPECT_NEAR(m.predict_proba(std::vector<double>{1.0}), sigmoid(2.0), 1e-15);
    EXPECT_NEAR(m.predict_proba(std::vector<double>{-1.0}), sigmoid(-2.0), 1e-15);
}

TEST(Platt, CalibratedProbabilitiesTrackTheDecisionValue) {
    const auto d = testutil::random_dataset(25, 25, 2, 81, /*shift=*/2.0);
    SvmConfig cfg;
    cfg.C = 1.0;
    auto m = fit_platt(fit_svm(d, cfg), d);
    ASSERT_TRUE(m.platt.has_value());
    EXPECT_LT(m.platt->a, 0.0); // sane orientation: larger f, larger p
    EXPECT_TRUE(m.warnings.empty());

    // Monotone in f and consistent with the sign rule near the boundary.
    std::vector<std::pair<double, double>> fp;
    Rng rng(9);
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> x{rng.normal() + 1.0, rng.normal() + 1.0};
        fp.emplace_back(m.decision_value(x), m.predict_proba(x));
    }
    std::sort(fp.begin(), fp.end());
    for (std::size_t i = 1; i < fp.size(); ++i) {
        EXPECT_GE(fp[i].second, fp[i - 1].second);
    }
    for (const auto& [f, p] : fp) {
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
    }

    // Confidently classified training points get confident probabilities.
    double best_f = 0.0;
    for (const auto& r : d.records) {
        best_f = std::max(best_f, m.decision_value(r.values));
    }
    EXPECT_GT(best_f, 1.0);
    // p = sigmoid(-(a f + b)) with a < 0 grows toward 1 as f grows.
}

TEST(Platt, MatchesAOneDimensionalLogisticFitOnDecisionValues) {
    const auto d = testutil::random_dataset(20, 20, 2, 91, /*shift=*/1.5);
    SvmConfig cfg;
    auto m = fit_platt(fit_svm(d, cfg), d);
    ASSERT_TRUE(m.platt.has_value());

    Dataset one_d;
    one_d.schema = FeatureSchema::from_codes({"f"});
    for (const auto& r : d.records) {
        BankRecord rec;
        rec.bank_id = r.bank_id;
        rec.values = {m.decision_value(r.values)};
        rec.label = r.label;
        one_d.records.push_back(std::move(rec));
    }
    LogisticConfig lc;
    lc.ridge = 1e-6;
    const auto lm = fit_logistic(one_d, lc);
    for (const auto& r : one_d.records) {
        const double via_platt = sigmoid(-(m.platt->a * r.values[0] + m.platt->b));
        EXPECT_NEAR(via_platt, lm.predict_proba(r.values), 1e-9);
    }
}

TEST(Platt, DegenerateDecisionValuesAreRejected) {
    SvmModel m;
    m.feature_codes = {"f1"};
    m.b = 0.25; // no support vectors: constant decision value
    m.standardization.mean = {0.0};
    m.standardization.std = {1.0};
    const auto d = testutil::random_dataset(5, 5, 1, 95);
    EXPECT_THROW(fit_platt(std::move(m), d), FitError);
}

TEST(Platt, SingleClassCalibrationDataIsRejected) {
    const auto d = testutil::random_dataset(10, 10, 2, 97);
    auto m = fit_svm(d, {});
    EXPECT_THROW(fit_platt(std::move(m), testutil::random_dataset(6, 0, 2, 98)), DataError);
}

TEST(Svm, JsonRoundTripPreservesEverything) {
    const auto d = testutil::random_dataset(12, 12, 2, 99);
    SvmConfig cfg;
    cfg.kernel = Kernel::rbf(0.6);
    const auto m = fit_platt(fit_svm(d, cfg), d);
    const auto back = svm_from_json(model_to_json(m));
    for (const auto& r : d.records) {
        EXPECT_DOUBLE_EQ(back.decision_value(r.values), m.decision_value(r.values));
        EXPECT_DOUBLE_EQ(back.predict_proba(r.values), m.predict_proba(r.values));
    }
    EXPECT_EQ(model_to_json(back).dump(), model_to_json(m).dump());
}
