#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bankml/bankml.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bankml;

TEST(MinorityLabel, PicksLessFrequentClassAndBreaksTiesTowardBankrupt) {
    EXPECT_EQ(minority_label(testutil::random_dataset(10, 3, 2, 1)), kBankrupt);
    EXPECT_EQ(minority_label(testutil::random_dataset(3, 10, 2, 1)), kActive);
    EXPECT_EQ(minority_label(testutil::random_dataset(5, 5, 2, 1)), kBankrupt);
}

TEST(Knn, MatchesBruteForceOnRandomData) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto d = testutil::random_dataset(12, 9, 3, seed);
        for (std::size_t i = 0; i < d.n(); ++i) {
            for (std::size_t k : {1u, 3u, 5u}) {
                EXPECT_EQ(knn_minority(d, i, k), oracle::brute_knn(d, i, k))
                    << "seed " << seed << " sample " << i << " k " << k;
            }
        }
    }
}

TEST(Knn, ExcludesTheSampleItself) {
    const auto d = testutil::random_dataset(4, 4, 2, 2);
    for (std::size_t i = 0; i < d.n(); ++i) {
        const auto nn = knn_minority(d, i, 3);
        EXPECT_EQ(std::count(nn.begin(), nn.end(), i), 0);
    }
}

TEST(Knn, EquidistantNeighboursPreferTheLowerIndex) {
    // Three minority points at distance 1 from the origin sample.
    const auto d = testutil::make_dataset(
        {{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {5, 5}}, {1, 1, 1, 1, 0});
    const auto nn = knn_minority(d, 0, 2);
    EXPECT_EQ(nn, (std::vector<std::size_t>{1, 2}));
}

TEST(Knn, RejectsKLargerThanThePool) {
    const auto d = testutil::random_dataset(5, 3, 2, 3);
    EXPECT_THROW(knn_minority(d, 5, 3), DataError); // only 2 other minority records
    EXPECT_NO_THROW(knn_minority(d, 5, 2));
    EXPECT_THROW(knn_minority(d, 0, 0), ConfigError);
}

TEST(Synthesize, InterpolatesOnTheSegment) {
    const std::vector<double> a{0.0, 0.0};
    const std::vector<double> b{2.0, 4.0};
    EXPECT_EQ(synthesize(a, b, 0.5), (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(synthesize(a, b, 0.0), a);
    EXPECT_EQ(synthesize(a, b, 1.0), b);
    const std::vector<double> shorter{1.0};
    EXPECT_THROW(synthesize(a, shorter, 0.5), std::invalid_argument);
    EXPECT_THROW(synthesize(a, b, -0.1), std::invalid_argument);
    EXPECT_THROW(synthesize(a, b, 1.1), std::invalid_argument);
}

TEST(Balance, ReachesTheDocumentedCounts) {
    // The headline case: 21 bankrupt vs 44 active reaches 44/44.
    const auto d = testutil::random_dataset(44, 21, 4, 10);
    SmoteConfig cfg;
    cfg.k = 5;
    cfg.seed = 99;
    const auto out = balance(d, cfg);
    EXPECT_EQ(out.count_label(kActive), 44u);
    EXPECT_EQ(out.count_label(kBankrupt), 44u);
    EXPECT_EQ(out.n(), 88u);
}

TEST(Balance, TargetCountUsesHalfEvenRounding) {
    SmoteConfig cfg;
    cfg.k = 2;
    cfg.seed = 1;

    cfg.target_ratio = 0.85; // 0.85 * 10 = 8.5 rounds to 8
    const auto a = balance(testutil::random_dataset(10, 3, 2, 11), cfg);
    EXPECT_EQ(a.count_label(kBankrupt), 8u);

    cfg.target_ratio = 0.75; // 0.75 * 14 = 10.5 rounds to 10
    const auto b = balance(testutil::random_dataset(14, 4, 2, 12), cfg);
    EXPECT_EQ(b.count_label(kBankrupt), 10u);

    cfg.target_ratio = 0.5; // 0.5 * 11 = 5.5 rounds to 6
    const auto c = balance(testutil::random_dataset(11, 4, 2, 13), cfg);
    EXPECT_EQ(c.count_label(kBankrupt), 6u);
}

TEST(Balance, AlreadyBalancedDataIsUntouched) {
    const auto d = testutil::random_dataset(6, 6, 3, 14);
    SmoteConfig cfg;
    cfg.k = 3;
    const auto out = balance(d, cfg);
    EXPECT_EQ(render_csv(out), render_csv(d));

    // Minority already above the target ratio: no synthesis either.
    cfg.target_ratio = 0.5;
    const auto e = testutil::random_dataset(10, 7, 3, 15);
    EXPECT_EQ(render_csv(balance(e, cfg)), render_csv(e));
}

TEST(Balance, OriginalRecordsSurviveInOrderAndSyntheticsAreTagged) {
    const auto d = testutil::random_dataset(9, 4, 3, 16);
    SmoteConfig cfg;
    cfg.k = 3;
    cfg.seed = 5;
    const auto out = balance(d, cfg);
    ASSERT_EQ(out.n(), 18u);
    for (std::size_t i = 0; i < d.n(); ++i) {
        EXPECT_EQ(out.records[i].bank_id, d.records[i].bank_id);
        EXPECT_EQ(out.records[i].values, d.records[i].values);
    }
    for (std::size_t i = d.n(); i < out.n(); ++i) {
        EXPECT_EQ(out.records[i].bank_id,
                  "synthetic-" + std::to_string(i - d.n() + 1));
        EXPECT_EQ(out.records[i].label, kBankrupt);
        EXPECT_FALSE(out.records[i].period.has_value());
    }
}

namespace {

// True when x sits on the segment between two minority records of d.
bool on_some_minority_segment(const Dataset& d, int minority, const std::vector<double>& x) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.n(); ++i) {
        if (d.records[i].label == minority) idx.push_back(i);
    }
    for (std::size_t a : idx) {
        for (std::size_t b : idx) {
            if (a == b) continue;
            const auto& pa = d.records[a].values;
            const auto& pb = d.records[b].values;
            // Solve x = pa + t (pb - pa) coordinate-wise; every coordinate
            // must agree on t within tolerance and t must lie in [0, 1].
            double t = std::numeric_limits<double>::quiet_NaN();
            bool ok = true;
            for (std::size_t j = 0; j < x.size(); ++j) {
                const double dj = pb[j] - pa[j];
                if (std::abs(dj) < 1e-12) {
                    if (std::abs(x[j] - pa[j]) > 1e-9) {
                        ok = false;
                        break;
                    }
                    continue;
                }
                const double tj = (x[j] - pa[j]) / dj;
                if (std::isnan(t)) {
                    t = tj;
                } else if (std::abs(tj - t) > 1e-9) {
                    ok = false;
                    break;
                }
            }
            if (ok && (std::isnan(t) || (t >= -1e-12 && t <= 1.0 + 1e-12))) return true;
        }
    }
    return false;
}

} // namespace

TEST(Balance, SyntheticPointsLieOnMinoritySegments) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto d = testutil::random_dataset(15, 6, 3, seed * 31);
        SmoteConfig cfg;
        cfg.k = 3;
        cfg.seed = seed;
        const auto out = balance(d, cfg);
        for (std::size_t i = d.n(); i < out.n(); ++i) {
            EXPECT_TRUE(on_some_minority_segment(d, kBankrupt, out.records[i].values))
                << "seed " << seed << " synthetic " << i - d.n();
        }
    }
}

TEST(Balance, SyntheticPointsStayInsideTheMinorityBoundingBox) {
    const auto d = testutil::random_dataset(30, 10, 4, 77);
    std::vector<double> lo(d.m(), std::numeric_limits<double>::infinity());
    std::vector<double> hi(d.m(), -std::numeric_limits<double>::infinity());
    for (const auto& r : d.records) {
        if (r.label != kBankrupt) continue;
        for (std::size_t j = 0; j < d.m(); ++j) {
            lo[j] = std::min(lo[j], r.values[j]);
            hi[j] = std::max(hi[j], r.values[j]);
        }
    }
    SmoteConfig cfg;
    cfg.k = 4;
    cfg.seed = 7;
    const auto out = balance(d, cfg);
    for (std::size_t i = d.n(); i < out.n(); ++i) {
        for (std::size_t j = 0; j < d.m(); ++j) {
            EXPECT_GE(out.records[i].values[j], lo[j] - 1e-12);
            EXPECT_LE(out.records[i].values[j], hi[j] + 1e-12);
        }
    }
}

TEST(Balance, ParentsRotateRoundRobin) {
    // Two far-apart minority clusters: synthetics alternate between them
    // because parents cycle in record order.
    const auto d = testutil::make_dataset(
        {{0, 0}, {0.1, 0}, {100, 100}, {100.1, 100}, {50, 0}, {50, 1}, {50, 2},
         {50, 3}, {50, 4}, {50, 5}},
        {1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
    SmoteConfig cfg;
    cfg.k = 1;
    cfg.seed = 3;
    const auto out = balance(d, cfg); // deficit 2: parents are records 0 and 1
    ASSERT_EQ(out.n(), 12u);
    EXPECT_LT(out.records[10].values[0], 1.0);  // near the origin cluster
    EXPECT_LT(out.records[11].values[0], 1.0);
}

TEST(Balance, SameSeedIsByteIdenticalAndSeedsMatter) {
    const auto d = testutil::random_dataset(20, 8, 3, 55);
    SmoteConfig cfg;
    cfg.k = 4;
    cfg.seed = 1234;
    EXPECT_EQ(render_csv(balance(d, cfg)), render_csv(balance(d, cfg)));

    SmoteConfig other = cfg;
    other.seed = 1235;
    EXPECT_NE(render_csv(balance(d, other)), render_csv(balance(d, cfg)));
}

TEST(Balance, RejectsBadConfigAndDegenerateData) {
    const auto d = testutil::random_dataset(10, 4, 2, 66);
    SmoteConfig cfg;

    cfg.k = 0;
    EXPECT_THROW(balance(d, cfg), ConfigError);

    cfg.k = 4; // k must stay below the minority count of 4
    EXPECT_THROW(balance(d, cfg), DataError);

    cfg.k = 3;
    cfg.target_ratio = 0.0;
    EXPECT_THROW(balance(d, cfg), ConfigError);
    cfg.target_ratio = 1.5;
    EXPECT_THROW(balance(d, cfg), ConfigError);

    cfg.target_ratio = 1.0;
    EXPECT_THROW(balance(testutil::random_dataset(10, 0, 2, 67), cfg), DataError);
}
