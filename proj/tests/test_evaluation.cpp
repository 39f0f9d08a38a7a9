#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "voicegate/evaluation.hpp"

namespace vg = voicegate;
using namespace voicegate::testing;

namespace {

vg::Dataset clusters(vg::Rng& rng, int labels, int per_label, double spacing, double radius, std::size_t dim = 4) {
    vg::Dataset data;
    for (int l = 0; l < labels; ++l) {
        for (int i = 0; i < per_label; ++i) {
            auto v = uniform_vector(rng, dim, -radius, radius);
            v[0] += spacing * l;
            data.push_back({vg::ClipFeature{std::move(v), "L" + std::to_string(l) + "_" + std::to_string(i)}, "L" + std::to_string(l)});
        }
    }
    return data;
}

vg::Dataset random_labels(vg::Rng& rng, int n, int labels) {
    vg::Dataset data;
    for (int i = 0; i < n; ++i) {
        // Round-robin labels keep every class large enough to stratify.
        data.push_back({vg::ClipFeature{uniform_vector(rng, 26), "c" + std::to_string(i)}, "spk" + std::to_string(i % labels)});
    }
    return data;
}

}  // namespace

TEST(KFold, SeparableClustersAreExact) {
    vg::Rng rng(1);
    const auto data = clusters(rng, 2, 20, 100.0, 0.1);
    for (int folds : {2, 5, 10}) EXPECT_EQ(vg::kfold_cv(data, folds, 3, 9), 1.0);
}

TEST(KFold, ChanceLevelForUninformativeFeatures) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        vg::Rng rng(1000 + seed);
        const auto data = random_labels(rng, 200, 5);
        const double acc = vg::kfold_cv(data, 5, 3, seed);
        EXPECT_GE(acc, 0.05);
        EXPECT_LE(acc, 0.45);
        sum += acc;
    }
    EXPECT_NEAR(sum / 10.0, 0.2, 0.08);
}

TEST(KFold, MatchesHandUnrolledTwoFold) {
    vg::Rng rng(10);
    const auto data = random_labels(rng, 10, 2);
    const auto folds = vg::stratified_folds(data, 2, 42);
    double expected = 0.0;
    for (int f = 0; f < 2; ++f) {
        std::vector<std::vector<double>> points;
        std::vector<std::string> labels;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (folds[i] != f) {
                points.push_back(data[i].feature.vector);
                labels.push_back(data[i].speaker_id);
            }
        }
        int correct = 0;
        int total = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (folds[i] != f) continue;
            ++total;
            if (vg::oracle::knn_label(points, labels, data[i].feature.vector, 3) == data[i].speaker_id) ++correct;
        }
        expected += static_cast<double>(correct) / total / 2.0;
    }
    EXPECT_DOUBLE_EQ(vg::kfold_cv(data, 2, 3, 42), expected);
}

TEST(KFold, StratificationBoundAndErrors) {
    vg::Rng rng(3);
    vg::Dataset data = clusters(rng, 3, 17, 10.0, 1.0);
    const auto more = clusters(rng, 1, 6, 10.0, 1.0);
    for (auto p : more) {
        p.speaker_id = "small";
        p.feature.clip_id += "_s";
        data.push_back(p);
    }
    for (int folds : {2, 3, 5, 6}) {
        const auto assignment = vg::stratified_folds(data, folds, 77);
        std::map<std::string, std::vector<int>> per_label;
        std::map<std::string, int> totals;
        for (std::size_t i = 0; i < data.size(); ++i) {
            auto& counts = per_label[data[i].speaker_id];
            counts.resize(static_cast<std::size_t>(folds));
            ++counts[static_cast<std::size_t>(assignment[i])];
            ++totals[data[i].speaker_id];
        }
        for (const auto& [label, counts] : per_label) {
            const double ideal = static_cast<double>(totals[label]) / folds;
            for (int c : counts) EXPECT_LE(std::abs(c - ideal), 1.0) << label << " folds=" << folds;
        }
    }
    try {
        vg::stratified_folds(data, 7, 1);
        FAIL();
    } catch (const vg::Error& e) {
        EXPECT_EQ(e.kind(), vg::ErrorKind::insufficient_data);
        EXPECT_NE(std::string(e.what()).find("small"), std::string::npos);
    }
    EXPECT_THROW(vg::kfold_cv(data, 1, 1, 1), vg::Error);
    EXPECT_THROW(vg::kfold_cv(data, 2, 100, 1), vg::Error);
}

TEST(Holdout, MemorizationAndArithmetic) {
    vg::Rng rng(4);
    const auto data = clusters(rng, 3, 10, 5.0, 2.0);
    vg::Dataset test;
    for (std::size_t i = 0; i < data.size(); i += 3) {
        auto p = data[i];
        p.feature.clip_id += "_copy";
        test.push_back(p);
    }
    EXPECT_EQ(vg::holdout_cv(data, test, 1), 1.0);

    const vg::Dataset train = {{{{0.0}, "a"}, "A"}, {{{10.0}, "b"}, "B"}};
    const vg::Dataset five = {{{{1.0}, "t1"}, "A"}, {{{2.0}, "t2"}, "A"}, {{{9.0}, "t3"}, "B"},
                              {{{8.0}, "t4"}, "A"}, {{{0.5}, "t5"}, "B"}};
    EXPECT_DOUBLE_EQ(vg::holdout_cv(train, five, 1), 0.6);
}

TEST(Holdout, LeakageIsRejected) {
    vg::Rng rng(5);
    const auto data = clusters(rng, 2, 5, 5.0, 1.0);
    try {
        vg::holdout_cv(data, {data[3]}, 1);
        FAIL();
    } catch (const vg::Error& e) {
        EXPECT_EQ(e.kind(), vg::ErrorKind::leakage);
    }
}

TEST(Holdout, TieRateMarksIndeterminate) {
    // Two labels, each test point equidistant from one member of each.
    const vg::Dataset train = {{{{-1.0}, "a"}, "A"}, {{{1.0}, "b"}, "B"}};
    const vg::Dataset test = {{{{0.0}, "t"}, "A"}};
    const auto h = vg::holdout_cv_detailed(train, test, 2);
    EXPECT_EQ(h.tie_rate, 1.0);
    const vg::Dataset pool = {{{{-1.0}, "a"}, "A"}, {{{1.0}, "b"}, "B"}, {{{-1.1}, "c"}, "A"}, {{{1.1}, "d"}, "B"}};
    const auto report = vg::sweep_neighbors(pool, {1, 2}, 2, 0, vg::HoldoutSplit{train, test});
    EXPECT_TRUE(report.per_k[0].holdout_accuracy.has_value());
    EXPECT_FALSE(report.per_k[1].holdout_accuracy.has_value());
}

TEST(Sweep, ShapeSeparationAndDeterminism) {
    vg::Rng rng(6);
    const auto data = clusters(rng, 5, 20, 100.0, 0.1);
    const auto report = vg::sweep_neighbors(data, {2, 3, 4, 5, 6}, 5, 11);
    ASSERT_EQ(report.per_k.size(), 5u);
    for (const auto& row : report.per_k) {
        EXPECT_EQ(row.kfold_accuracy, 1.0);
        ASSERT_TRUE(row.holdout_accuracy.has_value());
        EXPECT_EQ(*row.holdout_accuracy, 1.0);
    }
    EXPECT_EQ(report.best_k, 2);
    EXPECT_EQ(report.fold_count, 5);
    EXPECT_EQ(report.confusion.total(), 100);
    EXPECT_EQ(report.confusion.trace(), 100);
    for (const auto& row : report.confusion.counts) EXPECT_EQ(std::accumulate(row.begin(), row.end(), 0L), 20);

    const auto again = vg::sweep_neighbors(data, {2, 3, 4, 5, 6}, 5, 11);
    EXPECT_EQ(vg::to_json(report).dump(), vg::to_json(again).dump());
}

TEST(Sweep, ConfusionAccuracyMatchesTrace) {
    vg::Rng rng(12);
    const auto data = random_labels(rng, 60, 3);
    const auto kfold = vg::kfold_cv_detailed(data, 3, 3, 5);
    EXPECT_EQ(kfold.confusion.total(), 60);
    // Equal fold sizes make the mean of fold accuracies the pooled accuracy.
    EXPECT_NEAR(kfold.confusion.accuracy(), kfold.accuracy, 1e-12);
    EXPECT_DOUBLE_EQ(kfold.confusion.accuracy(), static_cast<double>(kfold.confusion.trace()) / kfold.confusion.total());
}

TEST(RenderTable, ReferenceLayout) {
    const std::vector<vg::NeighborResult> rows = {
        {2, 0.2, 1.0, 0.0}, {3, 0.6, 1.0, 0.0}, {4, 0.8, std::nullopt, 0.7}, {5, 0.6, std::nullopt, 0.7}, {6, 0.6, std::nullopt, 0.7}};
    EXPECT_EQ(vg::render_table(rows),
              "Number of neighbors\t2\t3\t4\t5\t6\n"
              "K-fold accuracy\t20\t60\t80\t60\t60\n"
              "Holdout accuracy\t100\t100\t-\t-\t-\n");
    EXPECT_EQ(vg::render_table({{3, 0.875, 0.9125, 0.0}}), "Number of neighbors\t3\nK-fold accuracy\t87.5\nHoldout accuracy\t91.3\n");
}

TEST(ReportJson, IndeterminateIsExplicit) {
    vg::EvalReport r;
    r.per_k = {{4, 0.5, std::nullopt, 0.8}};
    const auto j = vg::to_json(r);
    EXPECT_EQ(j["per_k"][0]["holdout_accuracy"], "indeterminate");
}
