#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "voicegate/clip_features.hpp"

namespace vg = voicegate;
using namespace voicegate::testing;

namespace {

vg::MfccMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    vg::MfccMatrix m{vg::Matrix(rows.size(), rows.empty() ? 0 : rows.front().size()), "fp"};
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m.coeffs(r, c) = rows[r][c];
    return m;
}

std::vector<std::vector<double>> random_rows(vg::Rng& rng, std::size_t n, std::size_t cols) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) rows.push_back(uniform_vector(rng, cols, -20.0, 20.0));
    return rows;
}

}  // namespace

TEST(Pool, SingleFrameHasZeroSpread) {
    std::vector<double> frame(13);
    std::iota(frame.begin(), frame.end(), 1.0);
    const auto f = vg::pool(from_rows({frame}), "clip");
    ASSERT_EQ(f.vector.size(), 26u);
    EXPECT_EQ(f.clip_id, "clip");
    for (std::size_t i = 0; i < 13; ++i) {
        EXPECT_EQ(f.vector[i], frame[i]);
        EXPECT_EQ(f.vector[13 + i], 0.0);
    }
}

TEST(Pool, TwoFramesHandArithmetic) {
    const auto f = vg::pool(from_rows({{1.0, 5.0}, {3.0, 5.0}}));
    EXPECT_DOUBLE_EQ(f.vector[0], 2.0);
    EXPECT_DOUBLE_EQ(f.vector[1], 5.0);
    EXPECT_DOUBLE_EQ(f.vector[2], 1.0);
    EXPECT_DOUBLE_EQ(f.vector[3], 0.0);
}

TEST(Pool, MatchesTwoPassOracle) {
    vg::Rng rng(98);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rows = random_rows(rng, 98, 13);
        const auto got = vg::pool(from_rows(rows)).vector;
        const auto ref = vg::oracle::pool(rows);
        for (std::size_t i = 0; i < got.size(); ++i) ASSERT_NEAR(got[i], ref[i], 1e-12);
    }
}

TEST(Pool, FrameOrderAndDuplicationInvariance) {
    vg::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto rows = random_rows(rng, 1 + rng.below(120), 13);
        const auto base = vg::pool(from_rows(rows)).vector;

        auto shuffled = rows;
        rng.shuffle(shuffled);
        const auto permuted = vg::pool(from_rows(shuffled)).vector;
        auto doubled = rows;
        doubled.insert(doubled.end(), rows.begin(), rows.end());
        const auto dup = vg::pool(from_rows(doubled)).vector;
        for (std::size_t i = 0; i < base.size(); ++i) {
            ASSERT_NEAR(permuted[i], base[i], 1e-12);
            ASSERT_NEAR(dup[i], base[i], 1e-12);
        }
    }
}

TEST(Pool, EmptyMatrix) {
    try {
        vg::pool(vg::MfccMatrix{vg::Matrix(0, 13), ""});
        FAIL();
    } catch (const vg::Error& e) {
        EXPECT_EQ(e.kind(), vg::ErrorKind::empty_feature);
    }
}
