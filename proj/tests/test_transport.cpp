/*
 * Copyright 2026 The lcbnn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <random>

#include <gtest/gtest.h>

#include "lcbnn/transport.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lcbnn;

namespace {

std::vector<double> draw(std::mt19937_64& rng, std::size_t max_n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(1 + rng() % max_n);
    for (double& x : v) x = rng() % 5 == 0 ? std::round(normal(rng)) : normal(rng);
    return v;
}

}  // namespace

TEST(Wasserstein, Examples) {
    EXPECT_EQ(wasserstein1(std::vector<double>{0.0}, std::vector<double>{1.0}), 1.0);
    EXPECT_NEAR(wasserstein1(std::vector<double>{0.0, 0.5}, std::vector<double>{0.25, 1.0}), 0.375, 1e-15);
    EXPECT_EQ(wasserstein1(std::vector<double>{0.3, 0.3}, std::vector<double>{0.3}), 0.0);
    // unequal sizes: {0,1} vs {0.5}
    EXPECT_NEAR(wasserstein1(std::vector<double>{0.0, 1.0}, std::vector<double>{0.5}), 0.5, 1e-15);
    EXPECT_THROW(wasserstein1(std::vector<double>{}, std::vector<double>{1.0}), ValidationError);
}

TEST(Wasserstein, MatchesTransportLP) {
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = draw(rng, 12), b = draw(rng, 12);
        EXPECT_NEAR(wasserstein1(a, b), oracle::transport_lp(a, b), 1e-9);
    }
}

TEST(Wasserstein, MetricProperties) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = draw(rng, 40), b = draw(rng, 40), c = draw(rng, 40);
        EXPECT_NEAR(wasserstein1(a, b), wasserstein1(b, a), 1e-12);
        EXPECT_LE(wasserstein1(a, c), wasserstein1(a, b) + wasserstein1(b, c) + 1e-12);
        EXPECT_EQ(wasserstein1(a, a), 0.0);
        const double shift = normal(rng);
        auto as = a, bs = b;
        for (double& v : as) v += shift;
        for (double& v : bs) v += shift;
        EXPECT_NEAR(wasserstein1(as, bs), wasserstein1(a, b), 1e-12);
        // shifting only one side by s moves W1 by at most |s|
        auto a2 = a;
        for (double& v : a2) v += shift;
        EXPECT_NEAR(wasserstein1(a2, a), std::abs(shift), 1e-12);
    }
}

TEST(Spearman, Examples) {
    EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}), 1.0, 1e-15);
    EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
    EXPECT_EQ(spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), 0.0);
    EXPECT_EQ(average_ranks(std::vector<double>{5, 1, 5, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(ErrorUncertaintyGap, Examples) {
    const std::vector<double> unc{0.8, 0.9, 0.1, 0.2};
    const std::vector<bool> err{true, true, false, false};
    const auto g = error_uncertainty_gap(unc, err);
    EXPECT_NEAR(g.w1, 0.7, 1e-12);
    EXPECT_GT(g.spearman, 0.0);

    const std::vector<double> sep{0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
    const std::vector<bool> sep_err{false, false, false, true, true, true};
    const auto indicator = std::vector<double>{0, 0, 0, 1, 1, 1};
    EXPECT_NEAR(error_uncertainty_gap(sep, sep_err).spearman, spearman(sep, indicator), 1e-15);
    EXPECT_GT(error_uncertainty_gap(sep, sep_err).spearman, 0.8);

    const auto perfect = error_uncertainty_gap(std::vector<double>{1, 1, 0, 0, 0},
                                               std::vector<bool>{true, true, false, false, false});
    EXPECT_NEAR(perfect.w1, 1.0, 1e-15);
    EXPECT_NEAR(perfect.spearman, 1.0, 1e-12);

    try {
        error_uncertainty_gap(std::vector<double>{0.1, 0.2}, std::vector<bool>{false, false});
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("degenerate split"), std::string::npos);
    }
}
