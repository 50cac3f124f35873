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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "lcbnn/types.hpp"
#include "lcbnn/uncertainty.hpp"

namespace lcbnn {

/// W1 between two uniform-weight empirical distributions on the real line,
/// integrated exactly over the merged breakpoints of the two quantile
/// functions. Breakpoints are compared as integers k * n_other to keep the
/// merge order exact.
inline double wasserstein1(std::span<const double> a, std::span<const double> b) {
    detail::require(!a.empty() && !b.empty(), "wasserstein1 needs two nonempty samples");
    for (double v : a) detail::require(std::isfinite(v), "non-finite value in sample");
    for (double v : b) detail::require(std::isfinite(v), "non-finite value in sample");

    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const auto na = static_cast<std::uint64_t>(sa.size());
    const auto nb = static_cast<std::uint64_t>(sb.size());
    std::uint64_t i = 0, j = 0, cur = 0;  // cur in units of 1 / (na * nb)
    double acc = 0.0;
    while (i < na && j < nb) {
        const std::uint64_t next_a = (i + 1) * nb;
        const std::uint64_t next_b = (j + 1) * na;
        const std::uint64_t next = std::min(next_a, next_b);
        acc += static_cast<double>(next - cur) * std::abs(sa[i] - sb[j]);
        cur = next;
        if (next_a == next) ++i;
        if (next_b == next) ++j;
    }
    return acc / (static_cast<double>(na) * static_cast<double>(nb));
}

/// 1-based average ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return x[l] < x[r]; });
    std::vector<double> ranks(x.size());
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k + 1;
        while (end < order.size() && x[order[end]] == x[order[k]]) ++end;
        const double r = 0.5 * static_cast<double>(k + 1 + end);
        for (std::size_t q = k; q < end; ++q) ranks[order[q]] = r;
        k = end;
    }
    return ranks;
}

/// Pearson correlation of average ranks. Returns 0 when either side is
/// constant (the correlation is undefined there).
inline double spearman(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "spearman needs two equal-length series");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct ErrorUncertaintyGap {
    double w1 = 0.0;
    double spearman = 0.0;
};

inline ErrorUncertaintyGap error_uncertainty_gap(std::span<const double> uncertainties,
                                                 const std::vector<bool>& errors) {
    detail::require(uncertainties.size() == errors.size(), "length mismatch");
    std::vector<double> wrong, right, indicator;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        (errors[i] ? wrong : right).push_back(uncertainties[i]);
        indicator.push_back(errors[i] ? 1.0 : 0.0);
    }
    if (wrong.empty() || right.empty()) {
        throw ValidationError("degenerate split: need both correct and incorrect predictions");
    }
    return {wasserstein1(wrong, right), spearman(uncertainties, indicator)};
}

/// Splits by argmax-of-predictive-mean correctness.
inline ErrorUncertaintyGap error_uncertainty_gap(const MCSampleSet& set,
                                                 UncertaintyMethod method = UncertaintyMethod::jackknife) {
    const auto s = summarize(set, method);
    const auto correct = correctness(set, s.predictions);
    std::vector<bool> errors(correct.size());
    for (std::size_t i = 0; i < errors.size(); ++i) errors[i] = !correct[i];
    return error_uncertainty_gap(s.uncertainties(), errors);
}

}  // namespace lcbnn
