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

// Equal-width binned calibration statistics.
//
// Confidence side (ECE/MCE): x = max predictive probability, y = 1[correct].
// Uncertainty side (UCE/MUCE/sharpness): x = normalized entropy in [0,1],
// y = 1[wrong]. Empty bins never contribute to a statistic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lcbnn/types.hpp"

namespace lcbnn {

inline constexpr std::size_t kDefaultBins = 10;

enum class DiagramMode { confidence, uncertainty };

/// Bin i covers [i/M, (i+1)/M); the last bin is closed at 1.
struct BinPartition {
    std::size_t m = 0;
    std::vector<std::vector<std::size_t>> members;

    double lo(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(m); }
    double hi(std::size_t i) const {
        return i + 1 == m ? 1.0 : static_cast<double>(i + 1) / static_cast<double>(m);
    }
};

inline std::size_t bin_index(double x, std::size_t m) {
    const double md = static_cast<double>(m);
    auto idx = static_cast<std::size_t>(std::floor(x * md));
    if (idx >= m) idx = m - 1;
    // Snap against the stored edges so a value equal to an edge i/M always
    // lands in bin i regardless of rounding in x * M.
    while (idx + 1 < m && x >= static_cast<double>(idx + 1) / md) ++idx;
    while (idx > 0 && x < static_cast<double>(idx) / md) --idx;
    return idx;
}

inline BinPartition partition(std::span<const double> values, std::size_t m) {
    detail::require(m >= 1, "bin count must be >= 1");
    BinPartition bp{m, std::vector<std::vector<std::size_t>>(m)};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("value outside [0,1] at index " + std::to_string(i));
        }
        bp.members[bin_index(v, m)].push_back(i);
    }
    return bp;
}

/// One row per bin, empty bins included (mean_x set to the bin midpoint).
inline std::vector<DiagramRow> reliability_data(std::span<const double> x,
                                                const std::vector<bool>& y_indicator,
                                                std::size_t m,
                                                [[maybe_unused]] DiagramMode mode) {
    detail::require(x.size() == y_indicator.size(), "length mismatch between values and indicators");
    const auto bp = partition(x, m);
    std::vector<DiagramRow> rows(m);
    for (std::size_t b = 0; b < m; ++b) {
        auto& r = rows[b];
        r.lo = bp.lo(b);
        r.hi = bp.hi(b);
        const auto& idx = bp.members[b];
        r.count = idx.size();
        if (idx.empty()) {
            r.mean_x = 0.5 * (r.lo + r.hi);
            continue;
        }
        double sx = 0.0, sy = 0.0;
        for (auto i : idx) {
            sx += x[i];
            sy += y_indicator[i] ? 1.0 : 0.0;
        }
        const double n = static_cast<double>(idx.size());
        r.mean_x = sx / n;
        r.empirical_y = sy / n;
        r.gap = std::abs(r.empirical_y - r.mean_x);
    }
    return rows;
}

namespace detail {

struct GapSummary {
    double weighted = 0.0;
    double maximum = 0.0;
    double variance = 0.0;
};

inline GapSummary summarize_gaps(const std::vector<DiagramRow>& rows, std::size_t n) {
    GapSummary g;
    std::vector<double> gaps;
    for (const auto& r : rows) {
        if (r.count == 0) continue;
        g.weighted += static_cast<double>(r.count) / static_cast<double>(n) * r.gap;
        g.maximum = std::max(g.maximum, r.gap);
        gaps.push_back(r.gap);
    }
    double mean = 0.0;
    for (double v : gaps) mean += v;
    mean /= static_cast<double>(gaps.size());
    for (double v : gaps) g.variance += (v - mean) * (v - mean);
    g.variance /= static_cast<double>(gaps.size());
    return g;
}

inline void check_inputs(std::span<const double> x, const std::vector<bool>& y) {
    require(x.size() == y.size(), "length mismatch between values and indicators");
    require(!x.empty(), "calibration metrics need at least one sample");
}

inline void check_normalized(std::span<const double> u) {
    for (double v : u) require(v >= 0.0 && v <= 1.0, "uncertainty not normalized to [0,1]");
}

inline GapSummary confidence_gaps(std::span<const double> conf, const std::vector<bool>& correct,
                                  std::size_t m) {
    check_inputs(conf, correct);
    return summarize_gaps(reliability_data(conf, correct, m, DiagramMode::confidence), conf.size());
}

inline GapSummary uncertainty_gaps(std::span<const double> unc, const std::vector<bool>& errors,
                                   std::size_t m) {
    check_inputs(unc, errors);
    check_normalized(unc);
    return summarize_gaps(reliability_data(unc, errors, m, DiagramMode::uncertainty), unc.size());
}

}  // namespace detail

inline double ece(std::span<const double> confidences, const std::vector<bool>& correct,
                  std::size_t m = kDefaultBins) {
    return detail::confidence_gaps(confidences, correct, m).weighted;
}

inline double mce(std::span<const double> confidences, const std::vector<bool>& correct,
                  std::size_t m = kDefaultBins) {
    return detail::confidence_gaps(confidences, correct, m).maximum;
}

inline double uce(std::span<const double> uncertainties, const std::vector<bool>& errors,
                  std::size_t m = kDefaultBins) {
    return detail::uncertainty_gaps(uncertainties, errors, m).weighted;
}

inline double muce(std::span<const double> uncertainties, const std::vector<bool>& errors,
                   std::size_t m = kDefaultBins) {
    return detail::uncertainty_gaps(uncertainties, errors, m).maximum;
}

/// Population variance of the per-bin gaps over nonempty bins, unweighted.
inline double sharpness(std::span<const double> uncertainties, const std::vector<bool>& errors,
                        std::size_t m = kDefaultBins) {
    return detail::uncertainty_gaps(uncertainties, errors, m).variance;
}

}  // namespace lcbnn
