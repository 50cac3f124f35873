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
#include <span>
#include <string>
#include <vector>

#include "lcbnn/types.hpp"
#include "lcbnn/uncertainty.hpp"

namespace lcbnn {

struct DecisionOutcome {
    ClassIndex action = 0;
    std::vector<double> expected_utilities;
    bool rejected = false;
    double uncertainty = 0.0;
};

/// u = (max(l) + 1) - l. The +1 keeps every utility strictly positive so
/// log-utility terms stay finite.
inline UtilityMatrix loss_to_utility(const std::vector<std::vector<double>>& loss,
                                     std::vector<std::string> classes = {}) {
    double m = 0.0;
    for (const auto& row : loss) {
        for (double v : row) {
            detail::require(std::isfinite(v) && v >= 0.0, "negative loss entry");
            m = std::max(m, v);
        }
    }
    const double offset = m + 1.0;
    auto u = loss;
    for (auto& row : u)
        for (double& v : row) v = offset - v;
    return UtilityMatrix(std::move(classes), std::move(u));
}

/// EU[a] = sum_y p_y u[y][a].
inline std::vector<double> expected_utility(std::span<const double> p, const UtilityMatrix& u) {
    detail::require(p.size() == u.size(), "utility matrix dimension does not match class count");
    std::vector<double> eu(u.size(), 0.0);
    for (std::size_t a = 0; a < u.size(); ++a) {
        for (std::size_t y = 0; y < p.size(); ++y) eu[a] += p[y] * u(y, a);
    }
    return eu;
}

/// Expected utilities closer than this (relative) count as tied.
inline constexpr double kTieTolerance = 1e-12;

/// Argmax of expected utility, lowest index on ties.
inline ClassIndex argmax_with_ties(std::span<const double> values) {
    ClassIndex best = 0;
    for (std::size_t a = 1; a < values.size(); ++a) {
        const double scale = std::max({1.0, std::abs(values[a]), std::abs(values[best])});
        if (values[a] - values[best] > kTieTolerance * scale) best = a;
    }
    return best;
}

inline ClassIndex bayes_action(std::span<const double> p, const UtilityMatrix& u) {
    return argmax_with_ties(expected_utility(p, u));
}

/// Mean of (max(u) - u[y_i][a_i]), the loss regenerated from the utility
/// with the same offset convention as loss_to_utility.
inline double expected_loss(const MCSampleSet& set, const UtilityMatrix& u,
                            std::span<const ClassIndex> actions) {
    detail::require(!actions.empty(), "expected_loss needs at least one action");
    detail::require(actions.size() == set.n_samples(), "one action per sample required");
    detail::require(u.size() == set.n_classes(), "utility matrix dimension does not match class count");
    const double top = u.max_entry();
    double total = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        detail::require(actions[i] < u.size(), "action out of range");
        total += top - u(set.label(i), actions[i]);
    }
    return total / static_cast<double>(actions.size());
}

/// Mean realized utility u[y_i][a_i].
inline double mean_utility(std::span<const ClassIndex> labels, std::span<const ClassIndex> actions,
                           const UtilityMatrix& u) {
    detail::require(labels.size() == actions.size() && !labels.empty(),
                    "labels and actions must be nonempty and equal length");
    double total = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) total += u(labels[i], actions[i]);
    return total / static_cast<double>(labels.size());
}

struct RejectionSplit {
    std::vector<std::size_t> kept;
    std::vector<std::size_t> rejected;
};

/// Rejects samples whose normalized uncertainty is strictly above threshold.
inline RejectionSplit reject_uncertain(std::span<const double> uncertainties, double threshold) {
    detail::require(threshold >= 0.0 && threshold <= 1.0, "threshold outside [0,1]");
    RejectionSplit s;
    for (std::size_t i = 0; i < uncertainties.size(); ++i) {
        (uncertainties[i] > threshold ? s.rejected : s.kept).push_back(i);
    }
    return s;
}

inline RejectionSplit reject_uncertain(const MCSampleSet& set, double threshold,
                                       UncertaintyMethod method = UncertaintyMethod::jackknife) {
    detail::require(threshold >= 0.0 && threshold <= 1.0, "threshold outside [0,1]");
    std::vector<double> unc(set.n_samples());
    for (std::size_t i = 0; i < unc.size(); ++i) {
        unc[i] = estimate_uncertainty(set, i, method).normalized;
    }
    return reject_uncertain(unc, threshold);
}

/// counts[true][action]; with normalize each nonzero row sums to 1.
inline std::vector<std::vector<double>> confusion_matrix(std::span<const ClassIndex> labels,
                                                         std::span<const ClassIndex> actions,
                                                         std::size_t n_classes, bool normalize) {
    detail::require(labels.size() == actions.size(), "labels and actions length mismatch");
    std::vector<std::vector<double>> cm(n_classes, std::vector<double>(n_classes, 0.0));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        detail::require(labels[i] < n_classes && actions[i] < n_classes, "class index out of range");
        cm[labels[i]][actions[i]] += 1.0;
    }
    if (normalize) {
        for (auto& row : cm) {
            double s = 0.0;
            for (double v : row) s += v;
            if (s > 0.0)
                for (double& v : row) v /= s;
        }
    }
    return cm;
}

/// Full per-sample decision under utility u with optional rejection.
inline std::vector<DecisionOutcome> decide_all(const MCSampleSet& set, const UtilityMatrix& u,
                                               double reject_above, UncertaintyMethod method) {
    detail::require(u.size() == set.n_classes(), "utility matrix dimension does not match class count");
    detail::require(reject_above >= 0.0 && reject_above <= 1.0, "threshold outside [0,1]");
    std::vector<DecisionOutcome> out;
    out.reserve(set.n_samples());
    for (std::size_t i = 0; i < set.n_samples(); ++i) {
        DecisionOutcome d;
        const auto mean = predictive_mean(set, i);
        d.expected_utilities = expected_utility(mean, u);
        d.action = argmax_with_ties(d.expected_utilities);
        d.uncertainty = estimate_uncertainty(set, i, method).normalized;
        d.rejected = d.uncertainty > reject_above;
        out.push_back(std::move(d));
    }
    return out;
}

/// The 4-class chest X-ray utility table: 2.1 on the
/// diagonal, 1.2 off-diagonal for Normal/Covid rows, 1.4 for the pneumonia rows.
inline UtilityMatrix xray_utility() {
    return UtilityMatrix({"Normal", "Bacterial Pneumonia", "Viral Pneumonia", "Covid"},
                         {{2.1, 1.2, 1.2, 1.2},
                          {1.4, 2.1, 1.4, 1.4},
                          {1.4, 1.4, 2.1, 1.4},
                          {1.2, 1.2, 1.2, 2.1}});
}

/// Diagonal 2, off-diagonal 1: the utility counterpart of 0/1 loss.
inline UtilityMatrix zero_one_utility(std::size_t n_classes) {
    std::vector<std::vector<double>> loss(n_classes, std::vector<double>(n_classes, 1.0));
    for (std::size_t c = 0; c < n_classes; ++c) loss[c][c] = 0.0;
    return loss_to_utility(loss);
}

}  // namespace lcbnn
