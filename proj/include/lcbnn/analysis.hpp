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

#include <vector>

#include "lcbnn/calibration.hpp"
#include "lcbnn/decision.hpp"
#include "lcbnn/types.hpp"
#include "lcbnn/uncertainty.hpp"

namespace lcbnn {

/// Everything derived from one MCSampleSet under one utility.
struct Analysis {
    SampleSummary summary;
    std::vector<bool> correct;       // argmax prediction == label
    std::vector<bool> errors;        // complement of correct
    std::vector<ClassIndex> actions; // Bayes actions under the utility
    CalibrationReport report;
};

inline Analysis analyze(const MCSampleSet& set, const UtilityMatrix& u, std::size_t bins,
                        UncertaintyMethod method) {
    detail::require(u.size() == set.n_classes(), "utility matrix dimension does not match class count");
    Analysis a;
    a.summary = summarize(set, method);
    a.correct = correctness(set, a.summary.predictions);
    a.errors.resize(a.correct.size());
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < a.correct.size(); ++i) {
        a.errors[i] = !a.correct[i];
        n_correct += a.correct[i] ? 1 : 0;
    }
    for (const auto& m : a.summary.means) a.actions.push_back(bayes_action(m, u));

    const auto conf = a.summary.confidences();
    const auto unc = a.summary.uncertainties();
    auto& r = a.report;
    r.accuracy = static_cast<double>(n_correct) / static_cast<double>(set.n_samples());
    r.expected_loss = expected_loss(set, u, a.actions);
    r.ece = ece(conf, a.correct, bins);
    r.mce = mce(conf, a.correct, bins);
    r.uce = uce(unc, a.errors, bins);
    r.muce = muce(unc, a.errors, bins);
    r.sharpness = sharpness(unc, a.errors, bins);
    r.bins = reliability_data(conf, a.correct, bins, DiagramMode::confidence);
    r.uncertainty_bins = reliability_data(unc, a.errors, bins, DiagramMode::uncertainty);
    return a;
}

inline double rare_class_false_negative_rate(std::span<const ClassIndex> labels,
                                             std::span<const ClassIndex> actions, std::size_t n_classes,
                                             ClassIndex rare) {
    const auto cm = confusion_matrix(labels, actions, n_classes, true);
    double row = 0.0;
    for (double v : cm[rare]) row += v;
    detail::require(row > 0.0, "rare class has no samples");
    return 1.0 - cm[rare][rare];
}

}  // namespace lcbnn
