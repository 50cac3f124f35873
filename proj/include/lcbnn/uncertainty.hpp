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

namespace lcbnn {

enum class UncertaintyMethod { jackknife, plugin };

struct UncertaintyEstimate {
    double entropy_plugin = 0.0;     // nats
    double entropy_jackknife = 0.0;  // nats, unclamped
    double normalized = 0.0;         // in [0,1]
    double confidence = 0.0;         // max of predictive mean
};

/// Average of the T per-pass distributions for one sample.
inline ClassProbabilities predictive_mean(const MCSampleSet& set, std::size_t sample) {
    if (sample >= set.n_samples()) {
        throw ValidationError("sample index " + std::to_string(sample) + " out of range");
    }
    ClassProbabilities mean(set.n_classes(), 0.0);
    for (std::size_t t = 0; t < set.n_passes(); ++t) {
        const auto p = set.pass(sample, t);
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += p[c];
    }
    const double inv_t = 1.0 / static_cast<double>(set.n_passes());
    for (double& m : mean) m *= inv_t;
    return mean;
}

/// -sum p ln p with 0 ln 0 = 0.
inline double plugin_entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
    }
    return h;
}

/// Leave-one-pass-out bias-corrected entropy:
///   H_J = T H(mean) - (T-1)/T * sum_i H(mean without pass i)
/// The raw value may dip slightly below zero.
inline double jackknife_entropy(const MCSampleSet& set, std::size_t sample) {
    const std::size_t T = set.n_passes();
    if (T < 2) throw ValidationError("jackknife requires >= 2 passes");
    const std::size_t C = set.n_classes();

    std::vector<double> total(C, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const auto p = set.pass(sample, t);
        for (std::size_t c = 0; c < C; ++c) total[c] += p[c];
    }
    std::vector<double> buf(C);
    for (std::size_t c = 0; c < C; ++c) buf[c] = total[c] / static_cast<double>(T);
    const double h_full = plugin_entropy(buf);

    double loo_sum = 0.0;
    const double inv = 1.0 / static_cast<double>(T - 1);
    for (std::size_t i = 0; i < T; ++i) {
        const auto p = set.pass(sample, i);
        for (std::size_t c = 0; c < C; ++c) buf[c] = std::max(total[c] - p[c], 0.0) * inv;
        loo_sum += plugin_entropy(buf);
    }
    const double Td = static_cast<double>(T);
    return Td * h_full - (Td - 1.0) * (loo_sum / Td);
}

inline double normalized_uncertainty(double h, std::size_t n_classes) {
    detail::require(n_classes >= 2, "normalized_uncertainty needs >= 2 classes");
    const double h_max = std::log(static_cast<double>(n_classes));
    return std::clamp(h, 0.0, h_max) / h_max;
}

inline double confidence(std::span<const double> p) {
    return *std::max_element(p.begin(), p.end());
}

/// Point prediction: argmax, lowest index on ties.
inline ClassIndex argmax(std::span<const double> p) {
    return static_cast<ClassIndex>(std::max_element(p.begin(), p.end()) - p.begin());
}

/// Full per-sample estimate. With method jackknife and T = 1 the plug-in
/// value is used for normalization.
inline UncertaintyEstimate estimate_uncertainty(const MCSampleSet& set, std::size_t sample,
                                                UncertaintyMethod method) {
    UncertaintyEstimate e;
    const auto mean = predictive_mean(set, sample);
    e.entropy_plugin = plugin_entropy(mean);
    e.entropy_jackknife = set.n_passes() >= 2 ? jackknife_entropy(set, sample) : e.entropy_plugin;
    const double h = method == UncertaintyMethod::jackknife ? e.entropy_jackknife : e.entropy_plugin;
    e.normalized = normalized_uncertainty(h, set.n_classes());
    e.confidence = confidence(mean);
    return e;
}

/// Per-sample summaries used by every downstream metric.
struct SampleSummary {
    std::vector<ClassProbabilities> means;
    std::vector<ClassIndex> predictions;
    std::vector<UncertaintyEstimate> estimates;

    std::vector<double> confidences() const {
        std::vector<double> out;
        out.reserve(estimates.size());
        for (const auto& e : estimates) out.push_back(e.confidence);
        return out;
    }
    std::vector<double> uncertainties() const {
        std::vector<double> out;
        out.reserve(estimates.size());
        for (const auto& e : estimates) out.push_back(e.normalized);
        return out;
    }
};

inline SampleSummary summarize(const MCSampleSet& set, UncertaintyMethod method) {
    SampleSummary s;
    s.means.reserve(set.n_samples());
    for (std::size_t i = 0; i < set.n_samples(); ++i) {
        s.means.push_back(predictive_mean(set, i));
        s.predictions.push_back(argmax(s.means.back()));
        s.estimates.push_back(estimate_uncertainty(set, i, method));
    }
    return s;
}

inline std::vector<bool> correctness(const MCSampleSet& set, std::span<const ClassIndex> predictions) {
    std::vector<bool> out(set.n_samples());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = predictions[i] == set.label(i);
    return out;
}

}  // namespace lcbnn
