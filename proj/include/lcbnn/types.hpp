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
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcbnn/error.hpp"

namespace lcbnn {

using ClassIndex = std::size_t;
using ClassProbabilities = std::vector<double>;

inline constexpr double kSimplexTolerance = 1e-6;

/// Dense N x T x C tensor of per-pass softmax outputs plus one true label
/// per sample. Storage is row-major [sample][pass][class].
class MCSampleSet {
public:
    MCSampleSet() = default;

    /// Validates shape, simplex membership and labels. Every (sample, pass)
    /// row is renormalized to sum to exactly 1 after the tolerance check.
    MCSampleSet(std::size_t n_samples, std::size_t n_passes, std::size_t n_classes,
                std::vector<double> probs, std::vector<ClassIndex> labels)
        : n_samples_(n_samples), n_passes_(n_passes), n_classes_(n_classes),
          probs_(std::move(probs)), labels_(std::move(labels)) {
        detail::require(n_samples_ >= 1, "MCSampleSet needs at least one sample");
        detail::require(n_passes_ >= 1, "MCSampleSet needs at least one pass");
        detail::require(n_classes_ >= 2, "MCSampleSet needs at least two classes");
        detail::require(probs_.size() == n_samples_ * n_passes_ * n_classes_,
                        "MCSampleSet probability buffer has the wrong size");
        detail::require(labels_.size() == n_samples_, "MCSampleSet label count mismatch");
        for (std::size_t i = 0; i < n_samples_; ++i) {
            detail::require(labels_[i] < n_classes_,
                            "label out of range for sample " + std::to_string(i));
            for (std::size_t t = 0; t < n_passes_; ++t) {
                double* row = probs_.data() + offset(i, t);
                double sum = 0.0;
                for (std::size_t c = 0; c < n_classes_; ++c) {
                    detail::require(std::isfinite(row[c]) && row[c] >= -kSimplexTolerance &&
                                        row[c] <= 1.0 + kSimplexTolerance,
                                    "probability outside [0,1] at sample " + std::to_string(i) +
                                        " pass " + std::to_string(t));
                    sum += row[c];
                }
                detail::require(std::abs(sum - 1.0) <= kSimplexTolerance,
                                "off-simplex at sample " + std::to_string(i) + " pass " +
                                    std::to_string(t));
                for (std::size_t c = 0; c < n_classes_; ++c) {
                    row[c] = std::max(row[c], 0.0) / sum;
                }
            }
        }
    }

    std::size_t n_samples() const noexcept { return n_samples_; }
    std::size_t n_passes() const noexcept { return n_passes_; }
    std::size_t n_classes() const noexcept { return n_classes_; }

    double prob(std::size_t sample, std::size_t pass, ClassIndex c) const {
        return probs_[offset(sample, pass) + c];
    }
    std::span<const double> pass(std::size_t sample, std::size_t pass) const {
        return {probs_.data() + offset(sample, pass), n_classes_};
    }
    ClassIndex label(std::size_t sample) const { return labels_.at(sample); }
    const std::vector<ClassIndex>& labels() const noexcept { return labels_; }
    const std::vector<double>& probs() const noexcept { return probs_; }

    friend bool operator==(const MCSampleSet&, const MCSampleSet&) = default;

private:
    std::size_t offset(std::size_t sample, std::size_t pass) const noexcept {
        return (sample * n_passes_ + pass) * n_classes_;
    }

    std::size_t n_samples_ = 0;
    std::size_t n_passes_ = 0;
    std::size_t n_classes_ = 0;
    std::vector<double> probs_;
    std::vector<ClassIndex> labels_;
};

/// Square matrix u[true_class][action] of strictly positive utilities.
class UtilityMatrix {
public:
    UtilityMatrix() = default;

    UtilityMatrix(std::vector<std::string> classes, std::vector<std::vector<double>> values)
        : classes_(std::move(classes)) {
        const std::size_t n = values.size();
        detail::require(n >= 2, "utility matrix needs at least two classes");
        if (classes_.empty()) {
            for (std::size_t i = 0; i < n; ++i) classes_.push_back(std::to_string(i));
        }
        detail::require(classes_.size() == n, "class list / matrix size mismatch");
        values_.reserve(n * n);
        for (const auto& row : values) {
            detail::require(row.size() == n, "utility matrix is not square");
            for (double v : row) {
                detail::require(std::isfinite(v) && v > 0.0, "non-positive utility");
                values_.push_back(v);
            }
        }
    }

    std::size_t size() const noexcept { return classes_.size(); }
    double operator()(ClassIndex true_class, ClassIndex action) const {
        return values_[true_class * size() + action];
    }
    const std::vector<std::string>& classes() const noexcept { return classes_; }

    double max_entry() const {
        double m = values_.front();
        for (double v : values_) m = std::max(m, v);
        return m;
    }

    std::vector<std::vector<double>> rows() const {
        std::vector<std::vector<double>> out(size(), std::vector<double>(size()));
        for (std::size_t y = 0; y < size(); ++y)
            for (std::size_t a = 0; a < size(); ++a) out[y][a] = (*this)(y, a);
        return out;
    }

    friend bool operator==(const UtilityMatrix&, const UtilityMatrix&) = default;

private:
    std::vector<std::string> classes_;
    std::vector<double> values_;
};

/// One bin of a reliability diagram. mean_x is mean confidence or mean
/// normalized uncertainty; empirical_y is accuracy or error rate.
struct DiagramRow {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    double mean_x = 0.0;
    double empirical_y = 0.0;
    double gap = 0.0;
};

struct CalibrationReport {
    double accuracy = 0.0;
    double expected_loss = 0.0;
    double ece = 0.0;
    double mce = 0.0;
    double uce = 0.0;
    double muce = 0.0;
    double sharpness = 0.0;
    std::vector<DiagramRow> bins;              // confidence diagram
    std::vector<DiagramRow> uncertainty_bins;  // uncertainty diagram
};

}  // namespace lcbnn
