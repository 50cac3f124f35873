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

// Training of the dropweights network under three objectives:
//
//   standard  mean NLL + weight_decay * sum w^2
//   weighted  class-weighted NLL + the same penalty
//   lcvi      standard - kappa * mean_i log(sum_y p(y | x_i) u[y][h_i])
//
// The L2 penalty stands in for the KL complexity cost. For lcvi the optimal
// decisions h are recomputed once per epoch from the current network, then
// held fixed for that epoch's gradient steps. Each minibatch draws a single
// dropweight mask shared by all its samples.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lcbnn/decision.hpp"
#include "lcbnn/network.hpp"
#include "lcbnn/types.hpp"
#include "lcbnn/uncertainty.hpp"

namespace lcbnn {

struct Dataset {
    std::size_t dim = 0;
    std::size_t n_classes = 0;
    std::vector<double> features;  // n x dim, row-major
    std::vector<ClassIndex> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SyntheticDataset : Dataset {
    std::array<std::size_t, 4> class_counts{};
};

/// Class sizes of the reference chest X-ray corpus
/// (Normal, Bacterial Pneumonia, Viral Pneumonia, Covid).
inline constexpr std::array<std::size_t, 4> kReferenceClassCounts{1583, 2786, 1504, 68};

struct BlobSpec {
    double mean_x;
    double mean_y;
    double stddev;
};

/// Four isotropic Gaussian blobs. Covid sits between the three larger
/// classes and overlaps all of them.
inline constexpr std::array<BlobSpec, 4> kBlobs{{
    {-2.0, 0.0, 1.0},  // Normal
    {2.0, 0.0, 1.0},   // Bacterial Pneumonia
    {0.0, 2.5, 1.0},   // Viral Pneumonia
    {0.0, 0.9, 0.7},   // Covid
}};

/// Largest-remainder apportionment of total_n to the reference ratios.
inline std::array<std::size_t, 4> proportional_counts(std::size_t total_n) {
    const std::size_t ref_total =
        std::accumulate(kReferenceClassCounts.begin(), kReferenceClassCounts.end(), std::size_t{0});
    std::array<std::size_t, 4> counts{};
    std::array<std::size_t, 4> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 4; ++c) {
        const std::size_t scaled = total_n * kReferenceClassCounts[c];
        counts[c] = scaled / ref_total;
        remainder[c] = scaled % ref_total;
        assigned += counts[c];
    }
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < total_n; ++k, ++assigned) ++counts[order[k]];
    return counts;
}

inline SyntheticDataset make_synthetic(std::size_t total_n, std::uint64_t seed) {
    detail::require(total_n >= 40, "synthetic dataset needs total_n >= 40");
    const auto counts = proportional_counts(total_n);
    detail::require(counts[3] >= 1, "total_n too small to give the rare class a sample");
    SyntheticDataset d;
    d.dim = 2;
    d.n_classes = 4;
    d.class_counts = counts;
    d.features.reserve(2 * total_n);
    d.labels.reserve(total_n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t k = 0; k < counts[c]; ++k) {
            d.features.push_back(kBlobs[c].mean_x + kBlobs[c].stddev * normal(rng));
            d.features.push_back(kBlobs[c].mean_y + kBlobs[c].stddev * normal(rng));
            d.labels.push_back(c);
        }
    }
    return d;
}

enum class TrainMode { standard, weighted, lcvi };

inline const char* to_string(TrainMode m) {
    switch (m) {
        case TrainMode::standard: return "standard";
        case TrainMode::weighted: return "weighted";
        case TrainMode::lcvi: return "lcvi";
    }
    return "?";
}

struct TrainConfig {
    TrainMode mode = TrainMode::standard;
    std::size_t epochs = 150;
    std::size_t batch_size = 32;
    double learning_rate = 1e-2;
    std::size_t mc_train_samples = 5;
    double kappa = 1.0;
    double dropweight_rate = 0.3;
    double weight_decay = 1e-4;
    std::vector<std::size_t> hidden{32, 32};
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(batch_size >= 1, "batch_size must be positive");
        detail::require(mc_train_samples >= 1, "mc_train_samples must be positive");
        detail::require(std::isfinite(learning_rate) && learning_rate > 0.0, "learning_rate must be positive");
        detail::require(std::isfinite(kappa) && kappa >= 0.0, "kappa must be nonnegative");
        detail::require(dropweight_rate >= 0.0 && dropweight_rate < 1.0, "dropweight rate must be in [0,1)");
        detail::require(weight_decay >= 0.0, "weight decay must be nonnegative");
        for (auto h : hidden) detail::require(h >= 1, "hidden widths must be positive");
    }
};

struct TrainedModel {
    NetworkParams params;
    TrainConfig config;
    std::vector<double> epoch_losses;  // mean minibatch loss per epoch
};

struct LossAndGradient {
    double loss = 0.0;
    Gradients grad;
};

/// Per-sample terms of a minibatch objective beyond plain NLL.
struct ObjectiveTerms {
    std::span<const double> class_weights;  // empty: all 1
    const UtilityMatrix* utility = nullptr;
    std::span<const ClassIndex> actions;    // indexed by dataset sample
    double kappa = 0.0;
};

namespace detail {

inline LossAndGradient evaluate_batch(const NetworkParams& p, const Dataset& data,
                                      std::span<const std::size_t> batch, const DropMask& mask,
                                      const ObjectiveTerms& terms, bool want_grad) {
    require(!batch.empty(), "empty batch");
    require(p.n_classes() == data.n_classes && p.input_dim() == data.dim,
            "network shape does not match dataset");
    const bool use_utility = terms.utility != nullptr && terms.kappa > 0.0;
    if (use_utility) {
        require(terms.utility->size() == data.n_classes, "utility dimension mismatch");
        require(terms.actions.size() == data.size(), "one action per dataset sample required");
    }
    LossAndGradient out;
    if (want_grad) out.grad = zero_gradients(p);
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const std::size_t C = data.n_classes;
    std::vector<double> dz(C);

    for (std::size_t idx : batch) {
        const auto tr = forward_trace(p, data.row(idx), mask);
        const auto& prob = tr.probs();
        const ClassIndex y = data.labels[idx];
        const double w = terms.class_weights.empty() ? 1.0 : terms.class_weights[y];

        out.loss += w * -std::log(std::max(prob[y], 1e-300)) * inv_b;
        for (std::size_t c = 0; c < C; ++c) dz[c] = w * (prob[c] - (c == y ? 1.0 : 0.0)) * inv_b;

        if (use_utility) {
            // E = sum_y p_y v_y with v_y = u[y][h], written as v_0 + sum p_y (v_y - v_0)
            // so a constant column contributes exactly zero gradient.
            const ClassIndex h = terms.actions[idx];
            const auto& u = *terms.utility;
            const double v0 = u(0, h);
            double shift = 0.0;
            for (std::size_t c = 0; c < C; ++c) shift += prob[c] * (u(c, h) - v0);
            const double e = v0 + shift;
            out.loss -= terms.kappa * std::log(e) * inv_b;
            for (std::size_t c = 0; c < C; ++c) {
                dz[c] -= terms.kappa * prob[c] * ((u(c, h) - v0) - shift) / e * inv_b;
            }
        }
        if (want_grad) backward_accumulate(p, tr, mask, dz, out.grad);
    }
    out.loss += l2_penalty(p);
    if (want_grad) add_l2_gradient(p, out.grad);
    return out;
}

}  // namespace detail

/// Mean NLL under the batch's dropweight mask plus the L2 complexity term.
inline double elbo_loss(const NetworkParams& p, const Dataset& data, std::span<const std::size_t> batch,
                        std::uint64_t mask_seed) {
    return detail::evaluate_batch(p, data, batch, make_mask(p, mask_seed), {}, false).loss;
}

inline LossAndGradient elbo_loss_grad(const NetworkParams& p, const Dataset& data,
                                      std::span<const std::size_t> batch, const DropMask& mask) {
    return detail::evaluate_batch(p, data, batch, mask, {}, true);
}

/// elbo_loss - kappa * mean_i log(sum_y p_y u[y][h_i]); minimizing it
/// maximizes the loss-calibrated lower bound.
inline double lcvi_loss(const NetworkParams& p, const Dataset& data, std::span<const std::size_t> batch,
                        std::span<const ClassIndex> actions, const UtilityMatrix& u, double kappa,
                        std::uint64_t mask_seed) {
    detail::require(kappa >= 0.0, "kappa must be nonnegative");
    const ObjectiveTerms t{{}, &u, actions, kappa};
    return detail::evaluate_batch(p, data, batch, make_mask(p, mask_seed), t, false).loss;
}

inline LossAndGradient lcvi_loss_grad(const NetworkParams& p, const Dataset& data,
                                      std::span<const std::size_t> batch,
                                      std::span<const ClassIndex> actions, const UtilityMatrix& u,
                                      double kappa, const DropMask& mask) {
    detail::require(kappa >= 0.0, "kappa must be nonnegative");
    const ObjectiveTerms t{{}, &u, actions, kappa};
    return detail::evaluate_batch(p, data, batch, mask, t, true);
}

/// Weighted cross-entropy baseline weights:
///   w_c = (u[c][c] / mean_k u[k][k]) * n / (C * n_c)
/// Absent classes get weight 0.
inline std::vector<double> weighted_class_weights(const Dataset& data, const UtilityMatrix& u) {
    detail::require(u.size() == data.n_classes, "utility dimension mismatch");
    const std::size_t C = data.n_classes;
    std::vector<double> counts(C, 0.0);
    for (auto y : data.labels) counts[y] += 1.0;
    double diag_mean = 0.0;
    for (std::size_t c = 0; c < C; ++c) diag_mean += u(c, c);
    diag_mean /= static_cast<double>(C);
    std::vector<double> w(C, 0.0);
    const double n = static_cast<double>(data.size());
    for (std::size_t c = 0; c < C; ++c) {
        if (counts[c] > 0.0) w[c] = (u(c, c) / diag_mean) * n / (static_cast<double>(C) * counts[c]);
    }
    return w;
}

/// Predictive mean over `passes` masks seeded from (seed, sample, pass).
inline ClassProbabilities mc_predictive_mean(const NetworkParams& p, std::span<const double> x,
                                             std::size_t passes, std::uint64_t seed,
                                             std::size_t sample) {
    ClassProbabilities mean(p.n_classes(), 0.0);
    for (std::size_t t = 0; t < passes; ++t) {
        const auto prob = forward(p, x, derive_seed(seed, sample, t));
        for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += prob[c];
    }
    for (double& m : mean) m /= static_cast<double>(passes);
    return mean;
}

/// Optimal decisions under the current approximate posterior.
inline std::vector<ClassIndex> h_step(const NetworkParams& p, const Dataset& data, const UtilityMatrix& u,
                                      std::size_t mc_samples, std::uint64_t seed) {
    detail::require(mc_samples >= 1, "h_step needs at least one MC sample");
    detail::require(u.size() == data.n_classes, "utility dimension mismatch");
    std::vector<ClassIndex> h(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        h[i] = bayes_action(mc_predictive_mean(p, data.row(i), mc_samples, seed, i), u);
    }
    return h;
}

inline NetworkParams initial_params(const Dataset& data, const TrainConfig& config) {
    std::vector<std::size_t> sizes{data.dim};
    sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
    sizes.push_back(data.n_classes);
    return init_network(sizes, config.dropweight_rate, config.weight_decay, derive_seed(config.seed, 1));
}

/// Minibatch gradient descent. Deterministic under config.seed; the lcvi
/// decision step draws its masks from an independent seed stream so that
/// kappa = 0 reproduces standard training exactly.
inline TrainedModel train(const Dataset& data, const UtilityMatrix* u, const TrainConfig& config) {
    config.validate();
    detail::require(data.size() >= 1, "cannot train on an empty dataset");
    if (config.mode != TrainMode::standard) {
        detail::require(u != nullptr, "weighted and lcvi modes need a utility matrix");
        detail::require(u->size() == data.n_classes, "utility dimension mismatch");
    }
    TrainedModel model{initial_params(data, config), config, {}};
    auto& p = model.params;

    std::vector<double> class_weights;
    if (config.mode == TrainMode::weighted) class_weights = weighted_class_weights(data, *u);

    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, 2));
    std::vector<ClassIndex> actions;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.mode == TrainMode::lcvi) {
            actions = h_step(p, data, *u, config.mc_train_samples, derive_seed(config.seed, 3, epoch));
        }
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        ObjectiveTerms terms;
        terms.class_weights = class_weights;
        if (config.mode == TrainMode::lcvi) {
            terms.utility = u;
            terms.actions = actions;
            terms.kappa = config.kappa;
        }

        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            const std::span<const std::size_t> batch(order.data() + start, stop - start);
            const auto mask = make_mask(p, derive_seed(config.seed, 4, epoch, n_batches));
            const auto lg = detail::evaluate_batch(p, data, batch, mask, terms, true);
            if (!std::isfinite(lg.loss)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                      std::to_string(n_batches));
            }
            gradient_step(p, lg.grad, config.learning_rate);
            epoch_loss += lg.loss;
            ++n_batches;
        }
        model.epoch_losses.push_back(epoch_loss / static_cast<double>(n_batches));
    }
    return model;
}

/// t masked forward passes per sample, mask seeds derived from (seed, sample, pass).
inline MCSampleSet mc_predict(const TrainedModel& model, const Dataset& data, std::size_t t,
                              std::uint64_t seed) {
    detail::require(t >= 1, "mc_predict needs at least one pass");
    const std::size_t C = model.params.n_classes();
    std::vector<double> probs;
    probs.reserve(data.size() * t * C);
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t pass = 0; pass < t; ++pass) {
            const auto prob = forward(model.params, data.row(i), derive_seed(seed, i, pass));
            probs.insert(probs.end(), prob.begin(), prob.end());
        }
    }
    return MCSampleSet(data.size(), t, C, std::move(probs), data.labels);
}

}  // namespace lcbnn
