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

// Dense tanh network with a softmax head and dropweights: every individual
// weight (not bias) is zeroed with probability `rate` and survivors are
// scaled by 1 / (1 - rate). The mask is a pure function of a 64-bit seed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "lcbnn/types.hpp"

namespace lcbnn {

/// SplitMix64. Used for seed derivation and mask bits so that masks are
/// identical across standard library implementations.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    SplitMix64 g(seed ^ 0x6A09E667F3BCC909ULL);
    std::uint64_t h = g.next();
    for (std::uint64_t v : {a, b, c}) {
        SplitMix64 step(h ^ (v + 0x9E3779B97F4A7C15ULL));
        h = step.next();
    }
    return h;
}

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<double> w;  // out x in, row-major
    std::vector<double> b;  // out

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NetworkParams {
    std::vector<DenseLayer> layers;
    double dropweight_rate = 0.0;
    double weight_decay = 0.0;

    std::size_t input_dim() const { return layers.front().in; }
    std::size_t n_classes() const { return layers.back().out; }
    std::size_t n_weights() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.w.size();
        return n;
    }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Same shape as the parameters, holds d(loss)/d(param).
using Gradients = std::vector<DenseLayer>;

inline Gradients zero_gradients(const NetworkParams& p) {
    Gradients g = p.layers;
    for (auto& l : g) {
        std::fill(l.w.begin(), l.w.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return g;
}

/// Glorot-uniform weights, zero biases. sizes = {input, hidden..., classes}.
inline NetworkParams init_network(std::span<const std::size_t> sizes, double dropweight_rate,
                                  double weight_decay, std::uint64_t seed) {
    detail::require(sizes.size() >= 2, "network needs at least input and output sizes");
    detail::require(dropweight_rate >= 0.0 && dropweight_rate < 1.0, "dropweight rate must be in [0,1)");
    detail::require(weight_decay >= 0.0, "weight decay must be nonnegative");
    NetworkParams p;
    p.dropweight_rate = dropweight_rate;
    p.weight_decay = weight_decay;
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        DenseLayer l{sizes[k], sizes[k + 1], std::vector<double>(sizes[k] * sizes[k + 1]),
                     std::vector<double>(sizes[k + 1], 0.0)};
        const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (double& v : l.w) v = dist(rng);
        p.layers.push_back(std::move(l));
    }
    return p;
}

/// Per-weight multiplier: 0 for dropped weights, 1 / (1 - rate) otherwise.
struct DropMask {
    std::vector<std::vector<double>> scale;
};

inline DropMask make_mask(const NetworkParams& p, std::uint64_t mask_seed) {
    DropMask m;
    m.scale.reserve(p.layers.size());
    const double rate = p.dropweight_rate;
    if (rate == 0.0) {
        for (const auto& l : p.layers) m.scale.emplace_back(l.w.size(), 1.0);
        return m;
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    SplitMix64 g(mask_seed);
    for (const auto& l : p.layers) {
        auto& s = m.scale.emplace_back(l.w.size());
        for (double& v : s) v = g.uniform() < rate ? 0.0 : keep_scale;
    }
    return m;
}

namespace detail {

inline void softmax_inplace(std::vector<double>& z) {
    double top = z.front();
    for (double v : z) top = std::max(top, v);
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - top);
        s += v;
    }
    for (double& v : z) v /= s;
}

}  // namespace detail

/// Activations of every layer for one input. acts[0] is the input; the last
/// entry is the softmax output.
struct ForwardTrace {
    std::vector<std::vector<double>> acts;
    const std::vector<double>& probs() const { return acts.back(); }
};

inline ForwardTrace forward_trace(const NetworkParams& p, std::span<const double> x,
                                  const DropMask& mask) {
    detail::require(x.size() == p.input_dim(), "input dimension mismatch");
    for (double v : x) detail::require(std::isfinite(v), "non-finite input");
    ForwardTrace tr;
    tr.acts.reserve(p.layers.size() + 1);
    tr.acts.emplace_back(x.begin(), x.end());
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        const auto& l = p.layers[k];
        const auto& s = mask.scale[k];
        const auto& a = tr.acts.back();
        std::vector<double> z(l.b);
        for (std::size_t o = 0; o < l.out; ++o) {
            const std::size_t row = o * l.in;
            double acc = 0.0;
            for (std::size_t i = 0; i < l.in; ++i) acc += l.w[row + i] * s[row + i] * a[i];
            z[o] += acc;
        }
        if (k + 1 == p.layers.size()) {
            detail::softmax_inplace(z);
        } else {
            for (double& v : z) v = std::tanh(v);
        }
        tr.acts.push_back(std::move(z));
    }
    return tr;
}

inline ClassProbabilities forward(const NetworkParams& p, std::span<const double> x,
                                  const DropMask& mask) {
    return std::move(forward_trace(p, x, mask).acts.back());
}

inline ClassProbabilities forward(const NetworkParams& p, std::span<const double> x,
                                  std::uint64_t mask_seed) {
    return forward(p, x, make_mask(p, mask_seed));
}

/// Accumulates d(loss)/d(params) given d(loss)/d(logits) for one input.
inline void backward_accumulate(const NetworkParams& p, const ForwardTrace& tr, const DropMask& mask,
                                std::vector<double> dz, Gradients& g) {
    for (std::size_t k = p.layers.size(); k-- > 0;) {
        const auto& l = p.layers[k];
        const auto& s = mask.scale[k];
        const auto& a_in = tr.acts[k];
        auto& gl = g[k];
        std::vector<double> da(k > 0 ? l.in : 0, 0.0);
        for (std::size_t o = 0; o < l.out; ++o) {
            const std::size_t row = o * l.in;
            gl.b[o] += dz[o];
            for (std::size_t i = 0; i < l.in; ++i) {
                gl.w[row + i] += dz[o] * a_in[i] * s[row + i];
                if (k > 0) da[i] += l.w[row + i] * s[row + i] * dz[o];
            }
        }
        if (k > 0) {
            for (std::size_t i = 0; i < l.in; ++i) da[i] *= 1.0 - a_in[i] * a_in[i];
            dz = std::move(da);
        }
    }
}

inline double l2_penalty(const NetworkParams& p) {
    double s = 0.0;
    for (const auto& l : p.layers)
        for (double v : l.w) s += v * v;
    return p.weight_decay * s;
}

inline void add_l2_gradient(const NetworkParams& p, Gradients& g) {
    if (p.weight_decay == 0.0) return;
    for (std::size_t k = 0; k < p.layers.size(); ++k)
        for (std::size_t i = 0; i < p.layers[k].w.size(); ++i)
            g[k].w[i] += 2.0 * p.weight_decay * p.layers[k].w[i];
}

inline void gradient_step(NetworkParams& p, const Gradients& g, double learning_rate) {
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        for (std::size_t i = 0; i < p.layers[k].w.size(); ++i)
            p.layers[k].w[i] -= learning_rate * g[k].w[i];
        for (std::size_t i = 0; i < p.layers[k].b.size(); ++i)
            p.layers[k].b[i] -= learning_rate * g[k].b[i];
    }
}

}  // namespace lcbnn
