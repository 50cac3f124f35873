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

// Test-only reference implementations. None of these call into the library
// code paths they are used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

/// Loop-per-bin binned calibration statistics. For each bin, scan every
/// sample and test membership directly against the bin edges.
struct BinnedStats {
    double weighted = 0.0;
    double maximum = 0.0;
    double variance = 0.0;
};

inline BinnedStats binned(const std::vector<double>& x, const std::vector<bool>& y, std::size_t m) {
    BinnedStats s;
    std::vector<double> gaps;
    const double n = static_cast<double>(x.size());
    for (std::size_t b = 0; b < m; ++b) {
        const double lo = static_cast<double>(b) / static_cast<double>(m);
        const double hi = static_cast<double>(b + 1) / static_cast<double>(m);
        std::size_t count = 0;
        double sum_x = 0.0;
        double sum_y = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const bool last = b + 1 == m;
            const bool in = x[i] >= lo && (last ? x[i] <= 1.0 : x[i] < hi);
            if (!in) continue;
            ++count;
            sum_x += x[i];
            sum_y += y[i] ? 1.0 : 0.0;
        }
        if (count == 0) continue;
        const double gap = std::abs(sum_y / count - sum_x / count);
        s.weighted += (count / n) * gap;
        s.maximum = std::max(s.maximum, gap);
        gaps.push_back(gap);
    }
    double mean = 0.0;
    for (double g : gaps) mean += g / gaps.size();
    for (double g : gaps) s.variance += (g - mean) * (g - mean) / gaps.size();
    return s;
}

/// Exact W1 between uniform empirical measures by solving the transport LP
/// as an integral min-cost flow: a_i supplies |b| units, b_j demands |a|
/// units, arc cost |a_i - b_j|. Successive shortest paths with Bellman-Ford.
inline double transport_lp(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t na = a.size(), nb = b.size();
    // nodes: 0 source, 1..na sources, na+1..na+nb sinks, na+nb+1 target
    const std::size_t N = na + nb + 2, S = 0, T = na + nb + 1;
    struct Arc {
        std::size_t to;
        long cap;
        double cost;
        std::size_t rev;
    };
    std::vector<std::vector<Arc>> g(N);
    auto add = [&](std::size_t u, std::size_t v, long cap, double cost) {
        g[u].push_back({v, cap, cost, g[v].size()});
        g[v].push_back({u, 0, -cost, g[u].size() - 1});
    };
    for (std::size_t i = 0; i < na; ++i) add(S, 1 + i, static_cast<long>(nb), 0.0);
    for (std::size_t j = 0; j < nb; ++j) add(1 + na + j, T, static_cast<long>(na), 0.0);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j)
            add(1 + i, 1 + na + j, static_cast<long>(na * nb), std::abs(a[i] - b[j]));

    long remaining = static_cast<long>(na * nb);
    double total = 0.0;
    const double inf = std::numeric_limits<double>::infinity();
    while (remaining > 0) {
        std::vector<double> dist(N, inf);
        std::vector<std::size_t> prev_node(N), prev_arc(N);
        dist[S] = 0.0;
        for (std::size_t iter = 0; iter + 1 < N; ++iter) {
            bool changed = false;
            for (std::size_t u = 0; u < N; ++u) {
                if (dist[u] == inf) continue;
                for (std::size_t k = 0; k < g[u].size(); ++k) {
                    const auto& e = g[u][k];
                    if (e.cap > 0 && dist[u] + e.cost < dist[e.to] - 1e-15) {
                        dist[e.to] = dist[u] + e.cost;
                        prev_node[e.to] = u;
                        prev_arc[e.to] = k;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        long push = remaining;
        for (std::size_t v = T; v != S; v = prev_node[v]) push = std::min(push, g[prev_node[v]][prev_arc[v]].cap);
        for (std::size_t v = T; v != S; v = prev_node[v]) {
            auto& e = g[prev_node[v]][prev_arc[v]];
            e.cap -= push;
            g[v][e.rev].cap += push;
            total += static_cast<double>(push) * e.cost;
        }
        remaining -= push;
    }
    return total / static_cast<double>(na * nb);
}

/// Central finite differences of f over a flat parameter vector.
inline std::vector<double> central_differences(std::vector<double> theta,
                                               const std::function<double(const std::vector<double>&)>& f,
                                               double step) {
    std::vector<double> grad(theta.size());
    for (std::size_t k = 0; k < theta.size(); ++k) {
        const double orig = theta[k];
        theta[k] = orig + step;
        const double up = f(theta);
        theta[k] = orig - step;
        const double down = f(theta);
        theta[k] = orig;
        grad[k] = (up - down) / (2.0 * step);
    }
    return grad;
}

inline double entropy(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

/// Dirichlet(alpha, ..., alpha) via normalized gammas.
inline std::vector<double> dirichlet(std::size_t k, double alpha, std::mt19937_64& rng) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> p(k);
    double s = 0.0;
    for (double& v : p) {
        v = gamma(rng);
        s += v;
    }
    for (double& v : p) v /= s;
    return p;
}

}  // namespace oracle
