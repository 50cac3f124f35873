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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>

#include "lcbnn/lcbnn.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace lcbnn;

namespace {

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %2d %-32s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct MetricInput {
    std::vector<double> x;
    std::vector<bool> y;
    std::size_t m;
};

std::vector<MetricInput> metric_inputs(std::size_t count, std::uint64_t seed) {
    static constexpr std::size_t kBins[] = {1, 5, 10, 15};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<MetricInput> out;
    for (std::size_t k = 0; k < count; ++k) {
        MetricInput in;
        in.m = kBins[k % 4];
        const std::size_t n = 1 + rng() % 200;
        for (std::size_t i = 0; i < n; ++i) {
            in.x.push_back(rng() % 10 == 0 ? static_cast<double>(rng() % (in.m + 1)) / in.m : unit(rng));
            in.y.push_back(unit(rng) < in.x.back());
        }
        out.push_back(std::move(in));
    }
    return out;
}

void metric_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& in : metric_inputs(500, 1001)) {
        const auto o = oracle::binned(in.x, in.y, in.m);
        worst = std::max({worst, std::abs(ece(in.x, in.y, in.m) - o.weighted),
                          std::abs(mce(in.x, in.y, in.m) - o.maximum), std::abs(uce(in.x, in.y, in.m) - o.weighted),
                          std::abs(muce(in.x, in.y, in.m) - o.maximum)});
    }
    const double secs = seconds_since(t0);
    report(1, "metric oracle equivalence", worst <= 1e-12 && secs < 10.0,
           fmt("max abs diff %.3g, %.2f s", worst, secs));
}

void weighted_identity_and_dominance() {
    std::size_t identity_bad = 0, dominance_bad = 0, total = 0;
    for (const auto& in : metric_inputs(2000, 2002)) {
        ++total;
        for (auto mode : {DiagramMode::confidence, DiagramMode::uncertainty}) {
            const auto rows = reliability_data(in.x, in.y, in.m, mode);
            double sum = 0.0;
            for (const auto& r : rows) {
                if (r.count > 0) sum += static_cast<double>(r.count) / static_cast<double>(in.x.size()) * r.gap;
            }
            const double metric = mode == DiagramMode::confidence ? ece(in.x, in.y, in.m) : uce(in.x, in.y, in.m);
            if (metric != sum) ++identity_bad;
        }
        if (!(mce(in.x, in.y, in.m) >= ece(in.x, in.y, in.m))) ++dominance_bad;
        if (!(muce(in.x, in.y, in.m) >= uce(in.x, in.y, in.m))) ++dominance_bad;
    }
    report(2, "weighted identity", identity_bad == 0,
           fmt("%.0f inputs, %.0f mismatches", static_cast<double>(total), static_cast<double>(identity_bad)));
    report(3, "dominance", dominance_bad == 0,
           fmt("%.0f inputs, %.0f violations", static_cast<double>(total), static_cast<double>(dominance_bad)));
}

void perfect_calibration() {
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> conf(50000);
    std::vector<bool> correct(conf.size());
    for (std::size_t i = 0; i < conf.size(); ++i) {
        conf[i] = unit(rng);
        correct[i] = unit(rng) < conf[i];
    }
    const double e = ece(conf, correct, 10);
    report(4, "perfect calibration ECE", e <= 0.01, fmt("ECE %.5f (limit 0.01)", e));
}

void wasserstein_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(5005);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto sample = [&](std::size_t max_n) {
        std::vector<double> v(1 + rng() % max_n);
        for (double& x : v) x = rng() % 4 == 0 ? std::round(2.0 * normal(rng)) / 2.0 : normal(rng);
        return v;
    };
    double lp_worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
        const auto a = sample(8), b = sample(8);
        lp_worst = std::max(lp_worst, std::abs(wasserstein1(a, b) - oracle::transport_lp(a, b)));
    }
    double sym = 0.0, trans = 0.0, tri = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto a = sample(60), b = sample(60), c = sample(60);
        const double ab = wasserstein1(a, b);
        sym = std::max(sym, std::abs(ab - wasserstein1(b, a)));
        tri = std::max(tri, wasserstein1(a, c) - ab - wasserstein1(b, c));
        const double s = 3.0 * normal(rng);
        auto as = a, bs = b;
        for (double& v : as) v += s;
        for (double& v : bs) v += s;
        trans = std::max(trans, std::abs(wasserstein1(as, bs) - ab));
    }
    const double secs = seconds_since(t0);
    const bool ok = lp_worst <= 1e-9 && sym <= 1e-12 && trans <= 1e-12 && tri <= 1e-12 && secs < 30.0;
    report(5, "wasserstein oracle + metric", ok,
           fmt("LP diff %.3g, sym %.3g, trans %.3g, tri excess %.3g", lp_worst, sym, trans, tri) +
               fmt(", %.2f s", secs));
}

void jackknife_bias() {
    std::mt19937_64 rng(6006);
    double jk = 0.0, plug = 0.0;
    constexpr int kTrials = 1000;
    constexpr std::size_t C = 4, T = 25;
    for (int trial = 0; trial < kTrials; ++trial) {
        const auto p = oracle::dirichlet(C, 1.0, rng);
        std::discrete_distribution<std::size_t> cat(p.begin(), p.end());
        std::vector<double> flat(T * C, 0.0);
        for (std::size_t t = 0; t < T; ++t) flat[t * C + cat(rng)] = 1.0;
        const MCSampleSet set(1, T, C, flat, {0});
        const double h = oracle::entropy(p);
        jk += std::abs(jackknife_entropy(set, 0) - h) / kTrials;
        plug += std::abs(plugin_entropy(predictive_mean(set, 0)) - h) / kTrials;
    }
    report(6, "jackknife bias reduction", jk < plug, fmt("mean |err| jackknife %.4f vs plug-in %.4f", jk, plug));
}

void gradient_check() {
    std::mt19937_64 rng(7007);
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset d{2, 4, {}, {}};
    for (std::size_t i = 0; i < 16; ++i) {
        d.features.push_back(normal(rng));
        d.features.push_back(normal(rng));
        d.labels.push_back(i % 4);
    }
    std::vector<std::size_t> batch(d.size());
    std::iota(batch.begin(), batch.end(), std::size_t{0});
    std::vector<ClassIndex> h(d.size());
    for (auto& a : h) a = rng() % 4;
    const std::vector<std::size_t> sizes{2, 4, 4};
    const auto p = init_network(sizes, 0.3, 1e-3, 77);
    const std::uint64_t mask_seed = 5;
    const auto mask = make_mask(p, mask_seed);
    const auto u = xray_utility();
    const auto theta = testutil::flatten(p.layers);

    const auto elbo_fd = oracle::central_differences(
        theta, [&](const std::vector<double>& t) { return elbo_loss(testutil::unflatten(t, p), d, batch, mask_seed); },
        1e-4);
    const auto lcvi_fd = oracle::central_differences(
        theta,
        [&](const std::vector<double>& t) {
            return lcvi_loss(testutil::unflatten(t, p), d, batch, h, u, 1.0, mask_seed);
        },
        1e-4);
    const double e1 = testutil::max_relative_error(testutil::flatten(elbo_loss_grad(p, d, batch, mask).grad), elbo_fd);
    const double e2 =
        testutil::max_relative_error(testutil::flatten(lcvi_loss_grad(p, d, batch, h, u, 1.0, mask).grad), lcvi_fd);
    report(7, "gradient check (2-4-4)", e1 <= 1e-3 && e2 <= 1e-3,
           fmt("max rel err elbo %.3g, lcvi %.3g", e1, e2));
}

void zero_kappa_reduction() {
    const auto data = make_synthetic(600, 42);
    const auto u = xray_utility();
    TrainConfig cfg;
    cfg.seed = 42;
    cfg.epochs = 20;
    cfg.mode = TrainMode::standard;
    const auto standard = train(data, &u, cfg);
    cfg.mode = TrainMode::lcvi;
    cfg.kappa = 0.0;
    const auto lcvi = train(data, &u, cfg);
    const bool same = standard.params == lcvi.params && standard.epoch_losses == lcvi.epoch_losses;
    report(8, "kappa=0 reduction", same, same ? "parameters and losses bit-identical" : "trajectories differ");
}

struct DemoRun {
    MCSampleSet set;
    Analysis analysis;
    double fnr = 0.0;
    double utility = 0.0;
};

DemoRun run_demo(const SyntheticDataset& data, const UtilityMatrix& u, TrainMode mode, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.seed = seed;
    const auto model = train(data, &u, cfg);
    auto set = mc_predict(model, data, 25, derive_seed(seed, 99));
    auto a = analyze(set, u, kDefaultBins, UncertaintyMethod::jackknife);
    const double fnr = rare_class_false_negative_rate(set.labels(), a.actions, 4, 3);
    const double mu = mean_utility(set.labels(), a.actions, u);
    return {std::move(set), std::move(a), fnr, mu};
}

void demo_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    constexpr std::uint64_t seed = 42;
    const auto data = make_synthetic(600, seed);
    const auto u = xray_utility();
    const auto standard = run_demo(data, u, TrainMode::standard, seed);
    const auto lcvi = run_demo(data, u, TrainMode::lcvi, seed);
    const double secs = seconds_since(t0);

    const bool a = lcvi.fnr <= standard.fnr;
    const bool b = lcvi.utility >= standard.utility;
    const bool c = lcvi.analysis.report.uce <= standard.analysis.report.uce;
    report(9, "lcvi vs standard direction", a && b && c && secs < 300.0,
           fmt("rare FNR %.3f<=%.3f, utility %.4f>=%.4f", lcvi.fnr, standard.fnr, lcvi.utility, standard.utility) +
               fmt(", UCE %.4f<=%.4f, %.1f s", lcvi.analysis.report.uce, standard.analysis.report.uce, secs));

    const auto& s = lcvi.analysis;
    const auto unc = s.summary.uncertainties();
    auto kept_accuracy = [&](double threshold) {
        const auto split = reject_uncertain(unc, threshold);
        std::size_t ok = 0;
        for (auto i : split.kept) ok += s.correct[i] ? 1 : 0;
        return split.kept.empty() ? 0.0 : static_cast<double>(ok) / static_cast<double>(split.kept.size());
    };
    const double at_half = kept_accuracy(0.5), at_one = kept_accuracy(1.0);
    report(10, "rejection raises kept accuracy", !reject_uncertain(unc, 0.5).kept.empty() && at_half >= at_one,
           fmt("kept accuracy %.4f at 0.5 vs %.4f at 1.0", at_half, at_one));

    const auto gap = error_uncertainty_gap(unc, s.errors);
    report(11, "error-uncertainty association", gap.spearman > 0.0 && gap.w1 > 0.0,
           fmt("spearman %.4f, w1 %.4f", gap.spearman, gap.w1));
}

}  // namespace

int main() {
    const std::vector<std::function<void()>> checks{metric_oracle,  weighted_identity_and_dominance,
                                                   perfect_calibration, wasserstein_checks,
                                                   jackknife_bias, gradient_check,
                                                   zero_kappa_reduction, demo_checks};
    for (const auto& check : checks) {
        try {
            check();
        } catch (const std::exception& e) {
            std::printf("[FAIL] check aborted: %s\n", e.what());
            ++failures;
        }
    }
    std::printf("%s: %d failure(s)\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
    return failures == 0 ? 0 : 1;
}
