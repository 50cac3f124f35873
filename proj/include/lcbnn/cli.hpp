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

// Command-line front end. Subcommands:
//   metrics     calibration report JSON
//   decide      JSON-lines Bayes decisions with optional rejection
//   train-demo  train on synthetic data, write an MC predictions CSV
//   wasserstein W1 between two single-column CSVs
//   report      metrics + diagrams + decisions into one directory
//
// Exit codes: 0 success, 1 validation error, 2 I/O error. Every output file
// gets a run manifest JSON (flags, seed, input SHA-256, version) and no
// timestamps, so identical invocations give byte-identical outputs.

#pragma once

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcbnn/analysis.hpp"
#include "lcbnn/decision.hpp"
#include "lcbnn/diagram.hpp"
#include "lcbnn/tensor_io.hpp"
#include "lcbnn/trainer.hpp"
#include "lcbnn/transport.hpp"

namespace lcbnn::cli {

inline constexpr const char* kVersion = "lcbnn 0.1.0";

inline std::string sha256_file(const std::string& path) {
    auto in = detail::open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw IoError("sha256 failed for '" + path + "'");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

struct RunManifest {
    std::string subcommand;
    std::map<std::string, std::string> flags;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["tool_version"] = kVersion;
        j["subcommand"] = subcommand;
        j["flags"] = flags;
        j["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
        auto arr = nlohmann::ordered_json::array();
        for (const auto& p : inputs) arr.push_back({{"path", p}, {"sha256", sha256_file(p)}});
        j["inputs"] = arr;
        for (const auto& [k, v] : extra.items()) j[k] = v;
        return j.dump(2) + "\n";
    }

    void write(const std::string& path) const { write_text(to_json(), path); }
};

namespace detail {

using lcbnn::detail::format_fixed6;

inline UncertaintyMethod parse_method(const std::string& s) {
    return s == "plugin" ? UncertaintyMethod::plugin : UncertaintyMethod::jackknife;
}

inline TrainMode parse_mode(const std::string& s) {
    if (s == "weighted") return TrainMode::weighted;
    if (s == "lcvi") return TrainMode::lcvi;
    return TrainMode::standard;
}

inline std::string decisions_jsonl(const std::vector<DecisionOutcome>& ds) {
    std::string s;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& d = ds[i];
        s += "{\"sample\":" + std::to_string(i) + ",\"action\":" + std::to_string(d.action) +
             ",\"rejected\":" + (d.rejected ? "true" : "false") +
             ",\"uncertainty\":" + format_fixed6(d.uncertainty) + ",\"expected_utilities\":[";
        for (std::size_t a = 0; a < d.expected_utilities.size(); ++a) {
            if (a) s += ",";
            s += format_fixed6(d.expected_utilities[a]);
        }
        s += "]}\n";
    }
    return s;
}

inline std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

inline nlohmann::ordered_json report_summary(const CalibrationReport& r) {
    nlohmann::ordered_json j;
    j["accuracy"] = r.accuracy;
    j["expected_loss"] = r.expected_loss;
    j["ece"] = r.ece;
    j["mce"] = r.mce;
    j["uce"] = r.uce;
    j["muce"] = r.muce;
    j["sharpness"] = r.sharpness;
    return j;
}

inline void print_summary(const CalibrationReport& r, std::ostream& out) {
    const auto line = [&](const char* name, double v, bool percent) {
        out << name << ' ' << format_fixed6(v);
        if (percent) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
            out << "  (x100: " << buf << ")";
        }
        out << '\n';
    };
    line("accuracy", r.accuracy, true);
    line("expected_loss", r.expected_loss, false);
    line("ece", r.ece, true);
    line("mce", r.mce, true);
    line("uce", r.uce, true);
    line("muce", r.muce, true);
    line("sharpness", r.sharpness, false);
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Calibrated-uncertainty metrics and loss-calibrated decisions", "lcbnn"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    const std::vector<std::string> methods{"jackknife", "plugin"};

    // metrics
    struct {
        std::string predictions, utility, out, uncertainty = "jackknife";
        std::size_t bins = kDefaultBins;
    } m;
    auto* metrics = app.add_subcommand("metrics", "Compute ECE/MCE/UCE/MUCE/sharpness");
    metrics->add_option("--predictions", m.predictions, "Predictions CSV")->required();
    metrics->add_option("--utility", m.utility, "Utility JSON (default: 0/1 utility)");
    metrics->add_option("--bins", m.bins, "Number of equal-width bins")->check(CLI::PositiveNumber);
    metrics->add_option("--uncertainty", m.uncertainty, "Entropy estimator")->check(CLI::IsMember(methods));
    metrics->add_option("--out", m.out, "Report JSON path")->required();

    // decide
    struct {
        std::string predictions, utility, out, uncertainty = "jackknife";
        double reject_above = 1.0;
    } d;
    auto* decide = app.add_subcommand("decide", "Bayes actions under a utility matrix");
    decide->add_option("--predictions", d.predictions, "Predictions CSV")->required();
    decide->add_option("--utility", d.utility, "Utility JSON")->required();
    decide->add_option("--reject-above", d.reject_above, "Reject if normalized uncertainty exceeds this")
        ->check(CLI::Range(0.0, 1.0));
    decide->add_option("--uncertainty", d.uncertainty, "Entropy estimator")->check(CLI::IsMember(methods));
    decide->add_option("--out", d.out, "JSON-lines output (default: stdout)");

    // train-demo
    struct {
        std::string mode = "lcvi", utility, out;
        std::uint64_t seed = 42;
        std::size_t n = 600, passes = 25;
        TrainConfig cfg;
    } t;
    auto* demo = app.add_subcommand("train-demo", "Train the dropweights network on synthetic data");
    demo->add_option("--mode", t.mode, "standard | weighted | lcvi")
        ->check(CLI::IsMember({"standard", "weighted", "lcvi"}));
    demo->add_option("--seed", t.seed, "Random seed");
    demo->add_option("--n", t.n, "Synthetic dataset size")->check(CLI::Range(40, 10000000));
    demo->add_option("--passes", t.passes, "MC passes at prediction time")->check(CLI::PositiveNumber);
    demo->add_option("--epochs", t.cfg.epochs, "Training epochs");
    demo->add_option("--batch-size", t.cfg.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
    demo->add_option("--lr", t.cfg.learning_rate, "Learning rate")->check(CLI::PositiveNumber);
    demo->add_option("--kappa", t.cfg.kappa, "Utility term weight")->check(CLI::NonNegativeNumber);
    demo->add_option("--dropweight", t.cfg.dropweight_rate, "Dropweight rate")->check(CLI::Range(0.0, 0.999));
    demo->add_option("--weight-decay", t.cfg.weight_decay, "L2 weight")->check(CLI::NonNegativeNumber);
    demo->add_option("--mc-train", t.cfg.mc_train_samples, "MC masks per decision step")->check(CLI::PositiveNumber);
    demo->add_option("--utility", t.utility, "Utility JSON (default: the 4-class X-ray table)");
    demo->add_option("--out", t.out, "Predictions CSV path")->required();

    // wasserstein
    struct {
        std::string a, b, out;
    } w;
    auto* wass = app.add_subcommand("wasserstein", "W1 distance between two value columns");
    wass->add_option("a", w.a, "First CSV")->required();
    wass->add_option("b", w.b, "Second CSV")->required();
    wass->add_option("--out", w.out, "Also write the distance to this file");

    // report
    struct {
        std::string predictions, utility, out_dir, uncertainty = "jackknife";
        std::size_t bins = kDefaultBins;
        double reject_above = 1.0;
    } r;
    auto* report = app.add_subcommand("report", "Metrics, diagrams and decisions in one pass");
    report->add_option("--predictions", r.predictions, "Predictions CSV")->required();
    report->add_option("--utility", r.utility, "Utility JSON (default: 0/1 utility)");
    report->add_option("--bins", r.bins, "Number of equal-width bins")->check(CLI::PositiveNumber);
    report->add_option("--uncertainty", r.uncertainty, "Entropy estimator")->check(CLI::IsMember(methods));
    report->add_option("--reject-above", r.reject_above, "Rejection threshold")->check(CLI::Range(0.0, 1.0));
    report->add_option("--out", r.out_dir, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (metrics->parsed()) {
            const auto set = load_predictions(m.predictions);
            const auto u = m.utility.empty() ? zero_one_utility(set.n_classes()) : load_utility(m.utility);
            const auto a = analyze(set, u, m.bins, detail::parse_method(m.uncertainty));
            write_report(a.report, m.out);
            RunManifest man{"metrics",
                            {{"bins", std::to_string(m.bins)},
                             {"out", m.out},
                             {"predictions", m.predictions},
                             {"uncertainty", m.uncertainty},
                             {"utility", m.utility}},
                            std::nullopt,
                            {m.predictions}};
            if (!m.utility.empty()) man.inputs.push_back(m.utility);
            man.extra["metrics"] = detail::report_summary(a.report);
            man.write(detail::manifest_path(m.out));
            detail::print_summary(a.report, out);
        } else if (decide->parsed()) {
            const auto set = load_predictions(d.predictions);
            const auto u = load_utility(d.utility);
            const auto ds = decide_all(set, u, d.reject_above, detail::parse_method(d.uncertainty));
            const auto text = detail::decisions_jsonl(ds);
            std::size_t rejected = 0;
            for (const auto& o : ds) rejected += o.rejected ? 1 : 0;
            if (d.out.empty()) {
                out << text;
            } else {
                write_text(text, d.out);
                RunManifest man{"decide",
                                {{"out", d.out},
                                 {"predictions", d.predictions},
                                 {"reject_above", detail::format_fixed6(d.reject_above)},
                                 {"uncertainty", d.uncertainty},
                                 {"utility", d.utility}},
                                std::nullopt,
                                {d.predictions, d.utility}};
                man.extra["rejected"] = rejected;
                man.write(detail::manifest_path(d.out));
            }
            err << "decided " << ds.size() << " samples, " << rejected << " rejected\n";
        } else if (demo->parsed()) {
            t.cfg.mode = detail::parse_mode(t.mode);
            t.cfg.seed = t.seed;
            const auto u = t.utility.empty() ? xray_utility() : load_utility(t.utility);
            const auto data = make_synthetic(t.n, t.seed);
            const auto model = train(data, &u, t.cfg);
            const auto set = mc_predict(model, data, t.passes, derive_seed(t.seed, 99));
            write_predictions(set, t.out);
            const auto a = analyze(set, u, kDefaultBins, UncertaintyMethod::jackknife);
            RunManifest man{"train-demo",
                            {{"batch_size", std::to_string(t.cfg.batch_size)},
                             {"dropweight", detail::format_fixed6(t.cfg.dropweight_rate)},
                             {"epochs", std::to_string(t.cfg.epochs)},
                             {"kappa", detail::format_fixed6(t.cfg.kappa)},
                             {"lr", detail::format_fixed6(t.cfg.learning_rate)},
                             {"mc_train", std::to_string(t.cfg.mc_train_samples)},
                             {"mode", t.mode},
                             {"n", std::to_string(t.n)},
                             {"out", t.out},
                             {"passes", std::to_string(t.passes)},
                             {"utility", t.utility},
                             {"weight_decay", detail::format_fixed6(t.cfg.weight_decay)}},
                            t.seed,
                            {}};
            if (!t.utility.empty()) man.inputs.push_back(t.utility);
            man.extra["class_counts"] = data.class_counts;
            man.extra["final_train_loss"] = model.epoch_losses.empty() ? 0.0 : model.epoch_losses.back();
            man.extra["metrics"] = detail::report_summary(a.report);
            man.extra["rare_class_fnr"] = rare_class_false_negative_rate(set.labels(), a.actions, 4, 3);
            man.write(detail::manifest_path(t.out));
            detail::print_summary(a.report, out);
        } else if (wass->parsed()) {
            const auto va = load_value_column(w.a);
            const auto vb = load_value_column(w.b);
            const std::string text = detail::format_fixed6(wasserstein1(va, vb)) + "\n";
            out << text;
            if (!w.out.empty()) {
                write_text(text, w.out);
                RunManifest man{"wasserstein", {{"a", w.a}, {"b", w.b}, {"out", w.out}}, std::nullopt, {w.a, w.b}};
                man.write(detail::manifest_path(w.out));
            }
        } else if (report->parsed()) {
            const auto set = load_predictions(r.predictions);
            const auto u = r.utility.empty() ? zero_one_utility(set.n_classes()) : load_utility(r.utility);
            const auto method = detail::parse_method(r.uncertainty);
            const auto a = analyze(set, u, r.bins, method);
            std::error_code ec;
            std::filesystem::create_directories(r.out_dir, ec);
            if (ec) throw IoError("cannot create directory '" + r.out_dir + "': " + ec.message());
            const std::filesystem::path dir(r.out_dir);
            write_report(a.report, (dir / "report.json").string());
            emit_diagram(a.report.bins, (dir / "confidence.svg").string(), DiagramMode::confidence);
            emit_diagram(a.report.uncertainty_bins, (dir / "uncertainty.svg").string(), DiagramMode::uncertainty);
            const auto ds = decide_all(set, u, r.reject_above, method);
            write_text(detail::decisions_jsonl(ds), (dir / "decisions.jsonl").string());
            RunManifest man{"report",
                            {{"bins", std::to_string(r.bins)},
                             {"out", r.out_dir},
                             {"predictions", r.predictions},
                             {"reject_above", detail::format_fixed6(r.reject_above)},
                             {"uncertainty", r.uncertainty},
                             {"utility", r.utility}},
                            std::nullopt,
                            {r.predictions}};
            if (!r.utility.empty()) man.inputs.push_back(r.utility);
            man.extra["metrics"] = detail::report_summary(a.report);
            if (set.n_classes() >= 2) {
                man.extra["confusion_matrix"] = confusion_matrix(set.labels(), a.actions, set.n_classes(), true);
            }
            try {
                const auto g = error_uncertainty_gap(a.summary.uncertainties(), a.errors);
                man.extra["error_uncertainty"] = {{"w1", g.w1}, {"spearman", g.spearman}};
            } catch (const ValidationError&) {
                man.extra["error_uncertainty"] = nullptr;  // degenerate split
            }
            man.write((dir / "manifest.json").string());
            detail::print_summary(a.report, out);
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << '\n';
        return 1;
    } catch (const DivergenceError& e) {
        err << "training diverged: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace lcbnn::cli
