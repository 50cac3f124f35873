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

// On-disk formats:
//   predictions CSV  sample_id,mc_pass,true_label,p_0,...,p_{C-1}
//   utility JSON     {"classes":[...],"rows_are_true_class":true,"matrix":[[...]]}
//   report JSON      fixed key order, reals printed with 6 decimals

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lcbnn/types.hpp"

namespace lcbnn {
namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end && !s.empty();
}

inline std::string format_fixed6(double v) {
    // Avoid "-0.000000" for tiny negatives from floating-point noise.
    if (std::abs(v) < 5e-7) v = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace detail

/// Parses the predictions CSV. Rows may come in any order; they are grouped
/// by (sample_id, mc_pass) and the tensor must be dense. Line numbers in
/// error messages are 1-based and count the header.
inline MCSampleSet parse_predictions(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("malformed header: empty input");
    const auto header = detail::split_commas(detail::trim(line));
    if (header.size() < 5 || detail::trim(header[0]) != "sample_id" ||
        detail::trim(header[1]) != "mc_pass" || detail::trim(header[2]) != "true_label") {
        throw ValidationError("malformed header: expected sample_id,mc_pass,true_label,p_0,...");
    }
    const std::size_t n_classes = header.size() - 3;
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (detail::trim(header[3 + c]) != "p_" + std::to_string(c)) {
            throw ValidationError("malformed header: column " + std::to_string(4 + c) +
                                  " should be p_" + std::to_string(c));
        }
    }

    struct Row {
        std::size_t line;
        ClassIndex label;
        std::vector<double> p;
    };
    std::map<std::pair<std::size_t, std::size_t>, Row> rows;
    std::size_t max_sample = 0;
    std::size_t max_pass = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto fields = detail::split_commas(trimmed);
        const std::string at = " at row " + std::to_string(line_no);
        if (fields.size() != header.size()) throw ValidationError("wrong field count" + at);
        std::size_t sample = 0, pass = 0;
        ClassIndex label = 0;
        if (!detail::parse_number(fields[0], sample) || !detail::parse_number(fields[1], pass) ||
            !detail::parse_number(fields[2], label)) {
            throw ValidationError("bad integer field" + at);
        }
        if (label >= n_classes) throw ValidationError("label out of range" + at);
        Row row{line_no, label, std::vector<double>(n_classes)};
        double sum = 0.0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (!detail::parse_number(fields[3 + c], row.p[c]) || !std::isfinite(row.p[c])) {
                throw ValidationError("bad probability" + at);
            }
            if (row.p[c] < -kSimplexTolerance || row.p[c] > 1.0 + kSimplexTolerance) {
                throw ValidationError("probability outside [0,1]" + at);
            }
            sum += row.p[c];
        }
        if (std::abs(sum - 1.0) > kSimplexTolerance) {
            throw ValidationError("off-simplex" + at);
        }
        max_sample = std::max(max_sample, sample);
        max_pass = std::max(max_pass, pass);
        if (!rows.emplace(std::pair{sample, pass}, std::move(row)).second) {
            throw ValidationError("duplicate (sample_id, mc_pass)" + at);
        }
    }
    if (rows.empty()) throw ValidationError("no prediction rows");

    const std::size_t n_samples = max_sample + 1;
    const std::size_t n_passes = max_pass + 1;
    if (rows.size() != n_samples * n_passes) {
        for (std::size_t i = 0; i < n_samples; ++i)
            for (std::size_t t = 0; t < n_passes; ++t)
                if (!rows.contains({i, t}))
                    throw ValidationError("missing (sample_id, mc_pass) = (" + std::to_string(i) +
                                          ", " + std::to_string(t) + "); tensor must be dense");
    }

    std::vector<double> probs;
    probs.reserve(n_samples * n_passes * n_classes);
    std::vector<ClassIndex> labels(n_samples);
    for (const auto& [key, row] : rows) {  // map order is (sample, pass)
        if (key.second == 0) {
            labels[key.first] = row.label;
        } else if (row.label != labels[key.first]) {
            throw ValidationError("inconsistent true_label for sample " +
                                  std::to_string(key.first) + " at row " +
                                  std::to_string(row.line));
        }
        probs.insert(probs.end(), row.p.begin(), row.p.end());
    }
    return MCSampleSet(n_samples, n_passes, n_classes, std::move(probs), std::move(labels));
}

inline MCSampleSet load_predictions(const std::string& path) {
    auto in = detail::open_input(path);
    return parse_predictions(in);
}

/// Writes probabilities with 12 significant digits.
inline void write_predictions(const MCSampleSet& set, std::ostream& out) {
    out << "sample_id,mc_pass,true_label";
    for (std::size_t c = 0; c < set.n_classes(); ++c) out << ",p_" << c;
    out << '\n';
    for (std::size_t i = 0; i < set.n_samples(); ++i) {
        for (std::size_t t = 0; t < set.n_passes(); ++t) {
            out << i << ',' << t << ',' << set.label(i);
            for (double p : set.pass(i, t)) out << ',' << detail::format_g12(p);
            out << '\n';
        }
    }
}

inline void write_predictions(const MCSampleSet& set, const std::string& path) {
    auto out = detail::open_output(path);
    write_predictions(set, out);
    detail::finish_output(out, path);
}

inline UtilityMatrix parse_utility(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("utility JSON parse error: ") + e.what());
    }
    if (!j.is_object() || !j.contains("matrix") || !j["matrix"].is_array()) {
        throw ValidationError("utility JSON must be an object with a \"matrix\" array");
    }
    std::vector<std::string> classes;
    if (j.contains("classes")) {
        if (!j["classes"].is_array()) throw ValidationError("\"classes\" must be an array");
        for (const auto& c : j["classes"]) {
            if (!c.is_string()) throw ValidationError("class names must be strings");
            classes.push_back(c.get<std::string>());
        }
    }
    if (j.contains("rows_are_true_class") && !j["rows_are_true_class"].is_boolean()) {
        throw ValidationError("\"rows_are_true_class\" must be a boolean");
    }
    const bool rows_true = j.value("rows_are_true_class", true);

    std::vector<std::vector<double>> m;
    for (const auto& row : j["matrix"]) {
        if (!row.is_array()) throw ValidationError("matrix rows must be arrays");
        auto& r = m.emplace_back();
        for (const auto& v : row) {
            if (!v.is_number()) throw ValidationError("matrix entries must be numbers");
            r.push_back(v.get<double>());
        }
    }
    if (!classes.empty() && classes.size() != m.size()) {
        throw ValidationError("class list / matrix size mismatch");
    }
    for (const auto& r : m) {
        if (r.size() != m.size()) throw ValidationError("utility matrix is not square");
    }
    if (!rows_true) {  // stored as [action][true]; transpose
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = a + 1; b < m.size(); ++b) std::swap(m[a][b], m[b][a]);
    }
    return UtilityMatrix(std::move(classes), std::move(m));
}

inline UtilityMatrix load_utility(const std::string& path) {
    auto in = detail::open_input(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_utility(ss.str());
}

inline std::string utility_to_json(const UtilityMatrix& u) {
    nlohmann::ordered_json j;
    j["classes"] = u.classes();
    j["rows_are_true_class"] = true;
    j["matrix"] = u.rows();
    return j.dump(2) + "\n";
}

namespace detail {

inline void append_rows(std::string& s, const std::vector<DiagramRow>& rows) {
    s += "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        s += i == 0 ? "\n" : ",\n";
        s += "    {\"lo\": " + format_fixed6(r.lo) + ", \"hi\": " + format_fixed6(r.hi) +
             ", \"count\": " + std::to_string(r.count) + ", \"mean_x\": " + format_fixed6(r.mean_x) +
             ", \"empirical_y\": " + format_fixed6(r.empirical_y) +
             ", \"gap\": " + format_fixed6(r.gap) + "}";
    }
    s += rows.empty() ? "]" : "\n  ]";
}

}  // namespace detail

/// Serializes with a fixed key order. "bins" holds the confidence diagram,
/// "uncertainty_bins" the uncertainty diagram.
inline std::string report_to_json(const CalibrationReport& r) {
    using detail::format_fixed6;
    std::string s = "{\n";
    s += "  \"accuracy\": " + format_fixed6(r.accuracy) + ",\n";
    s += "  \"expected_loss\": " + format_fixed6(r.expected_loss) + ",\n";
    s += "  \"ece\": " + format_fixed6(r.ece) + ",\n";
    s += "  \"mce\": " + format_fixed6(r.mce) + ",\n";
    s += "  \"uce\": " + format_fixed6(r.uce) + ",\n";
    s += "  \"muce\": " + format_fixed6(r.muce) + ",\n";
    s += "  \"sharpness\": " + format_fixed6(r.sharpness) + ",\n";
    s += "  \"bins\": ";
    detail::append_rows(s, r.bins);
    s += ",\n  \"uncertainty_bins\": ";
    detail::append_rows(s, r.uncertainty_bins);
    s += "\n}\n";
    return s;
}

inline void write_text(const std::string& text, const std::string& path) {
    auto out = detail::open_output(path);
    out << text;
    detail::finish_output(out, path);
}

inline void write_report(const CalibrationReport& report, const std::string& path) {
    write_text(report_to_json(report), path);
}

/// CSV `lo,hi,count,mean_x,empirical_y,gap` for external plotting.
inline std::string diagram_rows_to_csv(const std::vector<DiagramRow>& rows) {
    using detail::format_fixed6;
    std::string s = "lo,hi,count,mean_x,empirical_y,gap\n";
    for (const auto& r : rows) {
        s += format_fixed6(r.lo) + "," + format_fixed6(r.hi) + "," + std::to_string(r.count) + "," +
             format_fixed6(r.mean_x) + "," + format_fixed6(r.empirical_y) + "," +
             format_fixed6(r.gap) + "\n";
    }
    return s;
}

/// Single-column numeric CSV; a non-numeric first line is taken as a header.
inline std::vector<double> parse_value_column(std::istream& in) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        double v = 0.0;
        if (!detail::parse_number(t, v)) {
            if (line_no == 1) continue;
            throw ValidationError("bad value at row " + std::to_string(line_no));
        }
        if (!std::isfinite(v)) throw ValidationError("non-finite value at row " + std::to_string(line_no));
        values.push_back(v);
    }
    return values;
}

inline std::vector<double> load_value_column(const std::string& path) {
    auto in = detail::open_input(path);
    return parse_value_column(in);
}

}  // namespace lcbnn
