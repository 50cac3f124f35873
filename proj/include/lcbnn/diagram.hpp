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

// Reliability diagrams as standalone SVG 1.1 documents.

#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "lcbnn/calibration.hpp"
#include "lcbnn/tensor_io.hpp"
#include "lcbnn/types.hpp"

namespace lcbnn {
namespace detail {

inline std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace detail

/// Bars of empirical_y per bin, the y = x reference line, shaded gaps
/// between each bar top and the bin's mean_x, and a bin-count strip.
inline std::string diagram_to_svg(const std::vector<DiagramRow>& rows, DiagramMode style) {
    using detail::fmt3;
    constexpr double W = 480, H = 440;
    constexpr double left = 60, top = 30;
    constexpr double plot = 320;         // square plot area
    constexpr double strip_top = top + plot + 30;
    constexpr double strip_h = 40;
    const auto px = [&](double x) { return left + x * plot; };
    const auto py = [&](double y) { return top + (1.0 - y) * plot; };

    const bool conf = style == DiagramMode::confidence;
    const std::string title = conf ? "Confidence reliability" : "Uncertainty reliability";
    const std::string x_label = conf ? "confidence" : "normalized uncertainty";
    const std::string y_label = conf ? "accuracy" : "error rate";

    std::size_t max_count = 0;
    for (const auto& r : rows) max_count = std::max(max_count, r.count);

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt3(W) +
         "\" height=\"" + fmt3(H) + "\" viewBox=\"0 0 " + fmt3(W) + " " + fmt3(H) + "\">\n";
    s += "  <rect x=\"0\" y=\"0\" width=\"" + fmt3(W) + "\" height=\"" + fmt3(H) + "\" fill=\"white\"/>\n";
    s += "  <text x=\"" + fmt3(W / 2) + "\" y=\"18\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" + title + "</text>\n";

    for (const auto& r : rows) {
        if (r.count == 0) continue;
        const double x0 = px(r.lo), x1 = px(r.hi);
        s += "  <rect class=\"bar\" x=\"" + fmt3(x0) + "\" y=\"" + fmt3(py(r.empirical_y)) +
             "\" width=\"" + fmt3(x1 - x0) + "\" height=\"" + fmt3(py(0) - py(r.empirical_y)) +
             "\" fill=\"#4c72b0\" stroke=\"#1f3b66\" stroke-width=\"0.5\"/>\n";
        const double lo_y = std::min(r.empirical_y, r.mean_x);
        const double hi_y = std::max(r.empirical_y, r.mean_x);
        if (hi_y > lo_y) {
            s += "  <rect class=\"gap\" x=\"" + fmt3(x0) + "\" y=\"" + fmt3(py(hi_y)) + "\" width=\"" +
                 fmt3(x1 - x0) + "\" height=\"" + fmt3(py(lo_y) - py(hi_y)) +
                 "\" fill=\"#dd4444\" fill-opacity=\"0.35\"/>\n";
        }
    }

    // axes and diagonal
    s += "  <line class=\"axis\" x1=\"" + fmt3(px(0)) + "\" y1=\"" + fmt3(py(0)) + "\" x2=\"" +
         fmt3(px(1)) + "\" y2=\"" + fmt3(py(0)) + "\" stroke=\"black\"/>\n";
    s += "  <line class=\"axis\" x1=\"" + fmt3(px(0)) + "\" y1=\"" + fmt3(py(0)) + "\" x2=\"" +
         fmt3(px(0)) + "\" y2=\"" + fmt3(py(1)) + "\" stroke=\"black\"/>\n";
    s += "  <line class=\"diagonal\" x1=\"" + fmt3(px(0)) + "\" y1=\"" + fmt3(py(0)) + "\" x2=\"" +
         fmt3(px(1)) + "\" y2=\"" + fmt3(py(1)) +
         "\" stroke=\"#555555\" stroke-dasharray=\"4,3\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double t = k / 4.0;
        s += "  <text x=\"" + fmt3(px(t)) + "\" y=\"" + fmt3(py(0) + 14) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + fmt3(t).substr(0, 4) +
             "</text>\n";
        s += "  <text x=\"" + fmt3(px(0) - 6) + "\" y=\"" + fmt3(py(t) + 3) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt3(t).substr(0, 4) +
             "</text>\n";
    }
    s += "  <text x=\"" + fmt3(px(0.5)) + "\" y=\"" + fmt3(py(0) + 26) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + x_label + "</text>\n";
    s += "  <text x=\"16\" y=\"" + fmt3(py(0.5)) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"11\" transform=\"rotate(-90 16 " + fmt3(py(0.5)) + ")\">" + y_label + "</text>\n";

    // histogram strip
    s += "  <line class=\"axis\" x1=\"" + fmt3(px(0)) + "\" y1=\"" + fmt3(strip_top + strip_h) +
         "\" x2=\"" + fmt3(px(1)) + "\" y2=\"" + fmt3(strip_top + strip_h) + "\" stroke=\"black\"/>\n";
    for (const auto& r : rows) {
        if (r.count == 0 || max_count == 0) continue;
        const double h = strip_h * static_cast<double>(r.count) / static_cast<double>(max_count);
        s += "  <rect class=\"count\" x=\"" + fmt3(px(r.lo)) + "\" y=\"" + fmt3(strip_top + strip_h - h) +
             "\" width=\"" + fmt3(px(r.hi) - px(r.lo)) + "\" height=\"" + fmt3(h) +
             "\" fill=\"#999999\"><title>" + std::to_string(r.count) + "</title></rect>\n";
    }
    s += "</svg>\n";
    return s;
}

/// Writes `path` (SVG) and a sibling CSV with the same stem.
inline void emit_diagram(const std::vector<DiagramRow>& rows, const std::string& path, DiagramMode style) {
    write_text(diagram_to_svg(rows, style), path);
    std::string csv_path = path;
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) csv_path.resize(dot);
    write_text(diagram_rows_to_csv(rows), csv_path + ".csv");
}

}  // namespace lcbnn
