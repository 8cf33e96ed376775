#pragma once

// Self-contained SVG overlays of an empirical step CDF on a comparison curve.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "subortrim/experiments.hpp"

namespace subortrim {

namespace detail {

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

} // namespace detail

/// 640×480 SVG: the empirical CDF of slice.samples as a step line, the
/// comparison curve as a second line, labelled axes. Text depends only on
/// the slice.
inline std::string emit_plot(const PlotSlice& slice) {
  constexpr double width = 640, height = 480;
  constexpr double left = 70, right = 20, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  double lo = 0.0, hi = 1.0;
  if (!slice.curve_x.empty()) {
    lo = *std::min_element(slice.curve_x.begin(), slice.curve_x.end());
    hi = *std::max_element(slice.curve_x.begin(), slice.curve_x.end());
  } else if (!slice.samples.empty()) {
    lo = *std::min_element(slice.samples.begin(), slice.samples.end());
    hi = *std::max_element(slice.samples.begin(), slice.samples.end());
  }
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  auto sx = [&](double x) { return left + pw * (std::clamp(x, lo, hi) - lo) / (hi - lo); };
  auto sy = [&](double y) { return top + ph * (1.0 - std::clamp(y, 0.0, 1.0)); };
  using detail::svg_num;

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
         detail::svg_escape(slice.title) + "</text>\n";
  // Axes, ticks and labels.
  svg += "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
  svg += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top + ph) + "\" x2=\"" + svg_num(left + pw) + "\" y2=\"" +
         svg_num(top + ph) + "\"/>\n";
  svg += "<line x1=\"" + svg_num(left) + "\" y1=\"" + svg_num(top) + "\" x2=\"" + svg_num(left) + "\" y2=\"" +
         svg_num(top + ph) + "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = left + pw * i / 4.0, y = top + ph * i / 4.0;
    svg += "<line x1=\"" + svg_num(x) + "\" y1=\"" + svg_num(top + ph) + "\" x2=\"" + svg_num(x) + "\" y2=\"" +
           svg_num(top + ph + 5) + "\"/>\n";
    svg += "<line x1=\"" + svg_num(left - 5) + "\" y1=\"" + svg_num(y) + "\" x2=\"" + svg_num(left) + "\" y2=\"" +
           svg_num(y) + "\"/>\n";
  }
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    char label[32];
    std::snprintf(label, sizeof label, "%.3g", lo + (hi - lo) * i / 4.0);
    svg += "<text x=\"" + svg_num(left + pw * i / 4.0) + "\" y=\"" + svg_num(top + ph + 18) +
           "\" text-anchor=\"middle\">" + label + "</text>\n";
    std::snprintf(label, sizeof label, "%.2f", 1.0 - i / 4.0);
    svg += "<text x=\"" + svg_num(left - 8) + "\" y=\"" + svg_num(top + ph * i / 4.0 + 4) +
           "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  svg += "</g>\n";
  svg += "<text x=\"" + svg_num(left + pw / 2) + "\" y=\"" + svg_num(height - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">x</text>\n";
  svg += "<text x=\"18\" y=\"" + svg_num(top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 18 " + svg_num(top + ph / 2) + ")\">CDF</text>\n";

  if (!slice.curve_x.empty()) {
    svg += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < slice.curve_x.size() && i < slice.curve_y.size(); ++i)
      svg += (i ? " " : "") + svg_num(sx(slice.curve_x[i])) + "," + svg_num(sy(slice.curve_y[i]));
    svg += "\"/>\n";
  }
  if (!slice.samples.empty()) {
    auto xs = slice.samples;
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    std::string d = "M" + svg_num(sx(lo)) + "," + svg_num(sy(0.0));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      d += " H" + svg_num(sx(xs[i]));
      d += " V" + svg_num(sy(static_cast<double>(i + 1) / n));
    }
    d += " H" + svg_num(sx(hi));
    svg += "<path fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" d=\"" + d + "\"/>\n";
  }
  // Legend.
  svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<line x1=\"" + svg_num(left + 10) + "\" y1=\"" + svg_num(top + 12) + "\" x2=\"" + svg_num(left + 30) +
         "\" y2=\"" + svg_num(top + 12) + "\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
  svg += "<text x=\"" + svg_num(left + 35) + "\" y=\"" + svg_num(top + 16) + "\">empirical</text>\n";
  if (!slice.curve_x.empty()) {
    svg += "<line x1=\"" + svg_num(left + 10) + "\" y1=\"" + svg_num(top + 28) + "\" x2=\"" + svg_num(left + 30) +
           "\" y2=\"" + svg_num(top + 28) + "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + svg_num(left + 35) + "\" y=\"" + svg_num(top + 32) + "\">" +
           detail::svg_escape(slice.curve_label) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

} // namespace subortrim
