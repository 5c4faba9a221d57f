/*
 * Copyright 2026 The Semivalue Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "semivalue/svg_plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <sstream>

namespace semivalue {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Fixed precision keeps the files byte-stable.
std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<CurveBand>& bands) {
  constexpr double kW = 640, kH = 420, kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -y_min;
  Eigen::Index len = 0;
  for (const CurveBand& b : bands) {
    len = std::max(len, b.mean.size());
    y_min = std::min(y_min, b.lower.minCoeff());
    y_max = std::max(y_max, b.upper.maxCoeff());
  }
  if (!(y_max > y_min)) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  auto px = [&](double k) { return kLeft + pw * k / std::max<double>(1.0, len - 1.0); };
  auto py = [&](double v) { return kTop + ph * (1.0 - (v - y_min) / (y_max - y_min)); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << Escape(title) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
      << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = y_min + (y_max - y_min) * t / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << Fixed(py(v) + 4)
        << "\" text-anchor=\"end\">" << Fixed(v) << "</text>\n";
    const double k = (len - 1) * t / 4.0;
    svg << "<text x=\"" << Fixed(px(k)) << "\" y=\"" << kTop + ph + 16
        << "\" text-anchor=\"middle\">" << Fixed(k) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\">" << Escape(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << kTop + ph / 2 << ")\">" << Escape(y_label) << "</text>\n";

  for (std::size_t b = 0; b < bands.size(); ++b) {
    const CurveBand& band = bands[b];
    const char* colour = kPalette[b % std::size(kPalette)];
    std::ostringstream area;
    for (Eigen::Index k = 0; k < band.upper.size(); ++k) {
      area << Fixed(px(static_cast<double>(k))) << ',' << Fixed(py(band.upper[k])) << ' ';
    }
    for (Eigen::Index k = band.lower.size() - 1; k >= 0; --k) {
      area << Fixed(px(static_cast<double>(k))) << ',' << Fixed(py(band.lower[k])) << ' ';
    }
    svg << "<polygon points=\"" << area.str() << "\" fill=\"" << colour
        << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n";
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index k = 0; k < band.mean.size(); ++k) {
      svg << Fixed(px(static_cast<double>(k))) << ',' << Fixed(py(band.mean[k])) << ' ';
    }
    svg << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(b);
    svg << "<line x1=\"" << kW - kRight + 10 << "\" y1=\"" << ly << "\" x2=\""
        << kW - kRight + 30 << "\" y2=\"" << ly << "\" stroke=\"" << colour
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kW - kRight + 36 << "\" y=\"" << ly + 4 << "\">"
        << Escape(band.method) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string BinaryGridSvg(const std::string& title, int n, const std::vector<int>& flags) {
  constexpr int kCell = 4;
  constexpr int kMargin = 30;
  const int size = n * kCell;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * kMargin
      << "\" height=\"" << size + 2 * kMargin
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMargin + size / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << Escape(title) << "</text>\n";
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const int flag = flags[static_cast<std::size_t>(a * n + b)];
      if (flag == 0) continue;
      // x₁ runs left to right, x₂ bottom to top.
      svg << "<rect x=\"" << kMargin + a * kCell << "\" y=\"" << kMargin + (n - 1 - b) * kCell
          << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\""
          << (flag == 1 ? "black" : "#999999") << "\"/>\n";
    }
  }
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << size
      << "\" height=\"" << size << "\" fill=\"none\" stroke=\"black\"/>\n</svg>\n";
  return svg.str();
}

}  // namespace semivalue
