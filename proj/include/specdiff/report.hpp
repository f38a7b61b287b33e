#ifndef SPECDIFF_REPORT_HPP_
#define SPECDIFF_REPORT_HPP_

// Plain-text and SVG rendering of a sweep summary (count vs log(1/eps)).
// Output depends only on the summary document, never on clock or locale.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace specdiff {

struct ChartSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (log_inv_eps, count), guard-clean only
  double predicted_slope = 0.0;
};

/// Extracts the count series of every (profile, window) in a summary.
inline std::vector<ChartSeries> chart_series(const nlohmann::json& summary) {
  std::vector<ChartSeries> out;
  if (!summary.contains("series")) return out;
  const auto& series = summary.at("series");
  const nlohmann::json empty = nlohmann::json::object();
  const auto& predicted = summary.contains("predicted_slopes") ? summary.at("predicted_slopes") : empty;
  for (auto p = series.begin(); p != series.end(); ++p) {
    for (auto w = p.value().begin(); w != p.value().end(); ++w) {
      ChartSeries s;
      s.label = p.key() + " " + w.key();
      s.predicted_slope = predicted.value(w.key(), 0.0);
      for (const auto& pt : w.value()) {
        if (pt.value("guard_flag", 0) != 0) continue;
        s.points.emplace_back(pt.at("log_inv_eps").get<double>(), pt.at("count").get<double>());
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

namespace detail {

inline std::string svg_num(double v) {
  // fixed format, C locale
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace detail

/// Fixed 640x400 chart: observed points per series and the predicted line
/// through each series' centroid. No series gives axes only.
inline std::string render_svg(const std::vector<ChartSeries>& series) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (!(x0 < x1)) {
    x0 = 0.0;
    x1 = 1.0;
  }
  if (!(y0 < y1)) {
    y0 = std::isfinite(y0) ? y0 - 1.0 : 0.0;
    y1 = y0 + 2.0;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * (kW - kLeft - kRight); };
  auto py = [&](double y) { return kH - kBottom - (y - y0) / (y1 - y0) * (kH - kTop - kBottom); };
  using detail::svg_num;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
     << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight << "\" y2=\""
     << kH - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kH - kBottom
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\" font-size=\"12\">log(1/eps)</text>\n";
  os << "<text x=\"14\" y=\"" << kH / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << kH / 2
     << ")\" text-anchor=\"middle\">count</text>\n";
  os << "<text x=\"" << kLeft << "\" y=\"" << kH - kBottom + 16 << "\" font-size=\"10\">" << svg_num(x0) << "</text>\n";
  os << "<text x=\"" << kW - kRight << "\" y=\"" << kH - kBottom + 16 << "\" font-size=\"10\" text-anchor=\"end\">"
     << svg_num(x1) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    os << "<g stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    for (const auto& [x, y] : s.points)
      os << "<circle cx=\"" << svg_num(px(x)) << "\" cy=\"" << svg_num(py(y)) << "\" r=\"3\"/>\n";
    if (!s.points.empty()) {
      double cx = 0.0, cy = 0.0;
      for (const auto& [x, y] : s.points) {
        cx += x;
        cy += y;
      }
      cx /= static_cast<double>(s.points.size());
      cy /= static_cast<double>(s.points.size());
      auto line_y = [&](double x) { return std::clamp(cy + s.predicted_slope * (x - cx), y0, y1); };
      os << "<line x1=\"" << svg_num(px(x0)) << "\" y1=\"" << svg_num(py(line_y(x0))) << "\" x2=\""
         << svg_num(px(x1)) << "\" y2=\"" << svg_num(py(line_y(x1))) << "\" stroke-dasharray=\"6 3\"/>\n";
    }
    os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 14 * (k + 1) << "\" font-size=\"11\" stroke=\"none\">"
       << detail::xml_escape(s.label) << "</text>\n";
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// One line per fitted quantity: profile, key, fitted, predicted, deviation.
inline std::string render_text(const nlohmann::json& summary) {
  std::ostringstream os;
  if (!summary.contains("fitted_slopes")) return os.str();
  const auto& fitted = summary.at("fitted_slopes");
  for (auto p = fitted.begin(); p != fitted.end(); ++p)
    for (auto q = p.value().begin(); q != p.value().end(); ++q) {
      char buf[160];
      const double pred = summary["predicted_slopes"].value(q.key(), 0.0);
      const double dev = summary["deviations"][p.key()].value(q.key(), 0.0);
      std::snprintf(buf, sizeof buf, "%-16s %-14s fitted=%.6f predicted=%.6f deviation=%.4f\n",
                    p.key().c_str(), q.key().c_str(), q.value().get<double>(), pred, dev);
      os << buf;
    }
  return os.str();
}

}  // namespace specdiff

#endif  // SPECDIFF_REPORT_HPP_
