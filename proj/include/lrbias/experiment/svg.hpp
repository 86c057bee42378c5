#pragma once

// Small deterministic SVG line-plot writer: one <polyline> per series,
// axes drawn with <line>, optional dashed vertical guides and a legend.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lrbias/error.hpp"
#include "lrbias/experiment/csv.hpp"

namespace lrbias::experiment {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Guide {
  double x = 0.0;
  std::string label;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Guide> guides;
};

namespace detail {

inline std::string fixed2(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

inline std::string tick_label(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 3);
  return std::string(buf, r.ptr);
}

inline std::string escape_xml(const std::string& s) {
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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi == lo) {
      const double pad = lo == 0.0 ? 1.0 : 0.05 * std::abs(lo);
      lo -= pad;
      hi += pad;
    }
  }
};

inline bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

inline std::vector<double> ticks(const Range& r, bool log) {
  std::vector<double> out;
  if (log) {
    for (double e = std::ceil(r.lo - 1e-12); e <= r.hi + 1e-12; e += 1.0) out.push_back(e);
    if (out.size() >= 2) return out;
    out.clear();
  }
  for (int k = 0; k <= 4; ++k) out.push_back(r.lo + (r.hi - r.lo) * k / 4.0);
  return out;
}

}  // namespace detail

inline constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

inline std::string render_svg(const std::vector<Series>& series, const Axes& axes) {
  require(!series.empty(), ErrorCode::InvalidArgument, "render_svg needs at least one series");
  constexpr double W = 720, H = 460, L = 80, R = 190, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;

  auto tx = [&](double v) { return axes.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return axes.log_y ? std::log10(v) : v; };

  detail::Range xr, yr;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), ErrorCode::DimensionMismatch, "series x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!detail::usable(s.x[i], axes.log_x) || !detail::usable(s.y[i], axes.log_y)) continue;
      xr.add(tx(s.x[i]));
      yr.add(ty(s.y[i]));
    }
  }
  for (const auto& g : axes.guides)
    if (detail::usable(g.x, axes.log_x)) xr.add(tx(g.x));
  xr.finish();
  yr.finish();
  auto px = [&](double v) { return L + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double v) { return T + ph - (v - yr.lo) / (yr.hi - yr.lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"460\" viewBox=\"0 0 720 460\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"460\" fill=\"white\"/>\n";
  o += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!axes.title.empty())
    o += "<text x=\"" + detail::fixed2(L + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
         detail::escape_xml(axes.title) + "</text>\n";

  // Frame and ticks.
  const std::string x0 = detail::fixed2(L), x1 = detail::fixed2(L + pw), y0 = detail::fixed2(T),
                    y1 = detail::fixed2(T + ph);
  o += "<line x1=\"" + x0 + "\" y1=\"" + y1 + "\" x2=\"" + x1 + "\" y2=\"" + y1 + "\" stroke=\"black\"/>\n";
  o += "<line x1=\"" + x0 + "\" y1=\"" + y0 + "\" x2=\"" + x0 + "\" y2=\"" + y1 + "\" stroke=\"black\"/>\n";
  for (double v : detail::ticks(xr, axes.log_x)) {
    const std::string p = detail::fixed2(px(v));
    o += "<line x1=\"" + p + "\" y1=\"" + y1 + "\" x2=\"" + p + "\" y2=\"" + detail::fixed2(T + ph + 5) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + p + "\" y=\"" + detail::fixed2(T + ph + 20) + "\" text-anchor=\"middle\">" +
         detail::tick_label(axes.log_x ? std::pow(10.0, v) : v) + "</text>\n";
  }
  for (double v : detail::ticks(yr, axes.log_y)) {
    const std::string p = detail::fixed2(py(v));
    o += "<line x1=\"" + detail::fixed2(L - 5) + "\" y1=\"" + p + "\" x2=\"" + x0 + "\" y2=\"" + p +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + detail::fixed2(L - 8) + "\" y=\"" + detail::fixed2(py(v) + 4) + "\" text-anchor=\"end\">" +
         detail::tick_label(axes.log_y ? std::pow(10.0, v) : v) + "</text>\n";
  }
  if (!axes.x_label.empty())
    o += "<text x=\"" + detail::fixed2(L + pw / 2) + "\" y=\"" + detail::fixed2(H - 15) + "\" text-anchor=\"middle\">" +
         detail::escape_xml(axes.x_label) + "</text>\n";
  if (!axes.y_label.empty())
    o += "<text x=\"20\" y=\"" + detail::fixed2(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         detail::fixed2(T + ph / 2) + ")\">" + detail::escape_xml(axes.y_label) + "</text>\n";

  for (const auto& g : axes.guides) {
    if (!detail::usable(g.x, axes.log_x)) continue;
    const std::string p = detail::fixed2(px(tx(g.x)));
    o += "<line x1=\"" + p + "\" y1=\"" + y0 + "\" x2=\"" + p + "\" y2=\"" + y1 +
         "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
    if (!g.label.empty())
      o += "<text x=\"" + p + "\" y=\"" + detail::fixed2(T - 4) + "\" text-anchor=\"middle\" fill=\"gray\">" +
           detail::escape_xml(g.label) + "</text>\n";
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const std::string color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!detail::usable(s.x[i], axes.log_x) || !detail::usable(s.y[i], axes.log_y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += detail::fixed2(px(tx(s.x[i]))) + "," + detail::fixed2(py(ty(s.y[i])));
    }
    o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.6\"" +
         (s.dashed ? std::string(" stroke-dasharray=\"6,3\"") : std::string()) + " points=\"" + pts + "\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(k);
    o += "<line x1=\"" + detail::fixed2(W - R + 15) + "\" y1=\"" + detail::fixed2(ly) + "\" x2=\"" +
         detail::fixed2(W - R + 40) + "\" y2=\"" + detail::fixed2(ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + detail::fixed2(W - R + 46) + "\" y=\"" + detail::fixed2(ly + 4) + "\">" +
         detail::escape_xml(s.label) + "</text>\n";
  }
  o += "</g>\n</svg>\n";
  return o;
}

inline void write_svg(const std::vector<Series>& series, const Axes& axes, const std::string& path) {
  write_text(render_svg(series, axes), path);
}

}  // namespace lrbias::experiment
