#include "pslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pslab/errors.hpp"

namespace pslab {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2f", v);
  return b;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double pos_lo = std::numeric_limits<double>::infinity();
  bool all_positive = true;
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (v > 0) pos_lo = std::min(pos_lo, v);
    else all_positive = false;
  }
};

void finish_axis(const Range& r, std::optional<bool> want_log, bool& is_log, double& a, double& b) {
  is_log = want_log ? *want_log : (r.all_positive && r.hi / r.pos_lo >= 100.0);
  if (is_log && !(r.pos_lo > 0)) is_log = false;
  if (is_log) {
    a = std::floor(std::log10(is_log && r.all_positive ? r.lo : r.pos_lo));
    b = std::ceil(std::log10(r.hi));
    if (b <= a) b = a + 1;
  } else {
    a = r.lo;
    b = r.hi;
    if (b - a <= 0) {
      const double pad = a == 0 ? 1.0 : 0.1 * std::abs(a);
      a -= pad;
      b += pad;
    } else {
      const double pad = 0.05 * (b - a);
      a -= pad;
      b += pad;
    }
  }
}

}  // namespace

double PlotFrame::px(double x) const {
  const double v = log_x ? std::log10(x) : x;
  return left + (right - left) * (v - x0) / (x1 - x0);
}

double PlotFrame::py(double y) const {
  const double v = log_y ? std::log10(y) : y;
  return bottom - (bottom - top) * (v - y0) / (y1 - y0);
}

PlotFrame frame_for(const std::vector<Series>& series, const FigureStyle& style) {
  Range rx, ry;
  std::size_t count = 0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      rx.add(s.x[i]);
      ry.add(s.y[i]);
      ++count;
    }
  }
  if (count == 0) throw EmptyData("figure has no finite data points");
  PlotFrame f;
  finish_axis(rx, style.log_x, f.log_x, f.x0, f.x1);
  finish_axis(ry, style.log_y, f.log_y, f.y0, f.y1);
  f.left = 80;
  f.right = style.width - 30;
  f.top = 40;
  f.bottom = style.height - 60;
  return f;
}

std::string emit_figure(const std::vector<Series>& series, const FigureStyle& style) {
  const PlotFrame f = frame_for(series, style);
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(style.width) + "\" height=\"" +
       std::to_string(style.height) + "\" viewBox=\"0 0 " + std::to_string(style.width) + " " +
       std::to_string(style.height) + "\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<rect x=\"" + fmt(f.left) + "\" y=\"" + fmt(f.top) + "\" width=\"" + fmt(f.right - f.left) + "\" height=\"" +
       fmt(f.bottom - f.top) + "\" fill=\"none\" stroke=\"black\"/>\n";

  auto ticks = [](double a, double b, bool lg) {
    std::vector<double> t;
    if (lg) {
      const int step = std::max(1, static_cast<int>(std::ceil((b - a) / 8.0)));
      for (int e = static_cast<int>(a); e <= static_cast<int>(b); e += step) t.push_back(std::pow(10.0, e));
    } else {
      for (int i = 0; i <= 5; ++i) t.push_back(a + (b - a) * i / 5.0);
    }
    return t;
  };
  auto label = [](double v, bool lg) {
    char b[32];
    if (lg) std::snprintf(b, sizeof b, "1e%d", static_cast<int>(std::lround(std::log10(v))));
    else std::snprintf(b, sizeof b, "%.3g", v);
    return std::string(b);
  };
  for (double t : ticks(f.x0, f.x1, f.log_x)) {
    const double x = f.px(t);
    o += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(f.bottom) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(f.bottom + 5) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(f.bottom + 20) + "\" font-size=\"12\" text-anchor=\"middle\">" +
         label(t, f.log_x) + "</text>\n";
  }
  for (double t : ticks(f.y0, f.y1, f.log_y)) {
    const double y = f.py(t);
    o += "<line x1=\"" + fmt(f.left - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(f.left) + "\" y2=\"" + fmt(y) +
         "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt(f.left - 8) + "\" y=\"" + fmt(y + 4) + "\" font-size=\"12\" text-anchor=\"end\">" +
         label(t, f.log_y) + "</text>\n";
  }
  if (!style.title.empty())
    o += "<text x=\"" + fmt(0.5 * (f.left + f.right)) + "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">" +
         escape(style.title) + "</text>\n";
  if (!style.xlabel.empty())
    o += "<text x=\"" + fmt(0.5 * (f.left + f.right)) + "\" y=\"" + fmt(style.height - 18.0) +
         "\" font-size=\"13\" text-anchor=\"middle\">" + escape(style.xlabel) + "</text>\n";
  if (!style.ylabel.empty())
    o += "<text x=\"18\" y=\"" + fmt(0.5 * (f.top + f.bottom)) + "\" font-size=\"13\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 18 " + fmt(0.5 * (f.top + f.bottom)) + ")\">" + escape(style.ylabel) + "</text>\n";

  std::size_t k = 0;
  for (const auto& s : series) {
    const std::string color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const bool ok = std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && (!f.log_x || s.x[i] > 0) &&
                      (!f.log_y || s.y[i] > 0);
      if (ok) pts.emplace_back(f.px(s.x[i]), f.py(s.y[i]));
    }
    const bool markers = s.markers || pts.size() == 1;
    if (s.line && pts.size() > 1) {
      o += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) o += (i ? " " : "") + fmt(pts[i].first) + "," + fmt(pts[i].second);
      o += "\"/>\n";
    }
    if (markers) {
      for (const auto& [x, y] : pts)
        o += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    if (!s.label.empty()) {
      const double ly = f.top + 16.0 + 16.0 * k;
      o += "<line x1=\"" + fmt(f.right - 150) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" + fmt(f.right - 130) + "\" y2=\"" +
           fmt(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
      o += "<text x=\"" + fmt(f.right - 125) + "\" y=\"" + fmt(ly) + "\" font-size=\"12\">" + escape(s.label) +
           "</text>\n";
    }
    ++k;
  }
  o += "</svg>\n";
  return o;
}

std::string emit_figure(const SweepResult& sweep, const std::vector<double>& envelope, const FigureStyle& style) {
  Series m{"measured", {}, {}, true, false};
  for (const auto& s : sweep.samples) {
    m.x.push_back(s.mu);
    m.y.push_back(s.norm);
  }
  std::vector<Series> all{m};
  if (!envelope.empty()) {
    if (envelope.size() != sweep.samples.size()) throw InvalidArgument("envelope length must match the sweep");
    all.push_back(Series{"envelope", m.x, envelope, true, false});
  }
  return emit_figure(all, style);
}

std::string emit_figure(const PropagatorTrace& trace, const FigureStyle& style) {
  std::vector<Series> all{Series{"|Q e^{tL} Q|", trace.times, trace.q_norms, true, true}};
  if (!trace.p_norms.empty()) all.push_back(Series{"|P e^{tL} Q|", trace.times, trace.p_norms, true, true});
  FigureStyle st = style;
  if (!st.log_x) st.log_x = false;
  if (!st.log_y) st.log_y = true;
  return emit_figure(all, st);
}

}  // namespace pslab
