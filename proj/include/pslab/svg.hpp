#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pslab/resolvent_lab.hpp"
#include "pslab/semigroup_lab.hpp"

namespace pslab {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;
  bool markers = false;
};

struct FigureStyle {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  int width = 720;
  int height = 480;
  /// Unset means automatic: logarithmic when the positive data spans at least
  /// two decades.
  std::optional<bool> log_x;
  std::optional<bool> log_y;
};

/// Data-to-pixel map of a figure.
struct PlotFrame {
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;  // data range (log10 if logarithmic)
  bool log_x = false, log_y = false;
  double left = 0, right = 0, top = 0, bottom = 0;  // pixel box

  double px(double x) const;
  double py(double y) const;
};

PlotFrame frame_for(const std::vector<Series>& series, const FigureStyle& style);

/// Deterministic SVG document; EmptyData when no series has a point.
std::string emit_figure(const std::vector<Series>& series, const FigureStyle& style);

/// Measured norms against the envelope (scaled by C_fit when given).
std::string emit_figure(const SweepResult& sweep, const std::vector<double>& envelope, const FigureStyle& style);
/// q_norms and, when present, p_norms against t on semilog axes.
std::string emit_figure(const PropagatorTrace& trace, const FigureStyle& style);

}  // namespace pslab
