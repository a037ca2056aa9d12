#pragma once

#include <span>
#include <string>
#include <string_view>

#include "vocspace/corpus.hpp"
#include "vocspace/embedding.hpp"
#include "vocspace/metrics.hpp"

namespace vocspace {

std::string_view class_color(VocalClass c);  // CHNSP blue, FAN red, MAN yellow, CHNNSP gray

/// Linear map from a data rectangle to the plotting area of an SVG canvas.
/// Pixel y grows downward.
struct PlotFrame {
  double width = 640.0;
  double height = 480.0;
  double margin = 56.0;
  double x_lo = 0.0, x_hi = 1.0;
  double y_lo = 0.0, y_hi = 1.0;

  // Range of the data padded by 5% on each side; a zero-width range becomes
  // [v - 1, v + 1].
  static PlotFrame fit(std::span<const double> xs, std::span<const double> ys);

  double px(double x) const;
  double py(double y) const;
};

struct SpacePlotOptions {
  std::string title = "Vocalization space";
  bool show_centroids = false;
};

/// Scatter of embedding points colored by class, one legend entry per class
/// present. Centroid markers come from `measures` when requested.
std::string plot_space(const Embedding& embedding, std::span<const RecordingMeasures> measures,
                       const SpacePlotOptions& options = {});

/// Stars at (age, value) with a degree-2 least-squares curve drawn over the
/// age range.
std::string plot_trend(std::span<const double> ages, std::span<const double> values,
                       std::string_view measure_label);

/// Automated vs validated values on a shared square range with a dashed
/// identity line.
std::string plot_label_compare(std::span<const double> automated,
                               std::span<const double> validated);

}  // namespace vocspace
