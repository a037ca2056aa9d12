#include "vocspace/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "vocspace/error.hpp"
#include "vocspace/stats.hpp"

namespace vocspace {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(std::string_view s) {
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

void require_finite(std::span<const double> v, std::string_view what) {
  for (double a : v) {
    if (!std::isfinite(a)) throw InputError(std::string(what) + " contains a non-finite value");
  }
}

std::string open_svg(const PlotFrame& f, std::string_view title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) +
                  "\" height=\"" + num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + ' ' +
                  num(f.height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text class=\"title\" x=\"" + num(f.width / 2) + "\" y=\"" + num(f.margin / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  return s;
}

std::string axes(const PlotFrame& f, std::string_view x_label, std::string_view y_label) {
  const double l = f.margin, r = f.width - f.margin, t = f.margin, b = f.height - f.margin;
  std::string s = "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  s += "<rect x=\"" + num(l) + "\" y=\"" + num(t) + "\" width=\"" + num(r - l) +
       "\" height=\"" + num(b - t) + "\"/>\n</g>\n";
  s += "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"10\">\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = f.x_lo + (f.x_hi - f.x_lo) * i / kTicks;
    const double yv = f.y_lo + (f.y_hi - f.y_lo) * i / kTicks;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(b + 14) + "\" text-anchor=\"middle\">" +
         tick_label(xv) + "</text>\n";
    s += "<text x=\"" + num(l - 4) + "\" y=\"" + num(f.py(yv) + 3) + "\" text-anchor=\"end\">" +
         tick_label(yv) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text class=\"x-label\" x=\"" + num((l + r) / 2) + "\" y=\"" + num(f.height - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       escape(x_label) + "</text>\n";
  s += "<text class=\"y-label\" transform=\"translate(14," + num((t + b) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
       escape(y_label) + "</text>\n";
  return s;
}

std::string star(double cx, double cy, double r, std::string_view fill) {
  std::string pts;
  for (int k = 0; k < 10; ++k) {
    const double rad = k % 2 == 0 ? r : r * 0.45;
    const double a = -std::numbers::pi / 2 + k * std::numbers::pi / 5;
    if (!pts.empty()) pts += ' ';
    pts += num(cx + rad * std::cos(a)) + ',' + num(cy + rad * std::sin(a));
  }
  return "<polygon class=\"star\" data-cx=\"" + num(cx) + "\" data-cy=\"" + num(cy) +
         "\" points=\"" + pts + "\" fill=\"" + std::string(fill) + "\"/>\n";
}

}  // namespace

std::string_view class_color(VocalClass c) {
  switch (c) {
    case VocalClass::CHNSP: return "blue";
    case VocalClass::FAN: return "red";
    case VocalClass::MAN: return "yellow";
    case VocalClass::CHNNSP: return "gray";
    case VocalClass::OTHER: return "black";
  }
  return "black";
}

PlotFrame PlotFrame::fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.empty() || ys.empty()) throw InputError("nothing to plot");
  PlotFrame f;
  auto range = [](std::span<const double> v, double& lo, double& hi) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    lo = *mn;
    hi = *mx;
    if (hi - lo <= 0.0) {
      lo -= 1.0;
      hi += 1.0;
    } else {
      const double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  };
  range(xs, f.x_lo, f.x_hi);
  range(ys, f.y_lo, f.y_hi);
  return f;
}

double PlotFrame::px(double x) const {
  return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin);
}

double PlotFrame::py(double y) const {
  return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin);
}

std::string plot_space(const Embedding& embedding, std::span<const RecordingMeasures> measures,
                       const SpacePlotOptions& options) {
  if (embedding.size() == 0) throw InputError("empty embedding");
  std::vector<double> xs(embedding.size()), ys(embedding.size());
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    xs[i] = embedding.coords(i, 0);
    ys[i] = embedding.coords(i, 1);
  }
  require_finite(xs, "embedding");
  require_finite(ys, "embedding");
  const auto f = PlotFrame::fit(xs, ys);
  std::string s = open_svg(f, options.title);
  s += axes(f, "dimension 1", "dimension 2");
  s += "<g class=\"points\" stroke=\"none\" fill-opacity=\"0.6\">\n";
  std::set<VocalClass> present;
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    const auto c = embedding.info[i].label;
    present.insert(c);
    s += "<circle class=\"point\" data-class=\"" + std::string(to_string(c)) + "\" cx=\"" +
         num(f.px(xs[i])) + "\" cy=\"" + num(f.py(ys[i])) + "\" r=\"2.5\" fill=\"" +
         std::string(class_color(c)) + "\"/>\n";
  }
  s += "</g>\n";
  if (options.show_centroids) {
    s += "<g class=\"centroids\" stroke=\"black\" stroke-width=\"1\">\n";
    for (const auto& m : measures) {
      const std::pair<VocalClass, const std::optional<Point2>*> cs[] = {
          {VocalClass::CHNSP, &m.centroid_chnsp},
          {VocalClass::FAN, &m.centroid_fan},
          {VocalClass::MAN, &m.centroid_man}};
      for (const auto& [c, p] : cs) {
        if (!*p) continue;
        s += "<rect class=\"centroid\" data-class=\"" + std::string(to_string(c)) + "\" x=\"" +
             num(f.px((*p)->x) - 4) + "\" y=\"" + num(f.py((*p)->y) - 4) +
             "\" width=\"8\" height=\"8\" fill=\"" + std::string(class_color(c)) + "\"/>\n";
      }
    }
    s += "</g>\n";
  }
  s += "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  double y = f.margin + 14;
  for (auto c : present) {
    const double x = f.width - f.margin - 70;
    s += "<g class=\"legend-entry\"><circle cx=\"" + num(x) + "\" cy=\"" + num(y - 4) +
         "\" r=\"4\" fill=\"" + std::string(class_color(c)) + "\"/><text x=\"" + num(x + 9) +
         "\" y=\"" + num(y) + "\">" + std::string(to_string(c)) + "</text></g>\n";
    y += 16;
  }
  s += "</g>\n</svg>\n";
  return s;
}

std::string plot_trend(std::span<const double> ages, std::span<const double> values,
                       std::string_view measure_label) {
  if (ages.size() != values.size()) throw InputError("ages and values differ in length");
  if (ages.empty()) throw InputError("nothing to plot");
  require_finite(ages, "ages");
  require_finite(values, "values");
  const auto coeff = poly_trend(ages, values, 2);
  const auto [a_lo, a_hi] = std::minmax_element(ages.begin(), ages.end());
  constexpr int kSamples = 400;
  std::vector<double> cx(kSamples + 1), cy(kSamples + 1);
  for (int i = 0; i <= kSamples; ++i) {
    cx[std::size_t(i)] = *a_lo + (*a_hi - *a_lo) * i / kSamples;
    cy[std::size_t(i)] = poly_eval(coeff, cx[std::size_t(i)]);
  }
  std::vector<double> all_y(values.begin(), values.end());
  all_y.insert(all_y.end(), cy.begin(), cy.end());
  const auto f = PlotFrame::fit(ages, all_y);
  std::string s = open_svg(f, std::string(measure_label) + " by age");
  s += axes(f, "age (months)", measure_label);
  s += "<g class=\"points\" stroke=\"none\">\n";
  for (std::size_t i = 0; i < ages.size(); ++i) {
    s += star(f.px(ages[i]), f.py(values[i]), 6.0, "steelblue");
  }
  s += "</g>\n<polyline class=\"trend\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" "
       "points=\"";
  for (int i = 0; i <= kSamples; ++i) {
    if (i) s += ' ';
    s += num(f.px(cx[std::size_t(i)])) + ',' + num(f.py(cy[std::size_t(i)]));
  }
  s += "\"/>\n</svg>\n";
  return s;
}

std::string plot_label_compare(std::span<const double> automated,
                               std::span<const double> validated) {
  if (automated.size() != validated.size()) {
    throw InputError("automated and validated values differ in length");
  }
  if (automated.empty()) throw InputError("nothing to plot");
  require_finite(automated, "automated values");
  require_finite(validated, "validated values");
  std::vector<double> both(automated.begin(), automated.end());
  both.insert(both.end(), validated.begin(), validated.end());
  const auto f = PlotFrame::fit(both, both);
  std::string s = open_svg(f, "Automated vs validated labels");
  s += axes(f, "automated labels", "validated labels");
  s += "<line class=\"identity\" x1=\"" + num(f.px(f.x_lo)) + "\" y1=\"" + num(f.py(f.y_lo)) +
       "\" x2=\"" + num(f.px(f.x_hi)) + "\" y2=\"" + num(f.py(f.y_hi)) +
       "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  s += "<g class=\"points\" stroke=\"none\">\n";
  for (std::size_t i = 0; i < automated.size(); ++i) {
    s += "<circle class=\"point\" cx=\"" + num(f.px(automated[i])) + "\" cy=\"" +
         num(f.py(validated[i])) + "\" r=\"3.5\" fill=\"" +
         std::string(class_color(VocalClass::CHNSP)) + "\"/>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

}  // namespace vocspace
