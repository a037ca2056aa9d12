#include "vocspace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"

namespace vocspace {
namespace {

void require_points(std::span<const Point2> points, std::string_view what) {
  if (points.empty()) throw InputError(std::string(what) + " of an empty point set");
}

std::size_t bin(double v, double lo, double hi, std::size_t side) {
  if (!(hi > lo)) return 0;
  const double t = std::floor((v - lo) / (hi - lo) * static_cast<double>(side));
  if (t <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(t), side - 1);
}

std::string optional_field(const std::optional<double>& v) {
  return v ? csv::format(*v) : std::string();
}

std::optional<double> parse_optional(std::string_view field, std::string_view what,
                                     std::size_t line) {
  if (field.empty()) return std::nullopt;
  return csv::parse_double(field, what, line);
}

}  // namespace

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point2 centroid(std::span<const Point2> points) {
  require_points(points, "centroid");
  Point2 c;
  for (const auto& p : points) {
    c.x += p.x;
    c.y += p.y;
  }
  const auto n = static_cast<double>(points.size());
  return {c.x / n, c.y / n};
}

double centroid_distance(std::span<const Point2> a, std::span<const Point2> b) {
  return distance(centroid(a), centroid(b));
}

double mean_dispersion(std::span<const Point2> points) {
  const auto c = centroid(points);
  double acc = 0.0;
  for (const auto& p : points) acc += distance(p, c);
  return acc / static_cast<double>(points.size());
}

BoundingBox BoundingBox::of(std::span<const Point2> points) {
  require_points(points, "bounding box");
  BoundingBox b{points[0].x, points[0].x, points[0].y, points[0].y};
  for (const auto& p : points) {
    b.min_x = std::min(b.min_x, p.x);
    b.max_x = std::max(b.max_x, p.x);
    b.min_y = std::min(b.min_y, p.y);
    b.max_y = std::max(b.max_y, p.y);
  }
  return b;
}

bool BoundingBox::contains(Point2 p) const {
  return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
}

EntropyGrid::EntropyGrid(std::size_t side_, BoundingBox box_)
    : side(side_), box(box_), counts(side_ * side_, 0) {
  if (side == 0) throw InputError("grid side must be positive");
}

std::size_t EntropyGrid::cell_of(Point2 p) const {
  return bin(p.y, box.min_y, box.max_y, side) * side + bin(p.x, box.min_x, box.max_x, side);
}

void EntropyGrid::add(Point2 p) {
  if (!box.contains(p)) throw InputError("point outside the entropy grid box");
  ++counts[cell_of(p)];
}

std::size_t EntropyGrid::total() const {
  std::size_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

double EntropyGrid::entropy_bits() const {
  const auto n = static_cast<double>(total());
  if (n == 0.0) throw InputError("entropy of an empty grid");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return std::max(h, 0.0);
}

double shannon_entropy(std::span<const Point2> points, const BoundingBox& box, std::size_t side) {
  require_points(points, "entropy");
  EntropyGrid grid(side, box);
  for (const auto& p : points) grid.add(p);
  return grid.entropy_bits();
}

namespace {

std::vector<RecordingMeasures> measures_impl(const Embedding& embedding, std::size_t grid_side,
                                             const BoundingBox* fixed_box) {
  if (embedding.coords.rows() != embedding.size()) {
    throw InputError("embedding coordinates do not match its metadata");
  }
  struct Groups {
    RecordingMeasures row;
    std::vector<Point2> chnsp, fan, man;
  };
  std::map<std::string, Groups> by_recording;
  std::vector<Point2> all;
  all.reserve(embedding.size());
  for (std::size_t i = 0; i < embedding.size(); ++i) {
    const auto& info = embedding.info[i];
    const Point2 p{embedding.coords(i, 0), embedding.coords(i, 1)};
    all.push_back(p);
    auto& g = by_recording[info.recording_id];
    if (g.row.recording_id.empty()) {
      g.row.recording_id = info.recording_id;
      g.row.infant_id = info.infant_id;
      g.row.age_months = info.age_months;
    } else if (g.row.infant_id != info.infant_id || g.row.age_months != info.age_months) {
      throw InputError("recording " + info.recording_id + " has inconsistent infant or age");
    }
    switch (info.label) {
      case VocalClass::CHNSP: g.chnsp.push_back(p); break;
      case VocalClass::FAN: g.fan.push_back(p); break;
      case VocalClass::MAN: g.man.push_back(p); break;
      default: break;
    }
  }
  std::vector<RecordingMeasures> out;
  if (all.empty()) return out;
  const auto box = fixed_box ? *fixed_box : BoundingBox::of(all);
  for (auto& [id, g] : by_recording) {
    auto& r = g.row;
    r.n_chnsp = g.chnsp.size();
    r.n_fan = g.fan.size();
    r.n_man = g.man.size();
    if (!g.chnsp.empty()) {
      r.centroid_chnsp = centroid(g.chnsp);
      r.mean_dispersion = mean_dispersion(g.chnsp);
      r.entropy_bits = shannon_entropy(g.chnsp, box, grid_side);
    }
    if (!g.fan.empty()) r.centroid_fan = centroid(g.fan);
    if (!g.man.empty()) r.centroid_man = centroid(g.man);
    if (r.centroid_chnsp && r.centroid_fan) {
      r.centroid_distance = distance(*r.centroid_chnsp, *r.centroid_fan);
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<RecordingMeasures> measures_per_recording(const Embedding& embedding,
                                                      std::size_t grid_side) {
  return measures_impl(embedding, grid_side, nullptr);
}

std::vector<RecordingMeasures> measures_per_recording(const Embedding& embedding,
                                                      std::size_t grid_side,
                                                      const BoundingBox& box) {
  return measures_impl(embedding, grid_side, &box);
}

std::string serialize_measures(std::span<const RecordingMeasures> rows) {
  std::string out(kMeasuresHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.recording_id + ',' + r.infant_id + ',' + std::to_string(r.age_months) + ',' +
           std::to_string(r.n_chnsp) + ',' + std::to_string(r.n_fan) + ',' +
           optional_field(r.centroid_distance) + ',' + optional_field(r.mean_dispersion) + ',' +
           optional_field(r.entropy_bits) + '\n';
  }
  return out;
}

std::vector<RecordingMeasures> parse_measures(std::istream& in, std::string_view origin) {
  const auto table = csv::Table::parse(in, std::string(origin));
  const auto c_rec = table.column("recording_id");
  const auto c_inf = table.column("infant_id");
  const auto c_age = table.column("age_months");
  const auto c_nc = table.column("n_chnsp");
  const auto c_nf = table.column("n_fan");
  const auto c_dist = table.column("centroid_distance");
  const auto c_disp = table.column("mean_dispersion");
  const auto c_ent = table.column("entropy_bits");
  std::vector<RecordingMeasures> rows;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& f = table.row(i);
    const auto line = table.line_of(i);
    RecordingMeasures r;
    r.recording_id = f[c_rec];
    r.infant_id = f[c_inf];
    r.age_months = static_cast<int>(csv::parse_int(f[c_age], "age_months", line));
    const auto nc = csv::parse_int(f[c_nc], "n_chnsp", line);
    const auto nf = csv::parse_int(f[c_nf], "n_fan", line);
    if (nc < 0 || nf < 0) throw InputError("negative count, line " + std::to_string(line));
    r.n_chnsp = static_cast<std::size_t>(nc);
    r.n_fan = static_cast<std::size_t>(nf);
    r.centroid_distance = parse_optional(f[c_dist], "centroid_distance", line);
    r.mean_dispersion = parse_optional(f[c_disp], "mean_dispersion", line);
    r.entropy_bits = parse_optional(f[c_ent], "entropy_bits", line);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string serialize_centroids(std::span<const RecordingMeasures> rows) {
  std::string out = "recording_id,class,n,x,y\n";
  auto emit = [&](const RecordingMeasures& r, VocalClass c, std::size_t n,
                  const std::optional<Point2>& p) {
    if (!p) return;
    out += r.recording_id + ',' + std::string(to_string(c)) + ',' + std::to_string(n) + ',' +
           csv::format(p->x) + ',' + csv::format(p->y) + '\n';
  };
  for (const auto& r : rows) {
    emit(r, VocalClass::CHNSP, r.n_chnsp, r.centroid_chnsp);
    emit(r, VocalClass::FAN, r.n_fan, r.centroid_fan);
    emit(r, VocalClass::MAN, r.n_man, r.centroid_man);
  }
  return out;
}

}  // namespace vocspace
