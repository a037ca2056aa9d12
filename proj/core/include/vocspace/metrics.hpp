#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocspace/embedding.hpp"

namespace vocspace {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

// All of these throw InputError on empty input.
Point2 centroid(std::span<const Point2> points);
double centroid_distance(std::span<const Point2> a, std::span<const Point2> b);
double mean_dispersion(std::span<const Point2> points);

struct BoundingBox {
  double min_x = 0.0;
  double max_x = 0.0;
  double min_y = 0.0;
  double max_y = 0.0;

  static BoundingBox of(std::span<const Point2> points);
  bool contains(Point2 p) const;
};

/// B x B occupancy over a box. Cell index is floor((v - min) / (max - min) * B)
/// per axis, with points on the max edge placed in the last cell. A zero-width
/// axis puts every point in cell 0.
struct EntropyGrid {
  std::size_t side = 32;
  BoundingBox box;
  std::vector<std::size_t> counts;  // side * side, row-major by y then x

  EntropyGrid(std::size_t side, BoundingBox box);
  std::size_t cell_of(Point2 p) const;
  void add(Point2 p);  // throws InputError outside the box
  std::size_t total() const;
  double entropy_bits() const;  // -sum p log2 p over occupied cells
};

double shannon_entropy(std::span<const Point2> points, const BoundingBox& box,
                       std::size_t side = 32);

inline constexpr std::size_t kDefaultGridSide = 32;

struct RecordingMeasures {
  std::string recording_id;
  std::string infant_id;
  int age_months = 0;
  std::size_t n_chnsp = 0;
  std::size_t n_fan = 0;
  std::size_t n_man = 0;
  std::optional<Point2> centroid_chnsp;
  std::optional<Point2> centroid_fan;
  std::optional<Point2> centroid_man;
  std::optional<double> centroid_distance;  // needs >= 1 CHNSP and >= 1 FAN
  std::optional<double> mean_dispersion;    // needs >= 1 CHNSP
  std::optional<double> entropy_bits;       // needs >= 1 CHNSP
};

/// One row per recording, ordered by recording_id. The entropy grid spans the
/// bounding box of the whole embedding so entropies are comparable across
/// recordings.
std::vector<RecordingMeasures> measures_per_recording(const Embedding& embedding,
                                                      std::size_t grid_side = kDefaultGridSide);
// Same, with the entropy grid over a caller-supplied box that must contain
// every point.
std::vector<RecordingMeasures> measures_per_recording(const Embedding& embedding,
                                                      std::size_t grid_side,
                                                      const BoundingBox& box);

inline constexpr std::string_view kMeasuresHeader =
    "recording_id,infant_id,age_months,n_chnsp,n_fan,centroid_distance,mean_dispersion,"
    "entropy_bits";

// Missing values are written as empty fields.
std::string serialize_measures(std::span<const RecordingMeasures> rows);
std::vector<RecordingMeasures> parse_measures(std::istream& in, std::string_view origin);

// "recording_id,class,n,x,y" for every class centroid that exists.
std::string serialize_centroids(std::span<const RecordingMeasures> rows);

}  // namespace vocspace
