#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocspace/wav.hpp"

namespace vocspace {

enum class VocalClass { CHNSP, CHNNSP, FAN, MAN, OTHER };

std::string_view to_string(VocalClass c);
// Unknown labels map to OTHER.
VocalClass parse_class(std::string_view label);
// Strict variant for user-supplied class lists; nullopt on unknown tokens.
std::optional<VocalClass> parse_class_token(std::string_view token);

struct SegmentAnnotation {
  std::string recording_id;
  std::string infant_id;
  int age_months = 0;
  std::int64_t onset_ms = 0;
  std::int64_t offset_ms = 0;
  VocalClass label = VocalClass::OTHER;

  std::int64_t duration_ms() const { return offset_ms - onset_ms; }
  friend bool operator==(const SegmentAnnotation&, const SegmentAnnotation&) = default;
};

// Metadata carried with every derived per-clip record (features, embedding
// rows).
struct ClipInfo {
  std::string clip_id;
  std::string recording_id;
  std::string infant_id;
  int age_months = 0;
  VocalClass label = VocalClass::OTHER;

  friend bool operator==(const ClipInfo&, const ClipInfo&) = default;
};

struct Clip {
  SegmentAnnotation annotation;
  std::vector<double> samples;
  int sample_rate_hz = 0;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  std::string clip_id() const;
  ClipInfo info() const;
};

// Clip ids sort in recording, then time order: <recording>_<onset ms, 10
// digits>_<offset ms, 10 digits>.
std::string make_clip_id(const SegmentAnnotation& a);

inline constexpr std::string_view kAnnotationHeader =
    "recording_id,infant_id,age_months,onset_ms,offset_ms,class";

std::vector<SegmentAnnotation> parse_annotations(std::istream& in);
std::vector<SegmentAnnotation> parse_annotations(std::string_view text);
std::string serialize_annotations(std::span<const SegmentAnnotation> annotations);

/// Inclusive duration window applied when slicing.
struct DurationWindow {
  std::int64_t min_ms = 600;
  std::int64_t max_ms = 12000;
};

struct SliceResult {
  std::vector<Clip> clips;
  std::size_t dropped_short = 0;
  std::size_t dropped_long = 0;
  std::size_t dropped_other = 0;

  std::size_t dropped() const { return dropped_short + dropped_long + dropped_other; }
};

// Slices audio[onset, offset) for each annotation. Sample positions are
// floor(onset_ms * fs / 1000); the clip length is round(duration_ms * fs /
// 1000). OTHER-class and out-of-window annotations are dropped and counted.
// Throws InputError when an interval runs past the end of the audio.
SliceResult slice_clips(const WavAudio& audio,
                        std::span<const SegmentAnnotation> annotations,
                        DurationWindow window = {});

using CorpusSummary = std::map<std::pair<int, VocalClass>, std::size_t>;

CorpusSummary summarize(std::span<const Clip> clips);
CorpusSummary summarize(std::span<const ClipInfo> clips);

// Clip manifest CSV.
struct ManifestRow {
  ClipInfo info;
  std::int64_t duration_ms = 0;
};

inline constexpr std::string_view kManifestHeader =
    "clip_id,recording_id,infant_id,age_months,class,duration_ms";

std::string serialize_manifest(std::span<const ManifestRow> rows);
std::vector<ManifestRow> parse_manifest(std::istream& in, std::string_view origin);

}  // namespace vocspace
