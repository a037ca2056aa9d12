#include "vocspace/corpus.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"

namespace vocspace {
namespace {

constexpr std::array<std::pair<std::string_view, VocalClass>, 5> kClassNames{{
    {"CHNSP", VocalClass::CHNSP},
    {"CHNNSP", VocalClass::CHNNSP},
    {"FAN", VocalClass::FAN},
    {"MAN", VocalClass::MAN},
    {"OTHER", VocalClass::OTHER},
}};

std::string error_at(std::string_view msg, std::size_t line_no) {
  return std::string(msg) + ", line " + std::to_string(line_no);
}

}  // namespace

std::string_view to_string(VocalClass c) {
  for (const auto& [name, value] : kClassNames) {
    if (value == c) return name;
  }
  return "OTHER";
}

VocalClass parse_class(std::string_view label) {
  return parse_class_token(label).value_or(VocalClass::OTHER);
}

std::optional<VocalClass> parse_class_token(std::string_view token) {
  for (const auto& [name, value] : kClassNames) {
    if (name == token) return value;
  }
  return std::nullopt;
}

std::string make_clip_id(const SegmentAnnotation& a) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "_%010lld_%010lld",
                static_cast<long long>(a.onset_ms), static_cast<long long>(a.offset_ms));
  return a.recording_id + buf;
}

std::string Clip::clip_id() const { return make_clip_id(annotation); }

ClipInfo Clip::info() const {
  return ClipInfo{clip_id(), annotation.recording_id, annotation.infant_id,
                  annotation.age_months, annotation.label};
}

std::vector<SegmentAnnotation> parse_annotations(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<SegmentAnnotation> out;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (!header_seen) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
      if (line != kAnnotationHeader) {
        throw InputError("annotation header must be '" + std::string(kAnnotationHeader) +
                         "', line " + std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 6) {
      throw InputError(error_at("expected 6 fields, got " + std::to_string(f.size()),
                                line_no));
    }
    SegmentAnnotation a;
    a.recording_id = std::string(f[0]);
    a.infant_id = std::string(f[1]);
    if (a.recording_id.empty() || a.infant_id.empty()) {
      throw InputError(error_at("empty recording_id or infant_id", line_no));
    }
    const auto age = csv::parse_int(f[2], "age_months", line_no);
    if (age <= 0) throw InputError(error_at("age_months must be positive", line_no));
    a.age_months = static_cast<int>(age);
    a.onset_ms = csv::parse_int(f[3], "onset_ms", line_no);
    a.offset_ms = csv::parse_int(f[4], "offset_ms", line_no);
    if (a.onset_ms < 0) throw InputError(error_at("onset must be non-negative", line_no));
    if (a.offset_ms <= a.onset_ms) {
      throw InputError(error_at("offset must exceed onset", line_no));
    }
    a.label = parse_class(f[5]);
    out.push_back(std::move(a));
  }
  if (!header_seen) throw InputError("annotation file is empty; header required");
  return out;
}

std::vector<SegmentAnnotation> parse_annotations(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_annotations(in);
}

std::string serialize_annotations(std::span<const SegmentAnnotation> annotations) {
  std::string out(kAnnotationHeader);
  out += '\n';
  for (const auto& a : annotations) {
    out += a.recording_id + ',' + a.infant_id + ',' + std::to_string(a.age_months) + ',' +
           std::to_string(a.onset_ms) + ',' + std::to_string(a.offset_ms) + ',' +
           std::string(to_string(a.label)) + '\n';
  }
  return out;
}

SliceResult slice_clips(const WavAudio& audio,
                        std::span<const SegmentAnnotation> annotations,
                        DurationWindow window) {
  if (audio.sample_rate_hz <= 0) throw InputError("audio has no sample rate");
  const auto fs = static_cast<std::int64_t>(audio.sample_rate_hz);
  const auto total = static_cast<std::int64_t>(audio.samples.size());
  SliceResult result;
  for (const auto& a : annotations) {
    const std::int64_t begin = a.onset_ms * fs / 1000;
    const auto length = static_cast<std::int64_t>(
        std::llround(static_cast<double>(a.duration_ms()) * static_cast<double>(fs) / 1000.0));
    if (begin + length > total) {
      throw InputError("annotation " + make_clip_id(a) + " [" + std::to_string(a.onset_ms) +
                       ", " + std::to_string(a.offset_ms) + ") ms exceeds audio length of " +
                       std::to_string(total * 1000 / fs) + " ms");
    }
    if (a.label == VocalClass::OTHER) {
      ++result.dropped_other;
      continue;
    }
    if (a.duration_ms() < window.min_ms) {
      ++result.dropped_short;
      continue;
    }
    if (a.duration_ms() > window.max_ms) {
      ++result.dropped_long;
      continue;
    }
    Clip clip;
    clip.annotation = a;
    clip.sample_rate_hz = audio.sample_rate_hz;
    clip.samples.assign(audio.samples.begin() + begin,
                        audio.samples.begin() + begin + length);
    result.clips.push_back(std::move(clip));
  }
  return result;
}

CorpusSummary summarize(std::span<const Clip> clips) {
  CorpusSummary s;
  for (const auto& c : clips) ++s[{c.annotation.age_months, c.annotation.label}];
  return s;
}

CorpusSummary summarize(std::span<const ClipInfo> clips) {
  CorpusSummary s;
  for (const auto& c : clips) ++s[{c.age_months, c.label}];
  return s;
}

std::string serialize_manifest(std::span<const ManifestRow> rows) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.info.clip_id + ',' + r.info.recording_id + ',' + r.info.infant_id + ',' +
           std::to_string(r.info.age_months) + ',' + std::string(to_string(r.info.label)) +
           ',' + std::to_string(r.duration_ms) + '\n';
  }
  return out;
}

std::vector<ManifestRow> parse_manifest(std::istream& in, std::string_view origin) {
  const auto table = csv::Table::parse(in, std::string(origin));
  const auto c_id = table.column("clip_id");
  const auto c_rec = table.column("recording_id");
  const auto c_inf = table.column("infant_id");
  const auto c_age = table.column("age_months");
  const auto c_cls = table.column("class");
  const auto c_dur = table.column("duration_ms");
  std::vector<ManifestRow> rows;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table.row(i);
    ManifestRow m;
    m.info.clip_id = r[c_id];
    m.info.recording_id = r[c_rec];
    m.info.infant_id = r[c_inf];
    m.info.age_months = static_cast<int>(csv::parse_int(r[c_age], "age_months", table.line_of(i)));
    m.info.label = parse_class(r[c_cls]);
    m.duration_ms = csv::parse_int(r[c_dur], "duration_ms", table.line_of(i));
    rows.push_back(std::move(m));
  }
  return rows;
}

}  // namespace vocspace
