#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vocspace/config.hpp"
#include "vocspace/corpus.hpp"
#include "vocspace/stats.hpp"

namespace vocspace {

/// File layout under the output directory. Each CSV and report gets a
/// "<name>.meta" sidecar with the command, config hash and seed.
struct Workspace {
  std::filesystem::path root;

  std::filesystem::path manifest() const { return root / "manifest.csv"; }
  std::filesystem::path clips_dir() const { return root / "clips"; }
  std::filesystem::path clip(const std::string& clip_id) const {
    return clips_dir() / (clip_id + ".wav");
  }
  std::filesystem::path features() const { return root / "features.csv"; }
  std::filesystem::path embedding() const { return root / "embedding.csv"; }
  std::filesystem::path measures() const { return root / "measures.csv"; }
  std::filesystem::path centroids() const { return root / "centroids.csv"; }
  std::filesystem::path stats(Measure m) const {
    return root / ("stats_" + std::string(to_string(m)) + ".txt");
  }
  std::filesystem::path validation() const { return root / "validation.csv"; }
  std::filesystem::path validated_measures() const { return root / "measures_validated.csv"; }
  std::filesystem::path label_compare() const { return root / "label_compare.csv"; }
  std::filesystem::path validation_report() const { return root / "validation.txt"; }
};

std::filesystem::path sidecar_path(const std::filesystem::path& artifact);

using SidecarFields = std::vector<std::pair<std::string, std::string>>;
void write_sidecar(const std::filesystem::path& artifact, std::string_view command,
                   const PipelineConfig& config, const SidecarFields& extra = {});
// Key=value pairs of a sidecar, in file order.
std::map<std::string, std::string> read_sidecar(const std::filesystem::path& artifact);

enum class SynthKind { TwoTone, InvertedU, Flat };
SynthKind parse_synth_kind(std::string_view name);  // two-tone | inverted-u | flat

struct SynthReport {
  std::size_t recordings = 0;
  std::size_t annotations = 0;
};

/// Writes <dir>/audio/<recording>.wav and <dir>/annotations.csv.
SynthReport run_synth(const std::filesystem::path& dir, SynthKind kind, std::size_t n_infants,
                      std::size_t clips_per_class, std::uint64_t seed);

struct IngestReport {
  std::size_t clips = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_long = 0;
  std::size_t dropped_other = 0;
  CorpusSummary summary;
};

/// Slices every annotated recording (audio_dir/<recording_id>.wav) into
/// clips/ and writes the manifest.
IngestReport run_ingest(const PipelineConfig& config);

struct FeaturesReport {
  std::size_t rows = 0;
  std::vector<std::string> warnings;  // one per skipped clip
};

FeaturesReport run_features(const PipelineConfig& config);

struct EmbedReport {
  std::size_t rows = 0;
  std::size_t unique_points = 0;
  bool init_fell_back = false;
};

/// Embeds the feature rows whose class is in config.classes.
EmbedReport run_embed(const PipelineConfig& config);

std::vector<RecordingMeasures> run_measure(const PipelineConfig& config);

LmmFit run_stats(const PipelineConfig& config, Measure measure);

enum class PlotKind { Space, Trend, LabelCompare };
PlotKind parse_plot_kind(std::string_view name);  // space | trend | label_compare

struct PlotRequest {
  PlotKind kind = PlotKind::Space;
  Measure measure = Measure::Dispersion;  // trend only
  bool centroids = false;                 // space only
  std::optional<std::filesystem::path> output;  // default <out_dir>/plot_<kind>.svg
};

std::filesystem::path run_plot(const PipelineConfig& config, const PlotRequest& request);

struct ValidateReport {
  std::size_t voted_clips = 0;
  std::size_t validated = 0;
  std::size_t excluded = 0;
  std::size_t chnsp_without_votes = 0;  // dropped with the excluded ones
  std::size_t recordings_compared = 0;
  std::optional<double> dispersion_r;  // needs >= 3 recordings
};

/// Keeps a CHNSP clip only when its votes validate it, recomputes the
/// measures on the same entropy box, and compares mean dispersion per
/// recording against the unfiltered measures.
ValidateReport run_validate(const PipelineConfig& config, const std::filesystem::path& votes);

}  // namespace vocspace
