#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "vocspace/corpus.hpp"
#include "vocspace/features.hpp"
#include "vocspace/metrics.hpp"
#include "vocspace/tsne.hpp"
#include "vocspace/umap.hpp"

namespace vocspace {

enum class EmbedMethod { Umap, Tsne };

struct PipelineConfig {
  std::filesystem::path audio_dir;
  std::filesystem::path annotations;
  std::filesystem::path out_dir = ".";
  FrameParams frame;
  DurationWindow window;
  UmapParams umap;
  TsneParams tsne;
  EmbedMethod method = EmbedMethod::Umap;
  std::vector<VocalClass> classes = {VocalClass::CHNSP, VocalClass::FAN, VocalClass::MAN};
  std::size_t grid_side = kDefaultGridSide;
  bool standardize = true;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
};

/// Sets one option by key. Throws InputError on unknown keys or bad values.
///
/// Keys: audio_dir, annotations, out_dir, seed, threads, standardize,
/// grid_side, method, classes, min_clip_ms, max_clip_ms, frame_ms, hop_ms,
/// n_mel_bands, n_cepstra, pre_emphasis, delta_window, n_neighbors,
/// min_dist, umap_epochs, umap_learning_rate, negative_samples, umap_init,
/// umap_dedup, umap_parallel, perplexity, tsne_epochs, tsne_learning_rate,
/// early_exaggeration.
void set_option(PipelineConfig& config, std::string_view key, std::string_view value);

// Flat "key = value" lines; '#' starts a comment, blank lines are skipped.
void apply_config(PipelineConfig& config, std::istream& in, std::string_view origin);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

// Comma-separated class tokens, e.g. "CHNSP,FAN,MAN".
std::vector<VocalClass> parse_class_list(std::string_view list);
std::string_view to_string(EmbedMethod m);

/// Every option except out_dir as sorted key=value lines.
std::string canonical_config(const PipelineConfig& config);
/// 64-bit FNV-1a of canonical_config, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

}  // namespace vocspace
