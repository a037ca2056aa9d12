#include "vocspace/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "vocspace/csv.hpp"
#include "vocspace/embedding.hpp"
#include "vocspace/error.hpp"
#include "vocspace/features.hpp"
#include "vocspace/parallel.hpp"
#include "vocspace/svg_plot.hpp"
#include "vocspace/synth.hpp"
#include "vocspace/tsne.hpp"
#include "vocspace/umap.hpp"
#include "vocspace/wav.hpp"

namespace vocspace {
namespace {

namespace fs = std::filesystem;

std::istringstream open_text(const fs::path& path) {
  return std::istringstream(csv::read_file(path));
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw InputError(std::string(what) + " path is not set");
  if (!fs::is_regular_file(path)) {
    throw InputError(std::string(what) + " not found: " + path.string());
  }
}

Embedding load_embedding(const fs::path& path) {
  auto in = open_text(path);
  return parse_embedding(in, path.string());
}

std::vector<RecordingMeasures> load_measures(const fs::path& path) {
  auto in = open_text(path);
  return parse_measures(in, path.string());
}

}  // namespace

fs::path sidecar_path(const fs::path& artifact) {
  auto p = artifact;
  p += ".meta";
  return p;
}

void write_sidecar(const fs::path& artifact, std::string_view command,
                   const PipelineConfig& config, const SidecarFields& extra) {
  std::string out = "command=" + std::string(command) + '\n';
  out += "config_hash=" + config_hash(config) + '\n';
  out += "seed=" + std::to_string(config.seed) + '\n';
  for (const auto& [k, v] : extra) out += k + '=' + v + '\n';
  csv::write_file(sidecar_path(artifact), out);
}

std::map<std::string, std::string> read_sidecar(const fs::path& artifact) {
  auto in = open_text(sidecar_path(artifact));
  std::map<std::string, std::string> out;
  std::string line;
  while (csv::read_line(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

SynthKind parse_synth_kind(std::string_view name) {
  if (name == "two-tone") return SynthKind::TwoTone;
  if (name == "inverted-u") return SynthKind::InvertedU;
  if (name == "flat") return SynthKind::Flat;
  throw InputError("unknown corpus kind '" + std::string(name) +
                   "' (expected two-tone, inverted-u or flat)");
}

SynthReport run_synth(const fs::path& dir, SynthKind kind, std::size_t n_infants,
                      std::size_t clips_per_class, std::uint64_t seed) {
  const auto spec = kind == SynthKind::TwoTone
                        ? two_tone_spec(clips_per_class)
                        : developmental_spec(
                              kind == SynthKind::InvertedU ? SpreadShape::InvertedU
                                                           : SpreadShape::Flat,
                              n_infants, seed);
  const auto corpus = generate_synthetic(spec, seed);
  ensure_dir(dir / "audio");
  for (const auto& [rec, bytes] : corpus.wav_by_recording) {
    csv::write_file(dir / "audio" / (rec + ".wav"),
                    std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  csv::write_file(dir / "annotations.csv", serialize_annotations(corpus.annotations));
  return {corpus.wav_by_recording.size(), corpus.annotations.size()};
}

IngestReport run_ingest(const PipelineConfig& config) {
  require_file(config.annotations, "annotation file");
  if (config.audio_dir.empty()) throw InputError("audio directory is not set");
  const auto annotations = parse_annotations(csv::read_file(config.annotations));
  std::map<std::string, std::vector<SegmentAnnotation>> by_recording;
  for (const auto& a : annotations) by_recording[a.recording_id].push_back(a);

  const Workspace ws{config.out_dir};
  ensure_dir(ws.clips_dir());
  IngestReport report;
  std::vector<ManifestRow> manifest;
  std::vector<ClipInfo> infos;
  for (const auto& [rec, list] : by_recording) {
    const auto wav_path = config.audio_dir / (rec + ".wav");
    require_file(wav_path, "audio for recording " + rec);
    const auto audio = read_wav(wav_path);
    const auto sliced = slice_clips(audio, list, config.window);
    report.dropped_short += sliced.dropped_short;
    report.dropped_long += sliced.dropped_long;
    report.dropped_other += sliced.dropped_other;
    for (const auto& clip : sliced.clips) {
      write_wav(ws.clip(clip.clip_id()), clip.samples, clip.sample_rate_hz);
      manifest.push_back({clip.info(), clip.annotation.duration_ms()});
      infos.push_back(clip.info());
    }
  }
  std::sort(manifest.begin(), manifest.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.info.clip_id < b.info.clip_id; });
  report.clips = manifest.size();
  report.summary = summarize(infos);
  csv::write_file(ws.manifest(), serialize_manifest(manifest));
  write_sidecar(ws.manifest(), "ingest", config,
                {{"clips", std::to_string(report.clips)},
                 {"dropped_short", std::to_string(report.dropped_short)},
                 {"dropped_long", std::to_string(report.dropped_long)},
                 {"dropped_other", std::to_string(report.dropped_other)}});
  return report;
}

FeaturesReport run_features(const PipelineConfig& config) {
  config.frame.validate();
  const Workspace ws{config.out_dir};
  require_file(ws.manifest(), "clip manifest");
  auto in = open_text(ws.manifest());
  auto manifest = parse_manifest(in, ws.manifest().string());
  std::sort(manifest.begin(), manifest.end(),
            [](const ManifestRow& a, const ManifestRow& b) { return a.info.clip_id < b.info.clip_id; });

  FeaturesReport report;
  FeatureExtractor extractor(config.frame);
  std::vector<std::optional<WavAudio>> audio(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    try {
      audio[i] = read_wav(ws.clip(manifest[i].info.clip_id));
      extractor.prepare(audio[i]->sample_rate_hz);
    } catch (const InputError& e) {
      report.warnings.push_back(manifest[i].info.clip_id + ": " + e.what());
      audio[i].reset();
    }
  }
  std::vector<std::optional<FeatureVector>> vectors(manifest.size());
  std::vector<std::string> errors(manifest.size());
  parallel_for(manifest.size(), config.threads, [&](std::size_t i) {
    if (!audio[i]) return;
    try {
      vectors[i] = summarize_clip(extractor.feature_matrix(audio[i]->samples, audio[i]->sample_rate_hz),
                                  manifest[i].info);
    } catch (const InputError& e) {
      errors[i] = e.what();
    }
  });
  std::vector<FeatureVector> rows;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!errors[i].empty()) report.warnings.push_back(manifest[i].info.clip_id + ": " + errors[i]);
    if (vectors[i]) rows.push_back(std::move(*vectors[i]));
  }
  if (config.standardize) {
    if (rows.size() < 2) {
      throw InputError("standardization needs at least 2 clips; disable it for smaller sets");
    }
    rows = standardize(rows).vectors;
  }
  report.rows = rows.size();
  csv::write_file(ws.features(), serialize_features(rows));
  write_sidecar(ws.features(), "features", config,
                {{"rows", std::to_string(rows.size())},
                 {"skipped", std::to_string(report.warnings.size())},
                 {"standardize", config.standardize ? "true" : "false"},
                 {"frame_ms", csv::format(config.frame.frame_ms)},
                 {"hop_ms", csv::format(config.frame.hop_ms)}});
  return report;
}

EmbedReport run_embed(const PipelineConfig& config) {
  const Workspace ws{config.out_dir};
  require_file(ws.features(), "feature file");
  auto in = open_text(ws.features());
  const auto all = parse_features(in, ws.features().string());
  const std::set<VocalClass> keep(config.classes.begin(), config.classes.end());
  std::vector<const FeatureVector*> rows;
  for (const auto& v : all) {
    if (keep.count(v.info.label)) rows.push_back(&v);
  }
  if (rows.empty()) throw InputError("no feature rows in the selected classes");
  const auto dim = rows.front()->values.size();
  Matrix points(rows.size(), dim);
  Embedding out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]->values.size() != dim) throw InputError("feature rows differ in width");
    std::copy(rows[i]->values.begin(), rows[i]->values.end(), points.row(i).begin());
    out.info.push_back(rows[i]->info);
  }

  EmbedReport report;
  report.rows = rows.size();
  SidecarFields extra = {{"method", std::string(to_string(config.method))},
                         {"rows", std::to_string(rows.size())}};
  std::string standardized = config.standardize ? "true" : "false";
  if (fs::exists(sidecar_path(ws.features()))) {
    const auto meta = read_sidecar(ws.features());
    if (auto it = meta.find("standardize"); it != meta.end()) standardized = it->second;
  }
  extra.emplace_back("standardize", standardized);
  if (config.method == EmbedMethod::Umap) {
    auto p = config.umap;
    p.seed = config.seed;
    p.threads = config.threads;
    const auto r = umap_embed(points, p);
    out.coords = r.coords;
    report.unique_points = r.unique_points;
    report.init_fell_back = r.init_fell_back;
    extra.emplace_back("n_neighbors", std::to_string(p.n_neighbors));
    extra.emplace_back("min_dist", csv::format(p.min_dist));
    extra.emplace_back("epochs", std::to_string(r.epochs));
    extra.emplace_back("a", csv::format(r.curve.a));
    extra.emplace_back("b", csv::format(r.curve.b));
    extra.emplace_back("unique_points", std::to_string(r.unique_points));
    extra.emplace_back("init_fell_back", r.init_fell_back ? "true" : "false");
    extra.emplace_back("parallel", p.parallel ? "true" : "false");
  } else {
    auto p = config.tsne;
    p.seed = config.seed;
    p.threads = config.threads;
    const auto r = tsne_embed(points, p);
    out.coords = r.coords;
    report.unique_points = rows.size();
    extra.emplace_back("perplexity", csv::format(p.perplexity));
    extra.emplace_back("epochs", std::to_string(p.n_epochs));
    extra.emplace_back("unconverged_rows", std::to_string(r.unconverged_rows));
    if (!r.kl_trace.empty()) extra.emplace_back("final_kl", csv::format(r.kl_trace.back().second));
  }
  csv::write_file(ws.embedding(), serialize_embedding(out));
  write_sidecar(ws.embedding(), "embed", config, extra);
  return report;
}

std::vector<RecordingMeasures> run_measure(const PipelineConfig& config) {
  const Workspace ws{config.out_dir};
  require_file(ws.embedding(), "embedding file");
  const auto e = load_embedding(ws.embedding());
  if (e.size() == 0) throw InputError("embedding is empty");
  const auto m = measures_per_recording(e, config.grid_side);
  csv::write_file(ws.measures(), serialize_measures(m));
  csv::write_file(ws.centroids(), serialize_centroids(m));
  const SidecarFields extra = {{"grid_side", std::to_string(config.grid_side)},
                               {"recordings", std::to_string(m.size())}};
  write_sidecar(ws.measures(), "measure", config, extra);
  write_sidecar(ws.centroids(), "measure", config, extra);
  return m;
}

LmmFit run_stats(const PipelineConfig& config, Measure measure) {
  const Workspace ws{config.out_dir};
  require_file(ws.measures(), "measures file");
  const auto m = load_measures(ws.measures());
  const auto rows = regression_rows(m, measure);
  const auto fit = fit_lmm(rows);
  csv::write_file(ws.stats(measure), format_fit_report(fit, to_string(measure)));
  write_sidecar(ws.stats(measure), "stats", config, {{"measure", std::string(to_string(measure))}});
  return fit;
}

PlotKind parse_plot_kind(std::string_view name) {
  if (name == "space") return PlotKind::Space;
  if (name == "trend") return PlotKind::Trend;
  if (name == "label_compare") return PlotKind::LabelCompare;
  throw InputError("unknown plot kind '" + std::string(name) +
                   "' (expected space, trend or label_compare)");
}

fs::path run_plot(const PipelineConfig& config, const PlotRequest& request) {
  const Workspace ws{config.out_dir};
  std::string svg;
  std::string name;
  switch (request.kind) {
    case PlotKind::Space: {
      require_file(ws.embedding(), "embedding file");
      const auto e = load_embedding(ws.embedding());
      std::vector<RecordingMeasures> m;
      if (request.centroids) m = measures_per_recording(e, config.grid_side);
      SpacePlotOptions opt;
      opt.show_centroids = request.centroids;
      svg = plot_space(e, m, opt);
      name = "plot_space.svg";
      break;
    }
    case PlotKind::Trend: {
      require_file(ws.measures(), "measures file");
      const auto rows = regression_rows(load_measures(ws.measures()), request.measure);
      std::vector<double> ages, values;
      for (const auto& r : rows) {
        ages.push_back(r.age_months);
        values.push_back(r.response);
      }
      svg = plot_trend(ages, values, to_string(request.measure));
      name = "plot_trend_" + std::string(to_string(request.measure)) + ".svg";
      break;
    }
    case PlotKind::LabelCompare: {
      require_file(ws.label_compare(), "label comparison file");
      const auto table = csv::Table::load(ws.label_compare());
      const auto ca = table.column("automated");
      const auto cv = table.column("validated");
      std::vector<double> a, v;
      for (std::size_t i = 0; i < table.size(); ++i) {
        a.push_back(csv::parse_double(table.row(i)[ca], "automated", table.line_of(i)));
        v.push_back(csv::parse_double(table.row(i)[cv], "validated", table.line_of(i)));
      }
      svg = plot_label_compare(a, v);
      name = "plot_label_compare.svg";
      break;
    }
  }
  const auto out = request.output.value_or(ws.root / name);
  if (out.has_parent_path()) ensure_dir(out.parent_path());
  csv::write_file(out, svg);
  return out;
}

ValidateReport run_validate(const PipelineConfig& config, const fs::path& votes_path) {
  const Workspace ws{config.out_dir};
  require_file(votes_path, "votes file");
  require_file(ws.embedding(), "embedding file");
  auto vin = open_text(votes_path);
  const auto votes = parse_votes(vin, votes_path.string());
  const auto decisions = validate_prominence(votes);
  const auto e = load_embedding(ws.embedding());
  if (e.size() == 0) throw InputError("embedding is empty");

  ValidateReport report;
  report.voted_clips = decisions.size();
  std::vector<Point2> all;
  Embedding kept;
  std::vector<std::size_t> keep_rows;
  for (std::size_t i = 0; i < e.size(); ++i) {
    all.push_back({e.coords(i, 0), e.coords(i, 1)});
    if (e.info[i].label == VocalClass::CHNSP) {
      const auto it = decisions.find(e.info[i].clip_id);
      if (it == decisions.end()) {
        ++report.chnsp_without_votes;
        continue;
      }
      if (it->second != Validation::Validated) continue;
    }
    keep_rows.push_back(i);
  }
  for (const auto& [clip, d] : decisions) {
    (d == Validation::Validated ? report.validated : report.excluded) += 1;
  }
  kept.coords = Matrix(keep_rows.size(), 2);
  for (std::size_t r = 0; r < keep_rows.size(); ++r) {
    kept.info.push_back(e.info[keep_rows[r]]);
    kept.coords(r, 0) = e.coords(keep_rows[r], 0);
    kept.coords(r, 1) = e.coords(keep_rows[r], 1);
  }
  const auto box = BoundingBox::of(all);
  const auto automated = measures_per_recording(e, config.grid_side, box);
  const auto validated = measures_per_recording(kept, config.grid_side, box);

  std::string decisions_csv = "clip_id,decision\n";
  for (const auto& [clip, d] : decisions) {
    decisions_csv += clip + (d == Validation::Validated ? ",validated\n" : ",excluded\n");
  }
  csv::write_file(ws.validation(), decisions_csv);
  csv::write_file(ws.validated_measures(), serialize_measures(validated));

  std::map<std::string, double> validated_disp;
  for (const auto& m : validated) {
    if (m.mean_dispersion) validated_disp[m.recording_id] = *m.mean_dispersion;
  }
  std::string compare = "recording_id,automated,validated\n";
  std::vector<double> xa, xv;
  for (const auto& m : automated) {
    const auto it = validated_disp.find(m.recording_id);
    if (!m.mean_dispersion || it == validated_disp.end()) continue;
    compare += m.recording_id + ',' + csv::format(*m.mean_dispersion) + ',' +
               csv::format(it->second) + '\n';
    xa.push_back(*m.mean_dispersion);
    xv.push_back(it->second);
  }
  csv::write_file(ws.label_compare(), compare);
  report.recordings_compared = xa.size();
  if (xa.size() >= 3) {
    try {
      report.dispersion_r = pearson_r(xa, xv);
    } catch (const InputError&) {
      report.dispersion_r.reset();
    }
  }

  std::string text = "voted_clips=" + std::to_string(report.voted_clips) + '\n';
  text += "validated=" + std::to_string(report.validated) + '\n';
  text += "excluded=" + std::to_string(report.excluded) + '\n';
  text += "chnsp_without_votes=" + std::to_string(report.chnsp_without_votes) + '\n';
  text += "recordings_compared=" + std::to_string(report.recordings_compared) + '\n';
  text += "dispersion_r=" + (report.dispersion_r ? csv::format(*report.dispersion_r) : "") + '\n';
  csv::write_file(ws.validation_report(), text);
  for (const auto& p : {ws.validation(), ws.validated_measures(), ws.label_compare(),
                        ws.validation_report()}) {
    write_sidecar(p, "validate", config, {{"votes", votes_path.string()}});
  }
  return report;
}

}  // namespace vocspace
