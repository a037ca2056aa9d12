#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vocspace/config.hpp"
#include "vocspace/error.hpp"
#include "vocspace/pipeline.hpp"

namespace {

using namespace vocspace;

// Options shared by the pipeline commands. Values given on the command line
// are applied on top of the config file.
struct Common {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config_file, "flat key=value config file");
    cmd->add_option("-o,--out", out_dir, "workspace directory");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker threads");
    cmd->add_option("--set", overrides, "extra option as key=value (repeatable)");
  }

  PipelineConfig build() const {
    PipelineConfig c;
    if (!config_file.empty()) apply_config_file(c, config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
      set_option(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (out_dir) c.out_dir = *out_dir;
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    return c;
  }
};

void print_summary(const CorpusSummary& summary) {
  for (const auto& [key, n] : summary) {
    std::cout << "  age " << key.first << " " << to_string(key.second) << ": " << n << '\n';
  }
}

int run(int argc, char** argv) {
  CLI::App app{"vocspace: infant vocalization space analysis"};
  app.require_subcommand(1);

  Common common;
  std::function<void()> action;

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic corpus");
  std::string synth_dir;
  std::string synth_kind = "inverted-u";
  std::size_t synth_infants = 12;
  std::size_t synth_clips = 40;
  std::uint64_t synth_seed = 42;
  synth->add_option("--dir", synth_dir, "output directory")->required();
  synth->add_option("--kind", synth_kind, "two-tone | inverted-u | flat")->capture_default_str();
  synth->add_option("--infants", synth_infants, "infants (developmental corpora)")->capture_default_str();
  synth->add_option("--clips-per-class", synth_clips, "clips per class (two-tone)")->capture_default_str();
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth->callback([&] {
    action = [&] {
      const auto r = run_synth(synth_dir, parse_synth_kind(synth_kind), synth_infants,
                               synth_clips, synth_seed);
      std::cout << "wrote " << r.recordings << " recordings, " << r.annotations
                << " annotations to " << synth_dir << '\n';
    };
  });

  auto* ingest = app.add_subcommand("ingest", "slice annotated recordings into clips");
  common.attach(ingest);
  std::optional<std::string> audio_dir, annotations;
  ingest->add_option("--audio-dir", audio_dir, "directory of <recording_id>.wav files");
  ingest->add_option("--annotations", annotations, "annotation CSV");
  ingest->callback([&] {
    action = [&] {
      auto c = common.build();
      if (audio_dir) c.audio_dir = *audio_dir;
      if (annotations) c.annotations = *annotations;
      const auto r = run_ingest(c);
      std::cout << "clips: " << r.clips << '\n';
      print_summary(r.summary);
      std::cerr << "excluded: " << r.dropped_other << " other-class, " << r.dropped_short
                << " too short, " << r.dropped_long << " too long\n";
    };
  });

  auto* features = app.add_subcommand("features", "compute 39-d clip feature vectors");
  common.attach(features);
  std::optional<bool> standardize;
  features->add_flag("--standardize,!--no-standardize", standardize,
                     "z-score each feature dimension (default on)");
  features->callback([&] {
    action = [&] {
      auto c = common.build();
      if (standardize) c.standardize = *standardize;
      const auto r = run_features(c);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "rows: " << r.rows << ", warnings: " << r.warnings.size() << '\n';
    };
  });

  auto* embed = app.add_subcommand("embed", "embed feature vectors in 2-D");
  common.attach(embed);
  std::optional<std::string> method, classes;
  embed->add_option("--method", method, "umap | tsne");
  embed->add_option("--classes", classes, "comma-separated classes (default CHNSP,FAN,MAN)");
  embed->callback([&] {
    action = [&] {
      auto c = common.build();
      if (method) set_option(c, "method", *method);
      if (classes) set_option(c, "classes", *classes);
      const auto r = run_embed(c);
      std::cout << "embedded " << r.rows << " clips (" << r.unique_points << " distinct) with "
                << to_string(c.method) << '\n';
      if (r.init_fell_back) std::cerr << "warning: spectral init failed; used random init\n";
    };
  });

  auto* measure = app.add_subcommand("measure", "per-recording distance, dispersion, entropy");
  common.attach(measure);
  std::optional<std::size_t> grid_side;
  measure->add_option("--grid-side", grid_side, "entropy grid side");
  measure->callback([&] {
    action = [&] {
      auto c = common.build();
      if (grid_side) c.grid_side = *grid_side;
      const auto m = run_measure(c);
      std::cout << "recordings: " << m.size() << '\n';
    };
  });

  auto* stats = app.add_subcommand("stats", "mixed-effects age regression of a measure");
  common.attach(stats);
  std::string stats_measure = "all";
  stats->add_option("--measure", stats_measure, "distance | dispersion | entropy | all")->capture_default_str();
  stats->callback([&] {
    action = [&] {
      const auto c = common.build();
      std::vector<Measure> which;
      if (stats_measure == "all") {
        which = {Measure::Distance, Measure::Dispersion, Measure::Entropy};
      } else {
        which = {parse_measure(stats_measure)};
      }
      for (auto m : which) {
        const auto fit = run_stats(c, m);
        std::cout << format_fit_report(fit, to_string(m)) << '\n';
      }
    };
  });

  auto* plot = app.add_subcommand("plot", "render an SVG figure");
  common.attach(plot);
  std::string plot_kind = "space";
  std::string plot_measure = "dispersion";
  bool plot_centroids = false;
  std::optional<std::string> plot_output;
  plot->add_option("--kind", plot_kind, "space | trend | label_compare")->capture_default_str();
  plot->add_option("--measure", plot_measure, "measure for trend plots")->capture_default_str();
  plot->add_flag("--centroids", plot_centroids, "draw per-recording centroids (space)");
  plot->add_option("--output", plot_output, "SVG path");
  plot->callback([&] {
    action = [&] {
      const auto c = common.build();
      PlotRequest req;
      req.kind = parse_plot_kind(plot_kind);
      req.measure = parse_measure(plot_measure);
      req.centroids = plot_centroids;
      if (plot_output) req.output = *plot_output;
      std::cout << "wrote " << run_plot(c, req).string() << '\n';
    };
  });

  auto* validate = app.add_subcommand("validate", "filter CHNSP clips by listener votes");
  common.attach(validate);
  std::string votes;
  validate->add_option("--votes", votes, "CSV clip_id,listener_id,P")->required();
  validate->callback([&] {
    action = [&] {
      const auto c = common.build();
      const auto r = run_validate(c, votes);
      std::cout << "validated " << r.validated << ", excluded " << r.excluded
                << ", CHNSP without votes " << r.chnsp_without_votes << '\n';
      if (r.dispersion_r) {
        std::cout << "dispersion r over " << r.recordings_compared
                  << " recordings: " << *r.dispersion_r << '\n';
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    action();
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
