// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ab_oracle.hpp"
#include "datasets.hpp"
#include "lmm_oracle.hpp"
#include "mfcc_oracle.hpp"
#include "vocspace/csv.hpp"
#include "vocspace/features.hpp"
#include "vocspace/metrics.hpp"
#include "vocspace/neighbors.hpp"
#include "vocspace/pipeline.hpp"
#include "vocspace/quality.hpp"
#include "vocspace/stats.hpp"
#include "vocspace/tsne.hpp"
#include "vocspace/umap.hpp"

namespace fs = std::filesystem;
using namespace vocspace;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome ac1_mfcc_parity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> dur(0.6, 2.0), freq(80.0, 3000.0), u(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  const FrameParams p;
  double worst = 0.0;
  for (int clip = 0; clip < 20; ++clip) {
    const auto n = static_cast<std::size_t>(dur(rng) * 16000);
    const double f1 = freq(rng), f2 = freq(rng), amp = 0.2 + 0.3 * std::abs(u(rng));
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = double(i) / 16000.0;
      x[i] = amp * std::sin(2 * std::numbers::pi * f1 * t) +
             0.5 * amp * std::sin(2 * std::numbers::pi * f2 * t) + noise(rng);
    }
    const auto c = mfcc(frame_signal(x, 16000, p), p, 16000);
    const auto ref = oracle::mfcc(x, 16000);
    if (c.cols() != ref.size()) return {false, "frame count mismatch on clip " + std::to_string(clip)};
    for (std::size_t t = 0; t < ref.size(); ++t) {
      for (std::size_t k = 0; k < ref[t].size(); ++k) {
        worst = std::max(worst, std::abs(c(k, t) - ref[t][k]));
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 30.0,
          "max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.1f", secs) + " s"};
}

Outcome ac2_framing() {
  const FrameParams p;
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<int> dur(600, 12000);
  std::vector<int> durations = {600, 12000};
  for (int i = 0; i < 1000; ++i) durations.push_back(dur(rng));
  int bad = 0;
  for (int d : durations) {
    const std::size_t expect = 1 + static_cast<std::size_t>((d - 25) / 10);
    if (frame_count(static_cast<std::size_t>(d) * 16, 16000, p) != expect) ++bad;
  }
  const bool anchors = frame_count(600 * 16, 16000, p) == 58 &&
                       frame_count(12000 * 16, 16000, p) == 1198;
  return {bad == 0 && anchors, std::to_string(bad) + " mismatches over " +
                                   std::to_string(durations.size()) + " durations"};
}

Outcome ac3_fuzzy_graph() {
  double asym = 0.0;
  std::size_t bad_weights = 0, unsaturated_rows = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto x = testdata::gaussian(500, 39, 3000 + s);
    const auto g = fuzzy_graph(build_knn(x, 15, s));
    for (std::size_t i = 0; i < g.n; ++i) {
      bool saturated = false;
      for (auto e = g.row_ptr[i]; e < g.row_ptr[i + 1]; ++e) {
        const double w = g.weights[e];
        if (!(w > 0.0 && w <= 1.0)) ++bad_weights;
        if (w >= 1.0 - 1e-12) saturated = true;
        asym = std::max(asym, std::abs(w - g.weight(g.cols[e], i)));
      }
      if (!saturated) ++unsaturated_rows;
    }
  }
  return {asym <= 1e-12 && bad_weights == 0 && unsaturated_rows == 0,
          "max asymmetry " + fmt("%.3g", asym) + ", weights outside (0,1] " +
              std::to_string(bad_weights) + ", rows without a saturated entry " +
              std::to_string(unsaturated_rows)};
}

Outcome ac4_ab_calibration() {
  const auto f = fit_ab(0.1);
  const auto [ga, gb] = oracle::grid_fit_ab(0.1);
  const bool ranges = f.a >= 1.5 && f.a <= 1.7 && f.b >= 0.85 && f.b <= 0.95;
  const bool rms = f.rms < 1e-2;
  const bool oracle_match = std::abs(f.a - ga) <= 1e-2 && std::abs(f.b - gb) <= 1e-2;
  return {ranges && rms && oracle_match,
          "a " + fmt("%.6f", f.a) + ", b " + fmt("%.6f", f.b) + ", rms " + fmt("%.5f", f.rms) +
              " (need < 0.01), grid oracle a " + fmt("%.6f", ga) + " b " + fmt("%.6f", gb)};
}

Outcome ac5_embedding_quality() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = testdata::blobs(900, 3, 39, 1.0, 123);
  const auto u = umap_embed(data.points, UmapParams{});
  const auto ku = kmeans(u.coords, 3, 7);
  const double purity_u = purity(ku.labels, data.labels);
  const double trust = trustworthiness(data.points, u.coords, 15);
  const auto t = tsne_embed(data.points, TsneParams{});
  const auto kt = kmeans(t.coords, 3, 7);
  const double purity_t = purity(kt.labels, data.labels);
  const double secs = seconds_since(t0);
  return {purity_u >= 0.95 && trust >= 0.90 && purity_t >= 0.90 && secs < 60.0,
          "UMAP purity " + fmt("%.4f", purity_u) + ", trustworthiness " + fmt("%.4f", trust) +
              " (need >= 0.90), t-SNE purity " + fmt("%.4f", purity_t) + ", " +
              fmt("%.1f", secs) + " s"};
}

Outcome ac6_lmm_oracle() {
  const auto rows = oracle::twelve_rows(2024);
  const auto fit = fit_lmm(rows);
  const auto best = oracle::grid_search(rows, 40.0);
  double beta_err = 0.0;
  for (std::size_t j = 0; j < 4; ++j) beta_err = std::max(beta_err, std::abs(fit.beta[j] - best.beta[j]));
  const double ll_err = std::abs(fit.loglik - best.loglik);

  std::mt19937_64 rng(77);
  std::normal_distribution<double> e(0.0, 0.3);
  std::vector<RegressionRow> solo;
  int i = 0;
  for (int age : {3, 5, 6, 8, 9, 11, 12, 14, 15, 18, 20, 24}) {
    const double c = 20.0 + 15.0 * ((i * 7) % 12);
    solo.push_back({"s" + std::to_string(i++), age, c,
                    2.0 + 0.3 * age - 0.01 * age * age + 0.002 * c + e(rng)});
  }
  std::vector<double> y;
  for (const auto& r : solo) y.push_back(r.response);
  const auto ols = oracle::ols(oracle::oracle_design(solo), y);
  const auto solo_fit = fit_lmm(solo);
  double ols_err = 0.0;
  for (std::size_t j = 0; j < 4; ++j) ols_err = std::max(ols_err, std::abs(solo_fit.beta[j] - ols.beta[j]));

  const double p1 = lrt_pvalue(3.841 / 2, 0.0), p2 = lrt_pvalue(10.83 / 2, 0.0);
  const double s1 = 1.0 - oracle::gamma_p_series(0.5, 3.841 / 2);
  const double s2 = 1.0 - oracle::gamma_p_series(0.5, 10.83 / 2);
  const bool chi = std::abs(p1 - 0.05) <= 1e-3 && std::abs(p2 - 0.001) <= 1e-4 &&
                   std::abs(p1 - s1) <= 1e-10 && std::abs(p2 - s2) <= 1e-10;
  return {ll_err <= 1e-4 && beta_err <= 1e-3 && ols_err <= 1e-6 && chi,
          "loglik diff " + fmt("%.2g", ll_err) + ", beta diff " + fmt("%.2g", beta_err) +
              ", OLS diff " + fmt("%.2g", ols_err) + ", p(3.841) " + fmt("%.5f", p1) +
              ", p(10.83) " + fmt("%.6f", p2)};
}

struct CorpusRun {
  LmmFit dispersion;
  LmmFit entropy;
};

CorpusRun run_corpus(const fs::path& dir, SynthKind kind, std::size_t infants,
                     std::uint64_t seed) {
  run_synth(dir / "corpus", kind, infants, 0, seed);
  PipelineConfig c;
  c.audio_dir = dir / "corpus" / "audio";
  c.annotations = dir / "corpus" / "annotations.csv";
  c.out_dir = dir / "work";
  c.seed = seed;
  run_ingest(c);
  run_features(c);
  run_embed(c);
  run_measure(c);
  return {run_stats(c, Measure::Dispersion), run_stats(c, Measure::Entropy)};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("vocspace_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Outcome ac7_developmental() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto peak = run_corpus(scratch("inverted_u"), SynthKind::InvertedU, 12, 7);
  const auto flat = run_corpus(scratch("flat"), SynthKind::Flat, 12, 7);
  const double secs = seconds_since(t0);
  const bool peaked = peak.dispersion.beta[2] < 0 && peak.dispersion.p_quadratic < 0.01 &&
                      peak.entropy.beta[2] < 0 && peak.entropy.p_quadratic < 0.01;
  const bool null = flat.dispersion.p_quadratic > 0.05 && flat.entropy.p_quadratic > 0.05;
  return {peaked && null && secs < 300.0,
          "inverted-U dispersion b2 " + fmt("%.3f", peak.dispersion.beta[2]) + " p " +
              fmt("%.2g", peak.dispersion.p_quadratic) + ", entropy b2 " +
              fmt("%.3f", peak.entropy.beta[2]) + " p " + fmt("%.2g", peak.entropy.p_quadratic) +
              "; flat p " + fmt("%.3f", flat.dispersion.p_quadratic) + " / " +
              fmt("%.3f", flat.entropy.p_quadratic) + "; " + fmt("%.0f", secs) + " s"};
}

Outcome ac8_validation() {
  const std::vector<int> a = {1, 1, 2}, b = {1, 2, 2}, c = {1, 1, 2, 2};
  const bool rule = decide_prominence(a) == Validation::Validated &&
                    decide_prominence(b) == Validation::Excluded &&
                    decide_prominence(c) == Validation::Excluded;
  std::mt19937_64 rng(1008);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(50), y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    x[i] = g(rng);
    y[i] = 0.5 * x[i] + g(rng);
  }
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < 50; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double direct = (50 * sxy - sx * sy) / std::sqrt((50 * sxx - sx * sx) * (50 * syy - sy * sy));
  const double diff = std::abs(pearson_r(x, y) - direct);
  return {rule && diff <= 1e-12,
          std::string("vote rule ") + (rule ? "ok" : "wrong") + ", pearson diff " + fmt("%.2g", diff)};
}

Outcome ac9_determinism() {
  const auto root = scratch("determinism");
  run_synth(root / "corpus", SynthKind::InvertedU, 3, 0, 11);
  auto make = [&](const std::string& name) {
    PipelineConfig c;
    c.audio_dir = root / "corpus" / "audio";
    c.annotations = root / "corpus" / "annotations.csv";
    c.out_dir = root / name;
    c.seed = 11;
    run_ingest(c);
    run_features(c);
    run_embed(c);
    run_measure(c);
    return Workspace{c.out_dir};
  };
  const auto a = make("a");
  const auto b = make("b");
  std::vector<std::string> differing;
  for (auto pick : {&Workspace::features, &Workspace::embedding, &Workspace::measures}) {
    if (csv::read_file((a.*pick)()) != csv::read_file((b.*pick)())) {
      differing.push_back((a.*pick)().filename().string());
    }
  }
  std::string detail = differing.empty() ? "features, embedding, measures byte-identical" : "differ:";
  for (const auto& d : differing) detail += " " + d;
  return {differing.empty(), detail};
}

Outcome ac10_metric_invariances() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> g(0.0, 2.0);
  Embedding e;
  const std::size_t n = 400;
  e.coords = Matrix(n, 2);
  const VocalClass classes[] = {VocalClass::CHNSP, VocalClass::FAN, VocalClass::MAN};
  for (std::size_t i = 0; i < n; ++i) {
    ClipInfo info;
    info.clip_id = "c" + std::to_string(i);
    info.recording_id = "r" + std::to_string(i % 5);
    info.infant_id = "i" + std::to_string(i % 5);
    info.age_months = 6;
    info.label = classes[(i / 5) % 3];
    e.info.push_back(info);
    e.coords(i, 0) = g(rng);
    e.coords(i, 1) = g(rng);
  }
  const auto base = measures_per_recording(e);
  auto moved = e;
  auto scaled = e;
  const double gain = 3.7;
  for (std::size_t i = 0; i < n; ++i) {
    moved.coords(i, 0) += 123.4;
    moved.coords(i, 1) -= 56.7;
    scaled.coords(i, 0) *= gain;
    scaled.coords(i, 1) *= gain;
  }
  const auto mt = measures_per_recording(moved);
  const auto ms = measures_per_recording(scaled);
  double trans = 0.0, scale = 0.0;
  for (std::size_t r = 0; r < base.size(); ++r) {
    trans = std::max({trans, std::abs(*mt[r].centroid_distance - *base[r].centroid_distance),
                      std::abs(*mt[r].mean_dispersion - *base[r].mean_dispersion)});
    scale = std::max({scale,
                      std::abs(*ms[r].centroid_distance - gain * *base[r].centroid_distance) /
                          (gain * *base[r].centroid_distance),
                      std::abs(*ms[r].mean_dispersion - gain * *base[r].mean_dispersion) /
                          (gain * *base[r].mean_dispersion)});
  }
  double h_lo = 1e9, h_hi = -1e9;
  for (const auto& m : base) {
    h_lo = std::min(h_lo, *m.entropy_bits);
    h_hi = std::max(h_hi, *m.entropy_bits);
  }
  const BoundingBox box{0.0, 32.0, 0.0, 32.0};
  std::vector<Point2> same(50, Point2{3.2, 7.9});
  std::vector<Point2> spread;
  for (int yy = 0; yy < 32; ++yy) {
    for (int xx = 0; xx < 32; ++xx) spread.push_back({xx + 0.5, yy + 0.5});
  }
  const double h0 = shannon_entropy(same, box, 32);
  const double hmax = shannon_entropy(spread, box, 32);
  const bool bounds = h_lo >= 0.0 && h_hi <= 2 * std::log2(32.0) && h0 == 0.0 &&
                      std::abs(hmax - 10.0) <= 1e-12;
  return {trans <= 1e-9 && scale <= 1e-12 && bounds,
          "translation diff " + fmt("%.2g", trans) + ", relative scaling diff " +
              fmt("%.2g", scale) + ", H range [" + fmt("%.3f", h_lo) + ", " + fmt("%.3f", h_hi) +
              "], single cell " + fmt("%.3g", h0) + ", uniform " + fmt("%.12g", hmax)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC-1", ac1_mfcc_parity},      {"AC-2", ac2_framing},
      {"AC-3", ac3_fuzzy_graph},      {"AC-4", ac4_ab_calibration},
      {"AC-5", ac5_embedding_quality}, {"AC-6", ac6_lmm_oracle},
      {"AC-7", ac7_developmental},    {"AC-8", ac8_validation},
      {"AC-9", ac9_determinism},      {"AC-10", ac10_metric_invariances}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %s  %s\n", name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(fs::temp_directory_path() / ("vocspace_acceptance_" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}
