#include "vocspace/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "vocspace/error.hpp"
#include "vocspace/wav.hpp"

namespace vocspace {
namespace {

struct ClipJob {
  VocalClass label;
  const Archetype* archetype;
};

struct RecordingPlan {
  std::string infant_id;
  int age_months = 0;
  std::vector<ClipJob> jobs;
};

double resonance_gain(double f, const Formant& formant) {
  // Magnitude response of a second-order resonator, unity at DC.
  const double f2 = formant.freq_hz * formant.freq_hz;
  const double num = f2;
  const double a = f2 - f * f;
  const double b = formant.bandwidth_hz * f;
  return num / std::sqrt(a * a + b * b);
}

std::vector<double> synthesize_clip(const Archetype& arch, std::int64_t duration_ms,
                                    int fs, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);

  const double f0 = arch.f0_hz * std::exp(arch.f0_jitter * gauss(rng));
  std::vector<Formant> formants = arch.formants;
  for (auto& f : formants) f.freq_hz *= std::exp(arch.formant_jitter * gauss(rng));

  const auto n = static_cast<std::size_t>(
      std::llround(static_cast<double>(duration_ms) * fs / 1000.0));
  std::vector<double> out(n, 0.0);

  const double nyquist = 0.5 * fs;
  std::vector<double> gains;
  std::vector<double> phases;
  for (int h = 1; h * f0 < 0.95 * nyquist; ++h) {
    const double f = h * f0;
    double g = formants.empty() ? 1.0 : 0.0;
    for (const auto& fm : formants) g += resonance_gain(f, fm);
    gains.push_back(g / h);
    phases.push_back(phase_dist(rng));
  }

  for (std::size_t h = 0; h < gains.size(); ++h) {
    const double w = 2.0 * std::numbers::pi * f0 * static_cast<double>(h + 1) / fs;
    for (std::size_t i = 0; i < n; ++i) {
      out[i] += gains[h] * std::sin(w * static_cast<double>(i) + phases[h]);
    }
  }

  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::abs(v));
  const double scale = peak > 0.0 ? arch.amplitude / peak : 0.0;

  // 15 ms raised-cosine onset and offset ramps.
  const std::size_t ramp = std::min(n / 2, static_cast<std::size_t>(0.015 * fs));
  for (std::size_t i = 0; i < n; ++i) {
    double env = 1.0;
    if (i < ramp) {
      env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / ramp);
    } else if (i >= n - ramp) {
      env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(n - 1 - i) / ramp);
    }
    out[i] = out[i] * scale * env + arch.noise_floor * gauss(rng);
  }
  return out;
}

std::int64_t draw_duration_ms(const Archetype& arch, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double d = arch.duration_s;
  if (arch.duration_jitter_s > 0.0) d += arch.duration_jitter_s * gauss(rng);
  d = std::clamp(d, 0.6, 12.0);
  return std::clamp<std::int64_t>(std::llround(d * 1000.0), 600, 12000);
}

}  // namespace

std::string synth_recording_id(const std::string& infant_id, int age_months) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "_m%02d", age_months);
  return infant_id + buf;
}

SynthCorpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  std::size_t total = 0;
  for (const auto& c : spec.cells) total += c.count;
  if (spec.cells.empty() || total == 0) throw InputError("synthetic spec requests no clips");
  if (spec.sample_rate_hz < kMinSampleRateHz) {
    throw InputError("synthetic sample rate must be at least 8000 Hz");
  }

  std::map<std::string, RecordingPlan> plans;
  for (const auto& cell : spec.cells) {
    if (cell.infant_id.empty()) throw InputError("synthetic cell has empty infant_id");
    if (cell.age_months <= 0) throw InputError("synthetic cell age must be positive");
    if (!(cell.archetype.f0_hz > 0.0)) throw InputError("synthetic archetype f0 must be positive");
    if (cell.label == VocalClass::OTHER) throw InputError("synthetic cells need a concrete class");
    auto& plan = plans[synth_recording_id(cell.infant_id, cell.age_months)];
    plan.infant_id = cell.infant_id;
    plan.age_months = cell.age_months;
    for (std::size_t i = 0; i < cell.count; ++i) plan.jobs.push_back({cell.label, &cell.archetype});
  }

  SynthCorpus corpus;
  std::mt19937_64 rng(seed);
  const int fs = spec.sample_rate_hz;
  const auto gap = static_cast<std::size_t>(spec.gap_ms * fs / 1000);
  for (auto& [recording_id, plan] : plans) {
    std::shuffle(plan.jobs.begin(), plan.jobs.end(), rng);
    std::vector<double> audio(gap, 0.0);
    std::int64_t cursor_ms = spec.gap_ms;
    for (const auto& job : plan.jobs) {
      const std::int64_t dur_ms = draw_duration_ms(*job.archetype, rng);
      // Align the clip start to the annotation's sample position.
      const auto begin = static_cast<std::size_t>(cursor_ms * fs / 1000);
      audio.resize(begin, 0.0);
      const auto samples = synthesize_clip(*job.archetype, dur_ms, fs, rng);
      audio.insert(audio.end(), samples.begin(), samples.end());
      corpus.annotations.push_back(SegmentAnnotation{recording_id, plan.infant_id,
                                                     plan.age_months, cursor_ms,
                                                     cursor_ms + dur_ms, job.label});
      cursor_ms += dur_ms + spec.gap_ms;
    }
    audio.resize(static_cast<std::size_t>(cursor_ms * fs / 1000), 0.0);
    corpus.wav_by_recording.emplace(recording_id, encode_wav(audio, fs));
  }
  return corpus;
}

SynthSpec two_tone_spec(std::size_t clips_per_class, double f0_a_hz, double f0_b_hz,
                        int sample_rate_hz) {
  Archetype a;
  a.f0_hz = f0_a_hz;
  a.formants = {{900.0, 150.0}, {2300.0, 250.0}};
  a.duration_s = 1.0;
  a.duration_jitter_s = 0.1;
  a.f0_jitter = 0.04;
  a.formant_jitter = 0.04;
  a.noise_floor = 0.002;
  Archetype b = a;
  b.f0_hz = f0_b_hz;

  SynthSpec spec;
  spec.sample_rate_hz = sample_rate_hz;
  spec.cells.push_back({"i01", 3, VocalClass::CHNSP, clips_per_class, a});
  spec.cells.push_back({"i01", 3, VocalClass::FAN, clips_per_class, b});
  return spec;
}

double developmental_spread(SpreadShape shape, int age_months) {
  if (shape == SpreadShape::Flat) return 0.6;
  // Piecewise-linear through the anchor ages, flat outside them.
  constexpr std::array<std::pair<int, double>, 4> anchors{
      {{3, 0.3}, {6, 0.65}, {9, 1.0}, {18, 0.3}}};
  if (age_months <= anchors.front().first) return anchors.front().second;
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
    const auto [a0, s0] = anchors[i];
    const auto [a1, s1] = anchors[i + 1];
    if (age_months <= a1) return s0 + (s1 - s0) * (age_months - a0) / double(a1 - a0);
  }
  return anchors.back().second;
}

SynthSpec developmental_spec(SpreadShape shape, std::size_t n_infants,
                             std::uint64_t layout_seed, int sample_rate_hz) {
  std::mt19937_64 rng(layout_seed);
  std::uniform_int_distribution<int> chnsp_count(64, 80);
  std::uniform_int_distribution<int> fan_count(14, 22);
  std::uniform_int_distribution<int> man_count(4, 8);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Archetype infant;
  infant.f0_hz = 380.0;
  infant.formants = {{1000.0, 180.0}, {2600.0, 300.0}};
  infant.duration_s = 1.4;
  infant.noise_floor = 0.002;

  Archetype female;
  female.f0_hz = 210.0;
  female.formants = {{700.0, 120.0}, {1800.0, 200.0}, {2900.0, 300.0}};
  female.duration_s = 1.6;
  female.duration_jitter_s = 0.25;
  female.f0_jitter = 0.12;
  female.formant_jitter = 0.08;
  female.noise_floor = 0.002;

  Archetype male = female;
  male.f0_hz = 115.0;
  male.formants = {{550.0, 110.0}, {1500.0, 180.0}, {2500.0, 280.0}};

  SynthSpec spec;
  spec.sample_rate_hz = sample_rate_hz;
  const std::array<int, 4> ages{3, 6, 9, 18};
  for (std::size_t i = 0; i < n_infants; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "i%02zu", i + 1);
    // Per-infant voice offset, shared across that infant's ages.
    const double voice = std::exp(0.25 * gauss(rng));
    const double tract = std::exp(0.15 * gauss(rng));
    for (int age : ages) {
      const double s = developmental_spread(shape, age);
      Archetype a = infant;
      a.f0_hz *= voice;
      for (auto& f : a.formants) f.freq_hz *= tract;
      a.f0_jitter = 0.35 * s;
      a.formant_jitter = 0.25 * s;
      a.duration_jitter_s = 0.6 * s;
      spec.cells.push_back({id, age, VocalClass::CHNSP,
                            static_cast<std::size_t>(chnsp_count(rng)), a});
      spec.cells.push_back({id, age, VocalClass::FAN,
                            static_cast<std::size_t>(fan_count(rng)), female});
      spec.cells.push_back({id, age, VocalClass::MAN,
                            static_cast<std::size_t>(man_count(rng)), male});
    }
  }
  return spec;
}

}  // namespace vocspace
