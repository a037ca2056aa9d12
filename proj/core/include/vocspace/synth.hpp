#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vocspace/corpus.hpp"

namespace vocspace {

struct Formant {
  double freq_hz = 0.0;
  double bandwidth_hz = 0.0;
};

/// Harmonic-tone template for one vocal class. Each synthesized clip draws
/// its own f0, formant positions and duration around these centers.
struct Archetype {
  double f0_hz = 300.0;
  std::vector<Formant> formants;
  double duration_s = 1.0;
  double duration_jitter_s = 0.0;  // sd of clip duration
  double f0_jitter = 0.0;          // sd of log f0
  double formant_jitter = 0.0;     // sd of log formant frequency
  double noise_floor = 0.0;        // sd of additive white noise
  double amplitude = 0.5;          // peak amplitude of the tone
};

/// Requested clip count for one (infant, age, class) cell.
struct SynthCell {
  std::string infant_id;
  int age_months = 0;
  VocalClass label = VocalClass::CHNSP;
  std::size_t count = 0;
  Archetype archetype;
};

struct SynthSpec {
  int sample_rate_hz = 16000;
  std::int64_t gap_ms = 250;
  std::vector<SynthCell> cells;
};

/// One WAV payload per recording plus the annotations that describe it.
struct SynthCorpus {
  std::map<std::string, std::vector<std::uint8_t>> wav_by_recording;
  std::vector<SegmentAnnotation> annotations;
};

// Recording id for an (infant, age) pair, e.g. "i03_m09".
std::string synth_recording_id(const std::string& infant_id, int age_months);

// Deterministic for a fixed seed. Throws InputError on an empty spec or a
// cell with non-positive f0 or age.
SynthCorpus generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

// Two classes separated only by f0 (CHNSP and FAN).
SynthSpec two_tone_spec(std::size_t clips_per_class, double f0_a_hz = 300.0,
                        double f0_b_hz = 120.0, int sample_rate_hz = 16000);

enum class SpreadShape { InvertedU, Flat };

/// Longitudinal corpus: n_infants recorded at 3, 6, 9 and 18 months with
/// CHNSP, FAN and MAN clips. Under InvertedU the within-recording acoustic
/// spread of infant clips peaks at 9 months; under Flat it is constant.
/// Per-recording clip counts are drawn from `layout_seed`.
SynthSpec developmental_spec(SpreadShape shape, std::size_t n_infants,
                             std::uint64_t layout_seed, int sample_rate_hz = 8000);

// Relative CHNSP spread used by developmental_spec.
double developmental_spread(SpreadShape shape, int age_months);

}  // namespace vocspace
