#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vocspace {

/// Decoded mono audio. Samples are PCM16 values divided by 32768, so they
/// lie in [-1, 1).
struct WavAudio {
  int sample_rate_hz = 0;
  std::vector<double> samples;

  double duration_s() const {
    return sample_rate_hz > 0 ? static_cast<double>(samples.size()) / sample_rate_hz
                              : 0.0;
  }
};

inline constexpr int kMinSampleRateHz = 8000;

// Accepts RIFF/WAVE with a PCM16 mono fmt chunk (plain PCM or
// WAVE_FORMAT_EXTENSIBLE with the PCM subformat). Unknown chunks are
// skipped. Anything else throws InputError.
WavAudio decode_wav(std::span<const std::uint8_t> bytes);
WavAudio read_wav(const std::filesystem::path& path);

// Encodes samples as PCM16 mono: round(x * 32768) clamped to int16 range.
std::vector<std::uint8_t> encode_wav(std::span<const double> samples,
                                     int sample_rate_hz);
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate_hz);

}  // namespace vocspace
