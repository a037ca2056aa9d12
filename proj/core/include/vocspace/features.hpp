#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vocspace/corpus.hpp"
#include "vocspace/matrix.hpp"

namespace vocspace {

struct FrameParams {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int n_mel_bands = 26;
  int n_cepstra = 13;
  double pre_emphasis = 0.97;
  int delta_window = 2;
  double log_floor = 1e-10;
  // 0 selects the smallest power of two >= 2 * frame_length - 1. Larger
  // powers of two are accepted and give the same coefficients.
  std::size_t fft_size = 0;

  void validate() const;  // throws InputError
  int feature_dim() const { return 3 * n_cepstra; }
};

std::size_t frame_length(int sample_rate_hz, const FrameParams& p);
// T = 1 + floor((duration_ms - frame_ms) / hop_ms); 0 when shorter than a frame.
std::size_t frame_count(std::size_t n_samples, int sample_rate_hz, const FrameParams& p);

/// Pre-emphasizes the whole clip (x[-1] := x[0]), then cuts T frames of
/// frame_length samples starting at floor(t * hop_ms * fs / 1000) and applies
/// a symmetric Hamming window. Returns a T x frame_length matrix.
Matrix frame_signal(std::span<const double> samples, int sample_rate_hz,
                    const FrameParams& p);

/// Triangular HTK-mel filterbank spanning [0, Nyquist].
///
/// Band energies are exact integrals of the frame periodogram against each
/// triangular weight. The periodogram of an N-sample frame is a cosine
/// series in the frame autocorrelation r[0..N-1], so each band reduces to a
/// fixed lag kernel: E_m = sum_tau K_m[tau] * r[tau]. The autocorrelation is
/// obtained from the zero-padded power spectrum (FFT, |X|^2, inverse FFT);
/// any padding of at least 2N - 1 samples is alias-free, which makes the
/// result independent of the FFT size.
class MelFilterbank {
 public:
  MelFilterbank(int sample_rate_hz, std::size_t frame_length, const FrameParams& p);

  int sample_rate_hz() const { return sample_rate_hz_; }
  std::size_t frame_length() const { return frame_length_; }
  std::size_t fft_size() const { return fft_size_; }
  std::size_t bands() const { return kernels_.rows(); }

  // Band edges in Hz: bands()+2 points equally spaced on the mel scale.
  const std::vector<double>& edges_hz() const { return edges_hz_; }
  // Triangular weight of `band` at frequency f_hz.
  double weight(std::size_t band, double f_hz) const;
  // bands() x frame_length() lag kernels.
  const Matrix& lag_kernels() const { return kernels_; }

  // Band energies for every row of `frames` (T x frame_length). Returns
  // T x bands().
  Matrix band_energies(const Matrix& frames) const;

 private:
  int sample_rate_hz_;
  std::size_t frame_length_;
  std::size_t fft_size_;
  std::vector<double> edges_hz_;
  std::vector<double> edges_mel_;
  Matrix kernels_;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Orthonormal DCT-II of the floored log band energies, keeping the first
// n_cepstra coefficients. Returns n_cepstra x T.
Matrix cepstra_from_energies(const Matrix& energies, const FrameParams& p);

// n_cepstra x T MFCC matrix for frames produced by frame_signal.
Matrix mfcc(const Matrix& frames, const MelFilterbank& bank, const FrameParams& p);
Matrix mfcc(const Matrix& frames, const FrameParams& p, int sample_rate_hz);

/// Regression delta over +-window frames with edge replication.
Matrix regression_delta(const Matrix& c, int window);

struct Deltas {
  Matrix velocity;
  Matrix acceleration;
};
Deltas deltas(const Matrix& c, int window);

// Stacks [c; velocity; acceleration] into a 3*n_cepstra x T matrix.
Matrix stack_features(const Matrix& c, const Deltas& d);

struct FeatureVector {
  ClipInfo info;
  std::vector<double> values;
};

// Per-row sums over timebins.
std::vector<double> summarize_clip(const Matrix& m);
FeatureVector summarize_clip(const Matrix& m, ClipInfo info);

struct Standardization {
  std::vector<double> mean;
  std::vector<double> sd;  // population sd; < 1e-12 means "passed as zero"
};

struct StandardizedSet {
  std::vector<FeatureVector> vectors;
  Standardization transform;
};

// Per-dimension z-scoring with population sd. Requires at least 2 vectors.
StandardizedSet standardize(std::span<const FeatureVector> vs);

/// Clip -> 39-d vector, caching one filterbank per sample rate.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FrameParams p);

  const FrameParams& params() const { return params_; }
  // Builds the filterbank for a sample rate. Must precede concurrent use.
  const MelFilterbank& prepare(int sample_rate_hz);

  // 3*n_cepstra x T feature matrix. Throws InputError when the clip is
  // shorter than one frame or its sample rate was not prepared.
  Matrix feature_matrix(std::span<const double> samples, int sample_rate_hz) const;
  FeatureVector extract(const Clip& clip) const;

 private:
  FrameParams params_;
  std::map<int, MelFilterbank> banks_;
};

std::string serialize_features(std::span<const FeatureVector> vs);
std::vector<FeatureVector> parse_features(std::istream& in, std::string_view origin);

}  // namespace vocspace
