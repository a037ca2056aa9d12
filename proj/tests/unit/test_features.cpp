#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "mfcc_oracle.hpp"
#include "vocspace/error.hpp"
#include "vocspace/features.hpp"
#include "vocspace/fft.hpp"

using namespace vocspace;

namespace {

std::vector<double> sine(double hz, double seconds, int fs, double amp = 0.5) {
  std::vector<double> x(static_cast<std::size_t>(seconds * fs));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * i / fs);
  }
  return x;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sd = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

Matrix lib_mfcc(std::span<const double> x, int fs, FrameParams p = {}) {
  return mfcc(frame_signal(x, fs, p), p, fs);
}

double max_abs_vs_oracle(const Matrix& c, const std::vector<std::vector<double>>& ref) {
  EXPECT_EQ(c.cols(), ref.size());
  double worst = 0.0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    for (std::size_t k = 0; k < ref[t].size(); ++k) {
      worst = std::max(worst, std::abs(c(k, t) - ref[t][k]));
    }
  }
  return worst;
}

}  // namespace

TEST(Framing, FrameCountArithmetic) {
  const FrameParams p;
  EXPECT_EQ(frame_count(9600, 16000, p), 58u);     // 600 ms
  EXPECT_EQ(frame_count(192000, 16000, p), 1198u);  // 12000 ms
  EXPECT_EQ(frame_count(399, 16000, p), 0u);
  EXPECT_EQ(frame_count(400, 16000, p), 1u);
}

TEST(Framing, FrameCountFormulaAcrossRates) {
  const FrameParams p;
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> ms(600, 12000);
  for (int fs : {8000, 16000, 44100}) {
    for (int i = 0; i < 300; ++i) {
      const int d = ms(rng);
      const auto n = static_cast<std::size_t>(std::llround(d * fs / 1000.0));
      const std::size_t expected = 1 + static_cast<std::size_t>((d - 25) / 10);
      ASSERT_EQ(frame_count(n, fs, p), expected) << "fs=" << fs << " d=" << d;
      const auto frames = frame_signal(std::vector<double>(n, 0.1), fs, p);
      ASSERT_EQ(frames.rows(), expected);
      ASSERT_EQ(frames.cols(), frame_length(fs, p));
    }
  }
}

TEST(Framing, ZeroSignalGivesZeroFrames) {
  const auto frames = frame_signal(std::vector<double>(9600, 0.0), 16000, {});
  EXPECT_EQ(frames.rows(), 58u);
  for (double v : frames.data()) EXPECT_EQ(v, 0.0);
}

TEST(Framing, ShortClipIsAnError) {
  EXPECT_THROW(frame_signal(std::vector<double>(100, 0.0), 16000, {}), InputError);
}

TEST(Framing, InvalidParamsRejected) {
  FrameParams p;
  p.hop_ms = 30.0;
  EXPECT_THROW(p.validate(), InputError);
  p = {};
  p.n_cepstra = 27;
  EXPECT_THROW(p.validate(), InputError);
  p = {};
  p.pre_emphasis = 1.0;
  EXPECT_THROW(p.validate(), InputError);
}

TEST(Fft, MatchesDirectDft) {
  const std::size_t n = 64;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<std::complex<double>> x(n);
  for (auto& v : x) v = {g(rng), g(rng)};
  auto y = x;
  Fft(n).forward(y);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc;
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * i) / n);
    }
    EXPECT_NEAR(std::abs(acc - y[k]), 0.0, 1e-10);
  }
  Fft(n).inverse(y);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(std::abs(y[i] / double(n) - x[i]), 0.0, 1e-12);
  EXPECT_THROW(Fft(12), std::invalid_argument);
}

TEST(Mfcc, ZeroSignalIsFlatCepstrum) {
  const FrameParams p;
  const auto c = lib_mfcc(std::vector<double>(9600, 0.0), 16000, p);
  ASSERT_EQ(c.rows(), 13u);
  ASSERT_EQ(c.cols(), 58u);
  const double c0 = std::sqrt(26.0) * std::log(1e-10);
  for (std::size_t t = 0; t < c.cols(); ++t) {
    EXPECT_NEAR(c(0, t), c0, 1e-9);
    for (std::size_t k = 1; k < 13; ++k) EXPECT_NEAR(c(k, t), 0.0, 1e-9);
  }
}

TEST(Mfcc, SineMatchesDirectDftOracle) {
  const auto x = sine(1000.0, 0.6, 16000);
  const auto c = lib_mfcc(x, 16000);
  EXPECT_LE(max_abs_vs_oracle(c, oracle::mfcc(x, 16000)), 1e-8);
}

TEST(Mfcc, OracleParityAtOtherRates) {
  for (int fs : {8000, 22050}) {
    const auto x = white_noise(static_cast<std::size_t>(0.7 * fs), 4 + fs);
    EXPECT_LE(max_abs_vs_oracle(lib_mfcc(x, fs), oracle::mfcc(x, fs)), 1e-8) << fs;
  }
}

TEST(Mfcc, InvariantToPaddingBeyondMinimum) {
  const auto x = white_noise(12000, 9);
  FrameParams p;
  const auto frames = frame_signal(x, 16000, p);
  const auto base = mfcc(frames, p, 16000);
  EXPECT_EQ(MelFilterbank(16000, 400, p).fft_size(), 1024u);
  for (std::size_t m : {2048u, 4096u}) {
    p.fft_size = m;
    const auto padded = mfcc(frames, p, 16000);
    double worst = 0.0;
    for (std::size_t i = 0; i < base.data().size(); ++i) {
      worst = std::max(worst, std::abs(base.data()[i] - padded.data()[i]));
    }
    EXPECT_LE(worst, 1e-8) << m;
  }
  p.fft_size = 512;  // below 2N-1: aliased, rejected
  EXPECT_THROW(MelFilterbank(16000, 400, p), InputError);
}

TEST(Mfcc, AmplitudeScalingShiftsOnlyC0) {
  const auto x = white_noise(16000, 21);
  std::vector<double> y(x);
  const double g = 3.7;
  for (auto& v : y) v *= g;
  const auto cx = lib_mfcc(x, 16000);
  const auto cy = lib_mfcc(y, 16000);
  const double shift = std::sqrt(26.0) * std::log(g * g);
  for (std::size_t t = 0; t < cx.cols(); ++t) {
    EXPECT_NEAR(cy(0, t) - cx(0, t), shift, 1e-6);
    for (std::size_t k = 1; k < 13; ++k) EXPECT_NEAR(cy(k, t), cx(k, t), 1e-6);
  }
}

TEST(Mfcc, FilterbankCoversZeroToNyquist) {
  const MelFilterbank bank(16000, 400, {});
  ASSERT_EQ(bank.edges_hz().size(), 28u);
  EXPECT_EQ(bank.edges_hz().front(), 0.0);
  EXPECT_EQ(bank.edges_hz().back(), 8000.0);
  for (std::size_t b = 0; b < 26; ++b) {
    EXPECT_NEAR(bank.weight(b, bank.edges_hz()[b + 1]), 1.0, 1e-9);
  }
  EXPECT_NEAR(hz_to_mel(mel_to_hz(1234.5)), 1234.5, 1e-9);
}

TEST(Deltas, ConstantSequenceHasZeroDeltas) {
  Matrix c(13, 20, 2.5);
  const auto d = deltas(c, 2);
  for (double v : d.velocity.data()) EXPECT_EQ(v, 0.0);
  for (double v : d.acceleration.data()) EXPECT_EQ(v, 0.0);
}

TEST(Deltas, LinearRampHasUnitSlopeInInterior) {
  Matrix c(1, 12);
  for (std::size_t t = 0; t < 12; ++t) c(0, t) = static_cast<double>(t);
  const auto v = regression_delta(c, 2);
  for (std::size_t t = 2; t + 2 < 12; ++t) EXPECT_NEAR(v(0, t), 1.0, 1e-15);
  EXPECT_LT(v(0, 0), 1.0);  // edge replication flattens the ends
}

TEST(Deltas, MatchesDirectFormula) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  Matrix c(13, 7);
  for (auto& v : c.data()) v = g(rng);
  const auto d = regression_delta(c, 2);
  auto at = [&](std::size_t r, long t) {
    t = std::clamp(t, 0L, 6L);
    return c(r, static_cast<std::size_t>(t));
  };
  for (std::size_t r = 0; r < 13; ++r) {
    for (long t = 0; t < 7; ++t) {
      const double expect = (1.0 * (at(r, t + 1) - at(r, t - 1)) + 2.0 * (at(r, t + 2) - at(r, t - 2))) / 10.0;
      EXPECT_NEAR(d(r, static_cast<std::size_t>(t)), expect, 1e-14);
    }
  }
}

TEST(Deltas, TimeReversalNegatesVelocity) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  Matrix c(13, 30);
  for (auto& v : c.data()) v = g(rng);
  Matrix rev(13, 30);
  for (std::size_t r = 0; r < 13; ++r) {
    for (std::size_t t = 0; t < 30; ++t) rev(r, t) = c(r, 29 - t);
  }
  const auto d = regression_delta(c, 2);
  const auto dr = regression_delta(rev, 2);
  for (std::size_t r = 0; r < 13; ++r) {
    for (std::size_t t = 0; t < 30; ++t) EXPECT_NEAR(dr(r, t), -d(r, 29 - t), 1e-14);
  }
}

TEST(SummarizeClip, SingleColumnIsIdentity) {
  Matrix m(39, 1);
  for (std::size_t r = 0; r < 39; ++r) m(r, 0) = 0.5 * r - 3.0;
  const auto v = summarize_clip(m);
  for (std::size_t r = 0; r < 39; ++r) EXPECT_EQ(v[r], m(r, 0));
}

TEST(SummarizeClip, OnesSumToFrameCount) {
  const auto v = summarize_clip(Matrix(39, 58, 1.0));
  for (double x : v) EXPECT_EQ(x, 58.0);
}

TEST(SummarizeClip, RepeatedFramesDoubleTheVector) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Matrix m(39, 40);
  for (auto& v : m.data()) v = g(rng);
  Matrix twice(39, 80);
  for (std::size_t r = 0; r < 39; ++r) {
    for (std::size_t t = 0; t < 80; ++t) twice(r, t) = m(r, t % 40);
  }
  const auto a = summarize_clip(m);
  const auto b = summarize_clip(twice);
  for (std::size_t r = 0; r < 39; ++r) EXPECT_NEAR(b[r], 2.0 * a[r], 1e-9);
}

TEST(Standardize, TwoPointPopulationZScore) {
  std::vector<FeatureVector> vs{{{}, {0.0}}, {{}, {2.0}}};
  const auto s = standardize(vs);
  EXPECT_DOUBLE_EQ(s.vectors[0].values[0], -1.0);
  EXPECT_DOUBLE_EQ(s.vectors[1].values[0], 1.0);
  EXPECT_DOUBLE_EQ(s.transform.sd[0], 1.0);
}

TEST(Standardize, ZeroVarianceGuard) {
  std::vector<FeatureVector> vs(5, FeatureVector{{}, {3.0, -1.0}});
  for (const auto& v : standardize(vs).vectors) {
    EXPECT_EQ(v.values[0], 0.0);
    EXPECT_EQ(v.values[1], 0.0);
  }
  EXPECT_THROW(standardize(std::span(vs).first(1)), InputError);
}

TEST(Standardize, MomentsAfterScaling) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(5.0, 40.0);
  std::vector<FeatureVector> vs(100);
  for (auto& v : vs) {
    v.values.resize(39);
    for (auto& x : v.values) x = g(rng);
  }
  const auto s = standardize(vs);
  for (std::size_t j = 0; j < 39; ++j) {
    double mean = 0.0;
    for (const auto& v : s.vectors) mean += v.values[j];
    mean /= 100.0;
    double var = 0.0;
    for (const auto& v : s.vectors) var += (v.values[j] - mean) * (v.values[j] - mean);
    EXPECT_NEAR(mean, 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt(var / 100.0), 1.0, 1e-10);
  }
}

TEST(FeatureExtractor, ThirtyNineDimsAndCsvRoundTrip) {
  FeatureExtractor fx(FrameParams{});
  fx.prepare(16000);
  Clip clip{{"r1", "i1", 6, 0, 600, VocalClass::CHNSP}, white_noise(9600, 2), 16000};
  const auto m = fx.feature_matrix(clip.samples, 16000);
  EXPECT_EQ(m.rows(), 39u);
  EXPECT_EQ(m.cols(), 58u);
  const auto v = fx.extract(clip);
  EXPECT_EQ(v.values.size(), 39u);
  EXPECT_EQ(v.info.clip_id, clip.clip_id());

  const std::vector<FeatureVector> vs{v};
  const auto text = serialize_features(vs);
  EXPECT_EQ(text.substr(0, text.find('\n')).substr(0, 51),
            "clip_id,recording_id,infant_id,age_months,class,f0,");
  EXPECT_NE(text.find(",f38\n"), std::string::npos);
  std::istringstream in(text);
  const auto back = parse_features(in, "mem");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].values, v.values);
  EXPECT_EQ(back[0].info, v.info);

  EXPECT_THROW(fx.feature_matrix(clip.samples, 8000), InputError);
}
