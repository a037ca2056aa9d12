#pragma once

// Brute-force MFCC reference used by the unit and acceptance suites. It
// shares no code with the library path: framing uses integer arithmetic,
// the power spectrum is a direct O(N*M) DFT at M = 2N points (not a power of
// two), the autocorrelation is a direct inverse DFT, filter kernels come from
// adaptive Gauss-Kronrod integration, and the DCT is evaluated term by term.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

struct MfccSettings {
  int frame_ms = 25;
  int hop_ms = 10;
  int bands = 26;
  int cepstra = 13;
  double alpha = 0.97;
  double log_floor = 1e-10;
};

inline std::size_t frame_count(std::size_t n, int fs, const MfccSettings& s) {
  // duration_ms = n * 1000 / fs, T = 1 + floor((duration_ms - frame) / hop).
  const std::int64_t num = static_cast<std::int64_t>(n) * 1000 - std::int64_t{s.frame_ms} * fs;
  if (num < 0) return 0;
  return 1 + static_cast<std::size_t>(num / (std::int64_t{s.hop_ms} * fs));
}

inline double mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

// Triangular weight of band b (0-based), written directly in mel units.
inline double tri_weight(int b, int bands, int fs, double hz) {
  const double top = mel(fs / 2.0);
  const double step = top / (bands + 1);
  const double m = mel(hz);
  const double left = step * b;
  const double center = step * (b + 1);
  const double right = step * (b + 2);
  if (m <= left || m >= right) return 0.0;
  return m <= center ? (m - left) / step : (right - m) / step;
}

inline double mel_inv(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// kernels[b][tau] = c_tau * (2/fs) * integral w_b(f) cos(2 pi f tau / fs) df
inline const std::vector<std::vector<double>>& kernels(int fs, std::size_t n,
                                                       const MfccSettings& s) {
  static std::map<std::pair<int, std::size_t>, std::vector<std::vector<double>>> cache;
  auto key = std::make_pair(fs, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  using boost::math::quadrature::gauss_kronrod;
  const double top = mel(fs / 2.0);
  const double step = top / (s.bands + 1);
  std::vector<std::vector<double>> k(s.bands, std::vector<double>(n));
  for (int b = 0; b < s.bands; ++b) {
    const double f_lo = mel_inv(step * b);
    const double f_mid = mel_inv(step * (b + 1));
    const double f_hi = b + 2 == s.bands + 1 ? fs / 2.0 : mel_inv(step * (b + 2));
    for (std::size_t tau = 0; tau < n; ++tau) {
      auto integrand = [&](double f) {
        return tri_weight(b, s.bands, fs, f) *
               std::cos(2.0 * std::numbers::pi * f * static_cast<double>(tau) / fs);
      };
      double total = 0.0;
      // Split each side into pieces so the adaptive rule sees few oscillations.
      for (auto [a, c] : {std::pair{f_lo, f_mid}, std::pair{f_mid, f_hi}}) {
        const int pieces = 1 + static_cast<int>(static_cast<double>(tau) * (c - a) / fs);
        for (int p = 0; p < pieces; ++p) {
          const double x0 = a + (c - a) * p / pieces;
          const double x1 = a + (c - a) * (p + 1) / pieces;
          total += gauss_kronrod<double, 31>::integrate(integrand, x0, x1, 8, 1e-13);
        }
      }
      k[b][tau] = (tau == 0 ? 1.0 : 2.0) * (2.0 / fs) * total;
    }
  }
  return cache.emplace(key, std::move(k)).first->second;
}

// Returns cepstra[t][k] for every frame.
inline std::vector<std::vector<double>> mfcc(std::span<const double> x, int fs,
                                             const MfccSettings& s = {}) {
  const std::size_t t_count = frame_count(x.size(), fs, s);
  const auto n = static_cast<std::size_t>(std::lround(s.frame_ms * fs / 1000.0));
  const std::size_t m = 2 * n;
  const double pi = std::numbers::pi;

  std::vector<double> cos_table(m);
  std::vector<double> sin_table(m);
  for (std::size_t i = 0; i < m; ++i) {
    cos_table[i] = std::cos(2.0 * pi * i / m);
    sin_table[i] = std::sin(2.0 * pi * i / m);
  }
  const auto& kern = kernels(fs, n, s);

  std::vector<std::vector<double>> out;
  for (std::size_t t = 0; t < t_count; ++t) {
    const std::size_t start = static_cast<std::size_t>(
        (static_cast<std::int64_t>(t) * s.hop_ms * fs) / 1000);
    std::vector<double> frame(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = start + i;
      const double cur = j < x.size() ? x[j] : 0.0;
      const double prev = j == 0 ? x[0] : (j - 1 < x.size() ? x[j - 1] : 0.0);
      const double emph = j < x.size() ? cur - s.alpha * prev : 0.0;
      const double w = 0.54 - 0.46 * std::cos(2.0 * pi * i / (n - 1));
      frame[i] = emph * w;
    }
    std::vector<double> power(m);
    for (std::size_t k = 0; k < m; ++k) {
      double re = 0.0;
      double im = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        re += frame[i] * cos_table[(k * i) % m];
        im -= frame[i] * sin_table[(k * i) % m];
      }
      power[k] = re * re + im * im;
    }
    std::vector<double> r(n);
    for (std::size_t tau = 0; tau < n; ++tau) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += power[k] * cos_table[(k * tau) % m];
      r[tau] = acc / m;
    }
    std::vector<double> logs(s.bands);
    for (int b = 0; b < s.bands; ++b) {
      double e = 0.0;
      for (std::size_t tau = 0; tau < n; ++tau) e += kern[b][tau] * r[tau];
      logs[b] = std::log(std::max(e, s.log_floor));
    }
    std::vector<double> c(s.cepstra);
    for (int k = 0; k < s.cepstra; ++k) {
      double acc = 0.0;
      for (int b = 0; b < s.bands; ++b) acc += logs[b] * std::cos(pi * k * (b + 0.5) / s.bands);
      c[k] = acc * std::sqrt((k == 0 ? 1.0 : 2.0) / s.bands);
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace oracle
