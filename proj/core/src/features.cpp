#include "vocspace/features.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "vocspace/csv.hpp"
#include "vocspace/error.hpp"
#include "vocspace/fft.hpp"

namespace vocspace {
namespace {

constexpr double kFrameEps = 1e-9;

using Gauss16 = boost::math::quadrature::gauss<double, 16>;

// Quadrature nodes (Hz) and weights for one band: weight(f) * df, with the
// Gauss-Legendre rule applied on panels short enough to resolve
// cos(2 pi f tau / fs) for tau up to max_lag.
void band_nodes(const MelFilterbank& bank, std::size_t band, double lo, double hi,
                std::size_t max_lag, std::vector<double>& nodes,
                std::vector<double>& weights) {
  if (hi <= lo) return;
  const double cycles = static_cast<double>(max_lag) * (hi - lo) / bank.sample_rate_hz();
  const auto panels = static_cast<std::size_t>(std::ceil(2.0 * cycles)) + 1;
  const double width = (hi - lo) / static_cast<double>(panels);
  const auto& x = Gauss16::abscissa();
  const auto& w = Gauss16::weights();
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = lo + width * static_cast<double>(p);
    const double mid = a + 0.5 * width;
    const double half = 0.5 * width;
    // abscissa() holds the non-negative half of the symmetric rule.
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double offsets[2] = {x[i], -x[i]};
      const int count = (x[i] == 0.0) ? 1 : 2;
      for (int s = 0; s < count; ++s) {
        const double f = mid + half * offsets[s];
        nodes.push_back(f);
        weights.push_back(w[i] * half * bank.weight(band, f));
      }
    }
  }
}

}  // namespace

void FrameParams::validate() const {
  if (!(hop_ms > 0.0) || !(frame_ms > hop_ms)) {
    throw InputError("frame parameters require frame_ms > hop_ms > 0");
  }
  if (n_mel_bands < 1 || n_cepstra < 1 || n_cepstra > n_mel_bands) {
    throw InputError("frame parameters require 1 <= n_cepstra <= n_mel_bands");
  }
  if (!(pre_emphasis >= 0.0 && pre_emphasis < 1.0)) {
    throw InputError("pre_emphasis must lie in [0, 1)");
  }
  if (delta_window < 1) throw InputError("delta_window must be positive");
  if (!(log_floor > 0.0)) throw InputError("log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t frame_length(int sample_rate_hz, const FrameParams& p) {
  return static_cast<std::size_t>(std::lround(p.frame_ms * sample_rate_hz / 1000.0));
}

std::size_t frame_count(std::size_t n_samples, int sample_rate_hz, const FrameParams& p) {
  const double duration_ms = static_cast<double>(n_samples) * 1000.0 / sample_rate_hz;
  if (duration_ms + kFrameEps < p.frame_ms) return 0;
  return 1 + static_cast<std::size_t>(
                 std::floor((duration_ms - p.frame_ms) / p.hop_ms + kFrameEps));
}

Matrix frame_signal(std::span<const double> samples, int sample_rate_hz,
                    const FrameParams& p) {
  p.validate();
  const std::size_t t_count = frame_count(samples.size(), sample_rate_hz, p);
  if (t_count == 0) {
    throw InputError("clip of " + std::to_string(samples.size()) +
                     " samples is shorter than one frame");
  }
  const std::size_t n = frame_length(sample_rate_hz, p);

  std::vector<double> emphasized(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double prev = i > 0 ? samples[i - 1] : samples[0];
    emphasized[i] = samples[i] - p.pre_emphasis * prev;
  }

  std::vector<double> window(n);
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = n > 1 ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1)) : 1.0;
  }

  Matrix frames(t_count, n);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto start = static_cast<std::size_t>(
        std::floor(static_cast<double>(t) * p.hop_ms * sample_rate_hz / 1000.0 + kFrameEps));
    auto row = frames.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      // Reads past the end only happen when frame_ms * fs / 1000 rounds up.
      const std::size_t k = start + i;
      row[i] = (k < emphasized.size() ? emphasized[k] : 0.0) * window[i];
    }
  }
  return frames;
}

MelFilterbank::MelFilterbank(int sample_rate_hz, std::size_t frame_length,
                             const FrameParams& p)
    : sample_rate_hz_(sample_rate_hz), frame_length_(frame_length) {
  p.validate();
  if (sample_rate_hz <= 0 || frame_length < 2) {
    throw InputError("filterbank needs a positive sample rate and frame length >= 2");
  }
  const std::size_t min_fft = next_power_of_two(2 * frame_length - 1);
  fft_size_ = p.fft_size == 0 ? min_fft : p.fft_size;
  if (fft_size_ < min_fft || next_power_of_two(fft_size_) != fft_size_) {
    throw InputError("fft_size must be a power of two >= " + std::to_string(min_fft));
  }

  const auto bands = static_cast<std::size_t>(p.n_mel_bands);
  const double mel_max = hz_to_mel(0.5 * sample_rate_hz);
  edges_mel_.resize(bands + 2);
  edges_hz_.resize(bands + 2);
  for (std::size_t i = 0; i < bands + 2; ++i) {
    edges_mel_[i] = mel_max * static_cast<double>(i) / static_cast<double>(bands + 1);
    edges_hz_[i] = mel_to_hz(edges_mel_[i]);
  }
  edges_hz_.front() = 0.0;
  edges_hz_.back() = 0.5 * sample_rate_hz;

  // K_m[tau] = c_tau * (2 / fs) * integral w_m(f) cos(2 pi f tau / fs) df,
  // c_0 = 1 and c_tau = 2 for the two symmetric lags.
  kernels_ = Matrix(bands, frame_length);
  const std::size_t max_lag = frame_length - 1;
  const double omega_scale = 2.0 * std::numbers::pi / sample_rate_hz;
  std::vector<double> nodes;
  std::vector<double> weights;
  for (std::size_t m = 0; m < bands; ++m) {
    nodes.clear();
    weights.clear();
    band_nodes(*this, m, edges_hz_[m], edges_hz_[m + 1], max_lag, nodes, weights);
    band_nodes(*this, m, edges_hz_[m + 1], edges_hz_[m + 2], max_lag, nodes, weights);
    auto k = kernels_.row(m);
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      // Chebyshev recurrence for cos(tau * theta).
      const double theta = omega_scale * nodes[q];
      const double two_cos = 2.0 * std::cos(theta);
      double prev = 1.0;
      double cur = std::cos(theta);
      k[0] += weights[q];
      if (frame_length > 1) k[1] += weights[q] * cur;
      for (std::size_t tau = 2; tau < frame_length; ++tau) {
        const double next = two_cos * cur - prev;
        prev = cur;
        cur = next;
        k[tau] += weights[q] * cur;
      }
    }
    const double scale = 2.0 / sample_rate_hz;
    k[0] *= scale;
    for (std::size_t tau = 1; tau < frame_length; ++tau) k[tau] *= 2.0 * scale;
  }
}

double MelFilterbank::weight(std::size_t band, double f_hz) const {
  const double lo = edges_hz_[band];
  const double hi = edges_hz_[band + 2];
  if (f_hz <= lo || f_hz >= hi) return 0.0;
  const double mel = hz_to_mel(f_hz);
  const double left = edges_mel_[band];
  const double center = edges_mel_[band + 1];
  const double right = edges_mel_[band + 2];
  if (mel <= center) return (mel - left) / (center - left);
  return std::max(0.0, (right - mel) / (right - center));
}

Matrix MelFilterbank::band_energies(const Matrix& frames) const {
  if (frames.cols() != frame_length_) {
    throw InputError("frame length does not match the filterbank");
  }
  const std::size_t t_count = frames.rows();
  const std::size_t m = fft_size_;
  const std::size_t n = frame_length_;
  const Fft fft(m);
  Matrix energies(t_count, bands());
  std::vector<std::complex<double>> buf(m);
  std::vector<double> r_a(n);
  std::vector<double> r_b(n);
  std::vector<std::complex<double>> power(m);

  // Two real frames share one complex transform: frame a in the real part,
  // frame b in the imaginary part.
  for (std::size_t t = 0; t < t_count; t += 2) {
    const bool pair = t + 1 < t_count;
    std::fill(buf.begin(), buf.end(), std::complex<double>{});
    const auto a = frames.row(t);
    for (std::size_t i = 0; i < n; ++i) {
      buf[i] = {a[i], pair ? frames(t + 1, i) : 0.0};
    }
    fft.forward(buf);
    for (std::size_t k = 0; k < m; ++k) {
      const auto z = buf[k];
      const auto zc = std::conj(buf[(m - k) % m]);
      const auto sum = z + zc;
      const auto diff = z - zc;
      // X_a = (z + conj z') / 2, X_b = (z - conj z') / 2i.
      power[k] = {0.25 * std::norm(sum), 0.25 * std::norm(diff)};
    }
    fft.inverse(power);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t tau = 0; tau < n; ++tau) {
      r_a[tau] = power[tau].real() * inv_m;
      r_b[tau] = power[tau].imag() * inv_m;
    }
    for (std::size_t b = 0; b < bands(); ++b) {
      const auto k = kernels_.row(b);
      double ea = 0.0;
      double eb = 0.0;
      for (std::size_t tau = 0; tau < n; ++tau) {
        ea += k[tau] * r_a[tau];
        eb += k[tau] * r_b[tau];
      }
      energies(t, b) = ea;
      if (pair) energies(t + 1, b) = eb;
    }
  }
  return energies;
}

Matrix cepstra_from_energies(const Matrix& energies, const FrameParams& p) {
  const std::size_t t_count = energies.rows();
  const std::size_t bands = energies.cols();
  const auto n_c = static_cast<std::size_t>(p.n_cepstra);
  Matrix basis(n_c, bands);
  for (std::size_t k = 0; k < n_c; ++k) {
    const double norm = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(bands));
    for (std::size_t j = 0; j < bands; ++j) {
      basis(k, j) = norm * std::cos(std::numbers::pi * static_cast<double>(k) *
                                    (static_cast<double>(j) + 0.5) / static_cast<double>(bands));
    }
  }
  Matrix c(n_c, t_count);
  std::vector<double> logs(bands);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t j = 0; j < bands; ++j) {
      logs[j] = std::log(std::max(energies(t, j), p.log_floor));
    }
    for (std::size_t k = 0; k < n_c; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < bands; ++j) s += basis(k, j) * logs[j];
      c(k, t) = s;
    }
  }
  return c;
}

Matrix mfcc(const Matrix& frames, const MelFilterbank& bank, const FrameParams& p) {
  return cepstra_from_energies(bank.band_energies(frames), p);
}

Matrix mfcc(const Matrix& frames, const FrameParams& p, int sample_rate_hz) {
  const MelFilterbank bank(sample_rate_hz, frames.cols(), p);
  return mfcc(frames, bank, p);
}

Matrix regression_delta(const Matrix& c, int window) {
  const std::size_t rows = c.rows();
  const std::size_t t_count = c.cols();
  Matrix d(rows, t_count);
  if (t_count == 0) return d;
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += static_cast<double>(n * n);
  denom *= 2.0;
  const auto last = static_cast<std::ptrdiff_t>(t_count) - 1;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t t = 0; t <= last; ++t) {
      double s = 0.0;
      for (int n = 1; n <= window; ++n) {
        const auto fwd = static_cast<std::size_t>(std::min<std::ptrdiff_t>(t + n, last));
        const auto back = static_cast<std::size_t>(std::max<std::ptrdiff_t>(t - n, 0));
        s += n * (c(r, fwd) - c(r, back));
      }
      d(r, static_cast<std::size_t>(t)) = s / denom;
    }
  }
  return d;
}

Deltas deltas(const Matrix& c, int window) {
  Deltas out;
  out.velocity = regression_delta(c, window);
  out.acceleration = regression_delta(out.velocity, window);
  return out;
}

Matrix stack_features(const Matrix& c, const Deltas& d) {
  const std::size_t rows = c.rows();
  Matrix m(3 * rows, c.cols());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t t = 0; t < c.cols(); ++t) {
      m(r, t) = c(r, t);
      m(rows + r, t) = d.velocity(r, t);
      m(2 * rows + r, t) = d.acceleration(r, t);
    }
  }
  return m;
}

std::vector<double> summarize_clip(const Matrix& m) {
  std::vector<double> v(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double x : m.row(r)) v[r] += x;
  }
  return v;
}

FeatureVector summarize_clip(const Matrix& m, ClipInfo info) {
  return FeatureVector{std::move(info), summarize_clip(m)};
}

StandardizedSet standardize(std::span<const FeatureVector> vs) {
  if (vs.size() < 2) throw InputError("standardization needs at least 2 vectors");
  const std::size_t dim = vs.front().values.size();
  for (const auto& v : vs) {
    if (v.values.size() != dim) throw InputError("feature vectors differ in dimension");
  }
  const auto n = static_cast<double>(vs.size());
  StandardizedSet out;
  out.transform.mean.assign(dim, 0.0);
  out.transform.sd.assign(dim, 0.0);
  for (const auto& v : vs) {
    for (std::size_t j = 0; j < dim; ++j) out.transform.mean[j] += v.values[j];
  }
  for (auto& m : out.transform.mean) m /= n;
  for (const auto& v : vs) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = v.values[j] - out.transform.mean[j];
      out.transform.sd[j] += d * d;
    }
  }
  for (auto& s : out.transform.sd) s = std::sqrt(s / n);
  out.vectors.assign(vs.begin(), vs.end());
  for (auto& v : out.vectors) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double sd = out.transform.sd[j];
      v.values[j] = sd < 1e-12 ? 0.0 : (v.values[j] - out.transform.mean[j]) / sd;
    }
  }
  return out;
}

FeatureExtractor::FeatureExtractor(FrameParams p) : params_(p) { params_.validate(); }

const MelFilterbank& FeatureExtractor::prepare(int sample_rate_hz) {
  auto it = banks_.find(sample_rate_hz);
  if (it == banks_.end()) {
    it = banks_
             .emplace(sample_rate_hz,
                      MelFilterbank(sample_rate_hz, frame_length(sample_rate_hz, params_),
                                    params_))
             .first;
  }
  return it->second;
}

Matrix FeatureExtractor::feature_matrix(std::span<const double> samples,
                                        int sample_rate_hz) const {
  const auto it = banks_.find(sample_rate_hz);
  if (it == banks_.end()) {
    throw InputError("no filterbank prepared for " + std::to_string(sample_rate_hz) + " Hz");
  }
  const Matrix frames = frame_signal(samples, sample_rate_hz, params_);
  const Matrix c = mfcc(frames, it->second, params_);
  return stack_features(c, deltas(c, params_.delta_window));
}

FeatureVector FeatureExtractor::extract(const Clip& clip) const {
  return summarize_clip(feature_matrix(clip.samples, clip.sample_rate_hz), clip.info());
}

std::string serialize_features(std::span<const FeatureVector> vs) {
  std::string out = "clip_id,recording_id,infant_id,age_months,class";
  const std::size_t dim = vs.empty() ? 39 : vs.front().values.size();
  for (std::size_t j = 0; j < dim; ++j) out += ",f" + std::to_string(j);
  out += '\n';
  for (const auto& v : vs) {
    out += v.info.clip_id + ',' + v.info.recording_id + ',' + v.info.infant_id + ',' +
           std::to_string(v.info.age_months) + ',' + std::string(to_string(v.info.label));
    for (double x : v.values) out += ',' + csv::format(x);
    out += '\n';
  }
  return out;
}

std::vector<FeatureVector> parse_features(std::istream& in, std::string_view origin) {
  const auto table = csv::Table::parse(in, std::string(origin));
  const auto c_id = table.column("clip_id");
  const auto c_rec = table.column("recording_id");
  const auto c_inf = table.column("infant_id");
  const auto c_age = table.column("age_months");
  const auto c_cls = table.column("class");
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; table.has_column("f" + std::to_string(j)); ++j) {
    feature_cols.push_back(table.column("f" + std::to_string(j)));
  }
  if (feature_cols.empty()) throw InputError(std::string(origin) + ": no feature columns f0..");
  std::vector<FeatureVector> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table.row(i);
    FeatureVector v;
    v.info.clip_id = r[c_id];
    v.info.recording_id = r[c_rec];
    v.info.infant_id = r[c_inf];
    v.info.age_months = static_cast<int>(csv::parse_int(r[c_age], "age_months", table.line_of(i)));
    v.info.label = parse_class(r[c_cls]);
    v.values.reserve(feature_cols.size());
    for (auto c : feature_cols) {
      v.values.push_back(csv::parse_double(r[c], "feature value", table.line_of(i)));
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace vocspace
