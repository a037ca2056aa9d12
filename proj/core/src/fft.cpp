#include "vocspace/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace vocspace {

std::size_t next_power_of_two(std::size_t n) { return n <= 1 ? 1 : std::bit_ceil(n); }

Fft::Fft(std::size_t size) : size_(size) {
  if (size == 0 || !std::has_single_bit(size)) {
    throw std::invalid_argument("FFT size must be a power of two");
  }
  twiddles_.resize(size / 2);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / size;
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
  const int bits = std::countr_zero(size);
  bit_reverse_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b) {
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
    }
    bit_reverse_[i] = r;
  }
}

void Fft::run(std::span<std::complex<double>> data, bool inverse) const {
  if (data.size() != size_) throw std::invalid_argument("FFT buffer size mismatch");
  for (std::size_t i = 0; i < size_; ++i) {
    if (i < bit_reverse_[i]) std::swap(data[i], data[bit_reverse_[i]]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = size_ / len;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddles_[k * stride];
        if (inverse) w = std::conj(w);
        const auto u = data[start + k];
        const auto x = data[start + k + half];
        // Explicit product; operator* on std::complex carries NaN recovery.
        const std::complex<double> v{x.real() * w.real() - x.imag() * w.imag(),
                                     x.real() * w.imag() + x.imag() * w.real()};
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

}  // namespace vocspace
