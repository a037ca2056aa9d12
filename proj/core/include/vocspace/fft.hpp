#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace vocspace {

/// In-place iterative radix-2 FFT with precomputed twiddles and bit-reversal
/// table. The inverse transform is unnormalized.
class Fft {
 public:
  explicit Fft(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  void forward(std::span<std::complex<double>> data) const { run(data, false); }
  void inverse(std::span<std::complex<double>> data) const { run(data, true); }

 private:
  void run(std::span<std::complex<double>> data, bool inverse) const;

  std::size_t size_;
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> bit_reverse_;
};

std::size_t next_power_of_two(std::size_t n);

}  // namespace vocspace
