#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace loghold {

using Complex = std::complex<double>;

/// Real-to-complex 2D transform pair on an n x n periodic grid, row-major with
/// the x1 index fastest. Spectral arrays hold n rows of (n/2 + 1) modes.
///
/// Plans are created with FFTW_ESTIMATE so the chosen algorithm, and hence the
/// floating-point result, is the same on every run. Execution is reentrant.
class Fft2 {
 public:
  explicit Fft2(int n);
  ~Fft2();
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  int n() const { return n_; }
  std::size_t spectral_size() const { return static_cast<std::size_t>(n_) * (n_ / 2 + 1); }

  /// Unnormalized forward transform.
  std::vector<Complex> forward(std::span<const double> values) const;
  /// Inverse transform including the 1/n^2 normalization. The input is copied.
  std::vector<double> inverse(std::span<const Complex> modes) const;

  /// Signed integer wavenumber of row index (x2 direction).
  int row_mode(int j) const { return j <= n_ / 2 ? j : j - n_; }

 private:
  struct Plans;
  int n_;
  std::unique_ptr<Plans> plans_;
};

}  // namespace loghold
