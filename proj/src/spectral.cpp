#include "loghold/spectral.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace loghold {
namespace {

// The FFTW planner is not thread-safe; plan execution is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft2::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
};

Fft2::Fft2(int n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("Fft2: n must be even and >= 2");
  std::vector<double> real(static_cast<std::size_t>(n) * n);
  std::vector<Complex> modes(spectral_size());
  auto* cplx = reinterpret_cast<fftw_complex*>(modes.data());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->r2c = fftw_plan_dft_r2c_2d(n, n, real.data(), cplx, flags);
  plans_->c2r = fftw_plan_dft_c2r_2d(n, n, cplx, real.data(), flags);
  if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("Fft2: FFTW planning failed");
}

Fft2::~Fft2() {
  std::lock_guard lock(planner_mutex());
  if (plans_->r2c) fftw_destroy_plan(plans_->r2c);
  if (plans_->c2r) fftw_destroy_plan(plans_->c2r);
}

std::vector<Complex> Fft2::forward(std::span<const double> values) const {
  if (values.size() != static_cast<std::size_t>(n_) * n_)
    throw std::invalid_argument("Fft2::forward: size mismatch");
  std::vector<double> in(values.begin(), values.end());
  std::vector<Complex> out(spectral_size());
  fftw_execute_dft_r2c(plans_->r2c, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> Fft2::inverse(std::span<const Complex> modes) const {
  if (modes.size() != spectral_size()) throw std::invalid_argument("Fft2::inverse: size mismatch");
  std::vector<Complex> in(modes.begin(), modes.end());
  std::vector<double> out(static_cast<std::size_t>(n_) * n_);
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  for (double& v : out) v *= scale;
  return out;
}

}  // namespace loghold
