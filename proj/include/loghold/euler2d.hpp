#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "loghold/fields.hpp"
#include "loghold/modcont.hpp"
#include "loghold/spectral.hpp"

namespace loghold {

struct SymmetryTag {
  bool odd_odd = false;  ///< omega odd in x1 and in x2
};

/// Vorticity on a periodic grid at time t. The constructor rejects non-finite
/// values, a nonzero mean, and a set odd_odd tag that the nodes violate.
class EulerState {
 public:
  EulerState(const Grid2& grid, std::vector<double> omega, double t = 0.0, SymmetryTag tag = {});

  const Grid2& grid() const { return grid_; }
  std::span<const double> omega() const { return *omega_; }
  double t() const { return t_; }
  SymmetryTag tag() const { return tag_; }
  double mean() const;
  /// Unnormalized r2c coefficients, computed on first use.
  std::span<const Complex> spectrum() const;
  ScalarField field(Interpolation mode = Interpolation::bicubic) const;

 private:
  Grid2 grid_;
  std::shared_ptr<const std::vector<double>> omega_;
  double t_;
  SymmetryTag tag_;
  mutable std::shared_ptr<const std::vector<Complex>> spectrum_;
};

/// Tolerances for the state checks.
inline constexpr double kMeanTolerance = 1e-10;
inline constexpr double kSymmetryTolerance = 1e-10;

/// Largest |omega(x) + omega(mirrored x)| over nodes and both axes.
double odd_odd_defect(const Grid2& grid, std::span<const double> omega);

struct EulerNorms {
  double l2 = 0.0;
  double l4 = 0.0;
};

/// Pseudo-spectral vorticity solver: u = grad^perp (-Delta)^-1 omega,
/// omega_t = -u . grad omega with 2/3-rule truncation and classical RK4.
class Euler2dSolver {
 public:
  explicit Euler2dSolver(const Grid2& grid);
  ~Euler2dSolver();
  Euler2dSolver(const Euler2dSolver&) = delete;
  Euler2dSolver& operator=(const Euler2dSolver&) = delete;

  const Grid2& grid() const { return grid_; }
  /// True for modes kept by the square 2/3 truncation |m1|, |m2| <= n/3.
  bool kept(int m1, int m2) const;

  /// Velocity node values (u1, u2) with d1 u2 - d2 u1 = omega.
  std::pair<std::vector<double>, std::vector<double>> velocity(const EulerState& s) const;
  std::vector<double> divergence(std::span<const double> u1, std::span<const double> u2) const;
  std::vector<double> curl(std::span<const double> u1, std::span<const double> u2) const;

  /// Zeroes every mode outside the truncation.
  EulerState project(const EulerState& s) const;
  double max_speed(const EulerState& s) const;
  /// dt max|u| / h
  double cfl_number(const EulerState& s, double dt) const;

  /// One RK4 step of the truncated system; the state is projected first.
  /// Tracers are advanced with the same stage velocities (bicubic
  /// interpolation), positions wrapped into the box. Throws if the CFL number
  /// exceeds 0.5.
  EulerState step(const EulerState& s, double dt, std::span<Vec2> tracers = {}) const;

  /// L2 and L4 norms by quadrature on a twice-refined grid, which is exact for
  /// truncated states.
  EulerNorms norms(const EulerState& s) const;

 private:
  Grid2 grid_;
  std::unique_ptr<Fft2> fft_;
  std::unique_ptr<Fft2> fine_;
  std::vector<double> k1_, k2_;  // angular wavenumbers per column / row
  std::vector<unsigned char> mask_;

  std::vector<Complex> rhs(std::span<const Complex> w, std::vector<double>* u1, std::vector<double>* u2) const;
};

inline constexpr double kMaxCfl = 0.5;

/// Steady gridded velocity (bicubic) from the Biot-Savart law.
VelocityField biot_savart(const EulerState& s);
VelocitySlice velocity_slice(const EulerState& s);
EulerState step(const EulerState& s, double dt);

/// omega0 = 2 x1 x2 / (4 x1^2 + x2^2) |x|^beta for |x| <= 1, smoothly cut off
/// to zero on [1, 1.5]. Tagged odd_odd; exact antisymmetry on nodes.
EulerState bahouri_chemin_init(double beta, const Grid2& grid);
double bahouri_chemin_value(double beta, Vec2 x);

/// Odd-odd synthetic profile (log 1/|y|)^-gamma sin(2 phi), cut off smoothly
/// between support/2 and support (support < 1).
ScalarField log_strain_profile(double gamma, double support);

/// Kernel constant c0 of the origin strain integral on the torus analogue.
inline constexpr double kOriginStrainConstant = 1.2732395447351628;  // 4 / pi

/// c0 * integral over {y1, y2 > 0, inner < |y| < outer} of y1 y2 / |y|^4 omega(y),
/// by Gauss-Legendre quadrature in (log r, angle).
double origin_strain_integral(const ScalarField& omega, SymmetryTag tag, double inner_cutoff, double outer_radius);
/// State version: interpolated omega, outer radius L, inner cutoff >= 2h.
double origin_strain_diagnostic(const EulerState& s, double inner_cutoff);

/// Coefficient of the interpolated vorticity about the origin. Every sampled
/// radius, including the innermost band, must be at least 4h.
CoefficientEstimate vorticity_coefficient_at_origin(const EulerState& s, const ModulusFamily& m,
                                                    std::span<const double> radii, const SamplerSpec& sampler = {},
                                                    double plateau_tol = 1e-2, CoefficientProfile* profile = nullptr);

/// Innermost radius sampled by coefficient_profile for a ladder.
double innermost_sampled_radius(std::span<const double> radii);

/// Binary checkpoint: n, L, t as little-endian 64-bit values, then n^2 doubles.
void save_checkpoint(const EulerState& s, const std::filesystem::path& path);
EulerState load_checkpoint(const std::filesystem::path& path, SymmetryTag tag = {});
/// CSV "x1,x2,omega", one line per node.
std::string state_csv(const EulerState& s);

}  // namespace loghold
