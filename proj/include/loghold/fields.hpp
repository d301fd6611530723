#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "loghold/geometry.hpp"

namespace loghold {

/// Periodic box [-L, L)^2 sampled by n x n nodes at x = -L + i h, h = 2L / n.
/// Node values are stored row-major with the x1 index fastest.
class Grid2 {
 public:
  Grid2(int n, double half_period);

  int n() const { return n_; }
  double half_period() const { return half_period_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n_ + i; }
  /// Computed as (i - n/2) h so that mirrored nodes carry exactly negated coordinates.
  Vec2 node(int i, int j) const { return {(i - n_ / 2) * spacing_, (j - n_ / 2) * spacing_}; }
  /// Index of the node mirrored through the origin along one axis (i -> n - i).
  int mirror(int i) const { return (n_ - i) % n_; }

  double wrap(double x) const;
  Vec2 wrap(Vec2 p) const { return {wrap(p.x), wrap(p.y)}; }
  /// Shortest periodic representative of a displacement.
  Vec2 min_image(Vec2 d) const;

  friend bool operator==(const Grid2&, const Grid2&) = default;

 private:
  int n_;
  double half_period_;
  double spacing_;
};

enum class Interpolation {
  bicubic,   ///< Hermite bicubic with sixth-order finite-difference slopes (C1).
  spectral,  ///< Trigonometric interpolant; O(n^2) per evaluation.
};

/// Scalar field: either an analytic closure or periodic node values with an
/// interpolant. Immutable and cheap to copy.
class ScalarField {
 public:
  using Function = std::function<double(Vec2)>;

  static ScalarField analytic(Function f, std::optional<double> known_coefficient = std::nullopt);
  static ScalarField gridded(const Grid2& grid, std::vector<double> values,
                             Interpolation mode = Interpolation::bicubic,
                             std::optional<double> known_coefficient = std::nullopt);

  double operator()(Vec2 x) const;
  /// Gradient of the interpolant. Gridded fields only.
  Vec2 gradient(Vec2 x) const;

  bool is_gridded() const { return static_cast<bool>(gridded_); }
  const Grid2& grid() const;
  std::span<const double> values() const;
  Interpolation interpolation() const;
  std::optional<double> known_coefficient() const { return known_coefficient_; }

 private:
  struct Gridded;
  std::shared_ptr<const Function> analytic_;
  std::shared_ptr<const Gridded> gridded_;
  std::optional<double> known_coefficient_;
};

/// Evaluates f at x; gridded fields wrap x into the periodic box.
double eval_scalar(const ScalarField& f, Vec2 x);

/// Samples an analytic field at every node. Throws on a non-finite sample.
ScalarField sample_to_grid(const ScalarField& f, const Grid2& grid,
                           Interpolation mode = Interpolation::bicubic);

/// Spectral first derivatives (d/dx1, d/dx2) of periodic node values.
std::pair<std::vector<double>, std::vector<double>> spectral_gradient(const Grid2& grid,
                                                                      std::span<const double> values);

struct GradBound {
  double t = 0.0;
  double value = 0.0;  ///< sup over the domain of the largest singular value of grad u
};

enum class FlowKind { zero, rigid_rotation, linear_strain, shear, cellular, gridded };

/// One stored velocity time slice on a periodic grid.
struct VelocitySlice {
  double t = 0.0;
  ScalarField u1;
  ScalarField u2;
};

/// Catalog entry description, for listing and config validation.
struct CatalogEntry {
  std::string name;
  std::string formula;
  std::vector<std::string> parameters;
};

const std::vector<CatalogEntry>& velocity_catalog();

/// Time-dependent planar velocity: a closed-form catalog entry with exact
/// gradient, or a sequence of gridded slices interpolated linearly in time.
class VelocityField {
 public:
  static VelocityField zero();
  /// u = omega (-x2, x1)
  static VelocityField rigid_rotation(double omega);
  /// u = (lambda x1, -lambda x2)
  static VelocityField linear_strain(double lambda);
  /// u = (lambda x2, 0)
  static VelocityField shear(double lambda);
  /// u = A (-sin x1 cos x2, cos x1 sin x2), 2 pi periodic
  static VelocityField cellular(double amplitude);
  static VelocityField from_catalog(std::string_view name, const std::map<std::string, double>& params);

  /// Slices must share one grid and have strictly increasing times.
  static VelocityField gridded(std::vector<VelocitySlice> slices);
  /// A single slice treated as a steady field valid for all t.
  static VelocityField gridded_steady(VelocitySlice slice);

  FlowKind kind() const { return kind_; }
  std::string name() const;
  double parameter() const { return param_; }

  Vec2 operator()(Vec2 x, double t) const;
  Mat2 gradient(Vec2 x, double t) const;
  GradBound grad_sup(double t) const;

  /// Half period L when trajectories live on a torus [-L, L)^2.
  std::optional<double> half_period() const;
  bool covers(double t) const;
  double t_min() const;
  double t_max() const;

 private:
  struct Slices;
  FlowKind kind_ = FlowKind::zero;
  double param_ = 0.0;
  std::shared_ptr<const Slices> slices_;

  void check_time(double t) const;
};

Vec2 eval_velocity(const VelocityField& u, Vec2 x, double t);
GradBound grad_sup(const VelocityField& u, double t);

}  // namespace loghold
