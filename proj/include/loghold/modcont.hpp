#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "loghold/fields.hpp"
#include "loghold/geometry.hpp"

namespace loghold {

/// Largest admissible argument of a modulus. Keeps (log 1/s)^-gamma below one
/// and monotone; the coefficient only concerns s -> 0.
inline constexpr double kModulusArgumentMax = 0.3;

enum class ModulusKind { holder, log_holder };

/// delta(s) = s^beta (holder, 0 < beta <= 1) or (log 1/s)^-gamma (log_holder, gamma > 0).
class ModulusFamily {
 public:
  static ModulusFamily holder(double beta);
  static ModulusFamily log_holder(double gamma);

  ModulusKind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  std::string name() const;

  /// delta(s) for 0 < s <= kModulusArgumentMax.
  double operator()(double s) const;
  /// delta(s) without the argument range check, for s in (0, 1).
  double unchecked(double s) const;

 private:
  ModulusFamily(ModulusKind k, double e) : kind_(k), exponent_(e) {}
  ModulusKind kind_;
  double exponent_;
};

double modulus_value(const ModulusFamily& m, double s);

/// Geometric ladder r_k = r_max * ratio^k, k = 0..count-1.
std::vector<double> geometric_radii(double r_max, double ratio, int count);

struct SamplerSpec {
  enum class Kind {
    grid,             ///< every grid node inside the ball
    direction_sweep,  ///< equi-angular directions on geometric shells
  };
  Kind kind = Kind::direction_sweep;
  int directions = 720;
  int shells_per_band = 8;
  int jobs = 1;  ///< worker threads for point evaluation; 0 = all cores
};

std::string to_string(SamplerSpec::Kind k);

/// Sup-ratio profile S(r_k) = max over sampled x in B_{r_k}(x0), x != x0, of
/// |f(x) - f(x0)| / delta(|x - x0|). Sample sets nest across radii.
struct CoefficientProfile {
  Vec2 center;
  double center_value = 0.0;
  std::vector<double> radii;       ///< strictly decreasing
  std::vector<double> sup_ratios;  ///< S(r_k)
  /// Finer diagnostic: the maximum ratio on each sampled shell (direction
  /// sweep) or distance band (grid), ordered by decreasing radius.
  std::vector<double> shell_radii;
  std::vector<double> shell_max;
  SamplerSpec sampler;
};

enum class ConvergenceFlag { converged, plateau_not_reached, resolution_limited };
std::string to_string(ConvergenceFlag f);

struct CoefficientEstimate {
  double value = 0.0;
  double window_min = 0.0;  ///< radius sub-range used for the slope fit
  double window_max = 0.0;
  ConvergenceFlag flag = ConvergenceFlag::converged;
  double slope = 0.0;  ///< least-squares dS / d(log r) over the window
};

/// Point evaluator used by the profile builder; called concurrently.
using PointFunction = std::function<double(Vec2)>;

/// Builds a profile of f about x0. `grid` is required for the grid sampler and
/// bounds the smallest radius by four cell widths.
CoefficientProfile coefficient_profile(const PointFunction& f, Vec2 x0, double center_value,
                                       const ModulusFamily& m, std::span<const double> radii,
                                       const SamplerSpec& sampler, const Grid2* grid = nullptr);

/// Convenience overload for scalar fields, with f(x0) evaluated directly.
CoefficientProfile coefficient_profile(const ScalarField& f, Vec2 x0, const ModulusFamily& m,
                                       std::span<const double> radii, const SamplerSpec& sampler);

/// Reports S at the smallest radius; converged iff the slope over the smallest
/// four radii is within plateau_tol, S is nonincreasing as r shrinks, and the
/// innermost shells do not keep rising.
CoefficientEstimate estimate_coefficient(const CoefficientProfile& p, double plateau_tol);

/// coeff0 * exp(-+ beta * budget).
std::pair<double, double> sandwich_bounds(double coeff0, double beta, double budget);

void to_json(nlohmann::json& j, const CoefficientProfile& p);
void to_json(nlohmann::json& j, const CoefficientEstimate& e);
/// CSV with header "r,S".
std::string profile_csv(const CoefficientProfile& p);

}  // namespace loghold
