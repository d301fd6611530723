#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "loghold/fields.hpp"
#include "loghold/geometry.hpp"

namespace loghold {

/// Uniform nodes t_i = i * dt on [0, T]. The step is adjusted so that T is
/// hit exactly with a step no larger than requested: dt = T / ceil(T / dt_requested).
class TimeGrid {
 public:
  TimeGrid(double t_end, double dt_requested);

  double t_end() const { return t_end_; }
  double dt() const { return dt_; }
  int steps() const { return steps_; }
  double node(int i) const { return i == steps_ ? t_end_ : i * dt_; }
  /// Index of the node equal to t (within rounding); throws if t is not a node.
  int node_index(double t) const;

 private:
  double t_end_;
  double dt_;
  int steps_;
};

struct Trajectory {
  Vec2 seed;
  std::vector<double> times;
  std::vector<Vec2> positions;  ///< positions[0] == seed
};

/// One classical fourth-order Runge-Kutta step of size h (h may be negative).
Vec2 rk4_step(const VelocityField& u, Vec2 x, double t, double h);

/// Forward integration of dphi/dt = u(phi, t) over every node of the grid.
/// Positions are wrapped into the torus when the field is periodic.
Trajectory integrate_trajectory(const VelocityField& u, Vec2 x0, const TimeGrid& tg);

/// Position at node index `to`, starting from x at node index `from`.
Vec2 integrate_nodes(const VelocityField& u, Vec2 x, const TimeGrid& tg, int from, int to);

/// Label alpha with phi(alpha, t) = x, by integrating the reversed ODE from
/// (x, t) back to time 0. t must be a node of tg.
Vec2 inverse_trajectory(const VelocityField& u, Vec2 x, double t, const TimeGrid& tg);

/// I(t) = int_0^t ||grad u(s)||_inf ds by the trapezoid rule on the nodes, and
/// mu(t) = exp(I(t)). With a trajectory, also the integral of the largest
/// singular value of grad u along it.
struct LipschitzBudget {
  std::vector<double> times;
  std::vector<double> integral;
  std::vector<double> mu;
  std::vector<double> local_integral;  ///< empty unless a trajectory was given
};

LipschitzBudget lipschitz_budget(const VelocityField& u, const TimeGrid& tg, const Trajectory* traj = nullptr);

struct PairViolation {
  std::size_t pair = 0;
  int node = 0;
  double ratio = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct PairCheckReport {
  std::vector<std::pair<Vec2, Vec2>> pairs;
  std::vector<double> times;
  /// ratios[p][i] = |phi(alpha,t_i) - phi(beta,t_i)| / |alpha - beta|
  std::vector<std::vector<double>> ratios;
  std::vector<double> mu;
  double slack = 0.0;
  std::vector<PairViolation> violations;
};

/// Tests every pair ratio against [mu(t)^-1 / (1 + slack), mu(t) (1 + slack)].
PairCheckReport bilipschitz_check(const VelocityField& u, std::span<const std::pair<Vec2, Vec2>> pairs,
                                  const TimeGrid& tg, double slack, int jobs = 1);

/// Seeded pairs with alpha uniform in [-extent, extent]^2 and beta at a
/// uniform direction and distance in (0, max_separation] from alpha.
std::vector<std::pair<Vec2, Vec2>> random_pairs(std::uint64_t seed, std::size_t count, double extent,
                                                double max_separation);

struct LogRatioRow {
  double r = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double worst_deviation = 0.0;  ///< max |ratio - 1|
  double envelope_lower = 0.0;   ///< (1 + log mu / log(1/r))^-gamma
  double envelope_upper = 0.0;   ///< (1 - log mu / log(1/r))^-gamma
  bool inside = true;
};

struct LogRatioOptions {
  int directions = 720;
  int shells = 4;                ///< shells at r * 2^(-j/shells), j < shells
  double envelope_tol = 1e-9;    ///< integrator allowance on the envelope test
  int jobs = 1;
};

/// For each radius, extremes over sampled beta in B_r(x0) of
/// (log 1/|phi(x0,t) - phi(beta,t)|)^-gamma / (log 1/|x0 - beta|)^-gamma.
std::vector<LogRatioRow> log_ratio_check(const VelocityField& u, Vec2 x0, std::span<const double> radii, double t,
                                         double gamma, const TimeGrid& tg, const LogRatioOptions& opts = {});

void to_json(nlohmann::json& j, const Trajectory& tr);
void to_json(nlohmann::json& j, const PairCheckReport& r);
void to_json(nlohmann::json& j, const LogRatioRow& r);
/// CSV with header "t,x1,x2".
std::string trajectory_csv(const Trajectory& tr);

}  // namespace loghold
