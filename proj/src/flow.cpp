#include "loghold/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <stdexcept>

#include "loghold/modcont.hpp"
#include "loghold/parallel.hpp"

namespace loghold {

TimeGrid::TimeGrid(double t_end, double dt_requested) : t_end_(t_end), dt_(0.0), steps_(0) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("TimeGrid: t_end must be positive");
  if (!(dt_requested > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
  // Smallest uniform step count whose step does not exceed the request.
  const double n = std::ceil(t_end / dt_requested - 1e-9);
  if (n > 1e9) throw std::invalid_argument("TimeGrid: too many steps");
  steps_ = std::max(1, static_cast<int>(n));
  dt_ = t_end / steps_;
}

int TimeGrid::node_index(double t) const {
  const double k = std::round(t / dt_);
  if (k < 0 || k > steps_ || std::abs(k * dt_ - t) > 1e-9 * std::max(1.0, t_end_))
    throw std::invalid_argument("TimeGrid: t = " + std::to_string(t) + " is not a grid node");
  return static_cast<int>(k);
}

Vec2 rk4_step(const VelocityField& u, Vec2 x, double t, double h) {
  const Vec2 k1 = u(x, t);
  const Vec2 k2 = u(x + (0.5 * h) * k1, t + 0.5 * h);
  const Vec2 k3 = u(x + (0.5 * h) * k2, t + 0.5 * h);
  const Vec2 k4 = u(x + h * k3, t + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

Vec2 wrap_if_periodic(const VelocityField& u, Vec2 x) {
  if (const auto L = u.half_period()) {
    const double period = 2.0 * *L;
    auto w = [&](double v) {
      if (v >= -*L && v < *L) return v;
      double r = v - period * std::floor((v + *L) / period);
      return r >= *L ? r - period : r;
    };
    return {w(x.x), w(x.y)};
  }
  return x;
}

Vec2 separation(const VelocityField& u, Vec2 a, Vec2 b) {
  Vec2 d = a - b;
  if (const auto L = u.half_period()) {
    const double period = 2.0 * *L;
    d.x -= period * std::round(d.x / period);
    d.y -= period * std::round(d.y / period);
  }
  return d;
}

}  // namespace

Vec2 integrate_nodes(const VelocityField& u, Vec2 x, const TimeGrid& tg, int from, int to) {
  if (from < 0 || to < 0 || from > tg.steps() || to > tg.steps())
    throw std::invalid_argument("integrate_nodes: node index out of range");
  const int dir = to >= from ? 1 : -1;
  const double h = dir * tg.dt();
  for (int i = from; i != to; i += dir) {
    x = wrap_if_periodic(u, rk4_step(u, x, tg.node(i), h));
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) throw std::runtime_error("trajectory left the finite range");
  }
  return x;
}

Trajectory integrate_trajectory(const VelocityField& u, Vec2 x0, const TimeGrid& tg) {
  Trajectory tr;
  tr.seed = x0;
  tr.times.resize(tg.steps() + 1);
  tr.positions.resize(tg.steps() + 1);
  tr.times[0] = 0.0;
  tr.positions[0] = x0;
  Vec2 x = x0;
  for (int i = 0; i < tg.steps(); ++i) {
    x = integrate_nodes(u, x, tg, i, i + 1);
    tr.times[i + 1] = tg.node(i + 1);
    tr.positions[i + 1] = x;
  }
  return tr;
}

Vec2 inverse_trajectory(const VelocityField& u, Vec2 x, double t, const TimeGrid& tg) {
  return integrate_nodes(u, x, tg, tg.node_index(t), 0);
}

LipschitzBudget lipschitz_budget(const VelocityField& u, const TimeGrid& tg, const Trajectory* traj) {
  const int N = tg.steps();
  if (traj && traj->positions.size() != static_cast<std::size_t>(N + 1))
    throw std::invalid_argument("lipschitz_budget: trajectory does not match the time grid");
  LipschitzBudget b;
  b.times.resize(N + 1);
  b.integral.assign(N + 1, 0.0);
  b.mu.assign(N + 1, 1.0);
  std::vector<double> g(N + 1), gl;
  for (int i = 0; i <= N; ++i) {
    b.times[i] = tg.node(i);
    g[i] = u.grad_sup(b.times[i]).value;
  }
  if (traj) {
    gl.resize(N + 1);
    b.local_integral.assign(N + 1, 0.0);
    for (int i = 0; i <= N; ++i) gl[i] = sigma_max(u.gradient(traj->positions[i], b.times[i]));
  }
  const double half = 0.5 * tg.dt();
  for (int i = 1; i <= N; ++i) {
    b.integral[i] = b.integral[i - 1] + half * (g[i - 1] + g[i]);
    b.mu[i] = std::exp(b.integral[i]);
    if (traj) b.local_integral[i] = b.local_integral[i - 1] + half * (gl[i - 1] + gl[i]);
  }
  return b;
}

PairCheckReport bilipschitz_check(const VelocityField& u, std::span<const std::pair<Vec2, Vec2>> pairs,
                                  const TimeGrid& tg, double slack, int jobs) {
  if (!(slack >= 0.0)) throw std::invalid_argument("bilipschitz_check: slack must be >= 0");
  const auto L = u.half_period();
  for (const auto& [a, b] : pairs) {
    const double d = norm(separation(u, a, b));
    if (d == 0.0) throw std::invalid_argument("bilipschitz_check: coincident pair");
    if (L && d > *L / 4.0) throw std::invalid_argument("bilipschitz_check: pair separation exceeds L/4");
  }
  PairCheckReport rep;
  rep.pairs.assign(pairs.begin(), pairs.end());
  rep.slack = slack;
  const LipschitzBudget budget = lipschitz_budget(u, tg);
  rep.times = budget.times;
  rep.mu = budget.mu;
  rep.ratios.resize(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t p) {
    const auto ta = integrate_trajectory(u, pairs[p].first, tg);
    const auto tb = integrate_trajectory(u, pairs[p].second, tg);
    const double d0 = norm(separation(u, pairs[p].first, pairs[p].second));
    auto& row = rep.ratios[p];
    row.resize(ta.positions.size());
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = norm(separation(u, ta.positions[i], tb.positions[i])) / d0;
  });
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      const double upper = rep.mu[i] * (1.0 + slack);
      const double lower = 1.0 / upper;
      const double r = rep.ratios[p][i];
      if (r < lower || r > upper) rep.violations.push_back({p, static_cast<int>(i), r, lower, upper});
    }
  }
  return rep;
}

std::vector<std::pair<Vec2, Vec2>> random_pairs(std::uint64_t seed, std::size_t count, double extent,
                                                double max_separation) {
  if (!(extent > 0.0) || !(max_separation > 0.0)) throw std::invalid_argument("random_pairs: bad ranges");
  std::mt19937_64 rng(seed);
  // Built from raw 53-bit draws so the sequence does not depend on the
  // standard library's distribution implementation.
  auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<std::pair<Vec2, Vec2>> out;
  out.reserve(count);
  while (out.size() < count) {
    const Vec2 a{extent * (2.0 * unit() - 1.0), extent * (2.0 * unit() - 1.0)};
    const double ang = 2.0 * std::numbers::pi * unit();
    const double d = max_separation * unit();
    if (d == 0.0) continue;
    out.emplace_back(a, a + d * Vec2{std::cos(ang), std::sin(ang)});
  }
  return out;
}

std::vector<LogRatioRow> log_ratio_check(const VelocityField& u, Vec2 x0, std::span<const double> radii, double t,
                                         double gamma, const TimeGrid& tg, const LogRatioOptions& opts) {
  if (!(gamma > 0.0)) throw std::invalid_argument("log_ratio_check: gamma must be positive");
  if (opts.directions < 1 || opts.shells < 1) throw std::invalid_argument("log_ratio_check: empty sampler");
  const int node = tg.node_index(t);
  const LipschitzBudget budget = lipschitz_budget(u, tg);
  const double log_mu = budget.integral[node];
  if (!std::isfinite(log_mu)) throw std::runtime_error("log_ratio_check: mu(t) is not finite");
  for (double r : radii) {
    if (!(r > 0.0 && r <= kModulusArgumentMax))
      throw std::invalid_argument("log_ratio_check: radii must lie in (0, s_max]");
    if (!(std::log(1.0 / r) > log_mu))
      throw std::invalid_argument("log_ratio_check: log(1/r) <= log mu(t), envelope degenerate");
  }
  const Vec2 center = integrate_nodes(u, x0, tg, 0, node);
  const int M = opts.directions;
  std::vector<LogRatioRow> rows;
  for (double r : radii) {
    const std::size_t count = static_cast<std::size_t>(M) * opts.shells;
    std::vector<double> ratio(count);
    parallel_for(count, opts.jobs, [&](std::size_t q) {
      const int shell = static_cast<int>(q / M);
      const double s = r * std::pow(2.0, -static_cast<double>(shell) / opts.shells);
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(q % M) / M;
      const Vec2 beta = x0 + s * Vec2{std::cos(ang), std::sin(ang)};
      const Vec2 moved = integrate_nodes(u, beta, tg, 0, node);
      const double d_t = norm(separation(u, center, moved));
      const double d_0 = norm(separation(u, x0, beta));
      ratio[q] = std::pow(std::log(1.0 / d_t) / std::log(1.0 / d_0), -gamma);
    });
    LogRatioRow row;
    row.r = r;
    row.min_ratio = *std::min_element(ratio.begin(), ratio.end());
    row.max_ratio = *std::max_element(ratio.begin(), ratio.end());
    row.worst_deviation = std::max(row.max_ratio - 1.0, 1.0 - row.min_ratio);
    const double q = log_mu / std::log(1.0 / r);
    row.envelope_lower = std::pow(1.0 + q, -gamma);
    row.envelope_upper = std::pow(1.0 - q, -gamma);
    row.inside = row.min_ratio >= row.envelope_lower - opts.envelope_tol &&
                 row.max_ratio <= row.envelope_upper + opts.envelope_tol;
    rows.push_back(row);
  }
  return rows;
}

void to_json(nlohmann::json& j, const Trajectory& tr) {
  nlohmann::json pos = nlohmann::json::array();
  for (const auto& p : tr.positions) pos.push_back({p.x, p.y});
  j = nlohmann::json{{"seed", {tr.seed.x, tr.seed.y}}, {"times", tr.times}, {"positions", pos}};
}

void to_json(nlohmann::json& j, const PairCheckReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : r.pairs) pairs.push_back({{a.x, a.y}, {b.x, b.y}});
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : r.violations)
    viol.push_back({{"pair", v.pair}, {"node", v.node}, {"ratio", v.ratio}, {"lower", v.lower}, {"upper", v.upper}});
  double min_r = INFINITY, max_r = 0.0;
  for (const auto& row : r.ratios)
    for (double x : row) {
      min_r = std::min(min_r, x);
      max_r = std::max(max_r, x);
    }
  j = nlohmann::json{{"pairs", pairs},       {"slack", r.slack},
                     {"mu_final", r.mu.empty() ? 1.0 : r.mu.back()},
                     {"min_ratio", r.pairs.empty() ? 1.0 : min_r},
                     {"max_ratio", r.pairs.empty() ? 1.0 : max_r},
                     {"violations", viol}};
}

void to_json(nlohmann::json& j, const LogRatioRow& r) {
  j = nlohmann::json{{"r", r.r},
                     {"min_ratio", r.min_ratio},
                     {"max_ratio", r.max_ratio},
                     {"worst_deviation", r.worst_deviation},
                     {"envelope", {r.envelope_lower, r.envelope_upper}},
                     {"inside", r.inside}};
}

std::string trajectory_csv(const Trajectory& tr) {
  std::string out = "t,x1,x2\n";
  char buf[128];
  for (std::size_t i = 0; i < tr.positions.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", tr.times[i], tr.positions[i].x, tr.positions[i].y);
    out += buf;
  }
  return out;
}

}  // namespace loghold
