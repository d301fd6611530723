#include "loghold/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace loghold {

std::string to_string(InitialDataSpec::Kind k) {
  switch (k) {
    case InitialDataSpec::Kind::zero: return "zero";
    case InitialDataSpec::Kind::constant: return "constant";
    case InitialDataSpec::Kind::abs_power: return "abs_power";
    case InitialDataSpec::Kind::log_holder_cap: return "log_holder_cap";
    case InitialDataSpec::Kind::sin_cos: return "sin_cos";
  }
  return "unknown";
}

InitialDataSpec::Kind initial_kind_from_string(const std::string& s) {
  for (auto k : {InitialDataSpec::Kind::zero, InitialDataSpec::Kind::constant, InitialDataSpec::Kind::abs_power,
                 InitialDataSpec::Kind::log_holder_cap, InitialDataSpec::Kind::sin_cos})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown initial data kind '" + s + "'");
}

double smooth_cutoff(double rho, double cutoff) { return smooth_step(rho, 0.5 * cutoff, cutoff); }

ScalarField make_initial_data(const InitialDataSpec& spec) {
  using Kind = InitialDataSpec::Kind;
  if (!(spec.cutoff > 0.0)) throw std::invalid_argument("initial data cutoff must be positive");
  const Vec2 c = spec.center;
  const double R = spec.cutoff;
  const double e = spec.exponent;
  switch (spec.kind) {
    case Kind::zero: return ScalarField::analytic([](Vec2) { return 0.0; }, 0.0);
    case Kind::constant: {
      const double v = spec.value;
      return ScalarField::analytic([v](Vec2) { return v; }, 0.0);
    }
    case Kind::abs_power:
      if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("abs_power requires 0 < exponent <= 1");
      return ScalarField::analytic(
          [c, R, e](Vec2 x) {
            const double rho = distance(x, c);
            return std::pow(rho, e) * smooth_cutoff(rho, R);
          },
          1.0);
    case Kind::log_holder_cap:
      if (!(e > 0.0)) throw std::invalid_argument("log_holder_cap requires exponent > 0");
      return ScalarField::analytic(
          [c, R, e](Vec2 x) {
            const double rho = distance(x, c);
            if (rho == 0.0) return 0.0;
            const double v = rho < 1.0 ? std::min(std::pow(std::log(1.0 / rho), -e), 1.0) : 1.0;
            return v * smooth_cutoff(rho, R);
          },
          1.0);
    case Kind::sin_cos:
      return ScalarField::analytic([](Vec2 x) { return std::sin(x.x) * std::cos(x.y); }, 0.0);
  }
  throw std::invalid_argument("unknown initial data kind");
}

double solve_theta(const TransportProblem& p, Vec2 x, double t) {
  return p.theta0(inverse_trajectory(p.u, x, t, p.time));
}

namespace {

struct Context {
  Trajectory center;
  LipschitzBudget budget;
};

Context prepare(const TransportProblem& p) {
  Context ctx;
  ctx.center = integrate_trajectory(p.u, p.x0, p.time);
  ctx.budget = lipschitz_budget(p.u, p.time, &ctx.center);
  return ctx;
}

struct Measured {
  CoefficientEstimate estimate;
  std::vector<double> sup_ratios;
};

Measured estimate_at(const TransportProblem& p, const Context& ctx, int node) {
  const auto& radii = p.estimator.radii;
  if (radii.empty()) throw std::invalid_argument("transport: estimator radii are empty");
  if (p.estimator.sampler.kind != SamplerSpec::Kind::direction_sweep)
    throw std::invalid_argument("transport: the pulled-back field requires the direction sweep sampler");
  if (ctx.budget.mu[node] * radii.front() > kModulusArgumentMax)
    throw std::invalid_argument("transport: estimator radii must satisfy mu(t) * r <= s_max");
  // The center is phi(x0, t) by construction, so its label is x0 exactly.
  const double center_value = p.theta0(p.x0);
  PointFunction f;
  if (node == 0) {
    f = [&p](Vec2 y) { return p.theta0(y); };
  } else {
    f = [&p, node](Vec2 y) { return p.theta0(integrate_nodes(p.u, y, p.time, node, 0)); };
  }
  const auto profile = coefficient_profile(f, ctx.center.positions[node], center_value, p.modulus, radii,
                                           p.estimator.sampler);
  return {estimate_coefficient(profile, p.estimator.plateau_tol), profile.sup_ratios};
}

PreservationRecord make_record(const TransportProblem& p, const Context& ctx, int node,
                               const Measured& first, const Measured& now) {
  const CoefficientEstimate& initial = first.estimate;
  PreservationRecord r;
  r.t = p.time.node(node);
  r.position = ctx.center.positions[node];
  r.estimate = now.estimate;
  r.sup_ratios = now.sup_ratios;
  r.initial = initial.value;
  r.gap = std::abs(now.estimate.value - initial.value) / std::max(initial.value, std::numeric_limits<double>::epsilon());
  r.mu = ctx.budget.mu[node];
  r.local_budget = ctx.budget.local_integral[node];
  if (p.modulus.kind() == ModulusKind::holder) {
    const auto [lo, hi] = sandwich_bounds(initial.value, p.modulus.exponent(), r.local_budget);
    r.lower_bound = lo;
    r.upper_bound = hi;
  }
  return r;
}

}  // namespace

PreservationRecord transported_coefficient(const TransportProblem& p, double t) {
  const int node = p.time.node_index(t);
  const Context ctx = prepare(p);
  const auto initial = estimate_at(p, ctx, 0);
  const auto now = node == 0 ? initial : estimate_at(p, ctx, node);
  return make_record(p, ctx, node, initial, now);
}

std::vector<PreservationRecord> preservation_curve(const TransportProblem& p, std::span<const double> output_times) {
  std::vector<int> nodes;
  for (double t : output_times) nodes.push_back(p.time.node_index(t));
  const Context ctx = prepare(p);
  const auto initial = estimate_at(p, ctx, 0);
  std::vector<PreservationRecord> out;
  for (int node : nodes) {
    const auto now = node == 0 ? initial : estimate_at(p, ctx, node);
    out.push_back(make_record(p, ctx, node, initial, now));
  }
  return out;
}

void to_json(nlohmann::json& j, const PreservationRecord& r) {
  j = nlohmann::json{{"t", r.t},
                     {"position", {r.position.x, r.position.y}},
                     {"estimate", r.estimate},
                     {"initial", r.initial},
                     {"gap", r.gap},
                     {"mu", r.mu},
                     {"local_budget", r.local_budget}};
  if (r.lower_bound) j["lower_bound"] = *r.lower_bound;
  if (r.upper_bound) j["upper_bound"] = *r.upper_bound;
  j["sup_ratios"] = r.sup_ratios;
}

std::string preservation_csv(std::span<const PreservationRecord> records) {
  std::string out = "t,x1,x2,estimate,gap,lower_bound,upper_bound\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,", r.t, r.position.x, r.position.y,
                  r.estimate.value, r.gap);
    out += buf;
    if (r.lower_bound && r.upper_bound) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", *r.lower_bound, *r.upper_bound);
      out += buf;
    } else {
      out += ",\n";
    }
  }
  return out;
}

}  // namespace loghold
