#include "loghold/modcont.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "loghold/parallel.hpp"

namespace loghold {

ModulusFamily ModulusFamily::holder(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("holder requires 0 < beta <= 1");
  return {ModulusKind::holder, beta};
}

ModulusFamily ModulusFamily::log_holder(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("log_holder requires gamma > 0");
  return {ModulusKind::log_holder, gamma};
}

std::string ModulusFamily::name() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s(%g)", kind_ == ModulusKind::holder ? "holder" : "log_holder", exponent_);
  return buf;
}

double ModulusFamily::unchecked(double s) const {
  if (kind_ == ModulusKind::holder) return std::pow(s, exponent_);
  return std::pow(std::log(1.0 / s), -exponent_);
}

double ModulusFamily::operator()(double s) const {
  if (!(s > 0.0 && s <= kModulusArgumentMax))
    throw std::domain_error("modulus argument must lie in (0, 0.3]");
  return unchecked(s);
}

double modulus_value(const ModulusFamily& m, double s) { return m(s); }

std::vector<double> geometric_radii(double r_max, double ratio, int count) {
  if (!(r_max > 0.0) || !(ratio > 0.0 && ratio < 1.0) || count < 1)
    throw std::invalid_argument("geometric_radii: need r_max > 0, 0 < ratio < 1, count >= 1");
  std::vector<double> r(count);
  for (int k = 0; k < count; ++k) r[k] = r_max * std::pow(ratio, k);
  return r;
}

std::string to_string(SamplerSpec::Kind k) {
  return k == SamplerSpec::Kind::grid ? "grid" : "direction_sweep";
}

std::string to_string(ConvergenceFlag f) {
  switch (f) {
    case ConvergenceFlag::converged: return "converged";
    case ConvergenceFlag::plateau_not_reached: return "plateau_not_reached";
    case ConvergenceFlag::resolution_limited: return "resolution_limited";
  }
  return "unknown";
}

namespace {

void validate_radii(std::span<const double> radii, const Grid2* grid) {
  if (radii.empty()) throw std::invalid_argument("coefficient_profile: no radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw std::invalid_argument("coefficient_profile: radii must be positive");
    if (k > 0 && !(radii[k] < radii[k - 1]))
      throw std::invalid_argument("coefficient_profile: radii must be strictly decreasing");
  }
  if (radii.front() > kModulusArgumentMax)
    throw std::invalid_argument("coefficient_profile: radii must not exceed the modulus bound s_max = 0.3");
  if (grid && !(radii.back() > 4.0 * grid->spacing()))
    throw std::invalid_argument("coefficient_profile: radii must exceed four grid spacings");
}

double ratio_of(double fx, double f0, double dist, const ModulusFamily& m) {
  const double r = std::abs(fx - f0) / m(dist);
  if (!std::isfinite(r)) throw std::runtime_error("coefficient_profile: non-finite ratio");
  return r;
}

// Suffix maxima: S(r_k) is the max over every shell at or inside r_k.
void fill_sup_ratios(CoefficientProfile& p, const std::vector<std::size_t>& band_start,
                     const std::vector<std::size_t>& band_count) {
  const std::size_t K = p.radii.size();
  p.sup_ratios.assign(K, 0.0);
  double running = 0.0;
  std::size_t points = 0;
  for (std::size_t k = K; k-- > 0;) {
    for (std::size_t s = band_start[k]; s < (k + 1 < K ? band_start[k + 1] : p.shell_max.size()); ++s)
      running = std::max(running, p.shell_max[s]);
    points += band_count[k];
    if (points == 0) throw std::runtime_error("coefficient_profile: empty sample set for some radius");
    p.sup_ratios[k] = running;
  }
}

}  // namespace

CoefficientProfile coefficient_profile(const PointFunction& f, Vec2 x0, double center_value,
                                       const ModulusFamily& m, std::span<const double> radii,
                                       const SamplerSpec& sampler, const Grid2* grid) {
  validate_radii(radii, grid);
  if (!std::isfinite(center_value)) throw std::runtime_error("coefficient_profile: non-finite center value");
  CoefficientProfile p;
  p.center = x0;
  p.center_value = center_value;
  p.radii.assign(radii.begin(), radii.end());
  p.sampler = sampler;
  const std::size_t K = radii.size();
  std::vector<std::size_t> band_start(K), band_count(K);

  if (sampler.kind == SamplerSpec::Kind::direction_sweep) {
    if (sampler.directions < 1 || sampler.shells_per_band < 1)
      throw std::invalid_argument("direction sweep needs directions >= 1 and shells_per_band >= 1");
    const int M = sampler.directions;
    const int per_band = sampler.shells_per_band;
    for (std::size_t k = 0; k < K; ++k) {
      const double upper = radii[k];
      const double lower = k + 1 < K ? radii[k + 1] : (K > 1 ? radii[k] * radii[k] / radii[k - 1] : 0.5 * radii[k]);
      band_start[k] = p.shell_radii.size();
      band_count[k] = static_cast<std::size_t>(per_band) * M;
      for (int j = 0; j < per_band; ++j)
        p.shell_radii.push_back(upper * std::pow(lower / upper, static_cast<double>(j) / per_band));
    }
    std::vector<Vec2> dirs(M);
    for (int i = 0; i < M; ++i) {
      const double a = 2.0 * std::numbers::pi * i / M;
      dirs[i] = {std::cos(a), std::sin(a)};
    }
    const std::size_t S = p.shell_radii.size();
    p.shell_max.assign(S, 0.0);
    std::vector<double> ratios(S * M);
    parallel_for(S * M, sampler.jobs, [&](std::size_t q) {
      const double r = p.shell_radii[q / M];
      const Vec2 x = x0 + r * dirs[q % M];
      ratios[q] = ratio_of(f(x), center_value, r, m);
    });
    for (std::size_t s = 0; s < S; ++s)
      p.shell_max[s] = *std::max_element(ratios.begin() + s * M, ratios.begin() + (s + 1) * M);
  } else {
    if (!grid) throw std::invalid_argument("grid sampler requires a gridded field");
    const double h = grid->spacing();
    const int n = grid->n();
    // Nodes within r_1 of x0, by minimal-image offset.
    struct Node {
      Vec2 x;
      double d;
      std::size_t band;
    };
    std::vector<Node> nodes;
    const Vec2 w0 = grid->wrap(x0);
    const int span = static_cast<int>(std::ceil(radii.front() / h)) + 1;
    const int ci = static_cast<int>(std::lround((w0.x + grid->half_period()) / h));
    const int cj = static_cast<int>(std::lround((w0.y + grid->half_period()) / h));
    for (int dj = -span; dj <= span; ++dj) {
      for (int di = -span; di <= span; ++di) {
        const int i = ((ci + di) % n + n) % n;
        const int j = ((cj + dj) % n + n) % n;
        const Vec2 off = grid->min_image(grid->node(i, j) - w0);
        const double d = norm(off);
        if (d == 0.0 || d > radii.front()) continue;
        std::size_t band = 0;
        while (band + 1 < K && d <= radii[band + 1]) ++band;
        nodes.push_back({x0 + off, d, band});
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      band_start[k] = k;
      p.shell_radii.push_back(radii[k]);
    }
    p.shell_max.assign(K, 0.0);
    std::vector<double> ratios(nodes.size());
    parallel_for(nodes.size(), sampler.jobs,
                 [&](std::size_t q) { ratios[q] = ratio_of(f(nodes[q].x), center_value, nodes[q].d, m); });
    for (std::size_t q = 0; q < nodes.size(); ++q) {
      p.shell_max[nodes[q].band] = std::max(p.shell_max[nodes[q].band], ratios[q]);
      ++band_count[nodes[q].band];
    }
  }
  fill_sup_ratios(p, band_start, band_count);
  return p;
}

CoefficientProfile coefficient_profile(const ScalarField& f, Vec2 x0, const ModulusFamily& m,
                                       std::span<const double> radii, const SamplerSpec& sampler) {
  const Grid2* grid = f.is_gridded() ? &f.grid() : nullptr;
  if (sampler.kind == SamplerSpec::Kind::grid && !grid)
    throw std::invalid_argument("grid sampler requires a gridded field");
  return coefficient_profile([&f](Vec2 x) { return eval_scalar(f, x); }, x0, eval_scalar(f, x0), m, radii,
                             sampler, grid);
}

namespace {

// Least-squares slope of y against log(x).
double log_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (y[i] - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace

CoefficientEstimate estimate_coefficient(const CoefficientProfile& p, double plateau_tol) {
  const std::size_t K = p.radii.size();
  if (K < 4 || p.sup_ratios.size() != K) throw std::invalid_argument("estimate_coefficient: need at least 4 radii");
  if (!(plateau_tol > 0.0)) throw std::invalid_argument("estimate_coefficient: plateau_tol must be positive");
  CoefficientEstimate e;
  e.value = p.sup_ratios.back();
  e.window_min = p.radii[K - 1];
  e.window_max = p.radii[K - 4];
  const std::span<const double> r_win(p.radii.data() + K - 4, 4);
  const std::span<const double> s_win(p.sup_ratios.data() + K - 4, 4);
  e.slope = log_slope(r_win, s_win);

  bool monotone = true;
  for (std::size_t k = 0; k + 1 < K; ++k)
    monotone = monotone && p.sup_ratios[k + 1] <= p.sup_ratios[k] + 1e-12 * std::max(1.0, std::abs(p.sup_ratios[k]));

  // Shells inside r_{K-1}: a sup still rising there has not been resolved.
  bool rising_inside = false;
  if (!p.shell_radii.empty() && p.shell_radii.size() == p.shell_max.size()) {
    std::vector<double> rr, ss;
    for (std::size_t s = 0; s < p.shell_radii.size(); ++s) {
      if (p.shell_radii[s] <= p.radii[K - 2]) {
        rr.push_back(p.shell_radii[s]);
        ss.push_back(p.shell_max[s]);
      }
    }
    if (rr.size() >= 2) rising_inside = log_slope(rr, ss) < -plateau_tol;
  }

  if (rising_inside)
    e.flag = ConvergenceFlag::resolution_limited;
  else if (!monotone || std::abs(e.slope) > plateau_tol)
    e.flag = ConvergenceFlag::plateau_not_reached;
  else
    e.flag = ConvergenceFlag::converged;
  return e;
}

std::pair<double, double> sandwich_bounds(double coeff0, double beta, double budget) {
  if (!(coeff0 >= 0.0)) throw std::invalid_argument("sandwich_bounds: coefficient must be >= 0");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("sandwich_bounds: holder requires 0 < beta <= 1");
  if (!(budget >= 0.0)) throw std::invalid_argument("sandwich_bounds: budget must be >= 0");
  return {coeff0 * std::exp(-beta * budget), coeff0 * std::exp(beta * budget)};
}

void to_json(nlohmann::json& j, const CoefficientProfile& p) {
  j = nlohmann::json{{"center", {p.center.x, p.center.y}},
                     {"center_value", p.center_value},
                     {"radii", p.radii},
                     {"sup_ratios", p.sup_ratios},
                     {"sampler",
                      {{"kind", to_string(p.sampler.kind)},
                       {"directions", p.sampler.directions},
                       {"shells_per_band", p.sampler.shells_per_band}}}};
}

void to_json(nlohmann::json& j, const CoefficientEstimate& e) {
  j = nlohmann::json{{"value", e.value},
                     {"window", {e.window_min, e.window_max}},
                     {"flag", to_string(e.flag)},
                     {"slope", e.slope}};
}

std::string profile_csv(const CoefficientProfile& p) {
  std::string out = "r,S\n";
  char buf[96];
  for (std::size_t k = 0; k < p.radii.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.radii[k], p.sup_ratios[k]);
    out += buf;
  }
  return out;
}

}  // namespace loghold
