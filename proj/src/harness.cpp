#include "loghold/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "loghold/euler2d.hpp"
#include "loghold/flow.hpp"
#include "loghold/transport.hpp"

namespace loghold {

using nlohmann::json;

std::string to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return "PASS";
    case VerdictStatus::fail: return "FAIL";
    case VerdictStatus::indeterminate: return "INDETERMINATE";
  }
  return "FAIL";
}

VerdictStatus overall(const std::vector<Verdict>& verdicts) {
  VerdictStatus out = VerdictStatus::pass;
  for (const auto& v : verdicts) {
    if (v.status == VerdictStatus::fail) return VerdictStatus::fail;
    if (v.status == VerdictStatus::indeterminate) out = VerdictStatus::indeterminate;
  }
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string label(ModulusKind k, double e) {
  return ModulusFamily(k == ModulusKind::holder ? ModulusFamily::holder(e) : ModulusFamily::log_holder(e)).name();
}

// Verdict with measured <= threshold as the pass rule.
Verdict at_most(std::string name, double measured, double threshold, bool determinate = true,
                std::string detail = {}) {
  Verdict v{std::move(name), VerdictStatus::pass, measured, threshold, std::move(detail)};
  if (!determinate) {
    v.status = VerdictStatus::indeterminate;
    if (v.detail.empty()) v.detail = "estimator did not converge";
  } else if (!(measured <= threshold)) {
    v.status = VerdictStatus::fail;
  }
  return v;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

double num(const json& config, const char* key) { return config.at(key).get<double>(); }

// ---------------------------------------------------------------------------
// Verdicts per kind

void transport_verdicts(bool sandwich, const json& cfg, const json& rec, std::vector<Verdict>& out) {
  const double eps = std::numeric_limits<double>::epsilon();
  struct Width {
    double exponent, width;
  };
  std::vector<Width> widths;
  for (const auto& curve : rec.at("curves")) {
    const std::string name = curve.at("label");
    const auto& rs = curve.at("records");
    bool converged = true;
    for (const auto& r : rs) converged = converged && r.at("estimate").at("flag") == "converged";
    const json& first = rs.front();
    const json& last = rs.back();
    const double est0 = first.at("estimate").at("value");
    if (!sandwich) {
      double worst = 0.0;
      for (const auto& r : rs) worst = std::max(worst, r.at("gap").get<double>());
      out.push_back(at_most("preservation gap " + name, worst, num(cfg, "tolerances.gap"), converged));
    } else {
      const double slack = num(cfg, "tolerances.sandwich_slack");
      double worst = 0.0;
      for (const auto& r : rs) {
        const double est = r.at("estimate").at("value");
        const double lo = r.at("lower_bound"), hi = r.at("upper_bound");
        const double excess = std::max({0.0, lo * (1.0 - slack) - est, est - hi * (1.0 + slack)});
        worst = std::max(worst, excess / std::max(est0, eps));
      }
      out.push_back(at_most("sandwich " + name, worst, 0.0, converged,
                            "relative excursion outside [lower (1 - slack), upper (1 + slack)]"));
      if (cfg.contains("expected.saturation_rate")) {
        const double beta = curve.at("exponent");
        const double t = last.at("t");
        const double expected = std::exp(num(cfg, "expected.saturation_rate") * beta * t);
        const double ratio = last.at("estimate").at("value").get<double>() / std::max(est0, eps);
        out.push_back(at_most("saturation " + name, std::abs(ratio / expected - 1.0), num(cfg, "tolerances.saturation"),
                              converged, "est(T)/est(0) = " + fmt(ratio) + " vs " + fmt(expected)));
      }
      widths.push_back({curve.at("exponent"), last.at("upper_bound").get<double>() - last.at("lower_bound").get<double>()});
    }
    if (!curve.at("reference").is_null() && num(cfg, "tolerances.initial") > 0.0) {
      const double ref = curve.at("reference");
      out.push_back(at_most("initial coefficient " + name, std::abs(est0 - ref) / ref, num(cfg, "tolerances.initial"),
                            first.at("estimate").at("flag") == "converged", "est(0) = " + fmt(est0)));
    }
  }
  if (widths.size() >= 2) {
    std::sort(widths.begin(), widths.end(), [](const Width& a, const Width& b) { return a.exponent < b.exponent; });
    double inversions = 0;
    for (std::size_t i = 1; i < widths.size(); ++i)
      if (!(widths[i].width > widths[i - 1].width)) ++inversions;
    out.push_back(at_most("sandwich width increasing in beta", inversions, 0.0));
  }
}

void flow_verdicts(const json& cfg, const json& rec, std::vector<Verdict>& out) {
  if (rec.contains("bilipschitz")) {
    const auto& b = rec.at("bilipschitz");
    out.push_back(at_most("bi-Lipschitz violations", static_cast<double>(b.at("violations").size()), 0.0, true,
                          "ratios in [" + fmt(b.at("min_ratio")) + ", " + fmt(b.at("max_ratio")) + "], mu(T) = " +
                              fmt(b.at("mu_final"))));
    const auto& m = rec.at("mu_refinement");
    out.push_back(at_most("mu(T) refinement",
                          std::abs(m.at("mu_final").get<double>() - m.at("mu_final_refined").get<double>()),
                          num(cfg, "tolerances.mu_refinement")));
  }
  if (rec.contains("log_ratio")) {
    const auto& rows = rec.at("log_ratio").at("rows");
    double decreases_missed = 0, outside = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].at("inside").get<bool>()) ++outside;
      // An exactly vanishing deviation is already at its limit.
      const double d = rows[i].at("worst_deviation");
      if (i > 0 && d != 0.0 && !(d < rows[i - 1].at("worst_deviation").get<double>())) ++decreases_missed;
    }
    out.push_back(at_most("log-ratio deviation decreasing", decreases_missed, 0.0));
    out.push_back(at_most("log-ratio inside envelope", outside, 0.0));
  }
}

void growth_verdicts(const json& cfg, const json& rec, std::vector<Verdict>& out) {
  if (rec.contains("error")) {
    out.push_back({"solver", VerdictStatus::fail, 1.0, 0.0, rec.at("error")});
    return;
  }
  const auto holder = rec.at("holder").at("values").get<std::vector<double>>();
  const auto logh = rec.at("log_holder").at("values").get<std::vector<double>>();
  const auto times = rec.at("times").get<std::vector<double>>();
  if (rec.at("data") == "zero") {
    double worst = 0.0;
    for (double v : holder) worst = std::max(worst, std::abs(v));
    for (double v : logh) worst = std::max(worst, std::abs(v));
    for (const auto& row : rec.at("strain").at("values"))
      for (double v : row.get<std::vector<double>>()) worst = std::max(worst, std::abs(v));
    for (double v : rec.at("origin_value").get<std::vector<double>>()) worst = std::max(worst, std::abs(v));
    out.push_back(at_most("zero data diagnostics vanish", worst, num(cfg, "tolerances.origin_value")));
    return;
  }
  const double noise = rec.at("noise_floor");
  double min_inc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < holder.size(); ++i) min_inc = std::min(min_inc, holder[i] - holder[i - 1]);
  Verdict g{"holder coefficient strictly increasing", min_inc > noise ? VerdictStatus::pass : VerdictStatus::fail,
            min_inc, noise, "smallest increment vs noise floor"};
  out.push_back(g);
  std::vector<double> logs;
  for (double v : holder) logs.push_back(std::log(std::max(v, std::numeric_limits<double>::min())));
  const double rate = least_squares_slope(times, logs);
  out.push_back({"fitted exponential rate positive", rate > 0.0 ? VerdictStatus::pass : VerdictStatus::fail, rate, 0.0,
                 "least-squares slope of log coefficient vs t"});
  if (cfg.contains("expected.initial") && num(cfg, "tolerances.initial") > 0.0) {
    const double ref = num(cfg, "expected.initial");
    out.push_back(at_most("initial holder coefficient", std::abs(holder.front() - ref) / ref,
                          num(cfg, "tolerances.initial"), true, "est(0) = " + fmt(holder.front())));
  }
  double gap = 0.0;
  for (double v : logh) gap = std::max(gap, std::abs(v - logh.front()) / std::max(logh.front(), 1e-300));
  out.push_back(at_most("log-holder gap", gap, num(cfg, "tolerances.log_gap")));
  double bad = 0;
  for (const auto& tr : rec.at("tracers")) {
    const auto& p = tr.at("positions");
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (!(p[i][0].get<double>() > p[i - 1][0].get<double>())) ++bad;
      if (!(p[i][1].get<double>() < p[i - 1][1].get<double>())) ++bad;
    }
  }
  out.push_back(at_most("tracers: x1 increasing, x2 decreasing", bad, 0.0, true,
                        "radius-decrease window reported in records"));
}

void validation_verdicts(const json& cfg, const json& rec, std::vector<Verdict>& out) {
  const std::pair<const char*, const char*> checks[] = {
      {"eigen_error", "eigen"},          {"curl_error", "curl"},
      {"divergence", "divergence"},      {"stationary_change", "stationary"},
      {"zero_change", "stationary"},     {"l2_drift", "conservation"},
      {"l4_drift", "conservation"},      {"symmetry_defect", "symmetry"},
      {"origin_velocity", "origin_velocity"}, {"origin_value", "origin_value"},
  };
  for (const auto& [key, tol] : checks)
    out.push_back(at_most(key, rec.at(key).get<double>(), num(cfg, (std::string("tolerances.") + tol).c_str())));
}

void strain_verdicts(const json& cfg, const json& rec, std::vector<Verdict>& out) {
  const auto values = rec.at("values").get<std::vector<double>>();
  if (rec.at("data") == "zero") {
    double worst = 0.0;
    for (double v : values) worst = std::max(worst, std::abs(v));
    out.push_back(at_most("zero data strain vanishes", worst, num(cfg, "tolerances.origin_value")));
    return;
  }
  const auto numeric = rec.at("numeric_differences").get<std::vector<double>>();
  const auto oracle = rec.at("oracle_differences").get<std::vector<double>>();
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) worst = std::max(worst, std::abs(numeric[i] / oracle[i] - 1.0));
  out.push_back(at_most("strain differences vs radial oracle", worst, num(cfg, "tolerances.strain")));
  double missed = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) ++missed;
  out.push_back(at_most("strain increasing as cutoff shrinks", missed, 0.0));
}

// ---------------------------------------------------------------------------
// Experiment runners

Report start(const ExperimentConfig& c) {
  Report r;
  r.kind = c.kind;
  r.name = c.name;
  r.seed = c.seed;
  r.config = c.echo;
  r.records = json::object();
  return r;
}

void finish(Report& r, std::chrono::steady_clock::time_point t0) {
  r.verdicts = compute_verdicts(r.kind, r.config, r.records);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slug(std::string s) {
  for (char& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '_') ch = '_';
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

void flow_checks(const ExperimentConfig& c, const VelocityField& u, Report& r) {
  const TimeGrid tg(c.t_end, c.dt);
  const auto budget = lipschitz_budget(u, tg);
  Series mu{"mu", {"t", "mu_t"}, {}};
  for (std::size_t i = 0; i < budget.times.size(); i += std::max<std::size_t>(1, budget.times.size() / 200))
    mu.rows.push_back({budget.times[i], budget.mu[i]});
  if (mu.rows.back()[0] != budget.times.back()) mu.rows.push_back({budget.times.back(), budget.mu.back()});
  r.series.push_back(std::move(mu));

  if (c.bilipschitz.pairs > 0) {
    const auto pairs = random_pairs(c.seed, static_cast<std::size_t>(c.bilipschitz.pairs), c.bilipschitz.extent,
                                    c.bilipschitz.max_separation);
    const auto rep = bilipschitz_check(u, pairs, tg, c.bilipschitz.slack, c.jobs);
    json b = rep;
    b["seed"] = c.seed;
    r.records["bilipschitz"] = b;
    Series s{"pair_ratios", {"t", "min_ratio", "max_ratio", "mu_inverse", "mu_t"}, {}};
    for (std::size_t i = 0; i < rep.times.size(); i += std::max<std::size_t>(1, rep.times.size() / 200)) {
      double lo = INFINITY, hi = 0.0;
      for (const auto& row : rep.ratios) {
        lo = std::min(lo, row[i]);
        hi = std::max(hi, row[i]);
      }
      s.rows.push_back({rep.times[i], lo, hi, 1.0 / rep.mu[i], rep.mu[i]});
    }
    r.series.push_back(std::move(s));
    const TimeGrid fine(c.t_end, tg.dt() / c.bilipschitz.refine);
    const auto refined = lipschitz_budget(u, fine);
    r.records["mu_refinement"] = {{"dt", tg.dt()},
                                  {"dt_refined", fine.dt()},
                                  {"mu_final", budget.mu.back()},
                                  {"mu_final_refined", refined.mu.back()}};
  }
  if (c.log_ratio.enabled) {
    std::vector<double> radii;
    for (int k = c.log_ratio.k_min; k <= c.log_ratio.k_max; ++k) radii.push_back(std::exp(-static_cast<double>(k)));
    LogRatioOptions opts;
    opts.directions = c.log_ratio.directions;
    opts.shells = c.log_ratio.shells;
    opts.envelope_tol = c.log_ratio.envelope_tol;
    opts.jobs = c.jobs;
    const auto rows = log_ratio_check(u, c.tracked_point, radii, c.log_ratio.t, c.log_ratio.gamma, tg, opts);
    r.records["log_ratio"] = {{"t", c.log_ratio.t}, {"gamma", c.log_ratio.gamma}, {"rows", rows}};
    Series s{"log_ratio", {"r", "worst_deviation", "min_ratio", "max_ratio", "envelope_lower", "envelope_upper"}, {}};
    for (const auto& row : rows)
      s.rows.push_back({row.r, row.worst_deviation, row.min_ratio, row.max_ratio, row.envelope_lower,
                        row.envelope_upper});
    r.series.push_back(std::move(s));
  }
}

Report run_transport(const ExperimentConfig& c, bool sandwich) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r = start(c);
  const VelocityField u = VelocityField::from_catalog(c.velocity_kind, c.velocity_params);
  std::vector<double> outputs = c.outputs;
  if (std::find(outputs.begin(), outputs.end(), 0.0) == outputs.end()) outputs.insert(outputs.begin(), 0.0);
  std::sort(outputs.begin(), outputs.end());

  r.records["radii"] = c.radii;
  json curves = json::array();
  for (double e : c.exponents) {
    InitialDataSpec spec = c.initial;
    if (c.initial_exponent_follows_modulus) spec.exponent = e;
    const ScalarField theta0 = make_initial_data(spec);
    const ModulusFamily m = c.family == ModulusKind::holder ? ModulusFamily::holder(e) : ModulusFamily::log_holder(e);
    TransportProblem p{u, theta0, c.tracked_point, m, TimeGrid(c.t_end, c.dt),
                       EstimatorSettings{c.radii, c.sampler, c.plateau_tol}};
    const auto records = preservation_curve(p, outputs);

    // The data's known coefficient applies only to its own family and exponent.
    const bool matches = (spec.kind == InitialDataSpec::Kind::abs_power && c.family == ModulusKind::holder) ||
                         (spec.kind == InitialDataSpec::Kind::log_holder_cap && c.family == ModulusKind::log_holder);
    json reference = nullptr;
    if (c.expected_initial) {
      reference = *c.expected_initial;
    } else if (matches && spec.exponent == e && theta0.known_coefficient()) {
      reference = *theta0.known_coefficient();
    }
    const std::string name = label(c.family, e);
    curves.push_back({{"label", name}, {"family", c.family == ModulusKind::holder ? "holder" : "log_holder"},
                      {"exponent", e}, {"reference", reference}, {"records", records}});

    Series s{"curve_" + slug(name), {"t", "estimate", "gap", "mu_t"}, {}};
    if (sandwich) s.columns.insert(s.columns.end(), {"lower_bound", "upper_bound"});
    for (const auto& rec : records) {
      std::vector<double> row{rec.t, rec.estimate.value, rec.gap, rec.mu};
      if (sandwich) row.insert(row.end(), {rec.lower_bound.value_or(0.0), rec.upper_bound.value_or(0.0)});
      s.rows.push_back(std::move(row));
    }
    r.series.push_back(std::move(s));
    Series prof{"profile_" + slug(name), {"r"}, {}};
    for (const auto& rec : records) prof.columns.push_back("S_t" + fmt(rec.t));
    for (std::size_t k = 0; k < c.radii.size(); ++k) {
      std::vector<double> row{c.radii[k]};
      for (const auto& rec : records) row.push_back(rec.sup_ratios[k]);
      prof.rows.push_back(std::move(row));
    }
    r.series.push_back(std::move(prof));
  }
  r.records["curves"] = std::move(curves);
  flow_checks(c, u, r);
  finish(r, t0);
  return r;
}

std::uint64_t next_bits(std::mt19937_64& rng) { return rng(); }
double unit(std::mt19937_64& rng) { return static_cast<double>(next_bits(rng) >> 11) * 0x1.0p-53; }

// Random band-limited data: sum of modes |m1|, |m2| <= modes; odd-odd uses
// sin(m1 x1) sin(m2 x2) only. Mean zero either way.
std::vector<double> random_vorticity(const Grid2& g, int modes, bool odd_odd, std::mt19937_64& rng) {
  struct Mode {
    int m1, m2;
    double a, b;
  };
  std::vector<Mode> list;
  for (int m1 = 0; m1 <= modes; ++m1)
    for (int m2 = odd_odd ? 1 : -modes; m2 <= modes; ++m2) {
      if (odd_odd && m1 == 0) continue;
      if (!odd_odd && (m1 == 0 && m2 <= 0)) continue;
      const double scale = 1.0 / (1.0 + m1 * m1 + m2 * m2);
      list.push_back({m1, m2, scale * (2.0 * unit(rng) - 1.0), scale * (2.0 * unit(rng) - 1.0)});
    }
  const double k0 = std::numbers::pi / g.half_period();
  std::vector<double> w(g.size());
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      const Vec2 x = g.node(i, j);
      double v = 0.0;
      for (const auto& m : list) {
        if (odd_odd) {
          v += m.a * std::sin(k0 * m.m1 * x.x) * std::sin(k0 * m.m2 * x.y);
        } else {
          const double ph = k0 * (m.m1 * x.x + m.m2 * x.y);
          v += m.a * std::cos(ph) + m.b * std::sin(ph);
        }
      }
      w[g.index(i, j)] = v;
    }
  if (odd_odd) {
    // Products of sines are exactly antisymmetric only up to rounding of the
    // node coordinates; enforce it so the tag holds exactly.
    std::vector<double> s(w.size());
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i)
        s[g.index(i, j)] = 0.25 * ((w[g.index(i, j)] - w[g.index(g.mirror(i), j)]) -
                                   (w[g.index(i, g.mirror(j))] - w[g.index(g.mirror(i), g.mirror(j))]));
    w = std::move(s);
  }
  return w;
}

// Steps from s to time t_next with dt <= cfl h / max|u| (or a fixed dt).
EulerState advance(const Euler2dSolver& solver, EulerState s, double t_next, double cfl, double fixed_dt,
                   std::span<Vec2> tracers, int& steps, double& max_cfl) {
  const double h = solver.grid().spacing();
  while (s.t() < t_next - 1e-12 * std::max(1.0, t_next)) {
    const double remaining = t_next - s.t();
    double target = fixed_dt;
    if (target <= 0.0) {
      const double speed = solver.max_speed(s);
      target = speed > 0.0 ? cfl * h / speed : remaining;
    }
    const int m = std::max(1, static_cast<int>(std::ceil(remaining / target - 1e-9)));
    const double dt = remaining / m;
    max_cfl = std::max(max_cfl, solver.cfl_number(s, dt));
    s = solver.step(s, dt, tracers);
    ++steps;
  }
  return s;
}

}  // namespace

Report run_preservation_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::preservation) throw std::invalid_argument("run_preservation_experiment: wrong kind");
  return run_transport(c, false);
}

Report run_sandwich_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::sandwich) throw std::invalid_argument("run_sandwich_experiment: wrong kind");
  return run_transport(c, true);
}

Report run_flow_diagnostics_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::flow_diagnostics)
    throw std::invalid_argument("run_flow_diagnostics_experiment: wrong kind");
  const auto t0 = std::chrono::steady_clock::now();
  Report r = start(c);
  const VelocityField u = VelocityField::from_catalog(c.velocity_kind, c.velocity_params);
  flow_checks(c, u, r);
  finish(r, t0);
  return r;
}

Report run_euler_growth_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::euler_growth) throw std::invalid_argument("run_euler_growth_experiment: wrong kind");
  const auto t0 = std::chrono::steady_clock::now();
  Report r = start(c);
  const auto& e = c.euler;
  const Grid2 grid(e.n, e.half_period);
  const Euler2dSolver solver(grid);
  const bool zero = e.data == "zero";
  const EulerState raw =
      zero ? EulerState(grid, std::vector<double>(grid.size(), 0.0), 0.0, SymmetryTag{true})
           : bahouri_chemin_init(e.beta, grid);
  const ModulusFamily holder = ModulusFamily::holder(zero ? 1.0 : e.beta);
  const ModulusFamily logh = ModulusFamily::log_holder(e.log_gamma);

  std::vector<double> times;
  for (int i = 0; i < e.output_count; ++i) times.push_back(e.t_end * i / (e.output_count - 1));
  std::vector<Vec2> tracers;
  for (double s : e.seeds) tracers.push_back({s, 2.0 * s});

  json rec = {{"data", e.data},
              {"grid", {{"n", grid.n()}, {"half_period", grid.half_period()}, {"spacing", grid.spacing()}}},
              {"times", times},
              {"innermost_radius", innermost_sampled_radius(c.radii)},
              {"radii", c.radii},
              {"kernel_constant", kOriginStrainConstant}};
  json hv = json::array(), hf = json::array(), lv = json::array(), lf = json::array(), strain = json::array();
  json l2 = json::array(), sym = json::array(), origin = json::array(), speed = json::array();
  std::vector<json> paths(tracers.size(), json::array());
  Series growth{"growth", {"t", "holder", "log_holder"}, {}};
  for (double cut : e.strain_cutoffs) growth.columns.push_back("strain_r" + fmt(cut));

  const double raw_est = vorticity_coefficient_at_origin(raw, holder, c.radii, c.sampler, c.plateau_tol).value;
  EulerState s = solver.project(raw);
  const double l2_0 = solver.norms(s).l2;
  int steps = 0;
  double max_cfl = 0.0;
  try {
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i > 0) s = advance(solver, s, times[i], e.cfl, e.dt, tracers, steps, max_cfl);
      const auto a = vorticity_coefficient_at_origin(s, holder, c.radii, c.sampler, c.plateau_tol);
      const auto b = vorticity_coefficient_at_origin(s, logh, c.radii, c.sampler, c.plateau_tol);
      hv.push_back(a.value);
      hf.push_back(to_string(a.flag));
      lv.push_back(b.value);
      lf.push_back(to_string(b.flag));
      std::vector<double> row{times[i], a.value, b.value};
      json srow = json::array();
      for (double cut : e.strain_cutoffs) {
        const double v = origin_strain_diagnostic(s, cut);
        srow.push_back(v);
        row.push_back(v);
      }
      strain.push_back(srow);
      growth.rows.push_back(std::move(row));
      const auto norms = solver.norms(s);
      l2.push_back(l2_0 > 0.0 ? norms.l2 / l2_0 - 1.0 : norms.l2);
      sym.push_back(odd_odd_defect(grid, s.omega()));
      origin.push_back(s.omega()[grid.index(grid.n() / 2, grid.n() / 2)]);
      speed.push_back(solver.max_speed(s));
      for (std::size_t k = 0; k < tracers.size(); ++k) paths[k].push_back({tracers[k].x, tracers[k].y});
    }
  } catch (const std::invalid_argument& ex) {
    rec["error"] = std::string(ex.what());
  }
  rec["steps"] = steps;
  rec["max_cfl"] = max_cfl;
  rec["raw_initial_holder"] = raw_est;
  rec["noise_floor"] = hv.empty() ? 0.0 : std::abs(raw_est - hv.front().get<double>());
  rec["holder"] = {{"family", holder.name()}, {"values", hv}, {"flags", hf}};
  rec["log_holder"] = {{"family", logh.name()}, {"values", lv}, {"flags", lf}};
  rec["strain"] = {{"cutoffs", e.strain_cutoffs}, {"values", strain}};
  rec["l2_drift"] = l2;
  rec["symmetry_defect"] = sym;
  rec["origin_value"] = origin;
  rec["max_speed"] = speed;
  json trs = json::array();
  for (std::size_t k = 0; k < tracers.size(); ++k) {
    // Last output time up to which |phi| has decreased monotonically.
    double window = 0.0;
    const auto& p = paths[k];
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (std::hypot(p[i][0].get<double>(), p[i][1].get<double>()) <
          std::hypot(p[i - 1][0].get<double>(), p[i - 1][1].get<double>())) {
        window = times[i];
      } else {
        break;
      }
    }
    trs.push_back({{"seed", {e.seeds[k], 2.0 * e.seeds[k]}}, {"positions", p}, {"radius_decreasing_until", window}});
    Series ts{"tracer_" + std::to_string(k), {"t", "x1", "x2", "radius"}, {}};
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double x1 = p[i][0], x2 = p[i][1];
      ts.rows.push_back({times[i], x1, x2, std::hypot(x1, x2)});
    }
    r.series.push_back(std::move(ts));
  }
  rec["tracers"] = trs;
  r.records = std::move(rec);
  r.series.insert(r.series.begin(), std::move(growth));
  finish(r, t0);
  return r;
}

Report run_euler_validation_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::euler_validation)
    throw std::invalid_argument("run_euler_validation_experiment: wrong kind");
  const auto t0 = std::chrono::steady_clock::now();
  Report r = start(c);
  const auto& v = c.validation;
  const double pi = std::numbers::pi;
  json rec = json::object();
  std::mt19937_64 rng(c.seed);

  {
    // Eigenfunction: omega = sin x1 sin x2 gives u = (sin x1 cos x2, -cos x1 sin x2) / 2.
    const Grid2 g(v.eigen_n, pi);
    std::vector<double> w(g.size());
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const Vec2 x = g.node(i, j);
        w[g.index(i, j)] = std::sin(x.x) * std::sin(x.y);
      }
    const Euler2dSolver solver(g);
    const EulerState s(g, w);
    const auto [u1, u2] = solver.velocity(s);
    double err = 0.0;
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const Vec2 x = g.node(i, j);
        const std::size_t q = g.index(i, j);
        err = std::max(err, std::abs(u1[q] - 0.5 * std::sin(x.x) * std::cos(x.y)));
        err = std::max(err, std::abs(u2[q] + 0.5 * std::cos(x.x) * std::sin(x.y)));
      }
    rec["eigen_error"] = err;
    const auto next = solver.step(s, 0.01);
    double change = 0.0;
    for (std::size_t q = 0; q < w.size(); ++q) change = std::max(change, std::abs(next.omega()[q] - w[q]));
    rec["stationary_change"] = change;
    const EulerState zero(g, std::vector<double>(g.size(), 0.0));
    EulerState z = zero;
    for (int k = 0; k < 50; ++k) z = solver.step(z, 0.01);
    double zc = 0.0;
    for (double x : z.omega()) zc = std::max(zc, std::abs(x));
    rec["zero_change"] = zc;
  }

  const Grid2 g(v.n, pi);
  const Euler2dSolver solver(g);
  {
    const EulerState s(g, random_vorticity(g, v.modes, false, rng));
    const auto [u1, u2] = solver.velocity(s);
    const auto curl = solver.curl(u1, u2);
    const auto div = solver.divergence(u1, u2);
    double ce = 0.0, de = 0.0;
    for (std::size_t q = 0; q < curl.size(); ++q) {
      ce = std::max(ce, std::abs(curl[q] - s.omega()[q]));
      de = std::max(de, std::abs(div[q]));
    }
    rec["curl_error"] = ce;
    rec["divergence"] = de;

    int steps = 0;
    double max_cfl = 0.0;
    EulerState cur = solver.project(s);
    const auto n0 = solver.norms(cur);
    Series cons{"conservation", {"t", "l2_drift", "l4_drift"}, {}};
    double l2d = 0.0, l4d = 0.0;
    const int samples = 10;
    cons.rows.push_back({0.0, 0.0, 0.0});
    for (int k = 1; k <= samples; ++k) {
      cur = advance(solver, cur, v.t_end * k / samples, v.cfl, 0.0, {}, steps, max_cfl);
      const auto nk = solver.norms(cur);
      const double a = std::abs(nk.l2 / n0.l2 - 1.0), b = std::abs(nk.l4 / n0.l4 - 1.0);
      l2d = std::max(l2d, a);
      l4d = std::max(l4d, b);
      cons.rows.push_back({cur.t(), a, b});
    }
    rec["l2_drift"] = l2d;
    rec["l4_drift"] = l4d;
    rec["conservation_steps"] = steps;
    r.series.push_back(std::move(cons));
  }
  {
    EulerState cur = solver.project(EulerState(g, random_vorticity(g, v.modes, true, rng), 0.0, SymmetryTag{true}));
    const double h = g.spacing();
    const std::size_t origin = g.index(g.n() / 2, g.n() / 2);
    double sym = odd_odd_defect(g, cur.omega()), ov = 0.0, ou = 0.0, prev = sym, per_step = 0.0;
    Series ss{"symmetry", {"t", "defect", "origin_value", "origin_speed"}, {}};
    int steps = 0;
    while (cur.t() < v.t_end - 1e-12) {
      const double speed = solver.max_speed(cur);
      const double dt = std::min(v.t_end - cur.t(), v.cfl * h / std::max(speed, 1e-300));
      cur = solver.step(cur, dt);
      ++steps;
      const double d = odd_odd_defect(g, cur.omega());
      per_step = std::max(per_step, d - prev);
      prev = d;
      sym = std::max(sym, d);
      const auto [u1, u2] = solver.velocity(cur);
      const double o = std::abs(cur.omega()[origin]);
      const double us = std::hypot(u1[origin], u2[origin]);
      ov = std::max(ov, o);
      ou = std::max(ou, us);
      ss.rows.push_back({cur.t(), d, o, us});
    }
    rec["symmetry_defect"] = sym;
    rec["symmetry_defect_growth_per_step"] = per_step;
    rec["origin_value"] = ov;
    rec["origin_velocity"] = ou;
    rec["symmetry_steps"] = steps;
    r.series.push_back(std::move(ss));
  }
  r.records = std::move(rec);
  finish(r, t0);
  return r;
}

Report run_origin_strain_experiment(const ExperimentConfig& c) {
  if (c.kind != ExperimentKind::origin_strain) throw std::invalid_argument("run_origin_strain_experiment: wrong kind");
  const auto t0 = std::chrono::steady_clock::now();
  Report r = start(c);
  const auto& st = c.strain;
  const bool zero = st.data == "zero";
  const ScalarField f = zero ? ScalarField::analytic([](Vec2) { return 0.0; }) : log_strain_profile(st.gamma, st.support);
  std::vector<double> values;
  for (double cut : st.cutoffs) values.push_back(origin_strain_integral(f, SymmetryTag{true}, cut, st.outer));
  // Radial oracle: c0 (pi / 8) * integral of dr / (r (log 1/r)^gamma) between cutoffs.
  auto antiderivative = [g = st.gamma](double r) {
    const double L = std::log(1.0 / r);
    return g == 1.0 ? std::log(L) : std::pow(L, 1.0 - g) / (1.0 - g);
  };
  std::vector<double> numeric, oracle;
  Series s{"strain", {"cutoff", "value", "oracle_difference"}, {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    double od = 0.0;
    if (i > 0) {
      numeric.push_back(values[i] - values[i - 1]);
      od = kOriginStrainConstant * std::numbers::pi / 8.0 *
           (antiderivative(st.cutoffs[i]) - antiderivative(st.cutoffs[i - 1]));
      oracle.push_back(od);
    }
    s.rows.push_back({st.cutoffs[i], values[i], od});
  }
  r.records = {{"data", st.data},
               {"kernel_constant", kOriginStrainConstant},
               {"cutoffs", st.cutoffs},
               {"values", values},
               {"numeric_differences", numeric},
               {"oracle_differences", oracle}};
  r.series.push_back(std::move(s));
  finish(r, t0);
  return r;
}

Report run_experiment(const ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::preservation: return run_preservation_experiment(c);
    case ExperimentKind::sandwich: return run_sandwich_experiment(c);
    case ExperimentKind::euler_growth: return run_euler_growth_experiment(c);
    case ExperimentKind::flow_diagnostics: return run_flow_diagnostics_experiment(c);
    case ExperimentKind::euler_validation: return run_euler_validation_experiment(c);
    case ExperimentKind::origin_strain: return run_origin_strain_experiment(c);
  }
  throw std::invalid_argument("run_experiment: unknown kind");
}

std::vector<Verdict> compute_verdicts(ExperimentKind kind, const json& config, const json& records) {
  std::vector<Verdict> out;
  switch (kind) {
    case ExperimentKind::preservation:
      transport_verdicts(false, config, records, out);
      flow_verdicts(config, records, out);
      break;
    case ExperimentKind::sandwich:
      transport_verdicts(true, config, records, out);
      flow_verdicts(config, records, out);
      break;
    case ExperimentKind::flow_diagnostics: flow_verdicts(config, records, out); break;
    case ExperimentKind::euler_growth: growth_verdicts(config, records, out); break;
    case ExperimentKind::euler_validation: validation_verdicts(config, records, out); break;
    case ExperimentKind::origin_strain: strain_verdicts(config, records, out); break;
  }
  return out;
}

namespace {

ExperimentKind kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::preservation, ExperimentKind::sandwich, ExperimentKind::euler_growth,
                 ExperimentKind::flow_diagnostics, ExperimentKind::euler_validation, ExperimentKind::origin_strain})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

json series_json(const Series& s) { return {{"columns", s.columns}, {"rows", s.rows}}; }

}  // namespace

std::vector<Verdict> recheck_report(const json& report) {
  return compute_verdicts(kind_from_string(report.at("kind")), report.at("config"), report.at("records"));
}

json to_json(const Report& r) {
  json verdicts = json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back({{"name", v.name},
                        {"status", to_string(v.status)},
                        {"measured", v.measured},
                        {"threshold", v.threshold},
                        {"detail", v.detail}});
  json series = json::object();
  for (const auto& s : r.series) series[s.name] = series_json(s);
  return {{"schema", kReportSchema},
          {"version", kArtifactVersion},
          {"kind", to_string(r.kind)},
          {"name", r.name},
          {"seed", r.seed},
          {"config", r.config},
          {"records", r.records},
          {"series", series},
          {"verdicts", verdicts},
          {"overall", to_string(overall(r.verdicts))},
          {"runtime", {{"wall_seconds", r.wall_seconds}}}};
}

json deterministic_part(const json& report) {
  json out = report;
  out.erase("runtime");
  return out;
}

namespace {

std::string csv(const std::vector<std::string>& columns, const json& rows) {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i].get<double>());
      out += (i ? "," : "");
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::filesystem::path>& written) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ReportWriteError("cannot open " + path.string() + " for writing", written);
  os << content;
  os.close();
  if (!os) throw ReportWriteError("write failed for " + path.string(), written);
  written.push_back(path);
}

void make_dir(const std::filesystem::path& dir, const std::vector<std::filesystem::path>& written) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw ReportWriteError("cannot create directory " + dir.string() + ": " + ec.message(), written);
}

void plots(const json& report, const std::filesystem::path& dir, std::vector<std::filesystem::path>& written) {
  const auto pdir = dir / "plots";
  make_dir(pdir, written);
  json index = json::array();
  for (const auto& [name, s] : report.at("series").items()) {
    const auto columns = s.at("columns").get<std::vector<std::string>>();
    for (std::size_t c = 1; c < columns.size(); ++c) {
      const std::string file = name + "__" + columns[c] + ".dat";
      std::string body = "# " + columns[0] + " " + columns[c] + "\n";
      char buf[80];
      for (const auto& row : s.at("rows")) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", row[0].get<double>(), row[c].get<double>());
        body += buf;
      }
      write_file(pdir / file, body, written);
      const bool log_x = columns[0] == "r" || columns[0] == "cutoff";
      index.push_back({{"file", file},
                       {"series", name},
                       {"x", {{"label", columns[0]}, {"scale", log_x ? "log" : "linear"}}},
                       {"y", {{"label", columns[c]}, {"scale", "linear"}}}});
    }
  }
  write_file(pdir / "index.json",
             json{{"experiment", report.at("kind")}, {"name", report.at("name")}, {"plots", index}}.dump(2) + "\n",
             written);
}

}  // namespace

std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  make_dir(dir, written);
  const json doc = to_json(r);
  write_file(dir / "report.json", doc.dump(2) + "\n", written);
  for (const auto& s : r.series) write_file(dir / (s.name + ".csv"), csv(s.columns, series_json(s).at("rows")), written);
  plots(doc, dir, written);
  return written;
}

std::vector<std::filesystem::path> emit_plots(const json& report, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  make_dir(dir, written);
  plots(report, dir, written);
  return written;
}

}  // namespace loghold
