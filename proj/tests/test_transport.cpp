#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "loghold/spectral.hpp"
#include "loghold/transport.hpp"

using namespace loghold;

namespace {

constexpr double pi = std::numbers::pi;

SamplerSpec sweep(int directions, int shells) {
  SamplerSpec s;
  s.directions = directions;
  s.shells_per_band = shells;
  return s;
}

TransportProblem problem(VelocityField u, InitialDataSpec spec, ModulusFamily m, std::vector<double> radii,
                         double dt = 1e-2, int directions = 360, int shells = 4) {
  return {std::move(u), make_initial_data(spec), {0.0, 0.0}, m, TimeGrid(1.0, dt),
          EstimatorSettings{std::move(radii), sweep(directions, shells), 1e-2}};
}

InitialDataSpec log_cap(double gamma) {
  InitialDataSpec s;
  s.kind = InitialDataSpec::Kind::log_holder_cap;
  s.exponent = gamma;
  return s;
}

InitialDataSpec power(double beta) {
  InitialDataSpec s;
  s.kind = InitialDataSpec::Kind::abs_power;
  s.exponent = beta;
  return s;
}

// Eulerian pseudo-spectral advection theta_t = -u . grad theta on [-pi, pi)^2
// with 2/3 truncation and RK4.
std::vector<double> eulerian_advection(const VelocityField& u, std::vector<double> theta, const Grid2& g, double t,
                                       int steps) {
  const Fft2 fft(g.n());
  const int n = g.n();
  const int nh = n / 2 + 1;
  std::vector<double> u1(g.size()), u2(g.size());
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 v = u(g.node(i, j), 0.0);
      u1[g.index(i, j)] = v.x;
      u2[g.index(i, j)] = v.y;
    }
  auto truncate = [&](std::vector<Complex>& c) {
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < nh; ++i)
        if (3 * i > n || 3 * std::abs(fft.row_mode(j)) > n) c[static_cast<std::size_t>(j) * nh + i] = 0.0;
  };
  auto rhs = [&](const std::vector<double>& th) {
    auto c = fft.forward(th);
    truncate(c);
    std::vector<Complex> cx(c.size()), cy(c.size());
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < nh; ++i) {
        const std::size_t q = static_cast<std::size_t>(j) * nh + i;
        const double k1 = (i == n / 2) ? 0.0 : i;
        const double k2 = (j == n / 2) ? 0.0 : fft.row_mode(j);
        cx[q] = Complex(0.0, k1) * c[q];
        cy[q] = Complex(0.0, k2) * c[q];
      }
    const auto dx = fft.inverse(cx), dy = fft.inverse(cy);
    std::vector<double> out(th.size());
    for (std::size_t q = 0; q < out.size(); ++q) out[q] = -(u1[q] * dx[q] + u2[q] * dy[q]);
    auto oc = fft.forward(out);
    truncate(oc);
    return fft.inverse(oc);
  };
  const double dt = t / steps;
  for (int s = 0; s < steps; ++s) {
    const auto k1 = rhs(theta);
    std::vector<double> tmp(theta.size());
    for (std::size_t q = 0; q < tmp.size(); ++q) tmp[q] = theta[q] + 0.5 * dt * k1[q];
    const auto k2 = rhs(tmp);
    for (std::size_t q = 0; q < tmp.size(); ++q) tmp[q] = theta[q] + 0.5 * dt * k2[q];
    const auto k3 = rhs(tmp);
    for (std::size_t q = 0; q < tmp.size(); ++q) tmp[q] = theta[q] + dt * k3[q];
    const auto k4 = rhs(tmp);
    for (std::size_t q = 0; q < tmp.size(); ++q) theta[q] += dt / 6.0 * (k1[q] + 2 * k2[q] + 2 * k3[q] + k4[q]);
  }
  return theta;
}

std::vector<double> deep_ladder() { return geometric_radii(0.1, 0.25, 48); }

}  // namespace

TEST_SUITE("transport") {
  TEST_CASE("solve_theta pullbacks") {
    InitialDataSpec sc;
    sc.kind = InitialDataSpec::Kind::sin_cos;
    const auto p0 = problem(VelocityField::zero(), sc, ModulusFamily::holder(1.0), geometric_radii(0.1, 0.5, 4));
    for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-1.0, 0.5}}) CHECK(solve_theta(p0, x, 1.0) == p0.theta0(x));

    // theta0 = |x| (cutoff far away) pulled back by the strain flow.
    InitialDataSpec abs1 = power(1.0);
    abs1.cutoff = 10.0;
    const auto p1 = problem(VelocityField::linear_strain(1.0), abs1, ModulusFamily::holder(1.0),
                            geometric_radii(0.1, 0.5, 4), 1e-3);
    CHECK(solve_theta(p1, {std::exp(1.0), 0.0}, 1.0) == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("pullback matches an Eulerian spectral solve for the cellular flow") {
    InitialDataSpec sc;
    sc.kind = InitialDataSpec::Kind::sin_cos;
    const auto p = problem(VelocityField::cellular(1.0), sc, ModulusFamily::holder(1.0), geometric_radii(0.1, 0.5, 4),
                           1e-3);
    const Grid2 g(128, pi);
    std::vector<double> theta0(g.size());
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) theta0[g.index(i, j)] = p.theta0(g.node(i, j));
    const auto theta1 = eulerian_advection(p.u, theta0, g, 1.0, 400);
    const auto oracle = ScalarField::gridded(g, theta1, Interpolation::spectral);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> d(-pi, pi);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vec2 x{d(rng), d(rng)};
      worst = std::max(worst, std::abs(solve_theta(p, x, 1.0) - oracle(x)));
    }
    CHECK(worst < 1e-4);
  }

  TEST_CASE("transported range never exceeds the initial range") {
    const auto p = problem(VelocityField::cellular(1.0), log_cap(0.5), ModulusFamily::log_holder(0.5),
                           geometric_radii(0.1, 0.5, 4));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double sup0 = 0.0, sup1 = 0.0;
    for (int k = 0; k < 300; ++k) {
      const Vec2 x{d(rng), d(rng)};
      sup0 = std::max(sup0, std::abs(p.theta0(x)));
      sup1 = std::max(sup1, std::abs(solve_theta(p, x, 1.0)));
    }
    CHECK(sup1 <= 1.0 + 1e-10);
    CHECK(sup0 <= 1.0 + 1e-10);
  }

  TEST_CASE("zero velocity keeps the coefficient") {
    const auto p = problem(VelocityField::zero(), log_cap(1.0), ModulusFamily::log_holder(1.0), deep_ladder());
    const auto r = transported_coefficient(p, 1.0);
    CHECK(r.gap < 0.01);
    CHECK(r.mu == 1.0);
  }

  TEST_CASE("log-Holder coefficient preserved by linear strain") {
    const auto p = problem(VelocityField::linear_strain(1.0), log_cap(0.5), ModulusFamily::log_holder(0.5), deep_ladder());
    const auto r = transported_coefficient(p, 1.0);
    CHECK(r.initial == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.estimate.value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(r.gap <= 0.05);
  }

  TEST_CASE("Holder coefficient saturates the upper sandwich bound") {
    const auto p = problem(VelocityField::linear_strain(1.0), power(0.5), ModulusFamily::holder(0.5),
                           geometric_radii(0.1, 0.5, 10), 1e-2, 720, 8);
    const auto r = transported_coefficient(p, 1.0);
    CHECK(r.estimate.value / r.initial == doctest::Approx(std::exp(0.5)).epsilon(0.05));
    REQUIRE(r.upper_bound);
    CHECK(r.estimate.value <= *r.upper_bound * 1.01);
  }

  TEST_CASE("preservation curves") {
    const std::vector<double> times{0.0, 0.5, 1.0};
    const auto flat = preservation_curve(
        problem(VelocityField::zero(), log_cap(0.5), ModulusFamily::log_holder(0.5), geometric_radii(0.1, 0.5, 6)), times);
    for (const auto& r : flat) CHECK(r.gap == 0.0);

    const auto curve = preservation_curve(
        problem(VelocityField::linear_strain(1.0), log_cap(1.0), ModulusFamily::log_holder(1.0), deep_ladder(), 1e-2, 180, 2),
        times);
    for (const auto& r : curve) CHECK(r.gap <= 0.05);
    CHECK(curve.front().t == 0.0);
  }

  TEST_CASE("preservation for every analytic catalog flow") {
    for (const auto& u : {VelocityField::rigid_rotation(1.0), VelocityField::linear_strain(1.0),
                          VelocityField::shear(1.0), VelocityField::cellular(1.0)}) {
      for (double gamma : {0.5, 1.0}) {
        const auto p = problem(u, log_cap(gamma), ModulusFamily::log_holder(gamma), deep_ladder(), 1e-2, 180, 2);
        const auto r = transported_coefficient(p, 1.0);
        CHECK_MESSAGE(r.gap <= 0.05, u.name(), " gamma ", gamma);
      }
    }
  }

  TEST_CASE("Holder records respect the sandwich for every analytic catalog flow") {
    const std::vector<double> times{0.0, 0.5, 1.0};
    for (const auto& u : {VelocityField::rigid_rotation(1.0), VelocityField::linear_strain(1.0),
                          VelocityField::shear(1.0), VelocityField::cellular(1.0)}) {
      const auto p = problem(u, power(0.5), ModulusFamily::holder(0.5), geometric_radii(0.1, 0.5, 10), 1e-2, 360, 4);
      for (const auto& r : preservation_curve(p, times)) {
        REQUIRE(r.lower_bound);
        CHECK_MESSAGE(r.estimate.value >= *r.lower_bound * 0.99, u.name());
        CHECK_MESSAGE(r.estimate.value <= *r.upper_bound * 1.01, u.name());
      }
    }
  }

  TEST_CASE("sandwich width shrinks with beta") {
    double prev = INFINITY;
    for (double beta : {0.5, 0.1, 0.02}) {
      const auto p = problem(VelocityField::linear_strain(1.0), power(beta), ModulusFamily::holder(beta),
                             geometric_radii(0.1, 0.5, 6), 1e-2, 90, 2);
      const auto r = transported_coefficient(p, 1.0);
      const double width = *r.upper_bound - *r.lower_bound;
      CHECK(width < prev);
      prev = width;
    }
  }

  TEST_CASE("recorded mu equals the flow budget") {
    const auto p = problem(VelocityField::cellular(1.0), log_cap(0.5), ModulusFamily::log_holder(0.5),
                           geometric_radii(0.1, 0.5, 4), 1e-2, 90, 2);
    const auto budget = lipschitz_budget(p.u, p.time);
    const std::vector<double> times{0.5, 1.0};
    for (const auto& r : preservation_curve(p, times))
      CHECK(std::abs(r.mu - budget.mu[p.time.node_index(r.t)]) <= 1e-12);
  }

  TEST_CASE("initial data catalog") {
    CHECK(make_initial_data(power(0.5))({0.25, 0.0}) == doctest::Approx(0.5));
    CHECK(make_initial_data(log_cap(1.0))({std::exp(-2.0), 0.0}) == doctest::Approx(0.5));
    CHECK(make_initial_data(log_cap(1.0))({0.0, 0.0}) == 0.0);
    CHECK(make_initial_data(power(0.5))({2.0, 0.0}) == 0.0);
    CHECK(*make_initial_data(power(0.5)).known_coefficient() == 1.0);
    CHECK_THROWS(make_initial_data(power(1.5)));
    CHECK(smooth_cutoff(0.4, 1.0) == 1.0);
    CHECK(smooth_cutoff(1.0, 1.0) == 0.0);
    const double mid = smooth_cutoff(0.75, 1.0);
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
  }

  TEST_CASE("estimator preconditions are enforced") {
    auto p = problem(VelocityField::linear_strain(1.0), log_cap(0.5), ModulusFamily::log_holder(0.5),
                     geometric_radii(0.1, 0.5, 4));
    p.estimator.sampler.kind = SamplerSpec::Kind::grid;
    CHECK_THROWS(transported_coefficient(p, 1.0));
    auto q = problem(VelocityField::linear_strain(1.0), log_cap(0.5), ModulusFamily::log_holder(0.5),
                     geometric_radii(0.3, 0.5, 4));
    CHECK_THROWS(transported_coefficient(q, 1.0));  // mu(1) r_1 exceeds s_max
  }
}
