#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "loghold/fields.hpp"

using namespace loghold;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<VelocityField> analytic_catalog() {
  return {VelocityField::zero(), VelocityField::rigid_rotation(0.7), VelocityField::linear_strain(1.3),
          VelocityField::shear(-0.4), VelocityField::cellular(1.0)};
}

double brute_force_cellular_sup(int n, Vec2 shift) {
  const auto u = VelocityField::cellular(1.0);
  const double h = 2.0 * pi / n;
  double best = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      best = std::max(best, sigma_max(u.gradient({-pi + i * h + shift.x, -pi + j * h + shift.y}, 0.0)));
  return best;
}

}  // namespace

TEST_SUITE("fields") {
  TEST_CASE("eval_scalar on analytic fields") {
    const auto zero = ScalarField::analytic([](Vec2) { return 0.0; });
    CHECK(eval_scalar(zero, {0.3, -0.7}) == 0.0);
    const auto root = ScalarField::analytic([](Vec2 x) { return std::sqrt(norm(x)); });
    CHECK(eval_scalar(root, {1.0, 0.0}) == 1.0);
  }

  TEST_CASE("sampled sin x1 cos x2 matches the closed form") {
    const Grid2 g(256, pi);
    const auto f = ScalarField::analytic([](Vec2 x) { return std::sin(x.x) * std::cos(x.y); });
    const Vec2 x{0.123, 0.456};
    const double exact = std::sin(x.x) * std::cos(x.y);
    CHECK(std::abs(eval_scalar(sample_to_grid(f, g), x) - exact) < 1e-8);
    CHECK(std::abs(eval_scalar(sample_to_grid(f, g, Interpolation::spectral), x) - exact) < 1e-12);
  }

  TEST_CASE("eval_velocity catalog formulas") {
    CHECK(eval_velocity(VelocityField::zero(), {1.0, 2.0}, 0.3) == Vec2{0.0, 0.0});
    CHECK(eval_velocity(VelocityField::linear_strain(1.0), {2.0, 3.0}, 5.0) == Vec2{2.0, -3.0});
    const Vec2 c = eval_velocity(VelocityField::cellular(1.0), {pi / 2, 0.0}, 0.0);
    CHECK(c.x == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(c.y) < 1e-15);
  }

  TEST_CASE("grad_sup values") {
    CHECK(grad_sup(VelocityField::zero(), 0.0).value == 0.0);
    CHECK(grad_sup(VelocityField::linear_strain(1.0), 0.0).value == 1.0);
    const double analytic = grad_sup(VelocityField::cellular(1.0), 0.0).value;
    CHECK(std::abs(analytic - brute_force_cellular_sup(2048, {0.0, 0.0})) < 1e-6);
  }

  TEST_CASE("grad_sup is translation consistent") {
    const double h = 2.0 * pi / 2048;
    const double a = brute_force_cellular_sup(2048, {0.0, 0.0});
    const double b = brute_force_cellular_sup(2048, {h / 4, 0.0});
    CHECK(std::abs(a - b) < 1e-6);
  }

  TEST_CASE("gridded grad_sup of a sampled cellular flow") {
    const Grid2 g(128, pi);
    const auto u = VelocityField::cellular(1.0);
    const auto u1 = sample_to_grid(ScalarField::analytic([&](Vec2 x) { return u(x, 0.0).x; }), g);
    const auto u2 = sample_to_grid(ScalarField::analytic([&](Vec2 x) { return u(x, 0.0).y; }), g);
    const auto v = VelocityField::gridded_steady({0.0, u1, u2});
    CHECK(v.grad_sup(0.0).value == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("sample_to_grid") {
    const Grid2 g16(16, 1.0);
    const auto one = sample_to_grid(ScalarField::analytic([](Vec2) { return 1.0; }), g16);
    for (double v : one.values()) CHECK(v == 1.0);

    const Grid2 g(256, 2.0);
    const auto f = ScalarField::analytic([](Vec2 x) { return std::pow(norm(x), 0.5); });
    const auto s = sample_to_grid(f, g);
    const int i = static_cast<int>(std::lround(1.0 / g.spacing())) + g.n() / 2;
    const int j = g.n() / 2;
    CHECK(s.values()[g.index(i, j)] == std::pow(norm(g.node(i, j)), 0.5));
  }

  TEST_CASE("gridded interpolation reproduces nodes and is periodic") {
    const Grid2 g(64, 2.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> values(g.size());
    for (double& v : values) v = d(rng);
    for (auto mode : {Interpolation::bicubic, Interpolation::spectral}) {
      const auto f = ScalarField::gridded(g, values, mode);
      for (int j = 0; j < g.n(); j += 7)
        for (int i = 0; i < g.n(); i += 5) CHECK(f(g.node(i, j)) == doctest::Approx(values[g.index(i, j)]).epsilon(1e-12));
      for (int k = 0; k < 20; ++k) {
        const Vec2 x{d(rng), d(rng)};
        CHECK(std::abs(f(x) - f({x.x + 4.0, x.y})) < 1e-12);
        CHECK(std::abs(f(x) - f({x.x, x.y - 4.0})) < 1e-12);
      }
    }
  }

  TEST_CASE("analytic catalog velocities are divergence free") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    for (const auto& u : analytic_catalog()) {
      for (int k = 0; k < 1000; ++k) {
        const Vec2 x{d(rng), d(rng)};
        CHECK(std::abs(u.gradient(x, 0.0).trace()) <= 1e-12);
      }
    }
  }

  TEST_CASE("catalog gradients match central differences") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> d(-3.0, 3.0);
    const double e = 1e-5;
    for (const auto& u : analytic_catalog()) {
      for (int k = 0; k < 50; ++k) {
        const Vec2 x{d(rng), d(rng)};
        const Mat2 m = u.gradient(x, 0.0);
        const Vec2 dx = (u({x.x + e, x.y}, 0.0) - u({x.x - e, x.y}, 0.0)) * (0.5 / e);
        const Vec2 dy = (u({x.x, x.y + e}, 0.0) - u({x.x, x.y - e}, 0.0)) * (0.5 / e);
        CHECK(std::abs(m.a11 - dx.x) < 1e-8);
        CHECK(std::abs(m.a21 - dx.y) < 1e-8);
        CHECK(std::abs(m.a12 - dy.x) < 1e-8);
        CHECK(std::abs(m.a22 - dy.y) < 1e-8);
      }
    }
  }

  TEST_CASE("catalog lookup validates names and parameters") {
    CHECK(VelocityField::from_catalog("linear_strain", {{"lambda", 2.0}})({1.0, 1.0}, 0.0) == Vec2{2.0, -2.0});
    CHECK_THROWS(VelocityField::from_catalog("vortex", {}));
    CHECK_THROWS(VelocityField::from_catalog("cellular", {{"lambda", 1.0}}));
  }

  TEST_CASE("sample_to_grid rejects non-finite samples") {
    const Grid2 g(16, 1.0);
    CHECK_THROWS(sample_to_grid(ScalarField::analytic([](Vec2 x) { return 1.0 / norm(x); }), g));
  }
}
