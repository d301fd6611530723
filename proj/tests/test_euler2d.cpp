#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"

#include "loghold/euler2d.hpp"

using namespace loghold;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> nodal(const Grid2& g, const std::function<double(Vec2)>& f) {
  std::vector<double> v(g.size());
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) v[g.index(i, j)] = f(g.node(i, j));
  return v;
}

// Smooth band-limited data; odd_odd uses sine products only.
std::vector<double> smooth_data(const Grid2& g, std::uint64_t seed, bool odd_odd) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  struct M {
    int a, b;
    double c, s;
  };
  std::vector<M> modes;
  for (int a = odd_odd ? 1 : 0; a <= 4; ++a)
    for (int b = 1; b <= 4; ++b) modes.push_back({a, b, d(rng) / (a * a + b * b), d(rng) / (a * a + b * b)});
  auto v = nodal(g, [&](Vec2 x) {
    double s = 0.0;
    for (const auto& m : modes)
      s += odd_odd ? m.c * std::sin(m.a * x.x) * std::sin(m.b * x.y)
                   : m.c * std::cos(m.a * x.x + m.b * x.y) + m.s * std::sin(m.a * x.x - m.b * x.y);
    return s;
  });
  if (odd_odd) {
    std::vector<double> w(v.size());
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i)
        w[g.index(i, j)] = 0.25 * (v[g.index(i, j)] - v[g.index(g.mirror(i), j)] - v[g.index(i, g.mirror(j))] +
                                   v[g.index(g.mirror(i), g.mirror(j))]);
    v = std::move(w);
  }
  return v;
}

std::vector<double> origin_ladder() { return geometric_radii(0.3, 0.82, 5); }

}  // namespace

TEST_SUITE("euler2d") {
  TEST_CASE("state invariants are checked") {
    const Grid2 g(16, pi);
    CHECK_THROWS(EulerState(g, std::vector<double>(g.size(), 1.0)));
    std::vector<double> bad(g.size(), 0.0);
    bad[3] = NAN;
    CHECK_THROWS(EulerState(g, bad));
    CHECK_THROWS(EulerState(g, std::vector<double>(5, 0.0)));
    const auto even = nodal(g, [](Vec2 x) { return std::cos(x.x) * std::sin(x.y); });
    CHECK_NOTHROW(EulerState(g, even));
    CHECK_THROWS(EulerState(g, even, 0.0, SymmetryTag{true}));
  }

  TEST_CASE("Biot-Savart of zero and of the eigenfunction") {
    const Grid2 g(64, pi);
    const Euler2dSolver solver(g);
    const auto [z1, z2] = solver.velocity(EulerState(g, std::vector<double>(g.size(), 0.0)));
    for (std::size_t q = 0; q < z1.size(); ++q) {
      CHECK(z1[q] == 0.0);
      CHECK(z2[q] == 0.0);
    }
    const EulerState s(g, nodal(g, [](Vec2 x) { return std::sin(x.x) * std::sin(x.y); }));
    const auto [u1, u2] = solver.velocity(s);
    double err = 0.0;
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const Vec2 x = g.node(i, j);
        err = std::max(err, std::abs(u1[g.index(i, j)] - 0.5 * std::sin(x.x) * std::cos(x.y)));
        err = std::max(err, std::abs(u2[g.index(i, j)] + 0.5 * std::cos(x.x) * std::sin(x.y)));
      }
    CHECK(err < 1e-12);
    const auto u = biot_savart(s);
    CHECK(u({0.3, 0.7}, 0.0).x == doctest::Approx(0.5 * std::sin(0.3) * std::cos(0.7)).epsilon(1e-6));
  }

  TEST_CASE("curl of the velocity returns the vorticity; divergence vanishes") {
    const Grid2 g(64, pi);
    const Euler2dSolver solver(g);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const EulerState s(g, smooth_data(g, seed, false));
      const auto [u1, u2] = solver.velocity(s);
      const auto curl = solver.curl(u1, u2);
      const auto div = solver.divergence(u1, u2);
      for (std::size_t q = 0; q < curl.size(); ++q) {
        CHECK(std::abs(curl[q] - s.omega()[q]) < 1e-11);
        CHECK(std::abs(div[q]) <= 1e-12);
      }
    }
  }

  TEST_CASE("steps of stationary states") {
    const Grid2 g(64, pi);
    const Euler2dSolver solver(g);
    EulerState z(g, std::vector<double>(g.size(), 0.0));
    for (int k = 0; k < 50; ++k) z = solver.step(z, 0.05);
    for (double v : z.omega()) CHECK(v == 0.0);
    CHECK(vorticity_coefficient_at_origin(EulerState(Grid2(256, pi), std::vector<double>(256 * 256, 0.0), 0.0,
                                                     SymmetryTag{true}),
                                          ModulusFamily::holder(0.5), origin_ladder())
              .value == 0.0);

    EulerState e(g, nodal(g, [](Vec2 x) { return std::sin(x.x) * std::sin(x.y); }));
    const std::vector<double> w0(e.omega().begin(), e.omega().end());
    for (int k = 0; k < 10; ++k) {
      const auto next = solver.step(e, 0.05);
      for (std::size_t q = 0; q < w0.size(); ++q) CHECK(std::abs(next.omega()[q] - e.omega()[q]) < 1e-10);
      e = next;
    }
  }

  TEST_CASE("L2 and L4 norms are conserved for smooth data") {
    const Grid2 g(256, pi);
    const Euler2dSolver solver(g);
    EulerState s = solver.project(EulerState(g, smooth_data(g, 9, false)));
    const auto n0 = solver.norms(s);
    for (int k = 0; k < 100; ++k) s = solver.step(s, 0.01);
    const auto n1 = solver.norms(s);
    CHECK(std::abs(n1.l2 / n0.l2 - 1.0) < 1e-3);
    CHECK(std::abs(n1.l4 / n0.l4 - 1.0) < 1e-3);
  }

  TEST_CASE("odd-odd symmetry, origin value and origin velocity") {
    const Grid2 g(128, pi);
    const Euler2dSolver solver(g);
    EulerState s = solver.project(EulerState(g, smooth_data(g, 4, true), 0.0, SymmetryTag{true}));
    const std::size_t origin = g.index(g.n() / 2, g.n() / 2);
    double prev = odd_odd_defect(g, s.omega());
    for (int k = 0; k < 40; ++k) {
      s = solver.step(s, 0.02);
      const double d = odd_odd_defect(g, s.omega());
      CHECK(d - prev <= 1e-10);
      CHECK(d <= 1e-10);
      prev = d;
      CHECK(std::abs(s.omega()[origin]) <= 1e-12);
      const auto [u1, u2] = solver.velocity(s);
      CHECK(std::hypot(u1[origin], u2[origin]) <= 1e-10);
    }
  }

  TEST_CASE("Bahouri-Chemin data") {
    for (double beta : {0.25, 0.5, 1.0}) {
      for (double r : {0.01, 0.1, 0.4}) {
        CHECK(bahouri_chemin_value(beta, {r, 2 * r}) == doctest::Approx(0.5 * std::pow(std::sqrt(5.0) * r, beta)).epsilon(1e-14));
      }
      for (double a : {-0.7, 0.2, 1.2}) {
        CHECK(bahouri_chemin_value(beta, {a, 0.0}) == 0.0);
        CHECK(bahouri_chemin_value(beta, {0.0, a}) == 0.0);
      }
      CHECK(bahouri_chemin_value(beta, {1.6, 0.3}) == 0.0);
    }
    const Grid2 g(128, pi);
    const auto s = bahouri_chemin_init(0.5, g);
    CHECK(s.tag().odd_odd);
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        CHECK(s.omega()[g.index(g.mirror(i), j)] == -s.omega()[g.index(i, j)]);
        CHECK(s.omega()[g.index(i, g.mirror(j))] == -s.omega()[g.index(i, j)]);
      }
    CHECK_THROWS(bahouri_chemin_init(1.5, g));
    CHECK_THROWS(bahouri_chemin_init(0.5, Grid2(64, 1.0)));
  }

  TEST_CASE("initial Holder coefficient at the origin is one half") {
    // max over directions of 2 c s / (4 c^2 + s^2) is 1/2, attained at s = 2c.
    double best = 0.0;
    for (int k = 0; k < 100000; ++k) {
      const double phi = 0.5 * pi * k / 100000;
      const double c = std::cos(phi), s = std::sin(phi);
      best = std::max(best, 2 * c * s / (4 * c * c + s * s));
    }
    CHECK(best == doctest::Approx(0.5).epsilon(1e-9));
    const auto s = bahouri_chemin_init(0.5, Grid2(256, pi));
    const auto e = vorticity_coefficient_at_origin(s, ModulusFamily::holder(0.5), origin_ladder());
    CHECK(e.value == doctest::Approx(0.5).epsilon(0.03));
    CHECK_THROWS(vorticity_coefficient_at_origin(s, ModulusFamily::holder(0.5), geometric_radii(0.3, 0.5, 6)));
  }

  TEST_CASE("origin strain of trivial fields") {
    const auto zero = ScalarField::analytic([](Vec2) { return 0.0; });
    CHECK(origin_strain_integral(zero, SymmetryTag{true}, 1e-3, 0.5) == 0.0);
    const auto axes = ScalarField::analytic([](Vec2 y) { return (y.x == 0.0 || y.y == 0.0) ? 1.0 : 0.0; });
    CHECK(origin_strain_integral(axes, SymmetryTag{true}, 1e-3, 0.5) == 0.0);
    const Grid2 g(64, pi);
    CHECK(origin_strain_diagnostic(EulerState(g, std::vector<double>(g.size(), 0.0), 0.0, SymmetryTag{true}), 0.2) == 0.0);
    CHECK_THROWS(origin_strain_diagnostic(EulerState(g, std::vector<double>(g.size(), 0.0), 0.0, SymmetryTag{true}),
                                          g.spacing()));
  }

  TEST_CASE("origin strain of the log profile follows log log(1/r)") {
    const auto f = log_strain_profile(1.0, 0.5);
    const std::vector<double> cutoffs{1e-2, 1e-3, 1e-4};
    std::vector<double> v;
    for (double c : cutoffs) v.push_back(origin_strain_integral(f, SymmetryTag{true}, c, 0.5));
    for (std::size_t i = 1; i < v.size(); ++i) {
      const double oracle = kOriginStrainConstant * pi / 8.0 *
                            (std::log(std::log(1.0 / cutoffs[i])) - std::log(std::log(1.0 / cutoffs[i - 1])));
      CHECK(v[i] > v[i - 1]);
      CHECK((v[i] - v[i - 1]) == doctest::Approx(oracle).epsilon(0.10));
    }
  }

  TEST_CASE("tracers follow the flow") {
    const Grid2 g(64, pi);
    const Euler2dSolver solver(g);
    const EulerState s(g, nodal(g, [](Vec2 x) { return std::sin(x.x) * std::sin(x.y); }));
    std::vector<Vec2> tr{{0.3, 0.2}};
    EulerState cur = s;
    for (int k = 0; k < 20; ++k) cur = solver.step(cur, 0.05, tr);
    // Steady cellular velocity (1/2) (sin x1 cos x2, -cos x1 sin x2) integrated directly.
    const auto u = VelocityField::cellular(-0.5);
    Vec2 x{0.3, 0.2};
    const double h = 0.05;
    for (int k = 0; k < 20; ++k) {
      const Vec2 k1 = u(x, 0), k2 = u(x + 0.5 * h * k1, 0), k3 = u(x + 0.5 * h * k2, 0), k4 = u(x + h * k3, 0);
      x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    CHECK(distance(tr[0], x) < 1e-6);
  }

  TEST_CASE("CFL violations are rejected with advice") {
    const Grid2 g(64, pi);
    const Euler2dSolver solver(g);
    const EulerState s(g, nodal(g, [](Vec2 x) { return 10.0 * std::sin(x.x) * std::sin(x.y); }));
    CHECK(solver.cfl_number(s, 1.0) > kMaxCfl);
    CHECK_THROWS_AS(solver.step(s, 1.0), std::invalid_argument);
  }

  TEST_CASE("checkpoints round trip") {
    const Grid2 g(32, pi);
    const EulerState s(g, smooth_data(g, 5, false), 0.75);
    const auto path = std::filesystem::temp_directory_path() / "loghold_checkpoint_test.bin";
    save_checkpoint(s, path);
    CHECK(std::filesystem::file_size(path) == 3 * 8 + g.size() * 8);
    const auto back = load_checkpoint(path);
    CHECK(back.t() == 0.75);
    CHECK(back.grid() == g);
    for (std::size_t q = 0; q < g.size(); ++q) CHECK(back.omega()[q] == s.omega()[q]);
    std::filesystem::remove(path);
    const auto csv = state_csv(EulerState(Grid2(16, 1.0), std::vector<double>(256, 0.0)));
    CHECK(csv.rfind("x1,x2,omega\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 257);
  }

  TEST_CASE("growth of the Holder coefficient over a short run") {
    const Grid2 g(256, pi);
    const Euler2dSolver solver(g);
    EulerState s = solver.project(bahouri_chemin_init(0.5, g));
    const auto e0 = vorticity_coefficient_at_origin(s, ModulusFamily::holder(0.5), origin_ladder());
    for (int k = 0; k < 8; ++k) s = solver.step(s, 1.0 / 32);
    const auto e1 = vorticity_coefficient_at_origin(s, ModulusFamily::holder(0.5), origin_ladder());
    CHECK(e1.value > e0.value);
  }
  TEST_CASE("doubling the box leaves the origin diagnostics unchanged") {
    // Same spacing h on [-pi, pi)^2 and [-2 pi, 2 pi)^2; the data lives in |x| < 1.5.
    std::vector<std::pair<double, double>> results;
    for (auto [n, L] : {std::pair{256, pi}, std::pair{512, 2 * pi}}) {
      const Grid2 g(n, L);
      const Euler2dSolver solver(g);
      EulerState s = solver.project(bahouri_chemin_init(0.5, g));
      for (int k = 0; k < 16; ++k) s = solver.step(s, 1.0 / 32);
      results.push_back({vorticity_coefficient_at_origin(s, ModulusFamily::holder(0.5), origin_ladder()).value,
                         origin_strain_diagnostic(s, 0.1)});
    }
    CHECK(results[1].first == doctest::Approx(results[0].first).epsilon(1e-3));
    CHECK(results[1].second == doctest::Approx(results[0].second).epsilon(1e-3));
  }
}
