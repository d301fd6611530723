#include "loghold/euler2d.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace loghold {

// ---------------------------------------------------------------------------
// EulerState

double odd_odd_defect(const Grid2& g, std::span<const double> w) {
  const int n = g.n();
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double v = w[g.index(i, j)];
      worst = std::max(worst, std::abs(v + w[g.index(g.mirror(i), j)]));
      worst = std::max(worst, std::abs(v + w[g.index(i, g.mirror(j))]));
    }
  }
  return worst;
}

EulerState::EulerState(const Grid2& grid, std::vector<double> omega, double t, SymmetryTag tag)
    : grid_(grid), t_(t), tag_(tag) {
  if (omega.size() != grid.size()) throw std::invalid_argument("EulerState: value count does not match the grid");
  double peak = 0.0;
  for (double v : omega) {
    if (!std::isfinite(v)) throw std::invalid_argument("EulerState: non-finite vorticity");
    peak = std::max(peak, std::abs(v));
  }
  omega_ = std::make_shared<const std::vector<double>>(std::move(omega));
  if (std::abs(mean()) > kMeanTolerance * std::max(1.0, peak))
    throw std::invalid_argument("EulerState: vorticity must have zero mean for the Biot-Savart inversion");
  if (tag.odd_odd) {
    const double d = odd_odd_defect(grid_, *omega_);
    if (d > kSymmetryTolerance) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "EulerState: odd_odd tag violated on nodes (defect %.3g)", d);
      throw std::invalid_argument(buf);
    }
  }
}

double EulerState::mean() const {
  double s = 0.0;
  for (double v : *omega_) s += v;
  return s / static_cast<double>(omega_->size());
}

std::span<const Complex> EulerState::spectrum() const {
  if (!spectrum_) {
    const Fft2 fft(grid_.n());
    spectrum_ = std::make_shared<const std::vector<Complex>>(fft.forward(*omega_));
  }
  return *spectrum_;
}

ScalarField EulerState::field(Interpolation mode) const { return ScalarField::gridded(grid_, *omega_, mode); }

// ---------------------------------------------------------------------------
// Solver

Euler2dSolver::Euler2dSolver(const Grid2& grid)
    : grid_(grid), fft_(std::make_unique<Fft2>(grid.n())), fine_(std::make_unique<Fft2>(2 * grid.n())) {
  const int n = grid.n();
  const double k0 = std::numbers::pi / grid.half_period();
  k1_.resize(n / 2 + 1);
  k2_.resize(n);
  for (int m = 0; m <= n / 2; ++m) k1_[m] = k0 * m;
  for (int j = 0; j < n; ++j) k2_[j] = k0 * fft_->row_mode(j);
  mask_.resize(fft_->spectral_size());
  for (int j = 0; j < n; ++j)
    for (int m = 0; m <= n / 2; ++m)
      mask_[static_cast<std::size_t>(j) * (n / 2 + 1) + m] = kept(m, fft_->row_mode(j)) ? 1 : 0;
}

Euler2dSolver::~Euler2dSolver() = default;

bool Euler2dSolver::kept(int m1, int m2) const {
  const int cut = grid_.n() / 3;
  return std::abs(m1) <= cut && std::abs(m2) <= cut;
}

namespace {

void require_grid(const Grid2& a, const Grid2& b) {
  if (!(a == b)) throw std::invalid_argument("Euler2dSolver: state grid does not match the solver grid");
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> Euler2dSolver::velocity(const EulerState& s) const {
  require_grid(grid_, s.grid());
  const int n = grid_.n(), half = n / 2;
  const auto w = s.spectrum();
  std::vector<Complex> u1(w.size()), u2(w.size());
  const Complex I(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m <= half; ++m) {
      const std::size_t q = static_cast<std::size_t>(j) * (half + 1) + m;
      const double kk = k1_[m] * k1_[m] + k2_[j] * k2_[j];
      if (kk == 0.0 || m == half || j == half) continue;
      const Complex psi = w[q] / kk;
      u1[q] = I * k2_[j] * psi;
      u2[q] = -I * k1_[m] * psi;
    }
  }
  return {fft_->inverse(u1), fft_->inverse(u2)};
}

std::vector<double> Euler2dSolver::divergence(std::span<const double> u1, std::span<const double> u2) const {
  const int n = grid_.n(), half = n / 2;
  const auto a = fft_->forward(u1);
  const auto b = fft_->forward(u2);
  std::vector<Complex> d(a.size());
  const Complex I(0.0, 1.0);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < half; ++m) {
      if (j == half) continue;
      const std::size_t q = static_cast<std::size_t>(j) * (half + 1) + m;
      d[q] = I * k1_[m] * a[q] + I * k2_[j] * b[q];
    }
  return fft_->inverse(d);
}

std::vector<double> Euler2dSolver::curl(std::span<const double> u1, std::span<const double> u2) const {
  const int n = grid_.n(), half = n / 2;
  const auto a = fft_->forward(u1);
  const auto b = fft_->forward(u2);
  std::vector<Complex> c(a.size());
  const Complex I(0.0, 1.0);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < half; ++m) {
      if (j == half) continue;
      const std::size_t q = static_cast<std::size_t>(j) * (half + 1) + m;
      c[q] = I * k1_[m] * b[q] - I * k2_[j] * a[q];
    }
  return fft_->inverse(c);
}

EulerState Euler2dSolver::project(const EulerState& s) const {
  require_grid(grid_, s.grid());
  std::vector<Complex> w(s.spectrum().begin(), s.spectrum().end());
  for (std::size_t q = 0; q < w.size(); ++q)
    if (!mask_[q]) w[q] = Complex{};
  return EulerState(grid_, fft_->inverse(w), s.t(), s.tag());
}

double Euler2dSolver::max_speed(const EulerState& s) const {
  const auto [u1, u2] = velocity(s);
  double best = 0.0;
  for (std::size_t q = 0; q < u1.size(); ++q) best = std::max(best, std::hypot(u1[q], u2[q]));
  return best;
}

double Euler2dSolver::cfl_number(const EulerState& s, double dt) const {
  return dt * max_speed(s) / grid_.spacing();
}

std::vector<Complex> Euler2dSolver::rhs(std::span<const Complex> w, std::vector<double>* u1_out,
                                        std::vector<double>* u2_out) const {
  const int n = grid_.n(), half = n / 2;
  const std::size_t size = w.size();
  std::vector<Complex> u1(size), u2(size), wx(size), wy(size);
  const Complex I(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    for (int m = 0; m <= half; ++m) {
      const std::size_t q = static_cast<std::size_t>(j) * (half + 1) + m;
      if (!mask_[q]) continue;
      const double kk = k1_[m] * k1_[m] + k2_[j] * k2_[j];
      wx[q] = I * k1_[m] * w[q];
      wy[q] = I * k2_[j] * w[q];
      if (kk == 0.0) continue;
      const Complex psi = w[q] / kk;
      u1[q] = I * k2_[j] * psi;
      u2[q] = -I * k1_[m] * psi;
    }
  }
  auto a = fft_->inverse(u1);
  auto b = fft_->inverse(u2);
  const auto gx = fft_->inverse(wx);
  const auto gy = fft_->inverse(wy);
  std::vector<double> prod(a.size());
  for (std::size_t q = 0; q < prod.size(); ++q) prod[q] = -(a[q] * gx[q] + b[q] * gy[q]);
  auto out = fft_->forward(prod);
  for (std::size_t q = 0; q < size; ++q)
    if (!mask_[q]) out[q] = Complex{};
  out[0] = Complex{};
  if (u1_out) *u1_out = std::move(a);
  if (u2_out) *u2_out = std::move(b);
  return out;
}

EulerState Euler2dSolver::step(const EulerState& s, double dt, std::span<Vec2> tracers) const {
  require_grid(grid_, s.grid());
  if (!(dt > 0.0)) throw std::invalid_argument("Euler2dSolver::step: dt must be positive");
  const auto p = project(s);
  std::vector<Complex> w0(p.spectrum().begin(), p.spectrum().end());
  const std::size_t size = w0.size();
  const double h = grid_.spacing();

  std::vector<double> u1, u2;
  const bool track = !tracers.empty();
  auto k1 = rhs(w0, &u1, &u2);
  double speed = 0.0;
  for (std::size_t q = 0; q < u1.size(); ++q) speed = std::max(speed, std::hypot(u1[q], u2[q]));
  const double cfl = dt * speed / h;
  if (cfl > kMaxCfl) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "Euler2dSolver::step: CFL number %.4g exceeds %.2g; reduce dt below %.4g",
                  cfl, kMaxCfl, kMaxCfl * h / speed);
    throw std::invalid_argument(buf);
  }

  const std::vector<Vec2> x0(tracers.begin(), tracers.end());
  std::vector<Vec2> xs = x0, slope(x0.size()), acc(x0.size());
  auto tracer_velocity = [&](const std::vector<Vec2>& at) {
    const auto f1 = ScalarField::gridded(grid_, u1);
    const auto f2 = ScalarField::gridded(grid_, u2);
    for (std::size_t i = 0; i < at.size(); ++i) slope[i] = {f1(at[i]), f2(at[i])};
  };

  std::vector<Complex> stage(size), sum(k1);
  const double c[3] = {0.5 * dt, 0.5 * dt, dt};
  const double wgt[3] = {2.0, 2.0, 1.0};
  std::vector<Complex> k = std::move(k1);
  if (track) {
    tracer_velocity(xs);
    acc = slope;
  }
  for (int r = 0; r < 3; ++r) {
    for (std::size_t q = 0; q < size; ++q) stage[q] = w0[q] + c[r] * k[q];
    if (track)
      for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x0[i] + c[r] * slope[i];
    k = rhs(stage, track ? &u1 : nullptr, track ? &u2 : nullptr);
    for (std::size_t q = 0; q < size; ++q) sum[q] += wgt[r] * k[q];
    if (track) {
      tracer_velocity(xs);
      for (std::size_t i = 0; i < xs.size(); ++i) acc[i] += wgt[r] * slope[i];
    }
  }
  for (std::size_t q = 0; q < size; ++q) w0[q] += dt / 6.0 * sum[q];
  for (std::size_t i = 0; i < tracers.size(); ++i) tracers[i] = grid_.wrap(x0[i] + dt / 6.0 * acc[i]);
  return EulerState(grid_, fft_->inverse(w0), s.t() + dt, s.tag());
}

EulerNorms Euler2dSolver::norms(const EulerState& s) const {
  require_grid(grid_, s.grid());
  const int n = grid_.n(), half = n / 2, nf = 2 * n;
  const auto w = s.spectrum();
  std::vector<Complex> fine(fine_->spectral_size());
  for (int j = 0; j < n; ++j) {
    if (j == half) continue;
    const int m2 = fft_->row_mode(j);
    const int jf = m2 >= 0 ? m2 : nf + m2;
    for (int m = 0; m < half; ++m)
      fine[static_cast<std::size_t>(jf) * (n + 1) + m] = 4.0 * w[static_cast<std::size_t>(j) * (half + 1) + m];
  }
  const auto v = fine_->inverse(fine);
  const double hf = grid_.spacing() / 2.0;
  double s2 = 0.0, s4 = 0.0;
  for (double x : v) {
    const double x2 = x * x;
    s2 += x2;
    s4 += x2 * x2;
  }
  return {std::sqrt(s2 * hf * hf), std::pow(s4 * hf * hf, 0.25)};
}

VelocitySlice velocity_slice(const EulerState& s) {
  const Euler2dSolver solver(s.grid());
  auto [u1, u2] = solver.velocity(s);
  return {s.t(), ScalarField::gridded(s.grid(), std::move(u1)), ScalarField::gridded(s.grid(), std::move(u2))};
}

VelocityField biot_savart(const EulerState& s) { return VelocityField::gridded_steady(velocity_slice(s)); }

EulerState step(const EulerState& s, double dt) { return Euler2dSolver(s.grid()).step(s, dt); }

// ---------------------------------------------------------------------------
// Scenario data

double bahouri_chemin_value(double beta, Vec2 x) {
  const double r = norm(x);
  if (r == 0.0 || r >= 1.5) return 0.0;
  return 2.0 * x.x * x.y / (4.0 * x.x * x.x + x.y * x.y) * std::pow(r, beta) * smooth_step(r, 1.0, 1.5);
}

EulerState bahouri_chemin_init(double beta, const Grid2& grid) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("bahouri_chemin_init requires 0 < beta <= 1");
  if (grid.half_period() < 2.0) throw std::invalid_argument("bahouri_chemin_init requires L >= 2");
  std::vector<double> w(grid.size());
  for (int j = 0; j < grid.n(); ++j)
    for (int i = 0; i < grid.n(); ++i) w[grid.index(i, j)] = bahouri_chemin_value(beta, grid.node(i, j));
  return EulerState(grid, std::move(w), 0.0, SymmetryTag{true});
}

ScalarField log_strain_profile(double gamma, double support) {
  if (!(gamma > 0.0)) throw std::invalid_argument("log_strain_profile requires gamma > 0");
  if (!(support > 0.0 && support < 1.0)) throw std::invalid_argument("log_strain_profile requires 0 < support < 1");
  return ScalarField::analytic([gamma, support](Vec2 y) {
    const double r2 = y.x * y.x + y.y * y.y;
    if (r2 == 0.0) return 0.0;
    const double r = std::sqrt(r2);
    if (r >= support) return 0.0;
    return std::pow(std::log(1.0 / r), -gamma) * (2.0 * y.x * y.y / r2) * smooth_step(r, 0.5 * support, support);
  });
}

// ---------------------------------------------------------------------------
// Origin strain

namespace {

struct Rule {
  std::vector<double> x, w;
};

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
Rule gauss_legendre(int order) {
  Rule r;
  r.x.resize(order);
  r.w.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Composite rule on [a, b] with panels no wider than `width`.
Rule composite(double a, double b, double width, const Rule& base) {
  const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
  const double len = (b - a) / panels;
  Rule r;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * len;
    for (std::size_t i = 0; i < base.x.size(); ++i) {
      r.x.push_back(mid + 0.5 * len * base.x[i]);
      r.w.push_back(0.5 * len * base.w[i]);
    }
  }
  return r;
}

}  // namespace

double origin_strain_integral(const ScalarField& omega, SymmetryTag tag, double inner_cutoff, double outer_radius) {
  if (!tag.odd_odd) throw std::invalid_argument("origin_strain_diagnostic requires the odd_odd symmetry tag");
  if (!(inner_cutoff > 0.0 && outer_radius > inner_cutoff))
    throw std::invalid_argument("origin_strain_diagnostic requires 0 < inner cutoff < outer radius");
  static const Rule base = gauss_legendre(8);
  // y1 y2 / |y|^4 dy = cos(phi) sin(phi) d(log r) d(phi)
  const Rule radial = composite(std::log(inner_cutoff), std::log(outer_radius), 0.25, base);
  const Rule angular = composite(0.0, 0.5 * std::numbers::pi, std::numbers::pi / 32.0, base);
  double total = 0.0;
  for (std::size_t a = 0; a < radial.x.size(); ++a) {
    const double r = std::exp(radial.x[a]);
    double ring = 0.0;
    for (std::size_t b = 0; b < angular.x.size(); ++b) {
      const double c = std::cos(angular.x[b]), s = std::sin(angular.x[b]);
      ring += angular.w[b] * c * s * omega(Vec2{r * c, r * s});
    }
    total += radial.w[a] * ring;
  }
  return kOriginStrainConstant * total;
}

double origin_strain_diagnostic(const EulerState& s, double inner_cutoff) {
  if (!s.tag().odd_odd) throw std::invalid_argument("origin_strain_diagnostic requires the odd_odd symmetry tag");
  if (inner_cutoff < 2.0 * s.grid().spacing())
    throw std::invalid_argument("origin_strain_diagnostic requires inner cutoff >= 2h");
  return origin_strain_integral(s.field(), s.tag(), inner_cutoff, s.grid().half_period());
}

// ---------------------------------------------------------------------------
// Coefficient at the origin

double innermost_sampled_radius(std::span<const double> radii) {
  if (radii.empty()) throw std::invalid_argument("innermost_sampled_radius: empty radii");
  const std::size_t K = radii.size();
  return K > 1 ? radii[K - 1] * radii[K - 1] / radii[K - 2] : 0.5 * radii[0];
}

CoefficientEstimate vorticity_coefficient_at_origin(const EulerState& s, const ModulusFamily& m,
                                                    std::span<const double> radii, const SamplerSpec& sampler,
                                                    double plateau_tol, CoefficientProfile* profile) {
  if (!s.tag().odd_odd) throw std::invalid_argument("vorticity_coefficient_at_origin requires the odd_odd tag");
  const double h = s.grid().spacing();
  const double inner = innermost_sampled_radius(radii);
  if (inner < 4.0 * h) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "radii below resolution: innermost sampled radius %.4g < 4h = %.4g", inner,
                  4.0 * h);
    throw std::invalid_argument(buf);
  }
  const auto f = s.field();
  const Vec2 origin{0.0, 0.0};
  auto p = coefficient_profile([&f](Vec2 x) { return f(x); }, origin, f(origin), m, radii, sampler, &s.grid());
  const auto est = estimate_coefficient(p, plateau_tol);
  if (profile) *profile = std::move(p);
  return est;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("load_checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void save_checkpoint(const EulerState& s, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  put_u64(os, static_cast<std::uint64_t>(s.grid().n()));
  put_u64(os, std::bit_cast<std::uint64_t>(s.grid().half_period()));
  put_u64(os, std::bit_cast<std::uint64_t>(s.t()));
  for (double v : s.omega()) put_u64(os, std::bit_cast<std::uint64_t>(v));
  if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

EulerState load_checkpoint(const std::filesystem::path& path, SymmetryTag tag) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  const auto n = get_u64(is);
  if (n > (1u << 16)) throw std::runtime_error("load_checkpoint: implausible grid size");
  const double L = std::bit_cast<double>(get_u64(is));
  const double t = std::bit_cast<double>(get_u64(is));
  const Grid2 grid(static_cast<int>(n), L);
  std::vector<double> w(grid.size());
  for (double& v : w) v = std::bit_cast<double>(get_u64(is));
  return EulerState(grid, std::move(w), t, tag);
}

std::string state_csv(const EulerState& s) {
  std::string out = "x1,x2,omega\n";
  char buf[96];
  const auto& g = s.grid();
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) {
      const Vec2 x = g.node(i, j);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", x.x, x.y, s.omega()[g.index(i, j)]);
      out += buf;
    }
  return out;
}

}  // namespace loghold
