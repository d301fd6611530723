#include "loghold/fields.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "loghold/spectral.hpp"

namespace loghold {

// ---------------------------------------------------------------------------
// Grid2

Grid2::Grid2(int n, double half_period) : n_(n), half_period_(half_period), spacing_(0.0) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw std::invalid_argument("Grid2: n must be a power of two and at least 16");
  if (!(half_period > 0.0) || !std::isfinite(half_period))
    throw std::invalid_argument("Grid2: half period L must be positive");
  spacing_ = 2.0 * half_period / n;
}

double Grid2::wrap(double x) const {
  const double period = 2.0 * half_period_;
  if (x >= -half_period_ && x < half_period_) return x;
  double w = x - period * std::floor((x + half_period_) / period);
  if (w >= half_period_) w -= period;  // guards the rounding edge
  return w;
}

Vec2 Grid2::min_image(Vec2 d) const {
  const double period = 2.0 * half_period_;
  d.x -= period * std::round(d.x / period);
  d.y -= period * std::round(d.y / period);
  return d;
}

// ---------------------------------------------------------------------------
// ScalarField

struct ScalarField::Gridded {
  Grid2 grid;
  std::vector<double> values;
  Interpolation mode;
  // Hermite data (bicubic mode)
  std::vector<double> fx, fy, fxy;
  // Fourier modes (spectral mode)
  std::vector<Complex> modes;

  Gridded(const Grid2& g, std::vector<double> v, Interpolation m)
      : grid(g), values(std::move(v)), mode(m) {
    if (mode == Interpolation::bicubic) {
      fx = fd_derivative(values, /*along_x=*/true);
      fy = fd_derivative(values, /*along_x=*/false);
      fxy = fd_derivative(fx, /*along_x=*/false);
    } else {
      modes = Fft2(grid.n()).forward(values);
    }
  }

  // Sixth-order central difference on the periodic grid.
  std::vector<double> fd_derivative(const std::vector<double>& f, bool along_x) const {
    const int n = grid.n();
    const double inv = 1.0 / (60.0 * grid.spacing());
    std::vector<double> d(f.size());
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        auto at = [&](int off) {
          const int ii = along_x ? (i + off + n) % n : i;
          const int jj = along_x ? j : (j + off + n) % n;
          return f[grid.index(ii, jj)];
        };
        d[grid.index(i, j)] =
            inv * (45.0 * (at(1) - at(-1)) - 9.0 * (at(2) - at(-2)) + (at(3) - at(-3)));
      }
    }
    return d;
  }

  struct Cell {
    int i0, i1, j0, j1;
    double s, t;
  };

  Cell locate(Vec2 p) const {
    const Vec2 w = grid.wrap(p);
    const double h = grid.spacing();
    const double L = grid.half_period();
    double u = (w.x + L) / h;
    double v = (w.y + L) / h;
    // Snap coordinates within rounding of a node so nodes are reproduced exactly.
    if (std::abs(u - std::round(u)) < 1e-10) u = std::round(u);
    if (std::abs(v - std::round(v)) < 1e-10) v = std::round(v);
    const int n = grid.n();
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    Cell c{};
    c.i0 = ((static_cast<int>(fu) % n) + n) % n;
    c.j0 = ((static_cast<int>(fv) % n) + n) % n;
    c.i1 = (c.i0 + 1) % n;
    c.j1 = (c.j0 + 1) % n;
    c.s = u - fu;
    c.t = v - fv;
    return c;
  }

  // Hermite cubic basis on [0, 1]: value weights (w) and slope weights (d)
  // for the left (index 0) and right (index 1) end, plus their derivatives.
  static std::array<double, 4> basis(double s) {
    const double s2 = s * s, s3 = s2 * s;
    return {2 * s3 - 3 * s2 + 1, -2 * s3 + 3 * s2, s3 - 2 * s2 + s, s3 - s2};
  }
  static std::array<double, 4> basis_derivative(double s) {
    const double s2 = s * s;
    return {6 * s2 - 6 * s, -6 * s2 + 6 * s, 3 * s2 - 4 * s + 1, 3 * s2 - 2 * s};
  }

  double hermite(const Cell& c, const std::array<double, 4>& bs, const std::array<double, 4>& bt) const {
    const double h = grid.spacing();
    const std::size_t k[2][2] = {{grid.index(c.i0, c.j0), grid.index(c.i0, c.j1)},
                                 {grid.index(c.i1, c.j0), grid.index(c.i1, c.j1)}};
    double acc = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const std::size_t q = k[a][b];
        const double ws = bs[a], ds = bs[2 + a];
        const double wt = bt[b], dt = bt[2 + b];
        acc += values[q] * ws * wt + h * (fx[q] * ds * wt + fy[q] * ws * dt) + h * h * fxy[q] * ds * dt;
      }
    }
    return acc;
  }

  double eval(Vec2 p) const {
    if (mode == Interpolation::spectral) return eval_spectral(p);
    const Cell c = locate(p);
    return hermite(c, basis(c.s), basis(c.t));
  }

  Vec2 gradient(Vec2 p) const {
    if (mode == Interpolation::spectral)
      throw std::logic_error("ScalarField::gradient: not available for spectral interpolation");
    const Cell c = locate(p);
    const double inv_h = 1.0 / grid.spacing();
    return {inv_h * hermite(c, basis_derivative(c.s), basis(c.t)),
            inv_h * hermite(c, basis(c.s), basis_derivative(c.t))};
  }

  double eval_spectral(Vec2 p) const {
    const int n = grid.n();
    const int half = n / 2;
    const double L = grid.half_period();
    const double k0 = std::numbers::pi / L;
    const Vec2 w = grid.wrap(p);
    const double X = w.x + L;
    const double Y = w.y + L;
    std::vector<Complex> ex(half + 1);
    for (int m = 0; m <= half; ++m) ex[m] = std::polar(1.0, k0 * m * X);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const int m2 = j <= half ? j : j - n;
      const Complex ey = std::polar(1.0, k0 * m2 * Y);
      const Complex* row = modes.data() + static_cast<std::size_t>(j) * (half + 1);
      for (int m = 0; m <= half; ++m) {
        const double weight = (m == 0 || m == half) ? 1.0 : 2.0;
        acc += weight * (row[m] * ex[m] * ey).real();
      }
    }
    return acc / (static_cast<double>(n) * n);
  }
};

ScalarField ScalarField::analytic(Function f, std::optional<double> known_coefficient) {
  if (!f) throw std::invalid_argument("ScalarField::analytic: empty function");
  ScalarField s;
  s.analytic_ = std::make_shared<const Function>(std::move(f));
  s.known_coefficient_ = known_coefficient;
  return s;
}

ScalarField ScalarField::gridded(const Grid2& grid, std::vector<double> values, Interpolation mode,
                                 std::optional<double> known_coefficient) {
  if (values.size() != grid.size()) throw std::invalid_argument("ScalarField::gridded: value count != n^2");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("ScalarField::gridded: non-finite node value");
  ScalarField s;
  s.gridded_ = std::make_shared<const Gridded>(grid, std::move(values), mode);
  s.known_coefficient_ = known_coefficient;
  return s;
}

double ScalarField::operator()(Vec2 x) const {
  if (gridded_) return gridded_->eval(x);
  if (!analytic_) return 0.0;
  return (*analytic_)(x);
}

Vec2 ScalarField::gradient(Vec2 x) const {
  if (!gridded_) throw std::logic_error("ScalarField::gradient: analytic fields carry no interpolant");
  return gridded_->gradient(x);
}

const Grid2& ScalarField::grid() const {
  if (!gridded_) throw std::logic_error("ScalarField::grid: field is analytic");
  return gridded_->grid;
}

std::span<const double> ScalarField::values() const {
  if (!gridded_) throw std::logic_error("ScalarField::values: field is analytic");
  return gridded_->values;
}

Interpolation ScalarField::interpolation() const {
  if (!gridded_) throw std::logic_error("ScalarField::interpolation: field is analytic");
  return gridded_->mode;
}

double eval_scalar(const ScalarField& f, Vec2 x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw std::runtime_error("eval_scalar: non-finite value (corrupt field data)");
  return v;
}

ScalarField sample_to_grid(const ScalarField& f, const Grid2& grid, Interpolation mode) {
  if (f.is_gridded()) throw std::invalid_argument("sample_to_grid: field is already gridded");
  std::vector<double> values(grid.size());
  for (int j = 0; j < grid.n(); ++j) {
    for (int i = 0; i < grid.n(); ++i) {
      const double v = f(grid.node(i, j));
      if (!std::isfinite(v)) throw std::runtime_error("sample_to_grid: non-finite sample");
      values[grid.index(i, j)] = v;
    }
  }
  return ScalarField::gridded(grid, std::move(values), mode, f.known_coefficient());
}

std::pair<std::vector<double>, std::vector<double>> spectral_gradient(const Grid2& grid,
                                                                      std::span<const double> values) {
  const Fft2 fft(grid.n());
  const int n = grid.n();
  const int half = n / 2;
  const double k0 = std::numbers::pi / grid.half_period();
  const auto modes = fft.forward(values);
  std::vector<Complex> dx(modes.size()), dy(modes.size());
  const Complex I(0.0, 1.0);
  for (int j = 0; j < n; ++j) {
    const int m2 = fft.row_mode(j);
    for (int m1 = 0; m1 <= half; ++m1) {
      const std::size_t q = static_cast<std::size_t>(j) * (half + 1) + m1;
      // Nyquist modes have no well-defined derivative on the grid.
      dx[q] = (m1 == half) ? Complex{} : I * (k0 * m1) * modes[q];
      dy[q] = (j == half) ? Complex{} : I * (k0 * m2) * modes[q];
    }
  }
  return {fft.inverse(dx), fft.inverse(dy)};
}

// ---------------------------------------------------------------------------
// VelocityField

struct VelocityField::Slices {
  std::vector<VelocitySlice> slices;
  bool steady = false;
};

const std::vector<CatalogEntry>& velocity_catalog() {
  static const std::vector<CatalogEntry> catalog = {
      {"zero", "u = (0, 0)", {}},
      {"rigid_rotation", "u = omega * (-x2, x1)", {"omega"}},
      {"linear_strain", "u = (lambda * x1, -lambda * x2)", {"lambda"}},
      {"shear", "u = (lambda * x2, 0)", {"lambda"}},
      {"cellular", "u = A * (-sin x1 cos x2, cos x1 sin x2), 2pi-periodic", {"amplitude"}},
  };
  return catalog;
}

VelocityField VelocityField::zero() { return {}; }


VelocityField VelocityField::rigid_rotation(double omega) {
  VelocityField v;
  v.kind_ = FlowKind::rigid_rotation;
  v.param_ = omega;
  return v;
}

VelocityField VelocityField::linear_strain(double lambda) {
  VelocityField v;
  v.kind_ = FlowKind::linear_strain;
  v.param_ = lambda;
  return v;
}

VelocityField VelocityField::shear(double lambda) {
  VelocityField v;
  v.kind_ = FlowKind::shear;
  v.param_ = lambda;
  return v;
}

VelocityField VelocityField::cellular(double amplitude) {
  VelocityField v;
  v.kind_ = FlowKind::cellular;
  v.param_ = amplitude;
  return v;
}

VelocityField VelocityField::from_catalog(std::string_view name, const std::map<std::string, double>& params) {
  const auto& catalog = velocity_catalog();
  const CatalogEntry* entry = nullptr;
  for (const auto& e : catalog)
    if (e.name == name) entry = &e;
  if (!entry) throw std::invalid_argument("unknown velocity kind '" + std::string(name) + "'");
  for (const auto& [key, value] : params) {
    bool known = false;
    for (const auto& p : entry->parameters) known = known || p == key;
    if (!known)
      throw std::invalid_argument("velocity '" + entry->name + "' has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw std::invalid_argument("velocity parameter '" + key + "' must be finite");
  }
  auto get = [&](const std::string& key) {
    const auto it = params.find(key);
    if (it == params.end())
      throw std::invalid_argument("velocity '" + entry->name + "' requires parameter '" + key + "'");
    return it->second;
  };
  if (name == "zero") return zero();
  if (name == "rigid_rotation") return rigid_rotation(get("omega"));
  if (name == "linear_strain") return linear_strain(get("lambda"));
  if (name == "shear") return shear(get("lambda"));
  return cellular(get("amplitude"));
}

VelocityField VelocityField::gridded(std::vector<VelocitySlice> slices) {
  if (slices.empty()) throw std::invalid_argument("VelocityField::gridded: no slices");
  const Grid2& g = slices.front().u1.grid();
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const auto& s = slices[k];
    if (!s.u1.is_gridded() || !s.u2.is_gridded())
      throw std::invalid_argument("VelocityField::gridded: slice components must be gridded");
    if (!(s.u1.grid() == g) || !(s.u2.grid() == g))
      throw std::invalid_argument("VelocityField::gridded: slices must share one grid");
    if (k > 0 && !(s.t > slices[k - 1].t))
      throw std::invalid_argument("VelocityField::gridded: slice times must increase strictly");
  }
  VelocityField v;
  v.kind_ = FlowKind::gridded;
  v.slices_ = std::make_shared<const Slices>(Slices{std::move(slices), false});
  return v;
}

VelocityField VelocityField::gridded_steady(VelocitySlice slice) {
  VelocityField v = gridded({std::move(slice)});
  v.slices_ = std::make_shared<const Slices>(Slices{v.slices_->slices, true});
  return v;
}

std::string VelocityField::name() const {
  switch (kind_) {
    case FlowKind::zero: return "zero";
    case FlowKind::rigid_rotation: return "rigid_rotation";
    case FlowKind::linear_strain: return "linear_strain";
    case FlowKind::shear: return "shear";
    case FlowKind::cellular: return "cellular";
    case FlowKind::gridded: return "gridded";
  }
  return "unknown";
}

std::optional<double> VelocityField::half_period() const {
  if (kind_ == FlowKind::cellular) return std::numbers::pi;
  if (kind_ == FlowKind::gridded) return slices_->slices.front().u1.grid().half_period();
  return std::nullopt;
}

double VelocityField::t_min() const {
  if (kind_ != FlowKind::gridded || slices_->steady) return -INFINITY;
  return slices_->slices.front().t;
}

double VelocityField::t_max() const {
  if (kind_ != FlowKind::gridded || slices_->steady) return INFINITY;
  return slices_->slices.back().t;
}

bool VelocityField::covers(double t) const {
  if (!std::isfinite(t)) return false;
  if (kind_ != FlowKind::gridded || slices_->steady) return true;
  // Tolerate rounding of accumulated step times at the ends.
  const double slack = 1e-12 * std::max(1.0, std::abs(t));
  return t >= t_min() - slack && t <= t_max() + slack;
}

void VelocityField::check_time(double t) const {
  if (!covers(t))
    throw std::out_of_range("VelocityField: time " + std::to_string(t) + " outside stored slice range");
}

namespace {

// Locates the bracketing slices and the linear weight of the upper one.
struct Bracket {
  std::size_t lo, hi;
  double w;
};

Bracket bracket(const std::vector<VelocitySlice>& s, double t) {
  if (s.size() == 1 || t <= s.front().t) return {0, 0, 0.0};
  if (t >= s.back().t) return {s.size() - 1, s.size() - 1, 0.0};
  std::size_t lo = 0, hi = s.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (s[mid].t <= t ? lo : hi) = mid;
  }
  return {lo, hi, (t - s[lo].t) / (s[hi].t - s[lo].t)};
}

}  // namespace

Vec2 VelocityField::operator()(Vec2 x, double t) const {
  const double a = param_;
  switch (kind_) {
    case FlowKind::zero: return {};
    case FlowKind::rigid_rotation: return {-a * x.y, a * x.x};
    case FlowKind::linear_strain: return {a * x.x, -a * x.y};
    case FlowKind::shear: return {a * x.y, 0.0};
    case FlowKind::cellular:
      return {-a * std::sin(x.x) * std::cos(x.y), a * std::cos(x.x) * std::sin(x.y)};
    case FlowKind::gridded: {
      check_time(t);
      const auto& s = slices_->slices;
      const Bracket b = slices_->steady ? Bracket{0, 0, 0.0} : bracket(s, t);
      const Vec2 lo{s[b.lo].u1(x), s[b.lo].u2(x)};
      if (b.lo == b.hi) return lo;
      const Vec2 hi{s[b.hi].u1(x), s[b.hi].u2(x)};
      return (1.0 - b.w) * lo + b.w * hi;
    }
  }
  return {};
}

Mat2 VelocityField::gradient(Vec2 x, double t) const {
  const double a = param_;
  switch (kind_) {
    case FlowKind::zero: return {};
    case FlowKind::rigid_rotation: return {0.0, -a, a, 0.0};
    case FlowKind::linear_strain: return {a, 0.0, 0.0, -a};
    case FlowKind::shear: return {0.0, a, 0.0, 0.0};
    case FlowKind::cellular: {
      const double cc = std::cos(x.x) * std::cos(x.y);
      const double ss = std::sin(x.x) * std::sin(x.y);
      return {-a * cc, a * ss, -a * ss, a * cc};
    }
    case FlowKind::gridded: {
      check_time(t);
      const auto& s = slices_->slices;
      const Bracket b = slices_->steady ? Bracket{0, 0, 0.0} : bracket(s, t);
      auto at = [&](std::size_t k) {
        const Vec2 g1 = s[k].u1.gradient(x);
        const Vec2 g2 = s[k].u2.gradient(x);
        return Mat2{g1.x, g1.y, g2.x, g2.y};
      };
      if (b.lo == b.hi) return at(b.lo);
      return (1.0 - b.w) * at(b.lo) + b.w * at(b.hi);
    }
  }
  return {};
}

GradBound VelocityField::grad_sup(double t) const {
  const double a = std::abs(param_);
  switch (kind_) {
    case FlowKind::zero: return {t, 0.0};
    // The cellular gradient has singular values |A|(|cos x1 cos x2| +- |sin x1 sin x2|),
    // whose larger one peaks at |A| on the lines x1 = +-x2.
    case FlowKind::rigid_rotation:
    case FlowKind::linear_strain:
    case FlowKind::shear:
    case FlowKind::cellular: return {t, a};
    case FlowKind::gridded: break;
  }
  check_time(t);
  const auto& s = slices_->slices;
  const Bracket b = slices_->steady ? Bracket{0, 0, 0.0} : bracket(s, t);
  const Grid2& g = s.front().u1.grid();
  auto spectral = [&](std::size_t k) {
    auto [u1x, u1y] = spectral_gradient(g, s[k].u1.values());
    auto [u2x, u2y] = spectral_gradient(g, s[k].u2.values());
    return std::array<std::vector<double>, 4>{std::move(u1x), std::move(u1y), std::move(u2x), std::move(u2y)};
  };
  auto lo = spectral(b.lo);
  if (b.lo != b.hi) {
    const auto hi = spectral(b.hi);
    for (int c = 0; c < 4; ++c)
      for (std::size_t q = 0; q < lo[c].size(); ++q) lo[c][q] = (1.0 - b.w) * lo[c][q] + b.w * hi[c][q];
  }
  double best = 0.0;
  for (std::size_t q = 0; q < g.size(); ++q)
    best = std::max(best, sigma_max(Mat2{lo[0][q], lo[1][q], lo[2][q], lo[3][q]}));
  return {t, best};
}

Vec2 eval_velocity(const VelocityField& u, Vec2 x, double t) { return u(x, t); }
GradBound grad_sup(const VelocityField& u, double t) { return u.grad_sup(t); }

}  // namespace loghold
