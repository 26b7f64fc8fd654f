#pragma once

// Probability densities sampled on 1D Cartesian or n-D radial grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace entroflow {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Geometry { Cartesian1D, RadialND };

inline const char* to_string(Geometry g) {
  return g == Geometry::Cartesian1D ? "cartesian1d" : "radial";
}

inline Geometry geometry_from_string(const std::string& s) {
  if (s == "cartesian1d" || s == "cartesian") return Geometry::Cartesian1D;
  if (s == "radial" || s == "radialnd") return Geometry::RadialND;
  throw Error("unknown geometry '" + s + "'");
}

/// Surface measure of the unit sphere S^{n-1} in R^n (2 for n = 1).
inline double sphere_surface(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

/// Uniform node grid. `cells` intervals, `cells + 1` nodes.
/// Cartesian1D spans [lower, upper]; RadialND spans r in [0, upper].
struct GridSpec {
  Geometry geometry = Geometry::Cartesian1D;
  int n = 1;
  double lower = -1.0;
  double upper = 1.0;
  int cells = 8;

  static GridSpec cartesian(double x_min, double x_max, int cells) {
    GridSpec s{Geometry::Cartesian1D, 1, x_min, x_max, cells};
    s.validate();
    return s;
  }
  static GridSpec radial(int n, double r_max, int cells) {
    GridSpec s{Geometry::RadialND, n, 0.0, r_max, cells};
    s.validate();
    return s;
  }
  /// Symmetric Cartesian grid for n = 1, radial grid otherwise.
  static GridSpec centered(int n, double r_max, int cells) {
    return n == 1 ? cartesian(-r_max, r_max, cells) : radial(n, r_max, cells);
  }

  std::size_t size() const { return static_cast<std::size_t>(cells) + 1; }
  double spacing() const { return (upper - lower) / cells; }
  double coordinate(std::size_t i) const {
    if (i == static_cast<std::size_t>(cells)) return upper;
    return lower + (upper - lower) * static_cast<double>(i) / cells;
  }
  double half_width() const {
    return geometry == Geometry::RadialND ? upper : std::max(std::abs(lower), std::abs(upper));
  }

  void validate() const {
    if (cells < 8) throw Error("grid needs at least 8 cells");
    if (geometry == Geometry::Cartesian1D && n != 1)
      throw Error("Cartesian1D grids require n = 1");
    if (geometry == Geometry::RadialND && n < 2) throw Error("RadialND grids require n >= 2");
    if (geometry == Geometry::RadialND && lower != 0.0) throw Error("radial grids start at r = 0");
    if (!std::isfinite(lower) || !std::isfinite(upper) || !(upper > lower))
      throw Error("grid bounds must be finite and increasing");
  }

  bool operator==(const GridSpec&) const = default;
};

/// Quadrature weights for the composite trapezoidal rule. Radial grids carry
/// the measure |S^{n-1}| r^{n-1} dr. For even n the integrand r^{n-1} g(r) is
/// odd in r, so the Euler-Maclaurin term at r = 0 does not vanish; its leading
/// part is folded into the origin weight.
inline std::vector<double> quadrature_weights(const GridSpec& spec) {
  const std::size_t size = spec.size();
  const double h = spec.spacing();
  std::vector<double> w(size, h);
  if (spec.geometry == Geometry::Cartesian1D) {
    w.front() = w.back() = 0.5 * h;
    return w;
  }
  const double surface = sphere_surface(spec.n);
  for (std::size_t i = 0; i < size; ++i)
    w[i] = surface * std::pow(spec.coordinate(i), spec.n - 1) * h;
  w.back() *= 0.5;
  if (spec.n % 2 == 0) {
    // B_n h^n / n, with B_2 = 1/6, B_4 = -1/30, ...
    static constexpr double bernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0};
    const int k = spec.n / 2 - 1;
    if (k < 4) w[0] = surface * bernoulli[k] * std::pow(h, spec.n) / spec.n;
  }
  return w;
}

/// Grid geometry shared by every density sampled on it.
class Grid {
 public:
  explicit Grid(GridSpec spec) : spec_(spec) {
    spec_.validate();
    weights_ = quadrature_weights(spec_);
    coords_.resize(spec_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) coords_[i] = spec_.coordinate(i);
  }

  const GridSpec& spec() const { return spec_; }
  int n() const { return spec_.n; }
  std::size_t size() const { return coords_.size(); }
  double spacing() const { return spec_.spacing(); }
  bool radial() const { return spec_.geometry == Geometry::RadialND; }
  std::span<const double> coordinates() const { return coords_; }
  std::span<const double> weights() const { return weights_; }

  /// Sum of samples times quadrature weights.
  double integrate(std::span<const double> samples) const {
    if (samples.size() != size()) throw Error("sample count does not match grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!std::isfinite(samples[i])) throw Error("non-finite density");
      acc += weights_[i] * samples[i];
    }
    return acc;
  }

  /// Derivative along the grid axis: second-order central differences,
  /// one-sided at the outer ends, and zero at r = 0 on radial grids.
  std::vector<double> derivative(std::span<const double> f) const {
    const std::size_t m = size();
    const double h = spacing();
    std::vector<double> df(m);
    for (std::size_t i = 1; i + 1 < m; ++i) df[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    df[0] = radial() ? 0.0 : (f[1] - f[0]) / h;
    df[m - 1] = (f[m - 1] - f[m - 2]) / h;
    return df;
  }

 private:
  GridSpec spec_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Nonnegative density samples on a grid. Immutable after construction.
class GridDensity {
 public:
  GridDensity(std::shared_ptr<const Grid> grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_) throw Error("density requires a grid");
    if (values_.size() != grid_->size()) throw Error("sample count does not match grid");
    for (double v : values_)
      if (v < 0.0) throw Error("density samples must be nonnegative");
  }
  GridDensity(const GridSpec& spec, std::vector<double> values)
      : GridDensity(std::make_shared<const Grid>(spec), std::move(values)) {}

  /// Samples f(x) at every node.
  template <class F>
  static GridDensity sample(const GridSpec& spec, F&& f) {
    auto grid = std::make_shared<const Grid>(spec);
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->coordinates()[i]);
    return GridDensity(std::move(grid), std::move(v));
  }

  const Grid& grid() const { return *grid_; }
  std::shared_ptr<const Grid> grid_ptr() const { return grid_; }
  const GridSpec& spec() const { return grid_->spec(); }
  int n() const { return grid_->n(); }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double max_value() const { return *std::max_element(values_.begin(), values_.end()); }

  /// Mass lost to domain truncation, when the producer could estimate it.
  double truncated_tail_mass = 0.0;
  std::vector<std::string> warnings;

 private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

/// Integral of weight(x) d(x) over R^n. `weight` receives the node coordinate
/// (the radius on radial grids).
template <class Weight>
double integrate(const GridDensity& d, Weight&& weight) {
  const auto x = d.grid().coordinates();
  const auto w = d.grid().weights();
  const auto v = d.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw Error("non-finite density");
    const double wx = weight(x[i]);
    if (!std::isfinite(wx)) throw Error("non-finite weight");
    acc += wx * v[i] * w[i];
  }
  return acc;
}

inline double mass(const GridDensity& d) {
  return d.grid().integrate(d.values());
}

/// First moment. Radial densities are centered by symmetry.
inline double mean(const GridDensity& d) {
  if (d.grid().radial()) return 0.0;
  return integrate(d, [](double x) { return x; });
}

/// E(d) = integral of |x|^2 d.
inline double second_moment(const GridDensity& d) {
  return integrate(d, [](double x) { return x * x; });
}

inline GridDensity normalize(const GridDensity& d) {
  const double m = mass(d);
  if (!(m > 0.0)) throw Error("cannot normalize a density with zero mass");
  std::vector<double> v(d.values().begin(), d.values().end());
  for (double& x : v) x /= m;
  GridDensity out(d.grid_ptr(), std::move(v));
  out.truncated_tail_mass = d.truncated_tail_mass;
  out.warnings = d.warnings;
  return out;
}

/// Mass-preserving dilation f_a(x) = a^n f(a x). The samples are carried over
/// exactly onto the grid scaled by 1/a.
inline GridDensity dilate(const GridDensity& d, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error("dilation factor must be positive");
  GridSpec spec = d.spec();
  spec.lower /= a;
  spec.upper /= a;
  const double scale = std::pow(a, d.n());
  std::vector<double> v(d.values().begin(), d.values().end());
  for (double& x : v) x *= scale;
  GridDensity out(spec, std::move(v));
  out.truncated_tail_mass = d.truncated_tail_mass;
  return out;
}

namespace detail {

// Catmull-Rom interpolation of node samples at coordinate x; zero outside.
inline double interpolate(const Grid& grid, std::span<const double> f, double x) {
  const auto& spec = grid.spec();
  const double h = spec.spacing();
  if (grid.radial()) x = std::abs(x);
  if (x < spec.lower || x > spec.upper) return 0.0;
  const double s = (x - spec.lower) / h;
  const long m = static_cast<long>(f.size()) - 1;
  long i = std::min(static_cast<long>(std::floor(s)), m - 1);
  const double t = s - static_cast<double>(i);
  auto at = [&](long j) {
    if (j < 0) return grid.radial() ? f[static_cast<std::size_t>(-j)] : 0.0;
    if (j > m) return 0.0;
    return f[static_cast<std::size_t>(j)];
  };
  const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

}  // namespace detail

/// Dilation resampled onto a target grid by cubic interpolation. Fails when
/// the dilated support does not fit inside the target domain.
inline GridDensity dilate(const GridDensity& d, double a, const GridSpec& target,
                          double support_floor = 1e-12) {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error("dilation factor must be positive");
  if (target.geometry != d.spec().geometry || target.n != d.n())
    throw Error("dilation target must share geometry and dimension");
  const double threshold = support_floor * d.max_value();
  const auto x = d.grid().coordinates();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] <= threshold) continue;
    const double y = x[i] / a;
    if (y < target.lower - 1e-12 * std::abs(target.lower) ||
        y > target.upper + 1e-12 * std::abs(target.upper))
      throw Error("dilation exceeds domain");
  }
  const double scale = std::pow(a, d.n());
  auto grid = std::make_shared<const Grid>(target);
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = std::max(0.0, scale * detail::interpolate(d.grid(), d.values(), a * grid->coordinates()[i]));
  return GridDensity(std::move(grid), std::move(v));
}

/// Discrete convolution on the grid of `d1`. Both grids must be Cartesian1D,
/// share the spacing, and contain the origin as a node offset.
inline GridDensity convolve(const GridDensity& d1, const GridDensity& d2) {
  if (d1.grid().radial() || d2.grid().radial()) throw Error("convolution requires Cartesian1D");
  const double h = d1.grid().spacing();
  if (std::abs(d2.grid().spacing() - h) > 1e-12 * h)
    throw Error("convolution requires identical grid spacing");
  const double off2 = d2.spec().lower / h;
  const double off1 = d1.spec().lower / h;
  if (std::abs(off2 - std::round(off2)) > 1e-6 || std::abs(off1 - std::round(off1)) > 1e-6)
    throw Error("convolution requires grids aligned with the origin");
  // x_k - y_j = x_min1 + l h  =>  l = k - j - lower2 / h
  const long shift = -std::lround(off2);
  const long m1 = static_cast<long>(d1.size());
  const long m2 = static_cast<long>(d2.size());
  const auto f = d1.values();
  const auto w2 = d2.grid().weights();
  std::vector<double> g(d2.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = w2[j] * d2[j];

  std::vector<double> out(d1.size(), 0.0);
  for (long k = 0; k < m1; ++k) {
    // l = k - j + shift in [0, m1)
    const long j_lo = std::max(0L, k + shift - (m1 - 1));
    const long j_hi = std::min(m2 - 1, k + shift);
    double acc = 0.0;
    for (long j = j_lo; j <= j_hi; ++j) acc += g[static_cast<std::size_t>(j)] * f[static_cast<std::size_t>(k - j + shift)];
    out[static_cast<std::size_t>(k)] = std::max(0.0, acc);
  }
  return GridDensity(d1.grid_ptr(), std::move(out));
}

}  // namespace entroflow
