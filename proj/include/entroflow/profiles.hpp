#pragma once

// Closed-form extremal densities (Gaussian, Barenblatt) and the sharp
// constants obtained by evaluating functionals on them.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"

namespace entroflow {

inline constexpr double kTailWarnMass = 1e-8;

// ---------------------------------------------------------------------------
// Gaussian

/// Isotropic Gaussian with covariance sigma * I_n.
struct GaussianParams {
  int n = 1;
  double sigma = 1.0;

  double value(double r) const {
    return std::exp(-r * r / (2.0 * sigma)) / std::pow(2.0 * std::numbers::pi * sigma, 0.5 * n);
  }
  /// Probability mass outside the ball of radius r.
  double tail_mass(double r) const {
    if (n == 1) return std::erfc(r / std::sqrt(2.0 * sigma));
    return boost::math::gamma_q(0.5 * n, r * r / (2.0 * sigma));
  }
};

namespace detail {

inline double cartesian_tail(const GridSpec& spec, const std::function<double(double)>& two_sided_tail) {
  return 0.5 * (two_sided_tail(std::abs(spec.lower)) + two_sided_tail(std::abs(spec.upper)));
}

inline void record_tail(GridDensity& d, double tail) {
  d.truncated_tail_mass = tail;
  if (tail > kTailWarnMass)
    d.warnings.push_back("truncated tail mass " + std::to_string(tail) + " exceeds 1e-8");
}

}  // namespace detail

inline GridDensity gaussian(const GaussianParams& params, const GridSpec& spec) {
  if (!(params.sigma > 0.0)) throw Error("gaussian requires sigma > 0");
  if (params.n != spec.n) throw Error("gaussian dimension does not match grid");
  auto raw = GridDensity::sample(spec, [&](double x) { return params.value(x); });
  GridDensity d = normalize(raw);
  const double tail = spec.geometry == Geometry::Cartesian1D
                          ? detail::cartesian_tail(spec, [&](double r) { return params.tail_mass(r); })
                          : params.tail_mass(spec.upper);
  detail::record_tail(d, tail);
  return d;
}

// ---------------------------------------------------------------------------
// Barenblatt

/// Smallest order with finite second moment, n / (n + 2).
inline double critical_order(int n) { return static_cast<double>(n) / (n + 2); }

inline void require_admissible_order(int n, double p) {
  if (n < 1) throw Error("dimension must be at least 1");
  if (!(p > critical_order(n)) || !std::isfinite(p))
    throw Error("order p must exceed n/(n+2) for a finite second moment");
}

/// Parameters of M~_p(x) = (C - lambda |x|^2)_+^{1/(p-1)} with unit mass.
struct BarenblattParams {
  int n = 1;
  double p = 2.0;
  double mu = 3.0;
  double lambda = 0.0;
  double log_C = 0.0;

  double C() const { return std::exp(log_C); }
  double exponent() const { return 1.0 / (p - 1.0); }
  /// Support radius sqrt(C / lambda); infinite for p < 1.
  double support_radius() const {
    return p > 1.0 ? std::sqrt(C() / lambda) : std::numeric_limits<double>::infinity();
  }
  /// Profile value at radius r.
  double value(double r) const {
    const double ratio = lambda * r * r / C();
    if (ratio >= 1.0) return 0.0;
    return std::exp(exponent() * (log_C + std::log1p(-ratio)));
  }
  /// Self-similar solution M_p(r, t) = t^{-n/mu} M~_p(r t^{-1/mu}).
  double value(double r, double t) const {
    return std::pow(t, -n / mu) * value(r * std::pow(t, -1.0 / mu));
  }
};

namespace detail {

inline double barenblatt_mu(int n, double p) { return 2.0 + n * (p - 1.0); }
inline double barenblatt_lambda(int n, double p) { return (p - 1.0) / (2.0 * barenblatt_mu(n, p) * p); }

/// |S^{n-1}| * integral from a to b of r^{n-1+moment} f(r) dr, b may be infinite.
inline double radial_quadrature(int n, const std::function<double(double)>& f, double a, double b,
                                int moment = 0) {
  const double surface = sphere_surface(n);
  auto integrand = [&](double r) {
    const double v = f(r);
    if (v == 0.0) return 0.0;
    return std::pow(r, n - 1 + moment) * v;
  };
  double value = 0.0;
  if (std::isinf(b)) {
    boost::math::quadrature::exp_sinh<double> integrator;
    value = integrator.integrate([&](double s) { return integrand(a + s); }, 1e-14);
  } else {
    if (!(b > a)) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double width = b - a;
    value = width * integrator.integrate([&](double y) { return integrand(a + width * y); }, 0.0, 1.0, 1e-14);
  }
  return surface * value;
}

inline double barenblatt_mass(int n, double p, double log_C) {
  BarenblattParams b{n, p, barenblatt_mu(n, p), barenblatt_lambda(n, p), log_C};
  auto f = [&](double r) { return b.value(r); };
  if (p > 1.0) {
    const double R = b.support_radius();
    // The profile is concentrated near 0 when p is close to 1.
    const double split = std::min(R, 12.0 * std::sqrt(b.C() / (b.lambda * b.exponent())));
    return radial_quadrature(n, f, 0.0, split) + (split < R ? radial_quadrature(n, f, split, R) : 0.0);
  }
  const double width = std::sqrt(b.C() / (-b.lambda * -b.exponent()));
  return radial_quadrature(n, f, 0.0, 12.0 * width) + radial_quadrature(n, f, 12.0 * width, INFINITY);
}

}  // namespace detail

/// Mass-normalizing constant C of the Barenblatt profile, found by bisection
/// on log C of the (monotone) mass integral.
inline double solve_barenblatt_C(int n, double p, double mass_tol = 1e-12) {
  require_admissible_order(n, p);
  if (p == 1.0) throw Error("Barenblatt profile is undefined at p = 1");
  auto residual = [&](double log_c) { return detail::barenblatt_mass(n, p, log_c) - 1.0; };
  // mass ~ C^{1/(p-1) + n/2}: increasing for p > 1, decreasing for p < 1.
  const double direction = p > 1.0 ? 1.0 : -1.0;
  double lo = 0.0, hi = 0.0;
  double step = 0.5;
  int guard = 0;
  while (direction * residual(lo) > 0.0) {
    lo -= step;
    step *= 2.0;
    if (++guard > 200) throw Error("could not bracket Barenblatt constant");
  }
  step = 0.5;
  while (direction * residual(hi) < 0.0) {
    hi += step;
    step *= 2.0;
    if (++guard > 400) throw Error("could not bracket Barenblatt constant");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = residual(mid);
    if (std::abs(r) < mass_tol || hi - lo < 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(mid)))
      return std::exp(mid);
    if (direction * r < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

inline BarenblattParams barenblatt_params(int n, double p) {
  require_admissible_order(n, p);
  if (p == 1.0) throw Error("Barenblatt profile is undefined at p = 1");
  BarenblattParams b;
  b.n = n;
  b.p = p;
  b.mu = detail::barenblatt_mu(n, p);
  b.lambda = detail::barenblatt_lambda(n, p);
  b.log_C = std::log(solve_barenblatt_C(n, p));
  return b;
}

/// |S^{n-1}| * integral beyond r of s^{n-1+moment} M~_p(s)^power ds.
inline double barenblatt_tail(const BarenblattParams& b, double r, int moment = 0, double power = 1.0) {
  auto f = [&](double s) { return power == 1.0 ? b.value(s) : std::pow(b.value(s), power); };
  if (b.p > 1.0) return detail::radial_quadrature(b.n, f, r, b.support_radius(), moment);
  return detail::radial_quadrature(b.n, f, r, INFINITY, moment);
}

/// Radius beyond which the profile carries less than rel_tol of the integral
/// of |x|^moment M~_p^power (capped at the support radius for p > 1). The
/// default tracks the second moment.
inline double barenblatt_extent(const BarenblattParams& b, double rel_tol = 1e-15, int moment = 2,
                                double power = 1.0) {
  const double total = barenblatt_tail(b, 0.0, moment, power);
  const double support = b.support_radius();
  auto small_enough = [&](double r) { return barenblatt_tail(b, r, moment, power) <= rel_tol * total; };
  double hi = std::sqrt(std::abs(b.C() / b.lambda));
  if (std::isfinite(support)) hi = support;
  if (!std::isfinite(support)) {
    int guard = 0;
    while (!small_enough(hi)) {
      hi *= 2.0;
      if (++guard > 60) throw Error("Barenblatt tail does not decay: order too close to n/(n+2)");
    }
  } else if (!small_enough(0.5 * support)) {
    return support;
  }
  double lo = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (small_enough(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Domain for the GN optimizer: the norms involve M~_p and M~_p^p, so the
/// heavier of those two tails sets the extent.
inline double gn_extent(const BarenblattParams& b, double rel_tol = 1e-15) {
  return barenblatt_extent(b, rel_tol, 0, std::min(b.p, 1.0));
}

namespace detail {

inline GridDensity sample_barenblatt(const BarenblattParams& b, const GridSpec& spec, double t) {
  if (spec.n != b.n) throw Error("Barenblatt dimension does not match grid");
  auto raw = GridDensity::sample(spec, [&](double x) { return b.value(std::abs(x), t); });
  GridDensity d = normalize(raw);
  const double scale = std::pow(t, 1.0 / b.mu);
  auto tail = [&](double r) {
    if (r / scale >= b.support_radius()) return 0.0;
    return barenblatt_tail(b, r / scale);
  };
  const double t_mass = spec.geometry == Geometry::Cartesian1D ? cartesian_tail(spec, tail) : tail(spec.upper);
  record_tail(d, t_mass);
  return d;
}

}  // namespace detail

inline GridDensity barenblatt_profile(const BarenblattParams& b, const GridSpec& spec) {
  return detail::sample_barenblatt(b, spec, 1.0);
}
inline GridDensity barenblatt_profile(int n, double p, const GridSpec& spec) {
  return barenblatt_profile(barenblatt_params(n, p), spec);
}

inline GridDensity barenblatt_solution(const BarenblattParams& b, double t, const GridSpec& spec) {
  if (!(t > 0.0)) throw Error("Barenblatt solution requires t > 0");
  return detail::sample_barenblatt(b, spec, t);
}
inline GridDensity barenblatt_solution(int n, double p, double t, const GridSpec& spec) {
  return barenblatt_solution(barenblatt_params(n, p), t, spec);
}

// ---------------------------------------------------------------------------
// Grid refinement on extremals

struct RefinedValue {
  double value = 0.0;
  int cells = 0;
  double rel_change = 0.0;
  std::vector<double> history;
};

struct RefineOptions {
  double rel_tol = 1e-6;
  int start_cells = 2048;
  int max_cells = 1 << 22;
};

/// Evaluates `functional` on grids adapted to the profile extent, doubling the
/// cell count until two successive values agree to rel_tol.
inline RefinedValue refine_on_extremal(const BarenblattParams& b,
                                       const std::function<double(const GridDensity&)>& functional,
                                       const RefineOptions& opt = {}) {
  const double extent = barenblatt_extent(b);
  RefinedValue out;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int cells = opt.start_cells; cells <= opt.max_cells; cells *= 2) {
    const double v = functional(barenblatt_profile(b, GridSpec::centered(b.n, extent, cells)));
    out.history.push_back(v);
    out.value = v;
    out.cells = cells;
    if (std::isfinite(previous)) {
      out.rel_change = std::abs(v - previous) / std::abs(v);
      if (out.rel_change < opt.rel_tol) return out;
    }
    previous = v;
  }
  throw Error("grid refinement did not converge: last relative change " + std::to_string(out.rel_change) +
              " at " + std::to_string(out.cells) + " cells");
}

/// gamma_{n,p} = N_p(M~_p) I_p(M~_p), the sharp constant of N_p I_p >= gamma.
inline RefinedValue gamma_np_refined(int n, double p, const RefineOptions& opt = {}) {
  if (p == 1.0) return {2.0 * std::numbers::pi * std::numbers::e * n, 0, 0.0, {}};
  const auto b = barenblatt_params(n, p);
  return refine_on_extremal(
      b, [p](const GridDensity& d) { return renyi_entropy_power(d, p) * fisher_information_p(d, p); }, opt);
}

inline double gamma_np(int n, double p, const RefineOptions& opt = {}) { return gamma_np_refined(n, p, opt).value; }

/// Lambda(M~_p), the upper bound of H_p - (n/2) log E.
inline double extremal_lambda(int n, double p, const RefineOptions& opt = {}) {
  if (p == 1.0) return 0.5 * n * std::log(2.0 * std::numbers::pi * std::numbers::e / n);
  const auto b = barenblatt_params(n, p);
  return refine_on_extremal(b, [p](const GridDensity& d) { return lambda_functional(d, p); }, opt).value;
}

/// Exponent 1 + n(p-1)/2 of the second moment in the entropy-power ratio.
inline double entropy_power_ratio_exponent(int n, double p) { return 1.0 + 0.5 * n * (p - 1.0); }

/// N_p(d) / E(d)^{1 + n(p-1)/2}; dilation invariant.
inline double entropy_power_ratio(const GridDensity& d, double p) {
  return renyi_entropy_power(d, p) / std::pow(second_moment(d), entropy_power_ratio_exponent(d.n(), p));
}

inline double extremal_entropy_power_ratio(int n, double p, const RefineOptions& opt = {}) {
  if (p == 1.0) return 2.0 * std::numbers::pi * std::numbers::e / n;
  const auto b = barenblatt_params(n, p);
  return refine_on_extremal(b, [p](const GridDensity& d) { return entropy_power_ratio(d, p); }, opt).value;
}

// ---------------------------------------------------------------------------
// Gagliardo-Nirenberg constants

/// Branch A: ||u||_{2q} <= K ||grad u||^theta ||u||_{q+1}^{1-theta}, q > 1.
/// Branch B: ||u||_{q+1} <= K ||grad u||^theta ||u||_{2q}^{1-theta}, 0 < q < 1.
enum class GnBranch { A, B };

inline const char* to_string(GnBranch b) { return b == GnBranch::A ? "A" : "B"; }

inline void require_gn_range(int n, double q, GnBranch branch) {
  if (branch == GnBranch::A) {
    const bool upper_ok = n <= 2 || q <= static_cast<double>(n) / (n - 2);
    if (!(q > 1.0) || !upper_ok || !std::isfinite(q)) throw Error("q outside the range of GN branch A");
  } else if (!(q > 0.0 && q < 1.0)) {
    throw Error("q outside the range of GN branch B");
  }
}

/// Order of the Barenblatt profile tied to q through q = 1/(2p - 1).
inline double gn_order(double q) { return (q + 1.0) / (2.0 * q); }
inline double gn_q(double p) { return 1.0 / (2.0 * p - 1.0); }

inline std::optional<GnBranch> gn_branch_for_order(int n, double p) {
  if (p > 1.0) return GnBranch::B;
  if (p < 1.0 && p >= static_cast<double>(n - 1) / n && p > 0.5) return GnBranch::A;
  return std::nullopt;
}

/// Interpolation exponent theta making the GN inequality dilation invariant.
inline double theta_gn(int n, double q, GnBranch branch) {
  require_gn_range(n, q, branch);
  if (branch == GnBranch::A) return (n / q) * (q - 1.0) / (n + 2.0 - q * (n - 2.0));
  return n * (1.0 - q) / ((q + 1.0) * (n - q * (n - 2.0)));
}

/// theta of the generic family ||u||_p <= K ||grad u||_2^theta ||u||_q^{1-theta}.
inline double theta_gn1(int n, double q, double p) {
  return 2.0 * n * (1.0 - q / p) / (2.0 * n - q * (n - 2.0));
}

struct GnTerms {
  double target_norm = 0.0;  // left-hand side norm
  double other_norm = 0.0;   // L^s norm on the right-hand side
  double gradient_norm = 0.0;
  double theta = 0.0;
  /// ||u||_target / (||grad u||^theta ||u||_other^{1-theta})
  double ratio() const {
    return target_norm / (std::pow(gradient_norm, theta) * std::pow(other_norm, 1.0 - theta));
  }
};

inline GnTerms gn_terms(const GridDensity& u, double q, GnBranch branch) {
  const int n = u.n();
  const double target_exp = branch == GnBranch::A ? 2.0 * q : q + 1.0;
  const double other_exp = branch == GnBranch::A ? q + 1.0 : 2.0 * q;
  auto norm = [&](double s) { return std::pow(power_integral(u, s), 1.0 / s); };
  const auto g = u.grid().derivative(u.values());
  std::vector<double> g2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) g2[i] = g[i] * g[i];
  GnTerms t;
  t.target_norm = norm(target_exp);
  t.other_norm = norm(other_exp);
  t.gradient_norm = std::sqrt(u.grid().integrate(g2));
  t.theta = theta_gn(n, q, branch);
  return t;
}

/// Optimizer u* = (M~_p)^{p - 1/2}, p = (q+1)/(2q), sampled on `spec`.
inline GridDensity gn_optimizer(const BarenblattParams& b, const GridSpec& spec) {
  const double power = b.p - 0.5;
  return GridDensity::sample(spec, [&](double x) {
    const double v = b.value(std::abs(x));
    return v > 0.0 ? std::pow(v, power) : 0.0;
  });
}

inline RefinedValue k_gn_refined(int n, double q, GnBranch branch, const RefineOptions& opt = {}) {
  require_gn_range(n, q, branch);
  const auto b = barenblatt_params(n, gn_order(q));
  const double extent = gn_extent(b);
  RefinedValue out;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int cells = opt.start_cells; cells <= opt.max_cells; cells *= 2) {
    const double v = gn_terms(gn_optimizer(b, GridSpec::centered(n, extent, cells)), q, branch).ratio();
    out.history.push_back(v);
    out.value = v;
    out.cells = cells;
    if (std::isfinite(previous)) {
      out.rel_change = std::abs(v - previous) / std::abs(v);
      if (out.rel_change < opt.rel_tol) return out;
    }
    previous = v;
  }
  throw Error("K_GN refinement did not converge");
}

/// Sharp Gagliardo-Nirenberg constant, the GN ratio attained at u*.
inline double k_gn(int n, double q, GnBranch branch, const RefineOptions& opt = {}) {
  return k_gn_refined(n, q, branch, opt).value;
}

}  // namespace entroflow
