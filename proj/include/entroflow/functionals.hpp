#pragma once

// Entropies, entropy powers and Fisher informations of gridded densities.
// All logarithms are natural.

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "entroflow/grid.hpp"

namespace entroflow {

struct FunctionalOptions {
  /// |p - 1| below this delegates Renyi quantities to their Shannon limits.
  double switch_eps = 1e-8;
  /// Cells with d < support_floor * max(d) are left out of Fisher integrands.
  double support_floor = 1e-12;
  /// Allowed |mass - 1| for inputs that must be probability densities.
  double normalization_tol = 1e-6;
};

inline void require_probability_density(const GridDensity& d, const FunctionalOptions& opt = {}) {
  if (std::abs(mass(d) - 1.0) > opt.normalization_tol) throw Error("requires probability density");
}

inline double shannon_entropy(const GridDensity& d, const FunctionalOptions& opt = {}) {
  require_probability_density(d, opt);
  std::vector<double> integrand(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) integrand[i] = d[i] > 0.0 ? -d[i] * std::log(d[i]) : 0.0;
  return d.grid().integrate(integrand);
}

/// Integral of d^p.
inline double power_integral(const GridDensity& d, double p) {
  if (!(p > 0.0)) throw Error("order p must be positive");
  std::vector<double> integrand(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) integrand[i] = d[i] > 0.0 ? std::pow(d[i], p) : 0.0;
  const double value = d.grid().integrate(integrand);
  if (!std::isfinite(value)) throw Error("integral of d^p is not finite");
  return value;
}

inline double renyi_entropy(const GridDensity& d, double p, const FunctionalOptions& opt = {}) {
  if (!(p > 0.0)) throw Error("order p must be positive");
  if (std::abs(p - 1.0) < opt.switch_eps) return shannon_entropy(d, opt);
  require_probability_density(d, opt);
  const double integral = power_integral(d, p);
  if (!(integral > 0.0)) throw Error("integral of d^p vanishes");
  return std::log(integral) / (1.0 - p);
}

inline double entropy_power(const GridDensity& d, const FunctionalOptions& opt = {}) {
  return std::exp(2.0 / d.n() * shannon_entropy(d, opt));
}

/// exp(2H/n) / (2 pi e): the Gaussian with covariance sigma * I_n gives sigma.
inline double normalized_entropy_power(const GridDensity& d, const FunctionalOptions& opt = {}) {
  return entropy_power(d, opt) / (2.0 * std::numbers::pi * std::numbers::e);
}

/// Exponent 2/n + p - 1 of the Renyi entropy power; positive iff p > (n-2)/n.
inline double renyi_power_exponent(int n, double p) { return 2.0 / n + p - 1.0; }

inline double renyi_entropy_power(const GridDensity& d, double p, const FunctionalOptions& opt = {}) {
  if (!(p > static_cast<double>(d.n() - 2) / d.n())) throw Error("entropy power undefined for this order");
  return std::exp(renyi_power_exponent(d.n(), p) * renyi_entropy(d, p, opt));
}

namespace detail {

inline double fisher_sum(const GridDensity& d, const std::vector<double>& gradient,
                         const FunctionalOptions& opt) {
  const double floor = opt.support_floor * d.max_value();
  std::vector<double> integrand(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > floor && d[i] > 0.0) integrand[i] = gradient[i] * gradient[i] / d[i];
  return d.grid().integrate(integrand);
}

}  // namespace detail

/// I(d) = integral over {d > 0} of |grad d|^2 / d.
inline double fisher_information(const GridDensity& d, const FunctionalOptions& opt = {}) {
  require_probability_density(d, opt);
  return detail::fisher_sum(d, d.grid().derivative(d.values()), opt);
}

/// Same quantity through 4 * integral of |grad sqrt(d)|^2.
inline double fisher_information_sqrt_form(const GridDensity& d, const FunctionalOptions& opt = {}) {
  require_probability_density(d, opt);
  std::vector<double> root(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) root[i] = std::sqrt(d[i]);
  const auto g = d.grid().derivative(root);
  const double floor = opt.support_floor * d.max_value();
  std::vector<double> integrand(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i] > floor && d[i] > 0.0) integrand[i] = 4.0 * g[i] * g[i];
  return d.grid().integrate(integrand);
}

/// I_p(d) = (integral of |grad d^p|^2 / d) / (integral of d^p).
inline double fisher_information_p(const GridDensity& d, double p, const FunctionalOptions& opt = {}) {
  if (std::abs(p - 1.0) < opt.switch_eps) return fisher_information(d, opt);
  require_probability_density(d, opt);
  const double integral = power_integral(d, p);
  if (!(integral > 0.0)) throw Error("integral of d^p vanishes");
  std::vector<double> powered(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) powered[i] = d[i] > 0.0 ? std::pow(d[i], p) : 0.0;
  return detail::fisher_sum(d, d.grid().derivative(powered), opt) / integral;
}

/// Lambda(d) = H_p(d) - (n/2) log E(d); invariant under dilation.
inline double lambda_functional(const GridDensity& d, double p, const FunctionalOptions& opt = {}) {
  const double e = second_moment(d);
  if (!(e > 0.0)) throw Error("lambda functional needs a positive second moment");
  return renyi_entropy(d, p, opt) - 0.5 * d.n() * std::log(e);
}

struct FunctionalReport {
  int n = 1;
  double p = 1.0;
  double E = 0.0;
  double H = 0.0;
  double H_p = 0.0;
  double N = 0.0;
  double N_p = 0.0;
  double I = 0.0;
  double I_p = 0.0;
  double Lambda = 0.0;
  double mass = 0.0;
  /// Integral of d^p; equals exp((1-p) H_p).
  double power_integral = 0.0;
};

inline FunctionalReport evaluate_functionals(const GridDensity& d, double p, const FunctionalOptions& opt = {}) {
  FunctionalReport r;
  r.n = d.n();
  r.p = p;
  r.mass = mass(d);
  r.E = second_moment(d);
  r.H = shannon_entropy(d, opt);
  r.H_p = renyi_entropy(d, p, opt);
  r.N = std::exp(2.0 / r.n * r.H);
  r.N_p = std::exp(renyi_power_exponent(r.n, p) * r.H_p);
  r.I = fisher_information(d, opt);
  r.I_p = fisher_information_p(d, p, opt);
  r.Lambda = r.H_p - 0.5 * r.n * std::log(r.E);
  r.power_integral = power_integral(d, p);
  return r;
}

}  // namespace entroflow
