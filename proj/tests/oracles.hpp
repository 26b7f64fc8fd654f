#pragma once

// Closed-form reference values built from Beta and Gamma functions only.
// Independent of the grid, quadrature and root-finding code under test.

#include <cmath>
#include <numbers>

namespace oracle {

inline double sphere(int n) { return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n); }

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

/// Integral over R^n of |x|^k (C - lambda |x|^2)_+^beta. For lambda < 0 the
/// base is C + |lambda| |x|^2 and beta must be below -(n+k)/2.
inline double algebraic_moment(int n, double k, double C, double lambda, double beta) {
  const double a = 0.5 * (n + k);
  const double scale = 0.5 * sphere(n) * std::pow(C, beta) * std::pow(C / std::abs(lambda), a);
  if (lambda > 0.0) return scale * std::exp(log_beta(a, beta + 1.0));
  return scale * std::exp(log_beta(a, -beta - a));
}

struct Barenblatt {
  int n;
  double p, mu, lambda, C;
  double beta() const { return 1.0 / (p - 1.0); }
  double moment(double k, double power = 1.0) const {
    return algebraic_moment(n, k, C, lambda, power * beta());
  }
  double E() const { return moment(2.0); }
  double power_integral() const { return moment(0.0, p); }
  double renyi() const { return std::log(power_integral()) / (1.0 - p); }
  double renyi_power() const { return std::exp((2.0 / n + p - 1.0) * renyi()); }
  /// |grad M^p|^2 / M = |x|^2 M / mu^2 on the support.
  double fisher_p() const { return E() / (mu * mu * power_integral()); }
  double gamma() const { return renyi_power() * fisher_p(); }
  double lambda_functional() const { return renyi() - 0.5 * n * std::log(E()); }
  double ratio() const { return renyi_power() / std::pow(E(), 1.0 + 0.5 * n * (p - 1.0)); }
};

inline Barenblatt barenblatt(int n, double p) {
  Barenblatt b{n, p, 2.0 + n * (p - 1.0), 0.0, 1.0};
  b.lambda = (p - 1.0) / (2.0 * b.mu * p);
  // mass(C) = C^{beta + n/2} * mass(1)
  const double unit = algebraic_moment(n, 0.0, 1.0, b.lambda, b.beta());
  b.C = std::pow(unit, -1.0 / (b.beta() + 0.5 * n));
  return b;
}

/// GN ratio of u_s = (1 - |x|^2)_+^s (compact) or (1 + |x|^2)^{-s}, in
/// closed form. `target` and `other` are the Lebesgue exponents.
inline double gn_ratio(int n, double s, bool compact, double target, double other, double theta) {
  const double lam = compact ? 1.0 : -1.0;
  const double sign = compact ? 1.0 : -1.0;
  auto lp = [&](double r) { return std::pow(algebraic_moment(n, 0.0, 1.0, lam, sign * r * s), 1.0 / r); };
  // |grad u|^2 = 4 s^2 |x|^2 (1 -+ |x|^2)^{2s - 2} or ^{-2s - 2}
  const double grad2 = 4.0 * s * s * algebraic_moment(n, 2.0, 1.0, lam, compact ? 2.0 * s - 2.0 : -2.0 * s - 2.0);
  return lp(target) / (std::pow(std::sqrt(grad2), theta) * std::pow(lp(other), 1.0 - theta));
}

}  // namespace oracle
