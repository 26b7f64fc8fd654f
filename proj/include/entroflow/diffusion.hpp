#pragma once

// Heat flow and nonlinear diffusion of order p, du/dt = Laplacian(u^p).

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/profiles.hpp"

namespace entroflow {

enum class Scheme { ExactConvolution, ExplicitFD };

inline const char* to_string(Scheme s) { return s == Scheme::ExactConvolution ? "exact" : "fd"; }

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "exact" || s == "exact_convolution") return Scheme::ExactConvolution;
  if (s == "fd" || s == "explicit_fd") return Scheme::ExplicitFD;
  throw Error("unknown scheme '" + s + "'");
}

struct SolverConfig {
  double p = 1.0;
  double dt_safety = 0.5;
  /// Time label of the initial datum; samples must lie strictly after it.
  double t0 = 0.0;
  std::vector<double> t_samples;
  Scheme scheme = Scheme::ExactConvolution;
  /// Cells below this value exchange no flux with neighbours that are also
  /// below it. Keeps the fast-diffusion coefficient p v^{p-1} bounded.
  double floor = 1e-14;
  double drift_tol = 1e-6;
  std::size_t max_steps = 100'000'000;

  void validate() const {
    if (!(p > 0.0)) throw Error("diffusion order must be positive");
    if (!(dt_safety > 0.0 && dt_safety <= 1.0)) throw Error("dt_safety must lie in (0, 1]");
    if (t_samples.empty()) throw Error("at least one sample time is required");
    if (!(t_samples.front() > t0)) throw Error("sample times must follow the initial time");
    for (std::size_t i = 1; i < t_samples.size(); ++i)
      if (!(t_samples[i] > t_samples[i - 1])) throw Error("sample times must be strictly increasing");
    if (!(floor >= 0.0)) throw Error("floor must be nonnegative");
  }
};

struct SampleDiagnostics {
  double time = 0.0;
  double mass = 0.0;  // before renormalization of the snapshot
  double mean = 0.0;
  double second_moment = 0.0;
  double power_integral = 0.0;  // integral of v^p
  double dE_dt = std::numeric_limits<double>::quiet_NaN();
  double drift = 0.0;  // cumulative mass removed by clipping
  std::size_t steps = 0;
};

struct Trajectory {
  double p = 1.0;
  double t0 = 0.0;
  Scheme scheme = Scheme::ExactConvolution;
  std::vector<double> times;
  std::vector<GridDensity> states;
  std::vector<SampleDiagnostics> diagnostics;
};

/// Second-order centered derivative on a possibly nonuniform sample grid;
/// NaN at the two ends.
inline std::vector<double> centered_derivative(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> d(f.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
    d[i] = (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i]) / (hm * hp * (hm + hp));
  }
  return d;
}

/// f(t+) - 2 f(t) + f(t-) for uniform samples; the nonuniform generalisation
/// f''(t) * h- * h+.
inline std::vector<double> second_differences(const std::vector<double>& t, const std::vector<double>& f) {
  std::vector<double> d(f.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    const double hm = t[i] - t[i - 1], hp = t[i + 1] - t[i];
    const double second = 2.0 * ((f[i + 1] - f[i]) / hp - (f[i] - f[i - 1]) / hm) / (hm + hp);
    d[i] = second * hm * hp;
  }
  return d;
}

namespace detail {

/// Gamma(n/2) (2/z)^{n/2-1} e^{-z} I_{n/2-1}(z): the angular average of
/// exp(z cos) over S^{n-1}, times e^{-z}. Equals 1 at z = 0.
inline double radial_kernel_factor(int n, double z) {
  if (z < 1e-8) return 1.0;
  if (n == 3) return -std::expm1(-2.0 * z) / (2.0 * z);
  const double nu = 0.5 * n - 1.0;
  double scaled_bessel;
  if (z < 600.0) {
    // Integer orders go through Boost's rational approximations.
    scaled_bessel = (n == 2 ? boost::math::cyl_bessel_i(0, z)
                     : n == 4 ? boost::math::cyl_bessel_i(1, z)
                              : std::cyl_bessel_i(nu, z)) *
                    std::exp(-z);
  } else {
    // e^{-z} I_nu(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(nu) / z^k
    const double mu4 = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 12; ++k) {
      term *= -(mu4 - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
      sum += term;
    }
    scaled_bessel = sum / std::sqrt(2.0 * std::numbers::pi * z);
  }
  return std::tgamma(0.5 * n) * std::pow(2.0 / z, nu) * scaled_bessel;
}

inline GridDensity heat_convolution(const GridDensity& d0, double tau) {
  const Grid& grid = d0.grid();
  const std::size_t m = grid.size();
  const auto w = grid.weights();
  const double h = grid.spacing();
  std::vector<double> src(m);
  for (std::size_t j = 0; j < m; ++j) src[j] = w[j] * d0[j];
  std::vector<double> out(m, 0.0);
  if (!grid.radial()) {
    // M_{2 tau}(y) = (4 pi tau)^{-1/2} exp(-y^2 / (4 tau)) at y = (k - j) h
    std::vector<double> kernel(2 * m - 1);
    const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi * tau);
    for (std::size_t k = 0; k < kernel.size(); ++k) {
      const double y = (static_cast<double>(k) - static_cast<double>(m - 1)) * h;
      kernel[k] = norm * std::exp(-y * y / (4.0 * tau));
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double* kern = kernel.data() + (m - 1) + i;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += src[j] * kern[-static_cast<long>(j)];
      out[i] = acc;
    }
  } else {
    const int n = grid.n();
    const auto r = grid.coordinates();
    const double norm = std::pow(4.0 * std::numbers::pi * tau, -0.5 * n);
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (src[j] == 0.0) continue;
        const double dr = r[i] - r[j];
        const double arg = dr * dr / (4.0 * tau);
        if (arg > 700.0) continue;
        acc += src[j] * std::exp(-arg) * radial_kernel_factor(n, r[i] * r[j] / (2.0 * tau));
      }
      out[i] = norm * acc;
    }
  }
  for (double& v : out) v = std::max(v, 0.0);
  return GridDensity(d0.grid_ptr(), std::move(out));
}

inline SampleDiagnostics diagnose(const GridDensity& state, double t, double p) {
  SampleDiagnostics s;
  s.time = t;
  s.mass = mass(state);
  s.mean = mean(state);
  s.second_moment = second_moment(state);
  s.power_integral = power_integral(state, p);
  return s;
}

inline void fill_rates(Trajectory& traj) {
  std::vector<double> e;
  for (const auto& s : traj.diagnostics) e.push_back(s.second_moment);
  const auto rate = centered_derivative(traj.times, e);
  for (std::size_t i = 0; i < rate.size(); ++i) traj.diagnostics[i].dE_dt = rate[i];
}

/// Finite-volume form of the diffusion operator on the grid nodes.
struct FluxGeometry {
  std::vector<double> volume;  // control volume of each node
  std::vector<double> face;    // area of face i+1/2 divided by h
  double cfl_dimension = 1.0;

  explicit FluxGeometry(const Grid& grid) {
    const std::size_t m = grid.size();
    const double h = grid.spacing();
    volume.resize(m);
    face.resize(m - 1);
    if (!grid.radial()) {
      const auto w = grid.weights();
      volume.assign(w.begin(), w.end());
      std::fill(face.begin(), face.end(), 1.0 / h);
      return;
    }
    const int n = grid.n();
    cfl_dimension = n;
    const double surface = sphere_surface(n);
    const auto r = grid.coordinates();
    auto ball = [&](double rad) { return surface * std::pow(rad, n) / n; };
    for (std::size_t i = 0; i < m; ++i) {
      const double inner = i == 0 ? 0.0 : r[i] - 0.5 * h;
      const double outer = i + 1 == m ? r[i] : r[i] + 0.5 * h;
      volume[i] = ball(outer) - ball(inner);
    }
    for (std::size_t i = 0; i + 1 < m; ++i) face[i] = surface * std::pow(r[i] + 0.5 * h, n - 1) / h;
  }

  double total(const std::vector<double>& v) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += volume[i] * v[i];
    return acc;
  }
};

/// v^{p-1} with cheap paths for the common orders.
inline double power_minus_one(double v, double p) {
  if (v <= 0.0) return p > 1.0 ? 0.0 : (p == 1.0 ? 1.0 : std::numeric_limits<double>::infinity());
  if (p == 2.0) return v;
  if (p == 3.0) return v * v;
  if (p == 1.5) return std::sqrt(v);
  if (p == 1.0) return 1.0;
  return std::pow(v, p - 1.0);
}

}  // namespace detail

/// Explicit conservative finite-volume solver for dv/dt = Laplacian(v^p).
inline Trajectory solve_porous(const GridDensity& d0, const SolverConfig& cfg,
                               const FunctionalOptions& opt = {}) {
  cfg.validate();
  if (cfg.scheme != Scheme::ExplicitFD) throw Error("nonlinear diffusion requires the explicit FD scheme");
  const int n = d0.n();
  const double p = cfg.p;
  if (p != 1.0) require_admissible_order(n, p);
  require_probability_density(d0, opt);

  const Grid& grid = d0.grid();
  const std::size_t m = grid.size();
  const double h = grid.spacing();
  const detail::FluxGeometry geo(grid);

  std::vector<double> v(d0.values().begin(), d0.values().end());
  std::vector<double> w(m), flux(m - 1);
  const double conserved = geo.total(v);
  const bool bounded_floor = p < 1.0 && cfg.floor > 0.0;
  if (p < 1.0 && !bounded_floor) throw Error("fast diffusion requires a positive floor");

  Trajectory traj;
  traj.p = p;
  traj.t0 = cfg.t0;
  traj.scheme = cfg.scheme;
  double t = cfg.t0;
  double drift = 0.0;
  std::size_t steps = 0;

  for (double target : cfg.t_samples) {
    while (t < target) {
      double max_coeff = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double vi = v[i];
        if (vi <= 0.0 || (bounded_floor && vi < cfg.floor)) {
          w[i] = vi > 0.0 ? std::pow(vi, p) : 0.0;
          continue;
        }
        const double c = detail::power_minus_one(vi, p);
        w[i] = vi * c;
        max_coeff = std::max(max_coeff, c);
      }
      if (!std::isfinite(max_coeff)) throw Error("CFL collapse: unbounded density");
      if (max_coeff == 0.0) max_coeff = 1.0;
      const double dt_cfl = cfg.dt_safety * h * h / (2.0 * geo.cfl_dimension * p * max_coeff);
      double dt = std::min(dt_cfl, target - t);
      if (!(dt > 0.0)) throw Error("CFL collapse: vanishing time step");

      for (std::size_t i = 0; i + 1 < m; ++i) {
        const bool active = std::max(v[i], v[i + 1]) >= cfg.floor && std::max(v[i], v[i + 1]) > 0.0;
        flux[i] = active ? geo.face[i] * (w[i + 1] - w[i]) : 0.0;
      }
      double clipped = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double in = (i + 1 < m ? flux[i] : 0.0) - (i > 0 ? flux[i - 1] : 0.0);
        v[i] += dt * in / geo.volume[i];
        if (v[i] < 0.0) {
          clipped -= geo.volume[i] * v[i];
          v[i] = 0.0;
        }
        if (!std::isfinite(v[i])) throw Error("CFL collapse: non-finite density");
      }
      if (clipped > 0.0) {
        drift += clipped;
        const double scale = conserved / geo.total(v);
        for (double& x : v) x *= scale;
        if (drift > cfg.drift_tol) throw Error("mass drift exceeds tolerance");
      }
      t = (target - t <= dt) ? target : t + dt;
      if (++steps > cfg.max_steps) throw Error("CFL collapse: step budget exhausted");
    }
    GridDensity raw(d0.grid_ptr(), v);
    auto diag = detail::diagnose(raw, target, p);
    diag.drift = drift;
    diag.steps = steps;
    traj.times.push_back(target);
    traj.states.push_back(normalize(raw));
    traj.diagnostics.push_back(diag);
  }
  detail::fill_rates(traj);
  return traj;
}

/// Heat flow. The exact scheme convolves with the Gaussian M_{2(t - t0)}
/// (through the radial heat kernel on radial grids).
inline Trajectory solve_heat(const GridDensity& d0, const SolverConfig& cfg, const FunctionalOptions& opt = {}) {
  cfg.validate();
  if (cfg.p != 1.0) throw Error("heat equation requires p = 1");
  if (cfg.scheme == Scheme::ExplicitFD) return solve_porous(d0, cfg, opt);
  require_probability_density(d0, opt);
  Trajectory traj;
  traj.p = 1.0;
  traj.t0 = cfg.t0;
  traj.scheme = cfg.scheme;
  for (double target : cfg.t_samples) {
    GridDensity state = detail::heat_convolution(d0, target - cfg.t0);
    traj.times.push_back(target);
    traj.diagnostics.push_back(detail::diagnose(state, target, 1.0));
    traj.states.push_back(std::move(state));
  }
  detail::fill_rates(traj);
  return traj;
}

struct TraceSample {
  double time = 0.0;
  FunctionalReport report;
  // Centered time derivatives (NaN at the first and last sample).
  double dE = 0.0, dH = 0.0, dH_p = 0.0, dN = 0.0, dN_p = 0.0, dLambda = 0.0;
  // Raw second differences of N and N_p.
  double d2N = 0.0, d2N_p = 0.0;
};

/// Evaluates every functional along a trajectory, with time derivatives.
inline std::vector<TraceSample> functional_trace(const Trajectory& traj, double p, const FunctionalOptions& opt = {}) {
  std::vector<TraceSample> out(traj.states.size());
  std::vector<double> E, H, Hp, N, Np, L;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    out[i].time = traj.times[i];
    out[i].report = evaluate_functionals(traj.states[i], p, opt);
    const auto& r = out[i].report;
    E.push_back(r.E);
    H.push_back(r.H);
    Hp.push_back(r.H_p);
    N.push_back(r.N);
    Np.push_back(r.N_p);
    L.push_back(r.Lambda);
  }
  const auto& t = traj.times;
  const auto dE = centered_derivative(t, E), dH = centered_derivative(t, H), dHp = centered_derivative(t, Hp),
             dN = centered_derivative(t, N), dNp = centered_derivative(t, Np), dL = centered_derivative(t, L),
             d2N = second_differences(t, N), d2Np = second_differences(t, Np);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].dE = dE[i];
    out[i].dH = dH[i];
    out[i].dH_p = dHp[i];
    out[i].dN = dN[i];
    out[i].dN_p = dNp[i];
    out[i].dLambda = dL[i];
    out[i].d2N = d2N[i];
    out[i].d2N_p = d2Np[i];
  }
  return out;
}

/// L1 distance between two densities on the same grid.
inline double l1_distance(const GridDensity& a, const GridDensity& b) {
  if (!(a.spec() == b.spec())) throw Error("L1 distance needs identical grids");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(a[i] - b[i]);
  return a.grid().integrate(diff);
}

/// Uniformly spaced sample times t_begin + k * step, k = 1..count.
inline std::vector<double> sample_times(double t_begin, double t_end, int count) {
  std::vector<double> t(static_cast<std::size_t>(count));
  for (int k = 1; k <= count; ++k) t[static_cast<std::size_t>(k - 1)] = t_begin + (t_end - t_begin) * k / count;
  return t;
}

}  // namespace entroflow
