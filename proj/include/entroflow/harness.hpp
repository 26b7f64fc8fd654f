#pragma once

// Named, tolerance-bearing checks of the entropy / Fisher information
// inequalities and of the diffusion laws, and a seeded battery running them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "entroflow/diffusion.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"
#include "entroflow/profiles.hpp"

namespace entroflow {

using json = nlohmann::json;

struct CheckOptions {
  /// Absolute slack floor: a check passes when slack >= -tol.
  double tol = 1e-6;
  /// Relative tolerance |slack| <= eq_tol * |rhs| for equality cases.
  double eq_tol = 1e-3;
  bool equality_expected = false;

  CheckOptions expecting_equality() const {
    CheckOptions c = *this;
    c.equality_expected = true;
    return c;
  }
};

/// Every check is oriented as lhs >= rhs, slack = lhs - rhs. Inequalities
/// pass when slack >= -tol; expected equalities pass when
/// |slack| <= max(tol, eq_tol * |rhs|).
struct InequalityVerdict {
  std::string name;
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  double tol = 0.0;
  bool equality_expected = false;
  double eq_tol = 0.0;
  bool passed = false;
  json context = json::object();
};

inline InequalityVerdict make_verdict(std::string name, std::string relation, double lhs, double rhs,
                                      const CheckOptions& opt, json context = json::object()) {
  InequalityVerdict v;
  v.name = std::move(name);
  v.relation = std::move(relation);
  v.lhs = lhs;
  v.rhs = rhs;
  v.slack = lhs - rhs;
  v.tol = opt.tol;
  v.equality_expected = opt.equality_expected;
  v.eq_tol = opt.eq_tol;
  v.context = std::move(context);
  if (v.equality_expected)
    v.passed = std::isfinite(v.slack) && std::abs(v.slack) <= std::max(v.tol, v.eq_tol * std::abs(rhs));
  else
    v.passed = std::isfinite(v.slack) && v.slack >= -v.tol;
  return v;
}

/// Two-sided identity lhs = rhs to relative tolerance rel_tol.
inline InequalityVerdict make_identity(std::string name, std::string relation, double measured, double expected,
                                       double rel_tol, json context = json::object()) {
  CheckOptions opt;
  opt.eq_tol = rel_tol;
  opt.tol = rel_tol * std::abs(expected);
  opt.equality_expected = true;
  return make_verdict(std::move(name), std::move(relation), measured, expected, opt, std::move(context));
}

inline json to_json(const InequalityVerdict& v) {
  return json{{"name", v.name},
              {"relation", v.relation},
              {"lhs", v.lhs},
              {"rhs", v.rhs},
              {"slack", v.slack},
              {"tol", v.tol},
              {"equality_expected", v.equality_expected},
              {"eq_tol", v.eq_tol},
              {"passed", v.passed},
              {"context", v.context}};
}

inline json grid_context(const GridDensity& d) {
  return json{{"geometry", to_string(d.spec().geometry)},
              {"n", d.n()},
              {"m", d.spec().cells},
              {"x_min", d.spec().lower},
              {"x_max", d.spec().upper}};
}

// ---------------------------------------------------------------------------
// Single-density checks

inline InequalityVerdict check_moment_fisher(const GridDensity& d, const CheckOptions& opt = {}) {
  const double n = d.n();
  return make_verdict("moment_fisher", "E*I >= n^2", second_moment(d) * fisher_information(d), n * n, opt,
                      grid_context(d));
}

inline InequalityVerdict check_moment_fisher_p(const GridDensity& d, double p, const CheckOptions& opt = {}) {
  const double n = d.n();
  auto ctx = grid_context(d);
  ctx["p"] = p;
  return make_verdict("moment_fisher_p", "E*I_p >= n^2 * int d^p", second_moment(d) * fisher_information_p(d, p),
                      n * n * power_integral(d, p), opt, ctx);
}

inline InequalityVerdict check_isoperimetric(const GridDensity& d, const CheckOptions& opt = {}) {
  return make_verdict("isoperimetric", "N*I >= 2*pi*e*n", entropy_power(d) * fisher_information(d),
                      2.0 * std::numbers::pi * std::numbers::e * d.n(), opt, grid_context(d));
}

inline InequalityVerdict check_isoperimetric_p(const GridDensity& d, double p, double gamma,
                                               const CheckOptions& opt = {}) {
  auto ctx = grid_context(d);
  ctx["p"] = p;
  return make_verdict("isoperimetric_p", "N_p*I_p >= gamma_{n,p}",
                      renyi_entropy_power(d, p) * fisher_information_p(d, p), gamma, opt, ctx);
}
inline InequalityVerdict check_isoperimetric_p(const GridDensity& d, double p, const CheckOptions& opt = {}) {
  return check_isoperimetric_p(d, p, gamma_np(d.n(), p), opt);
}

/// Lambda(d) <= Lambda(M~_p), oriented as Lambda(M~_p) - Lambda(d) >= 0.
inline InequalityVerdict check_lambda_bound(const GridDensity& d, double p, double lambda_max,
                                            const CheckOptions& opt = {}) {
  auto ctx = grid_context(d);
  ctx["p"] = p;
  return make_verdict("lambda_bound", "Lambda(M_p) >= Lambda(d)", lambda_max, lambda_functional(d, p), opt, ctx);
}
inline InequalityVerdict check_lambda_bound(const GridDensity& d, double p, const CheckOptions& opt = {}) {
  return check_lambda_bound(d, p, extremal_lambda(d.n(), p), opt);
}

/// N_p(d)/E(d)^{1+n(p-1)/2} <= the same ratio at the Barenblatt profile.
inline InequalityVerdict check_entropy_power_ratio(const GridDensity& d, double p, double ratio_max,
                                                   const CheckOptions& opt = {}) {
  auto ctx = grid_context(d);
  ctx["p"] = p;
  return make_verdict("entropy_power_ratio", "N_p/E^{1+n(p-1)/2} at M_p >= same at d", ratio_max,
                      entropy_power_ratio(d, p), opt, ctx);
}

namespace detail {

inline GridDensity checked_sum(const GridDensity& d1, const GridDensity& d2) {
  GridDensity sum = convolve(d1, d2);
  if (std::abs(mass(sum) - 1.0) > FunctionalOptions{}.normalization_tol)
    throw Error("convolution lost mass outside the domain");
  return sum;
}

}  // namespace detail

/// Shannon entropy power inequality N(X+Y) >= N(X) + N(Y).
inline InequalityVerdict check_epi(const GridDensity& d1, const GridDensity& d2, const CheckOptions& opt = {}) {
  const GridDensity sum = detail::checked_sum(d1, d2);
  return make_verdict("epi", "N(X+Y) >= N(X) + N(Y)", entropy_power(sum), entropy_power(d1) + entropy_power(d2),
                      opt, grid_context(d1));
}

/// Blachman-Stam inequality 1/I(X+Y) >= 1/I(X) + 1/I(Y).
inline InequalityVerdict check_blachman_stam(const GridDensity& d1, const GridDensity& d2,
                                             const CheckOptions& opt = {}) {
  const GridDensity sum = detail::checked_sum(d1, d2);
  return make_verdict("blachman_stam", "1/I(X+Y) >= 1/I(X) + 1/I(Y)", 1.0 / fisher_information(sum),
                      1.0 / fisher_information(d1) + 1.0 / fisher_information(d2), opt, grid_context(d1));
}

/// Nash inequality with constant 2/(pi e n) for a nonnegative function g.
inline InequalityVerdict check_nash(const GridDensity& g, const CheckOptions& opt = {}) {
  const double n = g.n();
  const auto grad = g.grid().derivative(g.values());
  std::vector<double> g2(g.size()), grad2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g2[i] = g[i] * g[i];
    grad2[i] = grad[i] * grad[i];
  }
  const double l1 = mass(g);
  const double l2sq = g.grid().integrate(g2);
  const double dirichlet = g.grid().integrate(grad2);
  const double rhs_side = 2.0 / (std::numbers::pi * std::numbers::e * n) * std::pow(l1, 4.0 / n) * dirichlet;
  return make_verdict("nash", "(2/(pi e n)) |g|_1^{4/n} |grad g|_2^2 >= |g|_2^{2+4/n}", rhs_side,
                      std::pow(l2sq, 1.0 + 2.0 / n), opt, grid_context(g));
}

/// Gagliardo-Nirenberg inequality of the given branch with sharp constant K.
inline InequalityVerdict check_gn(const GridDensity& u, double q, GnBranch branch, double K,
                                  const CheckOptions& opt = {}) {
  const GnTerms t = gn_terms(u, q, branch);
  auto ctx = grid_context(u);
  ctx["q"] = q;
  ctx["branch"] = to_string(branch);
  ctx["theta"] = t.theta;
  ctx["K_GN"] = K;
  return make_verdict("gn", branch == GnBranch::A ? "K |grad u|^theta |u|_{q+1}^{1-theta} >= |u|_{2q}"
                                                   : "K |grad u|^theta |u|_{2q}^{1-theta} >= |u|_{q+1}",
                      K * std::pow(t.gradient_norm, t.theta) * std::pow(t.other_norm, 1.0 - t.theta),
                      t.target_norm, opt, ctx);
}
inline InequalityVerdict check_gn(const GridDensity& u, double q, GnBranch branch, const CheckOptions& opt = {}) {
  return check_gn(u, q, branch, k_gn(u.n(), q, branch), opt);
}

// ---------------------------------------------------------------------------
// Seeded random densities

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double sigma = 1.0;
};

/// Mixture of isotropic Gaussians; components are centered when n >= 2.
struct GaussianMixture {
  int n = 1;
  std::vector<MixtureComponent> components;

  double value(double x) const {
    double acc = 0.0;
    for (const auto& c : components) {
      const double y = x - c.mean;
      acc += c.weight * std::exp(-y * y / (2.0 * c.sigma)) / std::pow(2.0 * std::numbers::pi * c.sigma, 0.5 * n);
    }
    return acc;
  }
  GridDensity sample(const GridSpec& spec) const {
    return normalize(GridDensity::sample(spec, [this](double x) { return value(x); }));
  }
  json to_json() const {
    json comps = json::array();
    for (const auto& c : components) comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"sigma", c.sigma}});
    return json{{"density", "gaussian_mixture"}, {"n", n}, {"components", comps}};
  }
};

/// Deterministic generator of Gaussian mixtures with 1-4 components,
/// sigma in [0.25, 2] and means in [-2, 2] (1D only).
class MixtureGenerator {
 public:
  static constexpr double kSigmaMin = 0.25;
  static constexpr double kSigmaMax = 2.0;
  static constexpr double kMeanMax = 2.0;

  explicit MixtureGenerator(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [a, b) from the top 53 bits of the engine output.
  double uniform(double a, double b) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return a + (b - a) * u;
  }

  GaussianMixture next(int n) {
    GaussianMixture mix;
    mix.n = n;
    const int count = 1 + static_cast<int>(engine_() % 4);
    double total = 0.0;
    for (int k = 0; k < count; ++k) {
      MixtureComponent c;
      c.weight = uniform(0.2, 1.0);
      c.mean = n == 1 ? uniform(-kMeanMax, kMeanMax) : 0.0;
      c.sigma = uniform(kSigmaMin, kSigmaMax);
      total += c.weight;
      mix.components.push_back(c);
    }
    for (auto& c : mix.components) c.weight /= total;
    return mix;
  }

 private:
  std::mt19937_64 engine_;
};

/// Half-width that holds every generated mixture with negligible tail mass.
inline double mixture_half_width(int n) {
  const double spread = 12.0 * std::sqrt(MixtureGenerator::kSigmaMax);
  return n == 1 ? MixtureGenerator::kMeanMax + spread : spread;
}

// ---------------------------------------------------------------------------
// Sharp constants, memoized

class ConstantCache {
 public:
  explicit ConstantCache(RefineOptions opt = {}) : opt_(opt) {}

  double gamma(int n, double p) {
    return memo(gamma_, {n, p, 0}, [&] { return gamma_np(n, p, opt_); });
  }
  double lambda_max(int n, double p) {
    return memo(lambda_, {n, p, 0}, [&] { return extremal_lambda(n, p, opt_); });
  }
  double ratio_max(int n, double p) {
    return memo(ratio_, {n, p, 0}, [&] { return extremal_entropy_power_ratio(n, p, opt_); });
  }
  double k_gn(int n, double q, GnBranch branch) {
    return memo(kgn_, {n, q, static_cast<int>(branch)}, [&] { return entroflow::k_gn(n, q, branch, opt_); });
  }

 private:
  using Key = std::tuple<int, double, int>;
  template <class F>
  double memo(std::map<Key, double>& table, Key key, F&& compute) {
    auto it = table.find(key);
    if (it != table.end()) return it->second;
    const double v = compute();
    table.emplace(key, v);
    return v;
  }

  RefineOptions opt_;
  std::map<Key, double> gamma_, lambda_, ratio_, kgn_;
};

// ---------------------------------------------------------------------------
// Flow checks

struct FlowTolerances {
  double second_moment_rate = 1e-3;  // heat: dE/dt = 2n
  double identity = 1e-2;            // DeBruijn-type and rate identities
  double concavity = 1e-6;           // second differences of N, N_p
  double monotone = 1e-6;            // per-step decrease of Lambda
  double l1 = 1e-2;                  // solver vs Barenblatt
  double linear_fit = 1e-4;          // N_p linear along the Barenblatt flow
  double mass = 1e-6;
};

/// Heat-flow laws at the interior samples of a trajectory.
inline std::vector<InequalityVerdict> check_heat_flow(const Trajectory& traj, const FlowTolerances& tol = {},
                                                      json context = json::object()) {
  std::vector<InequalityVerdict> out;
  const auto trace = functional_trace(traj, 1.0);
  const int n = traj.states.front().n();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto ctx = context;
    ctx["t"] = trace[i].time;
    const auto& r = trace[i].report;
    out.push_back(make_identity("heat.mass", "mass = 1", traj.diagnostics[i].mass, 1.0, tol.mass, ctx));
    CheckOptions strict;
    out.push_back(make_verdict("heat.moment_fisher", "E*I >= n^2", r.E * r.I, double(n * n), strict, ctx));
    if (i == 0 || i + 1 == trace.size()) continue;
    const auto& s = trace[i];
    out.push_back(make_identity("heat.second_moment_rate", "dE/dt = 2n", s.dE, 2.0 * n, tol.second_moment_rate, ctx));
    out.push_back(make_identity("heat.debruijn", "dH/dt = I", s.dH, r.I, tol.identity, ctx));
    out.push_back(make_identity("heat.entropy_power_rate", "dN/dt = (2/n) N I", s.dN, 2.0 / n * r.N * r.I,
                                tol.identity, ctx));
    CheckOptions conc;
    conc.tol = tol.concavity;
    out.push_back(make_verdict("heat.concavity", "0 >= second difference of N", 0.0, s.d2N, conc, ctx));
    out.push_back(make_verdict("heat.moment_growth", "sqrt(I) >= d sqrt(E)/dt", std::sqrt(r.I),
                               s.dE / (2.0 * std::sqrt(r.E)), strict, ctx));
  }
  return out;
}

/// Least-squares line through (t, y); returns the largest relative residual.
inline double linear_fit_residual(const std::vector<double>& t, const std::vector<double>& y) {
  const double k = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double slope = (k * sty - st * sy) / (k * stt - st * st);
  const double intercept = (sy - slope * st) / k;
  double worst = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i)
    worst = std::max(worst, std::abs(y[i] - (slope * t[i] + intercept)) / std::abs(y[i]));
  return worst;
}

/// Nonlinear-diffusion laws along a trajectory of order traj.p. When
/// `barenblatt` is given the trajectory started from M_p(., t0) and is also
/// compared against the exact self-similar solution.
inline std::vector<InequalityVerdict> check_porous_flow(const Trajectory& traj, const FlowTolerances& tol = {},
                                                        const BarenblattParams* barenblatt = nullptr,
                                                        json context = json::object()) {
  std::vector<InequalityVerdict> out;
  const double p = traj.p;
  const auto trace = functional_trace(traj, p);
  const int n = traj.states.front().n();
  std::vector<double> np;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto ctx = context;
    ctx["t"] = trace[i].time;
    const auto& r = trace[i].report;
    np.push_back(r.N_p);
    out.push_back(make_identity("porous.mass", "mass = 1", traj.diagnostics[i].mass, 1.0, tol.mass, ctx));
    if (barenblatt) {
      const GridDensity exact = barenblatt_solution(*barenblatt, trace[i].time, traj.states[i].spec());
      CheckOptions l1;
      l1.tol = 0.0;
      out.push_back(make_verdict("porous.barenblatt_l1", "L1 bound >= |v - M_p|_1", tol.l1,
                                 l1_distance(traj.states[i], exact), l1, ctx));
    }
    if (i > 0) {
      CheckOptions mono;
      mono.tol = tol.monotone;
      out.push_back(make_verdict("porous.lambda_monotone", "Lambda(t_k) >= Lambda(t_{k-1})", r.Lambda,
                                 trace[i - 1].report.Lambda, mono, ctx));
    }
    if (i == 0 || i + 1 == trace.size()) continue;
    const auto& s = trace[i];
    out.push_back(make_identity("porous.second_moment_rate", "dE/dt = 2n int v^p", s.dE,
                                2.0 * n * r.power_integral, tol.identity, ctx));
    out.push_back(make_identity("porous.renyi_debruijn", "dH_p/dt = I_p", s.dH_p, r.I_p, tol.identity, ctx));
    CheckOptions conc;
    conc.tol = tol.concavity;
    out.push_back(make_verdict("porous.concavity", "0 >= second difference of N_p", 0.0, s.d2N_p, conc, ctx));
  }
  if (barenblatt) {
    CheckOptions fit;
    fit.tol = 0.0;
    out.push_back(make_verdict("porous.linear_entropy_power", "fit bound >= relative residual of linear N_p(t)",
                               tol.linear_fit, linear_fit_residual(traj.times, np), fit, context));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Battery

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names{
      "moment_fisher", "moment_fisher_p", "isoperimetric", "isoperimetric_p", "lambda_bound", "entropy_power_ratio",
      "epi",           "blachman_stam",   "nash",          "gn",              "heat_flow",    "porous_flow"};
  return names;
}

struct SuiteConfig {
  std::vector<std::string> checks{"all"};
  std::vector<int> dims{1, 2, 3};
  std::vector<double> orders{0.9, 1.5, 2.0, 3.0};
  int cells = 4096;
  std::uint64_t seed = 7;
  int random_count = 100;
  CheckOptions options;
  FlowTolerances flow;
};

struct CheckSummary {
  std::string name;
  std::vector<InequalityVerdict> verdicts;
  std::size_t violations() const {
    std::size_t k = 0;
    for (const auto& v : verdicts) k += v.passed ? 0 : 1;
    return k;
  }
};

struct SuiteReport {
  SuiteConfig config;
  std::vector<CheckSummary> checks;
  std::vector<std::string> skipped;

  bool all_passed() const {
    for (const auto& c : checks)
      if (c.violations() > 0) return false;
    return true;
  }
};

inline std::set<std::string> resolve_checks(const std::vector<std::string>& requested) {
  std::set<std::string> out;
  for (const auto& name : requested) {
    if (name == "all") {
      out.insert(check_names().begin(), check_names().end());
      continue;
    }
    if (std::find(check_names().begin(), check_names().end(), name) == check_names().end())
      throw Error("unknown check '" + name + "'");
    out.insert(name);
  }
  return out;
}

namespace detail {

inline std::string format_order(double p) {
  std::ostringstream os;
  os << p;
  return os.str();
}

struct SuiteRunner {
  static constexpr double kMaxExtentRatio = 1e3;

  const SuiteConfig& cfg;
  SuiteReport& report;
  ConstantCache constants;

  GridSpec mixture_grid(int n) const { return GridSpec::centered(n, mixture_half_width(n), cfg.cells); }

  GridDensity barenblatt_on_default_grid(int n, double p) {
    const auto b = barenblatt_params(n, p);
    return barenblatt_profile(b, GridSpec::centered(n, barenblatt_extent(b, 1e-12), cfg.cells));
  }

  void skip(const std::string& reason) {
    if (std::find(report.skipped.begin(), report.skipped.end(), reason) == report.skipped.end())
      report.skipped.push_back(reason);
  }

  /// Orders usable in dimension n. Orders whose Barenblatt profile needs a
  /// domain far beyond its core (second moment barely finite) are skipped
  /// and reported rather than truncated silently.
  std::vector<double> orders_for(int n) {
    std::vector<double> out;
    for (double p : cfg.orders) {
      const std::string tag = "n=" + std::to_string(n) + " p=" + format_order(p);
      if (p == 1.0) continue;
      if (!(p > critical_order(n))) {
        skip(tag + ": second moment of the Barenblatt profile is infinite");
        continue;
      }
      if (p < 1.0) {
        const auto b = barenblatt_params(n, p);
        double extent = std::numeric_limits<double>::infinity();
        try {
          extent = barenblatt_extent(b, 1e-12);
        } catch (const Error&) {
        }
        if (!(extent <= kMaxExtentRatio * std::sqrt(b.C() / std::abs(b.lambda)))) {
          skip(tag + ": Barenblatt tail too heavy for a uniform grid");
          continue;
        }
      }
      out.push_back(p);
    }
    return out;
  }

  template <class F>
  void on_mixtures(int n, std::uint64_t stream, F&& f) {
    MixtureGenerator gen(cfg.seed * 1000003ULL + stream * 7919ULL + static_cast<std::uint64_t>(n));
    const GridSpec spec = mixture_grid(n);
    for (int k = 0; k < cfg.random_count; ++k) {
      const auto mix = gen.next(n);
      f(mix.sample(spec), mix.to_json());
    }
  }

  static void annotate(InequalityVerdict& v, const json& density) { v.context["density"] = density; }

  void push(CheckSummary& s, InequalityVerdict v, const json& density) {
    annotate(v, density);
    s.verdicts.push_back(std::move(v));
  }

  json gaussian_ctx(int n, double sigma) const { return json{{"density", "gaussian"}, {"n", n}, {"sigma", sigma}}; }
  json barenblatt_ctx(int n, double p) const { return json{{"density", "barenblatt"}, {"n", n}, {"p", p}}; }

  void run_moment_fisher(CheckSummary& s, bool isoperimetric) {
    const auto& opt = cfg.options;
    for (int n : cfg.dims) {
      for (double sigma : {0.5, 1.0, 2.0}) {
        const auto g = gaussian({n, sigma}, GridSpec::centered(n, 12.0 * std::sqrt(sigma), cfg.cells));
        auto v = isoperimetric ? check_isoperimetric(g, opt.expecting_equality())
                               : check_moment_fisher(g, opt.expecting_equality());
        push(s, v, gaussian_ctx(n, sigma));
      }
      on_mixtures(n, isoperimetric ? 2 : 1, [&](const GridDensity& d, const json& ctx) {
        push(s, isoperimetric ? check_isoperimetric(d, opt) : check_moment_fisher(d, opt), ctx);
      });
    }
  }

  void run_order_p(CheckSummary& s, const std::string& which, std::uint64_t stream) {
    const auto& opt = cfg.options;
    for (int n : cfg.dims) {
      for (double p : orders_for(n)) {
        auto check = [&](const GridDensity& d, const CheckOptions& o) {
          if (which == "moment_fisher_p") return check_moment_fisher_p(d, p, o);
          if (which == "isoperimetric_p") return check_isoperimetric_p(d, p, constants.gamma(n, p), o);
          if (which == "lambda_bound") return check_lambda_bound(d, p, constants.lambda_max(n, p), o);
          return check_entropy_power_ratio(d, p, constants.ratio_max(n, p), o);
        };
        const auto extremal = barenblatt_on_default_grid(n, p);
        push(s, check(extremal, opt.expecting_equality()), barenblatt_ctx(n, p));
        // Gaussian with the same second moment: strictly inside the bound.
        const double sigma = second_moment(extremal) / n;
        auto gv = check(gaussian({n, sigma}, GridSpec::centered(n, 12.0 * std::sqrt(sigma), cfg.cells)), opt);
        if (!(gv.slack > 0.0)) gv.passed = false;
        push(s, gv, gaussian_ctx(n, sigma));
        on_mixtures(n, stream + static_cast<std::uint64_t>(p * 1000.0),
                    [&](const GridDensity& d, const json& ctx) { push(s, check(d, opt), ctx); });
      }
    }
  }

  void run_convolution(CheckSummary& s, bool epi) {
    const auto& opt = cfg.options;
    const GridSpec spec = GridSpec::centered(1, 2.0 * mixture_half_width(1) - 12.0, cfg.cells);
    auto check = [&](const GridDensity& a, const GridDensity& b, const CheckOptions& o) {
      return epi ? check_epi(a, b, o) : check_blachman_stam(a, b, o);
    };
    for (auto [s1, s2] : {std::pair{0.5, 1.0}, std::pair{1.0, 1.0}, std::pair{0.25, 2.0}}) {
      push(s, check(gaussian({1, s1}, spec), gaussian({1, s2}, spec), opt.expecting_equality()),
           json{{"density", "gaussian_pair"}, {"sigma", {s1, s2}}});
    }
    MixtureGenerator gen(cfg.seed * 1000003ULL + (epi ? 11 : 12));
    for (int k = 0; k < cfg.random_count; ++k) {
      const auto a = gen.next(1), b = gen.next(1);
      push(s, check(a.sample(spec), b.sample(spec), opt), json{{"pair", {a.to_json(), b.to_json()}}});
    }
  }

  void run_nash(CheckSummary& s) {
    const auto& opt = cfg.options;
    for (int n : cfg.dims) {
      push(s, check_nash(gaussian({n, 1.0}, GridSpec::centered(n, 12.0, cfg.cells)), opt), gaussian_ctx(n, 1.0));
      for (double p : orders_for(n)) push(s, check_nash(barenblatt_on_default_grid(n, p), opt), barenblatt_ctx(n, p));
      on_mixtures(n, 21, [&](const GridDensity& d, const json& ctx) { push(s, check_nash(d, opt), ctx); });
    }
  }

  void run_gn(CheckSummary& s) {
    const auto& opt = cfg.options;
    for (int n : cfg.dims) {
      for (double p : orders_for(n)) {
        const auto branch = gn_branch_for_order(n, p);
        if (!branch) {
          skip("gn: n=" + std::to_string(n) + " p=" + format_order(p) + " outside both GN ranges");
          continue;
        }
        const double q = gn_q(p);
        const double K = constants.k_gn(n, q, *branch);
        const auto b = barenblatt_params(n, p);
        const double extent = gn_extent(b, 1e-12);
        const auto u = gn_optimizer(b, GridSpec::centered(n, extent, cfg.cells));
        json ctx{{"density", "gn_optimizer"}, {"n", n}, {"p", p}};
        push(s, check_gn(u, q, *branch, K, opt.expecting_equality()), ctx);
        ctx["dilation"] = 2.0;
        push(s, check_gn(dilate(u, 2.0), q, *branch, K, opt.expecting_equality()), ctx);
        on_mixtures(n, 31 + static_cast<std::uint64_t>(p * 1000.0), [&](const GridDensity& d, const json& c) {
          push(s, check_gn(d, q, *branch, K, opt), c);
        });
      }
    }
  }

  void run_heat(CheckSummary& s) {
    for (int n : cfg.dims) {
      // Radial heat kernels cost O(m^2) Bessel evaluations; use a coarser grid.
      const int cells = n == 1 ? cfg.cells : std::max(256, cfg.cells / 4);
      MixtureGenerator gen(cfg.seed * 1000003ULL + 41 + static_cast<std::uint64_t>(n));
      auto mix = gen.next(n);
      const double half = mixture_half_width(n) + 8.0;
      const auto d0 = mix.sample(GridSpec::centered(n, half, cells));
      SolverConfig sc;
      sc.p = 1.0;
      sc.t_samples = sample_times(1.0, 2.0, 50);
      const auto traj = solve_heat(d0, sc);
      json ctx = mix.to_json();
      ctx["m"] = cells;
      for (auto& v : check_heat_flow(traj, cfg.flow, ctx)) s.verdicts.push_back(std::move(v));
    }
  }

  void run_porous(CheckSummary& s) {
    for (double p : orders_for(1)) {
      const auto b = barenblatt_params(1, p);
      // Domain holds M_p(., 2) with margin.
      const double grow = std::pow(2.0, 1.0 / b.mu);
      const double half = p > 1.0 ? 1.15 * b.support_radius() * grow : barenblatt_extent(b, 1e-15) * grow;
      const GridSpec spec = GridSpec::centered(1, half, cfg.cells);
      SolverConfig sc;
      sc.p = p;
      sc.scheme = Scheme::ExplicitFD;
      sc.t0 = 1.0;
      sc.t_samples = sample_times(1.0, 2.0, 50);
      const auto traj = solve_porous(barenblatt_solution(b, 1.0, spec), sc);
      json ctx{{"initial", "barenblatt"}, {"n", 1}, {"p", p}, {"m", cfg.cells}};
      for (auto& v : check_porous_flow(traj, cfg.flow, &b, ctx)) s.verdicts.push_back(std::move(v));
    }
  }
};

}  // namespace detail

/// Runs the configured battery. Deterministic for a fixed config and seed.
inline SuiteReport run_suite(const SuiteConfig& cfg) {
  SuiteReport report;
  report.config = cfg;
  detail::SuiteRunner runner{cfg, report, ConstantCache{}};
  for (const auto& name : resolve_checks(cfg.checks)) {
    CheckSummary s;
    s.name = name;
    if (name == "moment_fisher") runner.run_moment_fisher(s, false);
    else if (name == "isoperimetric") runner.run_moment_fisher(s, true);
    else if (name == "moment_fisher_p") runner.run_order_p(s, name, 101);
    else if (name == "isoperimetric_p") runner.run_order_p(s, name, 102);
    else if (name == "lambda_bound") runner.run_order_p(s, name, 103);
    else if (name == "entropy_power_ratio") runner.run_order_p(s, name, 104);
    else if (name == "epi") runner.run_convolution(s, true);
    else if (name == "blachman_stam") runner.run_convolution(s, false);
    else if (name == "nash") runner.run_nash(s);
    else if (name == "gn") runner.run_gn(s);
    else if (name == "heat_flow") runner.run_heat(s);
    else if (name == "porous_flow") runner.run_porous(s);
    report.checks.push_back(std::move(s));
  }
  return report;
}

inline json to_json(const SuiteConfig& c) {
  return json{{"checks", c.checks},
              {"dims", c.dims},
              {"orders", c.orders},
              {"cells", c.cells},
              {"seed", c.seed},
              {"random_count", c.random_count},
              {"tol", c.options.tol},
              {"eq_tol", c.options.eq_tol}};
}

inline json to_json(const SuiteReport& r) {
  json checks = json::array();
  std::size_t total = 0, violations = 0;
  for (const auto& c : r.checks) {
    json verdicts = json::array();
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& v : c.verdicts) {
      verdicts.push_back(to_json(v));
      min_slack = std::min(min_slack, v.slack);
    }
    total += c.verdicts.size();
    violations += c.violations();
    checks.push_back({{"name", c.name},
                      {"count", c.verdicts.size()},
                      {"violations", c.violations()},
                      {"min_slack", c.verdicts.empty() ? 0.0 : min_slack},
                      {"verdicts", verdicts}});
  }
  return json{{"schema", "entroflow.verify/1"}, {"config", to_json(r.config)}, {"checks", checks},
              {"skipped", r.skipped}, {"total", total},       {"violations", violations},
              {"passed", r.all_passed()}};
}

/// One row per check: name,count,violations,min_slack,passed.
inline std::string summary_csv(const SuiteReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "check,count,violations,min_slack,passed\n";
  for (const auto& c : r.checks) {
    double min_slack = std::numeric_limits<double>::infinity();
    for (const auto& v : c.verdicts) min_slack = std::min(min_slack, v.slack);
    if (c.verdicts.empty()) min_slack = 0.0;
    os << c.name << ',' << c.verdicts.size() << ',' << c.violations() << ',' << min_slack << ','
       << (c.violations() == 0 ? "true" : "false") << '\n';
  }
  return os.str();
}

}  // namespace entroflow
