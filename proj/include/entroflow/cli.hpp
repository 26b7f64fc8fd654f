#pragma once

// Command-line front end: profile, evolve, constants, verify, report.

#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entroflow/diffusion.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/harness.hpp"
#include "entroflow/io.hpp"
#include "entroflow/profiles.hpp"
#include "entroflow/run_config.hpp"

namespace entroflow {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

inline constexpr const char* kDefaultOutput = "entroflow_out";

/// Output directory: --out flag, then ENTROFLOW_OUT, then the config file,
/// then the default.
inline std::string resolve_output(const std::optional<std::string>& flag, const std::string& from_config) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ENTROFLOW_OUT"); env && *env) return env;
  if (!from_config.empty()) return from_config;
  return kDefaultOutput;
}

namespace detail {

inline GridSpec grid_for(const RunConfig& c, double natural_half_width) {
  const double half = c.grid.r_max > 0.0 ? c.grid.r_max : natural_half_width;
  return GridSpec::centered(c.grid.n, half, c.grid.cells);
}

inline GridDensity initial_density(const RunConfig& c) {
  if (c.profile == "gaussian") {
    if (!(c.sigma > 0.0)) throw Error("sigma must be positive");
    const double grow = c.solver.t_samples.empty() ? 1.0 : 1.0 + 2.0 * c.solver.t_samples.back() / c.sigma;
    return gaussian({c.grid.n, c.sigma}, grid_for(c, 12.0 * std::sqrt(c.sigma * grow)));
  }
  if (c.profile == "barenblatt") {
    const auto b = barenblatt_params(c.grid.n, c.solver.p);
    if (c.command == Command::Profile) return barenblatt_profile(b, grid_for(c, barenblatt_extent(b)));
    if (!(c.solver.t0 > 0.0)) throw Error("barenblatt initial datum needs t0 > 0");
    const double t_end = c.solver.t_samples.empty() ? c.solver.t0 : c.solver.t_samples.back();
    const double scale = std::pow(t_end, 1.0 / b.mu);
    const double half = b.p > 1.0 ? 1.15 * b.support_radius() * scale : barenblatt_extent(b) * scale;
    return barenblatt_solution(b, c.solver.t0, grid_for(c, half));
  }
  if (c.profile == "file") {
    if (c.input.empty()) throw Error("profile 'file' needs --input");
    return read_density(c.input);
  }
  throw Error("unknown profile '" + c.profile + "'");
}

inline std::string trace_csv(const std::vector<TraceSample>& trace) {
  std::string out = "t,mass,E,H,H_p,N,N_p,I,I_p,Lambda,dE,dH,dH_p,dN,dN_p,d2N,d2N_p\n";
  for (const auto& s : trace) {
    const auto& r = s.report;
    for (double v : {s.time, r.mass, r.E, r.H, r.H_p, r.N, r.N_p, r.I, r.I_p, r.Lambda, s.dE, s.dH, s.dH_p, s.dN,
                     s.dN_p, s.d2N}) {
      out += std::isfinite(v) ? format_double(v) : std::string();
      out += ',';
    }
    out += std::isfinite(s.d2N_p) ? format_double(s.d2N_p) : std::string();
    out += '\n';
  }
  return out;
}

inline int run_profile(const RunConfig& c) {
  const GridDensity d = initial_density(c);
  const fs::path dir = fs::path(c.output) / "profile";
  write_density(d, dir / "density");
  const double p = c.profile == "barenblatt" ? c.solver.p : (c.solver.p > critical_order(c.grid.n) ? c.solver.p : 1.0);
  write_text(dir / "functionals.json", dump(to_json(evaluate_functionals(d, p), d)));
  std::cout << "wrote " << (dir / "density.csv").string() << '\n';
  return kExitOk;
}

inline int run_evolve(const RunConfig& c) {
  const GridDensity d0 = initial_density(c);
  const Trajectory traj = c.solver.p == 1.0 ? solve_heat(d0, c.solver) : solve_porous(d0, c.solver);
  const fs::path dir = fs::path(c.output) / "trajectory";
  write_trajectory(traj, dir, json{{"config", to_json(c)}});
  write_text(dir / "trace.csv", trace_csv(functional_trace(traj, c.solver.p)));
  std::cout << "wrote " << traj.states.size() << " snapshots to " << dir.string() << '\n';
  return kExitOk;
}

inline std::string constants_csv(const std::vector<int>& dims, const std::vector<double>& orders) {
  auto cell = [](std::optional<double> v) { return v ? format_double(*v) : std::string(); };
  std::string out = "n,p,C,lambda,mu,gamma,K_GN,theta\n";
  for (int n : dims) {
    for (double p : orders) {
      require_admissible_order(n, p);
      std::optional<double> C, lambda, K, theta;
      double mu = 2.0;
      if (p != 1.0) {
        const auto b = barenblatt_params(n, p);
        C = b.C();
        lambda = b.lambda;
        mu = b.mu;
        if (const auto branch = gn_branch_for_order(n, p)) {
          const double q = gn_q(p);
          K = k_gn(n, q, *branch);
          theta = theta_gn(n, q, *branch);
        }
      } else {
        lambda = 0.0;
      }
      out += std::to_string(n) + ',' + format_double(p) + ',' + cell(C) + ',' + cell(lambda) + ',' +
             format_double(mu) + ',' + format_double(gamma_np(n, p)) + ',' + cell(K) + ',' + cell(theta) + '\n';
    }
  }
  return out;
}

inline int run_constants(const RunConfig& c, bool write_file) {
  const std::string csv = constants_csv(c.dims, c.orders);
  std::cout << csv;
  if (write_file) write_text(fs::path(c.output) / "constants.csv", csv);
  return kExitOk;
}

inline SuiteConfig suite_config(const RunConfig& c) {
  SuiteConfig s;
  s.checks = c.checks;
  s.dims = c.dims;
  s.orders = c.orders;
  s.cells = c.grid.cells;
  s.seed = c.seed;
  s.random_count = c.count;
  s.options.tol = c.tol;
  s.options.eq_tol = c.eq_tol;
  return s;
}

inline int run_verify(const RunConfig& c) {
  const SuiteReport report = run_suite(suite_config(c));
  const std::string csv = summary_csv(report);
  write_text(fs::path(c.output) / "verify_report.json", dump(to_json(report)));
  write_text(fs::path(c.output) / "verify_summary.csv", csv);
  std::cout << csv;
  return report.all_passed() ? kExitOk : kExitCheckFailed;
}

inline int run_report(const RunConfig& c) {
  if (c.inputs.empty()) throw Error("report needs at least one --input");
  std::string csv = "source,total,violations,passed\n";
  json runs = json::array();
  bool all = true;
  for (const auto& in : c.inputs) {
    fs::path path = in;
    if (fs::is_directory(path)) path /= "verify_report.json";
    json r;
    try {
      r = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
      throw Error("unreadable report " + path.string() + ": " + e.what());
    }
    if (!r.contains("total") || !r.contains("violations") || !r.contains("passed"))
      throw Error("not a verify report: " + path.string());
    const bool passed = r.at("passed").get<bool>();
    all = all && passed;
    runs.push_back({{"source", path.string()},
                    {"total", r.at("total")},
                    {"violations", r.at("violations")},
                    {"passed", passed},
                    {"checks", r.value("checks", json::array()).size()}});
    csv += path.string() + ',' + r.at("total").dump() + ',' + r.at("violations").dump() + ',' +
           (passed ? "true" : "false") + '\n';
  }
  write_text(fs::path(c.output) / "aggregate.json", dump(json{{"runs", runs}, {"passed", all}}));
  write_text(fs::path(c.output) / "aggregate.csv", csv);
  std::cout << csv;
  return all ? kExitOk : kExitCheckFailed;
}

}  // namespace detail

/// Parses argv, runs the subcommand and returns the process exit code:
/// 0 success / all checks pass, 1 a check failed, 2 usage or input error.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"entroflow: entropy and Fisher information inequalities along diffusion flows"};
  app.require_subcommand(0, 1);
  std::string config_path;
  std::optional<std::string> out_flag;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);

  struct Flags {
    int n = 1;
    double p = 1.0, sigma = 1.0, r_max = 0.0, t0 = 0.0, t_end = 0.0, dt_safety = 0.5, tol = 0.0, eq_tol = 0.0;
    int cells = 0, samples = 50, count = 0;
    std::string profile, input, scheme;
    std::vector<int> dims;
    std::vector<double> orders;
    std::vector<std::string> checks, inputs;
    std::uint64_t seed = 0;
  } f;

  auto out_opt = [&](CLI::App* sub) {
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { out_flag = v; }, "output directory");
  };

  auto* profile = app.add_subcommand("profile", "emit an extremal density and its functionals");
  profile->add_option("--kind", f.profile, "gaussian | barenblatt")->check(CLI::IsMember({"gaussian", "barenblatt"}));
  profile->add_option("--n", f.n, "dimension")->check(CLI::PositiveNumber);
  profile->add_option("--p", f.p, "order of the Barenblatt profile");
  profile->add_option("--sigma", f.sigma, "Gaussian variance parameter");
  profile->add_option("--r-max", f.r_max, "half width of the grid");
  profile->add_option("--grid", f.cells, "number of cells m")->check(CLI::PositiveNumber);
  out_opt(profile);

  auto* evolve = app.add_subcommand("evolve", "run the heat or porous-medium flow");
  evolve->add_option("--initial", f.profile, "gaussian | barenblatt | file")
      ->check(CLI::IsMember({"gaussian", "barenblatt", "file"}));
  evolve->add_option("--input", f.input, "density file stem for --initial file");
  evolve->add_option("--n", f.n, "dimension")->check(CLI::PositiveNumber);
  evolve->add_option("--p", f.p, "diffusion order (1 = heat)");
  evolve->add_option("--sigma", f.sigma, "Gaussian variance parameter");
  evolve->add_option("--r-max", f.r_max, "half width of the grid");
  evolve->add_option("--grid", f.cells, "number of cells m")->check(CLI::PositiveNumber);
  evolve->add_option("--t0", f.t0, "time label of the initial datum");
  evolve->add_option("--t-end", f.t_end, "last sample time");
  evolve->add_option("--samples", f.samples, "number of equispaced samples")->check(CLI::PositiveNumber);
  evolve->add_option("--scheme", f.scheme, "exact | fd")->check(CLI::IsMember({"exact", "fd"}));
  evolve->add_option("--dt-safety", f.dt_safety, "CFL safety factor");
  out_opt(evolve);

  auto* constants = app.add_subcommand("constants", "tabulate sharp constants");
  constants->add_option("--n", f.dims, "dimensions")->delimiter(',');
  constants->add_option("--p", f.orders, "orders")->delimiter(',');
  out_opt(constants);

  auto* verify = app.add_subcommand("verify", "run the inequality battery");
  verify->add_option("--check", f.checks, "check name or all")->delimiter(',');
  verify->add_option("--n", f.dims, "dimensions")->delimiter(',');
  verify->add_option("--p", f.orders, "orders")->delimiter(',');
  verify->add_option("--grid", f.cells, "number of cells m")->check(CLI::PositiveNumber);
  verify->add_option("--seed", f.seed, "random seed");
  verify->add_option("--tol", f.tol, "absolute slack floor");
  verify->add_option("--eq-tol", f.eq_tol, "relative equality tolerance");
  verify->add_option("--count", f.count, "random densities per check")->check(CLI::NonNegativeNumber);
  out_opt(verify);

  auto* report = app.add_subcommand("report", "aggregate verify reports");
  report->add_option("--input", f.inputs, "report files or run directories")->required();
  out_opt(report);

  if (argc <= 1) {
    err << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, err);
    return kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      json j;
      try {
        j = json::parse(read_text(config_path));
      } catch (const json::parse_error& e) {
        throw Error(std::string("unreadable config: ") + e.what());
      }
      cfg = run_config_from_json(j);
    }
    CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
    if (sub) cfg.command = command_from_string(sub->get_name());
    else if (config_path.empty()) {
      err << app.help();
      return kExitUsage;
    }
    auto given = [&](const char* name) {
      const CLI::Option* o = sub ? sub->get_option_no_throw(name) : nullptr;
      return o && o->count() > 0;
    };
    if (given("--n") && (cfg.command == Command::Profile || cfg.command == Command::Evolve)) cfg.grid.n = f.n;
    if (given("--n") && (cfg.command == Command::Constants || cfg.command == Command::Verify)) cfg.dims = f.dims;
    if (given("--p") && (cfg.command == Command::Profile || cfg.command == Command::Evolve)) cfg.solver.p = f.p;
    if (given("--p") && (cfg.command == Command::Constants || cfg.command == Command::Verify)) cfg.orders = f.orders;
    if (given("--kind") || given("--initial")) cfg.profile = f.profile;
    if (given("--input") && cfg.command == Command::Evolve) cfg.input = f.input;
    if (given("--input") && cfg.command == Command::Report) cfg.inputs = f.inputs;
    if (given("--sigma")) cfg.sigma = f.sigma;
    if (given("--r-max")) cfg.grid.r_max = f.r_max;
    if (given("--grid")) cfg.grid.cells = f.cells;
    if (given("--t0")) cfg.solver.t0 = f.t0;
    if (given("--scheme")) cfg.solver.scheme = scheme_from_string(f.scheme);
    if (given("--dt-safety")) cfg.solver.dt_safety = f.dt_safety;
    if (given("--check")) cfg.checks = f.checks;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--tol")) cfg.tol = f.tol;
    if (given("--eq-tol")) cfg.eq_tol = f.eq_tol;
    if (given("--count")) cfg.count = f.count;
    if (cfg.command == Command::Evolve) {
      if (given("--t-end") || given("--samples") || cfg.solver.t_samples.empty()) {
        const double t_end = given("--t-end") ? f.t_end : cfg.solver.t0 + 1.0;
        cfg.solver.t_samples = sample_times(cfg.solver.t0, t_end, f.samples);
      }
      if (!given("--scheme") && cfg.solver.p != 1.0) cfg.solver.scheme = Scheme::ExplicitFD;
    }
    if (cfg.command == Command::Constants && !given("--p") && config_path.empty()) cfg.orders = {1.5, 2.0, 3.0};
    const bool explicit_out = out_flag || std::getenv("ENTROFLOW_OUT") || !cfg.output.empty();
    cfg.output = resolve_output(out_flag, cfg.output);

    switch (cfg.command) {
      case Command::Profile: return detail::run_profile(cfg);
      case Command::Evolve: return detail::run_evolve(cfg);
      case Command::Constants: return detail::run_constants(cfg, explicit_out);
      case Command::Verify: return detail::run_verify(cfg);
      case Command::Report: return detail::run_report(cfg);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace entroflow
