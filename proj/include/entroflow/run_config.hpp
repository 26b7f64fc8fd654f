#pragma once

// Run configuration shared by every CLI subcommand, with a strict JSON form.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "entroflow/diffusion.hpp"
#include "entroflow/grid.hpp"

namespace entroflow {

using json = nlohmann::json;

enum class Command { Profile, Evolve, Constants, Verify, Report };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Profile: return "profile";
    case Command::Evolve: return "evolve";
    case Command::Constants: return "constants";
    case Command::Verify: return "verify";
    case Command::Report: return "report";
  }
  return "verify";
}

inline Command command_from_string(const std::string& s) {
  for (Command c : {Command::Profile, Command::Evolve, Command::Constants, Command::Verify, Command::Report})
    if (s == to_string(c)) return c;
  throw Error("unknown command '" + s + "'");
}

/// Grid request; geometry follows from n (Cartesian for n = 1, radial else).
/// r_max = 0 lets the producer choose the extent.
struct GridConfig {
  int n = 1;
  double r_max = 0.0;
  int cells = 4096;
  bool operator==(const GridConfig&) const = default;
};

struct RunConfig {
  Command command = Command::Verify;
  GridConfig grid;
  SolverConfig solver;
  /// profile / evolve: gaussian | barenblatt | file
  std::string profile = "gaussian";
  double sigma = 1.0;
  std::string input;
  std::vector<std::string> checks{"all"};
  std::vector<int> dims{1, 2, 3};
  std::vector<double> orders{0.9, 1.5, 2.0, 3.0};
  int count = 100;
  double tol = 1e-6;
  double eq_tol = 1e-3;
  std::uint64_t seed = 7;
  std::string output;
  std::vector<std::string> inputs;
};

inline bool operator==(const SolverConfig& a, const SolverConfig& b) {
  return a.p == b.p && a.dt_safety == b.dt_safety && a.t0 == b.t0 && a.t_samples == b.t_samples &&
         a.scheme == b.scheme && a.floor == b.floor && a.drift_tol == b.drift_tol && a.max_steps == b.max_steps;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.command == b.command && a.grid == b.grid && a.solver == b.solver && a.profile == b.profile &&
         a.sigma == b.sigma && a.input == b.input && a.checks == b.checks && a.dims == b.dims &&
         a.orders == b.orders && a.count == b.count && a.tol == b.tol && a.eq_tol == b.eq_tol &&
         a.seed == b.seed && a.output == b.output && a.inputs == b.inputs;
}

inline json to_json(const SolverConfig& s) {
  return json{{"p", s.p},
              {"dt_safety", s.dt_safety},
              {"t0", s.t0},
              {"t_samples", s.t_samples},
              {"scheme", to_string(s.scheme)},
              {"floor", s.floor},
              {"drift_tol", s.drift_tol},
              {"max_steps", s.max_steps}};
}

inline json to_json(const RunConfig& c) {
  return json{{"command", to_string(c.command)},
              {"grid", {{"n", c.grid.n}, {"r_max", c.grid.r_max}, {"cells", c.grid.cells}}},
              {"solver", to_json(c.solver)},
              {"profile", c.profile},
              {"sigma", c.sigma},
              {"input", c.input},
              {"checks", c.checks},
              {"dims", c.dims},
              {"orders", c.orders},
              {"count", c.count},
              {"tol", c.tol},
              {"eq_tol", c.eq_tol},
              {"seed", c.seed},
              {"output", c.output},
              {"inputs", c.inputs}};
}

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw Error("config schema violation: " + where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw Error("config schema violation: unknown key '" + where + it.key() + "'");
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("config schema violation: wrong type for '") + key + "'");
  }
}

}  // namespace detail

/// Missing keys keep their defaults; unknown keys and wrong types are errors.
inline RunConfig run_config_from_json(const json& j, RunConfig c = {}) {
  detail::reject_unknown_keys(j,
                              {"command", "grid", "solver", "profile", "sigma", "input", "checks", "dims", "orders",
                               "count", "tol", "eq_tol", "seed", "output", "inputs"},
                              "");
  if (j.contains("command")) {
    std::string s;
    detail::read_field(j, "command", s);
    c.command = command_from_string(s);
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    detail::reject_unknown_keys(g, {"n", "r_max", "cells"}, "grid.");
    detail::read_field(g, "n", c.grid.n);
    detail::read_field(g, "r_max", c.grid.r_max);
    detail::read_field(g, "cells", c.grid.cells);
  }
  if (j.contains("solver")) {
    const json& s = j.at("solver");
    detail::reject_unknown_keys(s, {"p", "dt_safety", "t0", "t_samples", "scheme", "floor", "drift_tol", "max_steps"},
                                "solver.");
    detail::read_field(s, "p", c.solver.p);
    detail::read_field(s, "dt_safety", c.solver.dt_safety);
    detail::read_field(s, "t0", c.solver.t0);
    detail::read_field(s, "t_samples", c.solver.t_samples);
    if (s.contains("scheme")) {
      std::string name;
      detail::read_field(s, "scheme", name);
      c.solver.scheme = scheme_from_string(name);
    }
    detail::read_field(s, "floor", c.solver.floor);
    detail::read_field(s, "drift_tol", c.solver.drift_tol);
    detail::read_field(s, "max_steps", c.solver.max_steps);
  }
  detail::read_field(j, "profile", c.profile);
  detail::read_field(j, "sigma", c.sigma);
  detail::read_field(j, "input", c.input);
  detail::read_field(j, "checks", c.checks);
  detail::read_field(j, "dims", c.dims);
  detail::read_field(j, "orders", c.orders);
  detail::read_field(j, "count", c.count);
  detail::read_field(j, "tol", c.tol);
  detail::read_field(j, "eq_tol", c.eq_tol);
  detail::read_field(j, "seed", c.seed);
  detail::read_field(j, "output", c.output);
  detail::read_field(j, "inputs", c.inputs);
  return c;
}

}  // namespace entroflow
