#pragma once

// File formats: density CSV + JSON header, functional reports, trajectory
// directories with a diagnostics manifest.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "entroflow/diffusion.hpp"
#include "entroflow/functionals.hpp"
#include "entroflow/grid.hpp"

namespace entroflow {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json to_json(const GridSpec& s) {
  json j{{"geometry", to_string(s.geometry)}, {"n", s.n}, {"m", s.cells}};
  if (s.geometry == Geometry::RadialND) {
    j["r_max"] = s.upper;
  } else {
    j["x_min"] = s.lower;
    j["x_max"] = s.upper;
  }
  return j;
}

inline GridSpec grid_spec_from_json(const json& j) {
  try {
    const Geometry g = geometry_from_string(j.at("geometry").get<std::string>());
    const int m = j.at("m").get<int>();
    if (g == Geometry::RadialND) return GridSpec::radial(j.at("n").get<int>(), j.at("r_max").get<double>(), m);
    return GridSpec::cartesian(j.at("x_min").get<double>(), j.at("x_max").get<double>(), m);
  } catch (const json::exception& e) {
    throw Error(std::string("invalid grid header: ") + e.what());
  }
}

inline json density_header(const GridDensity& d) {
  json j = to_json(d.spec());
  j["mass"] = mass(d);
  j["truncated_tail_mass"] = d.truncated_tail_mass;
  j["warnings"] = d.warnings;
  return j;
}

inline std::string density_csv(const GridDensity& d) {
  std::string out = "coordinate,value\n";
  const auto x = d.grid().coordinates();
  for (std::size_t i = 0; i < d.size(); ++i) out += format_double(x[i]) + ',' + format_double(d[i]) + '\n';
  return out;
}

inline void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

inline std::string read_text(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline std::string dump(const json& j) { return j.dump(2) + '\n'; }

/// Writes `<stem>.csv` and `<stem>.json`.
inline void write_density(const GridDensity& d, const fs::path& stem) {
  write_text(fs::path(stem).replace_extension(".csv"), density_csv(d));
  write_text(fs::path(stem).replace_extension(".json"), dump(density_header(d)));
}

/// Reads a density from `<stem>.csv`, taking the grid from `<stem>.json`.
inline GridDensity read_density(const fs::path& stem) {
  json header;
  try {
    header = json::parse(read_text(fs::path(stem).replace_extension(".json")));
  } catch (const json::parse_error& e) {
    throw Error(std::string("invalid density header: ") + e.what());
  }
  const GridSpec spec = grid_spec_from_json(header);
  std::istringstream csv(read_text(fs::path(stem).replace_extension(".csv")));
  std::string line;
  if (!std::getline(csv, line) || line != "coordinate,value") throw Error("density CSV must start with coordinate,value");
  std::vector<double> values;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error("malformed density CSV row: " + line);
    try {
      values.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error("malformed density CSV row: " + line);
    }
  }
  GridDensity d(spec, std::move(values));
  d.truncated_tail_mass = header.value("truncated_tail_mass", 0.0);
  d.warnings = header.value("warnings", std::vector<std::string>{});
  return d;
}

inline json to_json(const FunctionalReport& r) {
  return json{{"n", r.n},   {"p", r.p},     {"E", r.E},     {"H", r.H},         {"H_p", r.H_p},
              {"N", r.N},   {"N_p", r.N_p}, {"I", r.I},     {"I_p", r.I_p},     {"Lambda", r.Lambda},
              {"mass", r.mass}, {"power_integral", r.power_integral}};
}

inline json to_json(const FunctionalReport& r, const GridDensity& d) {
  json j = to_json(r);
  j["grid"] = to_json(d.spec());
  return j;
}

inline json to_json(const SampleDiagnostics& s) {
  return json{{"time", s.time},
              {"mass", s.mass},
              {"mean", s.mean},
              {"second_moment", s.second_moment},
              {"power_integral", s.power_integral},
              {"dE_dt", std::isfinite(s.dE_dt) ? json(s.dE_dt) : json(nullptr)},
              {"drift", s.drift},
              {"steps", s.steps}};
}

/// Writes snapshot_XXXX.csv/.json per sample and manifest.json.
inline void write_trajectory(const Trajectory& traj, const fs::path& dir, const json& extra = json::object()) {
  fs::create_directories(dir);
  json samples = json::array();
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%04zu", k);
    write_density(traj.states[k], dir / name);
    json s = to_json(traj.diagnostics[k]);
    s["file"] = std::string(name) + ".csv";
    samples.push_back(s);
  }
  json manifest{{"p", traj.p},
                {"t0", traj.t0},
                {"scheme", to_string(traj.scheme)},
                {"grid", to_json(traj.states.front().spec())},
                {"samples", samples}};
  for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
  write_text(dir / "manifest.json", dump(manifest));
}

}  // namespace entroflow
