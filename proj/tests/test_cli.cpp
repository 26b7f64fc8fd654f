#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "entroflow/cli.hpp"

using namespace entroflow;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "entroflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  auto* old = std::cout.rdbuf(out.rdbuf());
  const int code = parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), err);
  std::cout.rdbuf(old);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("entroflow_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("usage and input errors exit with 2") {
  const auto none = run({});
  CHECK(none.code == 2);
  CHECK_THAT(none.err, ContainsSubstring("Usage"));
  CHECK(run({"verify", "--bogus"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"constants", "--n", "3", "--p", "0.5"}).code == 2);
  const auto dir = scratch("errors");
  write_text(dir / "broken.json", "{ not json");
  CHECK(run({"--config", (dir / "broken.json").string(), "verify"}).code == 2);
  write_text(dir / "unknown.json", R"({"command": "verify", "colour": "red"})");
  const auto bad = run({"--config", (dir / "unknown.json").string(), "verify"});
  CHECK(bad.code == 2);
  CHECK_THAT(bad.err, ContainsSubstring("schema violation"));
  CHECK(run({"--config", (dir / "missing.json").string(), "verify"}).code == 2);
}

TEST_CASE("constants table") {
  const auto r = run({"constants", "--n", "1", "--p", "2"});
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("n,p,C,lambda,mu,gamma,K_GN,theta"));
  CHECK_THAT(r.out, ContainsSubstring("1,2,0.3605"));
}

TEST_CASE("verify writes reports and reflects failures in the exit code") {
  const auto dir = scratch("verify");
  const auto ok = run({"verify", "--check", "isoperimetric", "--n", "1", "--out", dir.string()});
  CHECK(ok.code == 0);
  CHECK(fs::exists(dir / "verify_report.json"));
  CHECK(fs::exists(dir / "verify_summary.csv"));
  const auto fail = run({"verify", "--check", "isoperimetric_p", "--n", "1", "--p", "2", "--tol", "0", "--eq-tol",
                         "1e-12", "--count", "0", "--out", (dir / "strict").string()});
  CHECK(fail.code == 1);
  const auto agg = run({"report", "--input", dir.string(), "--input", (dir / "strict").string(), "--out",
                        (dir / "agg").string()});
  CHECK(agg.code == 1);
  CHECK(fs::exists(dir / "agg" / "aggregate.csv"));
  CHECK(run({"report", "--input", dir.string(), "--out", (dir / "agg2").string()}).code == 0);
}

TEST_CASE("verify output is byte-identical across runs") {
  const auto dir = scratch("determinism");
  const std::vector<std::string> common{"verify", "--check", "moment_fisher,gn", "--n", "1,2", "--p", "2",
                                        "--grid", "1024", "--count", "5", "--seed", "7"};
  auto a = common, b = common;
  a.insert(a.end(), {"--out", (dir / "a").string()});
  b.insert(b.end(), {"--out", (dir / "b").string()});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(read_text(dir / "a" / "verify_report.json") == read_text(dir / "b" / "verify_report.json"));
  CHECK(read_text(dir / "a" / "verify_summary.csv") == read_text(dir / "b" / "verify_summary.csv"));
}

TEST_CASE("flags override the config file, which overrides defaults") {
  const auto dir = scratch("precedence");
  write_text(dir / "cfg.json", dump(json{{"seed", 3},
                                         {"count", 2},
                                         {"checks", {"nash"}},
                                         {"dims", {1}},
                                         {"grid", {{"cells", 512}}},
                                         {"output", (dir / "from_config").string()}}));
  ::unsetenv("ENTROFLOW_OUT");
  REQUIRE(run({"--config", (dir / "cfg.json").string(), "verify", "--seed", "5"}).code == 0);
  const auto report = json::parse(read_text(dir / "from_config" / "verify_report.json"));
  CHECK(report.at("config").at("seed") == 5);
  CHECK(report.at("config").at("random_count") == 2);
  CHECK(report.at("config").at("cells") == 512);

  ::setenv("ENTROFLOW_OUT", (dir / "from_env").string().c_str(), 1);
  REQUIRE(run({"--config", (dir / "cfg.json").string(), "verify"}).code == 0);
  CHECK(fs::exists(dir / "from_env" / "verify_report.json"));
  REQUIRE(run({"--config", (dir / "cfg.json").string(), "verify", "--out", (dir / "from_flag").string()}).code == 0);
  CHECK(fs::exists(dir / "from_flag" / "verify_report.json"));
  ::unsetenv("ENTROFLOW_OUT");
}

TEST_CASE("run configuration round-trips through JSON") {
  RunConfig c;
  c.command = Command::Evolve;
  c.grid = {3, 9.5, 777};
  c.solver.p = 0.9;
  c.solver.t0 = 1.0;
  c.solver.t_samples = {1.1, 1.7, 2.0};
  c.solver.scheme = Scheme::ExplicitFD;
  c.solver.floor = 1e-13;
  c.profile = "barenblatt";
  c.sigma = 0.3;
  c.checks = {"gn", "nash"};
  c.dims = {2};
  c.orders = {1.25, 0.1 + 0.2};
  c.seed = 123456789012345ULL;
  c.output = "somewhere";
  c.inputs = {"a", "b"};
  const json j = to_json(c);
  CHECK(run_config_from_json(j) == c);
  CHECK(run_config_from_json(json::parse(j.dump())) == c);
  CHECK_THROWS_WITH(run_config_from_json(json{{"grid", {{"cells", "many"}}}}), ContainsSubstring("wrong type"));
}

TEST_CASE("profile and evolve write readable files") {
  const auto dir = scratch("files");
  REQUIRE(run({"profile", "--kind", "barenblatt", "--n", "1", "--p", "2", "--grid", "512", "--out", dir.string()})
              .code == 0);
  const auto d = read_density(dir / "profile" / "density");
  const auto expected = barenblatt_profile(1, 2.0, d.spec());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == expected[i]);
  const auto functionals = json::parse(read_text(dir / "profile" / "functionals.json"));
  CHECK(functionals.at("grid").at("m") == 512);
  CHECK(functionals.contains("Lambda"));

  REQUIRE(run({"evolve", "--initial", "file", "--input", (dir / "profile" / "density").string(), "--p", "2",
               "--t0", "1", "--t-end", "1.2", "--samples", "4", "--out", dir.string()})
              .code == 0);
  const auto manifest = json::parse(read_text(dir / "trajectory" / "manifest.json"));
  CHECK(manifest.at("samples").size() == 4);
  CHECK(manifest.at("scheme") == "fd");
  CHECK(fs::exists(dir / "trajectory" / "snapshot_0003.csv"));
  CHECK(fs::exists(dir / "trajectory" / "trace.csv"));
  CHECK(run({"evolve", "--initial", "barenblatt", "--p", "2", "--out", dir.string()}).code == 2);
}
