#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>

#include <json.hpp>

#include <rockcan/io.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = ROCKCAN_CLI_PATH;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run(const std::string& args) {
  CliResult r;
  const std::string cmd = cli + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "rockcan_cli_test" / name;
  fs::remove_all(d);
  return d;
}

json load(const fs::path& p) { return json::parse(rockcan::read_file(p)); }

}  // namespace

TEST(Cli, TurnFormulaOnly) {
  const auto out = scratch("turn");
  const CliResult r = run("turn --formula-only --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = load(out / "turn.json");
  EXPECT_NEAR(j["delta_psi"].get<double>(), 3.643, 1e-3);
  EXPECT_NEAR(j["mu_min"].get<double>(), 0.508, 1e-3);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  ASSERT_EQ(run("turn --formula-only --degrees --out " + out.string()).code, 0);
  EXPECT_NEAR(load(out / "turn.json")["delta_psi"].get<double>(), 208.7, 0.1);
}

TEST(Cli, SimulateFixture) {
  const auto out = scratch("simulate");
  const CliResult r = run("simulate --tspan 0:3 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json ev = load(out / "events.json");
  ASSERT_GE(ev["bounces"].size(), 3u);
  for (const auto& b : ev["bounces"]) EXPECT_NEAR(b["abs_delta_psi"].get<double>() * 180 / std::numbers::pi, 209, 3);
  EXPECT_LT(ev["energy_drift_relative"].get<double>(), 1e-8);
  const std::string csv = rockcan::read_file(out / "trajectory.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,psi,theta,phi,Psi,Theta,Phi");
  const json m = load(out / "manifest.json");
  EXPECT_EQ(m["outputs"]["trajectory.csv"], rockcan::sha256_hex(csv));
  EXPECT_EQ(m["config"]["subcommand"], "simulate");
  EXPECT_EQ(m["fixtures"].size(), 1u);
}

TEST(Cli, DeterministicAndRerunnable) {
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  ASSERT_EQ(run("simulate --tspan 0:1 --out " + a.string()).code, 0);
  ASSERT_EQ(run("simulate --tspan 0:1 --out " + b.string()).code, 0);
  const std::string ta = rockcan::read_file(a / "trajectory.csv");
  EXPECT_EQ(ta, rockcan::read_file(b / "trajectory.csv"));
  ASSERT_EQ(run("rerun " + (a / "manifest.json").string() + " --out " + c.string()).code, 0);
  EXPECT_EQ(ta, rockcan::read_file(c / "trajectory.csv"));
  EXPECT_EQ(load(a / "manifest.json")["outputs"], load(c / "manifest.json")["outputs"]);
}

TEST(Cli, ZeroRateSweepIsFlatFall) {
  const auto out = scratch("sweep");
  const CliResult r = run("sweep --lo 0 --hi 0 --n 5 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = load(out / "sweep.json");
  EXPECT_EQ(j["total"].get<int>(), 25);
  EXPECT_EQ(j["flat_fall"].get<int>(), 25);
}

TEST(Cli, OtherSubcommandsWriteReports) {
  const std::array<std::pair<const char*, const char*>, 8> cases{{{"reduced --tspan 0:1", "reduced.json"},
                                                                  {"frictionless --tspan 0:1", "frictionless.json"},
                                                                  {"matched", "matched.json"},
                                                                  {"equilibria", "equilibria.json"},
                                                                  {"contact --tspan 0:2", "contact.json"},
                                                                  {"friction --tspan 0:2", "friction.json"},
                                                                  {"hamiltonian --grid 5", "hamiltonian.json"},
                                                                  {"turn --tspan 0:2", "turn.json"}}};
  for (const auto& [args, file] : cases) {
    const auto out = scratch(file);
    const CliResult r = run(std::string(args) + " --out " + out.string());
    EXPECT_EQ(r.code, 0) << args << "\n" << r.out;
    EXPECT_TRUE(fs::exists(out / file)) << args;
    EXPECT_TRUE(fs::exists(out / "manifest.json")) << args;
  }
  const auto out = scratch("matched_csv");
  ASSERT_EQ(run("matched --samples 11 --out " + out.string()).code, 0);
  const std::string csv = rockcan::read_file(out / "matched.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,phi_outer,phi_inner,phi_uniform,phi_numeric");
}

TEST(Cli, ExitCodes) {
  const auto out = scratch("errors");
  EXPECT_EQ(run("simulate --can no_such_can.toml --out " + out.string()).code, 2);
  EXPECT_EQ(run("simulate --tspan 3:1 --out " + out.string()).code, 2);
  EXPECT_EQ(run("simulate --ic 1,2,3 --out " + out.string()).code, 2);
  const fs::path bad = out / "bad.toml";
  rockcan::write_text(bad, "[can]\na = 0.7\nc = oops\n");
  EXPECT_EQ(run("simulate --can " + bad.string() + " --out " + out.string()).code, 2);
  EXPECT_NE(run("simulate --rate-clock sideways").code, 0);

  // Starting flat is a numerical failure, reported as typed JSON.
  const CliResult r = run("simulate --ic 0,0.1,0,0,0,0.1 --out " + out.string());
  EXPECT_EQ(r.code, 3);
  const json err = load(out / "error.json");
  EXPECT_EQ(err["kind"], "singularity");
}

TEST(Cli, FixtureDirectoryOverride) {
  const auto dir = scratch("fixtures");
  fs::create_directories(dir);
  fs::copy_file(fs::path(ROCKCAN_FIXTURE_DIR) / "reference_can.toml", dir / "other.toml");
  const auto out = scratch("override_out");
  const std::string env = "ROCKCAN_FIXTURES=" + dir.string() + " ";
  const std::string cmd = env + cli + " turn --formula-only --can other.toml --out " + out.string() + " >/dev/null 2>&1";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(out / "turn.json"));
}
