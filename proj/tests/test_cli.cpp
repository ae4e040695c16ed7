#include <gtest/gtest.h>
#include <sys/wait.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bmc/bmc.hpp"

using namespace bmc;
namespace fs = std::filesystem;

namespace {

const std::string kSource = BMC_SOURCE_DIR;
const std::string kTool = BMCVERIFY_PATH;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bmc_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string key_path_of(const std::string& text) {
  try {
    // Task keys are validated when tasks are prepared, before any runs.
    run_scenario(parse_scenario_text(text));
  } catch (const ConfigError& e) {
    return e.key_path() + " | " + e.what();
  }
  return "no error";
}

int run_tool(const std::string& args, std::string* out = nullptr) {
  const fs::path log = scratch("stdout.txt");
  const int status = std::system((kTool + " " + args + " > " + log.string() + " 2>&1").c_str());
  if (out) *out = read_file(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kSmall = R"({
  "scenario": "small",
  "surface": "flat-torus:px=1,py=1",
  "resolution": 24,
  "constants": {"h0": 0, "seed": 3},
  "tasks": [
    {"type": "curvature"},
    {"id": "mod", "type": "modulus", "annulus": "right:H=2,W=1", "resolution": 16},
    {"id": "beta", "type": "isoperimetric", "surface": "flat-disc:r=1", "polygon_sides": 512}
  ]
})";

}  // namespace

TEST(Config, UnknownKeyNamesPath) {
  const auto e = key_path_of(R"({"constants": {"seed": 1, "bta": 3}, "tasks": [{"type": "curvature"}]})");
  EXPECT_EQ(e.rfind("constants.bta | ", 0), 0u) << e;
  EXPECT_NE(key_path_of(R"({"surface": "round-sphere", "constants": {"seed": 1}, "tasks": [{"type": "net", "deltaz": [1]}]})").find("deltaz"),
            std::string::npos);
}

TEST(Config, ParseErrorReportsLineAndColumn) {
  const auto e = key_path_of("{\n  \"constants\": {seed: 1}\n}");
  EXPECT_NE(e.find("line 2, column"), std::string::npos) << e;
}

TEST(Config, NegativeH0) {
  const auto e = key_path_of(R"({"surface": "round-sphere", "constants": {"h0": -1, "seed": 1}, "tasks": [{"type": "curvature"}]})");
  EXPECT_EQ(e.rfind("constants.h0 | ", 0), 0u) << e;
}

TEST(Config, RequiredAndInvalidFields) {
  EXPECT_NE(key_path_of(R"({"constants": {}, "tasks": [{"type": "curvature"}]})").find("constants.seed"),
            std::string::npos);
  EXPECT_NE(key_path_of(R"({"constants": {"seed": 1}, "tasks": []})").find("tasks"), std::string::npos);
  EXPECT_NE(key_path_of(R"({"constants": {"seed": 1}, "tasks": [{"type": "bogus"}]})").find("bogus"),
            std::string::npos);
  EXPECT_NE(key_path_of(R"({"constants": {"seed": 1}, "tasks": [{"id": "a", "type": "net"}, {"id": "a", "type": "net"}]})")
                .find("duplicate"),
            std::string::npos);
  EXPECT_NE(key_path_of(R"({"constants": {"seed": 1}, "output": {"format": "xml"}, "tasks": [{"type": "net"}]})")
                .find("output.format"),
            std::string::npos);
}

TEST(Config, Overrides) {
  const auto c = parse_scenario_text(kSmall, {std::uint64_t{99}, std::string("elsewhere"), 2.0});
  EXPECT_EQ(c.constants.seed, 99u);
  EXPECT_EQ(c.out_dir, "elsewhere");
  EXPECT_DOUBLE_EQ(c.constants.tol("modulus"), 0.02);
}

TEST(Run, SmallScenarioPasses) {
  const auto rep = run_scenario(parse_scenario_text(kSmall));
  EXPECT_EQ(rep.exit_code, 0);
  ASSERT_EQ(rep.tasks.size(), 3u);
  EXPECT_EQ(rep.tasks[0].id, "curvature-1");
  for (const auto& t : rep.tasks) EXPECT_EQ(t.verdict, "pass") << t.id << " " << t.error;
  EXPECT_EQ(rep.json["tool"], kToolName);
  EXPECT_EQ(rep.json["summary"]["exit_code"], 0);
  EXPECT_EQ(rep.json["resolved"]["seed"], 3);
}

TEST(Run, VerdictsAndExitCodes) {
  const auto na = run_scenario(parse_scenario_text(
      R"({"surface": "round-sphere:r=1", "resolution": 16, "constants": {"h0": 1, "seed": 1}, "tasks": [{"type": "curvature"}]})"));
  EXPECT_EQ(na.tasks[0].verdict, "not-applicable");
  EXPECT_EQ(na.exit_code, 0);
  const auto fail = run_scenario(parse_scenario_text(
      R"({"constants": {"seed": 1}, "tasks": [{"type": "modulus", "annulus": "right:H=2,W=1", "resolution": 12, "expected": 3}]})"));
  EXPECT_EQ(fail.tasks[0].verdict, "fail");
  EXPECT_EQ(fail.exit_code, 1);
}

TEST(Run, ByteIdenticalReports) {
  const auto a = scratch("rerun_a"), b = scratch("rerun_b");
  const auto cfg = parse_scenario_text(kSmall);
  emit_report(run_scenario(cfg), a.string(), "json");
  emit_report(run_scenario(cfg, true), b.string(), "json");
  const auto ra = read_file(a / "report.json");
  EXPECT_FALSE(ra.empty());
  EXPECT_EQ(ra, read_file(b / "report.json"));
  EXPECT_FALSE(fs::exists(a / "timing.json"));
}

TEST(Run, CsvBundle) {
  const auto dir = scratch("bundle");
  const auto cfg = parse_scenario_text(R"({
    "family": {"name": "dumbbell", "rho": [0.2, 0.15, 0.1]},
    "constants": {"seed": 2},
    "tasks": [{"id": "lim", "type": "limit", "samples": 16, "waist_samples": 4, "resolution": 16}],
    "output": {"format": "csv-bundle", "timing": true}
  })");
  const auto rep = run_scenario(cfg);
  const auto files = emit_report(rep, dir.string(), cfg.format);
  int matrices = 0;
  for (const auto& f : files) matrices += fs::path(f).filename().string().rfind("matrix_", 0) == 0;
  EXPECT_EQ(matrices, 3);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "timing.json"));
  const auto first = fs::path(files[1]);
  std::ifstream in(first);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 16);
}

TEST(Tool, Version) {
  std::string out;
  EXPECT_EQ(run_tool("--version", &out), 0);
  EXPECT_NE(out.find(kVersion), std::string::npos);
}

TEST(Tool, BadH0ExitsTwo) {
  std::string out;
  EXPECT_EQ(run_tool("run " + kSource + "/scenarios/bad-h0.json", &out), 2);
  EXPECT_NE(out.find("constants.h0"), std::string::npos) << out;
}

TEST(Tool, UsageErrorsExitTwo) {
  EXPECT_EQ(run_tool("run /nonexistent/scenario.json"), 2);
  EXPECT_EQ(run_tool("frobnicate"), 2);
  EXPECT_EQ(run_tool("modulus --annulus oval"), 2);
}

TEST(Tool, SingleCheckSubcommands) {
  std::string out;
  EXPECT_EQ(run_tool("modulus --annulus right:H=2,W=1 --resolution 16", &out), 0);
  EXPECT_NE(out.find("\"verdict\": \"pass\""), std::string::npos) << out;
  EXPECT_EQ(run_tool("verify-curvature --surface flat-torus:px=1,py=1 --h0 0 --resolution 16"), 0);
  EXPECT_EQ(run_tool("modulus --annulus right:H=2,W=1 --resolution 16 --expected 3"), 1);
}

TEST(Tool, SphereBaseline) {
  const auto dir = scratch("baseline");
  std::string out;
  EXPECT_EQ(run_tool("--out " + dir.string() + " run " + kSource + "/scenarios/sphere-baseline.json", &out), 0) << out;
  const auto report = Json::parse(read_file(dir / "report.json"));
  EXPECT_EQ(report["summary"]["exit_code"], 0);
  for (const auto& t : report["tasks"]) EXPECT_EQ(t["verdict"], "pass") << t["id"];
}

TEST(Tool, UnwritableOutput) {
  const auto blocker = scratch("blocker");
  std::ofstream(blocker) << "file";
  const auto small = scratch("small.json");
  std::ofstream(small) << kSmall;
  EXPECT_EQ(run_tool("--out " + (blocker / "sub").string() + " run " + small.string()), 2);
  EXPECT_EQ(run_tool("--out " + (blocker / "sub").string() + " modulus --annulus right:H=1,W=1 --resolution 12"), 2);
}
