// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "bmc/bmc.hpp"

using namespace bmc;
namespace fs = std::filesystem;

namespace {

const std::string kSource = BMC_SOURCE_DIR;

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double val(const Json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

VerificationReport run_text(const std::string& text) { return run_scenario(parse_scenario_text(text)); }

const TaskRecord& task(const VerificationReport& rep, const std::string& id) {
  for (const auto& t : rep.tasks)
    if (t.id == id) return t;
  throw std::runtime_error("no task " + id);
}

// Verdict must be pass; otherwise the task error or verdict becomes the detail.
void expect_pass(Outcome& o, const TaskRecord& t) {
  o.check(t.verdict == "pass", t.id + " verdict " + t.verdict + (t.error.empty() ? "" : " (" + t.error + ")"));
}

int failures = 0;

void criterion(int n, const std::string& desc, double budget, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.check(secs < budget, "runtime " + fmt(secs) + " s over budget " + fmt(budget) + " s");
  if (!o.ok) ++failures;
  std::printf("%s %d %s (%.1f s)%s%s\n", o.ok ? "PASS" : "FAIL", n, desc.c_str(), secs,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

// 1 -------------------------------------------------------------------------
Outcome curvature() {
  Outcome o;
  for (const auto& [spec, h0, K0] : {std::tuple{"round-sphere:r=1", 2.0, 1.0}, std::tuple{"flat-torus:px=1,py=1", 0.0, 0.0}}) {
    const auto rep = run_text(R"({"surface": ")" + std::string(spec) + R"(", "resolution": 64, "constants": {"h0": )" +
                              fmt(h0) + R"(, "seed": 1}, "tasks": [{"id": "k", "type": "curvature"}]})");
    const auto& t = task(rep, "k");
    expect_pass(o, t);
    o.check(std::abs(val(t.results["K0"]) - K0) < 1e-12, std::string(spec) + " K0 " + fmt(val(t.results["K0"])));
    const double maxK = val(t.results["max_K"]);
    o.check(maxK <= K0 + 0.05 * (K0 + 1.0), std::string(spec) + " max K " + fmt(maxK));
    o.check(t.seconds < 10.0, std::string(spec) + " took " + fmt(t.seconds) + " s");
    o.detail += (o.detail.empty() ? "" : ", ") + std::string(spec) + " max K " + fmt(maxK);
  }
  return o;
}

// 2 -------------------------------------------------------------------------
Outcome jacobi() {
  Outcome o;
  const auto rep = run_text(R"({"surface": "round-sphere:r=1", "constants": {"h0": 2, "seed": 1},
    "tasks": [{"id": "j", "type": "jacobi", "directions": 8, "step": 0.001}]})");
  const auto& t = task(rep, "j");
  expect_pass(o, t);
  o.check(std::abs(val(t.inputs["radius"]) - kPi / 3.0) < 1e-12, "radius " + fmt(val(t.inputs["radius"])));
  o.check(t.results["radial_samples"].get<int>() >= 1000, "too few radial samples");
  o.check(t.results["increasing"].get<bool>(), "f not increasing");
  o.check(t.results["above_half"].get<bool>(), "f(r) <= r/2");
  const double err = val(t.results["max_closed_form_error"]);
  o.check(err <= 1e-6, "sin r error " + fmt(err));
  if (o.ok) o.detail = "max |f - sin r| " + fmt(err);
  return o;
}

// 3 -------------------------------------------------------------------------
Outcome schwarz() {
  Outcome o;
  const auto rep = run_text(R"({"surface": "round-sphere:r=1", "constants": {"h0": 2, "seed": 1}, "tasks": [
    {"id": "sphere", "type": "schwarz", "grid": 200},
    {"id": "plane", "type": "schwarz", "surface": "flat-disc:r=1", "k0": 0, "grid": 200}]})");
  for (const char* id : {"sphere", "plane"}) {
    const auto& t = task(rep, id);
    expect_pass(o, t);
    const double k = val(t.results["max_Ktilde"]);
    o.check(k <= -1.0 + 1e-3, std::string(id) + " max K~ " + fmt(k));
    o.detail += (o.detail.empty() ? "" : ", ") + std::string(id) + " max K~ " + fmt(k);
  }
  return o;
}

// 4 -------------------------------------------------------------------------
Outcome isoperimetric() {
  Outcome o;
  const auto v0 = isoperimetric_v0(AmbientSpace::flat_torus({1.0, 1.0, 1.0}));
  o.check(v0 && *v0 == 1.0 / (8.0 * kPi), "torus v0 " + (v0 ? fmt(*v0) : std::string("none")));
  const auto rep = run_text(R"({"surface": "flat-disc:r=1", "constants": {"seed": 1},
    "tasks": [{"id": "b", "type": "isoperimetric", "polygon_sides": 4096}]})");
  const auto& t = task(rep, "b");
  expect_pass(o, t);
  const double beta = val(t.results["max_beta_empirical"]);
  const double oracle = 1.0 / (2.0 * std::sqrt(kPi));
  o.check(std::abs(beta - oracle) <= 1e-6, "disc beta " + fmt(beta));
  if (o.ok) o.detail = "v0 = 1/(8 pi), disc beta " + fmt(beta);
  return o;
}

// 5 -------------------------------------------------------------------------
Outcome monotonicity() {
  Outcome o;
  for (const auto& [spec, h0] : {std::pair{"round-sphere:r=1", 2.0}, std::pair{"flat-torus:px=1,py=1", 0.0},
                                 std::pair{"dumbbell:rho=0.1", 8.0}}) {
    const auto rep = run_text(R"({"surface": ")" + std::string(spec) + R"(", "resolution": 64, "constants": {"h0": )" +
                              fmt(h0) + R"(, "beta": 10, "seed": 5},
      "tasks": [{"id": "m", "type": "monotonicity", "centers": 50, "eps": [0.05, 0.1]}]})");
    const auto& t = task(rep, "m");
    expect_pass(o, t);
    o.check(std::abs(val(t.results["constants"]["c"]) - 1.0 / 1600.0) < 1e-15, std::string(spec) + " c");
    double worst = kInf;
    for (const auto& row : t.results["checks"]) {
      o.check(row["failures"].get<int>() == 0, std::string(spec) + " failures at eps " + fmt(val(row["eps"])));
      worst = std::min(worst, val(row["min_area"]) / (val(row["eps"]) * val(row["eps"])));
    }
    o.detail += (o.detail.empty() ? "" : ", ") + std::string(spec) + " min area/eps^2 " + fmt(worst);
  }
  return o;
}

// 6 -------------------------------------------------------------------------
Outcome nets() {
  Outcome o;
  const auto rep = run_text(R"({"surface": "flat-torus:px=1,py=1", "resolution": 64, "constants": {"h0": 0, "seed": 3},
    "tasks": [{"id": "n", "type": "net", "deltas": [0.2, 0.1, 0.05]}]})");
  const auto& t = task(rep, "n");
  expect_pass(o, t);
  std::string counts;
  for (const auto& row : t.results["nets"]) {
    const double d = val(row["delta"]);
    const double N = row["N"].get<double>();
    // Independent packing/covering bracket for area 1.
    o.check(N >= 1.0 / (kPi * d * d) && N <= 4.0 / (kPi * d * d), "N " + fmt(N) + " outside packing at " + fmt(d));
    if (row.contains("lower_degenerate") && !row["lower_degenerate"].get<bool>())
      o.check(row["inside_formula"].get<bool>(), "N outside formula bracket at " + fmt(d));
    counts += (counts.empty() ? "" : ", ") + fmt(d) + ":" + fmt(N);
  }
  if (o.ok) o.detail = "N " + counts;
  return o;
}

// 7 -------------------------------------------------------------------------
Outcome modulus() {
  Outcome o;
  const auto rep = run_text(R"({"constants": {"seed": 1}, "tasks": [
    {"id": "right", "type": "modulus", "annulus": "right:H=2,W=1", "resolution": 64},
    {"id": "round", "type": "modulus", "annulus": "round:r=1,rho=0.25", "resolution": 64, "tolerance": 0.02}]})");
  const auto& r = task(rep, "right");
  expect_pass(o, r);
  const double m = val(r.results["modulus"]), len = val(r.results["ahlfors"]["length"]);
  const double slack = val(r.results["ahlfors"]["slack"]);
  o.check(std::abs(m - 2.0) <= 0.02, "right modulus " + fmt(m));
  o.check(std::abs(len - 1.0) <= 0.01, "Ahlfors length " + fmt(len));
  o.check(slack >= -0.02, "Ahlfors slack " + fmt(slack));
  const auto& c = task(rep, "round");
  expect_pass(o, c);
  const double mr = val(c.results["modulus"]), exact = std::log(4.0) / (2.0 * kPi);
  o.check(std::abs(mr - exact) <= 0.02 * exact, "round modulus " + fmt(mr));
  if (o.ok) o.detail = "right " + fmt(m) + ", length " + fmt(len) + ", round " + fmt(mr) + " vs " + fmt(exact);
  return o;
}

// 8 -------------------------------------------------------------------------
Outcome lifting() {
  Outcome o;
  const auto rep = run_text(R"({"constants": {"seed": 1}, "tasks": [
    {"id": "cap", "type": "lift", "disc": "sphere-cap:R=0.015,eps=0.1", "square_size": 0.0125},
    {"id": "strip", "type": "lift", "disc": "torus-strip:px=0.15,py=1,L=0.2,w=0.02,h=0.005,eps=0.44"},
    {"id": "peanut", "type": "lift", "disc": "peanut:scale=0.1,lobe=0.6,rings=16,eps=0.9", "square_size": 0.05}]})");
  for (const auto& t : rep.tasks) {
    expect_pass(o, t);
    for (const auto& [name, v] : t.results["certificates"].items())
      o.check(v.get<bool>(), t.id + " certificate " + name);
  }
  const auto& cap = task(rep, "cap");
  o.check(val(cap.results["max_residual"]) <= 1e-8, "cap residual " + fmt(val(cap.results["max_residual"])));
  o.check(val(cap.results["base_offset"]) <= 1e-12, "lift(y) off origin by " + fmt(val(cap.results["base_offset"])));
  const auto& strip = task(rep, "strip");
  o.check(strip.results["coincident_pairs"].get<int>() > 0, "strip has no overlapping preimages");
  const double sep = val(strip.results["min_coincident_separation"]);
  o.check(std::abs(sep - 0.15) <= 1e-6, "strip separation " + fmt(sep));
  if (o.ok)
    o.detail = "cap residual " + fmt(val(cap.results["max_residual"])) + ", strip separation " + fmt(sep) +
               ", peanut basins " + fmt(task(rep, "peanut").results["basins"].get<double>());
  return o;
}

// 9 -------------------------------------------------------------------------
Outcome gauss_bonnet() {
  Outcome o;
  const auto sphere = run_text(R"({"surface": "round-sphere:r=1", "constants": {"h0": 2, "seed": 5},
    "tasks": [{"id": "g", "type": "gauss-bonnet", "resolution": 32, "delta": 0.5, "C": 2}]})");
  const auto& g = task(sphere, "g");
  expect_pass(o, g);
  const double rel = val(g.results["closed_form_rel_error"]);
  o.check(rel <= 0.02, "sphere closed-form error " + fmt(rel));
  // On a flat surface area(B) = pi delta^2, so the hypothesis holds for C < pi;
  // beyond that the scan is not applicable. The conclusion must never fail below 4 pi.
  std::string text = R"({"surface": "flat-torus:px=1,py=1", "resolution": 32, "constants": {"h0": 0, "seed": 5}, "tasks": [)";
  const std::vector<double> Cs{0.5, 1.0, 2.0, 3.0, 6.0, 12.0};
  for (std::size_t i = 0; i < Cs.size(); ++i)
    text += (i ? "," : "") + std::string(R"({"id": "t)") + std::to_string(i) + R"(", "type": "gauss-bonnet", "delta": 0.2, "C": )" +
            fmt(Cs[i]) + "}";
  const auto torus = run_text(text + "]}");
  int passed = 0;
  for (std::size_t i = 0; i < Cs.size(); ++i) {
    const auto& t = torus.tasks[i];
    const bool applicable = Cs[i] < kPi;
    o.check(t.verdict == (applicable ? "pass" : "not-applicable"), "torus C=" + fmt(Cs[i]) + " verdict " + t.verdict);
    passed += t.verdict == "pass";
  }
  if (o.ok) o.detail = "sphere error " + fmt(rel) + ", torus passes " + std::to_string(passed) + " applicable C";
  return o;
}

// 10-12 share one run of the dumbbell family scenario.
std::optional<VerificationReport> dumbbell;

const VerificationReport& dumbbell_report() {
  if (!dumbbell) {
    auto cfg = parse_scenario_text(read_file(fs::path(kSource) / "scenarios" / "dumbbell-limit.json"));
    dumbbell = run_scenario(cfg);
  }
  return *dumbbell;
}

Outcome limit() {
  Outcome o;
  const auto& t = task(dumbbell_report(), "limit");
  expect_pass(o, t);
  o.check(t.inputs["samples"].get<int>() == 200, "sample count");
  o.check(t.inputs["rho"].size() == 4, "family size");
  const auto tails = t.results["tails"].get<std::vector<double>>();
  bool dec = true;
  for (std::size_t i = 1; i < tails.size(); ++i) dec = dec && tails[i] < tails[i - 1];
  o.check(dec, "tails not strictly decreasing");
  const auto& ax = t.results["axioms"];
  o.check(ax["symmetric"].get<bool>() && ax["zero_diagonal"].get<bool>() && ax["nonnegative"].get<bool>(),
          "pseudo-metric axioms");
  o.check(val(ax["max_triangle_violation"]) <= 1e-9, "triangle violation " + fmt(val(ax["max_triangle_violation"])));
  o.check(t.results["neck_in_zero_class"].get<bool>(), "neck samples not in one zero class");
  o.check(t.seconds < 600.0, "limit task took " + fmt(t.seconds) + " s");
  std::string ts;
  for (double x : tails) ts += (ts.empty() ? "" : " ") + fmt(x);
  if (o.ok) o.detail = "tails " + ts + " (" + fmt(t.seconds) + " s)";
  return o;
}

Outcome dimension() {
  Outcome o;
  const auto torus = run_text(R"({"surface": "flat-torus:px=1,py=1", "resolution": 64, "constants": {"seed": 3},
    "tasks": [{"id": "d", "type": "dimension", "deltas": [0.2, 0.1, 0.05]}]})");
  const auto& rep = dumbbell_report();
  const TaskRecord* parts[] = {&task(torus, "d"), &task(rep, "dimension-limit"), &task(rep, "dimension-circle")};
  const double expected[] = {2.0, 2.0, 1.0};
  double secs = 0.0;
  for (int i = 0; i < 3; ++i) {
    expect_pass(o, *parts[i]);
    const double s = val(parts[i]->results["slope"]);
    o.check(std::abs(s - expected[i]) <= 0.15, parts[i]->id + " slope " + fmt(s));
    o.detail += (o.detail.empty() ? "" : ", ") + parts[i]->id + " slope " + fmt(s);
    secs += parts[i]->seconds;
  }
  o.check(secs < 300.0, "dimension tasks took " + fmt(secs) + " s");
  return o;
}

Outcome diameter() {
  Outcome o;
  const auto& t = task(dumbbell_report(), "diameter");
  expect_pass(o, t);
  const double spread = val(t.results["tail_spread"]);
  o.check(spread <= 0.05, "tail spread " + fmt(spread));
  bool excluded = false;
  for (const auto& m : t.results["members"])
    if (m["name"].get<std::string>().find("round-sphere") != std::string::npos)
      excluded = !m["included"].get<bool>() && !m.value("reason", std::string()).empty();
  o.check(excluded, "injected sphere not excluded with a reason");
  o.check(t.seconds < 300.0, "diameter task took " + fmt(t.seconds) + " s");
  if (o.ok) o.detail = "D_obs " + fmt(val(t.results["D_obs"])) + ", tail spread " + fmt(spread);
  return o;
}

// 13 ------------------------------------------------------------------------
Outcome determinism() {
  Outcome o;
  const std::string text = R"({
    "scenario": "rerun",
    "family": {"name": "dumbbell", "rho": [0.2, 0.15, 0.1]},
    "surface": "flat-torus:px=1,py=1",
    "resolution": 32,
    "constants": {"h0": 0, "seed": 9},
    "tasks": [
      {"type": "curvature"},
      {"type": "monotonicity", "centers": 10},
      {"type": "net", "deltas": [0.2, 0.1]},
      {"type": "modulus", "annulus": "round:r=1,rho=0.25", "resolution": 32},
      {"type": "lift", "disc": "peanut:scale=0.1,lobe=0.6,rings=16,eps=0.9", "square_size": 0.05},
      {"type": "limit", "samples": 24, "waist_samples": 4, "resolution": 16},
      {"type": "dimension", "source": "circle", "points": 400}
    ],
    "output": {"format": "csv-bundle"}
  })";
  const fs::path base = fs::temp_directory_path() / "bmc_acceptance_rerun";
  fs::remove_all(base);
  std::vector<std::vector<std::string>> files;
  for (int run = 0; run < 3; ++run) {
    const auto cfg = parse_scenario_text(text);
    // The third run executes tasks concurrently.
    files.push_back(emit_report(run_scenario(cfg, run == 2), (base / std::to_string(run)).string(), cfg.format));
  }
  const auto sphere = fs::path(kSource) / "scenarios" / "sphere-baseline.json";
  for (int run = 3; run < 5; ++run) {
    const auto cfg = parse_scenario_text(read_file(sphere));
    files.push_back(emit_report(run_scenario(cfg), (base / std::to_string(run)).string(), cfg.format));
  }
  int compared = 0;
  for (int run : {1, 2, 4}) {
    const int ref = run == 4 ? 3 : 0;
    o.check(files[run].size() == files[ref].size(), "file lists differ");
    for (std::size_t i = 0; i < std::min(files[run].size(), files[ref].size()); ++i) {
      const auto a = read_file(files[ref][i]), b = read_file(files[run][i]);
      o.check(!a.empty() && a == b, fs::path(files[run][i]).filename().string() + " differs");
      ++compared;
    }
  }
  fs::remove_all(base);
  if (o.ok) o.detail = std::to_string(compared) + " files byte-identical";
  return o;
}

}  // namespace

int main() {
  criterion(1, "curvature bound K <= K0 on sphere and flat torus", 20.0, curvature);
  criterion(2, "Jacobi comparison f = sin r, increasing, f > r/2", 1.0, jacobi);
  criterion(3, "Schwarz deformation K~ <= -1 on plane and sphere", 30.0, schwarz);
  criterion(4, "isoperimetric v0 and flat disc beta", 1.0, isoperimetric);
  criterion(5, "monotonicity area >= c eps^2 on sphere, torus, dumbbell", 60.0, monotonicity);
  criterion(6, "flat torus net cardinality brackets", 60.0, nets);
  criterion(7, "modulus and Ahlfors curve", 30.0, modulus);
  criterion(8, "disc lifting residual, period and certificates", 60.0, lifting);
  criterion(9, "Gauss-Bonnet ball scan on sphere and flat torus", 10.0, gauss_bonnet);
  criterion(10, "dumbbell limit pseudo-metric", 1e9, limit);
  criterion(11, "box dimension 2 and 1-dimensional control", 1e9, dimension);
  criterion(12, "diameter experiment with injected member", 1e9, diameter);
  criterion(13, "byte-identical reruns", 1e9, determinism);
  std::printf("%d of 13 criteria failed\n", failures);
  return failures ? 1 : 0;
}
