// bmcverify: scenario runner and single-check subcommands.
//
// Exit codes: 0 all verdicts pass or not-applicable, 1 a verification
// failed, 2 usage or configuration error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "bmc/bmc.hpp"

namespace {

using bmc::Json;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  double tolerance_scale = 1.0;
  bool parallel = false;
  std::string format = "json";
};

int config_error(const std::exception& e) {
  std::cerr << "bmcverify: config error: " << e.what() << "\n";
  return 2;
}

/// Runs a parsed config; writes the report when an output directory applies.
int run_config(const Json& doc, const Globals& g, bool print_tasks) {
  bmc::ScenarioConfig cfg;
  bmc::VerificationReport rep;
  try {
    cfg = bmc::parse_scenario(doc, {g.seed, g.out, g.tolerance_scale});
    rep = bmc::run_scenario(cfg, g.parallel);
  } catch (const bmc::ConfigError& e) {
    return config_error(e);
  }
  for (const auto& t : rep.tasks) {
    std::cerr << t.id << ": " << t.verdict << " (" << t.seconds << " s)";
    if (!t.error.empty()) std::cerr << " error: " << t.error;
    std::cerr << "\n";
  }
  if (print_tasks) {
    for (const auto& t : rep.json["tasks"]) std::cout << t.dump(2) << "\n";
  } else {
    std::cout << rep.json["summary"].dump() << "\n";
  }
  if (!print_tasks || g.out) {
    try {
      for (const auto& f : bmc::emit_report(rep, cfg.out_dir, cfg.format)) std::cerr << "wrote " << f << "\n";
    } catch (const bmc::ConfigError& e) {
      return config_error(e);
    } catch (const std::exception& e) {
      std::cerr << "bmcverify: " << e.what() << "\n";
      return 2;
    }
  }
  return rep.exit_code;
}

/// Wraps one task into a scenario document.
Json single(const std::string& name, const Globals& g, const Json& task, const Json& top = Json::object()) {
  Json doc;
  doc["scenario"] = name;
  for (auto it = top.begin(); it != top.end(); ++it)
    if (it.key() != "constants") doc[it.key()] = it.value();
  Json constants = top.contains("constants") ? top["constants"] : Json::object();
  constants["seed"] = g.seed.value_or(0);
  doc["constants"] = constants;
  doc["tasks"] = Json::array({task});
  doc["output"] = {{"dir", g.out.value_or("out")}, {"format", g.format}};
  return doc;
}

template <class T>
void put(Json& j, const std::string& key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of bounded mean curvature estimates"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Override the scenario seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--tolerance-scale", g.tolerance_scale, "Multiply every tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--parallel", g.parallel, "Run independent tasks concurrently");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv-bundle"}));
  app.set_version_flag("--version", bmc::kVersion);

  Json doc;
  bool print_tasks = true;

  // run
  std::string scenario_file;
  auto* run = app.add_subcommand("run", "Run a scenario file");
  run->add_option("file", scenario_file, "Scenario JSON")->required();

  // verify-curvature
  std::string surface;
  std::optional<double> h0, k0, radius, i0, beta, A0, a0, square_size, expected;
  std::optional<int> resolution, grid, directions, centers, sides, samples, waist, orders;
  auto* curv = app.add_subcommand("verify-curvature", "Max K against K0 = K_M + (n-2) H0^2 / 4");
  curv->add_option("--surface", surface)->required();
  curv->add_option("--h0", h0)->required();
  curv->add_option("--resolution", resolution);

  auto* jac = app.add_subcommand("jacobi", "Jacobi profile along radial geodesics");
  jac->add_option("--surface", surface)->required();
  jac->add_option("--h0", h0);
  jac->add_option("--k0", k0);
  jac->add_option("--radius", radius);
  jac->add_option("--directions", directions);

  auto* sch = app.add_subcommand("schwarz", "Conformal deformation K~ <= -1 near a point");
  sch->add_option("--surface", surface)->required();
  sch->add_option("--k0", k0)->required();
  sch->add_option("--i0", i0);
  sch->add_option("--grid", grid);

  std::string region = "surface";
  auto* iso = app.add_subcommand("isoperimetric", "sqrt(A) <= beta (L + int |H|) or A >= v0");
  iso->add_option("--surface", surface)->required();
  iso->add_option("--region", region)->check(CLI::IsMember({"surface", "ball"}));
  iso->add_option("--radius", radius);
  iso->add_option("--centers", centers);
  iso->add_option("--polygon-sides", sides);
  iso->add_option("--beta", beta);
  iso->add_option("--resolution", resolution);

  std::vector<double> eps;
  auto* mono = app.add_subcommand("monotonicity", "area(B(p, eps)) >= c eps^2 at random centres");
  mono->add_option("--surface", surface)->required();
  mono->add_option("--h0", h0)->required();
  mono->add_option("--eps", eps);
  mono->add_option("--centers", centers);
  mono->add_option("--beta", beta);
  mono->add_option("--resolution", resolution);

  std::vector<double> deltas;
  auto* net = app.add_subcommand("net", "Greedy delta-nets against cardinality brackets");
  net->add_option("--surface", surface)->required();
  net->add_option("--delta", deltas);
  net->add_option("--h0", h0);
  net->add_option("--A0", A0);
  net->add_option("--a0", a0);
  net->add_option("--beta", beta);
  net->add_option("--resolution", resolution);

  std::string annulus;
  auto* mod = app.add_subcommand("modulus", "Conformal modulus and Ahlfors curve of an annulus");
  mod->add_option("--annulus", annulus, "right:H=,W= | round:r=,rho= | square | neck:rho=")->required();
  mod->add_option("--resolution", resolution);
  mod->add_option("--expected", expected);

  std::string disc, base = "center";
  bool no_reanchor = false;
  auto* lift = app.add_subcommand("lift", "Ordered squares and the developing lift of a disc");
  lift->add_option("--disc", disc, "sphere-cap:R=,eps= | torus-strip:px=,py=,L=,w=,h=,eps= | peanut:...")
      ->required();
  lift->add_option("--base", base, "center, boundary or a vertex index");
  lift->add_option("--square-size", square_size);
  lift->add_flag("--no-reanchor", no_reanchor);

  std::vector<double> rhos;
  auto* lim = app.add_subcommand("limit", "Limit pseudo-metric of a dumbbell sequence");
  lim->add_option("--rho", rhos)->required();
  lim->add_option("--samples", samples);
  lim->add_option("--waist", waist);
  lim->add_option("--resolution", resolution);

  std::string source = "surface";
  auto* dim = app.add_subcommand("dimension", "Box-counting slope from greedy nets");
  dim->add_option("--surface", surface);
  dim->add_option("--source", source)->check(CLI::IsMember({"surface", "interval", "circle"}));
  dim->add_option("--delta", deltas);
  dim->add_option("--resolution", resolution);
  dim->add_option("--expected", expected);
  dim->add_option("--orders", orders, "Random scan orders averaged per delta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Json task, top = Json::object();
  Json constants = Json::object();
  if (!surface.empty()) top["surface"] = surface;
  put(constants, "h0", h0);
  put(constants, "beta", beta);
  put(constants, "A0", A0);
  put(constants, "a0", a0);
  put(task, "resolution", resolution);

  if (*run) {
    std::ifstream in(scenario_file, std::ios::binary);
    if (!in) {
      std::cerr << "bmcverify: cannot read " << scenario_file << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      doc = bmc::parse_json_text(ss.str());
    } catch (const bmc::ConfigError& e) {
      return config_error(e);
    }
    print_tasks = false;
    if (g.format != "json" && doc.is_object()) doc["output"]["format"] = g.format;
  } else {
    if (*curv) task["type"] = "curvature";
    if (*jac) {
      task["type"] = "jacobi";
      put(task, "k0", k0);
      put(task, "radius", radius);
      put(task, "directions", directions);
    }
    if (*sch) {
      task["type"] = "schwarz";
      put(task, "k0", k0);
      put(task, "i0", i0);
      put(task, "grid", grid);
    }
    if (*iso) {
      task["type"] = "isoperimetric";
      task["region"] = region;
      put(task, "radius", radius);
      put(task, "centers", centers);
      put(task, "polygon_sides", sides);
    }
    if (*mono) {
      task["type"] = "monotonicity";
      if (!eps.empty()) task["eps"] = eps;
      put(task, "centers", centers);
    }
    if (*net) {
      task["type"] = "net";
      if (!deltas.empty()) task["deltas"] = deltas;
    }
    if (*mod) {
      task["type"] = "modulus";
      task["annulus"] = annulus;
      put(task, "expected", expected);
    }
    if (*lift) {
      task["type"] = "lift";
      task["disc"] = disc;
      if (!base.empty() && std::all_of(base.begin(), base.end(), ::isdigit)) task["base"] = std::stoi(base);
      else task["base"] = base;
      put(task, "square_size", square_size);
      task["reanchor"] = !no_reanchor;
    }
    if (*lim) {
      task["type"] = "limit";
      task["rho"] = rhos;
      put(task, "samples", samples);
      put(task, "waist_samples", waist);
    }
    if (*dim) {
      task["type"] = "dimension";
      task["source"] = source;
      put(task, "orders", orders);
      if (!deltas.empty()) task["deltas"] = deltas;
      put(task, "expected", expected);
    }
    if (!constants.empty()) top["constants"] = constants;
    doc = single(app.get_subcommands().front()->get_name(), g, task, top);
  }
  try {
    return run_config(doc, g, print_tasks);
  } catch (const std::exception& e) {
    std::cerr << "bmcverify: " << e.what() << "\n";
    return 2;
  }
}
