#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <random>
#include <sstream>

#include "bmc/config.hpp"
#include "bmc/conformal.hpp"
#include "bmc/iso_net.hpp"
#include "bmc/lifting.hpp"
#include "bmc/limits.hpp"
#include "bmc/primitives.hpp"
#include "bmc/schwarz.hpp"

namespace bmc {

inline constexpr const char* kToolName = "bmcverify";
inline constexpr const char* kVersion = "0.1.0";

/// Finite values as numbers, others as "inf", "-inf" or "nan".
inline Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline Json num(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

inline Json nums(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct TaskOutcome {
  std::string verdict = "fail";  // pass | fail | not-applicable | no-convergence
  Json results = Json::object();
  std::vector<std::pair<std::string, Eigen::MatrixXd>> matrices;
  std::vector<Table> tables;
};

inline std::string verdict_of(bool ok) { return ok ? "pass" : "fail"; }

struct PreparedTask {
  std::string id, type;
  Json inputs = Json::object();
  std::function<TaskOutcome()> run;
};

/// Resolved scenario state shared (read-only) by all tasks.
struct TaskContext {
  std::optional<CatalogSurface> surface;
  std::optional<std::string> surface_spec;
  std::optional<FamilyConfig> family;
  std::optional<AmbientSpace> ambient;
  int resolution = 64;
  Constants constants;

  /// Ambient used for K0 and v0: the configured one, else the surface's.
  AmbientSpace constants_ambient() const {
    if (ambient) return *ambient;
    if (surface) return surface->ambient;
    return AmbientSpace::euclidean(3);
  }
};

namespace detail {

inline Json ambient_json(const AmbientSpace& a) {
  Json j;
  j["kind"] = to_string(a.kind);
  j["dimension"] = a.dim;
  if (a.kind == AmbientKind::flat_torus) j["periods"] = nums(a.periods);
  if (a.kind == AmbientKind::round_sphere) j["radius"] = a.radius;
  const auto c = ambient_constants(a);
  j["K_M"] = num(c.curvature_bound);
  j["i0"] = num(c.injectivity_radius);
  return j;
}

inline const CatalogSurface& need_surface(const TaskContext& ctx, Params& p, std::optional<CatalogSurface>& local) {
  if (auto s = p.opt_string("surface")) {
    local = parse_surface_spec(*s, p.key("surface"));
    return *local;
  }
  if (!ctx.surface) throw ConfigError(p.key("surface"), "no surface given (set the top-level surface or this key)");
  return *ctx.surface;
}

inline std::string surface_spec_of(const TaskContext& ctx, const std::optional<CatalogSurface>& local,
                                   const CatalogSurface& s) {
  return local ? describe(s) : (ctx.surface_spec ? *ctx.surface_spec : describe(s));
}

/// Ambient for the constants of a task-local surface.
inline AmbientSpace task_ambient(const TaskContext& ctx, const std::optional<CatalogSurface>& local,
                                 const CatalogSurface& s) {
  if (ctx.ambient) return *ctx.ambient;
  return local ? s.ambient : ctx.constants_ambient();
}

struct ResolvedK0 {
  double K0 = 0.0;
  std::string source;
};

/// K0 from H0 when configured, else the analytic supremum of K (clipped at 0).
inline ResolvedK0 resolve_k0(const TaskContext& ctx, const CatalogSurface& s, const AmbientSpace& amb,
                             std::optional<double> k0_param) {
  if (k0_param) return {*k0_param, "task"};
  if (ctx.constants.h0) return {curvature_bound(*ctx.constants.h0, amb), "H0"};
  return {std::max(0.0, analytic_curvature_bounds(s).second), "analytic max K"};
}

/// Intrinsic injectivity radius where it is known in closed form.
inline std::optional<double> surface_injectivity_radius(const CatalogSurface& s) {
  if (auto* f = std::get_if<RoundSphere>(&s.family)) return kPi * f->radius;
  if (auto* f = std::get_if<FlatTorus2>(&s.family)) return std::min(f->px, f->py) / 2.0;
  if (std::holds_alternative<FlatDisc>(s.family)) return kInf;
  return std::nullopt;
}

inline std::vector<int> random_vertices(int nv, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, nv - 1);
  std::vector<int> out(count);
  for (int& v : out) v = pick(rng);
  return out;
}

inline double tolerance(Params& p, const Constants& c, const std::string& name) {
  return p.positive("tolerance", c.tol(name));
}

// ---------------------------------------------------------------------------

inline PreparedTask prepare_curvature(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  if (!ctx.constants.h0) throw ConfigError("constants.h0", "required by the curvature task");
  const double h0 = *ctx.constants.h0;
  const int res = p.integer("resolution", ctx.resolution, 4);
  const double tol = tolerance(p, ctx.constants, "curvature");
  const AmbientSpace amb = task_ambient(ctx, local, s);
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"resolution", res}, {"H0", h0},
              {"ambient", ambient_json(amb)}, {"tolerance", tol}};
  t.run = [s, h0, res, tol, amb] {
    TaskOutcome o;
    const auto built = build_surface(s, res);
    const auto cf = estimate_curvatures(built.mesh);
    const double K0 = curvature_bound(h0, amb);
    const auto [aH, aK] = analytic_curvature_bounds(s);
    const double maxK = cf.max_gauss(), maxH = cf.max_mean();
    const bool hyp = aH <= h0 * (1.0 + 1e-9) + 1e-12;
    const bool ok = maxK <= K0 + tol * (K0 + 1.0);
    o.results = {{"K0", num(K0)},
                 {"max_K", num(maxK)},
                 {"min_K", num(cf.min_gauss())},
                 {"maxH", num(maxH)},
                 {"analytic_max_H", num(aH)},
                 {"analytic_max_K", num(aK)},
                 {"hypothesis_H_le_H0", hyp},
                 {"threshold", num(K0 + tol * (K0 + 1.0))},
                 {"vertices", built.mesh.num_vertices()},
                 {"max_edge", num(built.mesh.max_edge_length())},
                 {"stencil_radius", num(cf.stencil_radius)},
                 {"total_defect", num(cf.total_defect)},
                 {"pass", ok}};
    if (!hyp) o.results["reason"] = "surface violates |H| <= H0";
    o.verdict = !hyp ? "not-applicable" : verdict_of(ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_jacobi(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  const AmbientSpace amb = task_ambient(ctx, local, s);
  const auto k0 = resolve_k0(ctx, s, amb, p.opt_nonnegative("k0"));
  const int directions = p.integer("directions", 8, 1);
  const double step = p.positive("step", 1e-3);
  if (step > 1e-3) throw ConfigError(p.key("step"), "must not exceed 1e-3");
  auto radius = p.opt_positive("radius");
  if (!radius) {
    const auto R = conjugate_radius_bound(k0.K0);
    if (R.infinite) throw ConfigError(p.key("radius"), "required when K0 <= 0 (no conjugate radius)");
    radius = R.R;
  }
  const double R = *radius;
  const double tol = tolerance(p, ctx.constants, "jacobi");
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"K0", num(k0.K0)}, {"K0_source", k0.source},
              {"directions", directions}, {"step", step}, {"radius", num(R)}, {"tolerance", tol}};
  t.run = [s, K0 = k0.K0, directions, step, R, tol] {
    TaskOutcome o;
    const auto [chart, base] = base_chart(s);
    std::optional<double> sphere_r;
    if (auto* f = std::get_if<RoundSphere>(&s.family)) sphere_r = f->radius;
    bool increasing = true, above = true;
    double worst_model = -kInf, closed_err = 0.0;
    int samples = 0;
    Json dirs = Json::array();
    for (int k = 0; k < directions; ++k) {
      const double theta = 2.0 * kPi * k / directions;
      const auto jp = jacobi_profile(chart, base, theta, R, step);
      increasing = increasing && jp.increasing;
      above = above && jp.above_half;
      const double v = jacobi_lower_bound_violation(jp, K0, 0.0);
      worst_model = std::max(worst_model, v);
      double e = 0.0;
      if (sphere_r)
        for (std::size_t i = 0; i < jp.r.size(); ++i)
          e = std::max(e, std::abs(jp.f[i] - *sphere_r * std::sin(jp.r[i] / *sphere_r)));
      closed_err = std::max(closed_err, e);
      samples = static_cast<int>(jp.r.size()) - 1;
      dirs.push_back({{"theta", theta}, {"increasing", jp.increasing}, {"above_half", jp.above_half},
                      {"model_violation", num(v)}, {"closed_form_error", sphere_r ? num(e) : Json(nullptr)}});
    }
    const bool closed_ok = !sphere_r || closed_err <= tol;
    o.results = {{"radial_samples", samples},
                 {"increasing", increasing},
                 {"above_half", above},
                 {"max_model_violation", num(worst_model)},
                 {"closed_form", sphere_r ? Json("r sin(rho/r)") : Json(nullptr)},
                 {"max_closed_form_error", sphere_r ? num(closed_err) : Json(nullptr)},
                 {"directions", dirs}};
    o.verdict = verdict_of(increasing && above && closed_ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_schwarz(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  const AmbientSpace amb = task_ambient(ctx, local, s);
  const auto k0 = resolve_k0(ctx, s, amb, p.opt_nonnegative("k0"));
  const int grid = p.integer("grid", 200, 3);
  auto i0 = p.opt_positive("i0");
  if (!i0) i0 = surface_injectivity_radius(s);
  if (!i0) throw ConfigError(p.key("i0"), "required: no closed-form injectivity radius for this surface");
  const double tol = tolerance(p, ctx.constants, "schwarz");
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"K0", num(k0.K0)}, {"K0_source", k0.source},
              {"i0", num(*i0)}, {"grid", grid}, {"tolerance", tol}};
  t.run = [s, K0 = k0.K0, i0 = *i0, grid, tol] {
    TaskOutcome o;
    const auto [chart, base] = base_chart(s);
    const auto c = deformation_check(chart, base, K0, i0, grid, tol);
    o.results = {{"lambda", num(c.lambda)},
                 {"eta", num(c.eta)},
                 {"radius_derivation", num(c.radius_derivation)},
                 {"radius_statement", num(c.radius_statement)},
                 {"min_Ktilde", num(c.min_K_tilde)},
                 {"max_Ktilde", num(c.max_K_tilde)},
                 {"max_identity_residual", num(c.max_identity_residual)},
                 {"laplacian_comparison", c.laplacian_ok},
                 {"min_laplacian_margin", num(c.min_laplacian_margin)},
                 {"excluded", c.excluded},
                 {"pass", c.pass}};
    o.verdict = verdict_of(c.pass);
    return o;
  };
  return t;
}

inline PreparedTask prepare_isoperimetric(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  const AmbientSpace amb = task_ambient(ctx, local, s);
  const int res = p.integer("resolution", ctx.resolution, 4);
  const std::string region = p.string("region", "surface");
  if (region != "surface" && region != "ball") throw ConfigError(p.key("region"), "must be surface or ball");
  const auto radius = p.opt_positive("radius");
  if (region == "ball" && !radius) throw ConfigError(p.key("radius"), "required for ball regions");
  const int centers = p.integer("centers", 1, 1);
  const int sides = p.integer("polygon_sides", 0, 0);
  if (sides && !std::holds_alternative<FlatDisc>(s.family))
    throw ConfigError(p.key("polygon_sides"), "only valid for flat-disc surfaces");
  if (sides && sides < 3) throw ConfigError(p.key("polygon_sides"), "must be at least 3");
  const auto expected = p.opt_positive("expected_beta");
  const double tol = tolerance(p, ctx.constants, "isoperimetric");
  const double beta = ctx.constants.beta;
  const std::uint64_t seed = ctx.constants.seed;
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"resolution", res}, {"region", region},
              {"radius", num(radius)}, {"centers", centers}, {"polygon_sides", sides},
              {"beta", beta}, {"ambient", ambient_json(amb)}, {"expected_beta", num(expected)},
              {"tolerance", tol}, {"seed", seed}};
  t.run = [=] {
    TaskOutcome o;
    const TriMesh mesh = sides ? polygon_disc_mesh(std::get<FlatDisc>(s.family).radius, sides)
                               : build_surface(s, res).mesh;
    const auto v0 = isoperimetric_v0(amb);
    std::vector<TriMesh> regions;
    Json centers_json = Json::array();
    if (region == "surface") {
      regions.push_back(mesh);
    } else {
      const GeodesicGraph g(mesh);
      for (int v : random_vertices(mesh.num_vertices(), centers, seed)) {
        const auto ball = intrinsic_ball(g, vertex_point(mesh, v), *radius);
        std::vector<int> faces;
        for (int f : ball.inside_faces)
          if (ball.face_fraction[f] >= 1.0 - 1e-12) faces.push_back(f);
        if (faces.empty()) throw MeshError("ball contains no whole face; increase the radius");
        regions.push_back(mesh.submesh(faces));
        centers_json.push_back(v);
      }
    }
    bool ok = true;
    double worst_beta = 0.0;
    Json recs = Json::array();
    for (const auto& r : regions) {
      try {
        const auto rec = isoperimetric_check(r, beta, v0);
        ok = ok && rec.pass;
        worst_beta = std::max(worst_beta, rec.beta_empirical);
        recs.push_back({{"area", num(rec.area)}, {"boundary_length", num(rec.boundary_length)},
                        {"mean_integral", num(rec.mean_integral)}, {"beta_empirical", num(rec.beta_empirical)},
                        {"branch", rec.branch}, {"pass", rec.pass}});
      } catch (const InapplicableError& e) {
        recs.push_back({{"not_applicable", e.what()}});
      }
    }
    bool expected_ok = true;
    if (expected && recs.size() == 1 && recs[0].contains("beta_empirical"))
      expected_ok = std::abs(worst_beta - *expected) <= tol;
    const bool any = std::any_of(recs.begin(), recs.end(), [](const Json& r) { return r.contains("branch"); });
    o.results = {{"v0", num(v0)}, {"regions", recs}, {"max_beta_empirical", num(worst_beta)}};
    if (!centers_json.empty()) o.results["centers"] = centers_json;
    if (expected) o.results["expected_beta_ok"] = expected_ok;
    o.verdict = !any ? "not-applicable" : verdict_of(ok && expected_ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_monotonicity(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  const AmbientSpace amb = task_ambient(ctx, local, s);
  if (!ctx.constants.h0) throw ConfigError("constants.h0", "required by the monotonicity task");
  const double h0 = *ctx.constants.h0;
  const int res = p.integer("resolution", ctx.resolution, 4);
  const int centers = p.integer("centers", 50, 1);
  const auto eps = p.numbers("eps", {0.05, 0.1});
  const double beta = ctx.constants.beta;
  const std::uint64_t seed = ctx.constants.seed;
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"resolution", res}, {"H0", h0}, {"beta", beta},
              {"centers", centers}, {"eps", nums(eps)}, {"ambient", ambient_json(amb)}, {"seed", seed}};
  t.run = [=] {
    TaskOutcome o;
    Json consts;
    double c = std::min(1.0, 1.0 / (16.0 * beta * beta));
    double delta = kInf;
    consts["K0"] = num(curvature_bound(h0, amb));
    if (amb.compact()) {
      const auto m = monotonicity_constants(amb, h0, beta);
      c = m.c;
      delta = m.delta;
      consts["c"] = num(m.c);
      consts["R"] = num(m.R);
      consts["v0"] = num(m.v0);
      consts["sqrt_v0"] = num(m.sqrt_v0);
      consts["T"] = num(m.T);
      consts["T_literal"] = num(m.T_literal);
      consts["delta"] = num(m.delta);
    } else {
      consts["c"] = num(c);
      consts["R"] = num(conjugate_radius_bound(curvature_bound(h0, amb)).R);
      consts["v0"] = nullptr;
      consts["delta"] = nullptr;
      consts["delta_reason"] = "v0 needs a compact ambient; eps range not bounded";
    }
    const auto built = build_surface(s, res);
    const GeodesicGraph g(built.mesh);
    const auto ctr = random_vertices(built.mesh.num_vertices(), centers, seed);
    bool ok = true;
    int out_of_range = 0;
    Json per_eps = Json::array();
    for (double e : eps) {
      double min_area = kInf;
      int failures = 0;
      for (int v : ctr) {
        const auto r = monotonicity_check(g, vertex_point(built.mesh, v), e, c, delta);
        min_area = std::min(min_area, r.area);
        failures += !r.pass;
        out_of_range += r.out_of_range;
      }
      ok = ok && failures == 0;
      per_eps.push_back({{"eps", e}, {"bound", num(c * e * e)}, {"min_area", num(min_area)},
                         {"failures", failures}, {"beyond_delta", e > delta}});
    }
    o.results = {{"constants", consts}, {"checks", per_eps}, {"out_of_range_checks", out_of_range},
                 {"vertices", built.mesh.num_vertices()}};
    o.verdict = verdict_of(ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_net(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  const AmbientSpace amb = task_ambient(ctx, local, s);
  const int res = p.integer("resolution", ctx.resolution, 4);
  const auto deltas = p.numbers("deltas", {0.2, 0.1, 0.05});
  const double beta = ctx.constants.beta;
  const std::uint64_t seed = ctx.constants.seed;
  const double h0 = ctx.constants.h0.value_or(analytic_curvature_bounds(s).first);
  const double area = analytic_area(s);
  const double A0 = ctx.constants.A0.value_or(area);
  const double a0 = ctx.constants.a0.value_or(area);
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"resolution", res}, {"deltas", nums(deltas)},
              {"H0", h0}, {"A0", A0}, {"a0", a0}, {"beta", beta}, {"ambient", ambient_json(amb)}, {"seed", seed}};
  t.run = [=] {
    TaskOutcome o;
    const auto built = build_surface(s, res);
    const GeodesicGraph g(built.mesh);
    const double K0 = curvature_bound(h0, amb);
    const double c = std::min(1.0, 1.0 / (16.0 * beta * beta));
    const int chi = built.mesh.euler_characteristic();
    bool ok = true;
    Json rows = Json::array();
    Table tab{"net", {"delta", "N", "packing_lower", "packing_upper", "formula_lower", "formula_upper"}, {}};
    for (double d : deltas) {
      const auto net = greedy_net(g, d, seed, false);
      const double N = static_cast<double>(net.points.size());
      const double lo = area / (kPi * d * d), hi = area / (kPi * d * d / 4.0);
      const bool in_pack = N >= lo && N <= hi;
      Json row = {{"delta", d}, {"N", net.points.size()}, {"separated", net.separated}, {"maximal", net.maximal},
                  {"min_separation", num(net.min_separation)}, {"max_cover_distance", num(net.max_cover_distance)},
                  {"packing_bracket", nums({lo, hi})}, {"inside_packing", in_pack}};
      bool row_ok = net.separated && net.maximal && in_pack;
      double plo = std::nan(""), phi = std::nan("");
      try {
        const auto b = net_cardinality_bounds(d, A0, a0, K0, chi, c);
        plo = b.lower;
        phi = b.upper;
        row["C0"] = num(b.C0);
        row["formula_bracket"] = nums({b.lower, b.upper});
        row["lower_degenerate"] = b.lower_degenerate;
        if (!b.lower_degenerate) {
          const bool in_formula = N >= b.lower && N <= b.upper;
          row["inside_formula"] = in_formula;
          row_ok = row_ok && in_formula;
        }
      } catch (const HypothesisError& e) {
        row["formula_bracket"] = nullptr;
        row["formula_reason"] = e.what();
      }
      ok = ok && row_ok;
      rows.push_back(row);
      tab.rows.push_back({d, N, lo, hi, plo, phi});
    }
    o.results = {{"K0", num(K0)}, {"c", num(c)}, {"chi", chi}, {"area", num(area)},
                 {"mesh_area", num(surface_area(built.mesh))}, {"nets", rows}};
    o.tables.push_back(std::move(tab));
    o.verdict = verdict_of(ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_gauss_bonnet(Params& p, const TaskContext& ctx) {
  std::optional<CatalogSurface> local;
  const CatalogSurface s = need_surface(ctx, p, local);
  const AmbientSpace amb = task_ambient(ctx, local, s);
  const auto k0 = resolve_k0(ctx, s, amb, p.opt_nonnegative("k0"));
  const int res = p.integer("resolution", ctx.resolution, 4);
  const double delta = p.required_positive("delta");
  const double C = p.required_positive("C");
  const int scan = p.integer("scan", 50, 1);
  const std::optional<int> center = p.has("center") ? std::optional<int>(p.integer("center", 0, 0)) : std::nullopt;
  const double tol = tolerance(p, ctx.constants, "gauss-bonnet");
  const std::uint64_t seed = ctx.constants.seed;
  PreparedTask t;
  t.inputs = {{"surface", surface_spec_of(ctx, local, s)}, {"resolution", res}, {"K0", num(k0.K0)},
              {"K0_source", k0.source}, {"delta", delta}, {"C", C}, {"scan", scan},
              {"center", center ? Json(*center) : Json(nullptr)}, {"tolerance", tol}, {"seed", seed}};
  t.run = [=] {
    TaskOutcome o;
    const auto built = build_surface(s, res);
    const int nv = built.mesh.num_vertices();
    const int v = center ? *center : random_vertices(nv, 1, seed)[0];
    if (v >= nv) throw ConfigError("center", "vertex index out of range");
    const GeodesicGraph g(built.mesh);
    const auto cf = estimate_curvatures(built.mesh);
    const auto sc = gauss_bonnet_ball_scan(g, cf, vertex_point(built.mesh, v), delta, C, k0.K0, scan);
    o.results = {{"center", v}, {"ball_area", num(sc.ball_area)}, {"applicable", sc.applicable}};
    if (!sc.applicable) {
      o.results["reason"] = sc.reason;
      o.verdict = "not-applicable";
      return o;
    }
    o.results["threshold"] = num(sc.threshold);
    o.results["delta_prime"] = num(sc.delta_prime);
    o.results["curvature_integral"] = num(sc.curvature_integral);
    o.results["contained_integral"] = num(sc.contained_integral);
    o.results["straddling_tolerance"] = num(sc.tolerance);
    bool closed_ok = true;
    if (auto* f = std::get_if<RoundSphere>(&s.family)) {
      const double exact = 2.0 * kPi * (1.0 - std::cos(sc.delta_prime / f->radius));
      const double rel = std::abs(sc.curvature_integral - exact) / exact;
      closed_ok = rel <= tol;
      o.results["closed_form"] = num(exact);
      o.results["closed_form_rel_error"] = num(rel);
    } else if (std::holds_alternative<FlatTorus2>(s.family) || std::holds_alternative<FlatDisc>(s.family)) {
      o.results["closed_form"] = 0.0;
      o.results["closed_form_abs_error"] = num(std::abs(sc.curvature_integral));
      closed_ok = std::abs(sc.curvature_integral) <= tol;
    }
    o.results["pass"] = sc.pass;
    o.tables.push_back({"scan", {"radius", "integral", "contained", "tolerance"}, {}});
    for (std::size_t i = 0; i < sc.grid.size(); ++i)
      o.tables.back().rows.push_back({sc.grid[i], sc.integrals[i], sc.contained[i], sc.tolerances[i]});
    o.verdict = verdict_of(sc.pass && closed_ok);
    return o;
  };
  return t;
}

struct AnnulusSpec {
  std::string kind;
  std::map<std::string, double> kv;
};

inline AnnulusSpec parse_annulus_spec(const std::string& spec, const std::string& where) {
  const auto colon = spec.find(':');
  AnnulusSpec a{spec.substr(0, colon), {}};
  if (colon != std::string::npos) a.kv = parse_key_values(spec.substr(colon + 1), where);
  const std::map<std::string, std::vector<std::string>> keys{
      {"right", {"H", "W"}}, {"round", {"r", "rho"}}, {"square", {}}, {"neck", {"rho"}}};
  auto it = keys.find(a.kind);
  if (it == keys.end()) throw ConfigError(where, "annulus kind must be right, round, square or neck");
  for (const auto& [k, v] : a.kv) {
    if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
      throw ConfigError(where + "." + k, "unknown parameter for " + a.kind + " annulus");
    if (!(v > 0.0)) throw ConfigError(where + "." + k, "must be positive");
  }
  return a;
}

inline PreparedTask prepare_modulus(Params& p, const TaskContext& ctx) {
  auto spec = p.opt_string("annulus");
  if (!spec) throw ConfigError(p.key("annulus"), "required (right:H=,W= | round:r=,rho= | square | neck:rho=)");
  const auto a = parse_annulus_spec(*spec, p.key("annulus"));
  auto get = [kv = a.kv](const std::string& k, double def) { return kv.count(k) ? kv.at(k) : def; };
  const int res = p.integer("resolution", ctx.resolution, 4);
  const double tol = tolerance(p, ctx.constants, "modulus");
  const double atol = p.positive("ahlfors_tolerance", ctx.constants.tol("ahlfors"));
  const auto expected = p.opt_positive("expected");
  if (a.kind == "round" && !(get("r", 1.0) > get("rho", 0.25)))
    throw ConfigError(p.key("annulus"), "round annulus needs r > rho");
  if (a.kind == "neck") make_surface("dumbbell", {{"rho", get("rho", 0.1)}}, p.key("annulus"));
  PreparedTask t;
  t.inputs = {{"annulus", *spec}, {"resolution", res}, {"tolerance", tol}, {"ahlfors_tolerance", atol},
              {"expected", num(expected)}};
  t.run = [=] {
    TaskOutcome o;
    std::optional<double> exact = expected;
    std::optional<double> expected_length;
    std::optional<AnnulusRegion> ar;
    if (a.kind == "right") {
      const double H = get("H", 2.0), W = get("W", 1.0);
      ar = make_annulus(right_annulus_mesh(H, W, res));
      if (!exact) exact = modulus_right_annulus(H, W);
      expected_length = W;
    } else if (a.kind == "round") {
      const double r = get("r", 1.0), rho = get("rho", 0.25);
      ar = make_annulus(round_annulus_mesh(r, rho, res));
      if (!exact) exact = modulus_round_annulus(r, rho);
    } else if (a.kind == "square") {
      ar = make_annulus(square_annulus_mesh(res));
    } else {
      const double rho = get("rho", 0.1);
      const auto built = build_surface(CatalogSurface{Dumbbell{rho}, AmbientSpace::euclidean(3)}, res);
      ar = neck_annulus(built.mesh, rho * std::acosh(DumbbellProfile::kCollarInner / rho));
    }
    const double mod = modulus_mesh_annulus(*ar);
    const auto c = ahlfors_curve(*ar, atol);
    bool ok = c.pass;
    o.results = {{"modulus", num(mod)}, {"area", num(ar->area)}, {"clamped_weights", ar->clamped},
                 {"vertices", ar->mesh.num_vertices()}};
    if (exact) {
      const double rel = std::abs(mod - *exact) / *exact;
      o.results["reference"] = num(*exact);
      o.results["rel_error"] = num(rel);
      ok = ok && rel <= tol;
    }
    o.results["ahlfors"] = {{"length", num(c.length)},       {"t_star", num(c.t_star)},
                            {"bound", num(c.bound)},         {"slack", num(c.slack)},
                            {"disconnected", c.disconnected}, {"half_level_length", num(c.half_level_length)},
                            {"pass", c.pass}};
    if (expected_length) {
      const double rel = std::abs(c.length - *expected_length) / *expected_length;
      o.results["ahlfors"]["expected_length"] = num(*expected_length);
      o.results["ahlfors"]["length_rel_error"] = num(rel);
      ok = ok && rel <= tol;
    }
    o.verdict = verdict_of(ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_lift(Params& p, const TaskContext& ctx) {
  auto spec = p.opt_string("disc");
  if (!spec) throw ConfigError(p.key("disc"), "required (sphere-cap:... | torus-strip:... | peanut:...)");
  const std::string where = p.key("disc");
  const auto colon = spec->find(':');
  const std::string kind = spec->substr(0, colon);
  const auto kv = colon == std::string::npos ? std::map<std::string, double>{}
                                             : parse_key_values(spec->substr(colon + 1), where);
  const std::map<std::string, std::vector<std::string>> keys{
      {"sphere-cap", {"R", "eps", "rings", "radius"}},
      {"torus-strip", {"px", "py", "L", "w", "h", "eps"}},
      {"peanut", {"scale", "lobe", "rings", "eps"}}};
  auto it = keys.find(kind);
  if (it == keys.end()) throw ConfigError(where, "disc kind must be sphere-cap, torus-strip or peanut");
  for (const auto& [k, v] : kv) {
    if (std::find(it->second.begin(), it->second.end(), k) == it->second.end())
      throw ConfigError(where + "." + k, "unknown parameter for " + kind);
    if (!(v > 0.0)) throw ConfigError(where + "." + k, "must be positive");
  }
  auto get = [kv](const std::string& k, double def) { return kv.count(k) ? kv.at(k) : def; };
  std::string base_mode = "center";
  int base_vertex = -1;
  if (const Json* b = p.raw("base")) {
    if (b->is_string()) {
      base_mode = b->get<std::string>();
      if (base_mode != "center" && base_mode != "boundary")
        throw ConfigError(p.key("base"), "must be center, boundary or a vertex index");
    } else if (b->is_number_integer() && b->get<long long>() >= 0) {
      base_mode = "vertex";
      base_vertex = b->get<int>();
    } else {
      throw ConfigError(p.key("base"), "must be center, boundary or a vertex index");
    }
  }
  const auto square_size = p.opt_positive("square_size");
  const bool reanchor = p.boolean("reanchor", true);
  const double tol = tolerance(p, ctx.constants, "lift");
  const double ptol = ctx.constants.tol("period");
  const std::uint64_t seed = ctx.constants.seed;
  PreparedTask t;
  t.inputs = {{"disc", *spec}, {"base", base_mode == "vertex" ? Json(base_vertex) : Json(base_mode)},
              {"square_size", num(square_size)}, {"reanchor", reanchor}, {"residual_tolerance", tol},
              {"period_tolerance", ptol}, {"seed", seed}};
  t.run = [=] {
    TaskOutcome o;
    TriMesh mesh;
    ModelSurface F;
    double eps = 0.0;
    int center = 0;
    std::optional<double> period;
    if (kind == "sphere-cap") {
      const double R = get("radius", 1.0);
      mesh = sphere_cap_mesh(R, get("R", 0.015), static_cast<int>(get("rings", 8)));
      F = ModelSurface::sphere(R);
      eps = get("eps", 0.1);
      for (int v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.vertices()[v].z() > mesh.vertices()[center].z()) center = v;
    } else if (kind == "torus-strip") {
      const double px = get("px", 0.15), py = get("py", 1.0);
      mesh = torus_strip_mesh(AmbientSpace::flat_torus({px, py, std::max(px, py)}), get("L", 0.2), get("w", 0.02),
                              get("h", 0.005));
      F = ModelSurface::flat_torus(px, py);
      eps = get("eps", 0.44);
      period = std::min(px, py);
      const Vec3 mid(get("L", 0.2) / 2.0, get("w", 0.02) / 2.0, 0.0);
      double best = kInf;
      for (int v = 0; v < mesh.num_vertices(); ++v) {
        const double d = mesh.ambient().displacement(mid, mesh.vertices()[v]).norm();
        if (d < best) {
          best = d;
          center = v;
        }
      }
    } else {
      mesh = peanut_disc_mesh(get("scale", 0.1), get("lobe", 0.6), static_cast<int>(get("rings", 16)));
      F = ModelSurface::plane();
      eps = get("eps", 0.9);
    }
    int base = center;
    if (base_mode == "boundary") base = mesh.boundary_loops()[0][0];
    if (base_mode == "vertex") {
      if (base_vertex >= mesh.num_vertices()) throw ConfigError("base", "vertex index out of range");
      base = base_vertex;
    }
    const auto disc = make_disc(mesh, F, eps, base, seed);
    const auto order = order_squares(disc, square_size);
    const auto chart = lift_disc(disc, order, reanchor);
    const auto rep = verify_lift(chart, tol);
    Json certs = {{"diameters", order.diameters_ok},        {"next_connected", order.connected_ok},
                  {"boundary_contiguous", order.boundary_ok}, {"paths_2eps", order.paths2_ok},
                  {"pair_paths_5eps", order.paths5_ok},       {"first_contains_J1", order.first_contains_J1},
                  {"anchors_8eps", rep.anchors_ok},           {"radius_9eps", rep.radius_ok}};
    double max_path = 0.0, max_pair = 0.0;
    for (double x : order.max_path_to_boundary) max_path = std::max(max_path, x);
    for (double x : order.pair_path_bound) max_pair = std::max(max_pair, x);
    o.results = {{"vertices", disc.mesh.num_vertices()},
                 {"eps", eps},
                 {"boundary_length", num(disc.boundary_length)},
                 {"max_boundary_distance", num(disc.max_boundary_distance)},
                 {"conjugate_radius", num(disc.conjugate_radius)},
                 {"small_scale", disc.small_scale},
                 {"lifting_scale", num(order.lifting_scale)},
                 {"square_size", num(order.square_size)},
                 {"squares", order.squares.size()},
                 {"basins", order.num_basins},
                 {"arcs", order.arcs.size()},
                 {"repairs", order.repairs},
                 {"jitter_attempts", order.jitter_attempts},
                 {"max_path_to_boundary", num(max_path)},
                 {"max_pair_path_bound", num(max_pair)},
                 {"certificates", certs},
                 {"max_residual", num(rep.max_residual)},
                 {"max_lift_radius", num(rep.max_radius)},
                 {"base_offset", num(rep.base_offset)},
                 {"max_anchor_radius", num(rep.max_anchor_radius)},
                 {"newton_max_iterations", chart.newton_max_iterations},
                 {"coincident_pairs", rep.coincident_pairs},
                 {"min_coincident_separation", num(rep.min_coincident_separation)}};
    bool ok = order.ok() && rep.residual_ok && rep.radius_ok && rep.anchors_ok && rep.injective_ok &&
              (!reanchor || rep.base_ok);
    if (period && rep.coincident_pairs > 0) {
      const double err = std::abs(rep.min_coincident_separation - *period);
      o.results["period"] = *period;
      o.results["period_error"] = num(err);
      ok = ok && err <= ptol;
    }
    if (kind == "sphere-cap" && base != center) {
      o.results["center_lift_radius"] = num(chart.lift[center].norm());
      o.results["center_distance"] = num(F.distance(mesh.vertices()[base], mesh.vertices()[center]));
    }
    o.verdict = verdict_of(ok);
    return o;
  };
  return t;
}

inline std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-' ? ch : '_';
  return out;
}

inline std::vector<double> family_rhos(Params& p, const TaskContext& ctx) {
  if (auto r = p.opt_numbers("rho")) {
    for (std::size_t i = 0; i < r->size(); ++i)
      make_surface("dumbbell", {{"rho", (*r)[i]}}, p.key("rho") + "[" + std::to_string(i) + "]");
    return *r;
  }
  if (!ctx.family || !ctx.family->dumbbell)
    throw ConfigError(p.key("rho"), "required (or configure a dumbbell family)");
  return ctx.family->rhos;
}

inline PreparedTask prepare_limit(Params& p, const TaskContext& ctx) {
  const auto rhos = family_rhos(p, ctx);
  if (rhos.size() < 3) throw ConfigError(p.key("rho"), "a limit needs at least 3 members");
  const int samples = p.integer("samples", 200, 2);
  const int waist = p.integer("waist_samples", 8, 0);
  if (waist >= samples) throw ConfigError(p.key("waist_samples"), "must be below samples");
  const int res = p.integer("resolution", 48, 4);
  const int steiner = p.integer("steiner", 3, 0);
  const auto zeta_cfg = p.opt_positive("zeta");
  const auto tail_cfg = p.opt_positive("tail_tolerance");
  const double rel_tol = ctx.constants.tol("limit");
  const double pm_tol = ctx.constants.tol("pseudometric");
  const auto h0 = ctx.constants.h0;
  const std::uint64_t seed = ctx.constants.seed;
  PreparedTask t;
  t.inputs = {{"rho", nums(rhos)}, {"samples", samples}, {"waist_samples", waist}, {"resolution", res},
              {"steiner", steiner}, {"zeta", num(zeta_cfg)}, {"tail_tolerance", num(tail_cfg)},
              {"relative_tail_tolerance", rel_tol}, {"pseudometric_tolerance", pm_tol},
              {"H0", num(h0)}, {"seed", seed}};
  t.run = [=] {
    TaskOutcome o;
    auto seq = dumbbell_sequence(rhos, samples, seed, waist, res);
    std::vector<Eigen::MatrixXd> ms;
    Json members = Json::array();
    const auto neck = seq.samples.indices("neck");
    double last_edge = 0.0;
    for (std::size_t k = 0; k < seq.members.size(); ++k) {
      const auto built = build_surface(seq.members[k], res);
      const auto dm = distance_matrix(built.mesh, place_samples(seq.members[k], built.mesh, seq.samples), steiner);
      double neck_max = 0.0;
      for (int i : neck)
        for (int j : neck) neck_max = std::max(neck_max, dm.d(i, j));
      const double mh = analytic_curvature_bounds(seq.members[k]).first;
      Json m = {{"name", seq.names[k]},         {"vertices", built.mesh.num_vertices()},
                {"max_edge", num(dm.tolerance)}, {"max_asymmetry", num(dm.max_asymmetry)},
                {"max_H", num(mh)},             {"max_distance", num(dm.d.maxCoeff())},
                {"neck_max_distance", num(neck_max)}};
      if (h0) m["H_le_H0"] = mh <= *h0;
      members.push_back(m);
      last_edge = dm.tolerance;
      o.matrices.emplace_back(seq.names[k], dm.d);
      ms.push_back(dm.d);
    }
    const double zeta = zeta_cfg.value_or(2.0 * last_edge);
    const double tail_tol = tail_cfg.value_or(rel_tol * ms.back().maxCoeff());
    auto pm = limit_pseudometric(ms, zeta, tail_tol);
    pm.axioms = check_pseudometric(pm.d, pm_tol);
    const bool neck_zero = neck.size() < 2 || same_zero_class(pm, neck);
    std::size_t largest = 0;
    for (const auto& c : pm.zero_classes) largest = std::max(largest, c.size());
    o.results = {{"members", members},
                 {"tails", nums(pm.tails)},
                 {"strictly_decreasing", pm.strictly_decreasing},
                 {"tail_tolerance", num(pm.tail_tolerance)},
                 {"converged", pm.converged},
                 {"zeta", num(zeta)},
                 {"zero_classes", pm.zero_classes.size()},
                 {"largest_zero_class", largest},
                 {"neck_samples", neck.size()},
                 {"neck_in_zero_class", neck_zero},
                 {"lipschitz", nums(pm.lipschitz)},
                 {"axioms",
                  {{"nonnegative", pm.axioms.nonnegative},
                   {"symmetric", pm.axioms.symmetric},
                   {"zero_diagonal", pm.axioms.zero_diagonal},
                   {"max_triangle_violation", num(pm.axioms.max_triangle_violation)},
                   {"ok", pm.axioms.ok()}}},
                 {"equicontinuity_violation", num(equicontinuity_violation(pm.d, 20000, seed))}};
    Table tails{"tails", {"member", "tail"}, {}};
    for (std::size_t j = 0; j < pm.tails.size(); ++j) tails.rows.push_back({double(j + 1), pm.tails[j]});
    o.tables.push_back(std::move(tails));
    if (!pm.axioms.ok()) o.verdict = "fail";
    else if (!pm.converged) o.verdict = "no-convergence";
    else o.verdict = verdict_of(neck_zero);
    return o;
  };
  return t;
}

inline PreparedTask prepare_dimension(Params& p, const TaskContext& ctx) {
  const std::string source = p.string("source", "surface");
  if (source != "surface" && source != "family-last" && source != "interval" && source != "circle")
    throw ConfigError(p.key("source"), "must be surface, family-last, interval or circle");
  std::optional<CatalogSurface> surf;
  std::string label;
  if (source == "surface") {
    std::optional<CatalogSurface> local;
    surf = need_surface(ctx, p, local);
    label = surface_spec_of(ctx, local, *surf);
  } else if (source == "family-last") {
    if (!ctx.family) throw ConfigError("family", "required by dimension source family-last");
    surf = ctx.family->members.back();
    label = ctx.family->specs.back();
  }
  const int res = p.integer("resolution", ctx.resolution, 4);
  const int steiner = p.integer("steiner", 1, 0);
  const bool one_dim = source == "interval" || source == "circle";
  const int orders = p.integer("orders", one_dim ? 16 : 4, 1);
  const int points = p.integer("points", 2001, 3);
  const auto deltas = p.numbers("deltas", {0.2, 0.1, 0.05});
  const double expected = p.positive("expected", one_dim ? 1.0 : 2.0);
  const double tol = tolerance(p, ctx.constants, "dimension");
  const std::uint64_t seed = ctx.constants.seed;
  PreparedTask t;
  t.inputs = {{"source", source}, {"deltas", nums(deltas)}, {"expected", expected}, {"tolerance", tol},
              {"orders", orders}, {"seed", seed}};
  if (surf) {
    t.inputs["surface"] = label;
    t.inputs["resolution"] = res;
    t.inputs["steiner"] = steiner;
  } else {
    t.inputs["points"] = points;
  }
  t.run = [=] {
    TaskOutcome o;
    BoxDimension b;
    if (surf) {
      const auto built = build_surface(*surf, res);
      b = box_dimension(MeshCover(built.mesh, seed, steiner, orders), deltas, expected);
      o.results["vertices"] = built.mesh.num_vertices();
    } else {
      // [0, 1] sampled at `points` nodes, or a circle of length 1 with `points` nodes.
      Eigen::MatrixXd d(points, points);
      for (int i = 0; i < points; ++i)
        for (int j = 0; j < points; ++j) {
          const int k = std::abs(i - j);
          d(i, j) = source == "interval" ? k / double(points - 1) : std::min(k, points - k) / double(points);
        }
      b = box_dimension(MatrixCover(d, seed, orders), deltas, expected);
    }
    const bool ok = std::abs(b.slope - expected) <= tol;
    o.results["counts"] = nums(b.counts);
    o.results["excluded_deltas"] = nums(b.excluded);
    o.results["warnings"] = b.warnings;
    o.results["slope"] = num(b.slope);
    o.results["intercept"] = num(b.intercept);
    o.results["capacity"] = num(b.capacity);
    o.results["slope_error"] = num(std::abs(b.slope - expected));
    Table tab{"counts", {"delta", "n"}, {}};
    for (std::size_t i = 0; i < b.deltas.size(); ++i) tab.rows.push_back({b.deltas[i], b.counts[i]});
    o.tables.push_back(std::move(tab));
    o.verdict = verdict_of(ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_diameter(Params& p, const TaskContext& ctx) {
  std::vector<CatalogSurface> members;
  std::vector<std::string> specs;
  if (auto m = p.opt_strings("members")) {
    for (std::size_t i = 0; i < m->size(); ++i) {
      members.push_back(parse_surface_spec((*m)[i], p.key("members") + "[" + std::to_string(i) + "]"));
      specs.push_back((*m)[i]);
    }
  } else if (ctx.family) {
    members = ctx.family->members;
    specs = ctx.family->specs;
  } else {
    throw ConfigError(p.key("members"), "required (or configure a family)");
  }
  if (auto inj = p.opt_strings("inject")) {
    for (std::size_t i = 0; i < inj->size(); ++i) {
      members.push_back(parse_surface_spec((*inj)[i], p.key("inject") + "[" + std::to_string(i) + "]"));
      specs.push_back((*inj)[i]);
    }
  }
  auto H0 = p.opt_nonnegative("H0");
  if (!H0) H0 = ctx.constants.h0;
  if (!H0) throw ConfigError("constants.h0", "required by the diameter task");
  auto A0 = p.opt_positive("A0");
  if (!A0) A0 = ctx.constants.A0;
  if (!A0) throw ConfigError("constants.A0", "required by the diameter task");
  const int genus = p.integer("genus", 0, 0);
  const auto D_config = p.opt_positive("D_config");
  const int res = p.integer("resolution", 48, 4);
  const int tail = p.integer("tail", 3, 2);
  const double tol = tolerance(p, ctx.constants, "diameter");
  PreparedTask t;
  t.inputs = {{"members", specs},         {"H0", *H0},     {"A0", *A0}, {"genus", genus},
              {"D_config", num(D_config)}, {"resolution", res}, {"tail", tail}, {"tolerance", tol}};
  t.run = [=, H0 = *H0, A0 = *A0] {
    TaskOutcome o;
    const auto x = diameter_experiment(members, H0, A0, genus, res, D_config, tail);
    Json ms = Json::array();
    int included = 0;
    for (const auto& m : x.members) {
      Json j = {{"name", m.name},   {"area", num(m.area)},         {"max_H", num(m.max_mean)},
                {"genus", m.genus}, {"diameter", num(m.diameter)}, {"included", m.included}};
      if (!m.included) j["reason"] = m.reason;
      included += m.included;
      ms.push_back(j);
    }
    const bool stable = x.tail_spread <= tol;
    o.results = {{"members", ms},        {"D_obs", num(x.D_obs)},     {"config_ok", x.config_ok},
                 {"tail_spread", num(x.tail_spread)}, {"tail_stable", stable}};
    o.verdict = verdict_of(included > 0 && stable && x.config_ok);
    return o;
  };
  return t;
}

inline PreparedTask prepare_neck(Params& p, const TaskContext& ctx) {
  const auto rhos = family_rhos(p, ctx);
  const int res = p.integer("resolution", 64, 4);
  const auto eps_cfg = p.opt_positive("eps");
  PreparedTask t;
  t.inputs = {{"rho", nums(rhos)}, {"resolution", res}, {"eps", num(eps_cfg)}};
  t.run = [=] {
    TaskOutcome o;
    Json rows = Json::array();
    bool ok = true;
    double prev = kInf;
    for (double rho : rhos) {
      const auto built = build_surface(CatalogSurface{Dumbbell{rho}, AmbientSpace::euclidean(3)}, res);
      const auto n = dumbbell_neck_region(built.mesh, rho);
      const double eps = eps_cfg.value_or(n.suggested_eps);
      const auto r = neck_diameter(n.region, eps);
      const bool row_ok = r.boundary_close_ok && r.split_ok && r.area_ok;
      ok = ok && row_ok && r.diameter < prev;
      prev = r.diameter;
      rows.push_back({{"rho", rho},
                      {"neck_modulus", num(n.modulus)},
                      {"eps", num(eps)},
                      {"diameter", num(r.diameter)},
                      {"area", num(r.area)},
                      {"curve_lengths", nums({r.length0, r.length1})},
                      {"boundary_hausdorff", num(r.boundary_hausdorff)},
                      {"boundary_gap", num(r.boundary_gap)},
                      {"split_perimeter", num(r.split_perimeter)},
                      {"stokes_bound", num(r.stokes_bound)},
                      {"area_bound_5eps2", num(r.area_bound_5)},
                      {"area_bound_6eps2", num(r.area_bound_6)},
                      {"checks", {{"hausdorff_2eps", r.boundary_close_ok}, {"split_6eps", r.split_ok},
                                  {"area_stokes", r.area_ok}}}});
    }
    o.results = {{"necks", rows}};
    o.verdict = verdict_of(ok);
    return o;
  };
  return t;
}

}  // namespace detail

/// Validates a task's parameters and returns its runner.
inline PreparedTask prepare_task(const TaskConfig& tc, const TaskContext& ctx) {
  Params p(tc.params, tc.path);
  PreparedTask t;
  const std::map<std::string, PreparedTask (*)(Params&, const TaskContext&)> table{
      {"curvature", detail::prepare_curvature},       {"jacobi", detail::prepare_jacobi},
      {"schwarz", detail::prepare_schwarz},           {"isoperimetric", detail::prepare_isoperimetric},
      {"monotonicity", detail::prepare_monotonicity}, {"net", detail::prepare_net},
      {"gauss-bonnet", detail::prepare_gauss_bonnet}, {"modulus", detail::prepare_modulus},
      {"lift", detail::prepare_lift},                 {"limit", detail::prepare_limit},
      {"dimension", detail::prepare_dimension},       {"diameter", detail::prepare_diameter},
      {"neck", detail::prepare_neck}};
  auto it = table.find(tc.type);
  if (it == table.end()) {
    std::string known;
    for (const auto& [k, f] : table) known += (known.empty() ? "" : ", ") + k;
    throw ConfigError(tc.path + ".type", "unknown task type '" + tc.type + "' (known: " + known + ")");
  }
  t = it->second(p, ctx);
  p.finish();
  t.id = tc.id;
  t.type = tc.type;
  return t;
}

struct TaskRecord {
  std::string id, type, verdict;
  Json inputs, results;
  std::string error;
  double seconds = 0.0;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> matrices;
  std::vector<Table> tables;
};

struct VerificationReport {
  Json json;  // deterministic: no timings
  std::vector<TaskRecord> tasks;
  int exit_code = 0;
  std::string format = "json";
  std::string out_dir;
  bool timing = false;
};

inline TaskRecord execute(const PreparedTask& t) {
  TaskRecord r;
  r.id = t.id;
  r.type = t.type;
  r.inputs = t.inputs;
  const auto start = std::chrono::steady_clock::now();
  try {
    TaskOutcome o = t.run();
    r.verdict = o.verdict;
    r.results = std::move(o.results);
    r.matrices = std::move(o.matrices);
    r.tables = std::move(o.tables);
  } catch (const InapplicableError& e) {
    r.verdict = "not-applicable";
    r.results = {{"reason", e.what()}};
  } catch (const UnsupportedError& e) {
    r.verdict = "not-applicable";
    r.results = {{"reason", e.what()}};
  } catch (const std::exception& e) {
    r.verdict = "fail";
    r.error = e.what();
    r.results = Json::object();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Prepares every task (config errors surface here, before anything runs),
/// then executes them in order, or concurrently with `parallel`.
inline VerificationReport run_scenario(const ScenarioConfig& cfg, bool parallel = false) {
  TaskContext ctx;
  ctx.surface = cfg.surface;
  ctx.surface_spec = cfg.surface_spec;
  ctx.family = cfg.family;
  ctx.ambient = cfg.ambient;
  ctx.resolution = cfg.resolution;
  ctx.constants = cfg.constants;
  std::vector<PreparedTask> prepared;
  for (const auto& tc : cfg.tasks) prepared.push_back(prepare_task(tc, ctx));

  VerificationReport rep;
  rep.format = cfg.format;
  rep.out_dir = cfg.out_dir;
  rep.timing = cfg.timing;
  if (parallel) {
    std::vector<std::future<TaskRecord>> fut;
    for (const auto& t : prepared) fut.push_back(std::async(std::launch::async, [&t] { return execute(t); }));
    for (auto& f : fut) rep.tasks.push_back(f.get());
  } else {
    for (const auto& t : prepared) rep.tasks.push_back(execute(t));
  }

  Json& j = rep.json;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["scenario"] = cfg.name;
  j["config"] = cfg.source;
  Json resolved;
  resolved["seed"] = cfg.constants.seed;
  resolved["H0"] = num(cfg.constants.h0);
  resolved["A0"] = num(cfg.constants.A0);
  resolved["a0"] = num(cfg.constants.a0);
  resolved["beta"] = cfg.constants.beta;
  resolved["resolution"] = cfg.resolution;
  resolved["ambient"] = detail::ambient_json(ctx.constants_ambient());
  Json tols;
  for (const auto& [k, v] : cfg.constants.tolerances) tols[k] = v;
  resolved["tolerances"] = tols;
  j["resolved"] = resolved;
  j["tasks"] = Json::array();
  std::map<std::string, int> counts;
  bool all_ok = true;
  for (const auto& r : rep.tasks) {
    Json t;
    t["id"] = r.id;
    t["type"] = r.type;
    t["verdict"] = r.verdict;
    t["inputs"] = r.inputs;
    t["results"] = r.results;
    if (!r.error.empty()) t["error"] = r.error;
    if (!r.matrices.empty()) {
      Json files = Json::array();
      for (const auto& [name, m] : r.matrices) files.push_back("matrix_" + detail::sanitize(name) + ".csv");
      t["matrix_files"] = files;
    }
    j["tasks"].push_back(t);
    ++counts[r.verdict];
    all_ok = all_ok && (r.verdict == "pass" || r.verdict == "not-applicable");
  }
  Json summary;
  for (const char* v : {"pass", "fail", "not-applicable", "no-convergence"}) summary[v] = counts[v];
  summary["exit_code"] = all_ok ? 0 : 1;
  j["summary"] = summary;
  rep.exit_code = all_ok ? 0 : 1;
  return rep;
}

inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  char buf[40];
  for (int i = 0; i < m.rows(); ++i) {
    for (int k = 0; k < m.cols(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, k));
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
}

inline void write_table_csv(std::ostream& out, const Table& t) {
  char buf[40];
  for (std::size_t k = 0; k < t.header.size(); ++k) out << (k ? "," : "") << t.header[k];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", row[k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
}

/// Writes report.json, plus one CSV per matrix and table for csv-bundle.
/// Returns the files written, in order.
inline std::vector<std::string> emit_report(const VerificationReport& rep, const std::string& dir,
                                            const std::string& format) {
  namespace fs = std::filesystem;
  if (format != "json" && format != "csv-bundle") throw ConfigError("output.format", "must be json or csv-bundle");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  std::vector<std::string> written;
  auto open = [&](const std::string& name) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path.string());
    return out;
  };
  {
    auto out = open("report.json");
    out << rep.json.dump(2) << '\n';
  }
  if (format == "csv-bundle") {
    for (const auto& t : rep.tasks) {
      for (const auto& [name, m] : t.matrices) {
        auto out = open("matrix_" + detail::sanitize(name) + ".csv");
        write_matrix_csv(out, m);
      }
      for (const auto& tab : t.tables) {
        auto out = open("table_" + detail::sanitize(t.id) + "_" + detail::sanitize(tab.name) + ".csv");
        write_table_csv(out, tab);
      }
    }
  }
  if (rep.timing) {
    Json tj;
    for (const auto& t : rep.tasks) tj[t.id] = t.seconds;
    auto out = open("timing.json");
    out << tj.dump(2) << '\n';
  }
  return written;
}

}  // namespace bmc
