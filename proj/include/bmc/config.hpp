#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "bmc/catalog.hpp"

// Scenario configuration: a JSON document validated up front, with strict
// rejection of unknown keys. Every error names the offending key path.

namespace bmc {

using Json = nlohmann::ordered_json;

/// Typed, tracked access to one JSON object. finish() rejects keys that were
/// never asked for.
class Params {
 public:
  Params(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  const std::string& path() const { return path_; }

  bool has(const std::string& k) {
    used_.insert(k);
    return j_->contains(k);
  }

  const Json* raw(const std::string& k) {
    used_.insert(k);
    auto it = j_->find(k);
    return it == j_->end() ? nullptr : &*it;
  }

  std::optional<double> opt_number(const std::string& k) {
    const Json* v = raw(k);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ConfigError(key(k), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(key(k), "must be finite");
    return x;
  }
  double number(const std::string& k, double def) { return opt_number(k).value_or(def); }

  std::optional<double> opt_positive(const std::string& k) {
    auto x = opt_number(k);
    if (x && !(*x > 0.0)) throw ConfigError(key(k), "must be positive");
    return x;
  }
  double positive(const std::string& k, double def) { return opt_positive(k).value_or(def); }
  double required_positive(const std::string& k) {
    auto x = opt_positive(k);
    if (!x) throw ConfigError(key(k), "required");
    return *x;
  }

  std::optional<double> opt_nonnegative(const std::string& k) {
    auto x = opt_number(k);
    if (x && !(*x >= 0.0)) throw ConfigError(key(k), "must be non-negative");
    return x;
  }

  int integer(const std::string& k, int def, int min = 0) {
    const Json* v = raw(k);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
    const auto x = v->get<long long>();
    if (x < min) throw ConfigError(key(k), "must be at least " + std::to_string(min));
    if (x > 1000000000LL) throw ConfigError(key(k), "too large");
    return static_cast<int>(x);
  }

  std::optional<std::string> opt_string(const std::string& k) {
    const Json* v = raw(k);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(key(k), "expected a string");
    return v->get<std::string>();
  }
  std::string string(const std::string& k, const std::string& def) { return opt_string(k).value_or(def); }

  bool boolean(const std::string& k, bool def) {
    const Json* v = raw(k);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::vector<double>> opt_numbers(const std::string& k, bool positive = true) {
    const Json* v = raw(k);
    if (!v) return std::nullopt;
    if (!v->is_array() || v->empty()) throw ConfigError(key(k), "expected a non-empty array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const Json& x = (*v)[i];
      const std::string at = key(k) + "[" + std::to_string(i) + "]";
      if (!x.is_number()) throw ConfigError(at, "expected a number");
      const double d = x.get<double>();
      if (!std::isfinite(d) || (positive && !(d > 0.0))) throw ConfigError(at, "must be positive");
      out.push_back(d);
    }
    return out;
  }
  std::vector<double> numbers(const std::string& k, std::vector<double> def) {
    return opt_numbers(k).value_or(std::move(def));
  }

  std::optional<std::vector<std::string>> opt_strings(const std::string& k) {
    const Json* v = raw(k);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ConfigError(key(k), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_string()) throw ConfigError(key(k) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back((*v)[i].get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const Json* j_;
  std::string path_;
  std::set<std::string> used_;
};

/// Default tolerances by name; all are multiplied by the tolerance scale.
inline const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> t{
      {"curvature", 0.05},     // of K0 + 1
      {"jacobi", 1e-6},        // against the closed-form profile
      {"schwarz", 1e-3},       // K~ <= -1 + tol
      {"isoperimetric", 1e-6}, // against an expected beta_empirical
      {"modulus", 0.01},       // relative, against the closed form
      {"ahlfors", 0.02},       // relative slack of length^2 <= Area/Mod
      {"lift", 1e-8},          // exp residual
      {"period", 1e-6},        // separation of coincident lifts
      {"gauss-bonnet", 0.02},  // against the closed form
      {"pseudometric", 1e-9},  // triangle slack
      {"limit", 0.05},         // last Cauchy tail, relative to max distance
      {"dimension", 0.15},     // slope
      {"diameter", 0.05},      // tail spread
  };
  return t;
}

struct Constants {
  std::optional<double> h0, A0, a0;
  double beta = 10.0;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;  // resolved and scaled

  double tol(const std::string& name) const { return tolerances.at(name); }
};

struct TaskConfig {
  std::string id;
  std::string type;
  std::string path;  // "tasks[i]"
  Json params;       // the task object minus type and id
};

struct FamilyConfig {
  std::vector<CatalogSurface> members;
  std::vector<std::string> specs;
  std::vector<double> rhos;  // dumbbell families only
  bool dumbbell = false;
};

struct ScenarioConfig {
  Json source;
  std::string name;
  std::optional<AmbientSpace> ambient;
  std::optional<std::string> surface_spec;
  std::optional<CatalogSurface> surface;
  std::optional<FamilyConfig> family;
  int resolution = 64;
  Constants constants;
  std::vector<TaskConfig> tasks;
  std::string out_dir = "out";
  std::string format = "json";
  bool timing = false;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  double tolerance_scale = 1.0;
};

/// Line and column (1-based) of a byte offset.
inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // nlohmann reports the byte just past the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    const auto p = msg.find("; ");
    if (p != std::string::npos) msg = msg.substr(p + 2);
    throw ConfigError("", "parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                              msg);
  }
}

namespace detail {

inline AmbientSpace parse_ambient(Params p) {
  const std::string kind = p.string("kind", "euclidean");
  AmbientKind k;
  try {
    k = parse_ambient_kind(kind);
  } catch (const ConfigError&) {
    throw ConfigError(p.key("kind"), "must be one of euclidean, flat-torus, round-sphere");
  }
  const int n = p.integer("dimension", 3, 3);
  AmbientSpace a;
  switch (k) {
    case AmbientKind::euclidean:
      a = AmbientSpace::euclidean(n);
      break;
    case AmbientKind::flat_torus: {
      auto per = p.opt_numbers("periods");
      if (!per) per = std::vector<double>(n, 1.0);
      if (static_cast<int>(per->size()) != n) throw ConfigError(p.key("periods"), "need one period per axis");
      a = AmbientSpace::flat_torus(*per);
      break;
    }
    case AmbientKind::round_sphere:
      a = AmbientSpace::round_sphere(n, p.positive("radius", 1.0));
      break;
  }
  if (k != AmbientKind::flat_torus && p.has("periods"))
    throw ConfigError(p.key("periods"), "only valid for flat-torus");
  if (k != AmbientKind::round_sphere && p.has("radius"))
    throw ConfigError(p.key("radius"), "only valid for round-sphere");
  p.finish();
  return a;
}

inline FamilyConfig parse_family(Params p) {
  FamilyConfig f;
  auto name = p.opt_string("name");
  auto rhos = p.opt_numbers("rho");
  auto members = p.opt_strings("members");
  p.finish();
  if (members && (name || rhos)) throw ConfigError(p.key("members"), "give either members or name + rho");
  if (members) {
    for (std::size_t i = 0; i < members->size(); ++i) {
      const std::string at = p.key("members") + "[" + std::to_string(i) + "]";
      f.members.push_back(parse_surface_spec((*members)[i], at));
      f.specs.push_back((*members)[i]);
    }
    f.dumbbell = std::all_of(f.members.begin(), f.members.end(),
                             [](const CatalogSurface& s) { return std::holds_alternative<Dumbbell>(s.family); });
    if (f.dumbbell)
      for (const auto& s : f.members) f.rhos.push_back(std::get<Dumbbell>(s.family).neck);
  } else {
    if (!name) throw ConfigError(p.key("name"), "required (or give members)");
    if (*name != "dumbbell") throw ConfigError(p.key("name"), "only the dumbbell family takes a rho list");
    if (!rhos) throw ConfigError(p.key("rho"), "required");
    f.dumbbell = true;
    f.rhos = *rhos;
    for (std::size_t i = 0; i < rhos->size(); ++i) {
      std::ostringstream spec;
      spec << "dumbbell:rho=" << (*rhos)[i];
      f.members.push_back(make_surface("dumbbell", {{"rho", (*rhos)[i]}}, p.key("rho") + "[" + std::to_string(i) + "]"));
      f.specs.push_back(spec.str());
    }
  }
  if (f.members.empty()) throw ConfigError(p.path(), "family is empty");
  return f;
}

}  // namespace detail

/// Validates a parsed document. Task parameters are validated later, when
/// the tasks are prepared, but still before anything runs.
inline ScenarioConfig parse_scenario(const Json& doc, const RunOverrides& ov = {}) {
  Params p(doc, "");
  ScenarioConfig c;
  c.source = doc;
  c.name = p.string("scenario", "unnamed");
  if (const Json* a = p.raw("ambient")) c.ambient = detail::parse_ambient(Params(*a, "ambient"));
  if (auto s = p.opt_string("surface")) {
    c.surface_spec = *s;
    c.surface = parse_surface_spec(*s, "surface");
  }
  if (const Json* f = p.raw("family")) c.family = detail::parse_family(Params(*f, "family"));
  c.resolution = p.integer("resolution", 64, 4);

  const Json* cj = p.raw("constants");
  if (!cj) throw ConfigError("constants", "required (constants.seed is mandatory)");
  {
    Params q(*cj, "constants");
    c.constants.h0 = q.opt_nonnegative("h0");
    c.constants.A0 = q.opt_positive("A0");
    c.constants.a0 = q.opt_positive("a0");
    c.constants.beta = q.positive("beta", 10.0);
    const Json* s = q.raw("seed");
    if (!s) throw ConfigError("constants.seed", "required");
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<long long>() >= 0))
      throw ConfigError("constants.seed", "expected a non-negative integer");
    c.constants.seed = s->get<std::uint64_t>();
    c.constants.tolerances = default_tolerances();
    if (const Json* t = q.raw("tolerances")) {
      if (!t->is_object()) throw ConfigError("constants.tolerances", "expected an object");
      for (auto it = t->begin(); it != t->end(); ++it) {
        const std::string at = "constants.tolerances." + it.key();
        if (!c.constants.tolerances.count(it.key())) throw ConfigError(at, "unknown tolerance");
        if (!it->is_number() || !(it->get<double>() > 0.0)) throw ConfigError(at, "must be a positive number");
        c.constants.tolerances[it.key()] = it->get<double>();
      }
    }
    q.finish();
  }
  if (!(ov.tolerance_scale > 0.0) || !std::isfinite(ov.tolerance_scale))
    throw ConfigError("--tolerance-scale", "must be positive");
  for (auto& [k, v] : c.constants.tolerances) v *= ov.tolerance_scale;
  if (ov.seed) c.constants.seed = *ov.seed;

  const Json* tj = p.raw("tasks");
  if (!tj || !tj->is_array() || tj->empty()) throw ConfigError("tasks", "expected a non-empty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tj->size(); ++i) {
    const std::string at = "tasks[" + std::to_string(i) + "]";
    const Json& t = (*tj)[i];
    if (!t.is_object()) throw ConfigError(at, "expected an object");
    if (!t.contains("type") || !t["type"].is_string()) throw ConfigError(at + ".type", "required string");
    TaskConfig tc;
    tc.type = t["type"].get<std::string>();
    tc.path = at;
    if (t.contains("id")) {
      if (!t["id"].is_string() || t["id"].get<std::string>().empty())
        throw ConfigError(at + ".id", "expected a non-empty string");
      tc.id = t["id"].get<std::string>();
    } else {
      tc.id = tc.type + "-" + std::to_string(i + 1);
    }
    if (!ids.insert(tc.id).second) throw ConfigError(at + ".id", "duplicate task id '" + tc.id + "'");
    tc.params = t;
    tc.params.erase("type");
    tc.params.erase("id");
    c.tasks.push_back(std::move(tc));
  }

  if (const Json* o = p.raw("output")) {
    Params q(*o, "output");
    c.out_dir = q.string("dir", c.out_dir);
    c.format = q.string("format", c.format);
    if (c.format != "json" && c.format != "csv-bundle")
      throw ConfigError("output.format", "must be json or csv-bundle");
    c.timing = q.boolean("timing", false);
    q.finish();
  }
  if (ov.out_dir) c.out_dir = *ov.out_dir;
  p.finish();
  return c;
}

inline ScenarioConfig parse_scenario_text(const std::string& text, const RunOverrides& ov = {}) {
  return parse_scenario(parse_json_text(text), ov);
}

}  // namespace bmc
