#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bmc/ambient.hpp"
#include "bmc/chart.hpp"
#include "bmc/error.hpp"
#include "bmc/mesh.hpp"

namespace bmc {

// ---------------------------------------------------------------------------
// Catalog families.

struct RoundSphere { double radius = 1.0; };
struct Ellipsoid { double a = 1.0, b = 1.0, c = 1.0; };
struct FlatTorus2 { double px = 1.0, py = 1.0; };  // z = 0 slice of a flat T^3
struct TorusOfRevolution { double major = 1.0, minor = 0.3; };
struct Dumbbell { double neck = 0.1; };
struct Cylinder { double radius = 1.0, height = 1.0; };  // with-boundary patch
struct FlatDisc { double radius = 1.0; };              // with-boundary planar disc

using Family = std::variant<RoundSphere, Ellipsoid, FlatTorus2, TorusOfRevolution, Dumbbell, Cylinder, FlatDisc>;

struct CatalogSurface {
  Family family;
  AmbientSpace ambient;

  bool closed() const {
    return !std::holds_alternative<Cylinder>(family) && !std::holds_alternative<FlatDisc>(family);
  }
};

// ---------------------------------------------------------------------------
// Dumbbell: two unit spheres joined by a scaled catenoid neck r = rho cosh(z/rho),
// blended into the spheres by quintic collars over r in [kCollarInner, kCollarOuter].
//
// The upper half profile is parametrized by t in [0, 3]: [0,1] catenoid
// (z linear in t), [1,2] collar (r linear in t), [2,3] sphere (polar angle
// linear in t). The full profile uses T in [-3, 3] with the lower half mirrored.

class DumbbellProfile {
 public:
  static constexpr double kCollarInner = 0.35;
  static constexpr double kCollarOuter = 0.6;
  static constexpr double kMaxNeck = 0.25;

  explicit DumbbellProfile(double neck) : rho_(neck) {
    if (!(neck > 0.0) || neck > kMaxNeck)
      throw ConfigError("surface.rho", "dumbbell neck must lie in (0, 0.25]");
    const double rm = 0.5 * (kCollarInner + kCollarOuter);
    center_ = rho_ * std::acosh(rm / rho_) + std::sqrt(1.0 - rm * rm);
    za_ = rho_ * std::acosh(kCollarInner / rho_);
    psi_b_ = std::asin(kCollarOuter);
  }

  double neck() const { return rho_; }
  double sphere_center() const { return center_; }

  /// {r, z, r', z', r'', z''} at T in [-3, 3].
  std::array<double, 6> eval(double T) const {
    if (T < 0.0) {
      auto p = eval_upper(-T);
      return {p[0], -p[1], -p[2], p[3], p[4], -p[5]};
    }
    return eval_upper(T);
  }

  /// Signed mean curvature (trace convention) and Gauss curvature at T.
  std::pair<double, double> curvatures(double T) const {
    const auto p = eval(T);
    const double sp = std::hypot(p[2], p[3]);
    const double km = (p[2] * p[5] - p[3] * p[4]) / (sp * sp * sp);
    const double kp = p[3] / (p[0] * sp);
    return {km + kp, km * kp};
  }

 private:
  std::array<double, 6> eval_upper(double t) const {
    if (t <= 1.0) {
      const double z = t * za_;
      const double ch = std::cosh(z / rho_), sh = std::sinh(z / rho_);
      return {rho_ * ch, z, za_ * sh, za_, za_ * za_ / rho_ * ch, 0.0};
    }
    if (t <= 2.0) {
      const double d = kCollarOuter - kCollarInner;
      const double s = t - 1.0;
      const double r = kCollarInner + s * d;
      const double w = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
      const double ws = 30.0 * s * s * (1.0 - 2.0 * s + s * s);
      const double wss = 60.0 * s - 180.0 * s * s + 120.0 * s * s * s;
      const double q = r * r - rho_ * rho_;
      const double zc = rho_ * std::acosh(r / rho_);
      const double zc1 = rho_ / std::sqrt(q);
      const double zc2 = -rho_ * r / (q * std::sqrt(q));
      const double o = 1.0 - r * r;
      const double zs = center_ - std::sqrt(o);
      const double zs1 = r / std::sqrt(o);
      const double zs2 = 1.0 / (o * std::sqrt(o));
      const double z = (1.0 - w) * zc + w * zs;
      const double dz = (ws / d) * (zs - zc) + (1.0 - w) * zc1 + w * zs1;
      const double ddz = (wss / (d * d)) * (zs - zc) + 2.0 * (ws / d) * (zs1 - zc1) + (1.0 - w) * zc2 + w * zs2;
      return {r, z, d, d * dz, 0.0, d * d * ddz};
    }
    const double span = kPi - psi_b_;
    const double psi = psi_b_ + (t - 2.0) * span;
    const double s = std::sin(psi), c = std::cos(psi);
    return {s, center_ - c, span * c, span * s, -span * span * s, span * span * c};
  }

  double rho_;
  double center_;
  double za_;
  double psi_b_;
};

// ---------------------------------------------------------------------------
// Spec strings: "<family>:key=value,key=value".

inline std::map<std::string, double> parse_key_values(const std::string& text, const std::string& where) {
  std::map<std::string, double> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key=value, got '" + item + "'");
    try {
      std::size_t used = 0;
      const std::string val = item.substr(eq + 1);
      const double v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument("trailing");
      kv[item.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw ConfigError(where + "." + item.substr(0, eq), "not a number");
    }
  }
  return kv;
}

inline std::string family_name(const Family& f) {
  struct V {
    std::string operator()(const RoundSphere&) const { return "round-sphere"; }
    std::string operator()(const Ellipsoid&) const { return "ellipsoid"; }
    std::string operator()(const FlatTorus2&) const { return "flat-torus"; }
    std::string operator()(const TorusOfRevolution&) const { return "torus-of-revolution"; }
    std::string operator()(const Dumbbell&) const { return "dumbbell"; }
    std::string operator()(const Cylinder&) const { return "cylinder"; }
    std::string operator()(const FlatDisc&) const { return "flat-disc"; }
  };
  return std::visit(V{}, f);
}

/// Builds a catalog surface from its family name and parameters. Missing
/// parameters take defaults; unknown parameter names are rejected.
inline CatalogSurface make_surface(const std::string& family, const std::map<std::string, double>& kv,
                                   const std::string& where = "surface") {
  auto take = [&](const std::vector<std::string>& allowed) {
    for (const auto& [k, v] : kv)
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        throw ConfigError(where + "." + k, "unknown parameter for " + family);
  };
  auto get = [&](const std::string& k, double def) {
    auto it = kv.find(k);
    const double v = it == kv.end() ? def : it->second;
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(where + "." + k, "must be positive");
    return v;
  };
  CatalogSurface s;
  s.ambient = AmbientSpace::euclidean(3);
  if (family == "round-sphere") {
    take({"r"});
    s.family = RoundSphere{get("r", 1.0)};
  } else if (family == "ellipsoid") {
    take({"a", "b", "c"});
    s.family = Ellipsoid{get("a", 1.0), get("b", 1.0), get("c", 1.0)};
  } else if (family == "flat-torus") {
    take({"px", "py", "pz"});
    const double px = get("px", 1.0), py = get("py", 1.0);
    s.family = FlatTorus2{px, py};
    s.ambient = AmbientSpace::flat_torus({px, py, get("pz", std::max(px, py))});
  } else if (family == "torus-of-revolution") {
    take({"R", "rho"});
    const double R = get("R", 1.0), rho = get("rho", 0.3);
    if (rho >= R) throw ConfigError(where + ".rho", "tube radius must be below the major radius");
    s.family = TorusOfRevolution{R, rho};
  } else if (family == "dumbbell") {
    take({"rho"});
    const double rho = get("rho", 0.1);
    DumbbellProfile check(rho);
    s.family = Dumbbell{rho};
  } else if (family == "cylinder") {
    take({"r", "h"});
    s.family = Cylinder{get("r", 1.0), get("h", 1.0)};
  } else if (family == "flat-disc") {
    take({"r"});
    s.family = FlatDisc{get("r", 1.0)};
  } else {
    throw ConfigError(where, "unknown surface family '" + family + "'");
  }
  return s;
}

/// Parses "family:key=value,..." (resolution keys are handled by the caller).
inline CatalogSurface parse_surface_spec(const std::string& spec, const std::string& where = "surface") {
  const auto colon = spec.find(':');
  const std::string fam = spec.substr(0, colon);
  const auto kv = colon == std::string::npos ? std::map<std::string, double>{}
                                             : parse_key_values(spec.substr(colon + 1), where);
  return make_surface(fam, kv, where);
}

inline std::string describe(const CatalogSurface& s) {
  std::ostringstream o;
  o << family_name(s.family);
  std::visit(
      [&](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RoundSphere>) o << ":r=" << f.radius;
        if constexpr (std::is_same_v<T, Ellipsoid>) o << ":a=" << f.a << ",b=" << f.b << ",c=" << f.c;
        if constexpr (std::is_same_v<T, FlatTorus2>) o << ":px=" << f.px << ",py=" << f.py;
        if constexpr (std::is_same_v<T, TorusOfRevolution>) o << ":R=" << f.major << ",rho=" << f.minor;
        if constexpr (std::is_same_v<T, Dumbbell>) o << ":rho=" << f.neck;
        if constexpr (std::is_same_v<T, Cylinder>) o << ":r=" << f.radius << ",h=" << f.height;
        if constexpr (std::is_same_v<T, FlatDisc>) o << ":r=" << f.radius;
      },
      s.family);
  return o.str();
}

// ---------------------------------------------------------------------------
// Analytic services.

namespace detail {

/// Composite 8-point Gauss-Legendre rule on [a, b] with n panels.
template <class Fn>
double gauss_legendre(Fn&& fn, double a, double b, int panels) {
  static constexpr double x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                  -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                  0.7966664774136267,  0.9602898564975363};
  static constexpr double w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                  0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                  0.2223810344533745, 0.1012285362903763};
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double m = a + (p + 0.5) * h;
    for (int k = 0; k < 8; ++k) sum += w[k] * fn(m + 0.5 * h * x[k]);
  }
  return 0.5 * h * sum;
}

inline double ellipsoid_area(const Ellipsoid& e) {
  // Area element of (a sin th cos ph, b sin th sin ph, c cos th).
  auto inner = [&](double th) {
    return gauss_legendre(
        [&](double ph) {
          const double st = std::sin(th), ct = std::cos(th), sp = std::sin(ph), cp = std::cos(ph);
          const Vec3 xt(e.a * ct * cp, e.b * ct * sp, -e.c * st);
          const Vec3 xp(-e.a * st * sp, e.b * st * cp, 0.0);
          return xt.cross(xp).norm();
        },
        0.0, 2.0 * kPi, 32);
  };
  return gauss_legendre(inner, 0.0, kPi, 32);
}

inline double dumbbell_area(const DumbbellProfile& p) {
  auto elem = [&](double t) {
    const auto q = p.eval(t);
    return 2.0 * kPi * q[0] * std::hypot(q[2], q[3]);
  };
  double a = 0.0;
  for (int piece = 0; piece < 3; ++piece) a += gauss_legendre(elem, piece, piece + 1.0, 64);
  return 2.0 * a;
}

}  // namespace detail

/// Area of the analytic surface.
inline double analytic_area(const CatalogSurface& s) {
  struct V {
    double operator()(const RoundSphere& f) const { return 4.0 * kPi * f.radius * f.radius; }
    double operator()(const Ellipsoid& f) const { return detail::ellipsoid_area(f); }
    double operator()(const FlatTorus2& f) const { return f.px * f.py; }
    double operator()(const TorusOfRevolution& f) const { return 4.0 * kPi * kPi * f.major * f.minor; }
    double operator()(const Dumbbell& f) const { return detail::dumbbell_area(DumbbellProfile(f.neck)); }
    double operator()(const Cylinder& f) const { return 2.0 * kPi * f.radius * f.height; }
    double operator()(const FlatDisc& f) const { return kPi * f.radius * f.radius; }
  };
  return std::visit(V{}, s.family);
}

/// Supremum of |H| (trace convention) and of K over the analytic surface,
/// exact where closed forms exist and sampled densely otherwise.
inline std::pair<double, double> analytic_curvature_bounds(const CatalogSurface& s) {
  struct V {
    std::pair<double, double> operator()(const RoundSphere& f) const {
      return {2.0 / f.radius, 1.0 / (f.radius * f.radius)};
    }
    std::pair<double, double> operator()(const Ellipsoid& f) const {
      double hmax = 0.0, kmax = -kInf;
      for (int i = 0; i <= 400; ++i)
        for (int k = 0; k < 400; ++k) {
          const double th = kPi * i / 400.0, ph = 2.0 * kPi * k / 400.0;
          // Gradient of the implicit form at x is (x/a^2, y/b^2, z/c^2).
          const Vec3 x(f.a * std::sin(th) * std::cos(ph), f.b * std::sin(th) * std::sin(ph), f.c * std::cos(th));
          const Vec3 g(x.x() / (f.a * f.a), x.y() / (f.b * f.b), x.z() / (f.c * f.c));
          const double gn = g.norm();
          const double K = 1.0 / (f.a * f.a * f.b * f.b * f.c * f.c * std::pow(gn, 4));
          const double num = x.squaredNorm() - f.a * f.a - f.b * f.b - f.c * f.c;
          const double H = std::abs(num) / (f.a * f.a * f.b * f.b * f.c * f.c * std::pow(gn, 3));
          hmax = std::max(hmax, H);
          kmax = std::max(kmax, K);
        }
      return {hmax, kmax};
    }
    std::pair<double, double> operator()(const FlatTorus2&) const { return {0.0, 0.0}; }
    std::pair<double, double> operator()(const TorusOfRevolution& f) const {
      // Outer equator: kappa = 1/rho + 1/(R + rho); inner: 1/rho - 1/(R - rho).
      const double ho = 1.0 / f.minor + 1.0 / (f.major + f.minor);
      const double hi = std::abs(1.0 / f.minor - 1.0 / (f.major - f.minor));
      return {std::max(ho, hi), 1.0 / (f.minor * (f.major + f.minor))};
    }
    std::pair<double, double> operator()(const Dumbbell& f) const {
      const DumbbellProfile p(f.neck);
      double hmax = 0.0, kmax = -kInf;
      for (int i = 0; i <= 30000; ++i) {
        const double t = std::min(3.0 * i / 30000.0, 3.0 - 1e-6);
        const auto [H, K] = p.curvatures(t);
        hmax = std::max(hmax, std::abs(H));
        kmax = std::max(kmax, K);
      }
      return {hmax, kmax};
    }
    std::pair<double, double> operator()(const Cylinder& f) const { return {1.0 / f.radius, 0.0}; }
    std::pair<double, double> operator()(const FlatDisc&) const { return {0.0, 0.0}; }
  };
  return std::visit(V{}, s.family);
}

/// Ambient point at catalog chart coordinates.
///   round-sphere, ellipsoid: (polar angle from +z, azimuth)
///   flat-torus: (x, y);  torus-of-revolution: (tube angle, azimuth)
///   dumbbell: (profile parameter T in [-3, 3], azimuth)
///   cylinder: (azimuth, height);  flat-disc: (radius, azimuth)
inline Vec3 chart_point(const CatalogSurface& s, const Vec2& q) {
  struct V {
    const Vec2& q;
    Vec3 operator()(const RoundSphere& f) const {
      return f.radius * Vec3(std::sin(q[0]) * std::cos(q[1]), std::sin(q[0]) * std::sin(q[1]), std::cos(q[0]));
    }
    Vec3 operator()(const Ellipsoid& f) const {
      return Vec3(f.a * std::sin(q[0]) * std::cos(q[1]), f.b * std::sin(q[0]) * std::sin(q[1]),
                  f.c * std::cos(q[0]));
    }
    Vec3 operator()(const FlatTorus2&) const { return Vec3(q[0], q[1], 0.0); }
    Vec3 operator()(const TorusOfRevolution& f) const {
      const double r = f.major + f.minor * std::cos(q[0]);
      return Vec3(r * std::cos(q[1]), r * std::sin(q[1]), f.minor * std::sin(q[0]));
    }
    Vec3 operator()(const Dumbbell& f) const {
      const auto p = DumbbellProfile(f.neck).eval(q[0]);
      return Vec3(p[0] * std::cos(q[1]), p[0] * std::sin(q[1]), p[1]);
    }
    Vec3 operator()(const Cylinder& f) const {
      return Vec3(f.radius * std::cos(q[0]), f.radius * std::sin(q[0]), q[1]);
    }
    Vec3 operator()(const FlatDisc&) const { return Vec3(q[0] * std::cos(q[1]), q[0] * std::sin(q[1]), 0.0); }
  };
  return s.ambient.wrap(std::visit(V{q}, s.family));
}

/// Chart centred at the canonical base point of the surface, with the chart
/// coordinates of that point. Round spheres and ellipsoids use the north pole,
/// flat surfaces the origin, the torus of revolution its outer equator.
inline std::pair<Chart, Vec2> base_chart(const CatalogSurface& s) {
  struct V {
    std::pair<Chart, Vec2> operator()(const RoundSphere& f) const {
      return {ellipsoid_polar_chart(f.radius, f.radius, f.radius), Vec2::Zero()};
    }
    std::pair<Chart, Vec2> operator()(const Ellipsoid& f) const {
      return {ellipsoid_polar_chart(f.a, f.b, f.c), Vec2::Zero()};
    }
    std::pair<Chart, Vec2> operator()(const FlatTorus2&) const { return {plane_chart(), Vec2::Zero()}; }
    std::pair<Chart, Vec2> operator()(const FlatDisc&) const { return {plane_chart(), Vec2::Zero()}; }
    std::pair<Chart, Vec2> operator()(const TorusOfRevolution& f) const {
      const double R = f.major, r = f.minor;
      auto prof = [R, r](double a) {
        return std::array<double, 6>{R + r * std::cos(a), r * std::sin(a), -r * std::sin(a),
                                     r * std::cos(a), -r * std::cos(a), -r * std::sin(a)};
      };
      return {revolution_chart(prof, [](double) { return true; }, "torus-of-revolution"), Vec2::Zero()};
    }
    std::pair<Chart, Vec2> operator()(const Cylinder& f) const {
      const double R = f.radius, h = f.height;
      Chart ch;
      ch.name = "cylinder";
      ch.eval = [R](double phi, double z) {
        SurfaceJet j;
        j.x = Vec3(R * std::cos(phi), R * std::sin(phi), z);
        j.xu = Vec3(-R * std::sin(phi), R * std::cos(phi), 0.0);
        j.xv = Vec3(0.0, 0.0, 1.0);
        j.xuu = Vec3(-R * std::cos(phi), -R * std::sin(phi), 0.0);
        j.xuv = j.xvv = Vec3::Zero();
        return j;
      };
      ch.contains = [h](double, double z) { return z > 0.0 && z < h; };
      return {ch, Vec2(0.0, 0.5 * h)};
    }
    std::pair<Chart, Vec2> operator()(const Dumbbell& f) const {
      const DumbbellProfile p(f.neck);
      return {revolution_chart([p](double t) { return p.eval(t); },
                               [](double t) { return std::abs(t) < 2.95; }, "dumbbell"),
              Vec2::Zero()};
    }
  };
  return std::visit(V{}, s.family);
}

}  // namespace bmc
