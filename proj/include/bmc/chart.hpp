#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "bmc/ambient.hpp"
#include "bmc/error.hpp"

namespace bmc {

/// Embedding map of a chart and its derivatives up to second order.
struct SurfaceJet {
  Vec3 x, xu, xv, xuu, xuv, xvv;
};

/// Local parametrization of an analytic surface.
struct Chart {
  std::function<SurfaceJet(double, double)> eval;
  std::function<bool(double, double)> contains;
  std::string name;
};

/// Pointwise differential geometry read off a jet.
struct PointGeometry {
  double E, F, G;       // first fundamental form
  double L, M, N;       // second fundamental form w.r.t. the unit normal
  double gauss;         // K
  double mean;          // trace convention: kappa1 + kappa2 (signed)
  Vec3 normal;
  // Christoffel symbols gamma[k][i][j] with coordinates (u, v) = (0, 1).
  std::array<std::array<std::array<double, 2>, 2>, 2> gamma;
};

inline PointGeometry point_geometry(const SurfaceJet& j) {
  PointGeometry g{};
  g.E = j.xu.dot(j.xu);
  g.F = j.xu.dot(j.xv);
  g.G = j.xv.dot(j.xv);
  const double det = g.E * g.G - g.F * g.F;
  g.normal = j.xu.cross(j.xv).normalized();
  g.L = j.xuu.dot(g.normal);
  g.M = j.xuv.dot(g.normal);
  g.N = j.xvv.dot(g.normal);
  g.gauss = (g.L * g.N - g.M * g.M) / det;
  g.mean = (g.E * g.N - 2.0 * g.F * g.M + g.G * g.L) / det;
  const double inv[2][2] = {{g.G / det, -g.F / det}, {-g.F / det, g.E / det}};
  const Vec3* second[2][2] = {{&j.xuu, &j.xuv}, {&j.xuv, &j.xvv}};
  const Vec3* first[2] = {&j.xu, &j.xv};
  for (int k = 0; k < 2; ++k)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        double s = 0.0;
        for (int l = 0; l < 2; ++l) s += inv[k][l] * second[a][b]->dot(*first[l]);
        g.gamma[k][a][b] = s;
      }
  return g;
}

// ---------------------------------------------------------------------------
// Chart families.

/// Graph chart of the upper half of the ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1:
/// X(u, v) = (a u, b v, c sqrt(1 - u^2 - v^2)). Valid for u^2 + v^2 < 0.95^2.
inline Chart ellipsoid_polar_chart(double a, double b, double c) {
  Chart ch;
  ch.name = "ellipsoid-graph";
  ch.eval = [a, b, c](double u, double v) {
    const double s2 = 1.0 - u * u - v * v;
    const double s = std::sqrt(s2);
    const double s3 = s2 * s;
    SurfaceJet j;
    j.x = Vec3(a * u, b * v, c * s);
    j.xu = Vec3(a, 0.0, -c * u / s);
    j.xv = Vec3(0.0, b, -c * v / s);
    j.xuu = Vec3(0.0, 0.0, -c * (1.0 - v * v) / s3);
    j.xuv = Vec3(0.0, 0.0, -c * u * v / s3);
    j.xvv = Vec3(0.0, 0.0, -c * (1.0 - u * u) / s3);
    return j;
  };
  ch.contains = [](double u, double v) { return u * u + v * v < 0.95 * 0.95; };
  return ch;
}

/// Flat chart X(u, v) = (u, v, 0); also the universal cover of a flat torus.
inline Chart plane_chart() {
  Chart ch;
  ch.name = "plane";
  ch.eval = [](double u, double v) {
    SurfaceJet j;
    j.x = Vec3(u, v, 0.0);
    j.xu = Vec3(1.0, 0.0, 0.0);
    j.xv = Vec3(0.0, 1.0, 0.0);
    j.xuu = j.xuv = j.xvv = Vec3::Zero();
    return j;
  };
  ch.contains = [](double, double) { return true; };
  return ch;
}

/// Surface of revolution X(t, phi) = (r(t) cos phi, r(t) sin phi, z(t)).
/// `profile(t)` returns {r, z, r', z', r'', z''}.
inline Chart revolution_chart(std::function<std::array<double, 6>(double)> profile,
                              std::function<bool(double)> t_valid, std::string name) {
  Chart ch;
  ch.name = std::move(name);
  ch.eval = [profile](double t, double phi) {
    const auto p = profile(t);
    const double c = std::cos(phi), s = std::sin(phi);
    SurfaceJet j;
    j.x = Vec3(p[0] * c, p[0] * s, p[1]);
    j.xu = Vec3(p[2] * c, p[2] * s, p[3]);
    j.xv = Vec3(-p[0] * s, p[0] * c, 0.0);
    j.xuu = Vec3(p[4] * c, p[4] * s, p[5]);
    j.xuv = Vec3(-p[2] * s, p[2] * c, 0.0);
    j.xvv = Vec3(-p[0] * c, -p[0] * s, 0.0);
    return j;
  };
  ch.contains = [t_valid](double t, double) { return t_valid(t); };
  return ch;
}

/// Orthonormal frame of the tangent plane at (u, v), in coordinate components.
inline std::array<Vec2, 2> orthonormal_frame(const PointGeometry& g) {
  const double det = g.E * g.G - g.F * g.F;
  Vec2 e1(1.0 / std::sqrt(g.E), 0.0);
  Vec2 e2 = Vec2(-g.F, g.E) / std::sqrt(g.E * det);
  return {e1, e2};
}

}  // namespace bmc
