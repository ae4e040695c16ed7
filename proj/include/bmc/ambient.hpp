#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bmc/error.hpp"

namespace bmc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = std::numbers::pi;

enum class AmbientKind { euclidean, flat_torus, round_sphere };

inline std::string to_string(AmbientKind k) {
  switch (k) {
    case AmbientKind::euclidean: return "euclidean";
    case AmbientKind::flat_torus: return "flat-torus";
    case AmbientKind::round_sphere: return "round-sphere";
  }
  return "?";
}

inline AmbientKind parse_ambient_kind(const std::string& s) {
  if (s == "euclidean") return AmbientKind::euclidean;
  if (s == "flat-torus") return AmbientKind::flat_torus;
  if (s == "round-sphere") return AmbientKind::round_sphere;
  throw ConfigError("ambient.kind", "unknown ambient kind '" + s + "'");
}

struct AmbientConstants {
  double curvature_bound;     // K_M
  double injectivity_radius;  // i0
};

/// Model ambient manifold with closed-form geometry.
///
/// Meshes live in the first three coordinates. For the flat torus the
/// displacement between two points uses the minimum-image convention, so
/// triangles may straddle the fundamental domain.
struct AmbientSpace {
  AmbientKind kind = AmbientKind::euclidean;
  int dim = 3;
  std::vector<double> periods;  // flat-torus only, one per axis
  double radius = 1.0;          // round-sphere only

  static AmbientSpace euclidean(int n = 3) {
    AmbientSpace a;
    a.kind = AmbientKind::euclidean;
    a.dim = n;
    a.validate();
    return a;
  }

  static AmbientSpace flat_torus(std::vector<double> periods) {
    AmbientSpace a;
    a.kind = AmbientKind::flat_torus;
    a.dim = static_cast<int>(periods.size());
    a.periods = std::move(periods);
    a.validate();
    return a;
  }

  static AmbientSpace round_sphere(int n, double radius) {
    AmbientSpace a;
    a.kind = AmbientKind::round_sphere;
    a.dim = n;
    a.radius = radius;
    a.validate();
    return a;
  }

  void validate() const {
    if (dim < 3) throw ConfigError("ambient.dim", "dimension must be >= 3");
    if (kind == AmbientKind::flat_torus) {
      if (static_cast<int>(periods.size()) != dim)
        throw ConfigError("ambient.periods", "need one period per axis");
      for (double p : periods)
        if (!(p > 0.0) || !std::isfinite(p))
          throw ConfigError("ambient.periods", "periods must be positive");
    }
    if (kind == AmbientKind::round_sphere && (!(radius > 0.0) || !std::isfinite(radius)))
      throw ConfigError("ambient.radius", "radius must be positive");
  }

  bool compact() const { return kind != AmbientKind::euclidean; }

  /// Displacement b - a in the ambient (minimum image on the torus).
  Vec3 displacement(const Vec3& a, const Vec3& b) const {
    Vec3 d = b - a;
    if (kind == AmbientKind::flat_torus) {
      for (int i = 0; i < 3 && i < dim; ++i) {
        const double p = periods[i];
        d[i] -= p * std::round(d[i] / p);
      }
    }
    return d;
  }

  /// Reduce a point into the fundamental domain [0, p_i).
  Vec3 wrap(Vec3 x) const {
    if (kind == AmbientKind::flat_torus) {
      for (int i = 0; i < 3 && i < dim; ++i) {
        const double p = periods[i];
        x[i] -= p * std::floor(x[i] / p);
      }
    }
    return x;
  }
};

/// K_M and i0 of the model ambient. Pure; equal inputs give identical bits.
inline AmbientConstants ambient_constants(const AmbientSpace& space) {
  space.validate();
  switch (space.kind) {
    case AmbientKind::euclidean:
      return {0.0, kInf};
    case AmbientKind::flat_torus: {
      double m = kInf;
      for (double p : space.periods) m = std::min(m, p);
      return {0.0, m / 2.0};
    }
    case AmbientKind::round_sphere:
      return {1.0 / (space.radius * space.radius), kPi * space.radius};
  }
  throw ConfigError("ambient.kind", "invalid ambient kind");
}

}  // namespace bmc
