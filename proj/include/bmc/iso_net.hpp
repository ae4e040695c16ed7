#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bmc/curvature.hpp"
#include "bmc/geodesic.hpp"

namespace bmc {

/// v0 = (omega_2 / 2) min{1, i0^2 / pi^2} with omega_2 = pi; none for non-compact ambients.
inline std::optional<double> isoperimetric_v0(const AmbientSpace& ambient) {
  if (!ambient.compact()) return std::nullopt;
  const double i0 = ambient_constants(ambient).injectivity_radius;
  return kPi / 2.0 * std::min(1.0, i0 * i0 / (kPi * kPi));
}

struct IsoperimetricRecord {
  double area = 0.0;
  double boundary_length = 0.0;
  double mean_integral = 0.0;  // integral of |H| over the region
  double beta = 0.0;
  double beta_empirical = kInf;
  std::optional<double> v0;
  std::string branch;  // "inequality", "large-area" or "violated"
  bool pass = false;
};

/// Per-vertex |H| with boundary vertices filled from their interior neighbours.
inline std::vector<double> mean_curvature_with_boundary(const TriMesh& mesh) {
  auto c = estimate_curvatures(mesh);
  std::vector<double> H = c.mean_norm;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (!std::isnan(H[v])) continue;
    double s = 0.0;
    int n = 0;
    for (int w : mesh.vertex_neighbors()[v])
      if (!std::isnan(c.mean_norm[w])) {
        s += c.mean_norm[w];
        ++n;
      }
    H[v] = n ? s / n : 0.0;
  }
  return H;
}

/// Checks sqrt(A) <= beta (L + int |H|), or the alternative A >= v0.
/// `mean_norm` gives |H| per vertex; estimated from the mesh when empty.
inline IsoperimetricRecord isoperimetric_check(const TriMesh& region, double beta, std::optional<double> v0,
                                               std::vector<double> mean_norm = {}) {
  if (!(beta > 0.0)) throw ConfigError("constants.beta", "beta must be positive");
  IsoperimetricRecord rec;
  rec.beta = beta;
  rec.v0 = v0;
  rec.area = surface_area(region);
  for (const auto& loop : region.boundary_loops()) rec.boundary_length += loop_length(region, loop);
  if (rec.boundary_length == 0.0 && !(v0 && rec.area >= *v0))
    throw InapplicableError("closed region with area below v0: the inequality does not apply");
  if (mean_norm.empty()) mean_norm = mean_curvature_with_boundary(region);
  const auto A = mixed_areas(region);
  for (int v = 0; v < region.num_vertices(); ++v) rec.mean_integral += A[v] * mean_norm[v];
  const double rhs = rec.boundary_length + rec.mean_integral;
  if (rhs > 0.0) rec.beta_empirical = std::sqrt(rec.area) / rhs;
  if (std::sqrt(rec.area) <= beta * rhs) rec.branch = "inequality";
  else if (v0 && rec.area >= *v0) rec.branch = "large-area";
  else rec.branch = "violated";
  rec.pass = rec.branch != "violated";
  return rec;
}

struct MonotonicityConstants {
  double beta = 0.0, H0 = 0.0;
  double K0 = 0.0;
  double c = 0.0;       // min{1, 1/(16 beta^2)}
  double R = kInf;      // conjugate radius bound
  double v0 = 0.0;
  double sqrt_v0 = 0.0;
  double T = kInf;      // 1/(2 beta H0), +inf when H0 = 0
  double T_literal = 0.0;  // 2 beta H0 as printed in the statement
  double delta = 0.0;   // min{R, sqrt v0, T}
};

inline MonotonicityConstants monotonicity_constants(const AmbientSpace& ambient, double H0, double beta) {
  if (!ambient.compact()) throw UnsupportedError("monotonicity constants need a compact ambient (v0)");
  if (!(beta > 0.0)) throw ConfigError("constants.beta", "beta must be positive");
  MonotonicityConstants m;
  m.beta = beta;
  m.H0 = H0;
  m.K0 = curvature_bound(H0, ambient);
  m.c = std::min(1.0, 1.0 / (16.0 * beta * beta));
  m.R = conjugate_radius_bound(m.K0).R;
  m.v0 = *isoperimetric_v0(ambient);
  m.sqrt_v0 = std::sqrt(m.v0);
  m.T = H0 > 0.0 ? 1.0 / (2.0 * beta * H0) : kInf;
  m.T_literal = 2.0 * beta * H0;
  m.delta = std::min({m.R, m.sqrt_v0, m.T});
  return m;
}

struct MonotonicityResult {
  double eps = 0.0;
  double area = 0.0;
  double bound = 0.0;  // c eps^2
  bool out_of_range = false;
  bool pass = false;
};

/// area(B(p, eps)) >= c eps^2. eps beyond delta is still evaluated but flagged.
inline MonotonicityResult monotonicity_check(const GeodesicGraph& g, const SamplePoint& p, double eps, double c,
                                             double delta = kInf) {
  MonotonicityResult r;
  r.eps = eps;
  r.out_of_range = eps > delta;
  r.area = intrinsic_ball(g, p, eps).area;
  r.bound = c * eps * eps;
  r.pass = r.area >= r.bound;
  return r;
}

// ---------------------------------------------------------------------------
// Nets.

struct Net {
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::vector<int> points;             // vertex ids in insertion order
  std::vector<std::vector<double>> pairwise;
  double min_separation = kInf;
  double max_cover_distance = 0.0;     // max over vertices of distance to the net
  bool separated = true;
  bool maximal = true;
  bool single_point = false;           // delta at least the diameter
  double diameter = 0.0;
};

/// Farthest-point greedy delta-net over mesh vertices, started at a seeded vertex.
inline Net greedy_net(const GeodesicGraph& g, double delta, std::uint64_t seed, bool keep_matrix = true) {
  if (!(delta > 0.0)) throw ConfigError("delta", "delta must be positive");
  const TriMesh& mesh = g.mesh();
  Net net;
  net.delta = delta;
  net.seed = seed;
  std::mt19937_64 rng(seed);
  const int start = std::uniform_int_distribution<int>(0, mesh.num_vertices() - 1)(rng);
  net.diameter = mesh_diameter(g);
  net.points.push_back(start);
  std::vector<double> D = g.vertex_distances_from_vertices({start});
  // The graph overestimates distances slightly, so compare with a margin.
  if (delta >= net.diameter * 0.98) {
    net.single_point = true;
  } else {
    while (true) {
      const auto it = std::max_element(D.begin(), D.end());
      if (*it < delta) break;
      const int v = static_cast<int>(it - D.begin());
      net.points.push_back(v);
      const auto dv = g.vertex_distances_from_vertices({v}, *it);
      for (int w = 0; w < mesh.num_vertices(); ++w) D[w] = std::min(D[w], dv[w]);
    }
  }
  // Certificates, recomputed from scratch.
  const auto cover = g.vertex_distances_from_vertices(net.points);
  net.max_cover_distance = *std::max_element(cover.begin(), cover.end());
  net.maximal = net.single_point || net.max_cover_distance < delta;
  const int n = static_cast<int>(net.points.size());
  if (keep_matrix) net.pairwise.assign(n, std::vector<double>(n, 0.0));
  // A maximal net has a neighbour within 2 delta of each point, so without the
  // matrix the search can stop there.
  const double bound = keep_matrix ? kInf : 2.0 * delta;
  for (int i = 0; i < n; ++i) {
    const auto d = g.vertex_distances_from_vertices({net.points[i]}, bound);
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double x = d[net.points[j]];
      if (keep_matrix) net.pairwise[i][j] = x;
      net.min_separation = std::min(net.min_separation, x);
    }
  }
  net.separated = n == 1 || net.min_separation >= delta;
  return net;
}

struct CardinalityBounds {
  double C0 = 0.0;      // 8 pi^2 (1 - chi) + 4 pi K0 A0
  double lower = 0.0;   // (a0 / C0) delta^-2, 0 when C0 <= 0
  double upper = 0.0;   // A0 / (c (delta/2)^2)
  bool lower_degenerate = false;
};

inline CardinalityBounds net_cardinality_bounds(double delta, double A0, double a0, double K0, int chi, double c) {
  if (K0 > 0.0 && !(delta < 1.0 / std::sqrt(2.0 * K0)))
    throw HypothesisError("delta must be below 1/sqrt(2 K0)");
  CardinalityBounds b;
  b.C0 = 8.0 * kPi * kPi * (1.0 - chi) + 4.0 * kPi * K0 * A0;
  if (b.C0 > 0.0) b.lower = a0 / b.C0 / (delta * delta);
  else b.lower_degenerate = true;
  b.upper = A0 / (c * (delta / 2.0) * (delta / 2.0));
  return b;
}

// ---------------------------------------------------------------------------
// Gauss-Bonnet scan over concentric balls.

struct GaussBonnetScan {
  bool applicable = true;
  std::string reason;
  double delta = 0.0, C = 0.0;
  double ball_area = 0.0;
  double threshold = 0.0;            // 2 pi - C/2
  double delta_prime = 0.0;          // largest grid radius meeting the bound
  double curvature_integral = 0.0;   // area-weighted defects at delta_prime
  double contained_integral = 0.0;   // defects of fully contained vertices at delta_prime
  double tolerance = 0.0;            // |defects| of straddling vertices at delta_prime
  std::vector<double> grid, integrals, contained, tolerances;
  bool pass = false;
};

/// Scans delta' = delta i / n, i = 1..n. The curvature integral of a ball
/// weighs each vertex defect by the fraction of its one-ring inside; the
/// defects of straddling vertices form the discretization tolerance, and the
/// integral over fully contained vertices is reported alongside.
inline GaussBonnetScan gauss_bonnet_ball_scan(const GeodesicGraph& g, const CurvatureField& cf, const SamplePoint& p,
                                              double delta, double C, double K0, int n = 50) {
  if (K0 > 0.0 && !(delta < 1.0 / std::sqrt(3.0 * K0)))
    throw HypothesisError("delta must be below 1/sqrt(3 K0)");
  const TriMesh& mesh = g.mesh();
  GaussBonnetScan s;
  s.delta = delta;
  s.C = C;
  s.threshold = 2.0 * kPi - C / 2.0;
  const BallRegion outer = intrinsic_ball(g, p, delta);
  s.ball_area = outer.area;
  if (!(outer.area > C * delta * delta)) {
    s.applicable = false;
    s.reason = "area(B(p, delta)) <= C delta^2";
    return s;
  }
  const auto& dist = outer.vertex_distance;
  for (int i = 1; i <= n; ++i) {
    const double r = delta * i / n;
    double integral = 0.0, contained = 0.0, tol = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (!cf.interior[v]) continue;
      double in = 0.0, total = 0.0, far = 0.0;
      for (int f : mesh.vertex_faces()[v]) {
        const Face& t = mesh.faces()[f];
        const std::array<double, 3> d{dist[t[0]], dist[t[1]], dist[t[2]]};
        const double lo = std::min({d[0], d[1], d[2]}), hi = std::max({d[0], d[1], d[2]});
        far = std::max(far, hi);
        const double a = mesh.face_area(f);
        total += a;
        if (hi <= r) in += a;
        else if (lo < r) in += detail::clip_triangle(mesh.layout(f), d, r).first;
      }
      const double frac = in / total;
      if (frac <= 0.0) continue;
      integral += frac * cf.angle_defect[v];
      if (far <= r) contained += cf.angle_defect[v];
      else tol += std::abs(cf.angle_defect[v]);
    }
    s.grid.push_back(r);
    s.integrals.push_back(integral);
    s.contained.push_back(contained);
    s.tolerances.push_back(tol);
    if (integral <= s.threshold + tol) {
      s.pass = true;
      s.delta_prime = r;
      s.curvature_integral = integral;
      s.contained_integral = contained;
      s.tolerance = tol;
    }
  }
  if (!s.pass) {
    s.delta_prime = s.grid.back();
    s.curvature_integral = s.integrals.back();
    s.contained_integral = s.contained.back();
    s.tolerance = s.tolerances.back();
  }
  return s;
}

}  // namespace bmc
