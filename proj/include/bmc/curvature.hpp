#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "bmc/ambient.hpp"
#include "bmc/chart.hpp"
#include "bmc/mesh.hpp"

namespace bmc {

struct CurvatureField {
  std::vector<double> mean_norm;    // |H|, trace convention; NaN on boundary vertices
  std::vector<double> gauss;        // angle defect / mixed area; NaN on boundary vertices
  std::vector<double> angle_defect; // 2pi - sum of angles (interior), pi - sum (boundary)
  std::vector<double> mixed_area;
  std::vector<char> interior;
  double stencil_radius = 0.0;  // mean two-ring radius used by the |H| fit
  double total_defect = 0.0;    // over interior vertices (= 2 pi chi when closed)

  double max_gauss() const { return reduce(gauss, true); }
  double max_mean() const { return reduce(mean_norm, true); }
  double min_gauss() const { return reduce(gauss, false); }

 private:
  static double reduce(const std::vector<double>& x, bool hi) {
    double m = hi ? -kInf : kInf;
    for (double v : x)
      if (!std::isnan(v)) m = hi ? std::max(m, v) : std::min(m, v);
    return m;
  }
};

/// Mixed Voronoi area of each vertex (Meyer et al.), on the layouts.
inline std::vector<double> mixed_areas(const TriMesh& mesh) {
  std::vector<double> A(mesh.num_vertices(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces()[f];
    const double area = mesh.face_area(f);
    int obtuse = -1;
    for (int i = 0; i < 3; ++i)
      if (mesh.corner_angle(f, i) > kPi / 2) obtuse = i;
    const auto& p = mesh.layout(f);
    for (int i = 0; i < 3; ++i) {
      if (obtuse >= 0) {
        A[t[i]] += obtuse == i ? area / 2 : area / 4;
        continue;
      }
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      A[t[i]] += ((p[j] - p[i]).squaredNorm() * mesh.corner_cot(f, k) +
                  (p[k] - p[i]).squaredNorm() * mesh.corner_cot(f, j)) / 8.0;
    }
  }
  return A;
}

inline std::vector<double> angle_defects(const TriMesh& mesh) {
  std::vector<double> sum(mesh.num_vertices(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int i = 0; i < 3; ++i) sum[mesh.faces()[f][i]] += mesh.corner_angle(f, i);
  std::vector<double> d(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) d[v] = (mesh.on_boundary(v) ? kPi : 2.0 * kPi) - sum[v];
  return d;
}

/// Per-vertex |H| and K. K is the angle defect over the mixed area; |H| comes
/// from a least-squares quadric height fit over the two-ring in the frame of
/// the area-weighted vertex normal.
inline CurvatureField estimate_curvatures(const TriMesh& mesh) {
  const int nv = mesh.num_vertices();
  CurvatureField c;
  c.angle_defect = angle_defects(mesh);
  c.mixed_area = mixed_areas(mesh);
  c.interior.assign(nv, 1);
  c.gauss.assign(nv, std::numeric_limits<double>::quiet_NaN());
  c.mean_norm.assign(nv, std::numeric_limits<double>::quiet_NaN());
  double radius_sum = 0.0;
  int radius_n = 0;
  std::vector<int> mark(nv, -1);
  for (int v = 0; v < nv; ++v) {
    if (mesh.on_boundary(v)) {
      if (!mesh.with_boundary()) throw MeshError("boundary vertex on a closed mesh");
      c.interior[v] = 0;
      continue;
    }
    c.total_defect += c.angle_defect[v];
    c.gauss[v] = c.angle_defect[v] / c.mixed_area[v];

    Vec3 n = Vec3::Zero();
    for (int f : mesh.vertex_faces()[v]) n += mesh.face_normal(f);
    n.normalize();
    const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 t1 = n.cross(seed).normalized();
    const Vec3 t2 = n.cross(t1);

    std::vector<int> ring;
    mark[v] = v;
    for (int w : mesh.vertex_neighbors()[v])
      if (mark[w] != v) {
        mark[w] = v;
        ring.push_back(w);
      }
    const std::size_t first = ring.size();
    for (std::size_t i = 0; i < first; ++i)
      for (int w : mesh.vertex_neighbors()[ring[i]])
        if (mark[w] != v) {
          mark[w] = v;
          ring.push_back(w);
        }
    Eigen::MatrixXd M(ring.size(), 5);
    Eigen::VectorXd z(ring.size());
    double rad = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Vec3 d = mesh.edge_vector(v, ring[i]);
      const double x = d.dot(t1), y = d.dot(t2);
      M.row(i) << x, y, 0.5 * x * x, x * y, 0.5 * y * y;
      z[i] = d.dot(n);
      rad = std::max(rad, std::hypot(x, y));
    }
    radius_sum += rad;
    ++radius_n;
    if (ring.size() < 5) continue;
    const Eigen::VectorXd s = M.colPivHouseholderQr().solve(z);
    const double dx = s[0], dy = s[1], a = s[2], b = s[3], cc = s[4];
    const double w = 1.0 + dx * dx + dy * dy;
    c.mean_norm[v] = std::abs(((1.0 + dy * dy) * a - 2.0 * dx * dy * b + (1.0 + dx * dx) * cc) / std::pow(w, 1.5));
  }
  c.stencil_radius = radius_n ? radius_sum / radius_n : 0.0;
  return c;
}

/// K0 = K_M + (n - 2) H0^2 / 4.
inline double curvature_bound(double H0, const AmbientSpace& ambient) {
  if (!(H0 >= 0.0)) throw ConfigError("constants.h0", "H0 must be non-negative");
  return ambient_constants(ambient).curvature_bound + (ambient.dim - 2) * H0 * H0 / 4.0;
}

struct ConjugateRadius {
  double R;
  bool infinite;  // K0 <= 0: no conjugate points
};

/// R = pi / (3 sqrt K0); +inf with a flag when K0 <= 0.
inline ConjugateRadius conjugate_radius_bound(double K0) {
  if (!(K0 > 0.0)) return {kInf, true};
  return {kPi / (3.0 * std::sqrt(K0)), false};
}

// ---------------------------------------------------------------------------
// Jacobi profile along a radial geodesic.

struct JacobiProfile {
  Vec2 base;
  double theta = 0.0;
  double step = 0.0;
  double R = 0.0;
  std::vector<double> r, f, df, K;
  std::vector<Vec2> path;  // chart coordinates along the geodesic
  bool increasing = true;
  bool above_half = true;  // f(r) > r/2 on (0, R]
};

/// Integrates the radial geodesic and f'' = -K f, f(0) = 0, f'(0) = 1 with
/// classical RK4 at fixed step (h is rounded so that R is a whole number of steps).
inline JacobiProfile jacobi_profile(const Chart& chart, const Vec2& p, double theta, double R, double h) {
  if (!(h > 0.0) || h > 1e-3 + 1e-15) throw ConfigError("h", "step must lie in (0, 1e-3]");
  if (!(R > 0.0) || !std::isfinite(R)) throw ConfigError("R", "radius must be positive and finite");
  if (!chart.contains(p[0], p[1])) throw ChartError("base point outside chart " + chart.name);
  const int n = std::max(1, static_cast<int>(std::ceil(R / h - 1e-9)));
  const double hh = R / n;

  using State = Eigen::Matrix<double, 6, 1>;  // u, v, u', v', f, f'
  auto rhs = [&](const State& s, double* K_out) {
    if (!chart.contains(s[0], s[1])) throw ChartError("geodesic left chart " + chart.name);
    const PointGeometry g = point_geometry(chart.eval(s[0], s[1]));
    State d;
    d[0] = s[2];
    d[1] = s[3];
    for (int k = 0; k < 2; ++k) {
      const auto& G = g.gamma[k];
      d[2 + k] = -(G[0][0] * s[2] * s[2] + 2.0 * G[0][1] * s[2] * s[3] + G[1][1] * s[3] * s[3]);
    }
    d[4] = s[5];
    d[5] = -g.gauss * s[4];
    if (K_out) *K_out = g.gauss;
    return d;
  };

  const PointGeometry g0 = point_geometry(chart.eval(p[0], p[1]));
  const auto frame = orthonormal_frame(g0);
  const Vec2 dir = std::cos(theta) * frame[0] + std::sin(theta) * frame[1];

  JacobiProfile out;
  out.base = p;
  out.theta = theta;
  out.step = hh;
  out.R = R;
  State s;
  s << p[0], p[1], dir[0], dir[1], 0.0, 1.0;
  double K0 = 0.0;
  rhs(s, &K0);
  out.r.push_back(0.0);
  out.f.push_back(0.0);
  out.df.push_back(1.0);
  out.K.push_back(K0);
  out.path.push_back(p);
  for (int i = 1; i <= n; ++i) {
    const State k1 = rhs(s, nullptr);
    const State k2 = rhs(s + 0.5 * hh * k1, nullptr);
    const State k3 = rhs(s + 0.5 * hh * k2, nullptr);
    const State k4 = rhs(s + hh * k3, nullptr);
    s += hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    double K = 0.0;
    rhs(s, &K);
    const double r = i * hh;
    if (s[4] <= out.f.back()) out.increasing = false;
    if (!(s[4] > r / 2.0)) out.above_half = false;
    out.r.push_back(r);
    out.f.push_back(s[4]);
    out.df.push_back(s[5]);
    out.K.push_back(K);
    out.path.push_back(Vec2(s[0], s[1]));
  }
  return out;
}

/// Largest violation of f(r) >= sin(sqrt(K0) r)/sqrt(K0) - slack (<= 0 means it holds).
inline double jacobi_lower_bound_violation(const JacobiProfile& jp, double K0, double slack) {
  double worst = -kInf;
  for (std::size_t i = 1; i < jp.r.size(); ++i) {
    const double r = jp.r[i];
    const double model = K0 > 0.0 ? std::sin(std::sqrt(K0) * r) / std::sqrt(K0) : r;
    worst = std::max(worst, model - slack - jp.f[i]);
  }
  return worst;
}

}  // namespace bmc
