#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "bmc/catalog.hpp"
#include "bmc/mesh.hpp"

namespace bmc {

struct BuiltSurface {
  TriMesh mesh;
  double edge_constant = 0.0;  // max edge length <= edge_constant / resolution
  int resolution = 0;
};

namespace detail {

/// Ring of a surface of revolution: radius, height, vertex count, angular phase.
struct Ring {
  double r, z;
  int count;
  double phase;
};

/// Joins two rings by a strip of triangles, walking both in increasing angle.
inline void stitch_rings(int base_a, const Ring& a, int base_b, const Ring& b, std::vector<Face>& faces) {
  const double two_pi = 2.0 * kPi;
  const double a0 = a.phase;
  int j0 = 0;
  double best = kInf;
  for (int j = 0; j < b.count; ++j) {
    double d = std::remainder(b.phase + two_pi * j / b.count - a0, two_pi);
    if (std::abs(d) < best) {
      best = std::abs(d);
      j0 = j;
    }
  }
  const double b0 = a0 + std::remainder(b.phase + two_pi * j0 / b.count - a0, two_pi);
  int ia = 0, jb = 0;
  while (ia < a.count || jb < b.count) {
    const double na = a0 + two_pi * (ia + 1) / a.count;
    const double nb = b0 + two_pi * (jb + 1) / b.count;
    const int ai = base_a + ia % a.count, ai1 = base_a + (ia + 1) % a.count;
    const int bj = base_b + (j0 + jb) % b.count, bj1 = base_b + (j0 + jb + 1) % b.count;
    if (jb == b.count || (ia < a.count && na <= nb)) {
      faces.push_back({ai, ai1, bj});
      ++ia;
    } else {
      faces.push_back({ai, bj1, bj});
      ++jb;
    }
  }
}

/// Mesh of a surface of revolution from rings ordered along the profile.
/// Optional poles close the first/last ring; `cyclic` joins last to first.
inline void revolution_mesh(const std::vector<Ring>& rings, bool south_pole, double south_z, bool north_pole,
                            double north_z, bool cyclic, std::vector<Vec3>& verts, std::vector<Face>& faces) {
  std::vector<int> base;
  for (const Ring& g : rings) {
    base.push_back(static_cast<int>(verts.size()));
    for (int k = 0; k < g.count; ++k) {
      const double phi = g.phase + 2.0 * kPi * k / g.count;
      verts.emplace_back(g.r * std::cos(phi), g.r * std::sin(phi), g.z);
    }
  }
  for (std::size_t i = 0; i + 1 < rings.size(); ++i) stitch_rings(base[i], rings[i], base[i + 1], rings[i + 1], faces);
  if (cyclic) stitch_rings(base.back(), rings.back(), base.front(), rings.front(), faces);
  if (south_pole) {
    const int p = static_cast<int>(verts.size());
    verts.emplace_back(0.0, 0.0, south_z);
    const Ring& g = rings.front();
    for (int k = 0; k < g.count; ++k) faces.push_back({p, base[0] + (k + 1) % g.count, base[0] + k});
  }
  if (north_pole) {
    const int p = static_cast<int>(verts.size());
    verts.emplace_back(0.0, 0.0, north_z);
    const Ring& g = rings.back();
    for (int k = 0; k < g.count; ++k) faces.push_back({base.back() + k, base.back() + (k + 1) % g.count, p});
  }
}

inline int ring_count(double r, double h) { return std::max(6, static_cast<int>(std::lround(2.0 * kPi * r / h))); }

/// Icosahedral subdivision of the unit sphere at the given frequency.
inline void icosphere(int freq, std::vector<Vec3>& verts, std::vector<Face>& faces) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> ico = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  const std::vector<Face> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                  {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                  {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  // A lattice point is identified by its (base vertex, weight) pairs, which are
  // shared by all faces meeting at an icosahedron edge or vertex.
  using Key = std::vector<std::pair<int, int>>;
  std::map<Key, int> index;
  auto vertex = [&](const Face& f, int i, int j) {
    const int k = freq - i - j;
    Key key;
    if (i) key.push_back({f[0], i});
    if (j) key.push_back({f[1], j});
    if (k) key.push_back({f[2], k});
    std::sort(key.begin(), key.end());
    auto [it, fresh] = index.emplace(key, static_cast<int>(verts.size()));
    if (fresh) {
      const Vec3 p = (i * ico[f[0]] + j * ico[f[1]] + k * ico[f[2]]) / freq;
      verts.push_back(p.normalized());
    }
    return it->second;
  };
  for (const Face& f : tris) {
    // Row i counts steps from corner 0; (i, j) with i + j <= freq.
    for (int i = 0; i < freq; ++i)
      for (int j = 0; i + j < freq; ++j) {
        const int a = vertex(f, freq - i - j, j);
        const int b = vertex(f, freq - i - j - 1, j + 1);
        const int c = vertex(f, freq - i - j - 1, j);
        faces.push_back({a, b, c});
        if (i + j + 1 < freq) {
          const int d = vertex(f, freq - i - j - 2, j + 1);
          faces.push_back({b, d, c});
        }
      }
  }
}

inline void orient_outward(const std::vector<Vec3>& verts, std::vector<Face>& faces) {
  double vol = 0.0;
  for (const Face& f : faces) vol += verts[f[0]].dot(verts[f[1]].cross(verts[f[2]]));
  if (vol < 0.0)
    for (Face& f : faces) std::swap(f[1], f[2]);
}

inline std::vector<Ring> dumbbell_rings(const DumbbellProfile& prof, double h) {
  // Rings for the upper half, each piece sampled on its own so the sphere part
  // does not depend on the neck scale. Spacing follows h, refined near the
  // neck so at least 16 vertices go around it.
  auto local_h = [&](double r, int piece) { return piece == 2 ? h : std::min(h, 2.0 * kPi * r / 16.0); };
  std::vector<double> ts{0.0};
  for (int piece = 0; piece < 3; ++piece) {
    // Cumulative count n(t) = integral of |x'(t)| / h(r(t)) dt.
    const int steps = 4000;
    std::vector<double> cum(steps + 1, 0.0);
    for (int s = 0; s < steps; ++s) {
      const double t = piece + (s + 0.5) / steps;
      const auto p = prof.eval(t);
      cum[s + 1] = cum[s] + std::hypot(p[2], p[3]) / steps / local_h(p[0], piece);
    }
    const int n = std::max(1, static_cast<int>(std::lround(cum.back())));
    for (int k = 1; k <= n; ++k) {
      const double target = cum.back() * k / n;
      const auto it = std::lower_bound(cum.begin(), cum.end(), target);
      const int s = std::max(1, static_cast<int>(it - cum.begin()));
      const double frac = (target - cum[s - 1]) / std::max(1e-300, cum[s] - cum[s - 1]);
      ts.push_back(piece + (s - 1 + std::clamp(frac, 0.0, 1.0)) / steps);
    }
  }
  ts.back() = 3.0;  // the pole
  std::vector<Ring> rings;
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const auto p = prof.eval(ts[i]);
    const int piece = ts[i] < 1.0 ? 0 : ts[i] < 2.0 ? 1 : 2;
    rings.push_back({p[0], p[1], ring_count(p[0], local_h(p[0], piece)), 0.0});
  }
  return rings;
}

}  // namespace detail

/// Profile parameters of the dumbbell's upper-half rings, for the same
/// spacing rule as build_surface. Exposed for sample identification.
inline double dumbbell_spacing(int resolution) { return kPi / resolution; }

/// Triangulates a catalog surface. Vertices lie exactly on the analytic surface.
inline BuiltSurface build_surface(const CatalogSurface& s, int resolution) {
  if (resolution < 3) throw ConfigError("resolution", "resolution must be at least 3");
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  bool with_boundary = false;
  struct V {
    int res;
    std::vector<Vec3>& verts;
    std::vector<Face>& faces;
    bool& with_boundary;

    void operator()(const RoundSphere& f) {
      detail::icosphere(std::max(2, (res + 1) / 2), verts, faces);
      for (Vec3& v : verts) v *= f.radius;
      detail::orient_outward(verts, faces);
    }
    void operator()(const Ellipsoid& f) {
      detail::icosphere(std::max(2, (res + 1) / 2), verts, faces);
      for (Vec3& v : verts) v = Vec3(f.a * v.x(), f.b * v.y(), f.c * v.z());
      detail::orient_outward(verts, faces);
    }
    void operator()(const FlatTorus2& f) {
      const int nx = std::max(3, static_cast<int>(std::lround(res * f.px / std::min(f.px, f.py))));
      const int ny = std::max(3, static_cast<int>(std::lround(res * f.py / std::min(f.px, f.py))));
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) verts.emplace_back(f.px * i / nx, f.py * j / ny, 0.0);
      auto id = [&](int i, int j) { return (j % ny) * nx + (i % nx); };
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
          faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    void operator()(const TorusOfRevolution& f) {
      const int na = std::max(6, res);
      const double h = 2.0 * kPi * f.minor / na;
      std::vector<detail::Ring> rings;
      for (int k = 0; k < na; ++k) {
        const double a = 2.0 * kPi * k / na;
        const double r = f.major + f.minor * std::cos(a);
        const int m = detail::ring_count(r, h);
        rings.push_back({r, f.minor * std::sin(a), m, (k % 2) * kPi / m});
      }
      detail::revolution_mesh(rings, false, 0.0, false, 0.0, true, verts, faces);
      detail::orient_outward(verts, faces);
    }
    void operator()(const Dumbbell& f) {
      const DumbbellProfile prof(f.neck);
      const auto upper = detail::dumbbell_rings(prof, dumbbell_spacing(res));
      std::vector<detail::Ring> rings;
      for (auto it = upper.rbegin(); it != upper.rend(); ++it) {
        if (it->z == 0.0) continue;  // the waist ring is shared
        rings.push_back({it->r, -it->z, it->count, 0.0});
      }
      for (const auto& g : upper) rings.push_back(g);
      for (std::size_t i = 0; i < rings.size(); ++i)
        if (i % 2) rings[i].phase = kPi / rings[i].count;
      const double top = prof.eval(3.0)[1];
      detail::revolution_mesh(rings, true, -top, true, top, false, verts, faces);
      detail::orient_outward(verts, faces);
    }
    void operator()(const Cylinder& f) {
      const int m = std::max(6, res);
      const int nz = std::max(1, static_cast<int>(std::lround(f.height / (2.0 * kPi * f.radius / m))));
      std::vector<detail::Ring> rings;
      for (int k = 0; k <= nz; ++k) rings.push_back({f.radius, f.height * k / nz, m, (k % 2) * kPi / m});
      detail::revolution_mesh(rings, false, 0.0, false, 0.0, false, verts, faces);
      with_boundary = true;
    }
    void operator()(const FlatDisc& f) {
      // Concentric rings with ~6k vertices on ring k; centre vertex closes it.
      const int nr = std::max(2, res / 2);
      std::vector<detail::Ring> rings;
      for (int k = nr; k >= 1; --k) {
        const int m = 6 * k;
        rings.push_back({f.radius * k / nr, 0.0, m, (k % 2) * kPi / m});
      }
      detail::revolution_mesh(rings, false, 0.0, true, 0.0, false, verts, faces);
      with_boundary = true;
      // Planar: orient so that the normal is +z.
      const Face& t = faces.front();
      if ((verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]).z() < 0.0)
        for (Face& g : faces) std::swap(g[1], g[2]);
    }
  };
  V visitor{resolution, verts, faces, with_boundary};
  std::visit(visitor, s.family);
  for (Vec3& v : verts) v = s.ambient.wrap(v);
  BuiltSurface out{TriMesh(std::move(verts), std::move(faces), s.ambient, with_boundary), 0.0, resolution};
  out.edge_constant = out.mesh.max_edge_length() * resolution;
  return out;
}

}  // namespace bmc
