#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "bmc/builders.hpp"
#include "bmc/mesh.hpp"

// Meshes with boundary used as annuli and discs: planar annuli, periodic
// strips in a flat torus, geodesic caps on the sphere, a two-lobed disc.

namespace bmc {

/// Great-circle distance on the sphere of radius r centred at the origin.
inline EdgeLengthFn sphere_arc_length(double r) {
  return [r](const Vec3& a, const Vec3& b) {
    const double c = a.cross(b).norm(), d = a.dot(b);
    return r * std::atan2(c, d);
  };
}

/// Planar round annulus rho < |x| < r, log-polar rings (near-conformal cells).
inline TriMesh round_annulus_mesh(double r, double rho, int angular) {
  if (!(r > rho && rho > 0.0)) throw ConfigError("annulus", "need r > rho > 0");
  const int m = std::max(8, angular);
  const double step = 2.0 * kPi / m * std::sqrt(3.0) / 2.0;
  const int nk = std::max(2, static_cast<int>(std::lround(std::log(r / rho) / step)));
  std::vector<detail::Ring> rings;
  for (int k = 0; k <= nk; ++k) rings.push_back({r * std::pow(rho / r, double(k) / nk), 0.0, m, (k % 2) * kPi / m});
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  detail::revolution_mesh(rings, false, 0.0, false, 0.0, false, verts, faces);
  const Face& t = faces.front();
  if ((verts[t[1]] - verts[t[0]]).cross(verts[t[2]] - verts[t[0]]).z() < 0.0)
    for (Face& g : faces) std::swap(g[1], g[2]);
  return TriMesh(std::move(verts), std::move(faces), AmbientSpace::euclidean(3), true);
}

/// Right circular annulus S^1(W) x [0, H] realized as a flat strip wrapping
/// the x-period of the flat torus with periods (W, 10H, 10H).
inline TriMesh right_annulus_mesh(double H, double W, int resolution) {
  if (!(H > 0.0 && W > 0.0)) throw ConfigError("annulus", "need H, W > 0");
  const int nx = std::max(6, resolution);
  const double hx = W / nx;
  const int ny = std::max(2, static_cast<int>(std::lround(H / (hx * std::sqrt(3.0) / 2.0))));
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) verts.emplace_back(hx * (i + 0.5 * (j % 2)), H * j / ny, 0.0);
  auto id = [&](int i, int j) { return j * nx + ((i % nx) + nx) % nx; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (j % 2 == 0) {
        faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      }
    }
  auto amb = AmbientSpace::flat_torus({W, 10.0 * H, 10.0 * H});
  for (Vec3& v : verts) v = amb.wrap(v);
  return TriMesh(std::move(verts), std::move(faces), amb, true);
}

/// Flat square annulus [0,1]^2 minus the centred square [1/4, 3/4]^2, on an
/// n x n grid (n divisible by 4) with alternating diagonals.
inline TriMesh square_annulus_mesh(int n) {
  n = std::max(8, (n + 3) / 4 * 4);
  auto hole = [n](int i, int j) { return i >= n / 4 && i < 3 * n / 4 && j >= n / 4 && j < 3 * n / 4; };
  std::vector<int> id((n + 1) * (n + 1), -1);
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  auto vid = [&](int i, int j) {
    int& s = id[j * (n + 1) + i];
    if (s < 0) {
      s = static_cast<int>(verts.size());
      verts.emplace_back(double(i) / n, double(j) / n, 0.0);
    }
    return s;
  };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (hole(i, j)) continue;
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      if ((i + j) % 2 == 0) {
        faces.push_back({a, b, c});
        faces.push_back({a, c, d});
      } else {
        faces.push_back({a, b, d});
        faces.push_back({b, c, d});
      }
    }
  return TriMesh(std::move(verts), std::move(faces), AmbientSpace::euclidean(3), true);
}

/// Geodesic disc of radius a about the north pole of the sphere of radius R,
/// with pullback (great-circle) edge lengths.
inline TriMesh sphere_cap_mesh(double R, double a, int rings_count) {
  const int nr = std::max(2, rings_count);
  std::vector<detail::Ring> rings;
  for (int k = nr; k >= 1; --k) {
    const double th = a / R * k / nr;
    const int m = 6 * k;
    rings.push_back({R * std::sin(th), R * std::cos(th), m, (k % 2) * kPi / m});
  }
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  detail::revolution_mesh(rings, false, 0.0, true, R, false, verts, faces);
  detail::orient_outward(verts, faces);
  return TriMesh(std::move(verts), std::move(faces), AmbientSpace::euclidean(3), true, sphere_arc_length(R));
}

/// Regular n-gon inscribed in the circle of radius r, fanned from the centre.
inline TriMesh polygon_disc_mesh(double r, int n) {
  if (n < 3) throw ConfigError("sides", "polygon needs at least 3 sides");
  std::vector<Vec3> verts{Vec3::Zero()};
  std::vector<Face> faces;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * kPi * k / n;
    verts.emplace_back(r * std::cos(th), r * std::sin(th), 0.0);
    faces.push_back({0, 1 + k, 1 + (k + 1) % n});
  }
  return TriMesh(std::move(verts), std::move(faces), AmbientSpace::euclidean(3), true);
}

/// Star-shaped planar disc bounded by r(theta) = scale * (1 + lobe * cos 2 theta):
/// two lobes joined by a waist, so the distance to the boundary has two maxima.
inline TriMesh peanut_disc_mesh(double scale, double lobe, int rings_count) {
  const int nr = std::max(3, rings_count);
  std::vector<Vec3> verts{Vec3::Zero()};
  std::vector<Face> faces;
  std::vector<int> base;
  std::vector<int> counts;
  for (int k = 1; k <= nr; ++k) {
    const int m = 8 * k;
    base.push_back(static_cast<int>(verts.size()));
    counts.push_back(m);
    for (int q = 0; q < m; ++q) {
      const double th = 2.0 * kPi * q / m;
      const double rr = scale * (1.0 + lobe * std::cos(2.0 * th)) * k / nr;
      verts.emplace_back(rr * std::cos(th), rr * std::sin(th), 0.0);
    }
  }
  for (int q = 0; q < counts[0]; ++q) faces.push_back({0, base[0] + q, base[0] + (q + 1) % counts[0]});
  for (int k = 0; k + 1 < nr; ++k) {
    detail::Ring a{0.0, 0.0, counts[k], 0.0}, b{0.0, 0.0, counts[k + 1], 0.0};
    std::vector<Face> strip;
    detail::stitch_rings(base[k], a, base[k + 1], b, strip);
    for (Face f : strip) {
      std::swap(f[1], f[2]);
      faces.push_back(f);
    }
  }
  return TriMesh(std::move(verts), std::move(faces), AmbientSpace::euclidean(3), true);
}

/// Rectangle [0, L] x [0, w] with spacing h placed in a flat torus; when L
/// exceeds the x-period the image overlaps itself (an immersed strip).
inline TriMesh torus_strip_mesh(const AmbientSpace& torus, double L, double w, double h) {
  const int nx = std::max(1, static_cast<int>(std::lround(L / h)));
  const int ny = std::max(1, static_cast<int>(std::lround(w / h)));
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) verts.push_back(torus.wrap(Vec3(L * i / nx, w * j / ny, 0.0)));
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return TriMesh(std::move(verts), std::move(faces), torus, true);
}

}  // namespace bmc
