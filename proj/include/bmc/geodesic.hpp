#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <utility>
#include <vector>

#include "bmc/mesh.hpp"

namespace bmc {

/// A point on a mesh: face index and barycentric weights of its corners.
struct SamplePoint {
  int face = 0;
  Vec3 bary = Vec3(1.0, 0.0, 0.0);
};

inline SamplePoint vertex_point(const TriMesh& mesh, int v) {
  const int f = mesh.vertex_faces()[v].front();
  SamplePoint s{f, Vec3::Zero()};
  for (int i = 0; i < 3; ++i)
    if (mesh.faces()[f][i] == v) s.bary[i] = 1.0;
  return s;
}

/// Ambient position of a sample point.
inline Vec3 sample_position(const TriMesh& mesh, const SamplePoint& s) {
  const Face& t = mesh.faces()[s.face];
  const Vec3& o = mesh.vertices()[t[0]];
  const Vec3 p = o + s.bary[1] * mesh.edge_vector(t[0], t[1]) + s.bary[2] * mesh.edge_vector(t[0], t[2]);
  return mesh.ambient().wrap(p);
}

/// Position of a sample point in the planar layout of its face.
inline Vec2 sample_layout(const TriMesh& mesh, const SamplePoint& s) {
  const auto& p = mesh.layout(s.face);
  return s.bary[0] * p[0] + s.bary[1] * p[1] + s.bary[2] * p[2];
}

/// Snaps an ambient point to the closest point of the mesh near its nearest vertex.
inline SamplePoint locate(const TriMesh& mesh, const Vec3& x) {
  int best_v = 0;
  double best = kInf;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double d = mesh.ambient().displacement(x, mesh.vertices()[v]).squaredNorm();
    if (d < best) {
      best = d;
      best_v = v;
    }
  }
  std::vector<int> faces;
  for (int w : mesh.vertex_neighbors()[best_v])
    for (int f : mesh.vertex_faces()[w]) faces.push_back(f);
  for (int f : mesh.vertex_faces()[best_v]) faces.push_back(f);
  std::sort(faces.begin(), faces.end());
  faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
  SamplePoint out = vertex_point(mesh, best_v);
  double out_d = kInf;
  for (int f : faces) {
    const Face& t = mesh.faces()[f];
    const Vec3 e1 = mesh.edge_vector(t[0], t[1]), e2 = mesh.edge_vector(t[0], t[2]);
    const Vec3 q = mesh.ambient().displacement(mesh.vertices()[t[0]], x);
    Eigen::Matrix2d A;
    A << e1.dot(e1), e1.dot(e2), e1.dot(e2), e2.dot(e2);
    Vec2 uv = A.ldlt().solve(Vec2(e1.dot(q), e2.dot(q)));
    // Clamp into the triangle (good enough for points near the surface).
    uv = uv.cwiseMax(0.0);
    if (uv.sum() > 1.0) uv /= uv.sum();
    const double d = (uv[0] * e1 + uv[1] * e2 - q).squaredNorm();
    if (d < out_d) {
      out_d = d;
      out = SamplePoint{f, Vec3(1.0 - uv.sum(), uv[0], uv[1])};
    }
  }
  return out;
}

/// Shortest paths on the mesh edge graph refined by k Steiner points per edge.
///
/// Nodes are the vertices followed by k points per edge at t = (i+1)/(k+1)
/// from the lower-indexed endpoint. Every pair of nodes on the boundary of a
/// common face is joined by a segment of the face's planar layout, so the
/// graph metric dominates the polyhedral metric and converges to it as k grows.
class GeodesicGraph {
 public:
  explicit GeodesicGraph(const TriMesh& mesh, int steiner = 3) : mesh_(&mesh), k_(std::max(0, steiner)) {
    const int nf = mesh.num_faces();
    per_face_ = 3 + 3 * k_;
    face_nodes_.resize(static_cast<std::size_t>(nf) * per_face_);
    face_pos_.resize(face_nodes_.size());
    for (int f = 0; f < nf; ++f) {
      const Face& t = mesh.faces()[f];
      const auto& lay = mesh.layout(f);
      int slot = f * per_face_;
      for (int i = 0; i < 3; ++i) {
        face_nodes_[slot] = t[i];
        face_pos_[slot++] = lay[i];
      }
      for (int i = 0; i < 3; ++i) {
        const int e = mesh.face_edges()[f][i];
        const int a = mesh.edges()[e][0];
        // Corner index of the edge's first endpoint within this face.
        const int ca = t[i] == a ? i : (i + 1) % 3;
        const int cb = ca == i ? (i + 1) % 3 : i;
        for (int s = 0; s < k_; ++s) {
          const double u = double(s + 1) / (k_ + 1);
          face_nodes_[slot] = mesh.num_vertices() + e * k_ + s;
          face_pos_[slot++] = (1.0 - u) * lay[ca] + u * lay[cb];
        }
      }
    }
  }

  const TriMesh& mesh() const { return *mesh_; }
  int steiner() const { return k_; }
  int num_nodes() const { return mesh_->num_vertices() + mesh_->num_edges() * k_; }

  /// Multi-source Dijkstra. Nodes farther than `bound` keep +inf.
  std::vector<double> run(const std::vector<std::pair<int, double>>& sources, double bound = kInf) const {
    std::vector<double> dist(num_nodes(), kInf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    for (auto [n, d] : sources)
      if (d < dist[n]) {
        dist[n] = d;
        pq.push({d, n});
      }
    const int nv = mesh_->num_vertices();
    while (!pq.empty()) {
      const auto [d, n] = pq.top();
      pq.pop();
      if (d > dist[n]) continue;
      if (d > bound) break;
      auto relax_face = [&](int f) {
        const int base = f * per_face_;
        int me = base;
        while (face_nodes_[me] != n) ++me;
        const Vec2 p = face_pos_[me];
        for (int s = base; s < base + per_face_; ++s) {
          const int m = face_nodes_[s];
          const double nd = d + (face_pos_[s] - p).norm();
          if (nd < dist[m]) {
            dist[m] = nd;
            pq.push({nd, m});
          }
        }
      };
      if (n < nv) {
        for (int f : mesh_->vertex_faces()[n]) relax_face(f);
      } else {
        const int e = (n - nv) / k_;
        for (int f : mesh_->edge_faces()[e])
          if (f >= 0) relax_face(f);
      }
    }
    if (bound < kInf)
      for (double& x : dist)
        if (x > bound) x = kInf;
    return dist;
  }

  /// Node distances from a sample point.
  std::vector<double> field(const SamplePoint& s, double bound = kInf) const {
    const Vec2 p = sample_layout(*mesh_, s);
    std::vector<std::pair<int, double>> src;
    const int base = s.face * per_face_;
    for (int q = base; q < base + per_face_; ++q) src.push_back({face_nodes_[q], (face_pos_[q] - p).norm()});
    return run(src, bound);
  }

  /// Distance at a sample point given a field from `source`.
  double evaluate(const std::vector<double>& field, const SamplePoint& source, const SamplePoint& t) const {
    const Vec2 p = sample_layout(*mesh_, t);
    double best = kInf;
    const int base = t.face * per_face_;
    for (int q = base; q < base + per_face_; ++q) best = std::min(best, field[face_nodes_[q]] + (face_pos_[q] - p).norm());
    if (t.face == source.face) best = std::min(best, (sample_layout(*mesh_, source) - p).norm());
    return best;
  }

  std::vector<double> distances(const SamplePoint& source, const std::vector<SamplePoint>& targets) const {
    const auto f = field(source);
    std::vector<double> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
      const double d = evaluate(f, source, t);
      if (!std::isfinite(d)) throw UnreachableError("target not reachable: mesh is disconnected");
      out.push_back(d);
    }
    return out;
  }

  /// Vertex distances (the first num_vertices() entries of a node field).
  std::vector<double> vertex_distances(const SamplePoint& source, double bound = kInf) const {
    auto f = field(source, bound);
    f.resize(mesh_->num_vertices());
    return f;
  }

  std::vector<double> vertex_distances_from_vertices(const std::vector<int>& sources, double bound = kInf) const {
    std::vector<std::pair<int, double>> src;
    for (int v : sources) src.push_back({v, 0.0});
    auto f = run(src, bound);
    f.resize(mesh_->num_vertices());
    return f;
  }

 private:
  const TriMesh* mesh_;
  int k_;
  int per_face_ = 3;
  std::vector<int> face_nodes_;
  std::vector<Vec2> face_pos_;
};

/// geodesic_distance: distances from one sample point to a list of targets.
inline std::vector<double> geodesic_distance(const TriMesh& mesh, const SamplePoint& source,
                                             const std::vector<SamplePoint>& targets, int steiner = 3) {
  if (mesh.num_components() != 1) throw UnreachableError("mesh is disconnected");
  return GeodesicGraph(mesh, steiner).distances(source, targets);
}

/// Intrinsic diameter estimate over vertices by repeated farthest-point sweeps.
inline double mesh_diameter(const GeodesicGraph& g, int sweeps = 4) {
  int v = 0;
  double best = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    const auto d = g.vertex_distances_from_vertices({v});
    const auto it = std::max_element(d.begin(), d.end());
    if (!std::isfinite(*it)) throw UnreachableError("mesh is disconnected");
    if (*it <= best && s > 0) break;
    best = std::max(best, *it);
    v = static_cast<int>(it - d.begin());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Intrinsic balls.

struct BallRegion {
  double radius = 0.0;
  double area = 0.0;
  double boundary_length = 0.0;
  double complement_area = 0.0;
  bool whole_surface = false;
  std::vector<double> vertex_distance;  // distance field used for clipping
  std::vector<double> face_fraction;    // area fraction of each face inside the ball
  std::vector<int> inside_faces;        // faces meeting the ball
};

namespace detail {

// Area and cut length of {x in triangle : d(x) <= r} for d linear on the layout.
inline std::pair<double, double> clip_triangle(const std::array<Vec2, 3>& p, const std::array<double, 3>& d, double r) {
  std::vector<Vec2> poly;
  double cut = 0.0;
  std::vector<Vec2> crossings;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const bool in_i = d[i] <= r, in_j = d[j] <= r;
    if (in_i) poly.push_back(p[i]);
    if (in_i != in_j) {
      const double t = (r - d[i]) / (d[j] - d[i]);
      const Vec2 x = p[i] + t * (p[j] - p[i]);
      poly.push_back(x);
      crossings.push_back(x);
    }
  }
  if (crossings.size() == 2) cut = (crossings[0] - crossings[1]).norm();
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  return {0.5 * std::abs(area), cut};
}

}  // namespace detail

/// Lowers vertex distances with the planar two-point update of fast marching:
/// for a face (v, a, b), unfold a virtual source from d(a), d(b) and take its
/// straight-line distance to v when the ray crosses the opposite edge. Exact
/// on flat regions; removes most of the graph's zig-zag overestimate.
inline void refine_distance_field(const TriMesh& mesh, std::vector<double>& d, int passes = 3) {
  std::vector<int> order(mesh.num_vertices());
  std::iota(order.begin(), order.end(), 0);
  for (int pass = 0; pass < passes; ++pass) {
    std::sort(order.begin(), order.end(), [&](int x, int y) { return d[x] < d[y]; });
    for (int v : order) {
      for (int f : mesh.vertex_faces()[v]) {
        const Face& t = mesh.faces()[f];
        int iv = 0;
        while (t[iv] != v) ++iv;
        const int ia = (iv + 1) % 3, ib = (iv + 2) % 3;
        const double da = d[t[ia]], db = d[t[ib]];
        if (!std::isfinite(da) || !std::isfinite(db)) continue;
        const auto& lay = mesh.layout(f);
        const Vec2 A = lay[ia], B = lay[ib], P = lay[iv];
        const Vec2 ab = B - A;
        const double e = ab.norm();
        const Vec2 ux = ab / e;
        Vec2 uy(-ux.y(), ux.x());
        if ((P - A).dot(uy) > 0.0) uy = -uy;  // the source lies opposite v
        const double x = (da * da - db * db + e * e) / (2.0 * e);
        const double y2 = da * da - x * x;
        if (y2 < 0.0) continue;
        const Vec2 S = A + x * ux + std::sqrt(y2) * uy;
        // Crossing parameter of segment S -> P with line AB.
        const double hs = (S - A).dot(uy), hp = (P - A).dot(uy);
        if (hs - hp == 0.0) continue;
        const double lam = hs / (hs - hp);
        const double s = ((S + lam * (P - S)) - A).dot(ux) / e;
        if (s < 0.0 || s > 1.0) continue;
        d[v] = std::min(d[v], (P - S).norm());
      }
    }
  }
}

/// {x : d(center, x) <= r} with faces clipped against the piecewise linear
/// interpolation of the vertex distance field.
inline BallRegion intrinsic_ball(const GeodesicGraph& g, const SamplePoint& center, double r) {
  if (!(r > 0.0)) throw ConfigError("r", "ball radius must be positive");
  const TriMesh& mesh = g.mesh();
  BallRegion b;
  b.radius = r;
  b.vertex_distance = g.vertex_distances(center);
  refine_distance_field(mesh, b.vertex_distance);
  const double far = *std::max_element(b.vertex_distance.begin(), b.vertex_distance.end());
  b.face_fraction.assign(mesh.num_faces(), 0.0);
  if (r >= far) {
    b.whole_surface = true;
    b.area = surface_area(mesh);
    std::fill(b.face_fraction.begin(), b.face_fraction.end(), 1.0);
    for (int f = 0; f < mesh.num_faces(); ++f) b.inside_faces.push_back(f);
    for (const auto& loop : mesh.boundary_loops()) b.boundary_length += loop_length(mesh, loop);
    return b;
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces()[f];
    const std::array<double, 3> d{b.vertex_distance[t[0]], b.vertex_distance[t[1]], b.vertex_distance[t[2]]};
    const double lo = std::min({d[0], d[1], d[2]});
    const double fa = mesh.face_area(f);
    if (lo > r) {
      b.complement_area += fa;
      continue;
    }
    b.inside_faces.push_back(f);
    const double hi = std::max({d[0], d[1], d[2]});
    if (hi <= r) {
      b.area += fa;
      b.face_fraction[f] = 1.0;
      continue;
    }
    const auto [a_in, cut] = detail::clip_triangle(mesh.layout(f), d, r);
    // Complement clipped independently as {-d <= -r}.
    const auto [a_out, cut2] = detail::clip_triangle(mesh.layout(f), {-d[0], -d[1], -d[2]}, -r);
    (void)cut2;
    b.area += a_in;
    b.complement_area += a_out;
    b.boundary_length += cut;
    b.face_fraction[f] = a_in / fa;
  }
  // Mesh boundary inside the ball also bounds the region.
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (!mesh.edge_on_boundary(e)) continue;
    const double da = b.vertex_distance[mesh.edges()[e][0]], db = b.vertex_distance[mesh.edges()[e][1]];
    const double l = mesh.edge_lengths()[e];
    if (da <= r && db <= r) b.boundary_length += l;
    else if (da <= r || db <= r) b.boundary_length += l * (r - std::min(da, db)) / std::abs(db - da);
  }
  return b;
}

inline BallRegion intrinsic_ball(const TriMesh& mesh, const SamplePoint& center, double r, int steiner = 3) {
  return intrinsic_ball(GeodesicGraph(mesh, steiner), center, r);
}

}  // namespace bmc
