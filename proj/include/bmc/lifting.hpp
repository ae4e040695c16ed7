#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bmc/catalog.hpp"
#include "bmc/curvature.hpp"
#include "bmc/geodesic.hpp"

namespace bmc {

/// Target surface of a disc immersion with closed-form exponential map:
/// a round sphere in R^3, a flat 2-torus (z = 0 slice of a flat T^3) or the plane.
struct ModelSurface {
  enum class Kind { sphere, flat_torus, plane };
  Kind kind = Kind::plane;
  double radius = 1.0;
  double px = 1.0, py = 1.0;

  static ModelSurface sphere(double r) { return {Kind::sphere, r, 1.0, 1.0}; }
  static ModelSurface flat_torus(double px, double py) { return {Kind::flat_torus, 1.0, px, py}; }
  static ModelSurface plane() { return {}; }

  static ModelSurface from_catalog(const CatalogSurface& s) {
    if (auto* f = std::get_if<RoundSphere>(&s.family)) return sphere(f->radius);
    if (auto* f = std::get_if<FlatTorus2>(&s.family)) return flat_torus(f->px, f->py);
    if (std::holds_alternative<FlatDisc>(s.family)) return plane();
    throw UnsupportedError("lifting needs a model surface with closed-form exponential map (sphere, flat torus, plane)");
  }

  /// Gauss curvature of the model.
  double curvature() const { return kind == Kind::sphere ? 1.0 / (radius * radius) : 0.0; }

  /// Injectivity radius of the model.
  double injectivity_radius() const {
    switch (kind) {
      case Kind::sphere: return kPi * radius;
      case Kind::flat_torus: return std::min(px, py) / 2.0;
      case Kind::plane: return kInf;
    }
    return kInf;
  }

  /// Orthonormal tangent frame at x (deterministic).
  std::array<Vec3, 2> frame(const Vec3& x) const {
    if (kind != Kind::sphere) return {Vec3::UnitX(), Vec3::UnitY()};
    const Vec3 n = x.normalized();
    const Vec3 a = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 e1 = (a - a.dot(n) * n).normalized();
    return {e1, n.cross(e1)};
  }

  Vec3 wrap(Vec3 p) const {
    if (kind == Kind::flat_torus) {
      p.x() -= px * std::floor(p.x() / px);
      p.y() -= py * std::floor(p.y() / py);
    }
    return p;
  }

  /// exp_x(v) for v in frame coordinates at x.
  Vec3 exp(const Vec3& x, const Vec2& v) const {
    const auto e = frame(x);
    if (kind == Kind::sphere) {
      const double s = v.norm();
      if (s == 0.0) return x;
      const Vec3 dir = (v[0] * e[0] + v[1] * e[1]) / s;
      return std::cos(s / radius) * x + radius * std::sin(s / radius) * dir;
    }
    return wrap(x + v[0] * e[0] + v[1] * e[1]);
  }

  /// Residual vector from b to a (minimum image on the torus).
  Vec3 difference(const Vec3& a, const Vec3& b) const {
    Vec3 d = a - b;
    if (kind == Kind::flat_torus) {
      d.x() -= px * std::round(d.x() / px);
      d.y() -= py * std::round(d.y() / py);
    }
    return d;
  }

  /// Intrinsic distance on the model.
  double distance(const Vec3& a, const Vec3& b) const {
    if (kind == Kind::sphere) return radius * std::atan2(a.cross(b).norm(), a.dot(b));
    return difference(a, b).norm();
  }

  /// Minimal-norm preimage of p under exp_x.
  Vec2 log(const Vec3& x, const Vec3& p) const {
    const auto e = frame(x);
    if (kind == Kind::sphere) {
      const double d = distance(x, p);
      Vec3 t = p - x.normalized().dot(p) * x.normalized();
      if (t.norm() == 0.0) return Vec2::Zero();
      t.normalize();
      return d * Vec2(t.dot(e[0]), t.dot(e[1]));
    }
    const Vec3 d = difference(p, x);
    return Vec2(d.dot(e[0]), d.dot(e[1]));
  }

  EdgeLengthFn length_fn() const {
    const ModelSurface self = *this;
    return [self](const Vec3& a, const Vec3& b) { return self.distance(a, b); };
  }
};

/// Damped Gauss-Newton solve of exp_x(v) = target from `init`, with a
/// central-difference Jacobian.
struct NewtonResult {
  Vec2 v;
  double residual;
  int iterations;
  bool converged;
};

inline NewtonResult exp_inverse_newton(const ModelSurface& F, const Vec3& x, const Vec3& target, Vec2 v,
                                       double tol = 1e-10, int max_iter = 50) {
  auto R = [&](const Vec2& w) { return F.difference(F.exp(x, w), target); };
  Vec3 r = R(v);
  int it = 0;
  for (; it < max_iter && r.norm() > tol; ++it) {
    Eigen::Matrix<double, 3, 2> J;
    const double h = 1e-6 * std::max(1.0, v.norm());
    for (int k = 0; k < 2; ++k) {
      Vec2 dv = Vec2::Zero();
      dv[k] = h;
      J.col(k) = (R(v + dv) - R(v - dv)) / (2.0 * h);
    }
    const Vec2 step = -(J.transpose() * J).ldlt().solve(J.transpose() * r);
    double a = 1.0;
    Vec3 rn = R(v + step);
    for (int k = 0; k < 30 && rn.norm() >= r.norm(); ++k) {
      a *= 0.5;
      rn = R(v + a * step);
    }
    if (rn.norm() >= r.norm()) break;
    v += a * step;
    r = rn;
  }
  return {v, r.norm(), it, r.norm() <= tol};
}

// ---------------------------------------------------------------------------
// Disc immersions.

struct DiscImmersion {
  TriMesh mesh;       // vertices are the images iota(v) on F; edge lengths use F's metric
  ModelSurface model;
  double eps = 0.0;
  int base = 0;       // vertex y with x = iota(y)
  std::uint64_t seed = 0;
  // Derived on construction.
  double boundary_length = 0.0;
  double max_boundary_distance = 0.0;
  double conjugate_radius = kInf;
  bool small_scale = true;  // eps < R / 10
};

/// Validates the disc contract: one boundary loop, chi = 1, length(boundary) <= eps
/// and every vertex within eps of the boundary. eps < R/10 is recorded, not enforced.
inline DiscImmersion make_disc(TriMesh mesh, const ModelSurface& F, double eps, int base, std::uint64_t seed) {
  if (mesh.boundary_loops().size() != 1 || mesh.euler_characteristic() != 1 || mesh.num_components() != 1)
    throw TopologyError("not a disc: needs one boundary loop and chi = 1");
  if (base < 0 || base >= mesh.num_vertices()) throw ConfigError("base", "base vertex out of range");
  DiscImmersion d{std::move(mesh), F, eps, base, seed};
  d.boundary_length = loop_length(d.mesh, d.mesh.boundary_loops()[0]);
  GeodesicGraph g(d.mesh);
  const auto f = g.vertex_distances_from_vertices(d.mesh.boundary_loops()[0]);
  d.max_boundary_distance = *std::max_element(f.begin(), f.end());
  if (d.boundary_length > eps * (1.0 + 1e-12)) throw HypothesisError("boundary length exceeds eps");
  if (d.max_boundary_distance > eps * (1.0 + 1e-12)) throw HypothesisError("distance to boundary exceeds eps");
  d.conjugate_radius = conjugate_radius_bound(F.curvature()).R;
  d.small_scale = eps < d.conjugate_radius / 10.0;
  return d;
}

/// Lifting scale: half the closed-form invertibility radius of exp_x on B(0, 9 eps).
inline double lifting_scale(const DiscImmersion& d) {
  switch (d.model.kind) {
    case ModelSurface::Kind::sphere: return 0.5 * (kPi * d.model.radius - 9.0 * d.eps);
    case ModelSurface::Kind::flat_torus: return 0.5 * d.model.injectivity_radius();
    case ModelSurface::Kind::plane: return kInf;
  }
  return kInf;
}

struct Square {
  std::vector<int> faces;
  int arc = 0;
  int band = 0;
  int basin = 0;
  double diameter = 0.0;
};

struct SquareOrder {
  std::vector<Square> squares;  // in order b_1..b_N
  std::vector<double> f;        // jittered distance to the boundary
  int jitter_attempts = 0;
  int num_basins = 0;
  std::vector<int> basin_of_vertex;
  std::vector<std::vector<int>> arcs;  // boundary vertices of each arc J_k, in loop order
  std::vector<int> arc_basin;
  int first_arc = 0;
  double square_size = 0.0;
  double lifting_scale = 0.0;
  int repairs = 0;
  // Certificates per prefix B_j (index j-1).
  std::vector<char> next_connected;    // B_j cap b_{j+1} connected and nonempty (size N-1)
  std::vector<char> boundary_contiguous;
  std::vector<double> max_path_to_boundary;  // longest recorded in-B_j path to dB cap B_j
  std::vector<double> pair_path_bound;       // 2 max path + arc length of dB cap B_j
  bool diameters_ok = true, connected_ok = true, boundary_ok = true, paths2_ok = true, paths5_ok = true;
  bool first_contains_J1 = false;
  bool ok() const { return diameters_ok && connected_ok && boundary_ok && paths2_ok && paths5_ok && first_contains_J1; }
};

namespace detail {

struct EdgeDijkstra {
  std::vector<double> dist;
  std::vector<int> pred;
};

// Dijkstra along mesh edges, optionally restricted to vertices with allowed[v].
inline EdgeDijkstra edge_dijkstra(const TriMesh& m, const std::vector<int>& sources,
                                  const std::vector<char>* allowed_edge = nullptr) {
  EdgeDijkstra r{std::vector<double>(m.num_vertices(), kInf), std::vector<int>(m.num_vertices(), -1)};
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  for (int s : sources) {
    r.dist[s] = 0.0;
    pq.push({0.0, s});
  }
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > r.dist[v]) continue;
    for (int e : m.vertex_edges()[v]) {
      if (allowed_edge && !(*allowed_edge)[e]) continue;
      const int w = m.edges()[e][0] == v ? m.edges()[e][1] : m.edges()[e][0];
      const double nd = d + m.edge_lengths()[e];
      if (nd < r.dist[w]) {
        r.dist[w] = nd;
        r.pred[w] = v;
        pq.push({nd, w});
      }
    }
  }
  return r;
}

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
};

// Connected components of a face set under edge adjacency.
inline std::vector<std::vector<int>> face_components(const TriMesh& m, const std::vector<int>& faces) {
  std::vector<int> local(m.num_faces(), -1);
  for (std::size_t i = 0; i < faces.size(); ++i) local[faces[i]] = static_cast<int>(i);
  UnionFind uf(static_cast<int>(faces.size()));
  for (std::size_t i = 0; i < faces.size(); ++i)
    for (int e : m.face_edges()[faces[i]])
      for (int g : m.edge_faces()[e])
        if (g >= 0 && local[g] >= 0) uf.p[uf.find(static_cast<int>(i))] = uf.find(local[g]);
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < faces.size(); ++i) groups[uf.find(static_cast<int>(i))].push_back(faces[i]);
  std::vector<std::vector<int>> out;
  for (auto& [k, v] : groups) out.push_back(std::move(v));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

// Is the intersection of face sets B (mask) and b connected and nonempty?
// Shared vertices are linked by edges with a face on each side.
inline bool prefix_meets_connected(const TriMesh& m, const std::vector<char>& inB, const std::vector<int>& vB,
                                   const std::vector<int>& b) {
  std::vector<int> shared;
  std::set<int> seen;
  for (int f : b)
    for (int v : m.faces()[f])
      if (vB[v] > 0 && seen.insert(v).second) shared.push_back(v);
  if (shared.empty()) return false;
  std::map<int, int> id;
  for (std::size_t i = 0; i < shared.size(); ++i) id[shared[i]] = static_cast<int>(i);
  UnionFind uf(static_cast<int>(shared.size()));
  std::set<int> in_b(b.begin(), b.end());
  for (int f : b)
    for (int e : m.face_edges()[f]) {
      const auto& ef = m.edge_faces()[e];
      const bool across = (ef[0] >= 0 && inB[ef[0]] && ef[1] >= 0 && in_b.count(ef[1])) ||
                          (ef[1] >= 0 && inB[ef[1]] && ef[0] >= 0 && in_b.count(ef[0]));
      if (!across) continue;
      uf.p[uf.find(id[m.edges()[e][0]])] = uf.find(id[m.edges()[e][1]]);
    }
  const int root = uf.find(0);
  for (std::size_t i = 1; i < shared.size(); ++i)
    if (uf.find(static_cast<int>(i)) != root) return false;
  return true;
}

// Boundary edges (in loop order) covered by a face mask form one nonempty run.
inline bool boundary_run_contiguous(const TriMesh& m, const std::vector<int>& loop_edges,
                                    const std::vector<char>& mask, double* run_length = nullptr) {
  const int n = static_cast<int>(loop_edges.size());
  std::vector<char> on(n);
  int count = 0;
  double len = 0.0;
  for (int i = 0; i < n; ++i) {
    on[i] = mask[m.edge_faces()[loop_edges[i]][0]];
    if (on[i]) {
      ++count;
      len += m.edge_lengths()[loop_edges[i]];
    }
  }
  if (run_length) *run_length = len;
  if (count == 0) return false;
  if (count == n) return true;
  int starts = 0;
  for (int i = 0; i < n; ++i)
    if (on[i] && !on[(i + n - 1) % n]) ++starts;
  return starts == 1;
}

}  // namespace detail

/// Builds the ordered square decomposition of the disc. `square_size` is the
/// target diameter of the squares (default min(lifting scale, eps)).
inline SquareOrder order_squares(const DiscImmersion& disc, std::optional<double> square_size = std::nullopt) {
  const TriMesh& m = disc.mesh;
  const int nv = m.num_vertices();
  SquareOrder o;
  o.lifting_scale = lifting_scale(disc);
  if (!(o.lifting_scale > 0.0)) throw HypothesisError("B(0, 9 eps) exceeds the invertibility radius of exp_x");
  o.square_size = square_size ? *square_size : std::min(o.lifting_scale, disc.eps);
  if (!(o.square_size > 0.0)) throw ConfigError("square_size", "must be positive");
  const auto& loop = m.boundary_loops()[0];

  // Distance to the boundary, jittered into general position.
  GeodesicGraph g(m);
  const auto f0 = g.vertex_distances_from_vertices(loop);
  std::mt19937_64 rng(disc.seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  bool morse = false;
  for (int attempt = 1; attempt <= 8 && !morse; ++attempt) {
    o.jitter_attempts = attempt;
    o.f.resize(nv);
    for (int v = 0; v < nv; ++v) o.f[v] = f0[v] + 1e-6 * disc.eps * U(rng);
    morse = true;
    for (const auto& e : m.edges())
      if (o.f[e[0]] == o.f[e[1]]) morse = false;
  }
  if (!morse) throw DegeneracyError("distance to boundary not in general position after 8 jitters");

  // Basins of maxima by steepest ascent; low-persistence maxima are merged
  // into their elder neighbour (discretization noise along ridges).
  std::vector<int> up(nv);
  for (int v = 0; v < nv; ++v) {
    up[v] = v;
    for (int w : m.vertex_neighbors()[v])
      if (o.f[w] > o.f[up[v]]) up[v] = w;
  }
  std::vector<int> peak(nv);
  for (int v = 0; v < nv; ++v) {
    int w = v;
    while (up[w] != w) w = up[w];
    peak[v] = w;
  }
  std::vector<int> byf(nv);
  std::iota(byf.begin(), byf.end(), 0);
  std::sort(byf.begin(), byf.end(), [&](int a, int b) { return o.f[a] > o.f[b]; });
  detail::UnionFind comp(nv);
  std::vector<char> active(nv, 0);
  std::vector<int> merged_into(nv);
  std::iota(merged_into.begin(), merged_into.end(), 0);
  const double persistence = 2.0 * m.max_edge_length();
  std::vector<int> elder(nv);  // highest peak of each component
  for (int v : byf) {
    active[v] = 1;
    elder[v] = v;
    for (int w : m.vertex_neighbors()[v]) {
      if (!active[w]) continue;
      int a = comp.find(v), b = comp.find(w);
      if (a == b) continue;
      int pa = elder[a], pb = elder[b];
      if (o.f[pa] < o.f[pb]) {
        std::swap(a, b);
        std::swap(pa, pb);
      }
      // pb is younger; merge its basin when it is not persistent.
      if (pb != v && o.f[pb] - o.f[v] < persistence) merged_into[pb] = pa;
      comp.p[b] = a;
      elder[a] = pa;
    }
  }
  auto resolve = [&](int p) {
    while (merged_into[p] != p) p = merged_into[p];
    return p;
  };
  std::map<int, int> basin_id;
  o.basin_of_vertex.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const int p = resolve(peak[v]);
    auto it = basin_id.emplace(p, static_cast<int>(basin_id.size())).first;
    o.basin_of_vertex[v] = it->second;
  }
  // Renumber basins by their appearance along the boundary.
  o.num_basins = static_cast<int>(basin_id.size());

  // Feet: roots of the shortest-path tree grown from the boundary.
  const auto tree = detail::edge_dijkstra(m, loop);
  std::vector<int> foot(nv, -1);
  for (int v : loop) foot[v] = v;
  std::vector<int> by_dist(nv);
  std::iota(by_dist.begin(), by_dist.end(), 0);
  std::sort(by_dist.begin(), by_dist.end(), [&](int a, int b) { return tree.dist[a] < tree.dist[b]; });
  for (int v : by_dist)
    if (foot[v] < 0) foot[v] = foot[tree.pred[v]];

  // Arcs: runs of boundary vertices with one basin, split to length <= s/2.
  const int nb = static_cast<int>(loop.size());
  std::vector<int> loop_edges(nb);
  for (int i = 0; i < nb; ++i) loop_edges[i] = m.find_edge(loop[i], loop[(i + 1) % nb]);
  int start = 0;
  for (int i = 0; i < nb; ++i)
    if (o.basin_of_vertex[loop[i]] != o.basin_of_vertex[loop[(i + nb - 1) % nb]]) {
      start = i;
      break;
    }
  const double half = o.square_size / 2.0;
  std::vector<int> arc_of_boundary(nv, -1);
  {
    std::vector<int> cur{loop[start]};
    double len = 0.0;
    for (int k = 1; k <= nb; ++k) {
      const int i = (start + k) % nb;
      const double el = m.edge_lengths()[loop_edges[(start + k - 1) % nb]];
      const bool basin_change = k == nb || o.basin_of_vertex[loop[i]] != o.basin_of_vertex[cur.front()];
      if (basin_change || len + el > half) {
        o.arcs.push_back(cur);
        o.arc_basin.push_back(o.basin_of_vertex[cur.front()]);
        cur.clear();
        len = 0.0;
        if (k == nb) break;
      } else {
        len += el;
      }
      cur.push_back(loop[i]);
    }
  }
  for (std::size_t k = 0; k < o.arcs.size(); ++k)
    for (int v : o.arcs[k]) arc_of_boundary[v] = static_cast<int>(k);
  const int na = static_cast<int>(o.arcs.size());

  // Squares: faces grouped by (arc of the foot, band) of their lowest vertex.
  const double band_width = o.square_size / 2.0;
  std::map<std::pair<int, int>, std::vector<int>> cells;
  for (int fc = 0; fc < m.num_faces(); ++fc) {
    int low = m.faces()[fc][0];
    for (int v : m.faces()[fc])
      if (o.f[v] < o.f[low]) low = v;
    const int band = static_cast<int>(std::floor(std::max(0.0, o.f[low]) / band_width));
    cells[{arc_of_boundary[foot[low]], band}].push_back(fc);
  }
  std::vector<std::vector<Square>> cone(na);  // squares per arc, by band ascending
  for (auto& [key, faces] : cells)
    for (auto& part : detail::face_components(m, faces)) {
      Square s;
      s.faces = std::move(part);
      s.arc = key.first;
      s.band = key.second;
      s.basin = o.arc_basin[key.first];
      cone[key.first].push_back(std::move(s));
    }

  // Runs of arcs sharing a basin; J1 is interior to the longest run.
  std::vector<std::pair<int, int>> runs;  // (first arc, length)
  for (int k = 0; k < na;) {
    int l = 1;
    while (k + l < na && o.arc_basin[k + l] == o.arc_basin[k]) ++l;
    runs.push_back({k, l});
    k += l;
  }
  // The arc sequence starts at a basin change, so a run may only wrap when
  // there is a single basin along the boundary.
  const auto longest = *std::max_element(runs.begin(), runs.end(), [](auto a, auto b) { return a.second < b.second; });
  o.first_arc = longest.first + longest.second / 2;

  // Scheme order: basin by basin, each basin's entry cone boundary -> inward,
  // its other cones center -> outward, expanding along the boundary.
  std::vector<const Square*> scheme;
  std::vector<char> arc_done(na, 0);
  auto push_cone = [&](int k, bool inward) {
    arc_done[k] = 1;
    std::vector<const Square*> sq;
    for (const auto& s : cone[k]) sq.push_back(&s);
    std::stable_sort(sq.begin(), sq.end(), [&](auto a, auto b) { return inward ? a->band < b->band : a->band > b->band; });
    scheme.insert(scheme.end(), sq.begin(), sq.end());
  };
  int entry = o.first_arc;
  while (entry >= 0) {
    const int basin = o.arc_basin[entry];
    push_cone(entry, true);
    // Expand to neighbouring arcs of the same basin, alternating sides.
    int lo = entry, hi = entry;
    bool grew = true;
    while (grew) {
      grew = false;
      const int r = (hi + 1) % na, l = (lo + na - 1) % na;
      if (!arc_done[r] && o.arc_basin[r] == basin) {
        push_cone(r, false);
        hi = r;
        grew = true;
      }
      if (!arc_done[l] && o.arc_basin[l] == basin) {
        push_cone(l, false);
        lo = l;
        grew = true;
      }
    }
    for (int k = 0; k < na; ++k)
      if (!arc_done[k] && o.arc_basin[k] == basin) push_cone(k, false);
    // Next basin: an arc adjacent to what is done.
    entry = -1;
    for (int k = 0; k < na && entry < 0; ++k)
      if (!arc_done[k] && (arc_done[(k + 1) % na] || arc_done[(k + na - 1) % na])) entry = k;
    for (int k = 0; k < na && entry < 0; ++k)
      if (!arc_done[k]) entry = k;
  }

  // Greedy selection with repair: take the next square in scheme order whose
  // addition keeps the prefix certificates.
  std::vector<char> inB(m.num_faces(), 0);
  std::vector<int> vB(nv, 0);
  std::vector<const Square*> pending = scheme;
  auto add = [&](const Square& s) {
    for (int fc : s.faces) {
      inB[fc] = 1;
      for (int v : m.faces()[fc]) ++vB[v];
    }
    o.squares.push_back(s);
  };
  auto boundary_ok_with = [&](const Square& s) {
    std::vector<char> mask = inB;
    for (int fc : s.faces) mask[fc] = 1;
    return detail::boundary_run_contiguous(m, loop_edges, mask);
  };
  while (!pending.empty()) {
    std::size_t pick = 0;
    bool found = o.squares.empty();
    if (o.squares.empty()) {
      // b_1 must contain J_1: the lowest band of the entry cone touching J_1.
      for (std::size_t i = 0; i < pending.size(); ++i)
        if (pending[i]->arc == o.first_arc && boundary_ok_with(*pending[i])) {
          pick = i;
          break;
        }
    } else {
      for (std::size_t i = 0; i < pending.size() && !found; ++i)
        if (detail::prefix_meets_connected(m, inB, vB, pending[i]->faces) && boundary_ok_with(*pending[i])) {
          pick = i;
          found = true;
        }
      if (!found) {
        // Keep at least connectivity if possible.
        for (std::size_t i = 0; i < pending.size(); ++i)
          if (detail::prefix_meets_connected(m, inB, vB, pending[i]->faces)) {
            pick = i;
            break;
          }
      }
      if (pick > 0) ++o.repairs;
    }
    add(*pending[pick]);
    pending.erase(pending.begin() + static_cast<long>(pick));
  }
  {
    std::set<int> j1(o.arcs[o.first_arc].begin(), o.arcs[o.first_arc].end());
    std::set<int> b1v;
    for (int fc : o.squares.front().faces)
      for (int v : m.faces()[fc]) b1v.insert(v);
    o.first_contains_J1 = std::all_of(j1.begin(), j1.end(), [&](int v) { return b1v.count(v) > 0; });
  }

  // Certificates on the final order.
  std::fill(inB.begin(), inB.end(), 0);
  std::fill(vB.begin(), vB.end(), 0);
  std::vector<char> edge_in(m.num_edges(), 0);
  const int N = static_cast<int>(o.squares.size());
  for (int j = 0; j < N; ++j) {
    Square& s = o.squares[j];
    // Square diameter over its vertices, measured on the disc.
    {
      std::set<int> sv;
      for (int fc : s.faces)
        for (int v : m.faces()[fc]) sv.insert(v);
      std::vector<int> verts(sv.begin(), sv.end());
      int v = verts.front();
      for (int sweep = 0; sweep < 3; ++sweep) {
        const auto d = g.vertex_distances_from_vertices({v});
        int far = v;
        for (int w : verts)
          if (d[w] > d[far]) far = w;
        s.diameter = std::max(s.diameter, d[far]);
        v = far;
      }
      if (s.diameter > o.lifting_scale) o.diameters_ok = false;
    }
    if (j > 0) {
      const bool c = detail::prefix_meets_connected(m, inB, vB, s.faces);
      o.next_connected.push_back(c);
      if (!c) o.connected_ok = false;
    }
    for (int fc : s.faces) {
      inB[fc] = 1;
      for (int v : m.faces()[fc]) ++vB[v];
      for (int e : m.face_edges()[fc]) edge_in[e] = 1;
    }
    double arc_len = 0.0;
    const bool contiguous = detail::boundary_run_contiguous(m, loop_edges, inB, &arc_len);
    o.boundary_contiguous.push_back(contiguous);
    if (!contiguous) o.boundary_ok = false;
    std::vector<int> src;
    for (int i = 0; i < nb; ++i)
      if (inB[m.edge_faces()[loop_edges[i]][0]]) {
        src.push_back(loop[i]);
        src.push_back(loop[(i + 1) % nb]);
      }
    double worst = src.empty() ? kInf : 0.0;
    if (!src.empty()) {
      const auto r = detail::edge_dijkstra(m, src, &edge_in);
      for (int v = 0; v < nv; ++v)
        if (vB[v] > 0) worst = std::max(worst, r.dist[v]);
    }
    o.max_path_to_boundary.push_back(worst);
    o.pair_path_bound.push_back(2.0 * worst + arc_len);
    if (worst > 2.0 * disc.eps) o.paths2_ok = false;
    if (2.0 * worst + arc_len > 5.0 * disc.eps) o.paths5_ok = false;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Lifting.

struct LiftChart {
  Vec3 base_point;  // x = iota(y)
  int base = 0;     // y
  int seed_vertex = 0;  // y0 in b_1
  Vec2 z0;
  double eps = 0.0;
  ModelSurface model;
  std::vector<Vec3> images;  // iota(v)
  std::vector<Vec2> lift;
  std::vector<double> residual;
  std::vector<int> anchors;          // anchor vertex used for square j (j >= 2)
  std::vector<double> anchor_radius; // |lift(anchor)| before extension
  double max_anchor_radius = 0.0;
  int newton_max_iterations = 0;
};

/// Lifts the disc through exp_x square by square. When `reanchor` is set the
/// seed z0 is obtained by lifting a path from y (at the origin) to y0, so that
/// lift(y) = 0; otherwise z0 = log_x(iota(y0)).
inline LiftChart lift_disc(const DiscImmersion& disc, const SquareOrder& order, bool reanchor = true,
                           double tol = 1e-10) {
  const TriMesh& m = disc.mesh;
  const ModelSurface& F = disc.model;
  const int nv = m.num_vertices();
  LiftChart c;
  c.base = disc.base;
  c.base_point = m.vertices()[disc.base];
  c.eps = disc.eps;
  c.model = F;
  c.images = m.vertices();
  c.lift.assign(nv, Vec2(std::nan(""), std::nan("")));
  c.residual.assign(nv, kInf);
  std::vector<char> done(nv, 0);
  const Vec3 x = c.base_point;
  const double scale = order.lifting_scale;

  auto solve = [&](int v, const Vec2& init, int square) {
    const auto r = exp_inverse_newton(F, x, c.images[v], init, tol);
    c.newton_max_iterations = std::max(c.newton_max_iterations, r.iterations);
    if (!r.converged) {
      if (r.residual > 1e-6) throw LiftDomainError(square, "local inverse of exp failed to converge");
      throw NumericalLiftError("residual " + std::to_string(r.residual) + " above tolerance at vertex " +
                               std::to_string(v));
    }
    return r.v;
  };

  // Extends the lift over the vertices of `faces` by breadth-first search from
  // `anchor`, each vertex initialized at its parent's lift.
  auto extend = [&](const std::vector<int>& faces, int anchor, int square) {
    std::set<int> verts;
    for (int fc : faces)
      for (int v : m.faces()[fc]) verts.insert(v);
    std::queue<int> q;
    q.push(anchor);
    std::set<int> seen{anchor};
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : m.vertex_neighbors()[v]) {
        if (!verts.count(w) || seen.count(w)) continue;
        seen.insert(w);
        q.push(w);
        if (done[w]) continue;
        if (F.distance(c.images[anchor], c.images[w]) > scale)
          throw LiftDomainError(square, "vertex outside the invertibility neighbourhood of the anchor");
        c.lift[w] = solve(w, c.lift[v], square);
        done[w] = 1;
      }
    }
  };

  // Seed: y0 is the first vertex of J1.
  const int y0 = order.arcs[order.first_arc].front();
  c.seed_vertex = y0;
  if (reanchor) {
    const auto path = detail::edge_dijkstra(m, {disc.base});
    Vec2 cur = Vec2::Zero();
    std::vector<int> chain;
    for (int v = y0; v != disc.base; v = path.pred[v]) chain.push_back(v);
    std::reverse(chain.begin(), chain.end());
    for (int v : chain) cur = solve(v, cur, 1);
    c.z0 = cur;
  } else {
    c.z0 = F.log(x, c.images[y0]);
  }
  if (c.z0.norm() > 3.0 * disc.eps) throw LiftDomainError(1, "seed lift z0 outside B(0, 3 eps)");
  c.lift[y0] = solve(y0, c.z0, 1);
  done[y0] = 1;
  extend(order.squares.front().faces, y0, 1);
  for (std::size_t j = 1; j < order.squares.size(); ++j) {
    const auto& sq = order.squares[j];
    int anchor = -1;
    for (int fc : sq.faces)
      for (int v : m.faces()[fc])
        if (done[v] && (anchor < 0 || v < anchor)) anchor = v;
    if (anchor < 0) throw LiftDomainError(static_cast<int>(j) + 1, "square does not meet the lifted prefix");
    const double rad = c.lift[anchor].norm();
    c.anchors.push_back(anchor);
    c.anchor_radius.push_back(rad);
    c.max_anchor_radius = std::max(c.max_anchor_radius, rad);
    extend(sq.faces, anchor, static_cast<int>(j) + 1);
  }
  for (int v = 0; v < nv; ++v) {
    if (!done[v]) throw LiftDomainError(static_cast<int>(order.squares.size()), "vertex not reached by the order");
    c.residual[v] = F.difference(F.exp(x, c.lift[v]), c.images[v]).norm();
  }
  return c;
}

struct LiftReport {
  double max_residual = 0.0;
  double max_radius = 0.0;
  bool radius_ok = false;  // max |lift| <= 9 eps
  double base_offset = 0.0;  // |lift(y)|
  bool base_ok = false;
  bool residual_ok = false;
  double max_anchor_radius = 0.0;
  bool anchors_ok = false;  // every anchor within 8 eps
  int coincident_pairs = 0;         // distinct vertices with equal images
  double min_coincident_separation = kInf;  // of their lifts
  bool injective_ok = true;
};

/// Recomputes residuals from the stored lifts and images and reports the
/// chart's invariants.
inline LiftReport verify_lift(const LiftChart& c, double residual_tol = 1e-8) {
  LiftReport r;
  const int nv = static_cast<int>(c.lift.size());
  for (int v = 0; v < nv; ++v) {
    const double res = c.model.difference(c.model.exp(c.base_point, c.lift[v]), c.images[v]).norm();
    r.max_residual = std::max(r.max_residual, std::isnan(res) ? kInf : res);
    r.max_radius = std::max(r.max_radius, c.lift[v].norm());
  }
  r.radius_ok = r.max_radius <= 9.0 * c.eps;
  r.base_offset = c.lift[c.base].norm();
  r.base_ok = r.base_offset <= 1e-9;
  r.residual_ok = r.max_residual <= residual_tol;
  r.max_anchor_radius = c.max_anchor_radius;
  r.anchors_ok = c.max_anchor_radius <= 8.0 * c.eps;
  // Spot check: vertices whose images coincide must have distinct lifts.
  std::vector<int> idx(nv);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const Vec3 &p = c.images[a], &q = c.images[b];
    return std::tie(p.x(), p.y(), p.z()) < std::tie(q.x(), q.y(), q.z());
  });
  for (int i = 0; i < nv; ++i)
    for (int j = i + 1; j < nv; ++j) {
      const Vec3 d = c.images[idx[j]] - c.images[idx[i]];
      if (d.x() > 1e-9) break;
      if (d.norm() > 1e-9) continue;
      ++r.coincident_pairs;
      const double s = (c.lift[idx[i]] - c.lift[idx[j]]).norm();
      r.min_coincident_separation = std::min(r.min_coincident_separation, s);
      if (s <= 1e-9) r.injective_ok = false;
    }
  return r;
}

}  // namespace bmc
