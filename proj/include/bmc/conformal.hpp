#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "bmc/catalog.hpp"
#include "bmc/mesh.hpp"

namespace bmc {

/// Mod = H / W of the right circular annulus S^1(W) x [0, H].
inline double modulus_right_annulus(double H, double W) {
  if (!(H > 0.0)) throw ConfigError("H", "must be positive");
  if (!(W > 0.0)) throw ConfigError("W", "must be positive");
  return H / W;
}

/// Mod of the round annulus rho < |z| < r: log(r/rho) / (2 pi).
inline double modulus_round_annulus(double r, double rho) {
  if (!(r > rho && rho > 0.0)) throw ConfigError("annulus", "need r > rho > 0");
  return std::log(r / rho) / (2.0 * kPi);
}

/// Triangulated annulus with boundary loops labelled 0 and 1.
struct AnnulusRegion {
  TriMesh mesh;
  int b0 = 0, b1 = 1;  // indices into mesh.boundary_loops()
  double area = 0.0;
  // Filled by modulus_mesh_annulus.
  bool solved = false;
  std::vector<double> u;
  double energy = 0.0;
  double modulus = 0.0;
  int clamped = 0;  // cotangent weights raised to the positive floor
  double min_interior_u = 0.0, max_interior_u = 1.0;
};

inline AnnulusRegion make_annulus(TriMesh mesh, int b0 = 0, int b1 = 1) {
  if (mesh.boundary_loops().size() != 2 || mesh.euler_characteristic() != 0 || mesh.num_components() != 1)
    throw TopologyError("region is not an annulus (needs two boundary loops and chi = 0)");
  if (b0 == b1 || b0 < 0 || b1 < 0 || b0 > 1 || b1 > 1) throw ConfigError("b0/b1", "loop labels must be 0 and 1");
  AnnulusRegion a;
  a.mesh = std::move(mesh);
  a.b0 = b0;
  a.b1 = b1;
  a.area = surface_area(a.mesh);
  return a;
}

/// Resolves a boundary loop spec "index:k" or "near:x,y,z" (loop holding the
/// boundary vertex nearest to the point).
inline int resolve_loop(const TriMesh& mesh, const std::string& spec, const std::string& key) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  const auto& loops = mesh.boundary_loops();
  if (kind == "index") {
    try {
      const int k = std::stoi(arg);
      if (k < 0 || k >= static_cast<int>(loops.size())) throw ConfigError(key, "loop index out of range");
      return k;
    } catch (const std::logic_error&) {
      throw ConfigError(key, "bad loop index '" + arg + "'");
    }
  }
  if (kind == "near") {
    std::vector<double> c;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        c.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError(key, "bad coordinate '" + item + "'");
      }
    }
    if (c.size() != 3) throw ConfigError(key, "near: needs three coordinates");
    const Vec3 x(c[0], c[1], c[2]);
    int best = -1;
    double bd = kInf;
    for (std::size_t k = 0; k < loops.size(); ++k)
      for (int v : loops[k]) {
        const double d = mesh.ambient().displacement(x, mesh.vertices()[v]).norm();
        if (d < bd) {
          bd = d;
          best = static_cast<int>(k);
        }
      }
    if (best < 0) throw ConfigError(key, "mesh has no boundary");
    return best;
  }
  throw ConfigError(key, "loop spec must be index:k or near:x,y,z");
}

/// Cotangent weight 1/2 (cot alpha + cot beta) of every edge.
inline std::vector<double> cotangent_weights(const TriMesh& mesh) {
  std::vector<double> w(mesh.num_edges(), 0.0);
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int i = 0; i < 3; ++i) {
      // Edge slot i joins corners i and i+1; its opposite corner is i+2.
      const double c = mesh.corner_cot(f, (i + 2) % 3);
      if (!std::isfinite(c)) throw MeshError("degenerate cotangent weight in face " + std::to_string(f));
      w[mesh.face_edges()[f][i]] += 0.5 * c;
    }
  return w;
}

/// Solves the discrete Dirichlet problem u = 0 on b0, u = 1 on b1 with
/// cotangent weights; Mod = 1 / E(u).
inline double modulus_mesh_annulus(AnnulusRegion& a) {
  const TriMesh& m = a.mesh;
  auto w = cotangent_weights(m);
  double mean = 0.0;
  for (double x : w) mean += std::abs(x);
  mean /= std::max<std::size_t>(1, w.size());
  const double floor = 1e-8 * mean;
  a.clamped = 0;
  for (double& x : w)
    if (x < floor) {
      x = floor;
      ++a.clamped;
    }
  const int nv = m.num_vertices();
  std::vector<double> fixed(nv, -1.0);
  for (int v : m.boundary_loops()[a.b0]) fixed[v] = 0.0;
  for (int v : m.boundary_loops()[a.b1]) fixed[v] = 1.0;
  std::vector<int> idx(nv, -1);
  int n = 0;
  for (int v = 0; v < nv; ++v)
    if (fixed[v] < 0.0) idx[v] = n++;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < m.num_edges(); ++e) {
    const int i = m.edges()[e][0], j = m.edges()[e][1];
    const double we = w[e];
    for (auto [p, q] : {std::pair{i, j}, std::pair{j, i}}) {
      if (idx[p] < 0) continue;
      trip.emplace_back(idx[p], idx[p], we);
      if (idx[q] >= 0) trip.emplace_back(idx[p], idx[q], -we);
      else rhs[idx[p]] += we * fixed[q];
    }
  }
  a.u.assign(nv, 0.0);
  if (n > 0) {
    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(L);
    if (solver.info() != Eigen::Success) throw MeshError("Dirichlet system is singular");
    const Eigen::VectorXd x = solver.solve(rhs);
    for (int v = 0; v < nv; ++v) a.u[v] = idx[v] >= 0 ? x[idx[v]] : fixed[v];
  } else {
    for (int v = 0; v < nv; ++v) a.u[v] = fixed[v];
  }
  a.energy = 0.0;
  for (int e = 0; e < m.num_edges(); ++e) {
    const double d = a.u[m.edges()[e][0]] - a.u[m.edges()[e][1]];
    a.energy += w[e] * d * d;
  }
  a.min_interior_u = kInf;
  a.max_interior_u = -kInf;
  for (int v = 0; v < nv; ++v)
    if (idx[v] >= 0) {
      a.min_interior_u = std::min(a.min_interior_u, a.u[v]);
      a.max_interior_u = std::max(a.max_interior_u, a.u[v]);
    }
  a.modulus = 1.0 / a.energy;
  a.solved = true;
  return a.modulus;
}

// ---------------------------------------------------------------------------
// Level sets and the Ahlfors curve.

struct LevelComponent {
  std::vector<Vec3> polyline;
  std::vector<int> edges;  // mesh edges crossed, in order
  double length = 0.0;
  bool closed = false;
  bool separating = false;
};

namespace detail {

// Vertex path from loop b0 to loop b1 along mesh edges (BFS).
inline std::vector<int> crossing_path_edges(const AnnulusRegion& a) {
  const TriMesh& m = a.mesh;
  std::vector<int> prev_edge(m.num_vertices(), -2);
  std::queue<int> q;
  for (int v : m.boundary_loops()[a.b0]) {
    prev_edge[v] = -1;
    q.push(v);
  }
  std::vector<char> target(m.num_vertices(), 0);
  for (int v : m.boundary_loops()[a.b1]) target[v] = 1;
  int hit = -1;
  while (!q.empty() && hit < 0) {
    const int v = q.front();
    q.pop();
    for (int e : m.vertex_edges()[v]) {
      const int w = m.edges()[e][0] == v ? m.edges()[e][1] : m.edges()[e][0];
      if (prev_edge[w] != -2) continue;
      prev_edge[w] = e;
      if (target[w]) {
        hit = w;
        break;
      }
      q.push(w);
    }
  }
  std::vector<int> path;
  for (int v = hit; v >= 0 && prev_edge[v] >= 0;) {
    const int e = prev_edge[v];
    path.push_back(e);
    v = m.edges()[e][0] == v ? m.edges()[e][1] : m.edges()[e][0];
  }
  return path;
}

}  // namespace detail

/// Components of the level set {u = t}, with lengths measured on face layouts.
inline std::vector<LevelComponent> level_set(const AnnulusRegion& a, double t) {
  const TriMesh& m = a.mesh;
  // Vertices exactly at level t count as above it.
  auto above = [&](int v) { return a.u[v] >= t; };
  auto crosses = [&](int e) { return above(m.edges()[e][0]) != above(m.edges()[e][1]); };
  auto param = [&](int e) {
    const double ua = a.u[m.edges()[e][0]], ub = a.u[m.edges()[e][1]];
    return (t - ua) / (ub - ua);
  };
  // Each crossed face links two crossed edges.
  std::map<int, std::vector<std::pair<int, int>>> links;  // edge -> (other edge, face)
  for (int f = 0; f < m.num_faces(); ++f) {
    std::vector<int> es;
    for (int i = 0; i < 3; ++i)
      if (crosses(m.face_edges()[f][i])) es.push_back(m.face_edges()[f][i]);
    if (es.size() != 2) continue;
    links[es[0]].push_back({es[1], f});
    links[es[1]].push_back({es[0], f});
  }
  auto point_in_face = [&](int f, int e) {
    const Face& tr = m.faces()[f];
    const auto& lay = m.layout(f);
    const int a0 = m.edges()[e][0], a1 = m.edges()[e][1];
    int c0 = 0, c1 = 0;
    for (int i = 0; i < 3; ++i) {
      if (tr[i] == a0) c0 = i;
      if (tr[i] == a1) c1 = i;
    }
    const double s = param(e);
    return Vec2((1.0 - s) * lay[c0] + s * lay[c1]);
  };
  auto point_ambient = [&](int e) {
    const int a0 = m.edges()[e][0], a1 = m.edges()[e][1];
    return Vec3(m.ambient().wrap(m.vertices()[a0] + param(e) * m.edge_vector(a0, a1)));
  };
  std::map<int, char> used;
  std::vector<LevelComponent> comps;
  // Open chains start at edges with a single link (mesh boundary edges).
  std::vector<int> starts;
  for (const auto& [e, l] : links)
    if (l.size() == 1) starts.push_back(e);
  for (const auto& [e, l] : links)
    if (l.size() != 1) starts.push_back(e);
  for (int s : starts) {
    if (used[s]) continue;
    LevelComponent c;
    int cur = s, prev_face = -1;
    while (true) {
      used[cur] = 1;
      c.edges.push_back(cur);
      c.polyline.push_back(point_ambient(cur));
      int next = -1, face = -1;
      for (auto [o, f] : links[cur])
        if (f != prev_face) {
          next = o;
          face = f;
          break;
        }
      if (next < 0) break;
      c.length += (point_in_face(face, cur) - point_in_face(face, next)).norm();
      prev_face = face;
      if (next == s) {
        c.closed = true;
        break;
      }
      if (used[next]) break;
      cur = next;
    }
    comps.push_back(std::move(c));
  }
  const auto path = detail::crossing_path_edges(a);
  for (auto& c : comps) {
    int hits = 0;
    for (int e : path)
      if (std::find(c.edges.begin(), c.edges.end(), e) != c.edges.end()) ++hits;
    c.separating = hits % 2 == 1;
  }
  return comps;
}

struct AhlforsCurve {
  std::vector<Vec3> polyline;
  double length = 0.0;
  double t_star = 0.5;
  bool disconnected = false;  // no t gave a connected level set
  double bound = 0.0;         // Area / Mod
  double slack = 0.0;         // (Area/Mod - length^2) / (Area/Mod)
  double half_level_length = 0.0;  // length of the separating u = 1/2 curve
  bool pass = false;
};

/// Shortest connected level set over t_i = (i + 1/2)/101; ties go to t nearest 1/2.
/// Asserts length^2 <= Area / Mod within relative tolerance `rel_tol`.
inline AhlforsCurve ahlfors_curve(const AnnulusRegion& a, double rel_tol = 0.02, int grid = 101) {
  if (!a.solved) throw ConfigError("annulus", "modulus must be solved first");
  AhlforsCurve out;
  out.bound = a.area / a.modulus;
  double best = kInf, best_t = 0.0;
  const LevelComponent* best_c = nullptr;
  std::vector<std::vector<LevelComponent>> all(grid);
  double fb_best = kInf, fb_t = 0.0;
  const LevelComponent* fb_c = nullptr;
  auto better = [](double len, double t, double cur_len, double cur_t) {
    const double tol = 1e-9 * std::max(1.0, cur_len);
    if (len < cur_len - tol) return true;
    return len <= cur_len + tol && std::abs(t - 0.5) < std::abs(cur_t - 0.5);
  };
  for (int i = 0; i < grid; ++i) {
    const double t = (i + 0.5) / grid;
    all[i] = level_set(a, t);
    const auto& comps = all[i];
    if (comps.size() == 1 && comps[0].separating) {
      if (better(comps[0].length, t, best, best_t)) {
        best = comps[0].length;
        best_t = t;
        best_c = &comps[0];
      }
    }
    for (const auto& c : comps) {
      if (!c.separating) continue;
      if (better(c.length, t, fb_best, fb_t)) {
        fb_best = c.length;
        fb_t = t;
        fb_c = &c;
      }
      if (i == grid / 2) out.half_level_length = c.length;
    }
  }
  if (!best_c) {
    out.disconnected = true;
    best_c = fb_c;
    best_t = fb_t;
  }
  if (!best_c) throw TopologyError("no separating level set found");
  out.polyline = best_c->polyline;
  out.length = best_c->length;
  out.t_star = best_t;
  out.slack = (out.bound - out.length * out.length) / out.bound;
  out.pass = out.slack >= -rel_tol;
  return out;
}

/// Annulus of faces around the dumbbell neck whose vertices satisfy |z| <= z_cut.
/// Loop 0 is the lower boundary.
inline AnnulusRegion neck_annulus(const TriMesh& dumbbell, double z_cut) {
  std::vector<int> faces;
  for (int f = 0; f < dumbbell.num_faces(); ++f) {
    bool in = true;
    for (int v : dumbbell.faces()[f]) in = in && std::abs(dumbbell.vertices()[v].z()) <= z_cut;
    if (in) faces.push_back(f);
  }
  TriMesh sub = dumbbell.submesh(faces);
  const auto& loops = sub.boundary_loops();
  if (loops.size() != 2) throw TopologyError("neck cut is not an annulus");
  const bool first_low = sub.vertices()[loops[0][0]].z() < sub.vertices()[loops[1][0]].z();
  return make_annulus(std::move(sub), first_low ? 0 : 1, first_low ? 1 : 0);
}

}  // namespace bmc
