#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bmc/ambient.hpp"
#include "bmc/error.hpp"

namespace bmc {

using Face = std::array<int, 3>;

/// Length of the segment joining two vertex positions in the pullback metric.
using EdgeLengthFn = std::function<double(const Vec3&, const Vec3&)>;

/// Triangle mesh carrying the pullback metric through its edge lengths.
///
/// Immutable after construction. Construction validates the manifold and
/// orientation invariants and precomputes connectivity, edge lengths and an
/// isometric planar layout of every face.
class TriMesh {
 public:
  TriMesh() = default;

  TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces, AmbientSpace ambient,
          bool with_boundary = false, EdgeLengthFn length_fn = {})
      : ambient_(std::move(ambient)),
        vertices_(std::move(vertices)),
        faces_(std::move(faces)),
        with_boundary_(with_boundary),
        length_fn_(std::move(length_fn)) {
    build();
  }

  const AmbientSpace& ambient() const { return ambient_; }
  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::array<int, 2>>& edge_faces() const { return edge_faces_; }
  const std::vector<std::array<int, 3>>& face_edges() const { return face_edges_; }
  const std::vector<double>& edge_lengths() const { return edge_lengths_; }
  const std::vector<std::vector<int>>& vertex_faces() const { return vertex_faces_; }
  const std::vector<std::vector<int>>& vertex_neighbors() const { return vertex_neighbors_; }
  const std::vector<std::vector<int>>& vertex_edges() const { return vertex_edges_; }
  const std::vector<std::vector<int>>& boundary_loops() const { return boundary_loops_; }
  const EdgeLengthFn& length_fn() const { return length_fn_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  bool with_boundary() const { return with_boundary_; }
  bool on_boundary(int v) const { return on_boundary_[v] != 0; }
  bool edge_on_boundary(int e) const { return edge_faces_[e][1] < 0; }

  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }
  int genus() const { return (2 - euler_characteristic() - static_cast<int>(boundary_loops_.size())) / 2; }

  /// Edge id joining a and b, or -1.
  int find_edge(int a, int b) const {
    for (int e : vertex_edges_[a])
      if (edges_[e][0] == b || edges_[e][1] == b) return e;
    return -1;
  }

  /// Ambient displacement from vertex a to vertex b.
  Vec3 edge_vector(int a, int b) const { return ambient_.displacement(vertices_[a], vertices_[b]); }

  /// Planar isometric layout of face f: corner i sits at layout(f)[i].
  const std::array<Vec2, 3>& layout(int f) const { return layouts_[f]; }

  double face_area(int f) const { return face_areas_[f]; }
  const std::vector<double>& face_areas() const { return face_areas_; }

  /// Interior angle at corner i of face f.
  double corner_angle(int f, int i) const {
    const auto& p = layouts_[f];
    const Vec2 u = p[(i + 1) % 3] - p[i];
    const Vec2 w = p[(i + 2) % 3] - p[i];
    return std::atan2(std::abs(u.x() * w.y() - u.y() * w.x()), u.dot(w));
  }

  /// Cotangent of the angle at corner i of face f.
  double corner_cot(int f, int i) const {
    const auto& p = layouts_[f];
    const Vec2 u = p[(i + 1) % 3] - p[i];
    const Vec2 w = p[(i + 2) % 3] - p[i];
    return u.dot(w) / std::abs(u.x() * w.y() - u.y() * w.x());
  }

  /// Unnormalized ambient normal of face f (twice the area vector).
  Vec3 face_normal(int f) const {
    const Face& t = faces_[f];
    return edge_vector(t[0], t[1]).cross(edge_vector(t[0], t[2]));
  }

  double max_edge_length() const {
    return edge_lengths_.empty() ? 0.0 : *std::max_element(edge_lengths_.begin(), edge_lengths_.end());
  }

  double mean_edge_length() const {
    if (edge_lengths_.empty()) return 0.0;
    return std::accumulate(edge_lengths_.begin(), edge_lengths_.end(), 0.0) / edge_lengths_.size();
  }

  int num_components() const {
    std::vector<int> seen(vertices_.size(), 0);
    int count = 0;
    for (int s = 0; s < num_vertices(); ++s) {
      if (seen[s]) continue;
      ++count;
      std::vector<int> stack{s};
      seen[s] = 1;
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : vertex_neighbors_[v])
          if (!seen[w]) {
            seen[w] = 1;
            stack.push_back(w);
          }
      }
    }
    return count;
  }

  /// Sub-mesh made of the given faces; always flagged with-boundary.
  /// vertex_map, when given, receives the parent vertex id of each new vertex.
  TriMesh submesh(const std::vector<int>& face_ids, std::vector<int>* vertex_map = nullptr) const {
    std::vector<int> remap(vertices_.size(), -1);
    std::vector<Vec3> verts;
    std::vector<int> parent;
    std::vector<Face> fs;
    fs.reserve(face_ids.size());
    for (int f : face_ids) {
      Face t{};
      for (int i = 0; i < 3; ++i) {
        int& r = remap[faces_[f][i]];
        if (r < 0) {
          r = static_cast<int>(verts.size());
          verts.push_back(vertices_[faces_[f][i]]);
          parent.push_back(faces_[f][i]);
        }
        t[i] = r;
      }
      fs.push_back(t);
    }
    if (vertex_map) *vertex_map = std::move(parent);
    return TriMesh(std::move(verts), std::move(fs), ambient_, true, length_fn_);
  }

 private:
  void build() {
    const int nv = num_vertices();
    const int nf = num_faces();
    if (nv == 0 || nf == 0) throw MeshError("empty mesh");
    for (const Face& t : faces_) {
      for (int i : t)
        if (i < 0 || i >= nv) throw MeshError("face index out of range");
      if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw MeshError("face with repeated vertex");
    }

    // Undirected edges keyed by (min, max); orientation checked per half-edge.
    std::vector<std::pair<std::pair<int, int>, int>> half;  // ((a,b), face*3+i)
    half.reserve(3 * nf);
    for (int f = 0; f < nf; ++f)
      for (int i = 0; i < 3; ++i) half.push_back({{faces_[f][i], faces_[f][(i + 1) % 3]}, 3 * f + i});
    std::vector<std::pair<std::pair<int, int>, int>> keyed = half;
    for (auto& h : keyed)
      if (h.first.first > h.first.second) std::swap(h.first.first, h.first.second);
    std::sort(keyed.begin(), keyed.end());

    face_edges_.assign(nf, {-1, -1, -1});
    for (std::size_t k = 0; k < keyed.size();) {
      std::size_t m = k;
      while (m < keyed.size() && keyed[m].first == keyed[k].first) ++m;
      if (m - k > 2) throw MeshError("non-manifold edge");
      const int e = static_cast<int>(edges_.size());
      edges_.push_back({keyed[k].first.first, keyed[k].first.second});
      std::array<int, 2> ef{-1, -1};
      for (std::size_t q = k; q < m; ++q) {
        const int code = keyed[q].second;
        ef[q - k] = code / 3;
        face_edges_[code / 3][code % 3] = e;
      }
      if (m - k == 2) {
        const int c0 = keyed[k].second, c1 = keyed[k + 1].second;
        const int a0 = faces_[c0 / 3][c0 % 3];
        const int a1 = faces_[c1 / 3][c1 % 3];
        if (a0 == a1) throw MeshError("inconsistent face orientation");
      }
      edge_faces_.push_back(ef);
      k = m;
    }

    vertex_faces_.assign(nv, {});
    vertex_edges_.assign(nv, {});
    vertex_neighbors_.assign(nv, {});
    for (int f = 0; f < nf; ++f)
      for (int v : faces_[f]) vertex_faces_[v].push_back(f);
    for (int e = 0; e < num_edges(); ++e) {
      vertex_edges_[edges_[e][0]].push_back(e);
      vertex_edges_[edges_[e][1]].push_back(e);
      vertex_neighbors_[edges_[e][0]].push_back(edges_[e][1]);
      vertex_neighbors_[edges_[e][1]].push_back(edges_[e][0]);
    }
    for (int v = 0; v < nv; ++v)
      if (vertex_faces_[v].empty()) throw MeshError("isolated vertex " + std::to_string(v));

    edge_lengths_.resize(edges_.size());
    for (int e = 0; e < num_edges(); ++e) {
      const auto [a, b] = edges_[e];
      const double l = length_fn_ ? length_fn_(vertices_[a], vertices_[b])
                                  : ambient_.displacement(vertices_[a], vertices_[b]).norm();
      if (!(l > 0.0) || !std::isfinite(l)) throw MeshError("non-positive edge length");
      edge_lengths_[e] = l;
    }

    layouts_.resize(nf);
    face_areas_.resize(nf);
    for (int f = 0; f < nf; ++f) {
      const double lab = edge_lengths_[face_edges_[f][0]];
      const double lbc = edge_lengths_[face_edges_[f][1]];
      const double lca = edge_lengths_[face_edges_[f][2]];
      if (!(lab < lbc + lca && lbc < lab + lca && lca < lab + lbc))
        throw MeshError("degenerate face " + std::to_string(f));
      const double x = (lab * lab + lca * lca - lbc * lbc) / (2.0 * lab);
      const double y = std::sqrt(std::max(0.0, lca * lca - x * x));
      if (!(y > 0.0)) throw MeshError("degenerate face " + std::to_string(f));
      layouts_[f] = {Vec2(0.0, 0.0), Vec2(lab, 0.0), Vec2(x, y)};
      face_areas_[f] = 0.5 * lab * y;
    }

    on_boundary_.assign(nv, 0);
    std::vector<int> next(nv, -1);
    bool any_boundary = false;
    for (int e = 0; e < num_edges(); ++e) {
      if (edge_faces_[e][1] >= 0) continue;
      any_boundary = true;
      const int f = edge_faces_[e][0];
      int slot = 0;
      while (face_edges_[f][slot] != e) ++slot;
      const int a = faces_[f][slot], b = faces_[f][(slot + 1) % 3];
      if (next[a] >= 0) throw MeshError("pinched boundary at vertex " + std::to_string(a));
      next[a] = b;
      on_boundary_[a] = on_boundary_[b] = 1;
    }
    if (any_boundary && !with_boundary_) throw MeshError("mesh has boundary but is not flagged with-boundary");
    std::vector<char> used(nv, 0);
    for (int v = 0; v < nv; ++v) {
      if (next[v] < 0 || used[v]) continue;
      std::vector<int> loop;
      int w = v;
      while (!used[w]) {
        used[w] = 1;
        loop.push_back(w);
        w = next[w];
        if (w < 0) throw MeshError("open boundary chain");
      }
      boundary_loops_.push_back(std::move(loop));
    }
  }

  AmbientSpace ambient_;
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  bool with_boundary_ = false;
  EdgeLengthFn length_fn_;

  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 2>> edge_faces_;
  std::vector<std::array<int, 3>> face_edges_;
  std::vector<double> edge_lengths_;
  std::vector<std::vector<int>> vertex_faces_;
  std::vector<std::vector<int>> vertex_edges_;
  std::vector<std::vector<int>> vertex_neighbors_;
  std::vector<std::vector<int>> boundary_loops_;
  std::vector<char> on_boundary_;
  std::vector<std::array<Vec2, 3>> layouts_;
  std::vector<double> face_areas_;
};

/// Sum of face areas in the pullback metric.
inline double surface_area(const TriMesh& mesh) {
  const auto& a = mesh.face_areas();
  return std::accumulate(a.begin(), a.end(), 0.0);
}

/// Length of a closed vertex loop measured with mesh edge lengths.
inline double loop_length(const TriMesh& mesh, const std::vector<int>& loop) {
  double len = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const int e = mesh.find_edge(loop[i], loop[(i + 1) % loop.size()]);
    len += e >= 0 ? mesh.edge_lengths()[e] : mesh.edge_vector(loop[i], loop[(i + 1) % loop.size()]).norm();
  }
  return len;
}

// ---------------------------------------------------------------------------
// OFF files: "OFF", "V F 0", V lines of coordinates, F lines "3 i j k".

inline void write_off(std::ostream& out, const TriMesh& mesh) {
  out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << " 0\n";
  out << std::setprecision(17);
  for (const Vec3& v : mesh.vertices()) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

/// Reads an OFF mesh. Vertex lines may carry n >= 3 coordinates; coordinates
/// beyond the third must be zero since meshes live in the first three axes.
inline TriMesh read_off(std::istream& in, const AmbientSpace& ambient, bool with_boundary,
                        EdgeLengthFn length_fn = {}) {
  std::string line;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    throw MeshError(std::string("OFF: unexpected end of file reading ") + what);
  };
  next_line("header");
  if (line.substr(0, 3) != "OFF") throw MeshError("OFF: missing OFF header");
  next_line("counts");
  std::istringstream counts(line);
  long nv = -1, nf = -1;
  counts >> nv >> nf;
  if (!counts || nv <= 0 || nf <= 0) throw MeshError("OFF: bad counts line");
  std::vector<Vec3> verts;
  verts.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    next_line("vertex");
    std::istringstream ls(line);
    std::vector<double> c;
    double x;
    while (ls >> x) c.push_back(x);
    if (c.size() < 3) throw MeshError("OFF: vertex line with fewer than 3 coordinates");
    for (std::size_t k = 3; k < c.size(); ++k)
      if (c[k] != 0.0) throw UnsupportedError("OFF: nonzero coordinate beyond the third axis");
    verts.emplace_back(c[0], c[1], c[2]);
  }
  std::vector<Face> faces;
  faces.reserve(nf);
  for (long i = 0; i < nf; ++i) {
    next_line("face");
    std::istringstream ls(line);
    int n = 0;
    Face f{};
    ls >> n >> f[0] >> f[1] >> f[2];
    if (!ls || n != 3) throw MeshError("OFF: only triangle faces are supported");
    faces.push_back(f);
  }
  return TriMesh(std::move(verts), std::move(faces), ambient, with_boundary, std::move(length_fn));
}

}  // namespace bmc
