#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bmc/builders.hpp"
#include "bmc/conformal.hpp"
#include "bmc/geodesic.hpp"
#include "bmc/parallel.hpp"

namespace bmc {

// ---------------------------------------------------------------------------
// Shared sample sets in the family's chart coordinates.

struct SampleSet {
  std::vector<Vec2> coords;
  std::vector<std::string> labels;  // "area" or "neck"
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(coords.size()); }
  std::vector<int> indices(const std::string& label) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (labels[i] == label) out.push_back(i);
    return out;
  }
};

/// Parameter box of chart_point for each family.
inline std::pair<Vec2, Vec2> chart_domain(const CatalogSurface& s) {
  struct V {
    std::pair<Vec2, Vec2> operator()(const RoundSphere&) const { return {Vec2(0, 0), Vec2(kPi, 2 * kPi)}; }
    std::pair<Vec2, Vec2> operator()(const Ellipsoid&) const { return {Vec2(0, 0), Vec2(kPi, 2 * kPi)}; }
    std::pair<Vec2, Vec2> operator()(const FlatTorus2& f) const { return {Vec2(0, 0), Vec2(f.px, f.py)}; }
    std::pair<Vec2, Vec2> operator()(const TorusOfRevolution&) const { return {Vec2(0, 0), Vec2(2 * kPi, 2 * kPi)}; }
    std::pair<Vec2, Vec2> operator()(const Dumbbell&) const { return {Vec2(-3, 0), Vec2(3, 2 * kPi)}; }
    std::pair<Vec2, Vec2> operator()(const Cylinder& f) const { return {Vec2(0, 0), Vec2(2 * kPi, f.height)}; }
    std::pair<Vec2, Vec2> operator()(const FlatDisc& f) const { return {Vec2(0, 0), Vec2(f.radius, 2 * kPi)}; }
  };
  return std::visit(V{}, s.family);
}

/// Area element |d1 x d2| of chart_point by central differences.
inline double chart_area_density(const CatalogSurface& s, const Vec2& q, double h = 1e-6) {
  auto d = [&](int k) -> Vec3 {
    Vec2 e = Vec2::Zero();
    e[k] = h;
    return s.ambient.displacement(chart_point(s, q + e), chart_point(s, q - e)) / (2.0 * h);
  };
  return d(0).cross(d(1)).norm();
}

/// Area-weighted samples, stratified in the first chart coordinate: stratum
/// i draws from [(i + U)/n] of the marginal area CDF, the second coordinate
/// from the conditional CDF on a grid.
inline SampleSet area_weighted_samples(const CatalogSurface& s, int n, std::uint64_t seed, int grid1 = 2000,
                                       int grid2 = 64) {
  if (n < 1) throw ConfigError("samples", "sample count must be positive");
  const auto [lo, hi] = chart_domain(s);
  const double w1 = (hi[0] - lo[0]) / grid1, w2 = (hi[1] - lo[1]) / grid2;
  std::vector<std::vector<double>> cell(grid1, std::vector<double>(grid2));
  std::vector<double> marginal(grid1 + 1, 0.0);
  for (int i = 0; i < grid1; ++i) {
    double row = 0.0;
    for (int j = 0; j < grid2; ++j) {
      const Vec2 q(lo[0] + (i + 0.5) * w1, lo[1] + (j + 0.5) * w2);
      cell[i][j] = chart_area_density(s, q) * w1 * w2;
      row += cell[i][j];
    }
    marginal[i + 1] = marginal[i] + row;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SampleSet out;
  out.seed = seed;
  for (int k = 0; k < n; ++k) {
    const double target = (k + U(rng)) / n * marginal.back();
    int i = static_cast<int>(std::upper_bound(marginal.begin(), marginal.end(), target) - marginal.begin()) - 1;
    i = std::clamp(i, 0, grid1 - 1);
    const double f1 = (target - marginal[i]) / std::max(1e-300, marginal[i + 1] - marginal[i]);
    double rest = U(rng) * (marginal[i + 1] - marginal[i]);
    int j = 0;
    while (j < grid2 - 1 && rest > cell[i][j]) rest -= cell[i][j++];
    const double f2 = std::clamp(rest / std::max(1e-300, cell[i][j]), 0.0, 1.0);
    out.coords.emplace_back(lo[0] + (i + std::clamp(f1, 0.0, 1.0)) * w1, lo[1] + (j + f2) * w2);
    out.labels.push_back("area");
  }
  return out;
}

/// Appends k samples evenly spaced around the dumbbell waist (T = 0).
inline void add_waist_samples(SampleSet& s, int k) {
  for (int i = 0; i < k; ++i) {
    s.coords.emplace_back(0.0, 2.0 * kPi * i / k);
    s.labels.push_back("neck");
  }
}

inline std::vector<SamplePoint> place_samples(const CatalogSurface& s, const TriMesh& mesh, const SampleSet& set) {
  std::vector<SamplePoint> out;
  out.reserve(set.coords.size());
  for (const auto& q : set.coords) out.push_back(locate(mesh, chart_point(s, q)));
  return out;
}

// ---------------------------------------------------------------------------
// Distance matrices.

struct DistanceMatrix {
  Eigen::MatrixXd d;
  double max_asymmetry = 0.0;  // before averaging
  double tolerance = 0.0;      // solver resolution: longest mesh edge
};

/// All-pairs geodesic distances between sample points, symmetrized by averaging.
inline DistanceMatrix distance_matrix(const TriMesh& mesh, const std::vector<SamplePoint>& pts, int steiner = 3,
                                      int threads = 0) {
  if (mesh.num_components() != 1) throw UnreachableError("distance matrix needs a connected mesh");
  const GeodesicGraph g(mesh, steiner);
  const int n = static_cast<int>(pts.size());
  DistanceMatrix m;
  m.d = Eigen::MatrixXd::Zero(n, n);
  m.tolerance = mesh.max_edge_length();
  parallel_for(n, [&](int i) {
    const auto f = g.field(pts[i]);
    for (int j = 0; j < n; ++j)
      if (j != i) m.d(i, j) = g.evaluate(f, pts[i], pts[j]);
  }, threads);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      m.max_asymmetry = std::max(m.max_asymmetry, std::abs(m.d(i, j) - m.d(j, i)));
      const double a = 0.5 * (m.d(i, j) + m.d(j, i));
      m.d(i, j) = m.d(j, i) = a;
    }
  return m;
}

inline double uniform_deviation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

struct PseudoMetricAxioms {
  bool nonnegative = true, symmetric = true, zero_diagonal = true;
  double max_triangle_violation = 0.0;
  bool triangle_ok = true;
  bool ok() const { return nonnegative && symmetric && zero_diagonal && triangle_ok; }
};

inline PseudoMetricAxioms check_pseudometric(const Eigen::MatrixXd& d, double slack = 1e-9) {
  PseudoMetricAxioms a;
  const int n = static_cast<int>(d.rows());
  for (int i = 0; i < n; ++i) {
    if (d(i, i) != 0.0) a.zero_diagonal = false;
    for (int j = 0; j < n; ++j) {
      if (d(i, j) < 0.0) a.nonnegative = false;
      if (d(i, j) != d(j, i)) a.symmetric = false;
    }
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a.max_triangle_violation = std::max(a.max_triangle_violation, d(i, j) - d(i, k) - d(k, j));
  a.triangle_ok = a.max_triangle_violation <= slack;
  return a;
}

/// Largest |d(p1,q1) - d(p2,q2)| - d(p1,p2) - d(q1,q2) over random quadruples.
inline double equicontinuity_violation(const Eigen::MatrixXd& d, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(d.rows()) - 1);
  double worst = -kInf;
  for (int t = 0; t < trials; ++t) {
    const int p1 = pick(rng), q1 = pick(rng), p2 = pick(rng), q2 = pick(rng);
    worst = std::max(worst, std::abs(d(p1, q1) - d(p2, q2)) - d(p1, p2) - d(q1, q2));
  }
  return worst;
}

/// Lipschitz constant of the sample identification from metric a to metric b.
inline double sample_lipschitz(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double L = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = i + 1; j < a.cols(); ++j)
      if (a(i, j) > 0.0) L = std::max(L, b(i, j) / a(i, j));
  return L;
}

struct PseudoMetric {
  Eigen::MatrixXd d;                            // limit estimate: last member
  std::vector<std::vector<double>> deviation;   // sup |d_j - d_k|
  std::vector<double> tails;                    // max_{k > j} sup |d_j - d_k|
  bool strictly_decreasing = false;
  bool converged = false;
  double tail_tolerance = 0.0;
  double zeta = 0.0;
  std::vector<std::vector<int>> zero_classes;   // classes with more than one sample
  std::vector<double> lipschitz;                // identification j -> j+1
  PseudoMetricAxioms axioms;
};

/// Limit of a sequence of sample matrices. Convergence needs tails that
/// decrease (zero tails count as settled) and a last tail within tolerance.
inline PseudoMetric limit_pseudometric(const std::vector<Eigen::MatrixXd>& members, double zeta,
                                       double tail_tolerance) {
  const int m = static_cast<int>(members.size());
  if (m < 3) throw ConfigError("members", "a limit needs at least 3 members");
  for (const auto& x : members)
    if (x.rows() != members[0].rows() || x.cols() != members[0].cols())
      throw ConfigError("samples", "members must share the sample set");
  PseudoMetric p;
  p.d = members.back();
  p.zeta = zeta;
  p.tail_tolerance = tail_tolerance;
  p.deviation.assign(m, std::vector<double>(m, 0.0));
  for (int j = 0; j < m; ++j)
    for (int k = j + 1; k < m; ++k) p.deviation[j][k] = p.deviation[k][j] = uniform_deviation(members[j], members[k]);
  for (int j = 0; j + 1 < m; ++j) {
    double t = 0.0;
    for (int k = j + 1; k < m; ++k) t = std::max(t, p.deviation[j][k]);
    p.tails.push_back(t);
  }
  constexpr double settled = 1e-12;
  p.strictly_decreasing = true;
  bool decreasing = true;
  for (std::size_t j = 1; j < p.tails.size(); ++j) {
    if (!(p.tails[j] < p.tails[j - 1])) p.strictly_decreasing = false;
    if (!(p.tails[j] < p.tails[j - 1] || p.tails[j - 1] <= settled)) decreasing = false;
  }
  p.converged = decreasing && p.tails.back() <= tail_tolerance;
  for (int j = 0; j + 1 < m; ++j) p.lipschitz.push_back(sample_lipschitz(members[j], members[j + 1]));

  const int n = static_cast<int>(p.d.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (p.d(i, j) < zeta) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> cls;
  for (int i = 0; i < n; ++i) cls[find(i)].push_back(i);
  for (auto& [r, v] : cls)
    if (v.size() > 1) p.zero_classes.push_back(v);
  std::sort(p.zero_classes.begin(), p.zero_classes.end());
  p.axioms = check_pseudometric(p.d);
  return p;
}

/// True when all listed samples share one zero class.
inline bool same_zero_class(const PseudoMetric& p, const std::vector<int>& idx) {
  if (idx.size() < 2) return true;
  for (const auto& c : p.zero_classes)
    if (std::all_of(idx.begin(), idx.end(), [&](int i) { return std::find(c.begin(), c.end(), i) != c.end(); }))
      return true;
  return false;
}

// ---------------------------------------------------------------------------
// Surface sequences.

struct SurfaceSequence {
  std::string family;
  std::vector<CatalogSurface> members;
  std::vector<std::string> names;
  SampleSet samples;
  int resolution = 48;
};

struct SequenceRun {
  std::vector<DistanceMatrix> matrices;
  std::vector<double> max_mean;  // analytic max |H| per member
  std::vector<int> num_vertices;
};

inline SurfaceSequence dumbbell_sequence(const std::vector<double>& rhos, int samples, std::uint64_t seed,
                                         int waist_samples = 8, int resolution = 48) {
  SurfaceSequence s;
  s.family = "dumbbell";
  s.resolution = resolution;
  for (double r : rhos) {
    s.members.push_back(CatalogSurface{Dumbbell{r}, AmbientSpace::euclidean(3)});
    DumbbellProfile check(r);
    s.names.push_back(describe(s.members.back()));
  }
  if (s.members.empty()) throw ConfigError("family", "empty sequence");
  s.samples = area_weighted_samples(s.members.front(), samples - waist_samples, seed);
  add_waist_samples(s.samples, waist_samples);
  return s;
}

inline SequenceRun run_sequence(const SurfaceSequence& seq, int threads = 0) {
  SequenceRun r;
  for (const auto& s : seq.members) {
    const auto built = build_surface(s, seq.resolution);
    r.num_vertices.push_back(built.mesh.num_vertices());
    r.max_mean.push_back(analytic_curvature_bounds(s).first);
    r.matrices.push_back(distance_matrix(built.mesh, place_samples(s, built.mesh, seq.samples), 3, threads));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Neck annuli.

struct NeckReport {
  double eps = 0.0;
  double diameter = 0.0;
  double area = 0.0;
  double length0 = 0.0, length1 = 0.0;
  double boundary_hausdorff = 0.0;     // max distance from a boundary point to the other component
  double boundary_gap = 0.0;           // min distance between the components
  double split_perimeter = 0.0;        // L0 + L1 + 2 gap: boundary of the disc cut along a shortest arc
  double stokes_bound = 0.0;           // eps * split perimeter
  double area_bound_5 = 0.0, area_bound_6 = 0.0;  // 5 eps^2 and 6 eps^2
  bool boundary_close_ok = false;      // hausdorff <= 2 eps
  bool split_ok = false;               // split perimeter <= 6 eps
  bool area_ok = false;                // area <= eps * split perimeter
};

/// Diameter, area and the proof's chain of bounds for the annulus between two
/// curves (its boundary components).
inline NeckReport neck_diameter(const AnnulusRegion& a, double eps, double rel_slack = 1e-6) {
  if (!(eps > 0.0)) throw ConfigError("eps", "eps must be positive");
  const TriMesh& m = a.mesh;
  const GeodesicGraph g(m);
  NeckReport r;
  r.eps = eps;
  r.diameter = mesh_diameter(g);
  r.area = surface_area(m);
  const auto& b0 = m.boundary_loops()[a.b0];
  const auto& b1 = m.boundary_loops()[a.b1];
  r.length0 = loop_length(m, b0);
  r.length1 = loop_length(m, b1);
  const auto d0 = g.vertex_distances_from_vertices(b0);
  const auto d1 = g.vertex_distances_from_vertices(b1);
  r.boundary_gap = kInf;
  for (int v : b1) {
    r.boundary_hausdorff = std::max(r.boundary_hausdorff, d0[v]);
    r.boundary_gap = std::min(r.boundary_gap, d0[v]);
  }
  for (int v : b0) r.boundary_hausdorff = std::max(r.boundary_hausdorff, d1[v]);
  r.split_perimeter = r.length0 + r.length1 + 2.0 * r.boundary_gap;
  r.stokes_bound = eps * r.split_perimeter;
  r.area_bound_5 = 5.0 * eps * eps;
  r.area_bound_6 = 6.0 * eps * eps;
  const double s = 1.0 + rel_slack;
  r.boundary_close_ok = r.boundary_hausdorff <= 2.0 * eps * s;
  r.split_ok = r.split_perimeter <= 6.0 * eps * s;
  r.area_ok = r.area <= r.stokes_bound * s;
  return r;
}

struct DumbbellNeck {
  AnnulusRegion region;       // between the two curves
  double modulus = 0.0;       // of the full neck annulus
  double curve_length_lo = 0.0, curve_length_hi = 0.0;
  double suggested_eps = 0.0; // max of the curve lengths
};

/// Region of a dumbbell between the Ahlfors curves of the two halves of the
/// catenoid neck annulus. By symmetry the half-annuli curves are the 1/4 and
/// 3/4 levels of the harmonic function of the whole neck.
inline DumbbellNeck dumbbell_neck_region(const TriMesh& dumbbell, double rho) {
  AnnulusRegion full = neck_annulus(dumbbell, rho * std::acosh(DumbbellProfile::kCollarInner / rho));
  modulus_mesh_annulus(full);
  DumbbellNeck n;
  n.modulus = full.modulus;
  auto longest = [&](double t) {
    double L = 0.0;
    for (const auto& c : level_set(full, t))
      if (c.separating) L = std::max(L, c.length);
    return L;
  };
  n.curve_length_lo = longest(0.25);
  n.curve_length_hi = longest(0.75);
  n.suggested_eps = std::max(n.curve_length_lo, n.curve_length_hi);
  std::vector<int> faces;
  for (int f = 0; f < full.mesh.num_faces(); ++f) {
    bool in = true;
    for (int v : full.mesh.faces()[f]) in = in && full.u[v] >= 0.25 && full.u[v] <= 0.75;
    if (in) faces.push_back(f);
  }
  TriMesh sub = full.mesh.submesh(faces);
  if (sub.boundary_loops().size() != 2) throw TopologyError("region between the neck curves is not an annulus");
  const bool first_low = sub.vertices()[sub.boundary_loops()[0][0]].z() < sub.vertices()[sub.boundary_loops()[1][0]].z();
  n.region = make_annulus(std::move(sub), first_low ? 0 : 1, first_low ? 1 : 0);
  return n;
}

// ---------------------------------------------------------------------------
// Diameter experiment.

struct DiameterMember {
  std::string name;
  double area = 0.0;
  double max_mean = 0.0;
  int genus = 0;
  double diameter = 0.0;
  bool included = true;
  std::string reason;
};

struct DiameterExperiment {
  double H0 = 0.0, A0 = 0.0;
  int genus = 0;
  std::vector<DiameterMember> members;
  double D_obs = 0.0;
  std::optional<double> D_config;
  bool config_ok = true;
  double tail_spread = 0.0;  // (max - min) / max over the last `tail` included members
  bool tail_stable = false;  // tail_spread <= 5%
};

inline DiameterExperiment diameter_experiment(const std::vector<CatalogSurface>& family, double H0, double A0, int genus,
                                              int resolution, std::optional<double> D_config = std::nullopt,
                                              int tail = 3) {
  DiameterExperiment x;
  x.H0 = H0;
  x.A0 = A0;
  x.genus = genus;
  x.D_config = D_config;
  std::vector<double> included;
  for (const auto& s : family) {
    DiameterMember m;
    m.name = describe(s);
    m.area = analytic_area(s);
    m.max_mean = analytic_curvature_bounds(s).first;
    const auto built = build_surface(s, resolution);
    m.genus = built.mesh.genus();
    std::vector<std::string> why;
    if (m.max_mean > H0 * (1.0 + 1e-12)) why.push_back("max |H| exceeds H0");
    if (m.area > A0 * (1.0 + 1e-12)) why.push_back("area exceeds A0");
    if (m.genus != genus) why.push_back("genus differs");
    if (!why.empty()) {
      m.included = false;
      for (std::size_t i = 0; i < why.size(); ++i) m.reason += (i ? "; " : "") + why[i];
    } else {
      m.diameter = mesh_diameter(GeodesicGraph(built.mesh));
      included.push_back(m.diameter);
      x.D_obs = std::max(x.D_obs, m.diameter);
    }
    x.members.push_back(m);
  }
  if (D_config) x.config_ok = x.D_obs <= *D_config;
  if (!included.empty()) {
    const int k = std::min<int>(tail, static_cast<int>(included.size()));
    const auto first = included.end() - k;
    const double hi = *std::max_element(first, included.end()), lo = *std::min_element(first, included.end());
    x.tail_spread = (hi - lo) / hi;
    x.tail_stable = x.tail_spread <= 0.05;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Box-counting dimension.

/// A metric space that can report greedy delta-net sizes.
class MetricCover {
 public:
  virtual ~MetricCover() = default;
  /// Size of a maximal delta-separated set (hence a delta-cover) built by
  /// scanning points in seeded random order; averaged over several orders.
  virtual double net_size(double delta) const = 0;
  /// Scale below which covering counts carry no information.
  virtual double resolution() const = 0;
};

class MatrixCover : public MetricCover {
 public:
  explicit MatrixCover(Eigen::MatrixXd d, std::uint64_t seed = 0, int orders = 16)
      : d_(std::move(d)), seed_(seed), orders_(std::max(1, orders)) {}
  double net_size(double delta) const override {
    const int n = static_cast<int>(d_.rows());
    std::vector<int> order(n);
    std::mt19937_64 rng(seed_);
    double total = 0.0;
    for (int r = 0; r < orders_; ++r) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<int> net;
      for (int v : order)
        if (std::all_of(net.begin(), net.end(), [&](int w) { return d_(v, w) >= delta; })) net.push_back(v);
      total += static_cast<double>(net.size());
    }
    return total / orders_;
  }
  double resolution() const override {
    double r = kInf;
    for (int i = 0; i < d_.rows(); ++i)
      for (int j = i + 1; j < d_.cols(); ++j)
        if (d_(i, j) > 0.0) r = std::min(r, d_(i, j));
    return r;
  }

 private:
  Eigen::MatrixXd d_;
  std::uint64_t seed_;
  int orders_;
};

/// Covers over mesh vertices with the geodesic graph metric.
class MeshCover : public MetricCover {
 public:
  explicit MeshCover(const TriMesh& mesh, std::uint64_t seed = 0, int steiner = 1, int orders = 1)
      : g_(mesh, steiner), mesh_(&mesh), seed_(seed), orders_(std::max(1, orders)) {}
  double net_size(double delta) const override {
    const int n = mesh_->num_vertices();
    std::vector<int> order(n);
    std::mt19937_64 rng(seed_);
    double total = 0.0;
    for (int r = 0; r < orders_; ++r) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<double> D(n, kInf);
      int count = 0;
      for (int v : order) {
        if (D[v] < delta) continue;
        ++count;
        const auto dv = g_.vertex_distances_from_vertices({v}, delta);
        for (int w = 0; w < n; ++w) D[w] = std::min(D[w], dv[w]);
      }
      total += count;
    }
    return total / orders_;
  }
  double resolution() const override { return mesh_->mean_edge_length(); }

 private:
  GeodesicGraph g_;
  const TriMesh* mesh_;
  std::uint64_t seed_;
  int orders_;
};

struct BoxDimension {
  std::vector<double> deltas;
  std::vector<double> counts;
  std::vector<double> excluded;
  std::vector<std::string> warnings;
  double slope = 0.0, intercept = 0.0;
  double exponent = 2.0;
  double capacity = 0.0;  // max over deltas of n(delta) delta^exponent
};

/// Least-squares slope of log n(delta) against log(1/delta).
inline BoxDimension box_dimension(const MetricCover& space, const std::vector<double>& deltas, double exponent = 2.0) {
  if (deltas.size() < 3) throw ConfigError("deltas", "need at least 3 values");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1])) throw ConfigError("deltas", "values must be strictly decreasing");
  BoxDimension b;
  b.exponent = exponent;
  const double res = space.resolution();
  for (double d : deltas) {
    if (!(d > 0.0)) throw ConfigError("deltas", "values must be positive");
    if (d < res) {
      b.excluded.push_back(d);
      b.warnings.push_back("delta " + std::to_string(d) + " below sample resolution " + std::to_string(res));
      continue;
    }
    b.deltas.push_back(d);
    b.counts.push_back(space.net_size(d));
  }
  const int n = static_cast<int>(b.deltas.size());
  if (n < 2) throw ConfigError("deltas", "fewer than 2 values above the sample resolution");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(1.0 / b.deltas[i]), y = std::log(b.counts[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    b.capacity = std::max(b.capacity, b.counts[i] * std::pow(b.deltas[i], exponent));
  }
  b.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  b.intercept = (sy - b.slope * sx) / n;
  return b;
}

}  // namespace bmc
