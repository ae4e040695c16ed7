#include <gtest/gtest.h>

#include <queue>

#include "bmc/builders.hpp"
#include "bmc/lifting.hpp"
#include "bmc/primitives.hpp"

using namespace bmc;

namespace {

struct Lifted {
  DiscImmersion disc;
  SquareOrder order;
  LiftChart chart;
};

Lifted lift(TriMesh mesh, const ModelSurface& F, double eps, int base, std::optional<double> square = std::nullopt,
            std::uint64_t seed = 0) {
  auto disc = make_disc(std::move(mesh), F, eps, base, seed);
  auto order = order_squares(disc, square);
  auto chart = lift_disc(disc, order);
  return {std::move(disc), std::move(order), std::move(chart)};
}

int top_vertex(const TriMesh& m) {
  int c = 0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.vertices()[v].z() > m.vertices()[c].z()) c = v;
  return c;
}

double sphere_distance(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

TriMesh torus_strip() { return torus_strip_mesh(AmbientSpace::flat_torus({0.15, 1.0, 1.0}), 0.2, 0.02, 0.005); }

// Planar development by accumulating minimum-image edge vectors from `root`.
std::vector<Vec2> develop(const TriMesh& m, int root) {
  std::vector<Vec2> p(m.num_vertices(), Vec2(std::nan(""), 0.0));
  p[root] = Vec2::Zero();
  std::queue<int> q;
  q.push(root);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : m.vertex_neighbors()[v]) {
      if (!std::isnan(p[w].x())) continue;
      const Vec3 d = m.edge_vector(v, w);
      p[w] = p[v] + Vec2(d.x(), d.y());
      q.push(w);
    }
  }
  return p;
}

}  // namespace

TEST(Model, ExpLogRoundTrip) {
  for (const auto& F : {ModelSurface::sphere(1.0), ModelSurface::flat_torus(0.15, 1.0), ModelSurface::plane()}) {
    const Vec3 x = F.kind == ModelSurface::Kind::sphere ? Vec3(0.6, 0.0, 0.8) : Vec3(0.05, 0.3, 0.0);
    for (const Vec2& v : {Vec2(0.01, 0.02), Vec2(-0.05, 0.03), Vec2(0.0, -0.07)}) {
      const Vec3 p = F.exp(x, v);
      EXPECT_LT((F.log(x, p) - v).norm(), 1e-12);
      EXPECT_NEAR(F.distance(x, p), v.norm(), 1e-12);
      const auto n = exp_inverse_newton(F, x, p, v + Vec2(0.004, -0.003));
      EXPECT_TRUE(n.converged);
      EXPECT_LT((n.v - v).norm(), 1e-9);
    }
  }
}

TEST(Disc, RejectsNonDiscAndBadScale) {
  EXPECT_THROW(make_disc(round_annulus_mesh(1.0, 0.5, 16), ModelSurface::plane(), 10.0, 0, 0), TopologyError);
  EXPECT_THROW(make_disc(polygon_disc_mesh(1.0, 16), ModelSurface::plane(), 1.0, 0, 0), HypothesisError);
  EXPECT_THROW(make_disc(polygon_disc_mesh(1.0, 16), ModelSurface::plane(), 10.0, 99, 0), ConfigError);
}

TEST(Order, FlatRoundDiscSingleBasin) {
  const auto m = build_surface(parse_surface_spec("flat-disc:r=0.1"), 16).mesh;
  const auto l = lift(m, ModelSurface::plane(), 0.1 * 2.0 * kPi, 0);
  EXPECT_EQ(l.order.num_basins, 1);
  EXPECT_TRUE(l.order.ok());
  EXPECT_TRUE(l.order.first_contains_J1);
}

TEST(Order, PeanutTwoBasins) {
  const auto l = lift(peanut_disc_mesh(0.1, 0.6, 16), ModelSurface::plane(), 0.9, 0, 0.05);
  EXPECT_EQ(l.order.num_basins, 2);
  ASSERT_FALSE(l.order.squares.empty());
  for (char c : l.order.next_connected) EXPECT_TRUE(c);
  EXPECT_TRUE(l.order.ok());
  for (double b : l.order.pair_path_bound) EXPECT_LE(b, 5.0 * 0.9 * (1.0 + 1e-12));
  for (double b : l.order.max_path_to_boundary) EXPECT_LE(b, 2.0 * 0.9 * (1.0 + 1e-12));
}

TEST(Order, SquaresPartitionTheDisc) {
  const auto l = lift(peanut_disc_mesh(0.1, 0.6, 16), ModelSurface::plane(), 0.9, 0, 0.05);
  std::vector<int> count(l.disc.mesh.num_faces(), 0);
  for (const auto& s : l.order.squares)
    for (int f : s.faces) ++count[f];
  for (int c : count) EXPECT_EQ(c, 1);
}

TEST(Lift, SphereCapFromCentre) {
  const auto mesh = sphere_cap_mesh(1.0, 0.015, 8);
  const int y = top_vertex(mesh);
  const auto l = lift(mesh, ModelSurface::sphere(1.0), 0.1, y, 0.0125);
  const auto r = verify_lift(l.chart, 1e-8);
  EXPECT_TRUE(r.residual_ok);
  EXPECT_TRUE(r.base_ok);
  EXPECT_TRUE(r.radius_ok);
  EXPECT_TRUE(r.anchors_ok);
  EXPECT_LT(r.max_residual, 1e-8);
  EXPECT_TRUE(l.order.ok());
  // Geodesic polar coordinates: |lift(v)| = d(x, v).
  const Vec3 x = mesh.vertices()[y];
  for (int v = 0; v < mesh.num_vertices(); ++v)
    EXPECT_NEAR(l.chart.lift[v].norm(), sphere_distance(x, mesh.vertices()[v]), 1e-9);
}

TEST(Lift, SphereCapFromBoundary) {
  const auto mesh = sphere_cap_mesh(1.0, 0.015, 8);
  const int y = mesh.boundary_loops()[0][0];
  const auto l = lift(mesh, ModelSurface::sphere(1.0), 0.1, y, 0.0125);
  const auto r = verify_lift(l.chart, 1e-8);
  EXPECT_TRUE(r.residual_ok);
  EXPECT_LT(l.chart.lift[y].norm(), 1e-9);
  const Vec3 x = mesh.vertices()[y];
  const int c = top_vertex(mesh);
  EXPECT_NEAR(l.chart.lift[c].norm(), sphere_distance(x, mesh.vertices()[c]), 1e-6);
}

TEST(Lift, TorusStripDevelops) {
  const auto mesh = torus_strip();
  const int y = 0;
  const auto l = lift(mesh, ModelSurface::flat_torus(0.15, 1.0), 0.44, y);
  const auto r = verify_lift(l.chart, 1e-9);
  EXPECT_TRUE(r.residual_ok);
  EXPECT_TRUE(r.base_ok);
  EXPECT_GT(r.coincident_pairs, 0);
  EXPECT_NEAR(r.min_coincident_separation, 0.15, 1e-6);
  EXPECT_TRUE(r.injective_ok);
  const auto dev = develop(l.disc.mesh, y);
  for (int v = 0; v < mesh.num_vertices(); ++v) EXPECT_LT((l.chart.lift[v] - dev[v]).norm(), 1e-9);
}

TEST(Lift, CorruptedChartFailsResidual) {
  const auto mesh = sphere_cap_mesh(1.0, 0.015, 8);
  const int y = top_vertex(mesh);
  auto l = lift(mesh, ModelSurface::sphere(1.0), 0.1, y, 0.0125);
  const int victim = mesh.boundary_loops()[0][3];
  l.chart.lift[victim] = Vec2::Zero();
  const auto r = verify_lift(l.chart, 1e-8);
  EXPECT_TRUE(r.base_ok);
  EXPECT_FALSE(r.residual_ok);
}

TEST(Lift, Deterministic) {
  const auto a = lift(peanut_disc_mesh(0.1, 0.6, 16), ModelSurface::plane(), 0.9, 0, 0.05, 42);
  const auto b = lift(peanut_disc_mesh(0.1, 0.6, 16), ModelSurface::plane(), 0.9, 0, 0.05, 42);
  ASSERT_EQ(a.order.squares.size(), b.order.squares.size());
  for (std::size_t i = 0; i < a.order.squares.size(); ++i) EXPECT_EQ(a.order.squares[i].faces, b.order.squares[i].faces);
  for (std::size_t v = 0; v < a.chart.lift.size(); ++v) EXPECT_EQ(a.chart.lift[v], b.chart.lift[v]);
}
