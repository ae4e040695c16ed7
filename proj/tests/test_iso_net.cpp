#include <gtest/gtest.h>

#include "bmc/builders.hpp"
#include "bmc/iso_net.hpp"
#include "bmc/primitives.hpp"

using namespace bmc;

namespace {

BuiltSurface build(const std::string& spec, int res) { return build_surface(parse_surface_spec(spec), res); }

}  // namespace

TEST(Isoperimetric, FlatDiscScaleInvariant) {
  const double oracle = 1.0 / (2.0 * std::sqrt(kPi));
  for (double t : {0.5, 1.0, 2.0}) {
    const auto disc = polygon_disc_mesh(t, 4096);
    const auto rec = isoperimetric_check(disc, 10.0, std::nullopt);
    EXPECT_NEAR(rec.beta_empirical, oracle, 1e-6) << t;
    EXPECT_NEAR(rec.mean_integral, 0.0, 1e-9);
    EXPECT_EQ(rec.branch, "inequality");
    EXPECT_TRUE(rec.pass);
  }
}

TEST(Isoperimetric, Hemisphere) {
  const auto cap = sphere_cap_mesh(1.0, kPi / 2.0, 48);
  const double oracle = std::sqrt(2.0 * kPi) / (6.0 * kPi);
  const auto exact = isoperimetric_check(cap, 10.0, std::nullopt, std::vector<double>(cap.num_vertices(), 2.0));
  EXPECT_NEAR(exact.area, 2.0 * kPi, 0.02 * 2.0 * kPi);
  EXPECT_NEAR(exact.boundary_length, 2.0 * kPi, 1e-9);
  EXPECT_NEAR(exact.beta_empirical, oracle, 0.02 * oracle);
  const auto est = isoperimetric_check(cap, 10.0, std::nullopt);
  EXPECT_NEAR(est.beta_empirical, oracle, 0.02 * oracle);
}

TEST(Isoperimetric, ViolationAndLargeAreaBranch) {
  const auto disc = polygon_disc_mesh(1.0, 64);
  const auto small_beta = isoperimetric_check(disc, 0.1, std::nullopt);
  EXPECT_EQ(small_beta.branch, "violated");
  EXPECT_FALSE(small_beta.pass);
  const auto big = isoperimetric_check(disc, 0.1, 1.0);
  EXPECT_EQ(big.branch, "large-area");
  EXPECT_TRUE(big.pass);
  EXPECT_THROW(isoperimetric_check(disc, 0.0, std::nullopt), ConfigError);
}

TEST(Isoperimetric, V0) {
  EXPECT_NEAR(*isoperimetric_v0(AmbientSpace::flat_torus({1, 1, 1})), 1.0 / (8.0 * kPi), 1e-15);
  EXPECT_DOUBLE_EQ(*isoperimetric_v0(AmbientSpace::round_sphere(3, 1.0)), kPi / 2.0);
  EXPECT_FALSE(isoperimetric_v0(AmbientSpace::euclidean(3)).has_value());
}

TEST(Monotonicity, Constants) {
  const auto torus = AmbientSpace::flat_torus({1, 1, 1});
  const auto m = monotonicity_constants(torus, 2.0, 10.0);
  EXPECT_DOUBLE_EQ(m.c, 0.000625);
  EXPECT_DOUBLE_EQ(m.K0, 1.0);
  // Independent recomputation of each term.
  const double R = kPi / 3.0, sv0 = std::sqrt(1.0 / (8.0 * kPi)), T = 1.0 / (2.0 * 10.0 * 2.0);
  EXPECT_NEAR(m.R, R, 1e-15);
  EXPECT_NEAR(m.sqrt_v0, sv0, 1e-15);
  EXPECT_NEAR(m.T, T, 1e-15);
  EXPECT_DOUBLE_EQ(m.T_literal, 40.0);
  EXPECT_NEAR(m.delta, std::min({R, sv0, T}), 1e-15);

  const auto minimal = monotonicity_constants(torus, 0.0, 10.0);
  EXPECT_TRUE(std::isinf(minimal.T));
  EXPECT_NEAR(minimal.delta, sv0, 1e-15);
  EXPECT_DOUBLE_EQ(monotonicity_constants(torus, 0.0, 0.1).c, 1.0);
  EXPECT_THROW(monotonicity_constants(AmbientSpace::euclidean(3), 1.0, 10.0), UnsupportedError);
}

TEST(Monotonicity, FlatTorusAndSphere) {
  const auto t = build("flat-torus:px=1,py=1", 64);
  GeodesicGraph gt(t.mesh);
  const auto rt = monotonicity_check(gt, locate(t.mesh, Vec3(0.5, 0.5, 0)), 0.1, 0.000625, 0.2);
  EXPECT_NEAR(rt.area, kPi * 0.01, 0.02 * kPi * 0.01);
  EXPECT_TRUE(rt.pass);
  EXPECT_FALSE(rt.out_of_range);

  const auto s = build("round-sphere:r=1", 64);
  GeodesicGraph gs(s.mesh);
  const auto rs = monotonicity_check(gs, vertex_point(s.mesh, 3), 0.3, 0.000625, 0.2);
  EXPECT_NEAR(rs.area, 2.0 * kPi * (1.0 - std::cos(0.3)), 0.02 * 0.2807);
  EXPECT_TRUE(rs.pass);
  EXPECT_TRUE(rs.out_of_range);
}

TEST(Monotonicity, DumbbellNeckAgainstFinerMesh) {
  const auto spec = parse_surface_spec("dumbbell:rho=0.1");
  const auto coarse = build_surface(spec, 48), fine = build_surface(spec, 96);
  const Vec3 neck(0.1, 0.0, 0.0);
  const auto a = monotonicity_check(GeodesicGraph(coarse.mesh), locate(coarse.mesh, neck), 0.05, 0.000625, 0.1);
  const auto b = monotonicity_check(GeodesicGraph(fine.mesh), locate(fine.mesh, neck), 0.05, 0.000625, 0.1);
  EXPECT_TRUE(a.pass);
  EXPECT_TRUE(b.pass);
  EXPECT_NEAR(a.area, b.area, 0.1 * b.area);
}

TEST(Net, FlatTorusHalf) {
  const auto t = build("flat-torus:px=1,py=1", 32);
  GeodesicGraph g(t.mesh);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto net = greedy_net(g, 0.5, seed);
    EXPECT_GE(net.points.size(), 2u);
    EXPECT_LE(net.points.size(), 5u);
    EXPECT_TRUE(net.separated);
    EXPECT_TRUE(net.maximal);
  }
}

TEST(Net, SphereDiameterIsSinglePoint) {
  const auto s = build("round-sphere:r=1", 24);
  const auto net = greedy_net(GeodesicGraph(s.mesh), kPi, 1);
  EXPECT_EQ(net.points.size(), 1u);
  EXPECT_TRUE(net.single_point);
}

TEST(Net, SpherePackingBracket) {
  // delta/2-balls are disjoint and delta-balls cover: area/(pi delta^2) <= N <= area/(pi delta^2 / 4).
  const auto s = build("round-sphere:r=1", 64);
  GeodesicGraph g(s.mesh);
  const auto net = greedy_net(g, 0.2, 7, false);
  const double A = 4.0 * kPi;
  EXPECT_GE(net.points.size(), A / (kPi * 0.04));
  EXPECT_LE(net.points.size(), A / (kPi * 0.01));
  EXPECT_GE(net.min_separation, 0.2);
  EXPECT_LT(net.max_cover_distance, 0.2);
}

TEST(Net, CertificatesExhaustive) {
  const auto s = build("ellipsoid:a=1,b=0.8,c=0.6", 24);
  GeodesicGraph g(s.mesh);
  const auto net = greedy_net(g, 0.3, 4);
  const int n = static_cast<int>(net.points.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) EXPECT_GE(net.pairwise[i][j], 0.3);
  const auto cover = g.vertex_distances_from_vertices(net.points);
  for (double d : cover) EXPECT_LT(d, 0.3);
}

TEST(Net, NonIncreasingInDelta) {
  const auto t = build("flat-torus:px=1,py=1", 32);
  GeodesicGraph g(t.mesh);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (double d : {0.05, 0.1, 0.2, 0.4}) {
    const auto n = greedy_net(g, d, 5, false).points.size();
    EXPECT_LE(n, prev);
    prev = n;
  }
  EXPECT_THROW(greedy_net(g, 0.0, 5), ConfigError);
}

TEST(Cardinality, Examples) {
  const auto genus2 = net_cardinality_bounds(0.1, 1.0, 1.0, 1.0, -2, 0.000625);
  EXPECT_NEAR(genus2.C0, 24.0 * kPi * kPi + 4.0 * kPi, 1e-9);
  EXPECT_NEAR(genus2.upper, 640000.0, 1e-6);
  EXPECT_NEAR(genus2.lower, 1.0 / genus2.C0 / 0.01, 1e-12);
  const auto sphere = net_cardinality_bounds(0.1, 4.0 * kPi, 4.0 * kPi, 0.1, 2, 0.000625);
  EXPECT_LT(sphere.C0, 0.0);
  EXPECT_TRUE(sphere.lower_degenerate);
  EXPECT_EQ(sphere.lower, 0.0);
  EXPECT_THROW(net_cardinality_bounds(0.8, 1.0, 1.0, 1.0, 0, 0.5), HypothesisError);
}

TEST(GaussBonnet, SphereCapClosedForm) {
  const auto s = build("round-sphere:r=1", 48);
  GeodesicGraph g(s.mesh);
  const auto cf = estimate_curvatures(s.mesh);
  const auto scan = gauss_bonnet_ball_scan(g, cf, vertex_point(s.mesh, 0), 0.5, 2.0, 1.0);
  EXPECT_TRUE(scan.applicable);
  EXPECT_TRUE(scan.pass);
  EXPECT_DOUBLE_EQ(scan.delta_prime, 0.5);
  const double oracle = 2.0 * kPi * (1.0 - std::cos(scan.delta_prime));
  EXPECT_NEAR(scan.curvature_integral, oracle, 0.02 * oracle);
  EXPECT_LE(scan.contained_integral, scan.curvature_integral + 1e-12);
}

TEST(GaussBonnet, FlatTorus) {
  const auto t = build("flat-torus:px=1,py=1", 32);
  GeodesicGraph g(t.mesh);
  const auto cf = estimate_curvatures(t.mesh);
  for (double C : {1.0, 2.0, 3.0}) {
    const auto scan = gauss_bonnet_ball_scan(g, cf, vertex_point(t.mesh, 0), 0.2, C, 0.0);
    EXPECT_TRUE(scan.applicable);
    EXPECT_TRUE(scan.pass);
    EXPECT_NEAR(scan.curvature_integral, 0.0, 1e-9);
  }
  const auto na = gauss_bonnet_ball_scan(g, cf, vertex_point(t.mesh, 0), 0.2, 4.0, 0.0);
  EXPECT_FALSE(na.applicable);
}

TEST(GaussBonnet, EllipsoidMatchesDenseScan) {
  const auto spec = parse_surface_spec("ellipsoid:a=1,b=1,c=0.5");
  const auto s = build_surface(spec, 48);
  GeodesicGraph g(s.mesh);
  const auto cf = estimate_curvatures(s.mesh);
  const auto pole = locate(s.mesh, Vec3(0, 0, 0.5));
  // K at the pole is c^2 / a^4 = 0.25, so delta < 1/sqrt(0.75).
  const double area = intrinsic_ball(g, pole, 0.4).area;
  const double C = 0.9 * area / 0.16;
  const auto coarse = gauss_bonnet_ball_scan(g, cf, pole, 0.4, C, 0.25, 50);
  const auto dense = gauss_bonnet_ball_scan(g, cf, pole, 0.4, C, 0.25, 500);
  EXPECT_EQ(coarse.pass, dense.pass);
  EXPECT_TRUE(coarse.pass);
  EXPECT_NEAR(coarse.delta_prime, dense.delta_prime, 0.4 / 50);
  EXPECT_THROW(gauss_bonnet_ball_scan(g, cf, pole, 2.0, C, 0.25), HypothesisError);
}
