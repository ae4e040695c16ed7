#include <gtest/gtest.h>

#include "bmc/builders.hpp"
#include "bmc/limits.hpp"
#include "bmc/primitives.hpp"

using namespace bmc;

namespace {

Eigen::MatrixXd matrix_for(const CatalogSurface& s, const std::vector<Vec2>& coords, int res) {
  const auto built = build_surface(s, res);
  SampleSet set;
  set.coords = coords;
  set.labels.assign(coords.size(), "area");
  return distance_matrix(built.mesh, place_samples(s, built.mesh, set)).d;
}

// Metric of n equally spaced points on an interval or a circle of length 1.
Eigen::MatrixXd line_matrix(int n, bool circle, double spacing) {
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = std::abs(i - j);
      d(i, j) = (circle ? std::min(k, n - k) : k) * spacing;
    }
  return d;
}

}  // namespace

TEST(DistanceMatrix, SphereOctant) {
  const auto d = matrix_for(parse_surface_spec("round-sphere:r=1"),
                            {Vec2(kPi / 2, 0.0), Vec2(kPi / 2, kPi / 2), Vec2(0.0, 0.0)}, 64);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (i == j) continue;
      EXPECT_NEAR(d(i, j), kPi / 2, 0.02 * kPi / 2);
    }
}

TEST(DistanceMatrix, FlatTorus) {
  const auto d = matrix_for(parse_surface_spec("flat-torus:px=1,py=1"),
                            {Vec2(0.0, 0.0), Vec2(0.5, 0.0), Vec2(0.0, 0.5)}, 64);
  EXPECT_NEAR(d(0, 1), 0.5, 0.01);
  EXPECT_NEAR(d(0, 2), 0.5, 0.01);
  EXPECT_NEAR(d(1, 2), std::sqrt(0.5), 0.02 * std::sqrt(0.5));
}

TEST(DistanceMatrix, DumbbellAgainstFinerMesh) {
  const auto s = parse_surface_spec("dumbbell:rho=0.1");
  const auto set = area_weighted_samples(s, 10, 4);
  const auto a = matrix_for(s, set.coords, 32), b = matrix_for(s, set.coords, 64);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      if (i == j) continue;
      EXPECT_NEAR(a(i, j), b(i, j), 0.02 * b(i, j));
    }
}

TEST(PseudoMetric, ConstantSequence) {
  const auto s = parse_surface_spec("round-sphere:r=1");
  const auto d = matrix_for(s, area_weighted_samples(s, 12, 2).coords, 32);
  const auto p = limit_pseudometric({d, d, d}, 0.1, 0.05);
  for (double t : p.tails) EXPECT_EQ(t, 0.0);
  EXPECT_TRUE(p.converged);
  EXPECT_EQ(p.d, d);
  EXPECT_TRUE(p.axioms.triangle_ok);
  EXPECT_TRUE(p.axioms.symmetric);
}

TEST(PseudoMetric, AlternatingToriDiverge) {
  const std::vector<Vec2> coords{{0.0, 0.0}, {0.3, 0.0}, {0.0, 0.3}, {0.3, 0.3}};
  const auto a = matrix_for(parse_surface_spec("flat-torus:px=1,py=1"), coords, 24);
  const auto b = matrix_for(parse_surface_spec("flat-torus:px=0.5,py=0.5"), coords, 24);
  const auto p = limit_pseudometric({a, b, a, b, a}, 0.1, 0.01);
  EXPECT_FALSE(p.converged);
  EXPECT_GT(p.tails.back(), 0.05);
}

TEST(PseudoMetric, ZeroClasses) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 0.01, 1, 0.01, 0, 1, 1, 1, 0;
  const auto p = limit_pseudometric({d, d, d}, 0.05, 0.01);
  EXPECT_TRUE(same_zero_class(p, {0, 1}));
  EXPECT_FALSE(same_zero_class(p, {0, 2}));
  EXPECT_THROW(limit_pseudometric({d, d}, 0.05, 0.01), ConfigError);
}

TEST(PseudoMetric, AxiomViolationDetected) {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 5, 1, 0, 1, 5, 1, 0;
  const auto a = check_pseudometric(d);
  EXPECT_FALSE(a.triangle_ok);
  EXPECT_NEAR(a.max_triangle_violation, 3.0, 1e-12);
}

TEST(Neck, FlatCylinder) {
  auto a = make_annulus(right_annulus_mesh(0.1, 0.05, 32));
  const auto r = neck_diameter(a, 0.05);
  EXPECT_NEAR(r.diameter, std::hypot(0.1, 0.025), 0.02 * 0.103);
  EXPECT_NEAR(r.area, 0.005, 1e-9);
  EXPECT_TRUE(r.area_ok);
  EXPECT_LE(r.area, 0.05 * r.split_perimeter);
}

TEST(Neck, DumbbellDiametersDecrease) {
  double prev = kInf;
  for (double rho : {0.2, 0.1, 0.05}) {
    const auto built = build_surface(CatalogSurface{Dumbbell{rho}, AmbientSpace::euclidean(3)}, 48);
    const auto n = dumbbell_neck_region(built.mesh, rho);
    const auto r = neck_diameter(n.region, n.suggested_eps);
    EXPECT_LT(r.diameter, prev);
    prev = r.diameter;
  }
}

TEST(Diameter, SpheresAndInjectedMember) {
  std::vector<CatalogSurface> fam{parse_surface_spec("round-sphere:r=0.5"), parse_surface_spec("round-sphere:r=1")};
  const auto x = diameter_experiment(fam, 4.0, 4.0 * kPi, 0, 32, std::nullopt, 2);
  EXPECT_NEAR(x.D_obs, kPi, 0.02 * kPi);
  EXPECT_TRUE(x.tail_stable == (x.tail_spread <= 0.05));

  fam.push_back(parse_surface_spec("round-sphere:r=2"));
  const auto y = diameter_experiment(fam, 4.0, 4.0 * kPi, 0, 32, std::nullopt, 2);
  ASSERT_EQ(y.members.size(), 3u);
  EXPECT_FALSE(y.members[2].included);
  EXPECT_NE(y.members[2].reason.find("area"), std::string::npos);
  EXPECT_NEAR(y.D_obs, kPi, 0.02 * kPi);
}

TEST(BoxDimension, FlatTorus) {
  const auto built = build_surface(parse_surface_spec("flat-torus:px=1,py=1"), 64);
  const MeshCover cover(built.mesh, 3, 1, 4);
  const auto b = box_dimension(cover, {0.2, 0.1, 0.05});
  EXPECT_NEAR(b.slope, 2.0, 0.15);
  for (std::size_t i = 0; i < b.deltas.size(); ++i) {
    const double nd2 = b.counts[i] * b.deltas[i] * b.deltas[i];
    EXPECT_GE(nd2, 1.0 / kPi);
    EXPECT_LE(nd2, 4.0);
  }
}

TEST(BoxDimension, SegmentControl) {
  const MatrixCover segment(line_matrix(100, false, 0.01), 0, 16);
  const auto b = box_dimension(segment, {0.2, 0.1, 0.05}, 1.0);
  EXPECT_NEAR(b.slope, 1.0, 0.15);
  const MatrixCover circle(line_matrix(2000, true, 1.0 / 2000), 0, 16);
  EXPECT_NEAR(box_dimension(circle, {0.1, 0.05, 0.025, 0.0125}, 1.0).slope, 1.0, 0.05);
}

TEST(BoxDimension, FiniteSetCapacity) {
  // {k/100}: covering counts behave like an interval above the spacing.
  const MatrixCover points(line_matrix(101, false, 0.01), 0, 16);
  const auto b = box_dimension(points, {0.5, 0.2, 0.1, 0.05, 0.02}, 1.0);
  EXPECT_NEAR(b.capacity, 1.0, 0.2);
  EXPECT_THROW(box_dimension(points, {0.1, 0.2, 0.05}), ConfigError);
  EXPECT_THROW(box_dimension(points, {0.2, 0.1}), ConfigError);
}
