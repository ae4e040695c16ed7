#include <gtest/gtest.h>

#include "bmc/builders.hpp"
#include "bmc/conformal.hpp"
#include "bmc/primitives.hpp"

using namespace bmc;

namespace {

// Five-point finite differences on [0,1]^2 minus [1/4,3/4]^2 with u = 0
// outside and 1 on the hole, solved by SOR; returns 1 / Dirichlet energy.
double square_annulus_fd(int n) {
  std::vector<double> u((n + 1) * (n + 1), 0.0);
  std::vector<char> fixed(u.size(), 0);
  auto at = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      if (i == 0 || j == 0 || i == n || j == n) fixed[at(i, j)] = 1;
      if (i >= n / 4 && i <= 3 * n / 4 && j >= n / 4 && j <= 3 * n / 4) {
        fixed[at(i, j)] = 1;
        u[at(i, j)] = 1.0;
      }
    }
  const double omega = 2.0 / (1.0 + std::sin(kPi / n));
  for (int it = 0; it < 20000; ++it) {
    double change = 0.0;
    for (int j = 1; j < n; ++j)
      for (int i = 1; i < n; ++i) {
        const int k = at(i, j);
        if (fixed[k]) continue;
        const double g = 0.25 * (u[k - 1] + u[k + 1] + u[k - n - 1] + u[k + n + 1]);
        const double d = omega * (g - u[k]);
        u[k] += d;
        change = std::max(change, std::abs(d));
      }
    if (change < 1e-13) break;
  }
  double E = 0.0;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      if (i < n) E += std::pow(u[at(i + 1, j)] - u[at(i, j)], 2);
      if (j < n) E += std::pow(u[at(i, j + 1)] - u[at(i, j)], 2);
    }
  return 1.0 / E;
}

}  // namespace

TEST(ClosedForm, Moduli) {
  EXPECT_DOUBLE_EQ(modulus_right_annulus(2.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(modulus_right_annulus(1.0, 1.0), 1.0);
  EXPECT_NEAR(modulus_round_annulus(1.0, std::exp(-2.0 * kPi)), 1.0, 1e-15);
  EXPECT_THROW(modulus_right_annulus(0.0, 1.0), ConfigError);
  EXPECT_THROW(modulus_round_annulus(0.5, 1.0), ConfigError);
}

TEST(MeshModulus, RightAnnulus) {
  auto a = make_annulus(right_annulus_mesh(2.0, 1.0, 32));
  EXPECT_NEAR(modulus_mesh_annulus(a), 2.0, 0.02);
  EXPECT_NEAR(a.area, 2.0, 1e-9);
  EXPECT_EQ(a.clamped, 0);
  EXPECT_GE(a.min_interior_u, 0.0);
  EXPECT_LE(a.max_interior_u, 1.0);
}

TEST(MeshModulus, RoundAnnulus) {
  auto a = make_annulus(round_annulus_mesh(1.0, 0.25, 64));
  const double exact = modulus_round_annulus(1.0, 0.25);
  EXPECT_NEAR(modulus_mesh_annulus(a), exact, 0.01 * exact);
  // Labels only flip u.
  auto b = make_annulus(round_annulus_mesh(1.0, 0.25, 64), 1, 0);
  EXPECT_NEAR(modulus_mesh_annulus(b), a.modulus, 1e-9);
}

TEST(MeshModulus, RoundIncreasesAsHoleShrinks) {
  double prev = 0.0;
  for (double rho : {0.1, 0.01, 0.001}) {
    auto a = make_annulus(round_annulus_mesh(1.0, rho, 48));
    const double m = modulus_mesh_annulus(a);
    EXPECT_GT(m, prev);
    EXPECT_NEAR(m, modulus_round_annulus(1.0, rho), 0.02 * modulus_round_annulus(1.0, rho));
    prev = m;
  }
}

TEST(MeshModulus, SquareAnnulusAgainstFiniteDifferences) {
  const double oracle = square_annulus_fd(128);
  EXPECT_NEAR(oracle, 0.0976, 0.002);
  auto a = make_annulus(square_annulus_mesh(64));
  EXPECT_NEAR(modulus_mesh_annulus(a), oracle, 0.02 * oracle);
}

TEST(Ahlfors, RightAnnulusLength) {
  auto a = make_annulus(right_annulus_mesh(2.0, 1.0, 32));
  modulus_mesh_annulus(a);
  const auto c = ahlfors_curve(a);
  EXPECT_NEAR(c.length, 1.0, 0.01);
  EXPECT_TRUE(c.pass);
  EXPECT_FALSE(c.disconnected);
  EXPECT_NEAR(c.bound, 1.0, 0.02);
}

TEST(Ahlfors, RoundAnnulusHalfLevel) {
  auto a = make_annulus(round_annulus_mesh(1.0, 0.25, 64));
  modulus_mesh_annulus(a);
  const auto c = ahlfors_curve(a);
  // u = 1/2 is the circle of radius sqrt(r rho) = 1/2.
  EXPECT_NEAR(c.half_level_length, kPi, 0.02 * kPi);
  EXPECT_TRUE(c.pass);
  EXPECT_LE(c.length * c.length, c.bound * 1.02);
}

TEST(Ahlfors, DumbbellNeck) {
  const double rho = 0.05;
  const auto built = build_surface(CatalogSurface{Dumbbell{rho}, AmbientSpace::euclidean(3)}, 48);
  auto a = neck_annulus(built.mesh, rho * std::acosh(DumbbellProfile::kCollarInner / rho));
  modulus_mesh_annulus(a);
  const auto c = ahlfors_curve(a);
  EXPECT_TRUE(c.pass);
  EXPECT_LE(c.length * c.length, a.area / a.modulus * 1.02);
  // The shortest curve is near the waist circle of length 2 pi rho.
  EXPECT_NEAR(c.length, 2.0 * kPi * rho, 0.05 * 2.0 * kPi * rho);
}

TEST(Ahlfors, RequiresSolve) {
  auto a = make_annulus(right_annulus_mesh(1.0, 1.0, 12));
  EXPECT_THROW(ahlfors_curve(a), ConfigError);
}

TEST(Topology, RejectsNonAnnulus) {
  EXPECT_THROW(make_annulus(polygon_disc_mesh(1.0, 16)), TopologyError);
  EXPECT_THROW(make_annulus(round_annulus_mesh(1.0, 0.5, 16), 0, 0), ConfigError);
}
