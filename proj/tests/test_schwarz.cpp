#include <gtest/gtest.h>

#include "bmc/builders.hpp"
#include "bmc/schwarz.hpp"

using namespace bmc;
using C = std::complex<double>;

TEST(Eta, Formula) {
  EXPECT_DOUBLE_EQ(schwarz_eta(kInf, 0.0), std::log(2.0) / 4.0);
  EXPECT_DOUBLE_EQ(schwarz_eta(0.2, 0.0), 0.1);
  EXPECT_DOUBLE_EQ(schwarz_eta(kInf, 100.0), kPi / 80.0);
  for (double i0 : {0.05, 0.3, 1.0, kPi})
    for (double K0 : {-1.0, 0.0, 1.0, 9.0}) EXPECT_LE(schwarz_eta(i0, K0), i0 / 2.0);
}

TEST(Deformation, PlaneMatchesClosedForm) {
  // J = r and u = rho^2, so lap u = 4 and K~ = -4 exp(-2 rho^2).
  const auto c = deformation_check(plane_chart(), Vec2::Zero(), 0.0, kInf, 40);
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.u_at_base, 0.0);
  EXPECT_EQ(c.excluded, 0);
  for (std::size_t i = 0; i < c.rho.size(); ++i) {
    EXPECT_NEAR(c.lap_u[i], 4.0, 1e-8);
    EXPECT_NEAR(c.K_tilde[i], -4.0 * std::exp(-2.0 * c.rho[i] * c.rho[i]), 1e-8);
  }
  EXPECT_LE(c.max_K_tilde, -1.0);
  EXPECT_LT(c.max_identity_residual, 1e-10);
}

TEST(Deformation, UnitSphere) {
  const auto [chart, p] = base_chart(parse_surface_spec("round-sphere:r=1"));
  const auto c = deformation_check(chart, p, 1.0, kPi, 60);
  EXPECT_TRUE(c.pass);
  EXPECT_TRUE(c.laplacian_ok);
  EXPECT_EQ(c.u_at_base, 0.0);
  EXPECT_DOUBLE_EQ(c.lambda, std::sqrt(1.5));
  EXPECT_LE(c.eta, kPi / 2.0);
  EXPECT_LT(c.max_identity_residual, 1e-9);
  EXPECT_LE(c.max_K_tilde, -1.0 + c.tolerance);
  // Closed form on the sphere: lap u = lambda^2 (2 + 2 rho cot rho).
  for (std::size_t i = 0; i < c.rho.size(); ++i) {
    const double r = c.rho[i];
    EXPECT_NEAR(c.lap_u[i], 1.5 * (2.0 + 2.0 * r / std::tan(r)), 1e-3);
  }
}

TEST(Deformation, EllipsoidWithKnownBound) {
  const auto [chart, p] = base_chart(parse_surface_spec("ellipsoid:a=1,b=0.8,c=0.6"));
  const auto c = deformation_check(chart, p, 16.0, 1.0, 30);
  EXPECT_TRUE(c.pass);
  EXPECT_LE(c.eta, 0.5);
}

TEST(Deformation, SmallInjectivityRadiusExcludesPoints) {
  const auto c = deformation_check(plane_chart(), Vec2::Zero(), 0.0, 0.1, 20);
  EXPECT_DOUBLE_EQ(c.eta, 0.05);
  EXPECT_EQ(c.excluded, 0);
  EXPECT_THROW(deformation_check(plane_chart(), Vec2::Zero(), 0.0, 1.0, 2), ConfigError);
}

TEST(DerivativeBound, IdentityIsSharp) {
  const auto b = derivative_bound_check({[](C z) { return z; }, poincare_factor}, 1.0);
  EXPECT_TRUE(b.pass);
  EXPECT_NEAR(b.lhs, 1.0, 1e-9);
  EXPECT_DOUBLE_EQ(b.rhs, 1.0);
}

TEST(DerivativeBound, HalfScale) {
  const auto b = derivative_bound_check({[](C z) { return 0.5 * z; }, poincare_factor}, 0.5);
  EXPECT_TRUE(b.pass);
  EXPECT_DOUBLE_EQ(b.rhs, 4.0);
  EXPECT_NEAR(b.lhs, 0.5, 1e-9);
}

TEST(DerivativeBound, DilationFails) {
  const auto b = derivative_bound_check({[](C z) { return 2.0 * z; }, poincare_factor}, 1.0);
  EXPECT_FALSE(b.pass);
  EXPECT_NEAR(b.lhs, 2.0, 1e-9);
}

TEST(DerivativeBound, RotationAndMobius) {
  const C a(0.3, -0.2);
  // Disc automorphism sending 0 to a: isometric for the Poincare metric.
  auto mobius = [a](C z) { return (z + a) / (1.0 + std::conj(a) * z); };
  const auto b = derivative_bound_check({mobius, poincare_factor}, 1.0);
  EXPECT_NEAR(b.lhs, 1.0, 1e-8);
  const auto r = derivative_bound_check({[](C z) { return C(0.0, 1.0) * z; }, poincare_factor}, 1.0);
  EXPECT_NEAR(r.lhs, 1.0, 1e-9);
}

TEST(DerivativeBound, RejectsNonConformal) {
  EXPECT_THROW(derivative_bound_check({[](C z) { return std::conj(z); }, poincare_factor}, 1.0), ConformalityError);
  EXPECT_THROW(derivative_bound_check({[](C z) { return z; }, poincare_factor}, 0.0), ConfigError);
}
