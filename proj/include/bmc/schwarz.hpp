#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "bmc/chart.hpp"
#include "bmc/curvature.hpp"
#include "bmc/parallel.hpp"

namespace bmc {

struct SchwarzCheck {
  Vec2 base;
  double K0 = 0.0;
  double i0 = kInf;
  double lambda = 1.0;  // sqrt(K0/2 + 1)
  double eta = 0.0;     // 1/2 min{i0, pi/(4 sqrt K0), log2/2}
  double radius_derivation = std::sqrt(std::log(2.0) / 2.0);
  double radius_statement = std::log(2.0) / 2.0;
  int n_theta = 0, n_r = 0;
  // Grid values, row-major by direction then radius.
  std::vector<double> rho, u, lap_u, K, K_tilde;
  double u_at_base = 0.0;
  double min_K_tilde = kInf, max_K_tilde = -kInf;
  double max_identity_residual = 0.0;  // |K~ exp(2u) + lap u - K|
  double min_laplacian_margin = kInf;  // min of lap rho - sqrt(K0) cot(sqrt(K0) rho)
  bool laplacian_ok = true;
  int excluded = 0;                    // grid points beyond i0 or outside the chart
  double tolerance = 1e-3;
  bool pass = false;
};

/// eta = 1/2 min{i0, pi/(4 sqrt K0), log 2 / 2}, with the middle term dropped when K0 <= 0.
inline double schwarz_eta(double i0, double K0) {
  double m = std::min(i0, std::log(2.0) / 2.0);
  if (K0 > 0.0) m = std::min(m, kPi / (4.0 * std::sqrt(K0)));
  return 0.5 * m;
}

/// Evaluates K~ = (K - lap u) exp(-2u), u = lambda^2 rho^2, on an n x n polar grid
/// (n directions, n radii in (0, eta)) of geodesic polar coordinates at p.
/// The metric dr^2 + J^2 dtheta^2 comes from Jacobi profiles; lap u is a
/// second-order finite difference of the polar Laplacian.
inline SchwarzCheck deformation_check(const Chart& chart, const Vec2& p, double K0, double i0, int n,
                                      double tolerance = 1e-3) {
  if (n < 3) throw ConfigError("grid", "grid must be at least 3");
  SchwarzCheck c;
  c.base = p;
  c.K0 = K0;
  c.i0 = i0;
  c.lambda = std::sqrt(std::max(K0, 0.0) / 2.0 + 1.0);
  c.eta = schwarz_eta(i0, K0);
  c.n_theta = c.n_r = n;
  c.tolerance = tolerance;
  const double lam2 = c.lambda * c.lambda;
  const double h = c.eta / (n + 1);  // rho_j = j h, j = 1..n, all below eta
  const double sk = std::sqrt(std::max(K0, 0.0));
  const std::size_t N = static_cast<std::size_t>(n) * n;
  c.rho.assign(N, 0.0);
  c.u.assign(N, 0.0);
  c.lap_u.assign(N, 0.0);
  c.K.assign(N, 0.0);
  c.K_tilde.assign(N, 0.0);
  std::vector<char> valid(N, 0);
  std::vector<double> lap_rho(N, 0.0);
  // Profile on a refinement of the half-step grid gives J at rho_j and rho_j +- h/2.
  const int sub = std::max(1, static_cast<int>(std::ceil(h / 2.0 / 1e-3 - 1e-9)));
  std::vector<std::vector<double>> J(n), Kp(n), dJ(n);
  parallel_for(n, [&](int t) {
    const double theta = 2.0 * kPi * t / n;
    try {
      const auto jp = jacobi_profile(chart, p, theta, (n + 1) * h, h / 2.0 / sub);
      J[t] = jp.f;
      Kp[t] = jp.K;
      dJ[t] = jp.df;
    } catch (const ChartError&) {
    }
  });
  auto u_of = [&](double r) { return lam2 * r * r; };
  for (int t = 0; t < n; ++t) {
    for (int j = 1; j <= n; ++j) {
      const std::size_t idx = static_cast<std::size_t>(t) * n + (j - 1);
      const double r = j * h;
      c.rho[idx] = r;
      c.u[idx] = u_of(r);
      if (J[t].empty() || r >= i0) {
        ++c.excluded;
        continue;
      }
      const int m = 2 * j * sub;
      const double Jm = J[t][m], Jlo = J[t][m - sub], Jhi = J[t][m + sub];
      // Flux form of (1/J) d/dr (J du/dr); u is radial so the angular term vanishes.
      const double lap = (Jhi * (u_of(r + h) - u_of(r)) - Jlo * (u_of(r) - u_of(r - h))) / (h * h * Jm);
      const double Kv = Kp[t][m];
      c.lap_u[idx] = lap;
      c.K[idx] = Kv;
      c.K_tilde[idx] = (Kv - lap) * std::exp(-2.0 * c.u[idx]);
      lap_rho[idx] = dJ[t][m] / Jm;
      valid[idx] = 1;
    }
  }
  bool ok = true;
  for (std::size_t idx = 0; idx < N; ++idx) {
    if (!valid[idx]) continue;
    const double kt = c.K_tilde[idx];
    c.min_K_tilde = std::min(c.min_K_tilde, kt);
    c.max_K_tilde = std::max(c.max_K_tilde, kt);
    c.max_identity_residual =
        std::max(c.max_identity_residual, std::abs(kt * std::exp(2.0 * c.u[idx]) + c.lap_u[idx] - c.K[idx]));
    const double r = c.rho[idx];
    if (r < c.radius_derivation && kt > -1.0 + tolerance) ok = false;
    const double model = sk > 0.0 ? sk / std::tan(sk * r) : 1.0 / r;
    const double margin = lap_rho[idx] - model;
    c.min_laplacian_margin = std::min(c.min_laplacian_margin, margin);
    if (margin < -1e-8 * (1.0 + std::abs(model)) || model < 0.0) c.laplacian_ok = false;
  }
  c.pass = ok && c.laplacian_ok && c.excluded < static_cast<int>(N);
  return c;
}

// ---------------------------------------------------------------------------
// Derivative bound of the Schwarz lemma.

/// Holomorphic test map on the unit disc into a target with conformal metric
/// sigma(w)^2 |dw|^2.
struct ConformalTestMap {
  std::function<std::complex<double>(std::complex<double>)> f;
  std::function<double(std::complex<double>)> sigma;
};

/// Poincare (curvature -1) metric of the unit disc: 2 / (1 - |w|^2).
inline double poincare_factor(std::complex<double> w) { return 2.0 / (1.0 - std::norm(w)); }

struct DerivativeBound {
  double lhs = 0.0;  // max over frame directions of |df_0(v)|_g / |v|_h
  double rhs = 0.0;  // r^-2
  double angle_distortion = 0.0;
  bool pass = false;
};

/// Checks |df_0(v)|_g <= r^-2 |v|_h for v in {1, i, e^{i pi/4}}, with df_0 by
/// central differences. Maps whose differential is not conformal to 1e-6 are rejected.
inline DerivativeBound derivative_bound_check(const ConformalTestMap& map, double r, double fd_step = 1e-5) {
  if (!(r > 0.0)) throw ConfigError("r", "r must be positive");
  using C = std::complex<double>;
  const C f0 = map.f(C(0.0, 0.0));
  auto df = [&](C v) { return (map.f(fd_step * v) - map.f(-fd_step * v)) / (2.0 * fd_step); };
  const C a = df(C(1.0, 0.0)), b = df(C(0.0, 1.0)), c = df(std::polar(1.0, kPi / 4.0));
  // Conformal at 0 iff df(i) = i df(1); compare relative to |df(1)|.
  const double scale = std::max(std::abs(a), 1e-300);
  DerivativeBound out;
  out.angle_distortion = std::max(std::abs(b - C(0.0, 1.0) * a), std::abs(c - std::polar(1.0, kPi / 4.0) * a)) / scale;
  if (out.angle_distortion > 1e-6) throw ConformalityError("test map is not conformal at 0");
  const double h0 = poincare_factor(C(0.0, 0.0));
  const double s = map.sigma(f0);
  for (C v : {C(1.0, 0.0), C(0.0, 1.0), std::polar(1.0, kPi / 4.0)}) {
    const double ratio = s * std::abs(df(v)) / (h0 * std::abs(v));
    out.lhs = std::max(out.lhs, ratio);
  }
  out.rhs = 1.0 / (r * r);
  out.pass = out.lhs <= out.rhs * (1.0 + 1e-9);
  return out;
}

}  // namespace bmc
