#pragma once

// Closed-form flux identity evaluation for the quadratic profile
//   v(x) = c + |x|^2 / (alpha^2 lambda),
// which has grad_g v = 2x/lambda, |grad v|_g^2 = 4r^2/(alpha^2 lambda^2),
// L v = 2n/lambda, and k[v] = 0.  The flux vector collapses to
// X_g = rho(r) x with rho = A v^{1-n} + B v^{-n} r^2 + E v^{-n}, so both
// sides of the divergence identity can be evaluated without any stencil.

#include <array>
#include <cmath>

#include "ckn/params.hpp"

namespace ckn::testing {

struct QuadraticProfile {
  CknParameters params;
  double c;
  double lambda;

  double v(double r) const {
    return c + r * r / (params.alpha * params.alpha * lambda);
  }
  double dv(double r) const { return 2.0 * r / (params.alpha * params.alpha * lambda); }
  double norm_sq_g(double r) const {
    const double al = params.alpha * params.alpha * lambda;
    return 4.0 * r * r / (al * lambda);
  }
  double Lv() const { return 2.0 * params.n / lambda; }
};

// Returns {lhs, rhs, scale} of the weighted divergence identity at radius r;
// the scale sums the magnitudes of the assembled terms so that profiles whose
// sides cancel identically (the PDE's own quadratic solution) still normalize.
inline std::array<double, 3> quadratic_identity_sides(const QuadraticProfile& q, double r) {
  const double n = q.params.n;
  const double a2 = q.params.alpha * q.params.alpha;
  const double lam = q.lambda;
  const double v = q.v(r);
  const double vp = q.dv(r);
  const double A = 4.0 * (n - 1.0) / (lam * lam);
  const double B = 4.0 * (1.0 - n) / (a2 * lam * lam * lam);
  const double E = 4.0 * (1.0 - n) / (n * (n - 2.0) * lam);

  const double vm = std::pow(v, -n);
  const double v1 = vm * v;  // v^{1-n}
  const double rho = A * v1 + B * vm * r * r + E * vm;
  const double drho = A * (1.0 - n) * vm * vp +
                      B * (-n * vm / v * vp * r * r + 2.0 * r * vm) +
                      E * (-n) * vm / v * vp;
  const double lhs = n * rho + r * drho;

  const double P = q.norm_sq_g(r);
  const double Lv = q.Lv();
  const double Lw = (1.0 - n) * vm * Lv + n * (n - 1.0) * vm / v * P;
  const double pref = -(v / n) * (Lv - 0.5 * n * P / v - 2.0 / ((n - 2.0) * v));
  const double rhs = pref * Lw;  // k[v] = 0 for the quadratic profile

  const double scale =
      n * (std::abs(A) * v1 + std::abs(B) * vm * r * r + std::abs(E) * vm) +
      r * (std::abs(A * (n - 1.0) * vm * vp) +
           std::abs(B) * (n * vm / v * vp * r * r + 2.0 * r * vm) +
           std::abs(E) * n * vm / v * vp) +
      (v / n) * (std::abs(Lv) + 0.5 * n * P / v + 2.0 / ((n - 2.0) * v)) * std::abs(Lw);
  return {lhs, rhs, scale};
}

// Max relative residual of the identity over a radial sample of the annulus.
inline double quadratic_identity_residual(const QuadraticProfile& q, double r_min,
                                          double r_max, int samples = 64) {
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double r = r_min + (r_max - r_min) * i / (samples - 1.0);
    const auto [lhs, rhs, scale] = quadratic_identity_sides(q, r);
    worst = std::max(worst, std::abs(lhs - rhs) / (scale + 1e-30));
  }
  return worst;
}

}  // namespace ckn::testing
