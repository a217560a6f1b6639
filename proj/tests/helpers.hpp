#pragma once

#include <functional>

#include "ckn/geometry.hpp"

namespace ckn::testing {

// Second fundamental form of the image surface T(boundary) in the metric g,
// evaluated on the velocity of the image curve y(t) = T(c(t)) at t = 0:
//   II_g(ydot, ydot) = -g(nu_g, yddot + Gamma(ydot, ydot)).
// `curve` must trace the preimage boundary with c(0) = x; `tangents` are two
// (d-1 in general) independent preimage tangent vectors at x used to build
// the image normal, and `nu` is the Euclidean outward normal at x.
inline double ii_g_direct_fd(const std::function<Vec(double)>& curve,
                             const Mat& preimage_tangents, const Vec& nu,
                             double alpha, double h = 1e-4) {
  const Vec x0 = curve(0.0);
  const Vec y0 = map_T(x0, alpha);
  const Vec yp = map_T(curve(h), alpha);
  const Vec ym = map_T(curve(-h), alpha);
  const Vec ydot = (yp - ym) / (2.0 * h);
  const Vec yddot = (yp - 2.0 * y0 + ym) / (h * h);

  const Mat dT = dT_jacobian(x0, alpha);
  const int d = (int)x0.size();
  Vec n_e(d);
  if (d == 3) {
    Eigen::Vector3d t1 = dT * preimage_tangents.col(0);
    Eigen::Vector3d t2 = dT * preimage_tangents.col(1);
    n_e = t1.cross(t2);
  } else {
    Vec t1 = dT * preimage_tangents.col(0);
    n_e = Vec(2);
    n_e << t1(1), -t1(0);
  }
  if (n_e.dot(dT * nu) < 0.0) n_e = -n_e;

  const MetricData m = metric_at(y0, alpha);
  Vec nu_g = m.g_inv * n_e;
  nu_g /= std::sqrt(n_e.dot(m.g_inv * n_e));

  const Vec acc = yddot + christoffel_quad(y0, alpha, ydot);
  return -(nu_g.transpose() * m.g * acc)(0);
}

}  // namespace ckn::testing
