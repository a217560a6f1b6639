#include "ckn/fields.hpp"

#include <cmath>

namespace ckn {

namespace {

constexpr double kD1[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
constexpr double kD2[5] = {-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};

double polar_value(const ScalarField& v, int i, int j) {
  const AxiPolarGrid& g = *v.polar;
  return v.values[g.idx(i, g.reflect_theta(j))];
}

void require_annulus(const ScalarField& v) {
  if (!v.annulus) throw DomainError("field operator: annulus field required");
}

void require_polar(const ScalarField& v) {
  if (!v.polar) throw DomainError("field operator: polar field required");
}

void require_dim(const CknParameters& P, const Vec& x) {
  if (x.size() != P.d) throw DomainError("k_point_cart: x dimension does not match d");
}

// cot(theta) * vt with its symmetry-axis limit vtt (vt vanishes on the axis).
double cot_term(double theta, double vt, double vtt) {
  const double st = std::sin(theta);
  if (std::abs(st) < 1e-12) return vtt;
  return std::cos(theta) / st * vt;
}

}  // namespace

PointValues k_point_polar(const CknParameters& P, double r, double theta,
                          const PolarDerivs& D) {
  if (P.d != 3) throw DomainError("k_point_polar: polar kernel is d = 3 only");
  if (!(r > 0.0)) throw OriginError("k_point_polar: r must be positive");
  const double a2 = sq(P.alpha);
  const double n = P.n;

  PointValues out;
  out.v = D.v;
  out.norm_sq = a2 * sq(D.vr) + sq(D.vt) / sq(r);

  const double ct_vt = cot_term(theta, D.vt, D.vtt);
  const double lap_ang = D.vtt + ct_vt;
  out.Lv = a2 * (D.vrr + (n - 1.0) * D.vr / r) + lap_ang / sq(r);

  const double Hrr = a2 * D.vrr;
  const double Hrt = (P.alpha / r) * (D.vrt - D.vt / r);
  const double Htt = (D.vtt + a2 * r * D.vr) / sq(r);
  const double Hpp = (a2 * r * D.vr + ct_vt) / sq(r);
  out.hess2 = sq(Hrr) + 2.0 * sq(Hrt) + sq(Htt) + sq(Hpp);

  const double deficit = sq(D.vt) / sq(r);
  const double pair = a2 * r * D.vr;
  out.ric = (1.0 - a2) * (P.d - 2.0) / sq(r) * deficit;
  out.h_weight = (n - P.d) * sq(pair) / sq(sq(r)) - a2 * (n - P.d) / sq(r) * deficit;
  out.k = out.hess2 + out.ric + out.h_weight - sq(out.Lv) / n;
  return out;
}

CurvatureTerms curvature_terms(const CknParameters& P, const Vec& x, const Vec& grad_g) {
  require_dim(P, x);
  const double r2 = x.squaredNorm();
  if (!(r2 > 0.0)) throw OriginError("curvature_terms: x must not be the origin");
  const double a2 = sq(P.alpha);
  const double pair = grad_g.dot(x);
  const double deficit = grad_g.squaredNorm() - sq(pair) / r2;
  CurvatureTerms out;
  out.ric = (1.0 - a2) * (P.d - 2.0) / r2 * deficit;
  out.h_weight = (P.n - P.d) * sq(pair) / sq(r2) - a2 * (P.n - P.d) / r2 * deficit;
  return out;
}

PointValues k_point_cart(const CknParameters& P, const Vec& x, const CartDerivs& D) {
  require_dim(P, x);
  const double r = x.norm();
  if (!(r > 0.0)) throw OriginError("k_point_cart: x must not be the origin");
  const double a2 = sq(P.alpha);
  const Vec xh = x / r;
  const double dvr = D.grad.dot(xh);

  PointValues out;
  out.v = D.v;
  const Vec G = D.grad + (a2 - 1.0) * dvr * xh;
  out.norm_sq = D.grad.dot(G);

  const Mat cov = covariant_hessian(x, P.alpha, D.grad, D.hess);
  Mat ginv_cov = cov + (a2 - 1.0) * xh * (xh.transpose() * cov);
  out.hess2 = (ginv_cov * ginv_cov).trace();
  const double pair = G.dot(x);
  out.Lv = ginv_cov.trace() + (P.n - P.d) * pair / sq(r);

  const CurvatureTerms c = curvature_terms(P, x, G);
  out.ric = c.ric;
  out.h_weight = c.h_weight;
  out.k = out.hess2 + out.ric + out.h_weight - sq(out.Lv) / P.n;
  return out;
}

void axisym_to_cartesian(double r, double theta, const PolarDerivs& D,
                         Vec& x, CartDerivs& out) {
  const double st = std::sin(theta), ct = std::cos(theta);
  x = Vec(3);
  x << r * st, 0.0, r * ct;
  Vec rh(3), th(3), ph(3);
  rh << st, 0.0, ct;
  th << ct, 0.0, -st;
  ph << 0.0, 1.0, 0.0;

  out.v = D.v;
  out.grad = D.vr * rh + (D.vt / r) * th;
  const double hrr = D.vrr;
  const double hrt = D.vrt / r - D.vt / sq(r);
  const double htt = D.vtt / sq(r) + D.vr / r;
  const double hpp = D.vr / r + cot_term(theta, D.vt, D.vtt) / sq(r);
  out.hess = hrr * rh * rh.transpose() + htt * th * th.transpose() +
             hpp * ph * ph.transpose() +
             hrt * (rh * th.transpose() + th * rh.transpose());
}

Vec grad_g_from_euclid(const Vec& x, double alpha, const Vec& grad_e) {
  const double r2 = x.squaredNorm();
  if (!(r2 > 0.0)) throw OriginError("grad_g_from_euclid: x must not be the origin");
  return grad_e + (sq(alpha) - 1.0) * (grad_e.dot(x) / r2) * x;
}

double norm_sq_g_from_euclid(const Vec& x, double alpha, const Vec& grad_e) {
  return grad_e.dot(grad_g_from_euclid(x, alpha, grad_e));
}

Mat covariant_hessian(const Vec& x, double alpha, const Vec& grad_e, const Mat& hess_e) {
  const double r = x.norm();
  if (!(r > 0.0)) throw OriginError("covariant_hessian: x must not be the origin");
  const Vec xh = x / r;
  const double dvr = grad_e.dot(xh);
  const double c = (1.0 - sq(alpha)) / r * dvr;
  Mat cov = hess_e;
  cov -= c * (Mat::Identity(x.size(), x.size()) - xh * xh.transpose());
  return cov;
}

double hess_norm_sq_g(const Vec& x, double alpha, const Mat& cov_hess) {
  const double r = x.norm();
  if (!(r > 0.0)) throw OriginError("hess_norm_sq_g: x must not be the origin");
  const Vec xh = x / r;
  const Mat ginv_cov =
      cov_hess + (sq(alpha) - 1.0) * xh * (xh.transpose() * cov_hess);
  return (ginv_cov * ginv_cov).trace();
}

double laplace_g(const Vec& x, double alpha, const Mat& cov_hess) {
  const double r = x.norm();
  if (!(r > 0.0)) throw OriginError("laplace_g: x must not be the origin");
  const Vec xh = x / r;
  return cov_hess.trace() + (sq(alpha) - 1.0) * xh.dot(cov_hess * xh);
}

CartDerivs annulus_derivs(const ScalarField& v, int node) {
  require_annulus(v);
  const AnnulusGrid& g = *v.annulus;
  const int d = g.d;
  CartDerivs out;
  out.v = v.values[node];
  out.grad = Vec::Zero(d);
  out.hess = Mat::Zero(d, d);

  for (int p = 0; p < d; ++p) {
    double g1 = 0.0, g2 = kD2[2] * v.values[node];
    for (int s = -2; s <= 2; ++s) {
      if (s == 0) continue;
      const double val = v.values[g.neighbor(node, p, s)];
      g1 += kD1[s + 2] * val;
      g2 += kD2[s + 2] * val;
    }
    out.grad[p] = g1 / g.h;
    out.hess(p, p) = g2 / sq(g.h);
  }
  for (int p = 0; p < d; ++p) {
    for (int q = p + 1; q < d; ++q) {
      double acc = 0.0;
      std::array<int, 4> off{};
      for (int s = -2; s <= 2; ++s) {
        if (s == 0) continue;
        for (int t = -2; t <= 2; ++t) {
          if (t == 0) continue;
          off.fill(0);
          off[p] = s;
          off[q] = t;
          acc += kD1[s + 2] * kD1[t + 2] * v.values[g.shift(node, off)];
        }
      }
      out.hess(p, q) = out.hess(q, p) = acc / sq(g.h);
    }
  }
  return out;
}

PolarDerivs polar_derivs(const ScalarField& v, int i, int j) {
  require_polar(v);
  const AxiPolarGrid& g = *v.polar;
  if (i < 2 || i > g.nr - 3) {
    throw StencilOutOfRange("polar_derivs: radial stencil leaves the grid");
  }
  PolarDerivs out;
  out.v = v.values[g.idx(i, j)];
  double vr = 0.0, vt = 0.0, vrr = kD2[2] * out.v, vtt = kD2[2] * out.v, vrt = 0.0;
  for (int s = -2; s <= 2; ++s) {
    if (s == 0) continue;
    vr += kD1[s + 2] * v.values[g.idx(i + s, j)];
    vrr += kD2[s + 2] * v.values[g.idx(i + s, j)];
    vt += kD1[s + 2] * polar_value(v, i, j + s);
    vtt += kD2[s + 2] * polar_value(v, i, j + s);
    double row = 0.0;
    for (int t = -2; t <= 2; ++t) {
      if (t == 0) continue;
      row += kD1[t + 2] * polar_value(v, i + s, j + t);
    }
    vrt += kD1[s + 2] * row;
  }
  out.vr = vr / g.hr;
  out.vt = vt / g.ht;
  out.vrr = vrr / sq(g.hr);
  out.vtt = vtt / sq(g.ht);
  out.vrt = vrt / (g.hr * g.ht);
  return out;
}

Vec grad_g_at(const CknParameters& P, const ScalarField& v, int node) {
  require_annulus(v);
  const CartDerivs D = annulus_derivs(v, node);
  return grad_g_from_euclid(v.annulus->position(node), P.alpha, D.grad);
}

double norm_sq_g_at(const CknParameters& P, const ScalarField& v, int node) {
  require_annulus(v);
  const CartDerivs D = annulus_derivs(v, node);
  return norm_sq_g_from_euclid(v.annulus->position(node), P.alpha, D.grad);
}

Mat hessian_g_at(const CknParameters& P, const ScalarField& v, int node) {
  require_annulus(v);
  const CartDerivs D = annulus_derivs(v, node);
  return covariant_hessian(v.annulus->position(node), P.alpha, D.grad, D.hess);
}

double op_L_at(const CknParameters& P, const ScalarField& v, int node) {
  return point_values_at(P, v, node).Lv;
}

PointValues point_values_at(const CknParameters& P, const ScalarField& v, int node) {
  require_annulus(v);
  const CartDerivs D = annulus_derivs(v, node);
  return k_point_cart(P, v.annulus->position(node), D);
}

double op_L_polar_at(const CknParameters& P, const ScalarField& v, int i, int j) {
  return point_values_polar_at(P, v, i, j).Lv;
}

PointValues point_values_polar_at(const CknParameters& P, const ScalarField& v,
                                  int i, int j) {
  require_polar(v);
  const AxiPolarGrid& g = *v.polar;
  const PolarDerivs D = polar_derivs(v, i, j);
  return k_point_polar(P, g.r(i), g.theta(j), D);
}

namespace {

template <typename F>
ScalarField map_field(const CknParameters& P, const ScalarField& v, F&& pick) {
  ScalarField out;
  out.values.assign(v.values.size(), kNaN);
  out.positive = false;
  if (v.annulus) {
    out.annulus = v.annulus;
    for (int node = 0; node < v.annulus->size(); ++node) {
      if (v.annulus->box_inside(node, 2)) {
        out.values[node] = pick(point_values_at(P, v, node));
      }
    }
  } else if (v.polar) {
    out.polar = v.polar;
    const AxiPolarGrid& g = *v.polar;
    for (int i = 2; i <= g.nr - 3; ++i) {
      for (int j = 0; j < g.nt; ++j) {
        out.values[g.idx(i, j)] = pick(point_values_polar_at(P, v, i, j));
      }
    }
  } else {
    throw DomainError("field operator: field has no grid");
  }
  return out;
}

}  // namespace

ScalarField op_L(const CknParameters& P, const ScalarField& v) {
  return map_field(P, v, [](const PointValues& pv) { return pv.Lv; });
}

ScalarField k_functional(const CknParameters& P, const ScalarField& v) {
  return map_field(P, v, [](const PointValues& pv) { return pv.k; });
}

}  // namespace ckn
