#include "ckn/identities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "json.hpp"

#include "ckn/common.hpp"

namespace ckn {

namespace {

double sphere_area(int d) {
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

double trap_weight(int i, int lo, int hi) { return (i == lo || i == hi) ? 0.5 : 1.0; }

// Second-order centered jet (reach 1). The caller guarantees box_inside(node, 1).
CartDerivs jet2_at(const ScalarField& f, int node) {
  const AnnulusGrid& g = *f.annulus;
  const int d = g.d;
  const double h = g.h;
  CartDerivs J;
  J.v = f.values[node];
  J.grad = Vec::Zero(d);
  J.hess = Mat::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    const int np = g.neighbor(node, k, +1);
    const int nm = g.neighbor(node, k, -1);
    if (np < 0 || nm < 0) throw StencilOutOfRange("jet2_at: missing neighbor");
    J.grad[k] = (f.values[np] - f.values[nm]) / (2.0 * h);
    J.hess(k, k) = (f.values[np] - 2.0 * J.v + f.values[nm]) / (h * h);
  }
  for (int k = 0; k < d; ++k) {
    for (int l = k + 1; l < d; ++l) {
      std::array<int, 4> o{};
      o[k] = 1;
      o[l] = 1;
      const int pp = g.shift(node, o);
      o[l] = -1;
      const int pm = g.shift(node, o);
      o[k] = -1;
      const int mm = g.shift(node, o);
      o[l] = 1;
      const int mp = g.shift(node, o);
      if (pp < 0 || pm < 0 || mp < 0 || mm < 0)
        throw StencilOutOfRange("jet2_at: missing corner");
      const double cross =
          (f.values[pp] - f.values[pm] - f.values[mp] + f.values[mm]) / (4.0 * h * h);
      J.hess(k, l) = cross;
      J.hess(l, k) = cross;
    }
  }
  return J;
}

void require_positive(const ScalarField& v, const char* who) {
  for (double x : v.values)
    if (!(x > 0.0)) throw PositivityError(std::string(who) + ": field is not positive");
}

// Assembled second-order flux machinery on an annulus field. P is valid at
// interior(1), the weighted flux W = |x|^{n-d} X_g at interior(2).
struct FluxAssembly {
  const AnnulusGrid* grid = nullptr;
  std::vector<double> P;
  std::array<std::vector<double>, 4> W;

  static FluxAssembly build(const CknParameters& par, const ScalarField& v) {
    FluxAssembly A;
    const AnnulusGrid& g = *v.annulus;
    A.grid = &g;
    const int N = g.size();
    const int d = g.d;
    const double n = par.n;
    const double alpha = par.alpha;
    const double h = g.h;
    A.P.assign(N, kNaN);
    for (int k = 0; k < d; ++k) A.W[k].assign(N, kNaN);

    for (int node = 0; node < N; ++node) {
      if (!g.box_inside(node, 1)) continue;
      const CartDerivs J = jet2_at(v, node);
      const Vec x = g.position(node);
      A.P[node] = norm_sq_g_from_euclid(x, alpha, J.grad);
    }
    for (int node = 0; node < N; ++node) {
      if (!g.box_inside(node, 2)) continue;
      const CartDerivs J = jet2_at(v, node);
      const Vec x = g.position(node);
      const PointValues pv = k_point_cart(par, x, J);
      const Vec gg = grad_g_from_euclid(x, alpha, J.grad);
      Vec gradP(d);
      for (int k = 0; k < d; ++k) {
        const int np = g.neighbor(node, k, +1);
        const int nm = g.neighbor(node, k, -1);
        gradP[k] = (A.P[np] - A.P[nm]) / (2.0 * h);
      }
      const double r2 = x.squaredNorm();
      const double xdot = x.dot(gradP);
      const Vec gradP_g = gradP + (alpha * alpha - 1.0) * (xdot / r2) * x;
      const double w = std::pow(pv.v, 1.0 - n);
      const double wm = std::pow(pv.v, -n);
      const double S = w * pv.Lv + 0.5 * (1.0 - n) * wm * pv.norm_sq +
                       2.0 * (1.0 - n) / (n * (n - 2.0)) * wm;
      const double rw = std::pow(std::sqrt(r2), n - d);
      for (int k = 0; k < d; ++k)
        A.W[k][node] = rw * (S * gg[k] - 0.5 * w * gradP_g[k]);
    }
    return A;
  }
};

// RHS of the differential identity at a node (second-order jet).
double rhs_identity_at(const CknParameters& par, const ScalarField& v, int node) {
  const AnnulusGrid& g = *v.annulus;
  const double n = par.n;
  const CartDerivs J = jet2_at(v, node);
  const Vec x = g.position(node);
  const PointValues pv = k_point_cart(par, x, J);
  const double w = std::pow(pv.v, 1.0 - n);
  const double wm = std::pow(pv.v, -n);
  const double Lw = (1.0 - n) * wm * pv.Lv + n * (n - 1.0) * wm / pv.v * pv.norm_sq;
  const double pref = -(pv.v / n) *
                      (pv.Lv - 0.5 * n * pv.norm_sq / pv.v - 2.0 / ((n - 2.0) * pv.v));
  return pref * Lw - w * pv.k;
}

// LHS |x|^{d-n} div(|x|^{n-d} X_g) at a node from the assembled flux.
double lhs_divergence_at(const CknParameters& par, const FluxAssembly& A, int node) {
  const AnnulusGrid& g = *A.grid;
  const int d = g.d;
  const double h = g.h;
  double div = 0.0;
  for (int k = 0; k < d; ++k) {
    const int np = g.neighbor(node, k, +1);
    const int nm = g.neighbor(node, k, -1);
    div += (A.W[k][np] - A.W[k][nm]) / (2.0 * h);
  }
  const double r = g.radius(node);
  return std::pow(r, static_cast<double>(d) - par.n) * div;
}

struct GridResiduals {
  std::vector<double> res;  // NaN where not evaluated
  double scale = 0.0;
};

GridResiduals lemma22_residual_field(const CknParameters& par, const ScalarField& v) {
  const AnnulusGrid& g = *v.annulus;
  const FluxAssembly A = FluxAssembly::build(par, v);
  GridResiduals out;
  out.res.assign(g.size(), kNaN);
  for (int node = 0; node < g.size(); ++node) {
    if (!g.box_inside(node, 3)) continue;
    const double lhs = lhs_divergence_at(par, A, node);
    const double rhs = rhs_identity_at(par, v, node);
    out.res[node] = lhs - rhs;
    out.scale = std::max(out.scale, std::abs(lhs) + std::abs(rhs));
  }
  return out;
}

double fit_order(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return kNaN;
  return std::log2(coarse / fine);
}

nlohmann::json jnum(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

}  // namespace

double Bump::value(const Vec& x) const {
  const double dist = (x - center).norm();
  const double s = dist / radius;
  if (s >= 1.0) return 0.0;
  return amplitude * std::exp(-1.0 / (1.0 - s * s));
}

Vec Bump::grad(const Vec& x) const {
  const Vec dx = x - center;
  const double dist = dx.norm();
  const double s = dist / radius;
  Vec gz = Vec::Zero(x.size());
  if (s >= 1.0 || dist == 0.0) return gz;
  const double val = amplitude * std::exp(-1.0 / (1.0 - s * s));
  if (val == 0.0) return gz;
  const double om = 1.0 - s * s;
  return val * (-2.0 * s / (om * om)) / (dist * radius) * dx;
}

NodeResiduals lemma22_residuals(const CknParameters& P, const ScalarField& v) {
  if (v.annulus == nullptr) throw DomainError("lemma22_residuals: annulus field required");
  require_positive(v, "lemma22_residuals");
  const GridResiduals gr = lemma22_residual_field(P, v);
  NodeResiduals out;
  out.scale = gr.scale;
  double sumsq = 0.0;
  const double hd = std::pow(v.annulus->h, v.annulus->d);
  for (double r : gr.res) {
    if (std::isnan(r)) continue;
    out.max_abs = std::max(out.max_abs, std::abs(r));
    sumsq += r * r * hd;
    ++out.nodes;
  }
  out.l2 = std::sqrt(sumsq);
  return out;
}

IdentityReport verify_lemma22(const CknParameters& P, const CartSampler& v,
                              const AnnulusSpec& spec) {
  const AnnulusGrid coarse = AnnulusGrid::make(spec.d, spec.r_min, spec.r_max, spec.h);
  const AnnulusGrid fine = AnnulusGrid::make(spec.d, spec.r_min, spec.r_max, 0.5 * spec.h);
  const ScalarField vc = sample_annulus(coarse, v, false);
  const ScalarField vf = sample_annulus(fine, v, false);
  require_positive(vc, "verify_lemma22");
  require_positive(vf, "verify_lemma22");
  const GridResiduals rc = lemma22_residual_field(P, vc);
  const GridResiduals rf = lemma22_residual_field(P, vf);

  IdentityReport rep;
  rep.grid_h = fine.h;
  rep.scale = std::max(rc.scale, rf.scale);
  const double hdc = std::pow(coarse.h, coarse.d);
  const double hdf = std::pow(fine.h, fine.d);
  double sc = 0.0, sf = 0.0;
  for (int node = 0; node < coarse.size(); ++node) {
    if (std::isnan(rc.res[node])) continue;
    std::array<int, 4> c = coarse.coords[node];
    for (int& ci : c) ci *= 2;
    const int fnode = fine.find(c);
    if (fnode < 0 || std::isnan(rf.res[fnode])) continue;
    ++rep.matched_points;
    rep.coarse_max_residual = std::max(rep.coarse_max_residual, std::abs(rc.res[node]));
    rep.max_residual = std::max(rep.max_residual, std::abs(rf.res[fnode]));
    sc += rc.res[node] * rc.res[node] * hdc;
    sf += rf.res[fnode] * rf.res[fnode] * hdf;
  }
  rep.coarse_l2_residual = std::sqrt(sc);
  rep.l2_residual = std::sqrt(sf);
  rep.convergence_order = fit_order(rep.coarse_max_residual, rep.max_residual);
  rep.tolerance = 1e-10 * rep.scale + 1e-300;
  rep.at_rounding =
      rep.coarse_max_residual <= rep.tolerance && rep.max_residual <= rep.tolerance;
  rep.verdict = rep.at_rounding ||
                (rep.max_residual < rep.coarse_max_residual && rep.convergence_order >= 1.5);
  return rep;
}

WeakFormSides lemma23_sides(const CknParameters& P, const ScalarField& v,
                            const Bump& phi) {
  if (v.annulus == nullptr) throw DomainError("lemma23_sides: annulus field required");
  require_positive(v, "lemma23_sides");
  const AnnulusGrid& g = *v.annulus;
  const int d = g.d;
  for (int node = 0; node < g.size(); ++node) {
    if (g.box_inside(node, 3)) continue;
    if (phi.value(g.position(node)) != 0.0)
      throw SupportError("lemma23_sides: test function touches the annulus boundary");
  }
  const FluxAssembly A = FluxAssembly::build(P, v);
  const double hd = std::pow(g.h, d);
  WeakFormSides out;
  for (int node = 0; node < g.size(); ++node) {
    const Vec x = g.position(node);
    if (g.box_inside(node, 1)) {
      const double ph = phi.value(x);
      if (ph != 0.0) {
        const double rw = std::pow(g.radius(node), P.n - d);
        const double summand = rw * rhs_identity_at(P, v, node) * ph * hd;
        out.bulk += summand;
        out.scale += std::abs(summand);
      }
    }
    if (g.box_inside(node, 2)) {
      const Vec gp = phi.grad(x);
      if (gp.squaredNorm() > 0.0) {
        double dot = 0.0;
        for (int k = 0; k < d; ++k) dot += A.W[k][node] * gp[k];
        out.flux -= dot * hd;
        out.scale += std::abs(dot) * hd;
      }
    }
  }
  return out;
}

IdentityReport verify_lemma23(const CknParameters& P, const CartSampler& v,
                              const Bump& phi, const AnnulusSpec& spec) {
  const AnnulusGrid coarse = AnnulusGrid::make(spec.d, spec.r_min, spec.r_max, spec.h);
  const AnnulusGrid fine = AnnulusGrid::make(spec.d, spec.r_min, spec.r_max, 0.5 * spec.h);
  const ScalarField vc = sample_annulus(coarse, v, false);
  const ScalarField vf = sample_annulus(fine, v, false);
  require_positive(vc, "verify_lemma23");
  require_positive(vf, "verify_lemma23");
  const WeakFormSides sc = lemma23_sides(P, vc, phi);
  const WeakFormSides sf = lemma23_sides(P, vf, phi);

  IdentityReport rep;
  rep.grid_h = fine.h;
  rep.matched_points = 1;
  rep.coarse_max_residual = std::abs(sc.bulk - sc.flux);
  rep.max_residual = std::abs(sf.bulk - sf.flux);
  rep.coarse_l2_residual = rep.coarse_max_residual;
  rep.l2_residual = rep.max_residual;
  rep.scale = std::max(sc.scale, sf.scale);
  rep.convergence_order = fit_order(rep.coarse_max_residual, rep.max_residual);
  rep.tolerance = 1e-10 * rep.scale + 1e-300;
  rep.at_rounding =
      rep.coarse_max_residual <= rep.tolerance && rep.max_residual <= rep.tolerance;
  rep.verdict = rep.at_rounding ||
                (rep.max_residual < rep.coarse_max_residual && rep.convergence_order >= 1.5);
  return rep;
}

NodeResiduals boundary_split_residuals(const CknParameters& P, const ScalarField& v,
                                       int ring) {
  if (v.polar == nullptr) throw DomainError("boundary_split_residuals: polar field required");
  if (P.d != 3) throw DomainError("boundary_split_residuals: d = 3 polar machinery");
  const AxiPolarGrid& g = *v.polar;
  if (ring < 4 || ring > g.nr - 5)
    throw StencilOutOfRange("boundary_split_residuals: ring too close to the radial edge");
  const double alpha = P.alpha;
  const double a2 = alpha * alpha;
  const double r = g.r(ring);

  NodeResiduals out;
  double sumsq = 0.0;
  for (int j = 0; j < g.nt; ++j) {
    double Pband[5];
    for (int m = -2; m <= 2; ++m) {
      const PolarDerivs D = polar_derivs(v, ring + m, j);
      const double rm = g.r(ring + m);
      Pband[m + 2] = a2 * D.vr * D.vr + D.vt * D.vt / (rm * rm);
    }
    const double dPdr =
        (Pband[0] - 8.0 * Pband[1] + 8.0 * Pband[3] - Pband[4]) / (12.0 * g.hr);
    const PolarDerivs D = polar_derivs(v, ring, j);
    const double A = 0.5 * alpha * dPdr - a2 * D.vrr * alpha * D.vr;
    const double B = alpha * D.vrt * D.vt / (r * r) - alpha * D.vt * D.vt / (r * r * r);
    const double res = A - B;
    out.max_abs = std::max(out.max_abs, std::abs(res));
    out.scale = std::max(out.scale, 0.5 * alpha * std::abs(dPdr) +
                                        a2 * alpha * std::abs(D.vrr * D.vr) +
                                        alpha * std::abs(D.vrt * D.vt) / (r * r) +
                                        alpha * D.vt * D.vt / (r * r * r));
    const double w = 2.0 * M_PI * r * r * std::sin(g.theta(j)) * g.ht *
                     trap_weight(j, 0, g.nt - 1);
    sumsq += w * res * res;
    ++out.nodes;
  }
  out.l2 = std::sqrt(sumsq);
  return out;
}

IdentityReport verify_boundary_split(const CknParameters& P, const PolarSampler& v,
                                     double R, int nr, int nt) {
  if (nr < 9 || nr % 2 == 0)
    throw StencilOutOfRange("verify_boundary_split: nr must be odd and >= 9");
  if (nt < 5) throw StencilOutOfRange("verify_boundary_split: nt must be >= 5");
  const AxiPolarGrid gc = AxiPolarGrid::make(0.8 * R, 1.2 * R, nr, nt);
  const AxiPolarGrid gf = AxiPolarGrid::make(0.8 * R, 1.2 * R, 2 * nr - 1, 2 * nt - 1);
  const ScalarField vc = sample_polar(gc, v, false);
  const ScalarField vf = sample_polar(gf, v, false);
  const int ic = (nr - 1) / 2;
  const int iff = nr - 1;

  // Matched-theta comparison: coarse node j sits at fine node 2j.
  const double alpha = P.alpha;
  const double a2 = alpha * alpha;
  IdentityReport rep;
  rep.grid_h = gf.hr;
  auto ring_residual = [&](const ScalarField& field, const AxiPolarGrid& g, int ring,
                           int j) {
    double Pband[5];
    for (int m = -2; m <= 2; ++m) {
      const PolarDerivs D = polar_derivs(field, ring + m, j);
      const double rm = g.r(ring + m);
      Pband[m + 2] = a2 * D.vr * D.vr + D.vt * D.vt / (rm * rm);
    }
    const double dPdr =
        (Pband[0] - 8.0 * Pband[1] + 8.0 * Pband[3] - Pband[4]) / (12.0 * g.hr);
    const PolarDerivs D = polar_derivs(field, ring, j);
    const double r = g.r(ring);
    const double A = 0.5 * alpha * dPdr - a2 * D.vrr * alpha * D.vr;
    const double B = alpha * D.vrt * D.vt / (r * r) - alpha * D.vt * D.vt / (r * r * r);
    rep.scale = std::max(rep.scale, 0.5 * alpha * std::abs(dPdr) +
                                        a2 * alpha * std::abs(D.vrr * D.vr) +
                                        alpha * std::abs(D.vrt * D.vt) / (r * r) +
                                        alpha * D.vt * D.vt / (r * r * r));
    return A - B;
  };
  double sc = 0.0, sf = 0.0;
  for (int j = 0; j < nt; ++j) {
    const double resc = ring_residual(vc, gc, ic, j);
    const double resf = ring_residual(vf, gf, iff, 2 * j);
    ++rep.matched_points;
    rep.coarse_max_residual = std::max(rep.coarse_max_residual, std::abs(resc));
    rep.max_residual = std::max(rep.max_residual, std::abs(resf));
    const double w = 2.0 * M_PI * R * R * std::sin(gc.theta(j)) * gc.ht *
                     trap_weight(j, 0, nt - 1);
    sc += w * resc * resc;
    sf += w * resf * resf;
  }
  rep.coarse_l2_residual = std::sqrt(sc);
  rep.l2_residual = std::sqrt(sf);
  rep.convergence_order = fit_order(rep.coarse_max_residual, rep.max_residual);
  rep.tolerance = 1e-10 * rep.scale + 1e-300;
  rep.at_rounding =
      rep.coarse_max_residual <= rep.tolerance && rep.max_residual <= rep.tolerance;
  rep.verdict = rep.at_rounding ||
                (rep.max_residual < rep.coarse_max_residual && rep.convergence_order >= 1.5);
  return rep;
}

DecompositionReport verify_decomposition(const CknParameters& P, const ScalarField& v) {
  if (v.polar == nullptr) throw DomainError("verify_decomposition: polar field required");
  if (P.d != 3) throw DomainError("verify_decomposition: d = 3 polar machinery");
  if (P.alpha > P.alpha_fs + 1e-12)
    throw RegimeError("verify_decomposition: alpha exceeds alpha_FS");
  require_positive(v, "verify_decomposition");
  const AxiPolarGrid& g = *v.polar;
  if (g.nr < 8) throw StencilOutOfRange("verify_decomposition: nr too small");
  const double n = P.n;
  const double a2 = P.alpha * P.alpha;
  const int ilo = 2, ihi = g.nr - 3;

  double lhs = 0.0, I1 = 0.0, I2w = 0.0, I2u = 0.0, I3 = 0.0;
  for (int i = ilo; i <= ihi; ++i) {
    const double r = g.r(i);
    const double wr = g.hr * trap_weight(i, ilo, ihi);
    for (int j = 0; j < g.nt; ++j) {
      const double th = g.theta(j);
      const double sinth = std::sin(th);
      const double w = wr * g.ht * trap_weight(j, 0, g.nt - 1) * 2.0 * M_PI * r * r * sinth;
      if (w == 0.0) continue;
      const PolarDerivs D = polar_derivs(v, i, j);
      const PointValues pv = k_point_polar(P, r, th, D);
      const bool pole = (j == 0 || j == g.nt - 1);
      const double lap_ang = pole ? 2.0 * D.vtt : D.vtt + (std::cos(th) / sinth) * D.vt;
      const double br1 = sq(D.vrr - D.vr / r - lap_ang / (a2 * (n - 1.0) * r * r));
      const double t2 = sq(D.vrt - D.vt / r) / (r * r);
      const double t3 = sq(D.vt) / (r * r * r * r);
      const double Wgt = std::pow(r, n - 3.0) * std::pow(D.v, 1.0 - n);
      lhs += w * Wgt * pv.k;
      I1 += w * Wgt * br1;
      I2w += w * Wgt * t2;
      I2u += w * t2;
      I3 += w * Wgt * t3;
    }
  }
  DecompositionReport rep;
  rep.lhs = lhs;
  rep.term_bracket = a2 * a2 * (1.0 - 1.0 / n) * I1;
  const double printed_bracket = a2 * (1.0 - 1.0 / n) * I1;
  rep.term_middle_weighted = 2.0 * a2 * I2w;
  rep.term_middle_unweighted = 2.0 * a2 * I2u;
  rep.term_angular = (n - 2.0) * ((P.d - 1.0) / (n - 1.0) - a2) * I3;
  rep.term_angular_pointwise = ((P.d - 2.0) - a2 * (n - 2.0)) * I3;
  rep.slack = lhs - (rep.term_bracket + rep.term_middle_weighted + rep.term_angular);
  rep.slack_printed_bracket =
      lhs - (printed_bracket + rep.term_middle_weighted + rep.term_angular);
  rep.slack_unweighted_middle =
      lhs - (rep.term_bracket + rep.term_middle_unweighted + rep.term_angular);
  rep.slack_pointwise_third =
      lhs - (rep.term_bracket + rep.term_middle_weighted + rep.term_angular_pointwise);
  rep.scale = std::abs(lhs) + rep.term_bracket + rep.term_middle_weighted +
              std::abs(rep.term_angular);
  rep.tolerance = 1e-10 * rep.scale + 1e-250;
  rep.weighted_middle_holds = rep.slack >= -rep.tolerance;
  rep.unweighted_middle_holds = rep.slack_unweighted_middle >= -rep.tolerance;
  rep.verdict = rep.weighted_middle_holds;
  return rep;
}

InequalityReport pointwise_k_bound(const CknParameters& P, const ScalarField& v) {
  const RegimeReport regime = classify_regime(P);
  if (!regime.strong)
    throw RegimeError("pointwise_k_bound: requires alpha < sqrt((d-2)/(n-2))");
  const double c3 = (P.d - 2.0) - P.alpha * P.alpha * (P.n - 2.0);

  InequalityReport rep;
  rep.min_slack = kInf;
  if (v.annulus != nullptr) {
    const AnnulusGrid& g = *v.annulus;
    for (int node = 0; node < g.size(); ++node) {
      if (!g.box_inside(node, 2)) continue;
      const PointValues pv = point_values_at(P, v, node);
      const Vec gg = grad_g_at(P, v, node);
      const Vec x = g.position(node);
      const double r = g.radius(node);
      const double deficit = gg.squaredNorm() - sq(gg.dot(x) / r);
      const double bound = c3 * deficit / (r * r);
      const double slack = pv.k - bound;
      ++rep.nodes;
      rep.scale = std::max(rep.scale, pv.hess2 + sq(pv.Lv) / P.n + std::abs(pv.ric) +
                                          std::abs(pv.h_weight) + std::abs(bound));
      if (slack < rep.min_slack) {
        rep.min_slack = slack;
        rep.argmin_node = node;
        rep.argmin_radius = r;
      }
    }
  } else if (v.polar != nullptr) {
    if (P.d != 3) throw DomainError("pointwise_k_bound: polar fields need d = 3");
    const AxiPolarGrid& g = *v.polar;
    for (int i = 2; i <= g.nr - 3; ++i) {
      const double r = g.r(i);
      for (int j = 0; j < g.nt; ++j) {
        const PointValues pv = point_values_polar_at(P, v, i, j);
        const PolarDerivs D = polar_derivs(v, i, j);
        const double deficit = sq(D.vt) / (r * r);
        const double bound = c3 * deficit / (r * r);
        const double slack = pv.k - bound;
        ++rep.nodes;
        rep.scale = std::max(rep.scale, pv.hess2 + sq(pv.Lv) / P.n + std::abs(pv.ric) +
                                            std::abs(pv.h_weight) + std::abs(bound));
        if (slack < rep.min_slack) {
          rep.min_slack = slack;
          rep.argmin_node = g.idx(i, j);
          rep.argmin_radius = r;
        }
      }
    }
  } else {
    throw DomainError("pointwise_k_bound: field has no grid");
  }
  rep.tolerance = 1e-8 * rep.scale + 1e-250;
  rep.verdict = rep.min_slack >= -rep.tolerance;
  return rep;
}

Prop21Report verify_prop21(const RadialSolution& sol, int n_quad) {
  const CknParameters& P = sol.params;
  const double n = P.n;
  const double alpha = P.alpha;
  const double a2 = alpha * alpha;
  const TransformedRadial tr = transform_chain(sol);
  const double Rt = tr.R_tilde;
  const double hq = Rt / (n_quad - 1);
  const double omega = sphere_area(P.d);

  std::vector<double> f_lhs(n_quad, 0.0), f_bulk(n_quad, 0.0);
  double pde_max = 0.0, pde_scale = 0.0;
  double u_lo = kInf, u_hi = -kInf;
  for (int i = 1; i < n_quad; ++i) {
    const double rho = i * hq;
    const double vv = tr.v(rho);
    const double dv = tr.dv(rho);
    const double ddv = tr.ddv(rho);
    const double u = tr.u_at(rho);
    u_lo = std::min(u_lo, u);
    u_hi = std::max(u_hi, u);
    const NonlinearityValues nl = eval_nonlinearity(sol.spec, P, u);
    const double rpow = std::pow(rho, n - 1.0);
    f_lhs[i] = (n - 1.0) / n * rpow * std::pow(vv, -1.5 * n) * a2 * dv * dv * nl.phi_prime;
    f_bulk[i] = rpow * std::pow(vv, 1.0 - n) * a2 * a2 * (1.0 - 1.0 / n) * sq(ddv - dv / rho);
    const double Lv = a2 * (ddv + (n - 1.0) * dv / rho);
    const double target = hat_f(sol.spec, P, vv) + 0.5 * n * a2 * dv * dv / vv;
    pde_max = std::max(pde_max, std::abs(Lv - target));
    pde_scale = std::max(pde_scale, std::abs(Lv) + std::abs(target));
  }
  auto trap_from = [&](const std::vector<double>& f, int i0) {
    double s = 0.5 * (f[i0] + f[n_quad - 1]);
    for (int i = i0 + 1; i < n_quad - 1; ++i) s += f[i];
    return s * hq;
  };

  Prop21Report rep;
  rep.quad_h = hq;
  rep.epsilon = 8.0 * hq;
  rep.pde_residual = pde_max / std::max(pde_scale, 1e-30);
  rep.neumann_residual =
      std::abs(sol.du_R) * sol.R / std::max(std::abs(sol.mean_u()), 1e-30);
  if (rep.pde_residual > 1e-4 || rep.neumann_residual > 1e-4)
    throw SolverResidualTooLarge("verify_prop21: input field does not satisfy the problem");

  const double lhs8 = omega * trap_from(f_lhs, 8);
  const double bulk8 = omega * trap_from(f_bulk, 8);
  const double lhs32 = omega * trap_from(f_lhs, 32);
  const double bulk32 = omega * trap_from(f_bulk, 32);
  rep.lhs = lhs8;
  rep.rhs_bulk = bulk8;
  rep.rhs_boundary = 0.0;  // radial field: tangential gradient vanishes on the sphere
  rep.residual = std::abs(rep.lhs - rep.rhs_bulk - rep.rhs_boundary);
  const double scale0 = std::max(std::abs(rep.lhs), std::abs(rep.rhs_bulk));
  rep.scale = std::max(scale0, 1e-30);
  rep.eps_sensitivity =
      std::max(std::abs(lhs8 - lhs32), std::abs(bulk8 - bulk32)) / rep.scale;
  rep.tolerance = 10.0 * (rep.pde_residual + sq(hq / Rt) + rep.eps_sensitivity) * rep.scale +
                  1e-12;
  const PhiMonotonicity mono =
      phi_monotonicity(sol.spec, P, std::max(0.5 * u_lo, 1e-8), 2.0 * u_hi, 1001);
  rep.phi_nonincreasing = mono.non_increasing;
  rep.bulk_nonpositive = rep.rhs_bulk <= rep.tolerance;
  rep.verdict = rep.residual <= rep.tolerance;
  return rep;
}

JDecayReport boundary_layer_J(const RadialSolution& sol, std::vector<double> eps_factors,
                              double beta_slack) {
  const CknParameters& P = sol.params;
  const double n = P.n;
  const double alpha = P.alpha;
  if (eps_factors.empty()) eps_factors = {0.2, 0.1, 0.05, 0.025};
  std::sort(eps_factors.rbegin(), eps_factors.rend());
  const TransformedRadial tr = transform_chain(sol);
  const double Rt = tr.R_tilde;
  const double omega = sphere_area(P.d);
  const double c45 = 2.0 / (n * (n - 2.0));

  JDecayReport rep;
  rep.beta_floor = n - 2.0 - beta_slack;
  for (double f : eps_factors) {
    const double eps = f * Rt;
    const double vv = tr.v(eps);
    const double dv = tr.dv(eps);
    const double u = tr.u_at(eps);
    const double gn = -alpha * dv;  // g(grad v, nu_g), inner normal
    const double area = omega * std::pow(eps, P.d - 1.0);
    const double wn = std::pow(eps, n - P.d) * std::pow(vv, -n) * area;
    const double phi = eval_nonlinearity(sol.spec, P, u).phi;
    std::array<double, 5> t{};
    t[0] = -0.5 * wn * (alpha * alpha * dv * dv) * gn;
    t[1] = 0.0;  // radial: grad^T v = 0
    t[2] = 0.0;
    t[3] = -c45 * wn * phi * gn;
    t[4] = -c45 * wn * gn;
    rep.eps.push_back(eps);
    rep.terms.push_back(t);
    rep.J.push_back(t[0] + t[1] + t[2] + t[3] + t[4]);
  }

  double jmax = 0.0;
  for (double j : rep.J) jmax = std::max(jmax, std::abs(j));
  const double zero_floor = 1e-14 * (1.0 + std::abs(tr.v(Rt))) * omega * std::pow(Rt, n);
  if (jmax <= zero_floor) {
    rep.beta = kInf;
    rep.decreasing = true;
  } else {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (size_t i = 0; i < rep.J.size(); ++i) {
      if (std::abs(rep.J[i]) <= 0.0) continue;
      const double x = std::log(rep.eps[i]);
      const double y = std::log(std::abs(rep.J[i]));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    rep.beta = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.decreasing = true;
    for (size_t i = 0; i + 1 < rep.J.size(); ++i)
      if (std::abs(rep.J[i + 1]) > std::abs(rep.J[i]) * (1.0 + 1e-12)) rep.decreasing = false;
  }

  for (int i = 0; i < 16; ++i) {
    const double eps = Rt * 0.5 * std::pow(0.02, i / 15.0);
    rep.grad_eps.push_back(eps);
    rep.grad_measure.push_back(eps * alpha * std::abs(tr.dv(eps)));
  }
  double outer = 0.0, inner = 0.0;
  for (int i = 0; i < 8; ++i) outer = std::max(outer, rep.grad_measure[i]);
  for (int i = 8; i < 16; ++i) inner = std::max(inner, rep.grad_measure[i]);
  rep.grad_bound = std::max(outer, inner);
  rep.grad_bounded = inner <= 1.5 * outer + 1e-300;
  rep.verdict = rep.grad_bounded && rep.decreasing && rep.beta >= rep.beta_floor;
  return rep;
}

EnergyReport energy_identity(const RadialSolution& sol, double tol) {
  const CknParameters& P = sol.params;
  const double omega = sphere_area(P.d);
  const double bq = P.b * P.q;
  using quad = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto f_dirichlet = [&](double r) {
    return std::pow(r, P.d - 1.0 - 2.0 * P.a) * sq(sol.eval_du(r));
  };
  auto f_source = [&](double r) {
    const double u = sol.eval_u(r);
    return std::pow(r, P.d - 1.0 - bq) * u * eval_nonlinearity(sol.spec, P, u).f;
  };
  auto f_mass = [&](double r) {
    return std::pow(r, P.d - 1.0 - bq) * sq(sol.eval_u(r));
  };
  EnergyReport rep;
  rep.dirichlet = omega * quad::integrate(f_dirichlet, 0.0, sol.R, 12, 1e-12);
  rep.source = omega * quad::integrate(f_source, 0.0, sol.R, 12, 1e-12);
  rep.weighted_l2 = omega * quad::integrate(f_mass, 0.0, sol.R, 12, 1e-12);
  rep.flux_term = omega * std::pow(sol.R, P.d - 1.0 - 2.0 * P.a) * sol.du_R * sol.eval_u(sol.R);
  rep.scale = std::max({rep.dirichlet, std::abs(rep.source), std::abs(rep.flux_term), 1e-30});
  rep.residual_rel =
      std::abs(rep.dirichlet - rep.source) / std::max({rep.dirichlet, std::abs(rep.source), 1e-30});
  rep.residual_with_flux = std::abs(rep.dirichlet - rep.source - rep.flux_term) / rep.scale;
  rep.finite = std::isfinite(rep.dirichlet) && std::isfinite(rep.source) &&
               std::isfinite(rep.weighted_l2);
  rep.tolerance = tol;
  rep.verdict = rep.finite && rep.residual_with_flux <= tol;
  return rep;
}

std::string to_json(const IdentityReport& r) {
  nlohmann::json j{{"max_residual", jnum(r.max_residual)},
                   {"l2_residual", jnum(r.l2_residual)},
                   {"coarse_max_residual", jnum(r.coarse_max_residual)},
                   {"coarse_l2_residual", jnum(r.coarse_l2_residual)},
                   {"grid_h", jnum(r.grid_h)},
                   {"convergence_order", jnum(r.convergence_order)},
                   {"scale", jnum(r.scale)},
                   {"tolerance", jnum(r.tolerance)},
                   {"matched_points", r.matched_points},
                   {"at_rounding", r.at_rounding},
                   {"verdict", r.verdict}};
  return j.dump();
}

std::string to_json(const InequalityReport& r) {
  nlohmann::json j{{"min_slack", jnum(r.min_slack)}, {"argmin_node", r.argmin_node},
                   {"argmin_radius", jnum(r.argmin_radius)}, {"scale", jnum(r.scale)},
                   {"tolerance", jnum(r.tolerance)}, {"nodes", r.nodes},
                   {"verdict", r.verdict}};
  return j.dump();
}

std::string to_json(const DecompositionReport& r) {
  nlohmann::json j{{"lhs", jnum(r.lhs)},
                   {"term_bracket", jnum(r.term_bracket)},
                   {"term_middle_weighted", jnum(r.term_middle_weighted)},
                   {"term_middle_unweighted", jnum(r.term_middle_unweighted)},
                   {"term_angular", jnum(r.term_angular)},
                   {"term_angular_pointwise", jnum(r.term_angular_pointwise)},
                   {"slack", jnum(r.slack)},
                   {"slack_printed_bracket", jnum(r.slack_printed_bracket)},
                   {"slack_unweighted_middle", jnum(r.slack_unweighted_middle)},
                   {"slack_pointwise_third", jnum(r.slack_pointwise_third)},
                   {"scale", jnum(r.scale)},
                   {"tolerance", jnum(r.tolerance)},
                   {"weighted_middle_holds", r.weighted_middle_holds},
                   {"unweighted_middle_holds", r.unweighted_middle_holds},
                   {"verdict", r.verdict}};
  return j.dump();
}

std::string to_json(const Prop21Report& r) {
  nlohmann::json j{{"lhs", jnum(r.lhs)},
                   {"rhs_bulk", jnum(r.rhs_bulk)},
                   {"rhs_boundary", jnum(r.rhs_boundary)},
                   {"residual", jnum(r.residual)},
                   {"scale", jnum(r.scale)},
                   {"pde_residual", jnum(r.pde_residual)},
                   {"neumann_residual", jnum(r.neumann_residual)},
                   {"epsilon", jnum(r.epsilon)},
                   {"eps_sensitivity", jnum(r.eps_sensitivity)},
                   {"quad_h", jnum(r.quad_h)},
                   {"tolerance", jnum(r.tolerance)},
                   {"phi_nonincreasing", r.phi_nonincreasing},
                   {"bulk_nonpositive", r.bulk_nonpositive},
                   {"verdict", r.verdict}};
  return j.dump();
}

std::string to_json(const JDecayReport& r) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : r.terms)
    terms.push_back({jnum(t[0]), jnum(t[1]), jnum(t[2]), jnum(t[3]), jnum(t[4])});
  nlohmann::json j{{"eps", r.eps},
                   {"J", r.J},
                   {"terms", terms},
                   {"beta", jnum(r.beta)},
                   {"beta_floor", jnum(r.beta_floor)},
                   {"decreasing", r.decreasing},
                   {"grad_bound", jnum(r.grad_bound)},
                   {"grad_bounded", r.grad_bounded},
                   {"verdict", r.verdict}};
  return j.dump();
}

std::string to_json(const EnergyReport& r) {
  nlohmann::json j{{"dirichlet", jnum(r.dirichlet)},
                   {"source", jnum(r.source)},
                   {"flux_term", jnum(r.flux_term)},
                   {"residual_rel", jnum(r.residual_rel)},
                   {"residual_with_flux", jnum(r.residual_with_flux)},
                   {"weighted_l2", jnum(r.weighted_l2)},
                   {"scale", jnum(r.scale)},
                   {"tolerance", jnum(r.tolerance)},
                   {"finite", r.finite},
                   {"verdict", r.verdict}};
  return j.dump();
}

}  // namespace ckn
