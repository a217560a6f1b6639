#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include "ckn/fields.hpp"
#include "ckn/geometry.hpp"
#include "ckn/io.hpp"

using namespace ckn;

namespace {

// v = c0 + sum_k A_k sin(w_k r + p_k) cos^{m_k}(theta), smooth and
// axisymmetric, with an exact derivative jet.
struct AxiField {
  double c0 = 2.0;
  std::vector<double> A, w, p;
  std::vector<int> m;

  static AxiField random(std::mt19937& rng, double amp = 0.12) {
    std::uniform_real_distribution<double> ua(-amp, amp), uw(0.4, 1.4), up(0.0, 6.28);
    std::uniform_int_distribution<int> um(0, 3);
    AxiField f;
    for (int k = 0; k < 3; ++k) {
      f.A.push_back(ua(rng));
      f.w.push_back(uw(rng));
      f.p.push_back(up(rng));
      f.m.push_back(um(rng));
    }
    return f;
  }

  PolarDerivs at(double r, double theta) const {
    PolarDerivs d;
    d.v = c0;
    const double ct = std::cos(theta), st = std::sin(theta);
    for (std::size_t k = 0; k < A.size(); ++k) {
      const double s = std::sin(w[k] * r + p[k]), c = std::cos(w[k] * r + p[k]);
      const double f = A[k] * s, fr = A[k] * w[k] * c, frr = -A[k] * w[k] * w[k] * s;
      const int mm = m[k];
      double g = 1.0, gt = 0.0, gtt = 0.0;
      if (mm >= 1) {
        const double cm = std::pow(ct, mm);
        const double cm1 = std::pow(ct, mm - 1);
        const double cm2 = (mm >= 2) ? std::pow(ct, mm - 2) : 0.0;
        g = cm;
        gt = -mm * cm1 * st;
        gtt = mm * (mm - 1) * cm2 * st * st - mm * cm;
      }
      d.v += f * g;
      d.vr += fr * g;
      d.vt += f * gt;
      d.vrr += frr * g;
      d.vrt += fr * gt;
      d.vtt += f * gtt;
    }
    return d;
  }

  double cart(const Vec& x) const {
    const double r = x.norm();
    const double theta = std::acos(std::clamp(x[2] / r, -1.0, 1.0));
    return at(r, theta).v;
  }
};

// v = c0 + sum_k A_k sin(kvec_k . x + p_k) in dimension d, exact jet.
struct TrigField {
  double c0 = 2.0;
  std::vector<Vec> kv;
  std::vector<double> A, p;

  static TrigField random(std::mt19937& rng, int d, double amp = 0.15) {
    std::uniform_real_distribution<double> ua(-amp, amp), uk(-1.2, 1.2), up(0.0, 6.28);
    TrigField f;
    for (int t = 0; t < 3; ++t) {
      Vec k(d);
      for (int i = 0; i < d; ++i) k[i] = uk(rng);
      f.kv.push_back(k);
      f.A.push_back(ua(rng));
      f.p.push_back(up(rng));
    }
    return f;
  }

  double value(const Vec& x) const {
    double v = c0;
    for (std::size_t t = 0; t < A.size(); ++t) v += A[t] * std::sin(kv[t].dot(x) + p[t]);
    return v;
  }
  CartDerivs jet(const Vec& x) const {
    CartDerivs d;
    d.v = c0;
    d.grad = Vec::Zero(x.size());
    d.hess = Mat::Zero(x.size(), x.size());
    for (std::size_t t = 0; t < A.size(); ++t) {
      const double s = std::sin(kv[t].dot(x) + p[t]), c = std::cos(kv[t].dot(x) + p[t]);
      d.v += A[t] * s;
      d.grad += A[t] * c * kv[t];
      d.hess -= A[t] * s * kv[t] * kv[t].transpose();
    }
    return d;
  }
};

// Reference probe field v = 2 + 0.3 sin(1.3 r) cos(th) + 0.2 cos(0.7 r) cos^2(th).
PolarDerivs probe_jet(double r, double theta) {
  const double s1 = std::sin(1.3 * r), c1 = std::cos(1.3 * r);
  const double s7 = std::sin(0.7 * r), c7 = std::cos(0.7 * r);
  const double ct = std::cos(theta), st = std::sin(theta);
  PolarDerivs d;
  d.v = 2.0 + 0.3 * s1 * ct + 0.2 * c7 * ct * ct;
  d.vr = 0.3 * 1.3 * c1 * ct - 0.2 * 0.7 * s7 * ct * ct;
  d.vrr = -0.3 * 1.3 * 1.3 * s1 * ct - 0.2 * 0.7 * 0.7 * c7 * ct * ct;
  d.vt = -0.3 * s1 * st - 0.4 * c7 * ct * st;
  d.vtt = -0.3 * s1 * ct - 0.4 * c7 * (ct * ct - st * st);
  d.vrt = -0.3 * 1.3 * c1 * st + 0.4 * 0.7 * s7 * ct * st;
  return d;
}

struct ProbeRow {
  double r, theta, v, norm_sq, Lv, hess2, ric, h_weight, k;
};

// Reference values computed at 50-digit precision for (d,a,b) = (3,1/4,3/10).
const ProbeRow kProbes[3] = {
    {1.1, 0.9, 2.24011764546803201, 0.114676921689373465, -0.407552257508195998,
     0.120882528849407515, 0.0771003796220034893, -0.00279023941196092986,
     0.142594702236108222},
    {1.4, 1.7, 1.96439010284432935, 0.0344680369305400239, 0.160883091689886793,
     0.0295021176379672488, 0.0142981024281823593, -0.000517148500183304322,
     0.0350866713219290721},
    {1.7, 0.5, 2.26854356754892826, 0.0282244326629606111, -0.357472272712016233,
     0.0582165135367616454, 0.00308547837881470155, 0.0000642092177534683074,
     0.0209004996433300151},
};

void check_row(const PointValues& pv, const ProbeRow& row, double eps) {
  CHECK(pv.v == doctest::Approx(row.v).epsilon(eps));
  CHECK(pv.norm_sq == doctest::Approx(row.norm_sq).epsilon(eps));
  CHECK(pv.Lv == doctest::Approx(row.Lv).epsilon(eps));
  CHECK(pv.hess2 == doctest::Approx(row.hess2).epsilon(eps));
  CHECK(pv.ric == doctest::Approx(row.ric).epsilon(eps));
  CHECK(pv.h_weight == doctest::Approx(row.h_weight).epsilon(eps));
  CHECK(pv.k == doctest::Approx(row.k).epsilon(eps));
}

}  // namespace

TEST_CASE("polar kernel reproduces reference probe values") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  for (const ProbeRow& row : kProbes) {
    const PointValues pv = k_point_polar(P, row.r, row.theta, probe_jet(row.r, row.theta));
    check_row(pv, row, 5e-13);
  }
}

TEST_CASE("Cartesian kernel matches the probes through the meridian jet") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  for (const ProbeRow& row : kProbes) {
    Vec x;
    CartDerivs cd;
    axisym_to_cartesian(row.r, row.theta, probe_jet(row.r, row.theta), x, cd);
    const PointValues pv = k_point_cart(P, x, cd);
    check_row(pv, row, 5e-13);
  }
}

TEST_CASE("kernel route equivalence on random axisymmetric fields") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> ur(0.5, 2.0), ut(0.15, 2.99);
  const auto P = derive_parameters(3, 0.25, 0.3);
  const auto P2 = derive_parameters(3, -0.5, 0.1);
  for (int trial = 0; trial < 50; ++trial) {
    const AxiField f = AxiField::random(rng);
    const auto& Pt = (trial % 2 == 0) ? P : P2;
    for (int pt = 0; pt < 4; ++pt) {
      const double r = ur(rng), theta = ut(rng);
      const PolarDerivs jet = f.at(r, theta);
      const PointValues a = k_point_polar(Pt, r, theta, jet);
      Vec x;
      CartDerivs cd;
      axisym_to_cartesian(r, theta, jet, x, cd);
      const PointValues b = k_point_cart(Pt, x, cd);
      CHECK(a.norm_sq == doctest::Approx(b.norm_sq).epsilon(1e-12));
      CHECK(a.Lv == doctest::Approx(b.Lv).epsilon(1e-12));
      CHECK(a.hess2 == doctest::Approx(b.hess2).epsilon(1e-12));
      CHECK(a.ric == doctest::Approx(b.ric).epsilon(1e-12));
      CHECK(a.h_weight == doctest::Approx(b.h_weight).epsilon(1e-12));
      CHECK(a.k == doctest::Approx(b.k).epsilon(1e-12));
    }
  }
}

TEST_CASE("quadratic profile: Lv = 2n/lambda and k = 0 at kernel level") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uc(0.4, 2.0), ul(0.8, 2.5);
  const CknParameters cases[] = {
      derive_parameters(3, 0.25, 0.3),
      derive_parameters(3, 0.2, 0.2),
      derive_parameters(4, 0.3, 0.5),
  };
  for (const auto& P : cases) {
    for (int trial = 0; trial < 10; ++trial) {
      const double c = uc(rng), lam = ul(rng);
      const double a2 = sq(P.alpha);

      Vec x(P.d);
      for (int i = 0; i < P.d; ++i) x[i] = uc(rng) - 1.0;
      if (x.norm() < 0.3) x[0] += 1.0;
      CartDerivs cd;
      cd.v = c + x.squaredNorm() / (a2 * lam);
      cd.grad = 2.0 / (a2 * lam) * x;
      cd.hess = 2.0 / (a2 * lam) * Mat::Identity(P.d, P.d);
      const PointValues pv = k_point_cart(P, x, cd);
      CHECK(pv.Lv == doctest::Approx(2.0 * P.n / lam).epsilon(1e-12));
      CHECK(pv.hess2 == doctest::Approx(4.0 * P.d / sq(lam)).epsilon(1e-12));
      CHECK(std::abs(pv.k) <= 1e-12 * pv.hess2);

      const Mat cov = covariant_hessian(x, P.alpha, cd.grad, cd.hess);
      CHECK(laplace_g(x, P.alpha, cov) == doctest::Approx(2.0 * P.d / lam).epsilon(1e-12));
      CHECK(hess_norm_sq_g(x, P.alpha, cov) ==
            doctest::Approx(4.0 * P.d / sq(lam)).epsilon(1e-12));

      if (P.d == 3) {
        const double r = 0.3 + uc(rng);
        PolarDerivs jet;
        jet.v = c + sq(r) / (a2 * lam);
        jet.vr = 2.0 * r / (a2 * lam);
        jet.vrr = 2.0 / (a2 * lam);
        const PointValues pp = k_point_polar(P, r, 1.1, jet);
        CHECK(pp.Lv == doctest::Approx(2.0 * P.n / lam).epsilon(1e-12));
        CHECK(std::abs(pp.k) <= 1e-12 * pp.hess2);
      }
    }
  }
}

TEST_CASE("gradient examples: constant, |x|^2 at alpha = 1/2, linear at alpha = 1") {
  const auto Phalf = derive_parameters(3, 0.25, 0.25);
  CHECK(Phalf.alpha == doctest::Approx(0.5).epsilon(1e-15));
  const auto grid = AnnulusGrid::make(3, 0.8, 1.6, 1.0 / 16.0);

  const ScalarField vconst = sample_annulus(grid, [](const Vec&) { return 3.7; }, true);
  const ScalarField vsq =
      sample_annulus(grid, [](const Vec& x) { return x.squaredNorm(); }, true);

  const auto inner = grid.interior_nodes(2);
  REQUIRE(inner.size() > 100);
  for (std::size_t t = 0; t < inner.size(); t += 17) {
    const int node = inner[t];
    const Vec x = grid.position(node);
    const Vec gc = grad_g_at(Phalf, vconst, node);
    CHECK(gc.norm() <= 1e-11);
    CHECK(std::abs(norm_sq_g_at(Phalf, vconst, node)) <= 1e-11);

    const Vec gs = grad_g_at(Phalf, vsq, node);
    CHECK((gs - 0.5 * x).norm() <= 1e-11);
    CHECK(norm_sq_g_at(Phalf, vsq, node) ==
          doctest::Approx(x.squaredNorm()).epsilon(1e-11));
  }

  const auto Pflat = derive_parameters(3, 0.0, 0.0);
  Vec cvec(3);
  cvec << 0.4, -0.9, 0.25;
  const ScalarField vlin = sample_annulus(
      grid, [&](const Vec& x) { return 2.0 + cvec.dot(x); }, true);
  for (std::size_t t = 0; t < inner.size(); t += 29) {
    const Vec gl = grad_g_at(Pflat, vlin, inner[t]);
    CHECK((gl - cvec).norm() <= 1e-11);
  }
}

TEST_CASE("polar gradient norm formula agrees with the tensor route") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ur(0.6, 1.9), ut(0.1, 3.0);
  for (int trial = 0; trial < 25; ++trial) {
    const AxiField f = AxiField::random(rng);
    const double r = ur(rng), theta = ut(rng);
    const PolarDerivs jet = f.at(r, theta);
    const double polar_norm = sq(P.alpha) * sq(jet.vr) + sq(jet.vt) / sq(r);
    Vec x;
    CartDerivs cd;
    axisym_to_cartesian(r, theta, jet, x, cd);
    CHECK(norm_sq_g_from_euclid(x, P.alpha, cd.grad) ==
          doctest::Approx(polar_norm).epsilon(1e-12));
  }
}

TEST_CASE("op_L: quadratic profile is exact through the FD pipeline") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  const double lam = 1.4, c = 0.5, a2 = sq(P.alpha);
  const auto grid = AnnulusGrid::make(3, 0.9, 1.4, 1.0 / 16.0);
  const ScalarField v = sample_annulus(
      grid, [&](const Vec& x) { return c + x.squaredNorm() / (a2 * lam); }, true);
  const ScalarField Lv = op_L(P, v);
  const ScalarField kf = k_functional(P, v);
  int checked = 0;
  for (int node = 0; node < grid.size(); ++node) {
    if (!grid.box_inside(node, 2)) {
      CHECK(std::isnan(Lv.values[node]));
      continue;
    }
    CHECK(Lv.values[node] == doctest::Approx(2.0 * P.n / lam).epsilon(1e-10));
    CHECK(std::abs(kf.values[node]) <= 1e-9);
    ++checked;
  }
  CHECK(checked > 100);

  const auto pgrid = AxiPolarGrid::make(0.5, 2.0, 61, 49);
  const ScalarField vp = sample_polar(
      pgrid, [&](double r, double) { return c + sq(r) / (a2 * lam); }, true);
  const ScalarField Lvp = op_L(P, vp);
  for (int i = 2; i <= pgrid.nr - 3; ++i) {
    for (int j = 0; j < pgrid.nt; ++j) {
      CHECK(Lvp.values[pgrid.idx(i, j)] ==
            doctest::Approx(2.0 * P.n / lam).epsilon(1e-10));
    }
  }
}

TEST_CASE("op_L: constant field maps to zero, v = 1 at rounding level") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  const auto grid = AnnulusGrid::make(3, 0.9, 1.3, 1.0 / 12.0);
  const ScalarField one = sample_annulus(grid, [](const Vec&) { return 1.0; }, true);
  const ScalarField L1 = op_L(P, one);
  const ScalarField k1 = k_functional(P, one);
  for (int node = 0; node < grid.size(); ++node) {
    if (!grid.box_inside(node, 2)) continue;
    CHECK(std::abs(L1.values[node]) <= 1e-12);
    CHECK(std::abs(k1.values[node]) <= 1e-12);
  }
}

TEST_CASE("op_L: unweighted case reduces to the Euclidean Laplacian at 4th order") {
  const auto P = derive_parameters(3, 0.0, 0.0);
  std::mt19937 rng(11);
  const TrigField f = TrigField::random(rng, 3);
  double err[2];
  const double hs[2] = {1.0 / 12.0, 1.0 / 24.0};
  for (int lev = 0; lev < 2; ++lev) {
    const auto grid = AnnulusGrid::make(3, 0.8, 1.35, hs[lev]);
    const ScalarField v =
        sample_annulus(grid, [&](const Vec& x) { return f.value(x); }, true);
    double worst = 0.0;
    for (int node : grid.interior_nodes(2)) {
      const Vec x = grid.position(node);
      const double lap = f.jet(x).hess.trace();
      worst = std::max(worst, std::abs(op_L_at(P, v, node) - lap));
    }
    err[lev] = worst;
  }
  CHECK(err[1] > 0.0);
  const double ratio = err[0] / err[1];
  CHECK(ratio >= 10.0);
  CHECK(ratio <= 24.0);
}

TEST_CASE("the two displayed forms of L agree: weighted divergence route") {
  // |x|^{d-n} div(|x|^{n-d} grad_g v) against Delta_g v + (n-d) g(grad log|x|, grad v),
  // both from finite differences, at the same physical points on two resolutions.
  const auto P = derive_parameters(3, 0.25, 0.3);
  std::mt19937 rng(13);
  const TrigField f = TrigField::random(rng, 3);
  constexpr double kD1[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};

  const auto coarse = AnnulusGrid::make(3, 0.9, 1.5, 1.0 / 16.0);
  const auto fine = AnnulusGrid::make(3, 0.9, 1.5, 1.0 / 32.0);
  const AnnulusGrid* grids[2] = {&coarse, &fine};
  ScalarField v[2];
  std::vector<std::array<double, 3>> W[2];
  for (int lev = 0; lev < 2; ++lev) {
    const AnnulusGrid& g = *grids[lev];
    v[lev] = sample_annulus(g, [&](const Vec& x) { return f.value(x); }, true);
    W[lev].assign(g.size(), std::array<double, 3>{kNaN, kNaN, kNaN});
    for (int node : g.interior_nodes(2)) {
      const Vec G = grad_g_at(P, v[lev], node);
      const double wgt = std::pow(g.radius(node), P.n - P.d);
      for (int i = 0; i < 3; ++i) W[lev][node][i] = wgt * G[i];
    }
  }
  const auto residual = [&](int lev, int node) {
    const AnnulusGrid& g = *grids[lev];
    double div = 0.0;
    for (int p = 0; p < 3; ++p) {
      for (int s = -2; s <= 2; ++s) {
        if (s == 0) continue;
        div += kD1[s + 2] * W[lev][g.neighbor(node, p, s)][p];
      }
    }
    div /= g.h;
    const double lhs = std::pow(g.radius(node), P.d - P.n) * div;
    return std::abs(lhs - op_L_at(P, v[lev], node));
  };
  double err_coarse = 0.0, err_fine = 0.0;
  int matched = 0;
  for (int node : coarse.interior_nodes(4)) {
    std::array<int, 4> cf = coarse.coords[node];
    for (int& c : cf) c *= 2;
    const int fnode = fine.find(cf);
    REQUIRE(fnode >= 0);
    err_coarse = std::max(err_coarse, residual(0, node));
    err_fine = std::max(err_fine, residual(1, fnode));
    ++matched;
  }
  CHECK(matched >= 20);
  CHECK(err_fine > 0.0);
  const double ratio = err_coarse / err_fine;
  CHECK(ratio >= 10.0);
  CHECK(ratio <= 24.0);
  CHECK(err_fine <= 1e-3);
}

TEST_CASE("FD layers converge to the kernels at 4th order on both grids") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  std::mt19937 rng(17);
  const AxiField f = AxiField::random(rng);

  double perr[2];
  const int sizes[2][2] = {{121, 97}, {241, 193}};
  for (int lev = 0; lev < 2; ++lev) {
    const auto grid = AxiPolarGrid::make(0.7, 1.9, sizes[lev][0], sizes[lev][1]);
    const ScalarField v = sample_polar(
        grid, [&](double r, double th) { return f.at(r, th).v; }, true);
    double worst = 0.0;
    for (int i = 2; i <= grid.nr - 3; i += 3) {
      for (int j = 0; j < grid.nt; j += 2) {
        const PointValues fd = point_values_polar_at(P, v, i, j);
        const PointValues ex =
            k_point_polar(P, grid.r(i), grid.theta(j), f.at(grid.r(i), grid.theta(j)));
        worst = std::max({worst, std::abs(fd.Lv - ex.Lv), std::abs(fd.k - ex.k)});
      }
    }
    perr[lev] = worst;
  }
  CHECK(perr[1] > 0.0);
  CHECK(perr[0] / perr[1] >= 10.0);
  CHECK(perr[0] / perr[1] <= 24.0);

  const TrigField tf = TrigField::random(rng, 3);
  double aerr[2];
  const double hs[2] = {1.0 / 14.0, 1.0 / 28.0};
  for (int lev = 0; lev < 2; ++lev) {
    const auto grid = AnnulusGrid::make(3, 0.9, 1.4, hs[lev]);
    const ScalarField v =
        sample_annulus(grid, [&](const Vec& x) { return tf.value(x); }, true);
    double worst = 0.0;
    for (int node : grid.interior_nodes(2)) {
      const PointValues fd = point_values_at(P, v, node);
      const PointValues ex = k_point_cart(P, grid.position(node), tf.jet(grid.position(node)));
      worst = std::max({worst, std::abs(fd.Lv - ex.Lv), std::abs(fd.k - ex.k)});
    }
    aerr[lev] = worst;
  }
  CHECK(aerr[1] > 0.0);
  CHECK(aerr[0] / aerr[1] >= 10.0);
  CHECK(aerr[0] / aerr[1] <= 24.0);
}

TEST_CASE("hessian_g: flat case, closed-form Christoffel symbols, trace identity") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), ua(0.3, 1.6);

  const TrigField f3 = TrigField::random(rng, 3);
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = ux(rng);
    if (x.norm() < 0.4) x[2] += 1.0;
    const CartDerivs jet = f3.jet(x);
    const Mat cov1 = covariant_hessian(x, 1.0, jet.grad, jet.hess);
    CHECK((cov1 - jet.hess).norm() <= 1e-14 * (1.0 + jet.hess.norm()));
  }

  // closed-form Gamma against 4th-order finite differences of metric_at
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = ua(rng);
    const int d = (trial % 2 == 0) ? 3 : 4;
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = ux(rng);
    if (x.norm() < 0.5) x[0] += 1.2;
    const double fd_h = 0.01;
    constexpr double kD1[5] = {1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};

    std::vector<Mat> dg(d);
    for (int l = 0; l < d; ++l) {
      Mat acc = Mat::Zero(d, d);
      for (int s = -2; s <= 2; ++s) {
        if (s == 0) continue;
        Vec y = x;
        y[l] += s * fd_h;
        acc += kD1[s + 2] * metric_at(y, alpha).g;
      }
      dg[l] = acc / fd_h;
    }
    const Mat ginv = metric_at(x, alpha).g_inv;
    const double r = x.norm();
    const Vec xh = x / r;
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        for (int k = 0; k < d; ++k) {
          double fd_gamma = 0.0;
          for (int l = 0; l < d; ++l) {
            fd_gamma += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
          }
          const double closed = (1.0 - sq(alpha)) / r *
                                ((i == j ? 1.0 : 0.0) - xh[i] * xh[j]) * xh[k];
          worst = std::max(worst, std::abs(fd_gamma - closed));
        }
      }
    }
    CHECK(worst <= 2e-6);

    // quadratic-form helper from the geometry module against the closed form
    Vec X(d);
    for (int i = 0; i < d; ++i) X[i] = ux(rng);
    const Vec q = christoffel_quad(x, alpha, X);
    const Vec closed_q =
        (1.0 - sq(alpha)) / r * (X.squaredNorm() - sq(xh.dot(X))) * xh;
    CHECK((q - closed_q).norm() <= 1e-12 * (1.0 + closed_q.norm()));
  }
}

TEST_CASE("curvature_terms: radial, angular, and flat special cases") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> ux(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vec x(3);
    for (int i = 0; i < 3; ++i) x[i] = ux(rng);
    if (x.norm() < 0.4) x[1] += 1.1;
    const double r2 = x.squaredNorm();

    // radial gradient: deficit vanishes, h_weight = (n-d) pair^2 / |x|^4
    const Vec grad_rad = 0.73 * x;
    const CurvatureTerms ct_rad = curvature_terms(P, x, grad_rad);
    CHECK(std::abs(ct_rad.ric) <= 1e-14);
    CHECK(ct_rad.h_weight ==
          doctest::Approx((P.n - P.d) * sq(0.73) * r2 * r2 / sq(r2)).epsilon(1e-12));

    // tangential gradient: pair vanishes
    Vec t = Vec::Random(3);
    t -= (t.dot(x) / r2) * x;
    const CurvatureTerms ct_tan = curvature_terms(P, x, t);
    const double tn = t.squaredNorm();
    CHECK(ct_tan.ric ==
          doctest::Approx((1.0 - sq(P.alpha)) * (P.d - 2.0) * tn / r2).epsilon(1e-12));
    CHECK(ct_tan.h_weight ==
          doctest::Approx(-sq(P.alpha) * (P.n - P.d) * tn / r2).epsilon(1e-12));
  }

  const auto Pflat = derive_parameters(3, 0.0, 0.0);
  Vec x(3), g(3);
  x << 0.3, -0.8, 1.1;
  g << 0.4, 0.2, -0.7;
  const CurvatureTerms flat = curvature_terms(Pflat, x, g);
  CHECK(std::abs(flat.ric) <= 1e-15);
  CHECK(std::abs(flat.h_weight) <= 1e-15);

  CHECK_THROWS_AS(curvature_terms(P, Vec::Zero(3), g), OriginError);
}

TEST_CASE("pointwise curvature bound holds in the strong regime") {
  const auto P = derive_parameters(3, 0.05, 0.1);
  const auto regime = classify_regime(P);
  REQUIRE(regime.strong);
  const double coeff = P.d - 2.0 - sq(P.alpha) * (P.n - 2.0);
  REQUIRE(coeff > 0.0);

  std::mt19937 rng(31);
  std::uniform_real_distribution<double> ur(0.5, 2.0), ut(0.15, 2.99);
  double min_slack = kInf;
  for (int trial = 0; trial < 20; ++trial) {
    const AxiField f = AxiField::random(rng);
    for (int pt = 0; pt < 30; ++pt) {
      const double r = ur(rng), theta = ut(rng);
      const PolarDerivs jet = f.at(r, theta);
      const PointValues pv = k_point_polar(P, r, theta, jet);
      const double deficit = sq(jet.vt) / sq(r);
      const double slack = pv.k - coeff / sq(r) * deficit;
      min_slack = std::min(min_slack, slack / (1.0 + pv.hess2));
    }
  }
  CHECK(min_slack >= -1e-11);
}

TEST_CASE("chain rule for L(v^{1-n}) on manufactured radial solutions") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  const auto coarse = AnnulusGrid::make(3, 0.9, 1.5, 1.0 / 16.0);
  const auto fine = AnnulusGrid::make(3, 0.9, 1.5, 1.0 / 32.0);
  const AnnulusGrid* grids[2] = {&coarse, &fine};
  ScalarField v[2], w[2];
  for (int lev = 0; lev < 2; ++lev) {
    v[lev] = sample_annulus(
        *grids[lev], [](const Vec& x) { return 2.0 + 0.3 * std::sin(1.1 * x.norm()); },
        true);
    w[lev] = pow_field(v[lev], 1.0 - P.n);
  }
  const auto residual = [&](int lev, int node) {
    const PointValues pv = point_values_at(P, v[lev], node);
    const double fhat = pv.Lv - (P.n / 2.0) * pv.norm_sq / pv.v;
    const double rhs = -(P.n - 1.0) * std::pow(pv.v, -P.n) * fhat +
                       (P.n * (P.n - 1.0) / 2.0) * std::pow(pv.v, -P.n - 1.0) * pv.norm_sq;
    return std::abs(op_L_at(P, w[lev], node) - rhs);
  };
  double err_coarse = 0.0, err_fine = 0.0;
  for (int node : coarse.interior_nodes(2)) {
    std::array<int, 4> cf = coarse.coords[node];
    for (int& c : cf) c *= 2;
    const int fnode = fine.find(cf);
    REQUIRE(fnode >= 0);
    err_coarse = std::max(err_coarse, residual(0, node));
    err_fine = std::max(err_fine, residual(1, fnode));
  }
  CHECK(err_fine > 0.0);
  const double ratio = err_coarse / err_fine;
  CHECK(ratio >= 10.0);
  CHECK(ratio <= 24.0);
}

TEST_CASE("symmetry axis: kernel is continuous and umbilic at the poles") {
  const auto P = derive_parameters(3, 0.25, 0.3);
  std::mt19937 rng(37);
  const AxiField f = AxiField::random(rng);
  for (double r : {0.8, 1.6}) {
    for (double pole : {0.0, M_PI}) {
      const PointValues at_pole = k_point_polar(P, r, pole, f.at(r, pole));
      const double eps_t = 1e-6;
      const double near_t = (pole == 0.0) ? eps_t : M_PI - eps_t;
      const PointValues near_pole = k_point_polar(P, r, near_t, f.at(r, near_t));
      CHECK(at_pole.k == doctest::Approx(near_pole.k).epsilon(1e-4));
      CHECK(at_pole.Lv == doctest::Approx(near_pole.Lv).epsilon(1e-4));
      const PolarDerivs jet = f.at(r, pole);
      CHECK(std::abs(jet.vt) <= 1e-13);
    }
  }
}

TEST_CASE("positivity flag enforcement") {
  const auto grid = AnnulusGrid::make(3, 0.9, 1.3, 1.0 / 10.0);
  CHECK_THROWS_AS(
      sample_annulus(grid, [](const Vec& x) { return x[0]; }, true), PositivityError);
  const ScalarField unsigned_field =
      sample_annulus(grid, [](const Vec& x) { return x[0]; }, false);
  CHECK_THROWS_AS(pow_field(unsigned_field, -2.1), PositivityError);
  CHECK_THROWS_AS(pow_field(unsigned_field, 0.5), PositivityError);

  const ScalarField pos =
      sample_annulus(grid, [](const Vec& x) { return 1.0 + x.squaredNorm(); }, true);
  const ScalarField neg_pow = pow_field(pos, -2.1);
  CHECK(neg_pow.positive);
  CHECK(neg_pow.values[0] ==
        doctest::Approx(std::pow(pos.values[0], -2.1)).epsilon(1e-15));

  const ScalarField squared = pow_field(unsigned_field, 2.0);
  CHECK(squared.values[5] == doctest::Approx(sq(unsigned_field.values[5])).epsilon(1e-15));
}

TEST_CASE("stencil range errors and grid invariants") {
  CHECK_THROWS_AS(AnnulusGrid::make(3, 0.05, 1.0, 1.0 / 16.0), DomainError);
  CHECK_THROWS_AS(AnnulusGrid::make(5, 0.5, 1.0, 1.0 / 16.0), DomainError);
  CHECK_THROWS_AS(AnnulusGrid::make(3, 1.0, 0.5, 1.0 / 16.0), DomainError);

  const auto grid = AnnulusGrid::make(3, 0.9, 1.2, 1.0 / 12.0);
  const ScalarField v = sample_annulus(grid, [](const Vec&) { return 1.0; }, true);
  int argmin = 0;
  for (int node = 1; node < grid.size(); ++node) {
    if (grid.radius(node) < grid.radius(argmin)) argmin = node;
  }
  CHECK(!grid.box_inside(argmin, 2));
  CHECK_THROWS_AS(annulus_derivs(v, argmin), StencilOutOfRange);
  for (int node : grid.interior_nodes(2)) {
    CHECK_NOTHROW(annulus_derivs(v, node));
    break;
  }

  const auto pgrid = AxiPolarGrid::make(0.0, 1.0, 21, 17);
  const ScalarField vp = sample_polar(pgrid, [](double, double) { return 1.0; }, true);
  CHECK_THROWS_AS(polar_derivs(vp, 1, 4), StencilOutOfRange);
  CHECK_THROWS_AS(polar_derivs(vp, pgrid.nr - 2, 4), StencilOutOfRange);
  CHECK_NOTHROW(polar_derivs(vp, 2, 0));
  CHECK(pgrid.reflect_theta(-2) == 2);
  CHECK(pgrid.reflect_theta(pgrid.nt) == pgrid.nt - 2);
}

TEST_CASE("field snapshot export: CSV header and binary round-trip") {
  const auto pgrid = AxiPolarGrid::make(0.2, 1.0, 9, 7);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  const ScalarField v = sample_polar(
      pgrid, [&](double, double) { return u(rng); }, true);

  const std::string csv_path = "/tmp/ckn_test_field.csv";
  const std::string bin_path = "/tmp/ckn_test_field.bin";
  field_to_csv(v, csv_path);
  field_to_binary(v, bin_path);

  std::ifstream in(csv_path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "r,theta,value");
  int lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == pgrid.size());

  const std::vector<double> back = values_from_binary(bin_path);
  REQUIRE(back.size() == v.values.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == v.values[i]);

  const auto agrid = AnnulusGrid::make(3, 0.9, 1.2, 1.0 / 8.0);
  const ScalarField va = sample_annulus(agrid, [](const Vec& x) { return x[0]; }, false);
  field_to_csv(va, csv_path);
  std::ifstream in2(csv_path);
  std::getline(in2, header);
  CHECK(header == "x,y,z,value");
}
