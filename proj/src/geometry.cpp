#include "ckn/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ckn/io.hpp"

namespace ckn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Value and two derivatives of the degree-4 interpolant through
// (0, y0) ... (4, y4) evaluated at u.
void lagrange5(double u, const double* y, double& p, double& dp, double& d2p) {
  static const Eigen::Matrix<double, 5, 5> vinv = [] {
    Eigen::Matrix<double, 5, 5> v;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) v(i, j) = std::pow(double(i), j);
    return Eigen::Matrix<double, 5, 5>(v.inverse());
  }();
  Eigen::Matrix<double, 5, 1> yv;
  for (int i = 0; i < 5; ++i) yv(i) = y[i];
  Eigen::Matrix<double, 5, 1> c = vinv * yv;
  p = ((c(4) * u + c(3)) * u + c(2)) * u * u + c(1) * u + c(0);
  dp = ((4 * c(4) * u + 3 * c(3)) * u + 2 * c(2)) * u + c(1);
  d2p = (12 * c(4) * u + 6 * c(3)) * u + 2 * c(2);
}

double rho_sample(const DomainBoundary& b, long long i) {
  const long long n = (long long)b.rho.size();
  if (b.d == 2) {
    long long k = ((i % n) + n) % n;
    return b.rho[(size_t)k];
  }
  long long k = i;
  const long long last = n - 1;
  while (k < 0 || k > last) {
    if (k < 0) k = -k;
    if (k > last) k = 2 * last - k;
  }
  return b.rho[(size_t)k];
}

double graph_h(const DomainBoundary& b) {
  return b.d == 2 ? 2.0 * kPi / (double)b.rho.size()
                  : kPi / (double)(b.rho.size() - 1);
}

// Reflection ghosts force an even extension at the poles, so a profile that
// is not smooth there shows up as a first grid step incompatible with the
// local second difference rather than as a nonzero interpolated derivative.
void check_pole_smoothness(const DomainBoundary& b, bool north) {
  const double h = graph_h(b);
  const long long n = (long long)b.rho.size();
  const long long i0 = north ? 0 : n - 1;
  const long long stp = north ? 1 : -1;
  const double r0 = rho_sample(b, i0);
  const double r1 = rho_sample(b, i0 + stp);
  const double r2 = rho_sample(b, i0 + 2 * stp);
  const double d2 = (r2 - 2.0 * r1 + r0) / (h * h);
  const double resid = (r1 - r0) / h - 0.5 * d2 * h;
  if (std::abs(resid) > 1e-4 * std::max(1.0, r0))
    throw DegenerateFrameError(
        "axisymmetric profile is not smooth at the pole (rho' != 0)");
}

Vec axis_of(const DomainBoundary& b) {
  Vec a = Vec::Zero(b.d);
  if (b.kind == DomainKind::OffsetBall && b.center.norm() > 1e-14 * (1 + b.R))
    a = b.center.normalized();
  else
    a(b.d - 1) = 1.0;
  return a;
}

}  // namespace

Vec map_T(const Vec& x, double alpha) {
  const double r = x.norm();
  if (r == 0.0) return Vec::Zero(x.size());
  return std::pow(r, alpha - 1.0) * x;
}

Vec map_T_inverse(const Vec& y, double alpha) {
  const double r = y.norm();
  if (r == 0.0) return Vec::Zero(y.size());
  return std::pow(r, 1.0 / alpha - 1.0) * y;
}

MetricData metric_at(const Vec& x, double alpha) {
  const double r = x.norm();
  if (r == 0.0) throw OriginError("metric_at: the metric is singular at x = 0");
  const int d = (int)x.size();
  const Vec xh = x / r;
  MetricData m;
  m.g = Mat::Identity(d, d) + (1.0 / (alpha * alpha) - 1.0) * xh * xh.transpose();
  m.g_inv = Mat::Identity(d, d) + (alpha * alpha - 1.0) * xh * xh.transpose();
  m.sqrt_det = std::sqrt(m.g.determinant());
  return m;
}

Vec christoffel_quad(const Vec& x, double alpha, const Vec& X) {
  const double r = x.norm();
  if (r == 0.0) throw OriginError("christoffel_quad: singular at x = 0");
  const Vec xh = x / r;
  const double tang = X.squaredNorm() - sq(xh.dot(X));
  return (1.0 - alpha * alpha) / r * tang * xh;
}

Mat dT_jacobian(const Vec& x, double alpha) {
  const double r = x.norm();
  if (r == 0.0) throw OriginError("dT_jacobian: singular at x = 0");
  const int d = (int)x.size();
  const Vec xh = x / r;
  return std::pow(r, alpha - 1.0) *
         (Mat::Identity(d, d) + (alpha - 1.0) * xh * xh.transpose());
}

DomainBoundary DomainBoundary::origin_ball(double R, int d) {
  if (!(R > 0.0)) throw ConstructionError("origin_ball: R must be positive");
  DomainBoundary b;
  b.kind = DomainKind::OriginBall;
  b.d = d;
  b.R = R;
  b.center = Vec::Zero(d);
  return b;
}

DomainBoundary DomainBoundary::offset_ball(Vec center, double R) {
  if (!(R > 0.0)) throw ConstructionError("offset_ball: R must be positive");
  DomainBoundary b;
  b.kind = DomainKind::OffsetBall;
  b.d = (int)center.size();
  b.R = R;
  b.center = std::move(center);
  return b;
}

DomainBoundary DomainBoundary::radial_graph(std::vector<double> rho, int d,
                                            Vec center) {
  if (d != 2 && d != 3)
    throw ConstructionError("radial_graph: d must be 2 or 3");
  if (rho.size() < 16)
    throw ConstructionError("radial_graph: too few samples");
  for (double v : rho)
    if (!(v > 0.0))
      throw ConstructionError("radial_graph: rho must be positive everywhere");
  DomainBoundary b;
  b.kind = DomainKind::RadialGraph;
  b.d = d;
  b.rho = std::move(rho);
  b.center = center.size() == d ? center : Vec::Zero(d);
  b.R = *std::max_element(b.rho.begin(), b.rho.end());
  return b;
}

RhoJet rho_eval(const DomainBoundary& b, double theta) {
  if (b.kind != DomainKind::RadialGraph)
    throw DomainError("rho_eval: boundary is not a RadialGraph");
  const double h = graph_h(b);
  if (b.d == 2) {
    theta = std::fmod(theta, 2.0 * kPi);
    if (theta < 0) theta += 2.0 * kPi;
  }
  long long j0 = (long long)std::floor(theta / h) - 2;
  double y[5];
  for (int i = 0; i < 5; ++i) y[i] = rho_sample(b, j0 + i);
  const double u = theta / h - (double)j0;
  RhoJet jet;
  double p, dp, d2p;
  lagrange5(u, y, p, dp, d2p);
  jet.rho = p;
  jet.drho = dp / h;
  jet.d2rho = d2p / (h * h);
  return jet;
}

MeridianPoint meridian_point(const DomainBoundary& b, double theta) {
  MeridianPoint out;
  if (b.kind == DomainKind::OriginBall || b.kind == DomainKind::OffsetBall) {
    const Vec a = axis_of(b);
    Mat fr = tangent_frame(a);
    const Vec e = fr.col(0);
    const Vec omega = std::cos(theta) * a + std::sin(theta) * e;
    out.x = (b.kind == DomainKind::OriginBall ? Vec(Vec::Zero(b.d)) : b.center) +
            b.R * omega;
    out.nu = omega;
    out.kappa_meridian = out.kappa_azimuthal = 1.0 / b.R;
    out.lambda_min_ii = 1.0 / b.R;
    return out;
  }

  const RhoJet j = rho_eval(b, theta);
  const double s2 = sq(j.rho) + sq(j.drho);
  const double s = std::sqrt(s2);
  const double km = (sq(j.rho) + 2.0 * sq(j.drho) - j.rho * j.d2rho) / (s * s2);
  out.kappa_meridian = km;

  if (b.d == 2) {
    const double ct = std::cos(theta), st = std::sin(theta);
    Vec omega(2), omth(2);
    omega << ct, st;
    omth << -st, ct;
    out.x = b.center + j.rho * omega;
    out.nu = (j.rho * omega - j.drho * omth) / s;
    out.lambda_min_ii = km;
    return out;
  }

  const double ct = std::cos(theta), st = std::sin(theta);
  Vec omega(3), omth(3);
  omega << st, 0.0, ct;
  omth << ct, 0.0, -st;
  out.x = b.center + j.rho * omega;
  out.nu = (j.rho * omega - j.drho * omth) / s;
  if (std::abs(st) < 1e-7) {
    check_pole_smoothness(b, ct > 0.0);
    const double k_umb = (j.rho - j.d2rho) / sq(j.rho);
    out.kappa_meridian = out.kappa_azimuthal = k_umb;
    out.lambda_min_ii = k_umb;
    return out;
  }
  out.kappa_azimuthal = (j.rho * st - j.drho * ct) / (j.rho * s * st);
  out.lambda_min_ii = std::min(out.kappa_meridian, out.kappa_azimuthal);
  return out;
}

Mat tangent_frame(const Vec& nu) {
  const int d = (int)nu.size();
  Vec w = nu.normalized();
  const double sign = w(d - 1) >= 0.0 ? 1.0 : -1.0;
  w(d - 1) += sign;
  const double wn2 = w.squaredNorm();
  if (wn2 < 1e-30)
    throw DegenerateFrameError("tangent_frame: degenerate normal");
  Mat h = Mat::Identity(d, d) - 2.0 / wn2 * w * w.transpose();
  return h.leftCols(d - 1);
}

SurfacePointData surface_data(const DomainBoundary& b, const Vec& omega_in) {
  if ((int)omega_in.size() != b.d)
    throw DomainError("surface_data: parameter dimension mismatch");
  const double on = omega_in.norm();
  if (on < 1e-14)
    throw DomainError("surface_data: zero direction parameter");
  const Vec omega = omega_in / on;

  SurfacePointData out;
  if (b.kind == DomainKind::OriginBall || b.kind == DomainKind::OffsetBall) {
    const Vec c = b.kind == DomainKind::OriginBall ? Vec(Vec::Zero(b.d)) : b.center;
    out.x = c + b.R * omega;
    out.nu = omega;
    out.frame = tangent_frame(omega);
    out.ii = Mat::Identity(b.d - 1, b.d - 1) / b.R;
    return out;
  }

  if (b.d == 2) {
    const double theta = std::atan2(omega(1), omega(0));
    MeridianPoint mp = meridian_point(b, theta);
    out.x = mp.x;
    out.nu = mp.nu;
    out.frame = Mat(2, 1);
    out.frame << -mp.nu(1), mp.nu(0);
    out.ii = Mat::Constant(1, 1, mp.kappa_meridian);
    return out;
  }

  const double theta = std::acos(std::clamp(omega(2), -1.0, 1.0));
  const double st = std::sin(theta);
  const RhoJet j = rho_eval(b, theta);
  const double s = std::sqrt(sq(j.rho) + sq(j.drho));

  if (st < 1e-7) {
    check_pole_smoothness(b, omega(2) > 0.0);
    const double k_umb = (j.rho - j.d2rho) / sq(j.rho);
    Vec pole = Vec::Zero(3);
    pole(2) = omega(2) >= 0.0 ? 1.0 : -1.0;
    out.x = b.center + j.rho * pole;
    out.nu = pole;
    out.frame = tangent_frame(pole);
    out.ii = k_umb * Mat::Identity(2, 2);
    return out;
  }

  const double cphi = omega(0) / st, sphi = omega(1) / st;
  const double ct = std::cos(theta);
  Vec om(3), omth(3), eph(3);
  om << st * cphi, st * sphi, ct;
  omth << ct * cphi, ct * sphi, -st;
  eph << -sphi, cphi, 0.0;

  out.x = b.center + j.rho * om;
  out.nu = (j.rho * om - j.drho * omth) / s;
  Vec e1 = (j.drho * om + j.rho * omth) / s;
  out.frame = Mat(3, 2);
  out.frame.col(0) = e1;
  out.frame.col(1) = eph;
  if (std::abs(e1.dot(eph)) > 1e-9 || e1.norm() < 1e-9)
    throw DegenerateFrameError("surface_data: tangent frame degenerate");

  const double km = (sq(j.rho) + 2.0 * sq(j.drho) - j.rho * j.d2rho) /
                    (s * (sq(j.rho) + sq(j.drho)));
  const double ka = (j.rho * st - j.drho * ct) / (j.rho * s * st);
  out.ii = Mat::Zero(2, 2);
  out.ii(0, 0) = km;
  out.ii(1, 1) = ka;
  return out;
}

namespace {

double margin_at(const DomainBoundary& b, double alpha, double theta) {
  MeridianPoint mp = meridian_point(b, theta);
  const double r2 = mp.x.squaredNorm();
  return mp.lambda_min_ii - (1.0 - alpha) * mp.x.dot(mp.nu) / r2;
}

void check_origin_not_on_boundary(const DomainBoundary& b) {
  if (b.kind == DomainKind::OriginBall || b.kind == DomainKind::OffsetBall) {
    const double c = b.kind == DomainKind::OriginBall ? 0.0 : b.center.norm();
    if (std::abs(c - b.R) <= 1e-12 * std::max(1.0, b.R))
      throw OriginOnBoundaryError(
          "condition_margin: the origin lies on the boundary");
    return;
  }
  const int n = (int)b.rho.size();
  double scale = b.R;
  for (int i = 0; i < n; ++i) {
    const double th = (b.d == 2) ? 2.0 * kPi * i / n : kPi * i / (n - 1.0);
    MeridianPoint mp = meridian_point(b, th);
    if (mp.x.norm() <= 1e-9 * scale)
      throw OriginOnBoundaryError(
          "condition_margin: the origin lies on the boundary");
  }
}

}  // namespace

MarginReport condition_margin(const DomainBoundary& b, double alpha,
                              int sampling) {
  check_origin_not_on_boundary(b);
  const bool periodic = (b.kind == DomainKind::RadialGraph && b.d == 2);
  const double lo = 0.0;
  const double hi = periodic ? 2.0 * kPi : kPi;
  const int n = std::max(sampling, 64);

  double best = kInf, best_th = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = periodic ? lo + (hi - lo) * i / n
                               : lo + (hi - lo) * i / (n - 1.0);
    const double m = margin_at(b, alpha, th);
    if (m < best) {
      best = m;
      best_th = th;
    }
  }

  double step = (hi - lo) / (periodic ? n : (n - 1));
  double a0 = best_th - step, b0 = best_th + step;
  for (int round = 0; round < 6; ++round) {
    const int k = 41;
    double rb = kInf, rt = best_th;
    for (int i = 0; i < k; ++i) {
      double th = a0 + (b0 - a0) * i / (k - 1.0);
      if (!periodic) th = std::clamp(th, lo, hi);
      const double m = margin_at(b, alpha, th);
      if (m < rb) {
        rb = m;
        rt = th;
      }
    }
    if (rb < best) {
      best = rb;
      best_th = rt;
    }
    const double w = (b0 - a0) / (k - 1.0);
    a0 = best_th - w;
    b0 = best_th + w;
  }

  MarginReport rep;
  rep.min_margin = best;
  rep.argmin_theta = best_th;
  rep.argmin = meridian_point(b, best_th).x;
  return rep;
}

bool ball_criterion(double x0_norm, double R, double alpha) {
  if (!(R > 0.0)) throw DomainError("ball_criterion: R must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("ball_criterion: alpha must be in (0, 1]");
  if (!(x0_norm >= 0.0))
    throw DomainError("ball_criterion: x0_norm must be nonnegative");
  if (x0_norm == R)
    throw DomainError("ball_criterion: the origin lies on the boundary");
  return x0_norm <= alpha * R || x0_norm > R;
}

Mat conformal_ii(const Mat& ii, const Vec& x, const Vec& nu, double alpha) {
  const double r = x.norm();
  if (r == 0.0) throw OriginError("conformal_ii: singular at x = 0");
  const int m = (int)ii.rows();
  return std::pow(r, alpha - 1.0) *
         (ii + (alpha - 1.0) * x.dot(nu) / (r * r) * Mat::Identity(m, m));
}

bool is_g_convex(const DomainBoundary& b, double alpha, int sampling) {
  check_origin_not_on_boundary(b);
  const bool periodic = (b.kind == DomainKind::RadialGraph && b.d == 2);
  const double hi = periodic ? 2.0 * kPi : kPi;
  const int n = std::max(sampling, 64);
  for (int i = 0; i < n; ++i) {
    const double th = periodic ? hi * i / n : hi * i / (n - 1.0);
    MeridianPoint mp = meridian_point(b, th);
    Mat ii = (b.d == 2) ? Mat::Constant(1, 1, mp.kappa_meridian)
                        : Mat((Mat(2, 2) << mp.kappa_meridian, 0.0, 0.0,
                               mp.kappa_azimuthal)
                                  .finished());
    Mat cii = conformal_ii(ii, mp.x, mp.nu, alpha);
    Eigen::SelfAdjointEigenSolver<Mat> es(cii);
    const double lmin = es.eigenvalues().minCoeff();
    if (lmin < -1e-8 * (1.0 + cii.norm())) return false;
  }
  return true;
}

namespace {

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// Degree-4 interpolation through 5 non-uniform nodes.
double interp5_nonuniform(const std::vector<double>& xs,
                          const std::vector<double>& ys, double x) {
  const int n = (int)xs.size();
  int j = (int)(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
  int lo = std::clamp(j - 2, 0, n - 5);
  double p = 0.0;
  for (int i = 0; i < 5; ++i) {
    double li = 1.0;
    for (int k = 0; k < 5; ++k) {
      if (k == i) continue;
      li *= (x - xs[lo + k]) / (xs[lo + i] - xs[lo + k]);
    }
    p += ys[lo + i] * li;
  }
  return p;
}

// Convex flattened profile about the ball centre via a support-function
// construction in the meridian plane: the radius-of-curvature function
// rc(tau) >= 0 (tau = normal angle from the south direction) integrates to a
// closed convex curve; the spherical part has rc = R, the flattened cap a
// concentrated bump whose mass is fixed by the closure constraint.
std::vector<double> flattened_rho_samples(const ExampleDomainConfig& cfg,
                                          int samples) {
  const double R = cfg.R, psi0 = cfg.cap_angle;
  const double band = 0.25 * psi0;
  const double w0 = psi0 / 3.0;
  const int M = 1 << 17;
  std::vector<double> tau(M + 1), rc_bump(M + 1), rc_step(M + 1);
  for (int i = 0; i <= M; ++i) {
    tau[i] = kPi * i / M;
    rc_bump[i] = std::exp(-sq(tau[i] / w0));
    rc_step[i] = R * smoothstep5((tau[i] - (psi0 - band)) / band);
  }
  auto integral_cos = [&](const std::vector<double>& f) {
    double s = 0.0;
    for (int i = 0; i < M; ++i) {
      const double h = tau[i + 1] - tau[i];
      s += 0.5 * h *
           (f[i] * std::cos(tau[i]) + f[i + 1] * std::cos(tau[i + 1]));
    }
    return s;
  };
  const double bump_amp = -integral_cos(rc_step) / integral_cos(rc_bump);
  if (!(bump_amp > 0.0))
    throw ConstructionError("flattened ball: closure constraint failed");

  std::vector<double> rc(M + 1), sprof(M + 1), zprof(M + 1);
  for (int i = 0; i <= M; ++i) rc[i] = rc_step[i] + bump_amp * rc_bump[i];
  sprof[0] = 0.0;
  zprof[0] = 0.0;
  for (int i = 0; i < M; ++i) {
    const double h = tau[i + 1] - tau[i];
    sprof[i + 1] = sprof[i] + 0.5 * h * (rc[i] * std::cos(tau[i]) +
                                         rc[i + 1] * std::cos(tau[i + 1]));
    zprof[i + 1] = zprof[i] + 0.5 * h * (rc[i] * std::sin(tau[i]) +
                                         rc[i + 1] * std::sin(tau[i + 1]));
  }
  // Recentre on the spherical part: centre = north pole minus R upward.
  const double zc = zprof[M] - R;

  // theta measured from the world +z axis; the modified cap sits at theta
  // near pi (south). theta(tau) decreases from pi to 0.
  std::vector<double> theta_desc(M + 1), rho_desc(M + 1);
  for (int i = 0; i <= M; ++i) {
    const double zz = zprof[i] - zc;
    theta_desc[i] = std::atan2(sprof[i], zz);
    rho_desc[i] = std::hypot(sprof[i], zz);
  }
  // atan2(s, z) with s >= 0 gives values in [0, pi]; profile runs from the
  // south pole (theta = pi) to the north pole (theta = 0).
  std::vector<double> theta_asc(M + 1), rho_asc(M + 1);
  for (int i = 0; i <= M; ++i) {
    theta_asc[i] = theta_desc[M - i];
    rho_asc[i] = rho_desc[M - i];
  }
  theta_asc[0] = 0.0;
  theta_asc[M] = kPi;

  std::vector<double> rho(samples);
  for (int i = 0; i < samples; ++i) {
    const double th = kPi * i / (samples - 1.0);
    rho[i] = interp5_nonuniform(theta_asc, rho_asc, th);
  }
  return rho;
}

}  // namespace

DomainBoundary example_domain(ExampleDomainKind kind,
                              const ExampleDomainConfig& cfg) {
  const int N = cfg.samples;

  if (kind == ExampleDomainKind::PerturbedOriginBall) {
    std::vector<double> rho(N);
    for (int i = 0; i < N; ++i) {
      const double th = kPi * i / (N - 1.0);
      const double p = 0.6 * std::cos(2.0 * th) + 0.4 * std::cos(3.0 * th);
      rho[i] = cfg.R * (1.0 + cfg.epsilon * p);
    }
    return DomainBoundary::radial_graph(std::move(rho), 3, Vec::Zero(3));
  }

  if (!(cfg.m > cfg.R))
    throw ConstructionError("example_domain: requires m > R (origin outside)");
  if (!(std::cos(cfg.cap_angle) > cfg.R / cfg.m))
    throw ConstructionError(
        "example_domain: cap too wide, x.nu < 0 fails on part of the cap");

  std::vector<double> rho = flattened_rho_samples(cfg, N);
  if (kind == ExampleDomainKind::OffOriginDimpledBall) {
    const double w = cfg.cap_angle / 2.2;
    for (int i = 0; i < N; ++i) {
      const double th = kPi * i / (N - 1.0);
      rho[i] *= 1.0 - cfg.epsilon * std::exp(-sq((kPi - th) / w));
    }
  }
  Vec c = Vec::Zero(3);
  c(2) = cfg.m;
  DomainBoundary b = DomainBoundary::radial_graph(std::move(rho), 3, c);

  // The construction is only accepted if x.nu stays uniformly negative on the
  // modified cap and the margin computation is grid-converged.
  const double c0 = cfg.R - cfg.m * std::cos(cfg.cap_angle);
  for (int i = 0; i < 513; ++i) {
    const double th = kPi - cfg.cap_angle + cfg.cap_angle * i / 512.0;
    MeridianPoint mp = meridian_point(b, th);
    if (!(mp.x.dot(mp.nu) <= 0.5 * c0))
      throw ConstructionError(
          "example_domain: perturbation breaks x.nu <= c0 < 0 on the cap");
  }
  if (N % 2 == 1) {
    DomainBoundary bc = b;
    std::vector<double> coarse((N - 1) / 2 + 1);
    for (size_t i = 0; i < coarse.size(); ++i) coarse[i] = b.rho[2 * i];
    bc.rho = std::move(coarse);
    const double m_fine = condition_margin(b, cfg.alpha, 1024).min_margin;
    const double m_coarse = condition_margin(bc, cfg.alpha, 1024).min_margin;
    if (std::abs(m_fine - m_coarse) > 1e-4 * (1.0 + std::abs(m_fine)))
      throw ConstructionError(
          "example_domain: curvature sampling is not grid-converged");
  }
  return b;
}

DomainBoundary radial_graph_from_csv(const std::string& path, int d,
                                     Vec center) {
  std::ifstream in(path);
  if (!in) throw ConfigError("radial_graph_from_csv: cannot open " + path);
  std::string line;
  std::vector<double> thetas, rhos;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    std::string c1, c2, c3;
    ss >> c1 >> c2;
    if (ss >> c3)
      throw ConfigError(
          "radial_graph_from_csv: a phi column is not supported; expected "
          "columns (theta, rho)");
    if (first && (c1 == "theta" || c1 == "Theta")) {
      first = false;
      continue;
    }
    first = false;
    try {
      thetas.push_back(std::stod(c1));
      rhos.push_back(std::stod(c2));
    } catch (const std::exception&) {
      throw ConfigError("radial_graph_from_csv: malformed row '" + line + "'");
    }
  }
  const int n = (int)rhos.size();
  if (n < 16) throw ConfigError("radial_graph_from_csv: too few samples");
  for (int i = 0; i < n; ++i) {
    const double expect = (d == 2) ? 2.0 * kPi * i / n : kPi * i / (n - 1.0);
    if (std::abs(thetas[i] - expect) > 1e-9)
      throw ConfigError(
          "radial_graph_from_csv: theta grid does not match the documented "
          "uniform convention");
  }
  return DomainBoundary::radial_graph(std::move(rhos), d, std::move(center));
}

void radial_graph_to_csv(const DomainBoundary& b, const std::string& path) {
  if (b.kind != DomainKind::RadialGraph)
    throw DomainError("radial_graph_to_csv: boundary is not a RadialGraph");
  std::ostringstream out;
  out << "theta,rho\n";
  const int n = (int)b.rho.size();
  char buf[80];
  for (int i = 0; i < n; ++i) {
    const double th = (b.d == 2) ? 2.0 * kPi * i / n : kPi * i / (n - 1.0);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", th, b.rho[i]);
    out << buf;
  }
  atomic_write_text(path, out.str());
}

}  // namespace ckn
