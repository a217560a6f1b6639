#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ckn/common.hpp"
#include "ckn/params.hpp"

namespace ckn {

// Radial profile of the weighted problem on a ball of radius R:
//   (r^{d-1-2a} u')' = -r^{d-1-bq} f(u),  F(r) = r^{d-1-2a} u'(r).
// Samples live on a merged grid (uniform in r plus uniform in log r) so both
// bulk quadrature and origin asymptotics are resolved.
struct RadialSolution {
  CknParameters params;
  NonlinearitySpec spec;
  double R = 1.0;
  double u0 = 1.0;
  double eps0 = 0.0;    // series start radius
  double du_R = 0.0;    // u'(R)
  double u_max_cap = 0.0;

  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> du;
  std::vector<double> F;

  double eval_u(double radius) const;
  double eval_du(double radius) const;
  // u'' from the ODE itself: u'' = -(d-1-2a) u'/r - r^{2a-bq} f(u).
  double eval_ddu(double radius) const;

  double oscillation() const;  // max u - min u over samples
  double mean_u() const;
  bool constant_within(double rel_tol) const;
};

struct ShootOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int n_uniform = 2049;
  int n_log = 257;
  double eps0_factor = 1e-6;   // eps0 = eps0_factor * R
  double u_max_override = 0.0; // 0 means automatic cap
  bool store_samples = true;
};

RadialSolution shoot(const CknParameters& params, const NonlinearitySpec& spec,
                     double R, double u0, const ShootOptions& opt = {});

// Independent quadrature oracle for the weighted flux:
// F(radius) = -int_0^radius t^{d-1-bq} f(u(t)) dt from the stored samples.
double flux_from_quadrature(const RadialSolution& sol, double radius);

// Largest positive zero of f found by a log-grid scan with bisection.
std::vector<double> positive_zeros(const NonlinearitySpec& spec,
                                   double t_lo = 1e-4, double t_hi = 1e4);

struct GateRecord {
  RegimeReport regime;
  PhiMonotonicity phi;
  bool phi_non_increasing = true;
  bool fs_symmetric = true;
  bool gates_ok = true;
};

struct ScanHit {
  double u0_root = 0.0;
  double du_R = 0.0;
  bool constant = true;
  double oscillation = 0.0;
  RadialSolution sol;
};

struct ScanResult {
  std::vector<ScanHit> hits;  // ordered by u0_root
  GateRecord gates;
  std::vector<double> u0_grid;
  std::vector<double> shoot_du;  // u'(R; u0) over the grid
};

ScanResult scan_solutions(const CknParameters& params,
                          const NonlinearitySpec& spec, double R,
                          double u0_min, double u0_max, int grid_points,
                          const ShootOptions& opt = {},
                          double bisect_tol = 1e-10);

// phi(s) = r^{a_c - a} u(r) at s = -log r, uniform s grid.
struct EmdenFowlerProfile {
  std::vector<double> s;
  std::vector<double> phi;
  double lambda_ef = 0.0;
};

struct RadialProfile {
  std::vector<double> r;
  std::vector<double> u;
};

EmdenFowlerProfile ef_transform(const RadialSolution& sol, int ns = 257);

RadialProfile ef_inverse(const EmdenFowlerProfile& prof,
                         const CknParameters& params);

// Nodewise residual of -phi'' + Lambda phi - Phi(u) phi^{(n+2)/(n-2)} with
// u = e^{(a_c-a)s} phi. Edge nodes (no centered stencil) hold NaN.
std::vector<double> ef_residual(const EmdenFowlerProfile& prof,
                                const CknParameters& params,
                                const NonlinearitySpec& spec);

// Least-squares slope of -log phi against s over a window of the s range.
double ef_decay_rate(const EmdenFowlerProfile& prof, double window_lo = 0.55,
                     double window_hi = 0.95);

// v(rho) = u(rho^{1/alpha})^{-2/(n-2)} with exact chain-rule derivatives.
struct TransformedRadial {
  std::shared_ptr<const RadialSolution> sol;
  double R_tilde = 1.0;  // R^alpha

  double u_at(double rho) const;
  double v(double rho) const;
  double dv(double rho) const;
  double ddv(double rho) const;
};

TransformedRadial transform_chain(const RadialSolution& sol);

struct ExponentFit {
  double exponent = 0.0;
  double log_coeff = 0.0;
  bool identically_zero = false;
  bool pass = false;
};

struct AsymptoticsReport {
  std::array<ExponentFit, 4> items;
  double ef_decay = 0.0;
  double sqrt_lambda = 0.0;
  bool decay_pass = false;
  bool items_pass = false;
  bool fs_symmetric = true;
  std::vector<double> radii;
};

AsymptoticsReport check_asymptotics(const RadialSolution& sol,
                                    double slack = 0.3);

// Same four origin estimates for an axisymmetric field u(r, theta) given as a
// callable on the original coordinates; the transform chain is applied
// internally.
AsymptoticsReport check_asymptotics_axisym(
    const CknParameters& params,
    const std::function<double(double, double)>& u_eval, double R,
    double slack = 0.3, int nr = 4097, int nt = 129);

void solution_to_csv(const RadialSolution& sol, const std::string& path);
void scan_to_csv(const ScanResult& result, const std::string& path);

}  // namespace ckn
