#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ckn/common.hpp"

namespace ckn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// -------------------------------------------------------------------------
// Conformal transform T(x) = |x|^{alpha-1} x and the metric
// g_ij = delta_ij + (1/alpha^2 - 1) x_i x_j / |x|^2.
// -------------------------------------------------------------------------

Vec map_T(const Vec& x, double alpha);
Vec map_T_inverse(const Vec& y, double alpha);

struct MetricData {
  Mat g;
  Mat g_inv;
  double sqrt_det = 0.0;
};

MetricData metric_at(const Vec& x, double alpha);

// Christoffel contraction Gamma^k(X, X) of the metric g at x.
Vec christoffel_quad(const Vec& x, double alpha, const Vec& X);

// Jacobian of T at x: |x|^{alpha-1} (I + (alpha-1) xhat xhat^T).
Mat dT_jacobian(const Vec& x, double alpha);

// -------------------------------------------------------------------------
// Boundaries
// -------------------------------------------------------------------------

enum class DomainKind { OriginBall, OffsetBall, RadialGraph };

// RadialGraph stores rho sampled uniformly in the polar angle about the
// reference point `center`:
//   d = 3: axisymmetric surface of revolution, theta_i = i*pi/(N-1)
//   d = 2: closed curve, theta_i = 2*pi*i/N (periodic)
struct DomainBoundary {
  DomainKind kind = DomainKind::OriginBall;
  int d = 3;
  double R = 1.0;
  Vec center;
  std::vector<double> rho;

  static DomainBoundary origin_ball(double R, int d = 3);
  static DomainBoundary offset_ball(Vec center, double R);
  static DomainBoundary radial_graph(std::vector<double> rho, int d = 3,
                                     Vec center = Vec());
};

struct SurfacePointData {
  Vec x;
  Vec nu;       // unit outward normal (Euclidean)
  Mat ii;       // (d-1)x(d-1), orthonormal tangent frame, spheres > 0
  Mat frame;    // columns: the d-1 tangent vectors
};

// rho and two derivatives at an arbitrary angle (RadialGraph only).
struct RhoJet {
  double rho = 0.0;
  double drho = 0.0;
  double d2rho = 0.0;
};
RhoJet rho_eval(const DomainBoundary& b, double theta);

// omega: unit direction parameter in S^{d-1}. For balls the surface point is
// center + R*omega; for a RadialGraph it is center + rho(theta)*omega with
// theta the polar angle of omega.
SurfacePointData surface_data(const DomainBoundary& b, const Vec& omega);

// Meridian section data for axisymmetric boundaries at polar angle theta:
// both principal curvatures, the surface point, and the outward normal.
struct MeridianPoint {
  Vec x;
  Vec nu;
  double kappa_meridian = 0.0;
  double kappa_azimuthal = 0.0;   // unused for d = 2
  double lambda_min_ii = 0.0;
};
MeridianPoint meridian_point(const DomainBoundary& b, double theta);

struct MarginReport {
  double min_margin = 0.0;
  Vec argmin;
  double argmin_theta = 0.0;
};

// min over the boundary of lambda_min(ii) - (1-alpha)(x.nu)/|x|^2.
MarginReport condition_margin(const DomainBoundary& b, double alpha,
                              int sampling = 2048);

bool ball_criterion(double x0_norm, double R, double alpha);

// |x|^{alpha-1} (ii + (alpha-1)(x.nu)/|x|^2 I): second fundamental form of
// T(boundary) at T(x), in the pull-back pairing on the preimage tangent frame.
Mat conformal_ii(const Mat& ii, const Vec& x, const Vec& nu, double alpha);

bool is_g_convex(const DomainBoundary& b, double alpha, int sampling = 2048);

inline bool is_euclidean_convex(const DomainBoundary& b, int sampling = 2048) {
  return is_g_convex(b, 1.0, sampling);
}

enum class ExampleDomainKind {
  OffOriginFlattenedBall,
  OffOriginDimpledBall,
  PerturbedOriginBall,
};

// Construction parameters for the example family: a ball of radius R centred
// at (0, ..., 0, m) with m > R (so the origin lies strictly outside), whose
// cap facing the origin (where x.nu <= c0 < 0) is flattened or dimpled.
struct ExampleDomainConfig {
  double R = 1.0;
  double m = 2.0;
  double cap_angle = 0.9;      // polar half-angle (from the south pole) of the modified cap
  double epsilon = 0.03;       // dimple depth / origin-ball perturbation amplitude
  double alpha = 0.5;          // the condition is validated for this alpha at construction
  int samples = 4097;
};

DomainBoundary example_domain(ExampleDomainKind kind,
                              const ExampleDomainConfig& cfg = {});

// CSV interface: columns "theta,rho" on the documented uniform angle grid.
DomainBoundary radial_graph_from_csv(const std::string& path, int d = 3,
                                     Vec center = Vec());
void radial_graph_to_csv(const DomainBoundary& b, const std::string& path);

// Orthonormal completion: columns form an orthonormal basis of the
// complement of the unit vector nu.
Mat tangent_frame(const Vec& nu);

}  // namespace ckn
