#pragma once

// Differential-geometric operators for the degenerate radial metric
// g = I + (1/alpha^2 - 1) xhat xhat^T: g-gradient, the weighted operator
//   L v = |x|^{d-n} div_g(|x|^{n-d} grad_g v),
// the covariant Hessian, the curvature correction terms, and the curvature
// functional
//   k[v] = |Hess_g v|_g^2 + ric + h_weight - (L v)^2 / n.
//
// Pointwise kernels take exact derivative jets; grid front ends feed them
// with 4th-order centered finite differences.

#include <Eigen/Dense>

#include "ckn/grids.hpp"
#include "ckn/params.hpp"

namespace ckn {

using Mat = Eigen::MatrixXd;

// Derivative jet of an axisymmetric field v(r, theta), d = 3.
struct PolarDerivs {
  double v = 0, vr = 0, vt = 0, vrr = 0, vrt = 0, vtt = 0;
};

// Euclidean derivative jet of v at a point x in R^d.
struct CartDerivs {
  double v = 0;
  Vec grad;
  Mat hess;
};

struct PointValues {
  double v = 0;        // field value
  double norm_sq = 0;  // |grad_g v|_g^2
  double Lv = 0;       // L v
  double hess2 = 0;    // |Hess_g v|_g^2
  double ric = 0;      // radial Ricci correction
  double h_weight = 0; // weight-Hessian correction
  double k = 0;        // hess2 + ric + h_weight - Lv^2/n
};

struct CurvatureTerms {
  double ric = 0;
  double h_weight = 0;
};

// Exact pointwise kernels. The polar kernel assumes d = 3 and handles the
// symmetry-axis limit cot(theta)*vt -> vtt; the Cartesian kernel works for
// any d matching x.size().
PointValues k_point_polar(const CknParameters& P, double r, double theta,
                          const PolarDerivs& D);
PointValues k_point_cart(const CknParameters& P, const Vec& x, const CartDerivs& D);

// Curvature corrections from the position and the g-gradient vector (the
// pairing grad.x is Euclidean, the deficit uses the Euclidean norm of the
// g-gradient; the convention is pinned by k[c + r^2/(alpha^2 lambda)] = 0).
CurvatureTerms curvature_terms(const CknParameters& P, const Vec& x, const Vec& grad_g);

// Axisymmetric polar jet -> Euclidean jet at the meridian point
// x = (r sin(theta), 0, r cos(theta)). Exact for smooth axisymmetric fields.
void axisym_to_cartesian(double r, double theta, const PolarDerivs& D,
                         Vec& x, CartDerivs& out);

// g-gradient algebra from Euclidean derivatives.
Vec grad_g_from_euclid(const Vec& x, double alpha, const Vec& grad_e);
double norm_sq_g_from_euclid(const Vec& x, double alpha, const Vec& grad_e);
Mat covariant_hessian(const Vec& x, double alpha, const Vec& grad_e, const Mat& hess_e);
double hess_norm_sq_g(const Vec& x, double alpha, const Mat& cov_hess);
double laplace_g(const Vec& x, double alpha, const Mat& cov_hess);

// Finite-difference jets. The annulus jet needs the reach-2 box around the
// node; the polar jet needs 2 <= i <= nr - 3 and reflects across the theta
// endpoints. Both throw StencilOutOfRange when the stencil does not fit.
CartDerivs annulus_derivs(const ScalarField& v, int node);
PolarDerivs polar_derivs(const ScalarField& v, int i, int j);

// Grid front ends (annulus unless stated otherwise).
Vec grad_g_at(const CknParameters& P, const ScalarField& v, int node);
double norm_sq_g_at(const CknParameters& P, const ScalarField& v, int node);
Mat hessian_g_at(const CknParameters& P, const ScalarField& v, int node);
double op_L_at(const CknParameters& P, const ScalarField& v, int node);
PointValues point_values_at(const CknParameters& P, const ScalarField& v, int node);
double op_L_polar_at(const CknParameters& P, const ScalarField& v, int i, int j);
PointValues point_values_polar_at(const CknParameters& P, const ScalarField& v, int i, int j);

// Whole-field operators; nodes whose stencil does not fit hold NaN.
ScalarField op_L(const CknParameters& P, const ScalarField& v);
ScalarField k_functional(const CknParameters& P, const ScalarField& v);

}  // namespace ckn
