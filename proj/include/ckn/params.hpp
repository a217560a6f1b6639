#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ckn/common.hpp"

namespace ckn {

// Derived constants of the weighted problem div(|x|^{-2a} Du) + |x|^{-bq} f(u) = 0.
struct CknParameters {
  int d = 3;
  double a = 0.0;
  double b = 0.0;
  double a_c = 0.5;       // d/2 - 1
  double q = 6.0;         // 2d / (d - 2(1+a-b))
  double n = 3.0;         // d / (1+a-b), the effective dimension (n >= d)
  double alpha = 1.0;     // (1+a-b)(a_c-a) / (a_c-a+b)
  double alpha_fs = 1.0;  // sqrt((d-1)/(n-1)), the symmetry-breaking threshold
  double lambda_ef = 0.25;  // (a - a_c)^2

  double crit_exponent() const { return (n + 2.0) / (n - 2.0); }
};

struct RegimeReport {
  bool fs_symmetric = false;  // alpha <= alpha_fs
  bool strong = false;        // alpha < sqrt((d-2)/(n-2))
  double alpha_fs = 0.0;
  double strong_threshold = 0.0;
};

struct PowerTerm {
  double coeff = 0.0;
  double exponent = 0.0;  // real exponent; evaluation only for t > 0
};

// f(t) = sum_i coeff_i * t^{exponent_i}, C^1 on (0, infinity).
struct NonlinearitySpec {
  std::vector<PowerTerm> terms;
  std::string name = "custom";

  double f(double t) const;
  double f_prime(double t) const;

  static NonlinearitySpec one_minus_power(double p);
  static NonlinearitySpec power_minus_linear(double p, double mu);
  static NonlinearitySpec generalized(std::vector<PowerTerm> terms,
                                      std::string name = "generalized");
};

struct NonlinearityValues {
  double f = 0.0;
  double f_prime = 0.0;
  double phi = 0.0;
  double phi_prime = 0.0;
};

struct PhiMonotonicity {
  bool non_increasing = true;
  std::optional<double> violated_at;  // first sampled t with phi'(t) > tolerance
};

CknParameters derive_parameters(int d, double a, double b);

RegimeReport classify_regime(const CknParameters& p);

// phi(t) = f(t) * t^{-(n+2)/(n-2)} and its analytic derivative.
NonlinearityValues eval_nonlinearity(const NonlinearitySpec& spec,
                                     const CknParameters& p, double t);

PhiMonotonicity phi_monotonicity(const NonlinearitySpec& spec,
                                 const CknParameters& p, double t_lo,
                                 double t_hi, int samples,
                                 double tolerance = 1e-12);

// hat_f(v) = (2/(n-2)) f(v^{-(n-2)/2}) v^{n/2}.
double hat_f(const NonlinearitySpec& spec, const CknParameters& p, double v);

}  // namespace ckn
