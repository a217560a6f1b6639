#include "ckn/params.hpp"

#include <cmath>
#include <sstream>

namespace ckn {

CknParameters derive_parameters(int d, double a, double b) {
  std::ostringstream msg;
  if (d < 3) {
    msg << "admissibility requires d >= 3, got d = " << d;
    throw AdmissibilityError(msg.str());
  }
  const double a_c = 0.5 * d - 1.0;
  if (!(a <= b)) {
    msg << "admissibility clause 'a <= b' fails: a = " << a << ", b = " << b;
    throw AdmissibilityError(msg.str());
  }
  if (!(b < a + 1.0)) {
    msg << "admissibility clause 'b < a + 1' fails: a = " << a << ", b = " << b;
    throw AdmissibilityError(msg.str());
  }
  if (!(a < a_c)) {
    msg << "admissibility clause 'a < a_c' fails: a = " << a
        << ", a_c = " << a_c;
    throw AdmissibilityError(msg.str());
  }

  CknParameters p;
  p.d = d;
  p.a = a;
  p.b = b;
  p.a_c = a_c;
  const double s = 1.0 + a - b;  // in (0, 1]
  p.q = 2.0 * d / (d - 2.0 * s);
  p.n = d / s;
  p.alpha = s * (a_c - a) / (a_c - a + b);
  p.alpha_fs = std::sqrt((d - 1.0) / (p.n - 1.0));
  p.lambda_ef = sq(a - a_c);
  return p;
}

RegimeReport classify_regime(const CknParameters& p) {
  RegimeReport r;
  r.alpha_fs = p.alpha_fs;
  r.strong_threshold = std::sqrt((p.d - 2.0) / (p.n - 2.0));
  r.fs_symmetric = p.alpha <= r.alpha_fs;
  r.strong = p.alpha < r.strong_threshold;
  return r;
}

double NonlinearitySpec::f(double t) const {
  if (!(t > 0.0)) throw DomainError("nonlinearity evaluation requires t > 0");
  double s = 0.0;
  for (const auto& term : terms) s += term.coeff * std::pow(t, term.exponent);
  return s;
}

double NonlinearitySpec::f_prime(double t) const {
  if (!(t > 0.0)) throw DomainError("nonlinearity evaluation requires t > 0");
  double s = 0.0;
  for (const auto& term : terms) {
    if (term.exponent != 0.0)
      s += term.coeff * term.exponent * std::pow(t, term.exponent - 1.0);
  }
  return s;
}

NonlinearitySpec NonlinearitySpec::one_minus_power(double p) {
  NonlinearitySpec s;
  s.terms = {{1.0, 0.0}, {-1.0, p}};
  s.name = "one_minus_power(" + std::to_string(p) + ")";
  return s;
}

NonlinearitySpec NonlinearitySpec::power_minus_linear(double p, double mu) {
  NonlinearitySpec s;
  s.terms = {{1.0, p}, {-mu, 1.0}};
  s.name = "power_minus_linear(" + std::to_string(p) + "," +
           std::to_string(mu) + ")";
  return s;
}

NonlinearitySpec NonlinearitySpec::generalized(std::vector<PowerTerm> terms,
                                               std::string name) {
  NonlinearitySpec s;
  s.terms = std::move(terms);
  s.name = std::move(name);
  return s;
}

NonlinearityValues eval_nonlinearity(const NonlinearitySpec& spec,
                                     const CknParameters& p, double t) {
  if (!(t > 0.0)) throw DomainError("eval_nonlinearity requires t > 0");
  NonlinearityValues out;
  out.f = spec.f(t);
  out.f_prime = spec.f_prime(t);
  const double c = p.crit_exponent();
  const double tc = std::pow(t, -c);
  out.phi = out.f * tc;
  out.phi_prime = out.f_prime * tc - c * out.f * tc / t;
  return out;
}

PhiMonotonicity phi_monotonicity(const NonlinearitySpec& spec,
                                 const CknParameters& p, double t_lo,
                                 double t_hi, int samples, double tolerance) {
  if (!(0.0 < t_lo && t_lo < t_hi))
    throw DomainError("phi_monotonicity requires 0 < t_lo < t_hi");
  if (samples < 2) samples = 2;
  PhiMonotonicity out;
  for (int i = 0; i < samples; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / (samples - 1);
    const auto v = eval_nonlinearity(spec, p, t);
    if (v.phi_prime > tolerance) {
      out.non_increasing = false;
      out.violated_at = t;
      return out;
    }
  }
  return out;
}

double hat_f(const NonlinearitySpec& spec, const CknParameters& p, double v) {
  if (!(v > 0.0)) throw DomainError("hat_f requires v > 0");
  const double m = 0.5 * (p.n - 2.0);
  return 2.0 / (p.n - 2.0) * spec.f(std::pow(v, -m)) * std::pow(v, 0.5 * p.n);
}

}  // namespace ckn
