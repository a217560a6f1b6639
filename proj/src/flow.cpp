#include "ckn/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ckn/fields.hpp"
#include "ckn/geometry.hpp"
#include "ckn/io.hpp"
#include "json.hpp"

namespace ckn {

namespace {

constexpr double kPi = 3.14159265358979323846;

// (hi^{p+1} - lo^{p+1}) / (p+1); every call site has p + 1 > 0.
double power_integral(double lo, double hi, double p) {
  const double e = p + 1.0;
  return (std::pow(hi, e) - std::pow(lo, e)) / e;
}

const char* domain_kind_name(FlowDomainKind k) {
  switch (k) {
    case FlowDomainKind::OriginBall: return "OriginBall";
    case FlowDomainKind::OffsetBall: return "OffsetBall";
    case FlowDomainKind::Annulus: return "Annulus";
  }
  return "?";
}

struct Assembly {
  Eigen::SparseMatrix<double> A;  // weighted stiffness, zero row and column sums
  Eigen::VectorXd m;              // lumped |x|^{-bq} mass per node
};

Assembly assemble(const CknParameters& P, const FlowDomain& dom,
                  const AxiPolarGrid& g) {
  const int N = g.size();
  const double a2 = 2.0 * P.a;
  const double bq = P.b * P.q;
  const bool centered = dom.kind != FlowDomainKind::OffsetBall;
  const double c = centered ? 0.0 : dom.offset;
  const double r2_floor = 1e-12 * g.R * g.R;

  auto cell_r = [&](int i, double& rl, double& ru) {
    rl = std::max(g.r0, g.r(i) - 0.5 * g.hr);
    ru = std::min(g.R, g.r(i) + 0.5 * g.hr);
  };
  auto band_S = [&](int j) {
    const double tl = std::max(0.0, g.theta(j) - 0.5 * g.ht);
    const double tu = std::min(kPi, g.theta(j) + 0.5 * g.ht);
    return std::cos(tl) - std::cos(tu);
  };
  auto true_r2 = [&](double r, double theta) {
    return std::max(r * r + c * c + 2.0 * r * c * std::cos(theta), r2_floor);
  };

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(8) * N);
  auto add_face = [&](int p, int q, double coeff) {
    trip.emplace_back(p, p, coeff);
    trip.emplace_back(q, q, coeff);
    trip.emplace_back(p, q, -coeff);
    trip.emplace_back(q, p, -coeff);
  };

  for (int i = 0; i + 1 < g.nr; ++i) {
    const double rf = g.r0 + (i + 0.5) * g.hr;
    for (int j = 0; j < g.nt; ++j) {
      const double S = band_S(j);
      const double w = centered
          ? std::pow(rf, 2.0 - a2) * S
          : std::pow(true_r2(rf, g.theta(j)), -P.a) * rf * rf * S;
      add_face(g.idx(i, j), g.idx(i + 1, j), w / g.hr);
    }
  }
  for (int i = 0; i < g.nr; ++i) {
    double rl, ru;
    cell_r(i, rl, ru);
    for (int j = 0; j + 1 < g.nt; ++j) {
      const double tf = (j + 0.5) * g.ht;
      const double w = centered
          ? std::sin(tf) * power_integral(rl, ru, -a2)
          : std::sin(tf) * std::pow(true_r2(g.r(i), tf), -P.a) * (ru - rl);
      add_face(g.idx(i, j), g.idx(i, j + 1), w / g.ht);
    }
  }

  Assembly out;
  out.A.resize(N, N);
  out.A.setFromTriplets(trip.begin(), trip.end());
  out.m.resize(N);
  for (int i = 0; i < g.nr; ++i) {
    double rl, ru;
    cell_r(i, rl, ru);
    for (int j = 0; j < g.nt; ++j) {
      const double S = band_S(j);
      out.m[g.idx(i, j)] = centered
          ? S * power_integral(rl, ru, 2.0 - bq)
          : S * std::pow(true_r2(g.r(i), g.theta(j)), -0.5 * bq) *
                (ru * ru * ru - rl * rl * rl) / 3.0;
    }
  }
  return out;
}

// Steady-state residual of the final field in the u_t form
//   |x|^{bq-2a} (Lap u - 2a (x . Du)/|x|^2) + f(u),
// which is the model's time derivative, evaluated with the wide polar jets
// and scaled by the stiffness of the problem (reaction rate at the mean, or
// diffusion over the domain size).
double steady_residual(const CknParameters& P, const NonlinearitySpec& spec,
                       const FlowDomain& dom, const AxiPolarGrid& g,
                       const std::vector<double>& u) {
  if (g.nr < 6 || g.nt < 5) return 0.0;
  ScalarField v;
  v.polar = &g;
  v.values = u;
  const double a2 = 2.0 * P.a;
  const double bq = P.b * P.q;
  const double c = dom.kind == FlowDomainKind::OffsetBall ? dom.offset : 0.0;
  const double r2_floor = 1e-12 * g.R * g.R;

  double maxu = 0.0, sum = 0.0;
  for (double x : u) {
    maxu = std::max(maxu, std::abs(x));
    sum += x;
  }
  const double mean = sum / static_cast<double>(u.size());
  const double L = std::max(g.R - g.r0, 0.5 * g.R);
  double scale = std::max(maxu / (L * L),
                          std::abs(spec.f_prime(mean)) * std::abs(mean));
  scale = std::max(scale, std::abs(spec.f(mean))) + 1e-300;

  double worst = 0.0;
  for (int i = 2; i <= g.nr - 3; ++i) {
    const double r = g.r(i);
    for (int j = 1; j <= g.nt - 2; ++j) {
      const PolarDerivs D = polar_derivs(v, i, j);
      const double th = g.theta(j);
      const double ct = std::cos(th), st = std::sin(th);
      const double lap =
          D.vrr + 2.0 * D.vr / r + (D.vtt + (ct / st) * D.vt) / (r * r);
      const double xdot = r * D.vr + c * (ct * D.vr - st * D.vt / r);
      const double r2t =
          std::max(r * r + c * c + 2.0 * r * c * ct, r2_floor);
      const double res = std::pow(r2t, 0.5 * (bq - a2)) *
                             (lap - a2 * xdot / r2t) +
                         spec.f(D.v);
      worst = std::max(worst, std::abs(res));
    }
  }
  return worst / scale;
}

}  // namespace

FlowDomain FlowDomain::origin_ball(double R) {
  if (!(R > 0.0)) throw ConstructionError("flow domain: R must be positive");
  FlowDomain d;
  d.kind = FlowDomainKind::OriginBall;
  d.R = R;
  return d;
}

FlowDomain FlowDomain::offset_ball(double R, double offset) {
  if (!(R > 0.0)) throw ConstructionError("flow domain: R must be positive");
  if (!(offset >= 0.0))
    throw ConstructionError("flow domain: offset must be nonnegative");
  if (std::abs(offset - R) <= 1e-12 * R)
    throw OriginOnBoundaryError(
        "flow domain: weight origin on the ball boundary");
  FlowDomain d;
  d.kind = FlowDomainKind::OffsetBall;
  d.R = R;
  d.offset = offset;
  return d;
}

FlowDomain FlowDomain::annulus(double r_in, double R) {
  if (!(r_in > 0.0) || !(R > r_in))
    throw ConstructionError("flow domain: need 0 < r_in < R");
  FlowDomain d;
  d.kind = FlowDomainKind::Annulus;
  d.R = R;
  d.r_in = r_in;
  return d;
}

double FlowDomain::weight_r2(double r, double theta) const {
  if (kind != FlowDomainKind::OffsetBall) return r * r;
  return r * r + offset * offset + 2.0 * r * offset * std::cos(theta);
}

AxiPolarGrid flow_grid(const FlowDomain& dom, int nr, int nt) {
  if (nr < 8 || nt < 5)
    throw ConstructionError("flow_grid: need nr >= 8 and nt >= 5");
  const double r0 = dom.kind == FlowDomainKind::Annulus ? dom.r_in : 0.0;
  return AxiPolarGrid::make(r0, dom.R, nr, nt);
}

const char* to_string(FlowClass c) {
  switch (c) {
    case FlowClass::Constant: return "Constant";
    case FlowClass::Pattern: return "Pattern";
    case FlowClass::NotConverged: return "NotConverged";
  }
  return "?";
}

FlowClass classify_state(double oscillation, double mean, double du_dt_norm,
                         double exit_tol) {
  if (!(du_dt_norm <= exit_tol)) return FlowClass::NotConverged;
  const double m = std::max(mean, 1e-300);
  if (oscillation <= kConstantOscFrac * m) return FlowClass::Constant;
  if (oscillation > kPatternOscFrac * m) return FlowClass::Pattern;
  return FlowClass::NotConverged;
}

FlowGates flow_gates(const CknParameters& P, const NonlinearitySpec& spec,
                     const FlowDomain& dom, double t_lo, double t_hi) {
  FlowGates gg;
  gg.regime = classify_regime(P);
  gg.fs_symmetric = gg.regime.fs_symmetric;
  t_lo = std::max(1e-9, t_lo);
  t_hi = std::max(t_hi, 2.0 * t_lo);
  gg.phi = phi_monotonicity(spec, P, t_lo, t_hi, 512);
  gg.phi_non_increasing = gg.phi.non_increasing;
  if (dom.kind == FlowDomainKind::Annulus) {
    gg.condition_margin = std::numeric_limits<double>::quiet_NaN();
    gg.condition_ok = false;
  } else {
    DomainBoundary b;
    if (dom.kind == FlowDomainKind::OriginBall) {
      b = DomainBoundary::origin_ball(dom.R, 3);
    } else {
      Vec center(3);
      center << 0.0, 0.0, dom.offset;
      b = DomainBoundary::offset_ball(center, dom.R);
    }
    const MarginReport mr = condition_margin(b, P.alpha, 512);
    gg.condition_margin = mr.min_margin;
    gg.condition_ok = mr.min_margin >= 0.0;
  }
  gg.gates_ok = gg.phi_non_increasing && gg.fs_symmetric && gg.condition_ok;
  return gg;
}

ScalarField FlowResult::field() const {
  ScalarField v;
  v.polar = &grid;
  v.values = u;
  v.positive = std::all_of(u.begin(), u.end(), [](double x) { return x > 0; });
  return v;
}

FlowResult evolve(const CknParameters& P, const NonlinearitySpec& spec,
                  const FlowDomain& dom, const ScalarField& init, double t_max,
                  const FlowDtPolicy& policy) {
  if (P.d != 3) throw DomainError("flow: only d = 3 axisymmetric evolution");
  if (!(t_max > 0.0)) throw ConfigError("flow: t_max must be positive");
  if (!(policy.dt0 > 0.0) || !(policy.dt_max >= policy.dt0) ||
      !(policy.growth >= 1.0) || !(policy.exit_tol > 0.0))
    throw ConfigError("flow: invalid dt policy");
  if (init.polar == nullptr)
    throw ConstructionError("flow: initial field must live on a polar grid");
  const AxiPolarGrid g = *init.polar;
  const double want_r0 = dom.kind == FlowDomainKind::Annulus ? dom.r_in : 0.0;
  const double tol_geom = 1e-12 * std::max(1.0, dom.R);
  if (std::abs(g.r0 - want_r0) > tol_geom || std::abs(g.R - dom.R) > tol_geom)
    throw DomainError("flow: initial grid does not match the domain");
  if (g.nr < 8 || g.nt < 5)
    throw ConstructionError("flow: grid too coarse, need nr >= 8, nt >= 5");
  for (double x : init.values)
    if (!(x > 0.0))
      throw PositivityError("flow: initial field must be positive");

  const Assembly as = assemble(P, dom, g);
  const int N = g.size();
  Eigen::VectorXd u =
      Eigen::Map<const Eigen::VectorXd>(init.values.data(), N);
  const Eigen::VectorXd& m = as.m;

  FlowResult out;
  out.params = P;
  out.spec = spec;
  out.domain = dom;
  out.grid = g;
  out.t_max = t_max;
  out.policy = policy;
  out.weighted_mass_initial = m.dot(u);

  const double mn0 = u.minCoeff();
  const double mx0 = u.maxCoeff();
  out.gates = flow_gates(P, spec, dom, 0.5 * mn0, 2.0 * mx0 + 1.0);

  out.comparison_applicable = true;
  for (int s = 0; s <= 200; ++s) {
    const double t = mn0 + (mx0 - mn0) * s / 200.0;
    if (spec.f(t) > 1e-12) {
      out.comparison_applicable = false;
      break;
    }
  }
  double running_max = mx0;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool analyzed = false;
  double dt_fact = -1.0;
  auto refactor = [&](double dtv) {
    Eigen::SparseMatrix<double> B = as.A;
    Eigen::SparseMatrix<double> D(N, N);
    std::vector<Eigen::Triplet<double>> dts;
    dts.reserve(N);
    for (int p = 0; p < N; ++p) dts.emplace_back(p, p, m[p] / dtv);
    D.setFromTriplets(dts.begin(), dts.end());
    B += D;
    if (!analyzed) {
      ldlt.analyzePattern(B);
      analyzed = true;
    }
    ldlt.factorize(B);
    if (ldlt.info() != Eigen::Success)
      throw ConstructionError("flow: factorization failed");
    dt_fact = dtv;
  };

  double dt = std::min(policy.dt0, t_max);
  double elapsed = 0.0;
  double du_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  Eigen::VectorXd f(N), rhs(N), unew(N);

  while (elapsed < t_max * (1.0 - 1e-15) &&
         out.steps + out.rejections < policy.max_steps) {
    const double dts = std::min(dt, t_max - elapsed);
    if (dts != dt_fact) refactor(dts);
    for (int p = 0; p < N; ++p) f[p] = spec.f(u[p]);
    rhs = m.cwiseProduct(u / dts + f);
    unew = ldlt.solve(rhs);

    const double jump = (unew - u).lpNorm<Eigen::Infinity>();
    const bool ok = unew.allFinite() && unew.minCoeff() > 0.0 &&
                    jump <= policy.max_jump *
                                std::max(1.0, u.lpNorm<Eigen::Infinity>());
    if (!ok) {
      ++out.rejections;
      if (dt <= 2.0 * policy.dt_min)
        throw StiffnessError("flow: dt collapsed after repeated rejections");
      dt = std::max(policy.dt_min, 0.5 * dt);
      continue;
    }

    // The balance sum(m du/dt) = sum(m f) is exact for this scheme in exact
    // arithmetic; the floating-point residual floor is set by the linear
    // solve, whose terms have magnitude (m/dt)|u|, so those belong in the
    // scale even though the difference u^+ - u can be far smaller.
    const double lhs_mass = m.dot(unew - u) / dts;
    const double rhs_mass = m.dot(f);
    const double flux_abs = (as.A * unew).cwiseAbs().sum();
    const double mass_scale =
        m.cwiseAbs().dot(unew.cwiseAbs() + u.cwiseAbs()) / dts +
        m.cwiseProduct(f.cwiseAbs()).sum() + flux_abs + 1e-300;
    out.mass_residual_max = std::max(
        out.mass_residual_max, std::abs(lhs_mass - rhs_mass) / mass_scale);

    du_norm = jump / dts;
    if (out.comparison_applicable) {
      const double mx = unew.maxCoeff();
      if (mx > running_max * (1.0 + 1e-12) + 1e-12) out.comparison_ok = false;
      running_max = std::max(running_max, mx);
    }
    u.swap(unew);
    elapsed += dts;
    ++out.steps;
    if (du_norm <= policy.exit_tol) {
      converged = true;
      break;
    }
    if (dt < policy.dt_max) dt = std::min(policy.dt_max, dt * policy.growth);
  }

  out.elapsed = elapsed;
  out.dt_final = dt_fact;
  out.du_dt_norm = du_norm;
  out.converged = converged;
  out.u.assign(u.data(), u.data() + N);
  out.weighted_mass_final = m.dot(u);
  const double msum = m.sum();
  out.mean = out.weighted_mass_final / msum;
  out.oscillation = u.maxCoeff() - u.minCoeff();
  out.classification =
      classify_state(out.oscillation, out.mean, du_norm, policy.exit_tol);
  out.elliptic_residual = steady_residual(P, spec, dom, out.grid, out.u);
  return out;
}

ScalarField seeded_init(const AxiPolarGrid& grid, std::uint64_t seed,
                        double amp, double base) {
  if (!(base > 0.0)) throw PositivityError("seeded_init: base must be positive");
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  double c[9];
  for (double& ci : c) ci = U(rng);
  const double span = std::max(grid.R - grid.r0, 1e-300);
  auto w = [&](double r, double theta) {
    const double s = (r - grid.r0) / span;
    const double x = std::cos(theta);
    return c[0] * std::cos(kPi * s) + c[1] * std::cos(2.0 * kPi * s) +
           c[2] * s * s + x * (c[3] + c[4] * std::cos(kPi * s)) +
           (x * x - 1.0 / 3.0) * (c[5] + c[6] * s) + c[7] * x * x * x +
           c[8] * std::sin(kPi * s) * x;
  };
  double wmax = 0.0;
  for (int i = 0; i < grid.nr; ++i)
    for (int j = 0; j < grid.nt; ++j)
      wmax = std::max(wmax, std::abs(w(grid.r(i), grid.theta(j))));
  const double norm = wmax > 0.0 ? amp / wmax : 0.0;
  return sample_polar(
      grid,
      [&](double r, double theta) {
        return std::max(base * (1.0 + norm * w(r, theta)), 0.05 * base);
      },
      true);
}

std::vector<SweepCell> sweep_grid(
    const std::vector<std::pair<double, double>>& ab,
    const std::vector<FlowDomain>& domains,
    const std::vector<NonlinearitySpec>& specs,
    const std::vector<std::uint64_t>& seeds, double t_max, double init_amp) {
  std::vector<SweepCell> cells;
  for (const auto& [a, b] : ab)
    for (const FlowDomain& dom : domains)
      for (const NonlinearitySpec& spec : specs)
        for (std::uint64_t seed : seeds) {
          SweepCell cell;
          cell.a = a;
          cell.b = b;
          cell.domain = dom;
          cell.spec = spec;
          cell.t_max = t_max;
          cell.seed = seed;
          cell.init_amp = init_amp;
          cells.push_back(std::move(cell));
        }
  return cells;
}

std::vector<FlowResult> sweep(const SweepConfig& config) {
  std::vector<FlowResult> rows;
  rows.reserve(config.cells.size());
  for (const SweepCell& cell : config.cells) {
    const CknParameters P = derive_parameters(3, cell.a, cell.b);
    const AxiPolarGrid g = flow_grid(cell.domain, config.nr, config.nt);
    const ScalarField init =
        seeded_init(g, cell.seed, cell.init_amp, cell.init_base);
    FlowResult r = evolve(P, cell.spec, cell.domain, init, cell.t_max,
                          config.policy);
    r.init_seed = cell.seed;
    rows.push_back(std::move(r));
  }
  return rows;
}

ConsistencyReport no_pattern_consistency(const std::vector<FlowResult>& rows) {
  ConsistencyReport rep;
  rep.rows = static_cast<long>(rows.size());
  for (const FlowResult& r : rows) {
    const bool pattern = r.classification == FlowClass::Pattern;
    if (pattern) ++rep.patterns;
    if (r.gates.gates_ok) ++rep.gates_ok_rows;
    if (pattern && r.gates.gates_ok) ++rep.violations;
  }
  rep.consistent = rep.violations == 0;
  return rep;
}

std::string flow_record_json(const FlowResult& r) {
  KeyValueConfig cfg;
  cfg.set("d", "3");
  cfg.set("a", format_g17(r.params.a));
  cfg.set("b", format_g17(r.params.b));
  cfg.set("spec.name", r.spec.name);
  for (size_t k = 0; k < r.spec.terms.size(); ++k)
    cfg.set("spec.term" + std::to_string(k),
            format_g17(r.spec.terms[k].coeff) + "*t^" +
                format_g17(r.spec.terms[k].exponent));
  cfg.set("domain.kind", domain_kind_name(r.domain.kind));
  cfg.set("domain.R", format_g17(r.domain.R));
  cfg.set("domain.r_in", format_g17(r.domain.r_in));
  cfg.set("domain.offset", format_g17(r.domain.offset));
  cfg.set("grid.nr", std::to_string(r.grid.nr));
  cfg.set("grid.nt", std::to_string(r.grid.nt));
  cfg.set("t_max", format_g17(r.t_max));
  cfg.set("dt.dt0", format_g17(r.policy.dt0));
  cfg.set("dt.dt_max", format_g17(r.policy.dt_max));
  cfg.set("dt.growth", format_g17(r.policy.growth));
  cfg.set("dt.exit_tol", format_g17(r.policy.exit_tol));
  cfg.set("init_seed", std::to_string(r.init_seed));

  auto jnum = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  };
  nlohmann::json j{
      {"version", kVersion},
      {"config_hash", config_hash_hex(cfg)},
      {"params",
       {{"d", r.params.d},
        {"a", r.params.a},
        {"b", r.params.b},
        {"n", r.params.n},
        {"q", r.params.q},
        {"alpha", r.params.alpha}}},
      {"spec", r.spec.name},
      {"domain",
       {{"kind", domain_kind_name(r.domain.kind)},
        {"R", r.domain.R},
        {"r_in", r.domain.r_in},
        {"offset", r.domain.offset}}},
      {"grid", {{"nr", r.grid.nr}, {"nt", r.grid.nt}}},
      {"t_max", r.t_max},
      {"init_seed", r.init_seed},
      {"elapsed", r.elapsed},
      {"steps", r.steps},
      {"rejections", r.rejections},
      {"converged", r.converged},
      {"du_dt_norm", jnum(r.du_dt_norm)},
      {"oscillation", r.oscillation},
      {"mean", r.mean},
      {"mass_residual_max", r.mass_residual_max},
      {"elliptic_residual", r.elliptic_residual},
      {"classification", to_string(r.classification)},
      {"comparison_applicable", r.comparison_applicable},
      {"comparison_ok", r.comparison_ok},
      {"gates",
       {{"phi_non_increasing", r.gates.phi_non_increasing},
        {"fs_symmetric", r.gates.fs_symmetric},
        {"condition_margin", jnum(r.gates.condition_margin)},
        {"condition_ok", r.gates.condition_ok},
        {"gates_ok", r.gates.gates_ok}}}};
  return j.dump();
}

void append_run_record(const std::string& path, const FlowResult& r) {
  append_line(path, flow_record_json(r));
}

}  // namespace ckn
