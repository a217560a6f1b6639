// cknlab: batch front door for the weighted Neumann laboratory.
//
// Commands: params, check-domain, solve-radial, verify-identity <which>,
// flow, sweep. Configuration comes from a key=value (or JSON) file plus the
// --config/--out/--seed/--refine flags; every artifact carries the version
// string and a hash of the effective configuration, and all files are
// written atomically. Exit status: 0 pass, 2 verdict fail, 1 error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ckn/fields.hpp"
#include "ckn/flow.hpp"
#include "ckn/geometry.hpp"
#include "ckn/grids.hpp"
#include "ckn/identities.hpp"
#include "ckn/io.hpp"
#include "ckn/params.hpp"
#include "ckn/radial.hpp"
#include "json.hpp"

using namespace ckn;
using nlohmann::json;

namespace {

struct Ctx {
  KeyValueConfig cfg;
  std::string out_dir = "out";
  std::string hash;
  int refine = 0;
  std::uint64_t seed = 2026;

  double num(const std::string& key, double dflt) const {
    return cfg.get_num(key, dflt);
  }
  int integer(const std::string& key, int dflt) const {
    return cfg.get_int(key, dflt);
  }
  std::string str(const std::string& key, const std::string& dflt) const {
    return cfg.get_str(key, dflt);
  }
};

std::string out_path(const Ctx& ctx, const std::string& name) {
  return ctx.out_dir + "/" + name;
}

void write_json_artifact(const Ctx& ctx, const std::string& name, json j) {
  j["version"] = kVersion;
  j["config_hash"] = ctx.hash;
  atomic_write_text(out_path(ctx, name), j.dump(2) + "\n");
}

// Rewrites a CSV produced by a module writer with the stamp line prepended.
void stamp_csv(const Ctx& ctx, const std::string& path) {
  const std::string body = read_text_file(path);
  atomic_write_text(path, "# version=" + std::string(kVersion) +
                              " config_hash=" + ctx.hash + "\n" + body);
}

CknParameters params_from(const Ctx& ctx) {
  return derive_parameters(ctx.integer("params.d", 3),
                           ctx.num("params.a", 0.25),
                           ctx.num("params.b", 0.3));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur += ch;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

double parse_number(const std::string& field, const std::string& text) {
  try {
    size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config field '" + field + "': expected a number, got '" +
                      text + "'");
  }
}

// kind(:arg)* forms: one_minus_power:5, power_minus_linear:5:1, zero,
// custom:<c>*t^<e>(;<c>*t^<e>)*
NonlinearitySpec parse_spec_token(const std::string& field,
                                  const std::string& token) {
  const std::vector<std::string> bits = split(token, ':');
  if (bits.empty()) throw ConfigError("config field '" + field + "': empty spec");
  const std::string& kind = bits[0];
  if (kind == "one_minus_power")
    return NonlinearitySpec::one_minus_power(
        bits.size() > 1 ? parse_number(field, bits[1]) : 5.0);
  if (kind == "power_minus_linear")
    return NonlinearitySpec::power_minus_linear(
        bits.size() > 1 ? parse_number(field, bits[1]) : 5.0,
        bits.size() > 2 ? parse_number(field, bits[2]) : 1.0);
  if (kind == "zero") return NonlinearitySpec::generalized({}, "zero");
  if (kind == "custom") {
    if (bits.size() < 2)
      throw ConfigError("config field '" + field + "': custom needs terms");
    std::vector<PowerTerm> terms;
    for (const std::string& term : split(bits[1], ';')) {
      const auto star = term.find("*t^");
      if (star == std::string::npos)
        throw ConfigError("config field '" + field + "': term '" + term +
                          "' is not of the form c*t^e");
      terms.push_back({parse_number(field, term.substr(0, star)),
                       parse_number(field, term.substr(star + 3))});
    }
    return NonlinearitySpec::generalized(std::move(terms), "custom");
  }
  throw ConfigError("config field '" + field + "': unknown nonlinearity '" +
                    kind + "'");
}

NonlinearitySpec spec_from(const Ctx& ctx) {
  const std::string kind = ctx.str("nonlinearity.kind", "one_minus_power");
  if (kind == "one_minus_power")
    return NonlinearitySpec::one_minus_power(ctx.num("nonlinearity.p", 5.0));
  if (kind == "power_minus_linear")
    return NonlinearitySpec::power_minus_linear(ctx.num("nonlinearity.p", 5.0),
                                                ctx.num("nonlinearity.mu", 1.0));
  if (kind == "zero" || kind == "custom")
    return parse_spec_token("nonlinearity.kind",
                            kind == "zero"
                                ? kind
                                : kind + ":" +
                                      ctx.str("nonlinearity.terms",
                                              "1*t^0;-1*t^5"));
  throw ConfigError("config field 'nonlinearity.kind': unknown kind '" + kind +
                    "'");
}

// origin_ball:<R>, offset_ball:<R>:<offset>, annulus:<r_in>:<R>
FlowDomain parse_domain_token(const std::string& field,
                              const std::string& token) {
  const std::vector<std::string> bits = split(token, ':');
  if (bits.empty())
    throw ConfigError("config field '" + field + "': empty domain");
  const std::string& kind = bits[0];
  if (kind == "origin_ball")
    return FlowDomain::origin_ball(
        bits.size() > 1 ? parse_number(field, bits[1]) : 1.0);
  if (kind == "offset_ball")
    return FlowDomain::offset_ball(
        bits.size() > 1 ? parse_number(field, bits[1]) : 1.0,
        bits.size() > 2 ? parse_number(field, bits[2]) : 0.0);
  if (kind == "annulus")
    return FlowDomain::annulus(
        bits.size() > 1 ? parse_number(field, bits[1]) : 0.5,
        bits.size() > 2 ? parse_number(field, bits[2]) : 1.5);
  throw ConfigError("config field '" + field + "': unknown domain kind '" +
                    kind + "'");
}

FlowDomain flow_domain_from(const Ctx& ctx) {
  const std::string kind = ctx.str("domain.kind", "origin_ball");
  if (kind == "origin_ball")
    return FlowDomain::origin_ball(ctx.num("domain.R", 1.0));
  if (kind == "offset_ball")
    return FlowDomain::offset_ball(ctx.num("domain.R", 1.0),
                                   ctx.num("domain.offset", 0.0));
  if (kind == "annulus")
    return FlowDomain::annulus(ctx.num("domain.r_in", 0.5),
                               ctx.num("domain.R", 1.0));
  throw ConfigError("config field 'domain.kind': unknown kind '" + kind + "'");
}

FlowDtPolicy dt_policy_from(const Ctx& ctx) {
  FlowDtPolicy p;
  p.dt0 = ctx.num("flow.dt0", p.dt0);
  p.dt_max = ctx.num("flow.dt_max", p.dt_max);
  p.growth = ctx.num("flow.growth", p.growth);
  p.exit_tol = ctx.num("flow.exit_tol", p.exit_tol);
  return p;
}

// Manufactured positive annulus field: a fixed bank of smooth modes with
// seed-drawn coefficients, bounded away from zero.
CartSampler random_cart_field(std::uint64_t seed, double amp) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<double> c(6);
  for (double& ci : c) ci = U(rng);
  return [c, amp](const Vec& x) {
    const double r = x.norm();
    const double ct = r > 0 ? x[x.size() - 1] / r : 0.0;
    const double w = c[0] * std::sin(1.1 * r) * ct +
                     c[1] * std::cos(0.8 * r) * ct * ct + c[2] * r * r * ct +
                     c[3] * std::sin(r) * std::sin(r) * ct * ct * ct +
                     c[4] * r * r * r + c[5] * std::cos(2.0 * r);
    return 2.0 + amp * w;
  };
}

int report_exit(bool verdict) { return verdict ? 0 : 2; }

int cmd_params(const Ctx& ctx) {
  const CknParameters P = params_from(ctx);
  const RegimeReport regime = classify_regime(P);
  json j{{"d", P.d},
         {"a", P.a},
         {"b", P.b},
         {"a_c", P.a_c},
         {"q", P.q},
         {"n", P.n},
         {"alpha", P.alpha},
         {"alpha_fs", P.alpha_fs},
         {"lambda", P.lambda_ef},
         {"sqrt_lambda", std::sqrt(P.lambda_ef)},
         {"fs_symmetric", regime.fs_symmetric},
         {"strong", regime.strong},
         {"strong_threshold", regime.strong_threshold}};
  write_json_artifact(ctx, "params.json", j);
  std::printf(
      "params: PASS d=%d a=%g b=%g | alpha=%.12g n=%.12g q=%.12g "
      "fs_symmetric=%s strong=%s\n",
      P.d, P.a, P.b, P.alpha, P.n, P.q, regime.fs_symmetric ? "yes" : "no",
      regime.strong ? "yes" : "no");
  return 0;
}

int cmd_check_domain(const Ctx& ctx) {
  const CknParameters P = params_from(ctx);
  const std::string kind = ctx.str("domain.kind", "origin_ball");
  const double R = ctx.num("domain.R", 1.0);
  const double offset = ctx.num("domain.offset", 0.0);
  const int sampling = ctx.integer("domain.sampling", 2048);

  DomainBoundary b;
  if (kind == "origin_ball") {
    b = DomainBoundary::origin_ball(R, P.d);
  } else if (kind == "offset_ball") {
    Vec center = Vec::Zero(P.d);
    center[P.d - 1] = offset;
    b = DomainBoundary::offset_ball(center, R);
  } else {
    throw ConfigError("config field 'domain.kind': check-domain needs "
                      "origin_ball or offset_ball, got '" + kind + "'");
  }

  const MarginReport margin = condition_margin(b, P.alpha, sampling);
  const bool crit = ball_criterion(offset, R, P.alpha);
  const bool gconv = is_g_convex(b, P.alpha, sampling);
  const bool pass = margin.min_margin >= 0.0;

  json j{{"domain", kind},
         {"R", R},
         {"offset", offset},
         {"alpha", P.alpha},
         {"condition_margin", margin.min_margin},
         {"argmin_theta", margin.argmin_theta},
         {"ball_criterion", crit},
         {"g_convex", gconv},
         {"pass", pass}};
  write_json_artifact(ctx, "check_domain.json", j);
  std::printf("check-domain: %s margin=%.9g ball_criterion=%s g_convex=%s\n",
              pass ? "PASS" : "FAIL", margin.min_margin, crit ? "yes" : "no",
              gconv ? "yes" : "no");
  return report_exit(pass);
}

int cmd_solve_radial(const Ctx& ctx) {
  const CknParameters P = params_from(ctx);
  const NonlinearitySpec spec = spec_from(ctx);
  const double R = ctx.num("radial.R", 1.0);
  ShootOptions opt;
  opt.n_uniform = ctx.integer("radial.samples", opt.n_uniform);
  for (int k = 0; k < ctx.refine; ++k) opt.n_uniform = 2 * opt.n_uniform - 1;

  const std::string mode = ctx.str("radial.mode", "shoot");
  if (mode == "shoot") {
    const double u0 = ctx.num("radial.u0", 1.0);
    const RadialSolution sol = shoot(P, spec, R, u0, opt);
    const AsymptoticsReport asym = check_asymptotics(sol);
    const std::string csv = out_path(ctx, "radial_profile.csv");
    solution_to_csv(sol, csv);
    stamp_csv(ctx, csv);
    json j{{"mode", "shoot"},
           {"u0", u0},
           {"R", R},
           {"du_R", sol.du_R},
           {"oscillation", sol.oscillation()},
           {"mean_u", sol.mean_u()},
           {"ef_decay", asym.ef_decay},
           {"sqrt_lambda", asym.sqrt_lambda},
           {"decay_pass", asym.decay_pass},
           {"items_pass", asym.items_pass}};
    write_json_artifact(ctx, "radial.json", j);
    std::printf("solve-radial: PASS u0=%g du_R=%.6g osc=%.6g ef_decay=%.6g\n",
                u0, sol.du_R, sol.oscillation(), asym.ef_decay);
    return 0;
  }
  if (mode == "scan") {
    const double lo = ctx.num("radial.u0_min", 0.05);
    const double hi = ctx.num("radial.u0_max", 20.0);
    const int pts = ctx.integer("radial.scan_points", 128);
    const ScanResult scan = scan_solutions(P, spec, R, lo, hi, pts, opt);
    const std::string csv = out_path(ctx, "radial_scan.csv");
    scan_to_csv(scan, csv);
    stamp_csv(ctx, csv);
    json hits = json::array();
    for (const ScanHit& h : scan.hits)
      hits.push_back({{"u0_root", h.u0_root},
                      {"constant", h.constant},
                      {"oscillation", h.oscillation}});
    json j{{"mode", "scan"},
           {"u0_min", lo},
           {"u0_max", hi},
           {"grid_points", pts},
           {"hits", hits},
           {"phi_non_increasing", scan.gates.phi_non_increasing},
           {"fs_symmetric", scan.gates.fs_symmetric},
           {"gates_ok", scan.gates.gates_ok}};
    write_json_artifact(ctx, "radial.json", j);
    std::printf("solve-radial: PASS scan hits=%zu gates_ok=%s\n",
                scan.hits.size(), scan.gates.gates_ok ? "yes" : "no");
    return 0;
  }
  throw ConfigError("config field 'radial.mode': expected shoot or scan, got '" +
                    mode + "'");
}

int cmd_verify_identity(const Ctx& ctx, const std::string& which) {
  const CknParameters P = params_from(ctx);
  const auto refine = [&](double h) {
    for (int k = 0; k < ctx.refine; ++k) h *= 0.5;
    return h;
  };

  if (which == "lemma22") {
    AnnulusSpec sp{3, ctx.num("identity.r_min", 0.75),
                   ctx.num("identity.r_max", 1.75),
                   refine(ctx.num("identity.h", 1.0 / 16.0))};
    const std::string field = ctx.str("identity.field", "random");
    CartSampler v;
    if (field == "random") {
      v = random_cart_field(ctx.seed, ctx.num("identity.amp", 0.1));
    } else if (field == "quadratic") {
      const double c = ctx.num("identity.c", 0.7);
      const double lam = ctx.num("identity.lambda", 5.0);
      const double a2 = P.alpha * P.alpha;
      v = [c, lam, a2](const Vec& x) {
        return c + x.squaredNorm() / (a2 * lam);
      };
    } else if (field == "constant") {
      v = [](const Vec&) { return 1.0; };
    } else {
      throw ConfigError("config field 'identity.field': unknown field '" +
                        field + "'");
    }
    const IdentityReport rep = verify_lemma22(P, v, sp);
    write_json_artifact(ctx, "verify_lemma22.json", json::parse(to_json(rep)));
    std::printf(
        "verify-identity lemma22: %s max_residual=%.6g order=%.3f "
        "at_rounding=%s\n",
        rep.verdict ? "PASS" : "FAIL", rep.max_residual, rep.convergence_order,
        rep.at_rounding ? "yes" : "no");
    return report_exit(rep.verdict);
  }

  if (which == "lemma23") {
    AnnulusSpec sp{3, ctx.num("identity.r_min", 0.9),
                   ctx.num("identity.r_max", 1.5),
                   refine(ctx.num("identity.h", 1.0 / 24.0))};
    const double c = ctx.num("identity.c", 0.7);
    const double lam = ctx.num("identity.lambda", 5.0);
    const double a2 = P.alpha * P.alpha;
    const CartSampler v = [c, lam, a2](const Vec& x) {
      return c + x.squaredNorm() / (a2 * lam);
    };
    Bump phi;
    phi.center = Vec::Zero(3);
    phi.center[2] = ctx.num("identity.bump_center", 1.2);
    phi.radius = ctx.num("identity.bump_radius", 0.07);
    phi.amplitude = ctx.num("identity.bump_amp", 1.0);
    const IdentityReport rep = verify_lemma23(P, v, phi, sp);
    write_json_artifact(ctx, "verify_lemma23.json", json::parse(to_json(rep)));
    std::printf("verify-identity lemma23: %s max_residual=%.6g order=%.3f\n",
                rep.verdict ? "PASS" : "FAIL", rep.max_residual,
                rep.convergence_order);
    return report_exit(rep.verdict);
  }

  if (which == "boundary-split") {
    const double R = ctx.num("identity.R", 1.2);
    int nr = ctx.integer("identity.nr", 17);
    int nt = ctx.integer("identity.nt", 33);
    for (int k = 0; k < ctx.refine; ++k) {
      nr = 2 * nr - 1;
      nt = 2 * nt - 1;
    }
    const PolarSampler v = [](double r, double) {
      return 1.0 + 0.3 * std::cos(r);
    };
    const IdentityReport rep = verify_boundary_split(P, v, R, nr, nt);
    write_json_artifact(ctx, "verify_boundary_split.json",
                        json::parse(to_json(rep)));
    std::printf(
        "verify-identity boundary-split: %s max_residual=%.6g order=%.3f\n",
        rep.verdict ? "PASS" : "FAIL", rep.max_residual, rep.convergence_order);
    return report_exit(rep.verdict);
  }

  if (which == "decomposition") {
    int nr = ctx.integer("identity.nr", 401);
    int nt = ctx.integer("identity.nt", 97);
    for (int k = 0; k < ctx.refine; ++k) {
      nr = 2 * nr - 1;
      nt = 2 * nt - 1;
    }
    const AxiPolarGrid g =
        AxiPolarGrid::make(ctx.num("identity.r_min", 0.0),
                           ctx.num("identity.r_max", 1.0), nr, nt);
    const ScalarField v = sample_polar(
        g, [](double r, double) { return 1.0 + 0.3 * std::cos(2.0 * r); },
        true);
    const DecompositionReport rep = verify_decomposition(P, v);
    write_json_artifact(ctx, "verify_decomposition.json",
                        json::parse(to_json(rep)));
    std::printf(
        "verify-identity decomposition: %s slack=%.6g weighted_middle=%s "
        "unweighted_middle=%s\n",
        rep.verdict ? "PASS" : "FAIL", rep.slack,
        rep.weighted_middle_holds ? "holds" : "violated",
        rep.unweighted_middle_holds ? "holds" : "violated");
    return report_exit(rep.verdict);
  }

  if (which == "k-bound") {
    int nr = ctx.integer("identity.nr", 201);
    int nt = ctx.integer("identity.nt", 49);
    for (int k = 0; k < ctx.refine; ++k) {
      nr = 2 * nr - 1;
      nt = 2 * nt - 1;
    }
    const AxiPolarGrid g =
        AxiPolarGrid::make(ctx.num("identity.r_min", 0.5),
                           ctx.num("identity.r_max", 1.5), nr, nt);
    const double c = ctx.num("identity.c", 0.8);
    const double lam = ctx.num("identity.lambda", 4.0);
    const double a2 = P.alpha * P.alpha;
    const ScalarField v = sample_polar(
        g, [&](double r, double) { return c + r * r / (a2 * lam); }, true);
    const InequalityReport rep = pointwise_k_bound(P, v);
    write_json_artifact(ctx, "verify_k_bound.json", json::parse(to_json(rep)));
    std::printf("verify-identity k-bound: %s min_slack=%.6g at r=%.4g\n",
                rep.verdict ? "PASS" : "FAIL", rep.min_slack,
                rep.argmin_radius);
    return report_exit(rep.verdict);
  }

  if (which == "prop21" || which == "J-decay" || which == "energy") {
    const NonlinearitySpec spec = spec_from(ctx);
    const double R = ctx.num("radial.R", 1.0);
    const double u0 = ctx.num("radial.u0", which == "prop21" ? 1.0 : 0.5);
    ShootOptions opt;
    opt.n_uniform = ctx.integer("radial.samples", opt.n_uniform);
    for (int k = 0; k < ctx.refine; ++k) opt.n_uniform = 2 * opt.n_uniform - 1;
    const RadialSolution sol = shoot(P, spec, R, u0, opt);

    if (which == "prop21") {
      const Prop21Report rep = verify_prop21(sol);
      write_json_artifact(ctx, "verify_prop21.json",
                          json::parse(to_json(rep)));
      std::printf(
          "verify-identity prop21: %s residual=%.6g tolerance=%.6g "
          "phi_nonincreasing=%s bulk_nonpositive=%s\n",
          rep.verdict ? "PASS" : "FAIL", rep.residual, rep.tolerance,
          rep.phi_nonincreasing ? "yes" : "no",
          rep.bulk_nonpositive ? "yes" : "no");
      return report_exit(rep.verdict);
    }
    if (which == "J-decay") {
      const JDecayReport rep = boundary_layer_J(sol);
      write_json_artifact(ctx, "verify_J_decay.json",
                          json::parse(to_json(rep)));
      std::printf("verify-identity J-decay: %s beta=%.4g floor=%.4g\n",
                  rep.verdict ? "PASS" : "FAIL", rep.beta, rep.beta_floor);
      return report_exit(rep.verdict);
    }
    const EnergyReport rep =
        energy_identity(sol, ctx.num("identity.tol", 1e-6));
    write_json_artifact(ctx, "verify_energy.json", json::parse(to_json(rep)));
    std::printf(
        "verify-identity energy: %s residual_with_flux=%.6g dirichlet=%.6g\n",
        rep.verdict ? "PASS" : "FAIL", rep.residual_with_flux, rep.dirichlet);
    return report_exit(rep.verdict);
  }

  throw ConfigError(
      "verify-identity: unknown identity '" + which +
      "' (expected lemma22|lemma23|boundary-split|prop21|decomposition|"
      "k-bound|J-decay|energy)");
}

int cmd_flow(const Ctx& ctx) {
  const CknParameters P = params_from(ctx);
  const NonlinearitySpec spec = spec_from(ctx);
  const FlowDomain dom = flow_domain_from(ctx);
  int nr = ctx.integer("grid.nr", 49);
  int nt = ctx.integer("grid.nt", 21);
  for (int k = 0; k < ctx.refine; ++k) {
    nr = 2 * nr - 1;
    nt = 2 * nt - 1;
  }
  const AxiPolarGrid g = flow_grid(dom, nr, nt);
  const ScalarField init = seeded_init(g, ctx.seed,
                                       ctx.num("flow.init_amp", 0.3),
                                       ctx.num("flow.init_base", 1.0));
  FlowResult r = evolve(P, spec, dom, init, ctx.num("flow.t_max", 60.0),
                        dt_policy_from(ctx));
  r.init_seed = ctx.seed;

  const std::string csv = out_path(ctx, "flow_final.csv");
  field_to_csv(r.field(), csv);
  stamp_csv(ctx, csv);
  json j = json::parse(flow_record_json(r));
  write_json_artifact(ctx, "flow.json", j);
  append_run_record(out_path(ctx, "runs.jsonl"), r);

  std::printf(
      "flow: %s classification=%s mean=%.9g osc=%.3g steps=%ld "
      "gates_ok=%s\n",
      r.converged ? "PASS" : "FAIL", to_string(r.classification), r.mean,
      r.oscillation, r.steps, r.gates.gates_ok ? "yes" : "no");
  return report_exit(r.converged);
}

int cmd_sweep(const Ctx& ctx) {
  std::vector<std::pair<double, double>> ab;
  for (const std::string& tok :
       split(ctx.str("sweep.ab", "0.2:0.2,0.25:0.3"), ',')) {
    const std::vector<std::string> bits = split(tok, ':');
    if (bits.size() != 2)
      throw ConfigError("config field 'sweep.ab': expected a:b, got '" + tok +
                        "'");
    ab.emplace_back(parse_number("sweep.ab", bits[0]),
                    parse_number("sweep.ab", bits[1]));
  }
  std::vector<FlowDomain> domains;
  for (const std::string& tok :
       split(ctx.str("sweep.domains", "origin_ball:1,offset_ball:1:0.4"), ','))
    domains.push_back(parse_domain_token("sweep.domains", tok));
  std::vector<NonlinearitySpec> specs;
  for (const std::string& tok :
       split(ctx.str("sweep.specs", "one_minus_power:5"), ','))
    specs.push_back(parse_spec_token("sweep.specs", tok));
  std::vector<std::uint64_t> seeds;
  for (const std::string& tok : split(ctx.str("sweep.seeds", "1,2"), ','))
    seeds.push_back(
        static_cast<std::uint64_t>(parse_number("sweep.seeds", tok)));

  SweepConfig cfg;
  cfg.nr = ctx.integer("grid.nr", 33);
  cfg.nt = ctx.integer("grid.nt", 13);
  cfg.policy = dt_policy_from(ctx);
  cfg.cells = sweep_grid(ab, domains, specs, seeds,
                         ctx.num("flow.t_max", 40.0),
                         ctx.num("flow.init_amp", 0.3));
  const double linni_base = ctx.num("sweep.linni_base", 0.6);
  for (SweepCell& cell : cfg.cells)
    if (!cell.spec.terms.empty() && cell.spec.terms.front().exponent > 1.0 &&
        cell.spec.terms.front().coeff > 0.0)
      cell.init_base = linni_base;

  const std::vector<FlowResult> rows = sweep(cfg);
  const ConsistencyReport rep = no_pattern_consistency(rows);

  std::ostringstream csv;
  csv << "# version=" << kVersion << " config_hash=" << ctx.hash << "\n"
      << "a,b,domain,R,offset,r_in,spec,seed,classification,mean,oscillation,"
         "converged,phi_non_increasing,fs_symmetric,condition_margin,gates_ok\n";
  const std::string db = out_path(ctx, "runs.jsonl");
  for (const FlowResult& r : rows) {
    append_run_record(db, r);
    const char* dk = r.domain.kind == FlowDomainKind::OriginBall
                         ? "origin_ball"
                         : (r.domain.kind == FlowDomainKind::OffsetBall
                                ? "offset_ball"
                                : "annulus");
    csv << format_g17(r.params.a) << ',' << format_g17(r.params.b) << ','
        << dk << ',' << format_g17(r.domain.R) << ','
        << format_g17(r.domain.offset) << ',' << format_g17(r.domain.r_in)
        << ',' << r.spec.name << ',' << r.init_seed << ','
        << to_string(r.classification) << ',' << format_g17(r.mean) << ','
        << format_g17(r.oscillation) << ',' << (r.converged ? 1 : 0) << ','
        << (r.gates.phi_non_increasing ? 1 : 0) << ','
        << (r.gates.fs_symmetric ? 1 : 0) << ','
        << format_g17(r.gates.condition_margin) << ','
        << (r.gates.gates_ok ? 1 : 0) << '\n';
  }
  atomic_write_text(out_path(ctx, "sweep_rows.csv"), csv.str());

  json j{{"rows", rep.rows},
         {"patterns", rep.patterns},
         {"gates_ok_rows", rep.gates_ok_rows},
         {"violations", rep.violations},
         {"consistent", rep.consistent}};
  write_json_artifact(ctx, "sweep.json", j);
  std::printf("sweep: %s rows=%ld patterns=%ld gates_ok=%ld violations=%ld\n",
              rep.consistent ? "PASS" : "FAIL", rep.rows, rep.patterns,
              rep.gates_ok_rows, rep.violations);
  return report_exit(rep.consistent);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cknlab: a numerical laboratory for weighted Neumann problems"};
  std::string config_path, out_dir, which;
  long long seed = -1;
  int refine = 0;
  app.add_option("--config", config_path, "key=value or JSON config file");
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--refine", refine, "halve grid spacings k times")
      ->check(CLI::NonNegativeNumber);
  app.require_subcommand(1);

  CLI::App* sub_params = app.add_subcommand("params", "derive and classify");
  CLI::App* sub_domain =
      app.add_subcommand("check-domain", "condition margin and convexity");
  CLI::App* sub_radial =
      app.add_subcommand("solve-radial", "shoot or scan radial solutions");
  CLI::App* sub_verify =
      app.add_subcommand("verify-identity", "run one identity verifier");
  sub_verify
      ->add_option("which", which,
                   "lemma22|lemma23|boundary-split|prop21|decomposition|"
                   "k-bound|J-decay|energy")
      ->required();
  CLI::App* sub_flow = app.add_subcommand("flow", "one evolution run");
  CLI::App* sub_sweep = app.add_subcommand("sweep", "grid of evolution runs");
  for (CLI::App* sub :
       {sub_params, sub_domain, sub_radial, sub_verify, sub_flow, sub_sweep})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Ctx ctx;
    if (!config_path.empty()) ctx.cfg = parse_config_file(config_path);
    if (!out_dir.empty())
      ctx.out_dir = out_dir;
    else
      ctx.out_dir = ctx.cfg.get_str("out", "out");
    if (seed >= 0) ctx.cfg.set("seed", std::to_string(seed));
    ctx.seed = static_cast<std::uint64_t>(ctx.cfg.get_int("seed", 2026));
    ctx.refine = refine;

    std::string command;
    for (const CLI::App* sub : app.get_subcommands()) command = sub->get_name();
    KeyValueConfig effective = ctx.cfg;
    effective.set("command", command + (which.empty() ? "" : " " + which));
    effective.set("refine", std::to_string(ctx.refine));
    ctx.hash = config_hash_hex(effective);

    std::filesystem::create_directories(ctx.out_dir);

    if (sub_params->parsed()) return cmd_params(ctx);
    if (sub_domain->parsed()) return cmd_check_domain(ctx);
    if (sub_radial->parsed()) return cmd_solve_radial(ctx);
    if (sub_verify->parsed()) return cmd_verify_identity(ctx, which);
    if (sub_flow->parsed()) return cmd_flow(ctx);
    if (sub_sweep->parsed()) return cmd_sweep(ctx);
    std::fprintf(stderr, "error: no command\n");
    return 1;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
