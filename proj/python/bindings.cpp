// Python bindings for the core operations: parameter algebra, the domain
// criterion, radial shooting and scanning, the identity verifiers (as JSON
// records), and a one-call flow runner.
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdio>
#include <string>

#include "ckn/common.hpp"
#include "ckn/flow.hpp"
#include "ckn/geometry.hpp"
#include "ckn/identities.hpp"
#include "ckn/params.hpp"
#include "ckn/radial.hpp"

namespace py = pybind11;
using namespace ckn;

PYBIND11_MODULE(_cknlab, m) {
  m.doc() = "Numerical laboratory for weighted degenerate elliptic Neumann problems";
  m.attr("__version__") = std::string(kVersion);

  py::class_<CknParameters>(m, "Parameters")
      .def_readonly("d", &CknParameters::d)
      .def_readonly("a", &CknParameters::a)
      .def_readonly("b", &CknParameters::b)
      .def_readonly("a_c", &CknParameters::a_c)
      .def_readonly("q", &CknParameters::q)
      .def_readonly("n", &CknParameters::n)
      .def_readonly("alpha", &CknParameters::alpha)
      .def_readonly("alpha_fs", &CknParameters::alpha_fs)
      .def_readonly("lambda_ef", &CknParameters::lambda_ef)
      .def("crit_exponent", &CknParameters::crit_exponent)
      .def("__repr__", [](const CknParameters& p) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "Parameters(d=%d, a=%g, b=%g, alpha=%g, n=%g)", p.d, p.a,
                      p.b, p.alpha, p.n);
        return std::string(buf);
      });
  m.def("derive_parameters", &derive_parameters, py::arg("d"), py::arg("a"),
        py::arg("b"));

  py::class_<RegimeReport>(m, "RegimeReport")
      .def_readonly("fs_symmetric", &RegimeReport::fs_symmetric)
      .def_readonly("strong", &RegimeReport::strong)
      .def_readonly("alpha_fs", &RegimeReport::alpha_fs)
      .def_readonly("strong_threshold", &RegimeReport::strong_threshold);
  m.def("classify_regime", &classify_regime, py::arg("params"));

  py::class_<PowerTerm>(m, "PowerTerm")
      .def(py::init<>())
      .def(py::init([](double coeff, double exponent) {
             return PowerTerm{coeff, exponent};
           }),
           py::arg("coeff"), py::arg("exponent"))
      .def_readwrite("coeff", &PowerTerm::coeff)
      .def_readwrite("exponent", &PowerTerm::exponent);

  py::class_<NonlinearitySpec>(m, "NonlinearitySpec")
      .def(py::init<>())
      .def_readwrite("terms", &NonlinearitySpec::terms)
      .def_readwrite("name", &NonlinearitySpec::name)
      .def("f", &NonlinearitySpec::f, py::arg("t"))
      .def("f_prime", &NonlinearitySpec::f_prime, py::arg("t"))
      .def_static("one_minus_power", &NonlinearitySpec::one_minus_power,
                  py::arg("p"))
      .def_static("power_minus_linear", &NonlinearitySpec::power_minus_linear,
                  py::arg("p"), py::arg("mu"))
      .def_static("generalized", &NonlinearitySpec::generalized,
                  py::arg("terms"), py::arg("name") = "generalized");

  py::class_<PhiMonotonicity>(m, "PhiMonotonicity")
      .def_readonly("non_increasing", &PhiMonotonicity::non_increasing)
      .def_readonly("violated_at", &PhiMonotonicity::violated_at);
  m.def("phi_monotonicity", &phi_monotonicity, py::arg("spec"),
        py::arg("params"), py::arg("t_lo"), py::arg("t_hi"),
        py::arg("samples"), py::arg("tolerance") = 1e-12);

  m.def("ball_criterion", &ball_criterion, py::arg("x0_norm"), py::arg("R"),
        py::arg("alpha"));
  m.def(
      "condition_margin_ball",
      [](double x0_norm, double R, double alpha, int sampling) {
        Vec center = Vec::Zero(3);
        center[2] = x0_norm;
        const DomainBoundary b = (x0_norm <= 0.0)
                                     ? DomainBoundary::origin_ball(R)
                                     : DomainBoundary::offset_ball(center, R);
        return condition_margin(b, alpha, sampling).min_margin;
      },
      py::arg("x0_norm"), py::arg("R"), py::arg("alpha"),
      py::arg("sampling") = 2048);
  m.def("conformal_ii", &conformal_ii, py::arg("ii"), py::arg("x"),
        py::arg("nu"), py::arg("alpha"));

  py::class_<ShootOptions>(m, "ShootOptions")
      .def(py::init<>())
      .def_readwrite("abs_tol", &ShootOptions::abs_tol)
      .def_readwrite("rel_tol", &ShootOptions::rel_tol)
      .def_readwrite("n_uniform", &ShootOptions::n_uniform)
      .def_readwrite("n_log", &ShootOptions::n_log)
      .def_readwrite("eps0_factor", &ShootOptions::eps0_factor)
      .def_readwrite("u_max_override", &ShootOptions::u_max_override)
      .def_readwrite("store_samples", &ShootOptions::store_samples);

  py::class_<RadialSolution>(m, "RadialSolution")
      .def_readonly("params", &RadialSolution::params)
      .def_readonly("spec", &RadialSolution::spec)
      .def_readonly("R", &RadialSolution::R)
      .def_readonly("u0", &RadialSolution::u0)
      .def_readonly("du_R", &RadialSolution::du_R)
      .def_readonly("r", &RadialSolution::r)
      .def_readonly("u", &RadialSolution::u)
      .def_readonly("du", &RadialSolution::du)
      .def_readonly("F", &RadialSolution::F)
      .def("eval_u", &RadialSolution::eval_u, py::arg("radius"))
      .def("eval_du", &RadialSolution::eval_du, py::arg("radius"))
      .def("oscillation", &RadialSolution::oscillation)
      .def("mean_u", &RadialSolution::mean_u)
      .def("constant_within", &RadialSolution::constant_within,
           py::arg("rel_tol"));
  m.def("shoot", &shoot, py::arg("params"), py::arg("spec"), py::arg("R"),
        py::arg("u0"), py::arg("opt") = ShootOptions{});

  py::class_<GateRecord>(m, "GateRecord")
      .def_readonly("regime", &GateRecord::regime)
      .def_readonly("phi", &GateRecord::phi)
      .def_readonly("phi_non_increasing", &GateRecord::phi_non_increasing)
      .def_readonly("fs_symmetric", &GateRecord::fs_symmetric)
      .def_readonly("gates_ok", &GateRecord::gates_ok);

  py::class_<ScanHit>(m, "ScanHit")
      .def_readonly("u0_root", &ScanHit::u0_root)
      .def_readonly("du_R", &ScanHit::du_R)
      .def_readonly("constant", &ScanHit::constant)
      .def_readonly("oscillation", &ScanHit::oscillation)
      .def_readonly("sol", &ScanHit::sol);

  py::class_<ScanResult>(m, "ScanResult")
      .def_readonly("hits", &ScanResult::hits)
      .def_readonly("gates", &ScanResult::gates)
      .def_readonly("u0_grid", &ScanResult::u0_grid)
      .def_readonly("shoot_du", &ScanResult::shoot_du);
  m.def("scan_solutions", &scan_solutions, py::arg("params"), py::arg("spec"),
        py::arg("R"), py::arg("u0_min"), py::arg("u0_max"),
        py::arg("grid_points"), py::arg("opt") = ShootOptions{},
        py::arg("bisect_tol") = 1e-10);

  py::class_<ExponentFit>(m, "ExponentFit")
      .def_readonly("exponent", &ExponentFit::exponent)
      .def_readonly("log_coeff", &ExponentFit::log_coeff)
      .def_readonly("identically_zero", &ExponentFit::identically_zero)
      .def_readonly("pass_", &ExponentFit::pass);

  py::class_<AsymptoticsReport>(m, "AsymptoticsReport")
      .def_readonly("items", &AsymptoticsReport::items)
      .def_readonly("ef_decay", &AsymptoticsReport::ef_decay)
      .def_readonly("sqrt_lambda", &AsymptoticsReport::sqrt_lambda)
      .def_readonly("decay_pass", &AsymptoticsReport::decay_pass)
      .def_readonly("items_pass", &AsymptoticsReport::items_pass)
      .def_readonly("fs_symmetric", &AsymptoticsReport::fs_symmetric);
  m.def("check_asymptotics", &check_asymptotics, py::arg("sol"),
        py::arg("slack") = 0.3);

  m.def(
      "verify_lemma22_json",
      [](const CknParameters& P, const CartSampler& v, int d, double r_min,
         double r_max, double h) {
        return to_json(verify_lemma22(P, v, AnnulusSpec{d, r_min, r_max, h}));
      },
      py::arg("params"), py::arg("v"), py::arg("d") = 3,
      py::arg("r_min") = 0.75, py::arg("r_max") = 1.75,
      py::arg("h") = 1.0 / 16);
  m.def(
      "verify_prop21_json",
      [](const RadialSolution& sol, int n_quad) {
        return to_json(verify_prop21(sol, n_quad));
      },
      py::arg("sol"), py::arg("n_quad") = 8193);
  m.def(
      "boundary_layer_J_json",
      [](const RadialSolution& sol, double beta_slack) {
        return to_json(boundary_layer_J(sol, {}, beta_slack));
      },
      py::arg("sol"), py::arg("beta_slack") = 0.3);
  m.def(
      "energy_identity_json",
      [](const RadialSolution& sol, double tol) {
        return to_json(energy_identity(sol, tol));
      },
      py::arg("sol"), py::arg("tol") = 1e-6);

  m.def(
      "run_flow",
      [](double a, double b, const NonlinearitySpec& spec,
         const std::string& domain, double R, double offset, double r_in,
         int nr, int nt, std::uint64_t seed, double init_amp,
         double init_base, double t_max) {
        FlowDomain dom;
        if (domain == "origin_ball")
          dom = FlowDomain::origin_ball(R);
        else if (domain == "offset_ball")
          dom = FlowDomain::offset_ball(R, offset);
        else if (domain == "annulus")
          dom = FlowDomain::annulus(r_in, R);
        else
          throw ConfigError("run_flow: unknown domain kind '" + domain + "'");
        const CknParameters P = derive_parameters(3, a, b);
        const AxiPolarGrid grid = flow_grid(dom, nr, nt);
        const ScalarField init = seeded_init(grid, seed, init_amp, init_base);
        FlowResult r = evolve(P, spec, dom, init, t_max);
        r.init_seed = seed;
        return flow_record_json(r);
      },
      py::arg("a"), py::arg("b"), py::arg("spec"),
      py::arg("domain") = "origin_ball", py::arg("R") = 1.0,
      py::arg("offset") = 0.0, py::arg("r_in") = 0.5, py::arg("nr") = 33,
      py::arg("nt") = 13, py::arg("seed") = 1, py::arg("init_amp") = 0.3,
      py::arg("init_base") = 1.0, py::arg("t_max") = 50.0);
}
