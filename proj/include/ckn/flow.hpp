#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ckn/common.hpp"
#include "ckn/grids.hpp"
#include "ckn/params.hpp"

namespace ckn {

// Axisymmetric evolution domains, d = 3. Grid coordinates (r, theta) are
// polar about the domain center; for OffsetBall the weight origin sits at
// distance `offset` along the symmetry axis, so the weights are evaluated at
// the true distance from the origin, not at the grid radius.
enum class FlowDomainKind { OriginBall, OffsetBall, Annulus };

struct FlowDomain {
  FlowDomainKind kind = FlowDomainKind::OriginBall;
  double R = 1.0;       // outer coordinate radius
  double r_in = 0.0;    // inner radius (Annulus)
  double offset = 0.0;  // |center| of the ball (OffsetBall)

  static FlowDomain origin_ball(double R);
  static FlowDomain offset_ball(double R, double offset);
  static FlowDomain annulus(double r_in, double R);

  // Squared distance from the weight origin at grid point (r, theta).
  double weight_r2(double r, double theta) const;
};

// Vertex-centered grid for the flow: r0 = 0 for balls (the origin node owns a
// degenerate finite-volume cell with exactly zero flux through its inner
// face), r0 = r_in for annuli.
AxiPolarGrid flow_grid(const FlowDomain& dom, int nr, int nt);

struct FlowDtPolicy {
  double dt0 = 1e-3;       // initial step
  double dt_max = 2e-2;    // cap for the growth ladder
  double growth = 1.2;     // factor applied after every accepted step
  double exit_tol = 1e-8;  // max-norm of (u^+ - u)/dt that counts as steady
  double dt_min = 1e-12;   // below this a rejected step raises StiffnessError
  double max_jump = 0.25;  // reject when ||u^+ - u||_inf > max_jump*max(|u|,1)
  long max_steps = 2000000;
};

enum class FlowClass { Constant, Pattern, NotConverged };
const char* to_string(FlowClass c);

// Classification thresholds. The band between the two oscillation fractions
// is a deliberate gap: a converged state landing there is NotConverged rather
// than being forced into either bucket.
inline constexpr double kConstantOscFrac = 1e-6;
inline constexpr double kPatternOscFrac = 1e-3;

FlowClass classify_state(double oscillation, double mean, double du_dt_norm,
                         double exit_tol);

// Hypotheses of the no-pattern statement, recorded per run and never
// enforced: the flow itself runs in any admissible parameter range.
struct FlowGates {
  RegimeReport regime;
  PhiMonotonicity phi;
  bool phi_non_increasing = true;
  bool fs_symmetric = true;
  double condition_margin = 0.0;  // NaN when no ball condition applies
  bool condition_ok = false;      // margin >= 0 on a ball domain
  bool gates_ok = false;          // all three hypotheses hold
};

FlowGates flow_gates(const CknParameters& P, const NonlinearitySpec& spec,
                     const FlowDomain& dom, double t_lo, double t_hi);

struct FlowResult {
  CknParameters params;
  NonlinearitySpec spec;
  FlowDomain domain;
  AxiPolarGrid grid;
  std::vector<double> u;  // final field, row-major node order

  double t_max = 0.0;
  FlowDtPolicy policy;
  std::uint64_t init_seed = 0;  // 0 for caller-supplied initial data

  double elapsed = 0.0;     // model time at exit
  double dt_final = 0.0;
  double du_dt_norm = 0.0;  // max-norm time derivative at exit
  bool converged = false;   // du_dt_norm <= exit_tol at exit
  double oscillation = 0.0; // max - min of the final field
  double mean = 0.0;        // mass-weighted mean of the final field
  double weighted_mass_initial = 0.0;
  double weighted_mass_final = 0.0;
  double mass_residual_max = 0.0;  // worst per-step mass-balance residual
  // Steady-state residual of the final field in the u_t form
  // |x|^{bq-2a}(Lap u - 2a (x.Du)/|x|^2) + f(u), evaluated with the wide
  // polar jets and scaled by the problem stiffness, so it is comparable to
  // the exit tolerance.
  double elliptic_residual = 0.0;
  long steps = 0;
  long rejections = 0;
  FlowClass classification = FlowClass::NotConverged;
  FlowGates gates;

  bool comparison_applicable = false;  // f <= 0 on the initial range
  bool comparison_ok = true;  // max u never increased while applicable

  // View bound to this->grid; keep the result alive while the view is used.
  ScalarField field() const;
};

// Semi-implicit finite-volume evolution of
//   |x|^{-bq} u_t = div(|x|^{-2a} Du) + |x|^{-bq} f(u)
// with zero-flux outer boundary: implicit weighted diffusion, explicit
// reaction. Fluxes through the degenerate origin face, the symmetry axis and
// the outer boundary are exactly zero, so every accepted step satisfies the
// discrete mass balance sum(m du/dt) = sum(m f(u)) to rounding. Positivity
// loss rejects the step and halves dt; a rejection at dt_min raises
// StiffnessError. The initial field must be positive on flow_grid(dom,...).
FlowResult evolve(const CknParameters& P, const NonlinearitySpec& spec,
                  const FlowDomain& dom, const ScalarField& init, double t_max,
                  const FlowDtPolicy& policy = {});

// Seeded positive initial datum: base * (1 + amp * w) with w a fixed small
// bank of radial-angular modes with seed-drawn coefficients, clamped positive.
ScalarField seeded_init(const AxiPolarGrid& grid, std::uint64_t seed,
                        double amp, double base = 1.0);

struct SweepCell {
  double a = 0.0;
  double b = 0.0;
  FlowDomain domain;
  NonlinearitySpec spec;
  double t_max = 50.0;
  std::uint64_t seed = 1;
  double init_amp = 0.3;
  double init_base = 1.0;
};

struct SweepConfig {
  std::vector<SweepCell> cells;
  int nr = 49;
  int nt = 21;
  FlowDtPolicy policy;
};

// Product grid of cells; any axis may be empty, giving an empty cell list.
std::vector<SweepCell> sweep_grid(
    const std::vector<std::pair<double, double>>& ab,
    const std::vector<FlowDomain>& domains,
    const std::vector<NonlinearitySpec>& specs,
    const std::vector<std::uint64_t>& seeds, double t_max,
    double init_amp = 0.3);

// One evolve per cell, in order; an empty config yields an empty table.
std::vector<FlowResult> sweep(const SweepConfig& config);

struct ConsistencyReport {
  long rows = 0;
  long patterns = 0;
  long gates_ok_rows = 0;
  long violations = 0;  // Pattern rows whose gates all held
  bool consistent = true;
};

// Grand consistency over a run table: no row may be classified Pattern while
// the Phi gate, the regime gate and the ball condition margin all held.
ConsistencyReport no_pattern_consistency(const std::vector<FlowResult>& rows);

// One JSON object per run, carrying the full gate record and a hash of the
// generating configuration. append_run_record appends it as one line to an
// append-only JSON-lines database.
std::string flow_record_json(const FlowResult& r);
void append_run_record(const std::string& path, const FlowResult& r);

}  // namespace ckn
