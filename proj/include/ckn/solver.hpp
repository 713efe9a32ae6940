#pragma once

// Strong-form radial solver for
//
//   -psi'' + kappa^2/4 psi = (1 + t(K - 1)) psi^{p-1},   s in [-S, S],
//
// homotopy continuation in t and the blow-up diagnostics monitored along the
// path. End conditions are the exact decay psi' = +-kappa/2 psi (Robin,
// default) or psi = 0 (Dirichlet).

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ckn/coeff.hpp"
#include "ckn/efgrid.hpp"
#include "ckn/reduction.hpp"

namespace ckn {

enum class BoundaryCondition { Robin, Dirichlet };
const char* to_string(BoundaryCondition bc);

struct NewtonOptions {
  double tolerance = 1e-11;  // sup norm of the discrete residual
  int max_iterations = 50;
  int max_halvings = 20;
  BoundaryCondition boundary = BoundaryCondition::Robin;
};

struct NewtonResult {
  RadialFunction u;
  int iterations = 0;
  double residual = 0;
};

/// Discrete residual: PDE rows on the interior, end conditions in rows 0, n-1.
std::vector<double> strong_residual(const RadialFunction& u, const CoefficientField& K, double t,
                                    BoundaryCondition bc);

/// Damped Newton from u0. Throws NewtonDivergence, or PositivityLoss when an
/// accepted iterate is not positive in the interior.
NewtonResult newton_solve(double t, const CoefficientField& K, const RadialFunction& u0,
                          const NewtonOptions& opts = {});

struct DiagnosticsRecord {
  double norm_E = 0;
  /// sup and inf of u / omega_a, omega_a = (1 + r^kappa)^{-1}.
  double sup_ratio = 0;
  double inf_ratio = 0;
  /// max(sup_ratio, 1 / inf_ratio); infinite when inf_ratio <= 0.
  double sandwich_C = 0;
  /// Peak of wbar = r^{kappa/2} u = psi.
  double wbar_peak_s = 0;
  bool wbar_monotone_after_peak = false;
  /// max over r >= r_peak of u(r) max(u) r^kappa.
  double envelope_C = 0;
  double max_u = 0;
  /// global_identity and its scale; zero when no coefficient is given.
  double pohozaev_global = 0;
  double pohozaev_scale = 0;
  /// max |psi(s) - psi(-s)| / max |psi|.
  double symmetry_defect = 0;
};

/// Monotonicity is tested for s_peak < s <= log_rho (default: the grid end).
DiagnosticsRecord blowup_diagnostics(const RadialFunction& u,
                                     double log_rho = std::numeric_limits<double>::infinity());
DiagnosticsRecord blowup_diagnostics(const RadialFunction& u, const CoefficientField& K, double t,
                                     double log_rho = std::numeric_limits<double>::infinity());

/// r^{2+2alpha+gamma} times the radial residual of
///   -div(|x|^{-2alpha} grad v) - lambda |x|^{-2(1+alpha)} v - K_t v^{p-1} |x|^{-beta p},
/// gamma = kappa/2 + alpha - a, computed in r from the nodal values of v.
std::vector<double> v_formulation_residual(const RadialFunction& v, const CoefficientField& K,
                                           double t);

struct Sandwich {
  double sup = 0;
  double inf = 0;
  double C = 0;  // max(sup, 1/inf)
};

/// Bounds of |x|^{a-alpha} (1 + |x|^kappa) v over the nodes.
Sandwich v_sandwich(const RadialFunction& v);

enum class RunStatus { Completed, NewtonFail, BlowupSuspected };
const char* to_string(RunStatus status);

struct ContinuationOptions {
  double t_start = 0.01;
  double t_end = 1.0;
  double dt_initial = 0.01;
  double dt_min = 1e-6;
  double dt_max = 0.25;
  int accept_iterations = 8;  // accept and double dt at or below this count
  double blowup_factor = 10;  // sup_ratio jump between accepted steps
  /// Seed: critical point of Phi_{t_start} nearest this mu.
  double seed_mu = 1.0;
  PhiSearchOptions seed_search;
  NewtonOptions newton;
  /// Invariant thresholds checked on every accepted state.
  double residual_bound = 1e-8;
  double pohozaev_bound = 1e-6;
};

struct ContinuationState {
  double t = 0;
  RadialFunction solution;
  int newton_iters = 0;
  DiagnosticsRecord diagnostics;
  double pde_residual = 0;  // sup |pde_residual|
};

struct ContinuationRun {
  explicit ContinuationRun(CoefficientField k) : K(std::move(k)) {}
  CoefficientField K;
  std::vector<double> t_schedule;
  std::vector<ContinuationState> states;
  RunStatus status = RunStatus::NewtonFail;
  std::string message;
  double seed_mu = 0;
  double seed_eta = 0;
  int rejected_steps = 0;
  /// wbar = psi of the last tried iterate when blow-up is suspected.
  std::optional<RadialFunction> archived_wbar;
  /// Invariant failures on accepted states, one line each.
  std::vector<std::string> violations;
};

/// Predictor-corrector in t from the reduction seed at t_start to t_end.
/// Throws DegenerateCoefficient when Delta K(0) or Delta K~(0) vanishes.
ContinuationRun continuation(std::shared_ptr<const EFGrid> grid, const CoefficientField& K,
                             const ContinuationOptions& opts = {});

/// max over nodes of |pde_residual|.
double pde_residual_sup(const RadialFunction& u, const CoefficientField& K, double t);

}  // namespace ckn
