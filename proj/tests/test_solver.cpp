#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ckn/errors.hpp"
#include "ckn/instanton.hpp"
#include "ckn/pohozaev.hpp"
#include "ckn/solver.hpp"

using namespace ckn;

namespace {
const ProblemParams T1 = derive_ab(3, 0.0, 0.15, 0.0);

std::shared_ptr<const EFGrid> grid() {
  static const auto g = EFGrid::make_default(T1);
  return g;
}

double sup_abs(std::span<const double> x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

const ContinuationRun& bump_run() {
  static const auto run = continuation(grid(), CoefficientField::self_dual_bump(0.5));
  return run;
}
}  // namespace

TEST_CASE("K=1: the instanton is a fixed point") {
  const auto one = CoefficientField::constant(1.0);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto r = newton_solve(t, one, make_instanton(grid(), 1.0, 1.0));
    CHECK(r.iterations <= 1);
    CHECK(r.residual <= 1e-11);
  }
}

TEST_CASE("t -> 0 recovers a member of the family") {
  for (double A : {0.5, -0.5}) {
    const auto r = newton_solve(1e-6, CoefficientField::self_dual_bump(A), centred_instanton(grid(), 1.0));
    CHECK(r.residual <= 1e-11);
    const auto fit = fit_instanton(r.u);
    CHECK(fit.residual <= 1e-5);
    CHECK(fit.K0 == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("Dirichlet ends") {
  NewtonOptions o;
  o.boundary = BoundaryCondition::Dirichlet;
  // the ends pin the translation mode: start from the profile centred at s=0
  const auto z = centred_instanton(grid(), 1.0);
  const auto r = newton_solve(0.0, CoefficientField::constant(1.0), z, o);
  CHECK(r.residual <= 1e-11);
  CHECK(r.u.psi(0) == doctest::Approx(0.0));
  // truncation error of the same order as the end values of z
  double d = 0;
  for (std::size_t i = 0; i < z.size(); ++i) d = std::max(d, std::abs(r.u.psi(i) - z.psi(i)));
  CHECK(d <= 1e-3);
  CHECK(std::string(to_string(BoundaryCondition::Dirichlet)) != to_string(BoundaryCondition::Robin));
}

TEST_CASE("strong residual matches pde_residual in the interior") {
  const auto K = CoefficientField::self_dual_bump(0.5);
  const auto z = make_instanton(grid(), 1.0, 1.3);
  const auto sr = strong_residual(z, K, 0.4, BoundaryCondition::Robin);
  const auto pr = pde_residual(z, K, 0.4);
  for (std::size_t i = 1; i + 1 < z.size(); i += 13) CHECK(sr[i] == doctest::Approx(pr.psi(i)).epsilon(1e-12));
}

TEST_CASE("positivity loss") {
  const auto g = grid();
  std::vector<double> psi(g->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = -z1_psi(T1, g->node(i));
  CHECK_THROWS_AS(newton_solve(0.5, CoefficientField::constant(1.0), RadialFunction(g, psi)), PositivityLoss);
}

TEST_CASE("diagnostics: bounded profile") {
  const auto g = grid();
  const double k = T1.kappa();
  // u = omega_a: psi = r^{kappa/2}/(1 + r^kappa) = 1/(2 cosh(kappa s/2))
  std::vector<double> psi(g->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = 0.5 / std::cosh(0.5 * k * g->node(i));
  const auto d = blowup_diagnostics(RadialFunction(g, psi));
  CHECK(d.sup_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.inf_ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.sandwich_C == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.wbar_peak_s) <= 1e-8);
  CHECK(d.wbar_monotone_after_peak);
  CHECK(d.symmetry_defect <= 1e-14);
}

TEST_CASE("diagnostics: synthetic blow-up") {
  const double k = T1.kappa();
  std::vector<DiagnosticsRecord> d;
  for (double mu : {1.0, 0.1, 0.01}) d.push_back(blowup_diagnostics(make_instanton(grid(), 1.0, mu)));
  for (std::size_t j = 1; j < d.size(); ++j) {
    CHECK(d[j].wbar_monotone_after_peak);
    CHECK(d[j - 1].wbar_peak_s - d[j].wbar_peak_s == doctest::Approx(std::log(10.0)).epsilon(1e-4));
    CHECK(d[j].max_u / d[j - 1].max_u == doctest::Approx(std::pow(10.0, 0.5 * k)).epsilon(1e-6));
    CHECK(d[j].envelope_C == doctest::Approx(d[0].envelope_C).epsilon(1e-3));
    CHECK(d[j].sup_ratio > d[j - 1].sup_ratio);
  }
}

TEST_CASE("v formulation at lambda=0") {
  const auto K = CoefficientField::self_dual_bump(0.5);
  const auto z = make_instanton(grid(), 1.0, 1.0);
  const auto v = to_v_formulation(z);
  const auto sw = v_sandwich(v);
  CHECK(std::isfinite(sw.C));
  CHECK(sw.C == doctest::Approx(blowup_diagnostics(z).sandwich_C).epsilon(1e-12));
  const auto one = CoefficientField::constant(1.0);
  CHECK(sup_abs(v_formulation_residual(v, one, 1.0)) <= 1e-7);
  CHECK(sup_abs(v_formulation_residual(v, K, 1.0)) > 1e-3);
}

TEST_CASE("v formulation with lambda > 0") {
  // The v-residual of to_v(z) vanishes for the shifted exponents too.
  const auto q = derive_ab(3, 0.1, 0.2, 0.05);
  const auto g = EFGrid::make_default(q);
  const auto v = to_v_formulation(make_instanton(g, 1.0, 1.0));
  CHECK(sup_abs(v_formulation_residual(v, CoefficientField::constant(1.0), 0.5)) <= 1e-7);
}

TEST_CASE("continuation rejects a degenerate coefficient") {
  CHECK_THROWS_AS(continuation(grid(), CoefficientField::constant(1.0)), DegenerateCoefficient);
}

TEST_CASE("continuation, bump A=0.5") {
  const auto& run = bump_run();
  CHECK(run.status == RunStatus::Completed);
  CHECK(run.violations.empty());
  REQUIRE_FALSE(run.states.empty());
  CHECK(run.states.front().t == doctest::Approx(0.01));
  CHECK(run.states.back().t == 1.0);
  for (std::size_t i = 1; i < run.t_schedule.size(); ++i) CHECK(run.t_schedule[i] > run.t_schedule[i - 1]);
  const auto K = CoefficientField::self_dual_bump(0.5);
  for (const auto& s : run.states) {
    CHECK(s.pde_residual <= 1e-8);
    CHECK(std::isfinite(s.diagnostics.sandwich_C));
    CHECK(std::abs(s.diagnostics.pohozaev_global) <= 1e-6 * s.diagnostics.pohozaev_scale);
    CHECK(s.newton_iters <= ContinuationOptions{}.accept_iterations);
  }
  const auto& last = run.states.back().solution;
  CHECK(std::abs(global_identity(last, K, 1.0)) <= 1e-6 * global_identity_scale(last, K, 1.0));
  CHECK(run.states.back().diagnostics.symmetry_defect <= 1e-6);
}

TEST_CASE("continuation, bump A=-0.5") {
  const auto run = continuation(grid(), CoefficientField::self_dual_bump(-0.5));
  CHECK(run.status == RunStatus::Completed);
  CHECK(run.violations.empty());
  CHECK(std::isfinite(run.states.back().diagnostics.sandwich_C));
}

TEST_CASE("small t: solver and reduction agree") {
  const auto K = CoefficientField::self_dual_bump(0.5);
  Reduction red(grid(), K);
  const double t = 1e-3;
  const auto curve = phi_critical_points(red, t);
  const auto& pt = nearest_critical_point(curve, 1.0);
  REQUIRE(pt.u.has_value());
  const auto r = newton_solve(t, K, *pt.u);
  std::vector<double> d(r.u.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = r.u.psi(i) - pt.u->psi(i);
  CHECK(norm_Da(r.u.with_psi(d)) <= 1e-6 * norm_Da(r.u));
}

TEST_CASE("status strings") {
  CHECK(std::string(to_string(RunStatus::Completed)) == "COMPLETED");
  CHECK(std::string(to_string(RunStatus::NewtonFail)) == "NEWTON_FAIL");
  CHECK(std::string(to_string(RunStatus::BlowupSuspected)) == "BLOWUP_SUSPECTED");
}
