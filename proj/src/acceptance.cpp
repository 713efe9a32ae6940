#include "ckn/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "ckn/instanton.hpp"
#include "ckn/melnikov.hpp"
#include "ckn/pohozaev.hpp"
#include "ckn/reduction.hpp"
#include "ckn/solver.hpp"

namespace ckn {

namespace {

double sup_abs(std::span<const double> x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

int sgn(double x) { return (x > 0) - (x < 0); }

std::string tag(const char* what, double x) {
  std::ostringstream os;
  os << what << "=" << x;
  return os.str();
}

std::shared_ptr<const EFGrid> grid_for(const AcceptanceOptions& o) {
  return EFGrid::make(o.problem, o.S.value_or(EFGrid::kDefaultWidthFactor / o.problem.kappa()), o.n);
}

CriterionResult start(int id, const char* title) {
  CriterionResult r;
  r.id = id;
  r.title = title;
  return r;
}

// --- 1 ------------------------------------------------------------------

CriterionResult instanton_residual(const AcceptanceOptions& o) {
  auto r = start(1, "instanton residual");
  const auto one = CoefficientField::constant(1.0);
  const auto g = grid_for(o);
  const auto z = make_instanton(g, 1.0, 1.0);
  r.checks.at_most("sup |R(z_1)|", sup_abs(pde_residual(z, one, 0.0).psi()), 1e-8 * o.tol_scale);

  // Convergence under halving h, from 128 cells until round-off dominates:
  // the finer residual must stay above 10 eps ||D2||_inf max psi.
  const double S = g->half_width();
  const double order_factor = 16.0;  // 2^4, the guaranteed order
  double prev = 0;
  int measured = 0;
  for (std::size_t cells = 128; cells <= 16 * 2048; cells *= 2) {
    const auto gk = EFGrid::make(o.problem, S, cells + 1);
    const auto zk = make_instanton(gk, 1.0, 1.0);
    const double res = sup_abs(pde_residual(zk, one, 0.0).psi());
    // central row; psi is largest there
    const auto& D2 = gk->second_derivative();
    const Eigen::Index mid = D2.rows() / 2;
    double rowsum = 0;
    for (int k = 0; k < D2.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(D2, k); it; ++it) {
        if (it.row() == mid) rowsum += std::abs(it.value());
      }
    }
    const double floor = 10.0 * std::numeric_limits<double>::epsilon() * rowsum * sup_abs(zk.psi());
    if (res < floor) break;
    if (prev > 0) {
      std::ostringstream os;
      os << "halving ratio h=" << 2 * S / static_cast<double>(cells / 2) << " -> h/2";
      r.checks.at_least(os.str(), prev / res, order_factor);
      ++measured;
    }
    prev = res;
  }
  r.checks.at_least("halvings measured above round-off", measured, 3);
  return r;
}

// --- 2 ------------------------------------------------------------------

CriterionResult parameter_identities(const AcceptanceOptions& o) {
  auto r = start(2, "parameter identities");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_exp = 0, worst_p = 0;
  int tuples = 0;
  while (tuples < 1000) {
    const int N = 3 + static_cast<int>(unit(rng) * 8);  // 3..10
    const double half = 0.5 * (N - 2);
    const double alpha = -1.0 + unit(rng) * (half + 1.0) * 0.999;
    const double beta = alpha + unit(rng) * 0.999;
    const double lmax = std::pow(0.5 * (N - 2 - 2 * alpha), 2);
    const double lambda = -1.0 + unit(rng) * (lmax + 1.0) * 0.999;
    ProblemParams q = o.problem;
    try {
      q = ProblemParams::derive(N, alpha, beta, lambda);
    } catch (const ConstraintViolation&) {
      continue;
    }
    ++tuples;
    const double lhs = q.N() - q.b() * q.p();
    const double rhs = 0.5 * q.p() * q.kappa();
    worst_exp = std::max(worst_exp, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
    const double pa = q.p_from_alpha_beta(), pb = q.p_from_a_b();
    worst_p = std::max(worst_p, std::abs(pa - pb) / std::max(std::abs(pa), std::abs(pb)));
  }
  r.checks.at_least("admissible tuples", tuples, 1000);
  r.checks.at_most("max rel |N - bp - p kappa/2|", worst_exp, 1e-13 * o.tol_scale);
  r.checks.at_most("max rel |p(alpha,beta) - p(a,b)|", worst_p, 1e-13 * o.tol_scale);
  return r;
}

// --- 3 ------------------------------------------------------------------

CriterionResult kelvin_suite(const AcceptanceOptions& o) {
  auto r = start(3, "Kelvin suite");
  const auto g = grid_for(o);
  const auto& q = o.problem;
  const double mu_k = kelvin_centre(q);
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto z = make_instanton(g, 1.0, mu);
    const auto kz = kelvin(z);
    const auto kkz = kelvin(kz);
    double inv = 0;
    for (std::size_t i = 0; i < z.size(); ++i) inv = std::max(inv, std::abs(kkz.psi(i) - z.psi(i)));
    r.checks.at_most("involution max diff, " + tag("mu", mu), inv, 0.0);
    const double n0 = norm_Da(z), n1 = norm_Da(kz);
    r.checks.at_most("D_a norm relative change, " + tag("mu", mu), std::abs(n1 - n0) / n0, 1e-10 * o.tol_scale);
    const auto fit = fit_instanton(kz);
    r.checks.at_most("refit residual, " + tag("mu", mu), fit.residual, 1e-6 * o.tol_scale);
    r.checks.at_most("refit mu vs mu_K^2/mu (relative), " + tag("mu", mu),
                     std::abs(fit.mu - mu_k * mu_k / mu) / (mu_k * mu_k / mu), 1e-6 * o.tol_scale);
  }
  return r;
}

// --- 4 ------------------------------------------------------------------

CriterionResult pohozaev_local(const AcceptanceOptions& o) {
  auto r = start(4, "Pohozaev local identity");
  const auto g = grid_for(o);
  const auto one = CoefficientField::constant(1.0);
  for (double mu : {0.5, 1.0}) {
    const auto z = make_instanton(g, 1.0, mu);
    for (double sigma : {0.5, 1.0, 2.0}) {
      const auto rep = local_identity(z, one, sigma, 1.0);
      r.checks.at_most("relative residual, " + tag("mu", mu) + " " + tag("sigma", sigma), rep.relative_residual,
                       1e-6 * o.tol_scale);
    }
  }
  return r;
}

// --- 5 ------------------------------------------------------------------

CriterionResult boundary_term(const AcceptanceOptions& o) {
  auto r = start(5, "boundary term");
  const auto g = grid_for(o);
  const auto& q = o.problem;
  const auto G = green(g);
  for (double sigma : {1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0}) {
    r.checks.at_most("|int B| for G_a, " + tag("sigma", sigma), std::abs(boundary_term_B(G, sigma)),
                     1e-10 * o.tol_scale);
  }
  const double k2 = g->decay_rate();
  std::vector<double> psi(g->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = 2.0 * std::cosh(k2 * g->node(i));
  const RadialFunction G1(g, std::move(psi), TailDecay{-k2, -k2}, k2);
  const double expected = -0.5 * q.kappa() * q.kappa() * q.sphere_area();
  const double B1 = boundary_term_B(G1, 1e-3);
  r.checks.at_most("G_a + 1 at sigma=1e-3 vs -(kappa^2/2)|S| (relative)", std::abs(B1 - expected) / std::abs(expected),
                   1e-3 * o.tol_scale);
  return r;
}

// --- 6 ------------------------------------------------------------------

CriterionResult spectral_facts(const AcceptanceOptions& o) {
  auto r = start(6, "spectral facts");
  const auto g = grid_for(o);
  const auto& q = o.problem;
  const auto z = make_instanton(g, 1.0, 1.0);
  const double nz = norm_Da(z);
  const double rq = f0_hessian_form(z, z, z) / (nz * nz);
  r.checks.at_most("|RQ(z_1) + (p-2)|", std::abs(rq + (q.p() - 2.0)), 1e-6 * o.tol_scale);
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto zm = make_instanton(g, 1.0, mu);
    const auto xi = tangent_vector(g, mu).xi;
    const auto Hxi = f0_hessian_apply(zm, xi);
    r.checks.at_most("||f0''(z_mu) xi|| / ||xi||, " + tag("mu", mu), norm_Da(Hxi) / norm_Da(xi), 1e-5 * o.tol_scale);
  }
  Reduction red(g, CoefficientField::constant(1.0));
  const auto zc = red.base(1.0);
  const auto sp = hessian_spectrum(red, zc, 0.0, 1.0);
  r.checks.at_least("projected positivity margin", sp.projected_margin, std::numeric_limits<double>::min());
  r.checks.require("one negative direction (spectral)", sp.negative_count == 1);
  return r;
}

// --- 7 ------------------------------------------------------------------

CriterionResult melnikov_suite(const AcceptanceOptions& o) {
  auto r = start(7, "Melnikov suite");
  const auto g = grid_for(o);
  {
    Melnikov m(g, CoefficientField::constant(1.3));
    const auto c = critical_points(m);
    r.checks.at_most("constant K: max |Gamma'| / scale", c.max_abs_prime / c.scale, 1e-10 * o.tol_scale);
  }
  // a field with K~ != K
  std::vector<double> tr, tk;
  for (int i = 0; i <= 160; ++i) {
    const double x = std::pow(10.0, -4.0 + 8.0 * i / 160.0);
    tr.push_back(x);
    tk.push_back(1.0 + 0.3 * x * x / (1.0 + x * x) - 0.2 * x * x / (1.0 + 3.0 * x * x * x * x));
  }
  for (const auto& [name, K] : {std::pair{std::string("bump 0.5"), CoefficientField::self_dual_bump(0.5)},
                                std::pair{std::string("table"), CoefficientField::table(tr, tk)}}) {
    Melnikov m(g, K);
    const auto c = critical_points(m);
    r.checks.at_most("Kelvin symmetry defect / scale, " + name, kelvin_symmetry_defect(m, c.tau), 1e-8 * o.tol_scale);
  }
  Melnikov m(g, CoefficientField::self_dual_bump(0.5));
  const double formula = gamma_second_at_zero(m);
  const auto ex = gamma_second_extrapolated(m);
  r.checks.at_most("Gamma''(0) formula vs extrapolated differences (relative)",
                   std::abs(formula - ex.value) / std::abs(formula), 1e-3 * o.tol_scale);
  return r;
}

// --- 8 ------------------------------------------------------------------

CriterionResult degree_suite(const AcceptanceOptions& o) {
  auto r = start(8, "degree");
  const auto g = grid_for(o);
  for (double A : {0.5, -0.5}) {
    const auto K = CoefficientField::self_dual_bump(A);
    Melnikov m(g, K);
    const auto c = critical_points(m);
    const auto d = degree_check(m, c);
    const int expected = A > 0 ? -1 : 1;
    r.checks.require("formula degree = " + std::to_string(expected) + ", " + tag("A", A), d.formula == expected);
    r.checks.require("endpoint count agrees, " + tag("A", A), d.endpoints_resolved && d.endpoint_count == expected);
    r.checks.require("critical-point sum agrees, " + tag("A", A), d.critical_sum == expected);
  }
  return r;
}

// --- 9 ------------------------------------------------------------------

// max over t <= 2 x value at the largest t (+ absolute floor)
void bounded(Checks& c, const std::string& name, const std::vector<double>& vals, double floor) {
  const double ref = std::abs(vals.front());
  double worst = 0;
  for (double v : vals) worst = std::max(worst, std::abs(v));
  c.at_most(name + ": max / bound", worst / (2.0 * ref + floor), 1.0);
}

CriterionResult reduction_asymptotics(const AcceptanceOptions& o) {
  auto r = start(9, "reduction asymptotics");
  const auto g = grid_for(o);
  const auto K = CoefficientField::self_dual_bump(0.5);
  Reduction red(g, K);
  Melnikov mel(g, K);
  const std::vector<double> ts{1e-2, 1e-3, 1e-4};

  std::vector<double> wratio;
  for (double t : ts) wratio.push_back(norm_Da(red.solve(1.0, t).w) / t);
  const auto [lo, hi] = std::minmax_element(wratio.begin(), wratio.end());
  r.checks.at_most("||w(1,t)||/t max/min", *hi / *lo, 2.0);

  for (double mu : {0.7, 1.5}) {
    std::vector<double> q;
    for (double t : ts) q.push_back((red.phi_prime(mu, t) + t * mel.gamma_prime(mu)) / (t * t));
    bounded(r.checks, "|Phi' + t Gamma'|/t^2, " + tag("mu", mu), q, 1e-6);
  }

  const double g2 = mel.gamma_second(1.0);
  std::vector<double> rates;
  for (double t : ts) {
    const auto curve = phi_critical_points(red, t);
    if (curve.critical_points.empty()) {
      r.checks.require("critical point of Phi_t found, " + tag("t", t), false);
      continue;
    }
    const auto& pt = nearest_critical_point(curve, 1.0);
    rates.push_back(std::abs(pt.mu - 1.0) / t);
    r.checks.require("sgn Phi''(mu_t) = -sgn Gamma''(1), " + tag("t", t), sgn(pt.phi_second) == -sgn(g2) && g2 != 0);
    if (t <= 1e-3) {
      int near = 0;
      for (const auto& p : curve.critical_points) near += std::abs(std::log(p.mu)) < std::log(2.0);
      r.checks.require("exactly one mu_t in [1/2, 2], " + tag("t", t), near == 1);
    }
  }
  if (rates.size() == ts.size()) bounded(r.checks, "|mu_t - 1|/t", rates, 1e-6);
  return r;
}

// --- 10 -----------------------------------------------------------------

CriterionResult end_to_end(const AcceptanceOptions& o) {
  auto r = start(10, "end-to-end existence");
  const auto g = grid_for(o);
  const auto K = CoefficientField::self_dual_bump(0.5);
  const auto run = continuation(g, K);
  r.checks.require("continuation COMPLETED", run.status == RunStatus::Completed);
  if (run.states.empty()) return r;
  const auto& last = run.states.back();
  r.checks.require("reached t=1", last.t == 1.0);
  r.checks.at_most("final sup |pde_residual|", last.pde_residual, 1e-8 * o.tol_scale);
  r.checks.at_most("final |global Pohozaev| / scale",
                   std::abs(last.diagnostics.pohozaev_global) / last.diagnostics.pohozaev_scale, 1e-6 * o.tol_scale);
  r.checks.require("final sandwich constant finite", std::isfinite(last.diagnostics.sandwich_C));
  const auto v = to_v_formulation(last.solution);
  const auto sw = v_sandwich(v);
  r.checks.require("v sandwich finite", std::isfinite(sw.C) && sw.inf > 0);
  r.checks.at_most("v sandwich constant vs u sandwich (relative)",
                   std::abs(sw.C - last.diagnostics.sandwich_C) / last.diagnostics.sandwich_C, 1e-12 * o.tol_scale);
  r.checks.at_most("v-formulation residual", sup_abs(v_formulation_residual(v, K, 1.0)), 1e-7 * o.tol_scale);
  double cmin = std::numeric_limits<double>::infinity(), cmax = 0;
  for (const auto& s : run.states) {
    cmin = std::min(cmin, s.diagnostics.sandwich_C);
    cmax = std::max(cmax, s.diagnostics.sandwich_C);
  }
  r.checks.at_most("sandwich_C max/min along the path", cmax / cmin, 10.0);
  r.checks.at_most("invariant failures on accepted states", static_cast<double>(run.violations.size()), 0.0);
  return r;
}

// --- 11 -----------------------------------------------------------------

CriterionResult synthetic_blowup(const AcceptanceOptions& o) {
  auto r = start(11, "synthetic blow-up family");
  const auto g = grid_for(o);
  const double kappa = o.problem.kappa();
  const std::vector<double> mus{1.0, 0.1, 0.01};
  std::vector<DiagnosticsRecord> d;
  for (double mu : mus) {
    d.push_back(blowup_diagnostics(make_instanton(g, 1.0, mu)));
    r.checks.require("wbar monotone after peak, " + tag("mu", mu), d.back().wbar_monotone_after_peak);
  }
  for (std::size_t k = 1; k < mus.size(); ++k) {
    r.checks.at_most("|peak drift - ln 10|, " + tag("mu", mus[k]),
                     std::abs(d[k - 1].wbar_peak_s - d[k].wbar_peak_s - std::log(10.0)), 1e-3 * o.tol_scale);
  }
  for (std::size_t k = 1; k < mus.size(); ++k) {
    const double expected = std::pow(mus[k], -0.5 * kappa);
    r.checks.at_most("max u scaling vs mu^{-kappa/2} (relative), " + tag("mu", mus[k]),
                     std::abs(d[k].max_u / d[0].max_u - expected) / expected, 1e-6 * o.tol_scale);
  }
  // Normalization: max u times the distance scale mu^{kappa/2} stays bounded.
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (std::size_t k = 0; k < mus.size(); ++k) {
    const double v = d[k].max_u * std::pow(mus[k], 0.5 * kappa);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  r.checks.at_most("max u mu^{kappa/2} spread (max/min - 1)", hi / lo - 1.0, 1e-6 * o.tol_scale);
  return r;
}

}  // namespace

Json CriterionResult::to_json() const {
  Json j{{"id", id}, {"title", title}, {"passed", passed()}, {"seconds", seconds}, {"checks", checks.to_json()}};
  if (!error.empty()) j["error"] = error;
  return j;
}

const std::vector<Criterion>& acceptance_criteria() {
  static const std::vector<Criterion> list{
      {1, "instanton residual", instanton_residual},
      {2, "parameter identities", parameter_identities},
      {3, "Kelvin suite", kelvin_suite},
      {4, "Pohozaev local identity", pohozaev_local},
      {5, "boundary term", boundary_term},
      {6, "spectral facts", spectral_facts},
      {7, "Melnikov suite", melnikov_suite},
      {8, "degree", degree_suite},
      {9, "reduction asymptotics", reduction_asymptotics},
      {10, "end-to-end existence", end_to_end},
      {11, "synthetic blow-up family", synthetic_blowup},
  };
  return list;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<CriterionResult> out;
  for (const auto& c : acceptance_criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = c.run(opts);
    } catch (const std::exception& e) {
      r = CriterionResult{};
      r.id = c.id;
      r.title = c.title;
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string summary_line(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.passed() ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << r.id << "  " << r.title << "  ("
     << std::fixed << std::setprecision(1) << r.seconds << " s)";
  os.unsetf(std::ios::fixed);
  os << std::setprecision(3);
  if (!r.error.empty()) {
    os << "  error: " << r.error;
    return os.str();
  }
  // the tightest check: largest value/bound ratio among bounded checks
  const CheckResult* worst = nullptr;
  for (const auto& c : r.checks.items()) {
    if (!c.passed) {
      worst = &c;
      break;
    }
  }
  if (worst != nullptr) {
    os << "  failed: " << worst->name << " = " << worst->value << " (bound " << worst->bound << ")";
  } else {
    os << "  " << r.checks.items().size() << " checks";
  }
  return os.str();
}

}  // namespace ckn
