#include "ckn/solver.hpp"

#include <Eigen/SparseLU>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/instanton.hpp"
#include "ckn/pohozaev.hpp"

namespace ckn {

namespace {

using Vec = Eigen::VectorXd;

double sup_abs(std::span<const double> x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

std::vector<double> coefficient_t(const EFGrid& g, const CoefficientField& K, double t) {
  std::vector<double> kt(g.size());
  for (std::size_t i = 0; i < kt.size(); ++i) kt[i] = 1.0 + t * (K.eval_extended(g.radius(i)) - 1.0);
  return kt;
}

std::vector<double> residual_with(const EFGrid& g, std::span<const double> psi,
                                  const std::vector<double>& kt, BoundaryCondition bc) {
  const auto& q = g.params();
  const double p = q.p();
  const double k2 = 0.5 * q.kappa();
  const auto d2 = g.d2(psi);
  const std::size_t n = psi.size();
  std::vector<double> r(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    r[i] = -d2[i] + k2 * k2 * psi[i] - kt[i] * std::pow(std::abs(psi[i]), p - 2.0) * psi[i];
  }
  if (bc == BoundaryCondition::Dirichlet) {
    r[0] = psi[0];
    r[n - 1] = psi[n - 1];
  } else {
    const Vec d = g.first_derivative() * Eigen::Map<const Vec>(psi.data(), static_cast<Eigen::Index>(n));
    r[0] = d[0] - k2 * psi[0];
    r[n - 1] = d[static_cast<Eigen::Index>(n - 1)] + k2 * psi[n - 1];
  }
  return r;
}

SparseMatrix jacobian_with(const EFGrid& g, std::span<const double> psi,
                           const std::vector<double>& kt, BoundaryCondition bc) {
  const auto& q = g.params();
  const double p = q.p();
  const double k2 = 0.5 * q.kappa();
  const auto n = static_cast<Eigen::Index>(psi.size());
  const SparseMatrix& D2 = g.second_derivative();
  const SparseMatrix& D1 = g.first_derivative();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(D2.nonZeros() + 2 * n));
  for (int k = 0; k < D2.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(D2, k); it; ++it) {
      if (it.row() == 0 || it.row() == n - 1) continue;
      trip.emplace_back(it.row(), it.col(), -it.value());
    }
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    trip.emplace_back(i, i, k2 * k2 - (p - 1.0) * kt[ui] * std::pow(std::abs(psi[ui]), p - 2.0));
  }
  if (bc == BoundaryCondition::Dirichlet) {
    trip.emplace_back(0, 0, 1.0);
    trip.emplace_back(n - 1, n - 1, 1.0);
  } else {
    for (int k = 0; k < D1.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(D1, k); it; ++it) {
        if (it.row() == 0 || it.row() == n - 1) trip.emplace_back(it.row(), it.col(), it.value());
      }
    }
    trip.emplace_back(0, 0, -k2);
    trip.emplace_back(n - 1, n - 1, k2);
  }
  SparseMatrix J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

}  // namespace

const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Robin ? "robin" : "dirichlet";
}

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "COMPLETED";
    case RunStatus::NewtonFail: return "NEWTON_FAIL";
    case RunStatus::BlowupSuspected: return "BLOWUP_SUSPECTED";
  }
  return "?";
}

std::vector<double> strong_residual(const RadialFunction& u, const CoefficientField& K, double t,
                                    BoundaryCondition bc) {
  const auto& g = u.grid();
  return residual_with(g, u.psi(), coefficient_t(g, K, t), bc);
}

NewtonResult newton_solve(double t, const CoefficientField& K, const RadialFunction& u0,
                          const NewtonOptions& opts) {
  const auto& g = u0.grid();
  const auto kt = coefficient_t(g, K, t);
  const auto n = static_cast<Eigen::Index>(u0.size());
  Vec psi = Eigen::Map<const Vec>(u0.psi().data(), n);
  auto span_of = [&](const Vec& v) { return std::span<const double>(v.data(), static_cast<std::size_t>(n)); };

  auto F = residual_with(g, span_of(psi), kt, opts.boundary);
  double res = sup_abs(F);
  int iters = 0;
  Eigen::SparseLU<SparseMatrix> lu;
  auto require_positive = [&] {
    const Eigen::Index lo = opts.boundary == BoundaryCondition::Dirichlet ? 1 : 0;
    for (Eigen::Index i = lo; i < n - lo; ++i) {
      if (!(psi[i] > 0)) {
        std::ostringstream os;
        os << "newton_solve: iterate not positive at s=" << g.node(static_cast<std::size_t>(i));
        throw PositivityLoss(os.str(), g.node(static_cast<std::size_t>(i)));
      }
    }
  };
  while (res > opts.tolerance) {
    if (iters >= opts.max_iterations) {
      std::ostringstream os;
      os << "newton_solve: no convergence in " << iters << " iterations at t=" << t;
      throw NewtonDivergence(os.str(), res);
    }
    const auto J = jacobian_with(g, span_of(psi), kt, opts.boundary);
    lu.compute(J);
    if (lu.info() != Eigen::Success) throw NewtonDivergence("newton_solve: singular Jacobian", res);
    const Vec step = lu.solve(-Eigen::Map<const Vec>(F.data(), n));
    ++iters;
    // Affine-invariant damping: the simplified correction J^{-1} F(trial)
    // must shrink. Residual tests fail along the soft dilation mode.
    const double step_norm = step.norm();
    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opts.max_halvings; ++k, alpha *= 0.5) {
      const Vec trial = psi + alpha * step;
      auto Ft = residual_with(g, span_of(trial), kt, opts.boundary);
      const double rt = sup_abs(Ft);
      if (!std::isfinite(rt)) continue;
      const Vec simplified = lu.solve(Eigen::Map<const Vec>(Ft.data(), n));
      if (rt <= opts.tolerance || simplified.norm() <= (1.0 - 0.25 * alpha) * step_norm) {
        psi = trial;
        F = std::move(Ft);
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "newton_solve: line search failed at t=" << t << ", residual " << res;
      throw NewtonDivergence(os.str(), res);
    }
    require_positive();
  }
  require_positive();  // also covers a start that needs no step
  return {u0.with_psi(std::vector<double>(psi.data(), psi.data() + n)), iters, res};
}

double pde_residual_sup(const RadialFunction& u, const CoefficientField& K, double t) {
  return sup_abs(pde_residual(u, K, t).psi());
}

DiagnosticsRecord blowup_diagnostics(const RadialFunction& u, double log_rho) {
  const auto& g = u.grid();
  const double kappa = g.params().kappa();
  const std::size_t n = u.size();
  DiagnosticsRecord d;
  d.norm_E = norm_E(u);

  double sup = -std::numeric_limits<double>::infinity(), inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    // u / omega_a = r^{-kappa/2} psi (1 + r^kappa) = 2 cosh(kappa s/2) psi
    const double ratio = 2.0 * std::cosh(0.5 * kappa * g.node(i)) * u.psi(i);
    sup = std::max(sup, ratio);
    inf = std::min(inf, ratio);
    d.max_u = std::max(d.max_u, u.value(i));
  }
  d.sup_ratio = sup;
  d.inf_ratio = inf;
  d.sandwich_C = inf > 0 ? std::max(sup, 1.0 / inf) : std::numeric_limits<double>::infinity();

  const auto psi = u.psi();
  const std::size_t j = static_cast<std::size_t>(std::max_element(psi.begin(), psi.end()) - psi.begin());
  d.wbar_peak_s = g.node(j);
  if (j > 0 && j + 1 < n) {
    const auto dpsi = g.d1(psi);
    auto f = [&](double s) { return g.interpolate(dpsi, s); };
    const double a = g.node(j - 1), b = g.node(j + 1);
    const double fa = f(a), fb = f(b);
    if (fa > 0 && fb < 0) {
      std::uintmax_t iters = 100;
      const auto [x0, x1] = boost::math::tools::toms748_solve(
          f, a, b, fa, fb, [](double l, double r) { return std::abs(r - l) < 1e-14; }, iters);
      d.wbar_peak_s = 0.5 * (x0 + x1);
    }
  }
  d.wbar_monotone_after_peak = true;
  std::size_t first = j;
  while (first + 1 < n && g.node(first) <= d.wbar_peak_s) ++first;
  for (std::size_t i = first; i + 1 < n && g.node(i + 1) <= log_rho; ++i) {
    if (!(psi[i + 1] < psi[i])) {
      d.wbar_monotone_after_peak = false;
      break;
    }
  }
  const double r_peak = std::exp(d.wbar_peak_s);
  for (std::size_t i = 0; i < n; ++i) {
    if (g.radius(i) < r_peak) continue;
    d.envelope_C = std::max(d.envelope_C, u.value(i) * d.max_u * std::pow(g.radius(i), kappa));
  }

  double defect = 0;
  const double scale = sup_abs(psi);
  for (std::size_t i = 0; i < n; ++i) defect = std::max(defect, std::abs(psi[i] - psi[n - 1 - i]));
  d.symmetry_defect = scale > 0 ? defect / scale : 0.0;
  return d;
}

DiagnosticsRecord blowup_diagnostics(const RadialFunction& u, const CoefficientField& K, double t,
                                     double log_rho) {
  auto d = blowup_diagnostics(u, log_rho);
  d.pohozaev_global = global_identity(u, K, t);
  d.pohozaev_scale = global_identity_scale(u, K, t);
  return d;
}

std::vector<double> v_formulation_residual(const RadialFunction& v, const CoefficientField& K,
                                           double t) {
  const auto& g = v.grid();
  const auto& q = g.params();
  const double alpha = q.alpha(), beta = q.beta(), lambda = q.lambda(), p = q.p();
  const double gamma = 0.5 * q.kappa() + alpha - q.a();
  const auto vals = v.values();
  const auto vs = g.d1(vals);
  const auto vss = g.d2(vals);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = g.radius(i);
    const double vr = vs[i] / r;
    const double vrr = (vss[i] - vs[i]) / (r * r);
    const double Kt = 1.0 + t * (K.eval_extended(r) - 1.0);
    const double lhs = -std::pow(r, -2.0 * alpha) * (vrr + (q.N() - 1.0 - 2.0 * alpha) / r * vr) -
                       lambda * std::pow(r, -2.0 - 2.0 * alpha) * vals[i];
    const double rhs = Kt * std::pow(std::abs(vals[i]), p - 2.0) * vals[i] * std::pow(r, -beta * p);
    out[i] = std::pow(r, 2.0 + 2.0 * alpha + gamma) * (lhs - rhs);
  }
  return out;
}

Sandwich v_sandwich(const RadialFunction& v) {
  const auto& g = v.grid();
  const auto& q = g.params();
  Sandwich s{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = g.radius(i);
    const double x = std::pow(r, q.a() - q.alpha()) * (1.0 + std::pow(r, q.kappa())) * v.value(i);
    s.sup = std::max(s.sup, x);
    s.inf = std::min(s.inf, x);
  }
  s.C = s.inf > 0 ? std::max(s.sup, 1.0 / s.inf) : std::numeric_limits<double>::infinity();
  return s;
}

namespace {

void audit_state(const ContinuationState& st, const ContinuationOptions& opts,
                 std::vector<std::string>& violations) {
  auto note = [&](const std::string& what) {
    std::ostringstream os;
    os << "t=" << st.t << ": " << what;
    violations.push_back(os.str());
  };
  if (!(st.pde_residual <= opts.residual_bound)) note("pde_residual above bound");
  if (!(std::abs(st.diagnostics.pohozaev_global) <= opts.pohozaev_bound * st.diagnostics.pohozaev_scale)) {
    note("global Pohozaev above bound");
  }
  if (!std::isfinite(st.diagnostics.sandwich_C)) note("sandwich constant infinite");
  if (!(st.diagnostics.inf_ratio > 0)) note("profile not positive");
}

}  // namespace

ContinuationRun continuation(std::shared_ptr<const EFGrid> grid, const CoefficientField& K,
                             const ContinuationOptions& opts) {
  laplacians_at_poles(K, grid->params().N());
  if (!(opts.t_start > 0) || !(opts.t_end >= opts.t_start) || opts.t_end > 1.0) {
    throw DomainError("continuation needs 0 < t_start <= t_end <= 1");
  }
  ContinuationRun run{K};

  std::optional<RadialFunction> seed;
  try {
    Reduction red(grid, K);
    const auto curve = phi_critical_points(red, opts.t_start, opts.seed_search);
    const auto& pt = nearest_critical_point(curve, opts.seed_mu);
    run.seed_mu = pt.mu;
    run.seed_eta = pt.eta;
    seed = *pt.u;
  } catch (const Error& e) {
    run.status = RunStatus::NewtonFail;
    run.message = std::string("seed: ") + e.what();
    return run;
  }

  auto accept = [&](double t, NewtonResult&& nr) {
    ContinuationState st{t, std::move(nr.u), nr.iterations, {}, 0};
    st.diagnostics = blowup_diagnostics(st.solution, K, t);
    st.pde_residual = pde_residual_sup(st.solution, K, t);
    audit_state(st, opts, run.violations);
    run.t_schedule.push_back(t);
    run.states.push_back(std::move(st));
  };

  try {
    accept(opts.t_start, newton_solve(opts.t_start, K, *seed, opts.newton));
  } catch (const Error& e) {
    run.status = RunStatus::NewtonFail;
    run.message = std::string("first corrector: ") + e.what();
    return run;
  }

  double dt = opts.dt_initial;
  while (run.states.back().t < opts.t_end) {
    const auto& cur = run.states.back();
    const double t_new = std::min(opts.t_end, cur.t + dt);
    const double step = t_new - cur.t;
    // secant predictor
    std::vector<double> pred(cur.solution.psi().begin(), cur.solution.psi().end());
    if (run.states.size() >= 2) {
      const auto& prev = run.states[run.states.size() - 2];
      const double w = step / (cur.t - prev.t);
      for (std::size_t i = 0; i < pred.size(); ++i) pred[i] += w * (pred[i] - prev.solution.psi(i));
    }
    std::optional<NewtonResult> nr;
    std::string failure;
    try {
      nr = newton_solve(t_new, K, cur.solution.with_psi(std::move(pred)), opts.newton);
    } catch (const Error& e) {
      failure = e.what();
    }
    if (!nr || nr->iterations > opts.accept_iterations) {
      ++run.rejected_steps;
      dt *= 0.5;
      if (dt < opts.dt_min) {
        run.status = RunStatus::NewtonFail;
        std::ostringstream os;
        os << "step below " << opts.dt_min << " at t=" << cur.t;
        if (!failure.empty()) os << ": " << failure;
        run.message = os.str();
        return run;
      }
      continue;
    }
    const double prev_sup = cur.diagnostics.sup_ratio;
    const auto diag = blowup_diagnostics(nr->u);
    if (diag.sup_ratio > opts.blowup_factor * prev_sup) {
      run.status = RunStatus::BlowupSuspected;
      run.archived_wbar = nr->u;
      std::ostringstream os;
      os << "sup u/omega_a jumped from " << prev_sup << " to " << diag.sup_ratio << " at t=" << t_new;
      run.message = os.str();
      return run;
    }
    accept(t_new, std::move(*nr));
    dt = std::min(opts.dt_max, 2.0 * dt);
  }
  run.status = RunStatus::Completed;
  return run;
}

}  // namespace ckn
