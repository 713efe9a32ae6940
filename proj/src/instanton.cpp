#include "ckn/instanton.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

// log(1 + e^y) without overflow.
double softplus(double y) { return y > 30 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y)); }

double logistic(double y) {
  return y >= 0 ? 1.0 / (1.0 + std::exp(-y)) : std::exp(y) / (1.0 + std::exp(y));
}

double dilation_exponent(const ProblemParams& q) { return 2.0 / ((q.p() - 2.0) * q.kappa()); }

}  // namespace

InstantonShape instanton_shape(const ProblemParams& q) {
  const double N = q.N();
  const double d = 1.0 + q.a() - q.b();
  const double kappa = q.kappa();
  InstantonShape out;
  out.c = (N - 2.0 * d) / (N * kappa * kappa);
  out.theta = 2.0 * d * kappa / (N - 2.0 * d);
  out.E = (N - 2.0 * d) / (2.0 * d);
  return out;
}

double z1_eval(const ProblemParams& q, double r) {
  if (r == 0) return 1.0;
  const auto sh = instanton_shape(q);
  return std::exp(-sh.E * softplus(std::log(sh.c) + sh.theta * std::log(r)));
}

double z1_psi(const ProblemParams& q, double s) {
  const auto sh = instanton_shape(q);
  return std::exp(0.5 * q.kappa() * s - sh.E * softplus(std::log(sh.c) + sh.theta * s));
}

double z1_psi_prime(const ProblemParams& q, double s) {
  const auto sh = instanton_shape(q);
  const double y = std::log(sh.c) + sh.theta * s;
  return z1_psi(q, s) * (0.5 * q.kappa() - sh.E * sh.theta * logistic(y));
}

double z1_psi_second(const ProblemParams& q, double s) {
  const double psi = z1_psi(q, s);
  return 0.25 * q.kappa() * q.kappa() * psi - std::pow(psi, q.p() - 1.0);
}

double instanton_peak(const ProblemParams& q) {
  const auto sh = instanton_shape(q);
  return -std::log(sh.c) / sh.theta;
}

double kelvin_centre(const ProblemParams& q) { return std::exp(-instanton_peak(q)); }

RadialFunction make_instanton(std::shared_ptr<const EFGrid> grid, double K0, double mu) {
  if (!(K0 > 0) || !(mu > 0)) throw DomainError("make_instanton needs K0 > 0 and mu > 0");
  const auto& q = grid->params();
  const double amp = std::pow(K0, -1.0 / (q.p() - 2.0));
  const double shift = std::log(mu) - dilation_exponent(q) * std::log(K0);
  std::vector<double> psi(grid->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = amp * z1_psi(q, grid->node(i) - shift);
  return RadialFunction(std::move(grid), std::move(psi));
}

RadialFunction centred_instanton(std::shared_ptr<const EFGrid> grid, double tau) {
  const double mu_k = kelvin_centre(grid->params());
  return make_instanton(std::move(grid), 1.0, tau * mu_k);
}

RadialFunction kelvin(const RadialFunction& u) {
  std::vector<double> psi(u.psi().rbegin(), u.psi().rend());
  const TailDecay tails{u.tails().right, u.tails().left};
  return RadialFunction(u.grid_ptr(), std::move(psi), tails, u.weight_exponent());
}

double green(const ProblemParams& q, double r) {
  if (!(r > 0)) throw DomainError("green(r) needs r > 0");
  return std::pow(r, 2.0 + 2.0 * q.a() - q.N());
}

RadialFunction green(std::shared_ptr<const EFGrid> grid) {
  const double k2 = grid->decay_rate();
  std::vector<double> psi(grid->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = std::exp(-k2 * grid->node(i));
  // Grows like e^{kappa|s|/2} towards r = 0.
  return RadialFunction(grid, std::move(psi), TailDecay{-k2, k2}, k2);
}

RadialFunction linear_residual(const RadialFunction& u) {
  const auto& g = u.grid();
  const double k2 = 0.25 * g.params().kappa() * g.params().kappa();
  const auto d2 = g.d2(u.psi());
  std::vector<double> r(u.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -d2[i] + k2 * u.psi(i);
  return RadialFunction(u.grid_ptr(), std::move(r), TailDecay{}, g.decay_rate());
}

RadialFunction pde_residual(const RadialFunction& u, const CoefficientField& K, double t) {
  const auto& g = u.grid();
  const double p = g.params().p();
  auto lin = linear_residual(u);
  std::vector<double> r(lin.psi().begin(), lin.psi().end());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double Kt = 1.0 + t * (K.eval_extended(g.radius(i)) - 1.0);
    const double psi = u.psi(i);
    r[i] -= Kt * std::pow(std::abs(psi), p - 2.0) * psi;
  }
  return lin.with_psi(std::move(r));
}

std::vector<double> power_weights(const EFGrid& grid) {
  const auto& q = grid.params();
  return grid.lattice_weights(0.5 * q.p() * q.kappa());
}

double f0(const RadialFunction& u) {
  const double n = norm_Da(u);
  return 0.5 * n * n - integrate_volume_p(u) / u.grid().params().p();
}

double G_K(const RadialFunction& u, const CoefficientField& K) {
  const auto& g = u.grid();
  const double p = g.params().p();
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = K.eval_extended(g.radius(i)) * std::pow(std::abs(u.psi(i)), p);
  }
  return g.sphere_area() / p * g.integrate(f, p * u.tails().left, p * u.tails().right);
}

double f_eps(const RadialFunction& u, const CoefficientField& K, double eps) {
  return f0(u) - eps * G_K(u, K);
}

SparseMatrix f0_hessian_matrix(const RadialFunction& z) {
  const auto& g = z.grid();
  const double p = g.params().p();
  const auto w = power_weights(g);
  SparseMatrix h = g.gram();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    h.coeffRef(k, k) -= (p - 1.0) * g.sphere_area() * w[i] * std::pow(std::abs(z.psi(i)), p - 2.0);
  }
  return h;
}

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(const RadialFunction& u) {
  return {u.psi().data(), static_cast<Eigen::Index>(u.size())};
}

}  // namespace

double f0_hessian_form(const RadialFunction& z, const RadialFunction& v, const RadialFunction& w) {
  require_same_grid(z, v);
  require_same_grid(z, w);
  const auto h = f0_hessian_matrix(z);
  return as_vector(v).dot(h * as_vector(w));
}

RadialFunction f0_hessian_apply(const RadialFunction& z, const RadialFunction& v) {
  require_same_grid(z, v);
  const auto h = f0_hessian_matrix(z);
  Eigen::VectorXd rhs = h * as_vector(v);
  Eigen::VectorXd rep = z.grid().solve_gram(rhs);
  return RadialFunction(z.grid_ptr(), std::vector<double>(rep.data(), rep.data() + rep.size()));
}

TangentVector tangent_vector(std::shared_ptr<const EFGrid> grid, double mu) {
  if (!(mu > 0)) throw DomainError("tangent_vector needs mu > 0");
  const auto& q = grid->params();
  const double lm = std::log(mu);
  std::vector<double> psi(grid->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = -z1_psi_prime(q, grid->node(i) - lm) / mu;
  RadialFunction raw(grid, std::move(psi));
  const double n = norm_Da(raw);
  std::vector<double> unit(raw.psi().begin(), raw.psi().end());
  for (auto& x : unit) x /= n;
  return {RadialFunction(std::move(grid), std::move(unit)), n};
}

InstantonFit fit_instanton(const RadialFunction& u) {
  const auto& g = u.grid();
  const auto& q = g.params();
  const std::size_t n = u.size();
  const auto peak = std::max_element(u.psi().begin(), u.psi().end());
  const double psi_max = *peak;
  if (!(psi_max > 0)) throw DomainError("fit_instanton needs a positive profile");
  double amp = psi_max / z1_psi(q, instanton_peak(q));
  double d = g.node(static_cast<std::size_t>(peak - u.psi().begin())) - instanton_peak(q);

  InstantonFit out;
  Eigen::MatrixXd J(n, 2);
  Eigen::VectorXd r(n);
  for (int it = 0; it < 60; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const double x = g.node(i) - d;
      const double base = z1_psi(q, x);
      r[i] = u.psi(i) - amp * base;
      J(i, 0) = base;
      J(i, 1) = -amp * z1_psi_prime(q, x);
    }
    const Eigen::Vector2d step = J.colPivHouseholderQr().solve(r);
    amp += step[0];
    d += step[1];
    out.iterations = it + 1;
    if (std::abs(step[0]) < 1e-15 * std::abs(amp) && std::abs(step[1]) < 1e-14) break;
  }
  double worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(u.psi(i) - amp * z1_psi(q, g.node(i) - d)));
  }
  out.amplitude = amp;
  out.shift = d;
  out.K0 = std::pow(amp, -(q.p() - 2.0));
  out.mu = std::exp(d - 2.0 * std::log(amp) / q.kappa());
  out.residual = worst / psi_max;
  return out;
}

}  // namespace ckn
