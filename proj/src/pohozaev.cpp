#include "ckn/pohozaev.hpp"

#include <algorithm>
#include <cmath>

#include "ckn/errors.hpp"
#include "ckn/instanton.hpp"

namespace ckn {

double boundary_term_B(const RadialFunction& u, double sigma) {
  const auto& q = u.grid().params();
  const auto [val, slope] = surface_sample(u, sigma);
  const double kappa = q.kappa();
  const double a = q.a();
  const double bracket = 0.5 * kappa * std::pow(sigma, -2.0 * a) * val * slope +
                         0.5 * std::pow(sigma, 1.0 - 2.0 * a) * slope * slope;
  return q.sphere_area() * std::pow(sigma, q.N() - 1.0) * bracket;
}

PohozaevReport local_identity(const RadialFunction& u, const CoefficientField& K, double sigma,
                              double t) {
  const auto& g = u.grid();
  const auto& q = g.params();
  const double p = q.p();
  const double area = g.sphere_area();
  if (!(sigma > 0)) throw OutOfRange("local_identity needs sigma > 0");
  const double s_end = std::log(sigma);

  std::vector<double> vol(u.size());
  for (std::size_t i = 0; i < vol.size(); ++i) {
    const double r = g.radius(i);
    vol[i] = t * r * K.radial_derivative_extended(r) * std::pow(std::abs(u.psi(i)), p);
  }
  PohozaevReport rep;
  rep.sigma = sigma;
  rep.lhs_volume = area / p * g.integrate_to(vol, s_end, p * u.tails().left);

  // (sigma/p) |S| sigma^{N-1} K_t u^p sigma^{-bp} collapses to (|S|/p) K_t psi^p.
  const double psi = g.interpolate(u.psi(), s_end);
  const double Kt = 1.0 + t * (K.eval_extended(sigma) - 1.0);
  rep.lhs_surface = area / p * Kt * std::pow(std::abs(psi), p);
  rep.rhs_boundary = boundary_term_B(u, sigma);
  rep.residual = rep.lhs_volume - rep.lhs_surface - rep.rhs_boundary;

  const auto R = pde_residual(u, K, t);
  const auto dpsi = g.d1(u.psi());
  std::vector<double> corr(u.size());
  for (std::size_t i = 0; i < corr.size(); ++i) corr[i] = R.psi(i) * dpsi[i];
  rep.equation_correction = area * g.integrate_to(corr, s_end, std::numeric_limits<double>::infinity());

  const double scale =
      std::max({std::abs(rep.lhs_volume), std::abs(rep.lhs_surface), std::abs(rep.rhs_boundary)});
  if (scale > 0) {
    rep.relative_residual = std::abs(rep.residual) / scale;
    rep.relative_corrected = std::abs(rep.residual - rep.equation_correction) / scale;
  }
  return rep;
}

namespace {

double weighted_derivative_integral(const RadialFunction& u, const CoefficientField& K, double t,
                                    bool absolute) {
  const auto& g = u.grid();
  const double p = g.params().p();
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = g.radius(i);
    double v = t * r * K.radial_derivative_extended(r);
    if (absolute) v = std::abs(v);
    f[i] = v * std::pow(std::abs(u.psi(i)), p);
  }
  return g.sphere_area() * g.integrate(f, p * u.tails().left, p * u.tails().right);
}

}  // namespace

double global_identity(const RadialFunction& u, const CoefficientField& K, double t) {
  return weighted_derivative_integral(u, K, t, false);
}

double global_identity_scale(const RadialFunction& u, const CoefficientField& K, double t) {
  return weighted_derivative_integral(u, K, t, true);
}

double omega_sphere(const ProblemParams& params) { return params.sphere_area(); }

BubbleConstant bubble_constant(std::shared_ptr<const EFGrid> grid, double K0) {
  const auto& q = grid->params();
  const double p = q.p();
  const double kappa = q.kappa();
  const auto z = make_instanton(grid, K0, 1.0);
  std::vector<double> f(z.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = std::exp(0.5 * kappa * grid->node(i)) * std::pow(z.psi(i), p - 1.0);
  }
  // e^{kappa s/2} psi^{p-1}: rates p kappa/2 on the left, (p-2) kappa/2 on the right.
  const double left = 0.5 * p * kappa;
  const double right = 0.5 * (p - 2.0) * kappa;
  const double prefactor = K0 / (kappa * omega_sphere(q)) * grid->sphere_area();
  BubbleConstant out;
  out.value = prefactor * grid->integrate(f, left, right);
  out.tail_contribution = prefactor * (f.front() / left + f.back() / right);
  return out;
}

double bubble_constant_A(std::shared_ptr<const EFGrid> grid, double K0) {
  return bubble_constant(std::move(grid), K0).value;
}

double bubble_constant_A(const ProblemParams& params, double K0) {
  return bubble_constant_A(EFGrid::make_default(params), K0);
}

}  // namespace ckn
