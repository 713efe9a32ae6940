#include "ckn/melnikov.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/instanton.hpp"

namespace ckn {

namespace {

int sgn(double x) { return (x > 0) - (x < 0); }

}  // namespace

Melnikov::Melnikov(std::shared_ptr<const EFGrid> grid, CoefficientField K)
    : grid_(std::move(grid)), K_(std::move(K)) {
  const auto& q = grid_->params();
  const auto z = centred_instanton(grid_, 1.0);
  const auto w = power_weights(*grid_);
  mass_.resize(z.size());
  radius_.assign(grid_->radii().begin(), grid_->radii().end());
  for (std::size_t i = 0; i < z.size(); ++i) {
    mass_[i] = grid_->sphere_area() / q.p() * w[i] * std::pow(z.psi(i), q.p());
    unit_ += mass_[i];
  }
}

double Melnikov::gamma(double tau) const {
  double sum = 0;
  for (std::size_t i = 0; i < mass_.size(); ++i) sum += mass_[i] * K_.eval_extended(tau * radius_[i]);
  return sum;
}

double Melnikov::gamma_tilde(double tau) const {
  double sum = 0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    sum += mass_[i] * K_.eval_extended(1.0 / (tau * radius_[i]));
  }
  return sum;
}

double Melnikov::gamma_prime(double tau) const {
  double sum = 0;
  for (std::size_t i = 0; i < mass_.size(); ++i) {
    sum += mass_[i] * K_.radial_derivative_extended(tau * radius_[i]) * radius_[i];
  }
  return sum;
}

double Melnikov::gamma_second(double tau) const {
  const double h = 1e-4 * tau;
  return (gamma_prime(tau + h) - gamma_prime(tau - h)) / (2 * h);
}

double Melnikov::gamma_at_zero() const { return K_.eval_extended(0.0) * unit_; }

GammaZeroGuard gamma_second_at_zero_guard(const ProblemParams& q) {
  GammaZeroGuard g;
  g.exponent = 0.5 * q.p() * q.kappa();
  g.integrable = g.exponent > g.required;
  return g;
}

double gamma_second_at_zero(const Melnikov& m) {
  const auto& g = m.grid();
  const auto& q = g.params();
  const auto poles = laplacians_at_poles(m.coefficient(), q.N());
  const auto guard = gamma_second_at_zero_guard(q);
  if (!guard.integrable) {
    std::ostringstream os;
    os << "e^{2s} psi^p not integrable: N-bp=" << guard.exponent << " <= 2";
    throw DomainError(os.str());
  }
  const auto z = centred_instanton(m.grid_ptr(), 1.0);
  std::vector<double> f(z.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = std::exp(2.0 * g.node(i)) * std::pow(z.psi(i), q.p());
  }
  const double rate = 0.5 * q.p() * q.kappa();
  const double integral = g.integrate(f, rate + 2.0, rate - 2.0);
  return poles.at_origin / (q.N() * q.p()) * g.sphere_area() * integral;
}

double gamma_second_difference(const Melnikov& m, double h) {
  return (m.gamma(2 * h) - 2 * m.gamma(h) + m.gamma_at_zero()) / (h * h);
}

ExtrapolatedSecond gamma_second_extrapolated(const Melnikov& m, double h0) {
  const auto& q = m.grid().params();
  const auto sh = instanton_shape(q);
  ExtrapolatedSecond out;
  const double nu0 = 0.5 * q.p() * q.kappa() - 2.0;
  for (int j = 0; j < 3; ++j) out.exponents.push_back(nu0 + j * sh.theta);
  const int k = static_cast<int>(out.exponents.size()) + 1;
  Eigen::MatrixXd A(k, k);
  Eigen::VectorXd rhs(k);
  for (int i = 0; i < k; ++i) {
    const double h = h0 / std::pow(2.0, i);
    out.steps.push_back(h);
    out.raw.push_back(gamma_second_difference(m, h));
    A(i, 0) = 1.0;
    for (int j = 0; j + 1 < k; ++j) A(i, j + 1) = std::pow(h / h0, out.exponents[j]);
    rhs[i] = out.raw.back();
  }
  out.value = A.fullPivLu().solve(rhs)[0];
  return out;
}

GammaCurve critical_points(const Melnikov& m, const MelnikovOptions& opts) {
  if (!(opts.tau_min > 0) || !(opts.tau_max > opts.tau_min) || opts.samples < 2) {
    throw DomainError("critical_points needs 0 < tau_min < tau_max and at least two samples");
  }
  GammaCurve c;
  const int n = opts.samples;
  const double lo = std::log(opts.tau_min), hi = std::log(opts.tau_max);
  for (int i = 0; i < n; ++i) {
    const double tau = std::exp(lo + (hi - lo) * i / (n - 1));
    c.tau.push_back(tau);
    c.gamma.push_back(m.gamma(tau));
    c.gamma_prime.push_back(m.gamma_prime(tau));
    c.scale = std::max(c.scale, std::abs(c.gamma.back()));
    c.max_abs_prime = std::max(c.max_abs_prime, std::abs(c.gamma_prime.back()));
  }
  c.gamma_at_zero = m.gamma_at_zero();
  c.flat = c.max_abs_prime <= opts.flat_tol * c.scale;
  if (c.flat) return c;
  c.sign_prime_min = sgn(c.gamma_prime.front());
  c.sign_prime_max = sgn(c.gamma_prime.back());

  const double zero_tol = opts.root_tol * c.scale;
  auto add_point = [&](double tau) {
    GammaCriticalPoint pt;
    pt.tau = tau;
    pt.gamma = m.gamma(tau);
    pt.gamma_second = m.gamma_second(tau);
    pt.nondegenerate = std::abs(pt.gamma_second) > opts.degenerate_tol * c.scale;
    c.critical_points.push_back(pt);
  };
  auto f = [&](double x) { return m.gamma_prime(std::exp(x)); };
  for (int i = 0; i + 1 < n; ++i) {
    const double fa = c.gamma_prime[i], fb = c.gamma_prime[i + 1];
    if (std::abs(fa) <= zero_tol && i > 0 && std::abs(c.gamma_prime[i - 1]) > zero_tol) {
      add_point(c.tau[i]);
      continue;
    }
    if (std::abs(fa) <= zero_tol || std::abs(fb) <= zero_tol || sgn(fa) == sgn(fb)) continue;
    std::uintmax_t iters = 100;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, std::log(c.tau[i]), std::log(c.tau[i + 1]), fa, fb,
        [&](double x0, double x1) {
          return std::abs(x1 - x0) < 1e-15 || std::abs(f(0.5 * (x0 + x1))) <= zero_tol;
        },
        iters);
    add_point(std::exp(0.5 * (a + b)));
  }
  return c;
}

int degree(const CoefficientField& K, int N) {
  const auto poles = laplacians_at_poles(K, N);
  return -(poles.sign_origin + poles.sign_infinity) / 2;
}

DegreeReport degree_check(const Melnikov& m, const GammaCurve& curve) {
  DegreeReport r;
  r.formula = degree(m.coefficient(), m.grid().params().N());
  r.endpoints_resolved = !curve.flat && curve.sign_prime_min != 0 && curve.sign_prime_max != 0;
  r.endpoint_count = (curve.sign_prime_max - curve.sign_prime_min) / 2;
  for (const auto& pt : curve.critical_points) {
    if (pt.nondegenerate) r.critical_sum += sgn(pt.gamma_second);
  }
  r.consistent = r.endpoints_resolved && r.endpoint_count == r.formula && r.critical_sum == r.formula;
  return r;
}

double kelvin_symmetry_defect(const Melnikov& m, const std::vector<double>& taus) {
  double worst = 0, scale = 0;
  for (double tau : taus) {
    const double g = m.gamma(tau);
    scale = std::max(scale, std::abs(g));
    worst = std::max(worst, std::abs(g - m.gamma_tilde(1.0 / tau)));
  }
  return scale > 0 ? worst / scale : 0.0;
}

void write_gamma_csv(std::ostream& os, const GammaCurve& curve) {
  const auto prec = os.precision(17);
  os << "tau,gamma,gamma_prime\n";
  for (std::size_t i = 0; i < curve.tau.size(); ++i) {
    os << curve.tau[i] << ',' << curve.gamma[i] << ',' << curve.gamma_prime[i] << '\n';
  }
  os.precision(prec);
}

}  // namespace ckn
