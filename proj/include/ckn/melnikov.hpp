#pragma once

// Melnikov function of the perturbation K,
//
//   Gamma_K(tau) = 1/p int K(x) z_tau^p |x|^{-bp} dx = |S^{N-1}|/p int K(tau e^s) psi_c(s)^p ds,
//
// with z_tau = z_{1, tau mu_K} the Kelvin-centred dilation, psi_c even in s.
// Then Gamma_K(tau) = Gamma_{K~}(1/tau) exactly on a symmetric grid, and
// critical points of Gamma_K locate the solutions of (P_t) for small t.

#include <iosfwd>
#include <memory>
#include <vector>

#include "ckn/coeff.hpp"
#include "ckn/efgrid.hpp"

namespace ckn {

class Melnikov {
 public:
  Melnikov(std::shared_ptr<const EFGrid> grid, CoefficientField K);

  const EFGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const EFGrid>& grid_ptr() const noexcept { return grid_; }
  const CoefficientField& coefficient() const noexcept { return K_; }

  double gamma(double tau) const;
  /// Gamma_{K~}(tau).
  double gamma_tilde(double tau) const;
  double gamma_prime(double tau) const;
  /// Centred difference of gamma_prime with step 1e-4 tau.
  double gamma_second(double tau) const;
  /// Continuous extension at 0: K(0) Gamma_1.
  double gamma_at_zero() const;
  /// Gamma for K = 1.
  double gamma_unit() const noexcept { return unit_; }

 private:
  std::shared_ptr<const EFGrid> grid_;
  CoefficientField K_;
  std::vector<double> mass_;  // |S| / p * weight_i * psi_c(s_i)^p
  std::vector<double> radius_;
  double unit_ = 0;
};

struct GammaZeroGuard {
  double exponent = 0;  // N - bp = p kappa / 2
  double required = 2;  // e^{2s} psi^p integrable iff exponent > required
  bool integrable = false;
};

GammaZeroGuard gamma_second_at_zero_guard(const ProblemParams& params);

/// (Delta K(0) / (N p)) |S^{N-1}| int e^{2s} psi_c^p ds. Throws
/// DegenerateCoefficient, or DomainError when the integrand does not decay.
double gamma_second_at_zero(const Melnikov& m);

/// (Gamma(2h) - 2 Gamma(h) + Gamma(0)) / h^2.
double gamma_second_difference(const Melnikov& m, double h);

struct ExtrapolatedSecond {
  double value = 0;
  std::vector<double> steps;
  std::vector<double> raw;        // plain second differences at the steps
  std::vector<double> exponents;  // eliminated powers of h
};

/// The plain second difference carries a non-analytic h^{p kappa/2 - 2} error;
/// the leading three error powers p kappa/2 - 2 + j theta are eliminated from
/// four steps h0, h0/2, h0/4, h0/8.
ExtrapolatedSecond gamma_second_extrapolated(const Melnikov& m, double h0 = 1e-2);

struct MelnikovOptions {
  double tau_min = 1e-3;
  double tau_max = 1e3;
  int samples = 401;
  double flat_tol = 1e-10;        // max |Gamma'| <= flat_tol * scale: flat
  double degenerate_tol = 1e-6;   // |Gamma''| <= degenerate_tol * scale: degenerate
  double root_tol = 1e-10;        // |Gamma'| at a refined root, relative to scale
};

struct GammaCriticalPoint {
  double tau = 0;
  double gamma = 0;
  double gamma_second = 0;
  bool nondegenerate = false;
};

struct GammaCurve {
  std::vector<double> tau, gamma, gamma_prime;
  std::vector<GammaCriticalPoint> critical_points;
  double scale = 0;  // max |Gamma| over the samples
  double max_abs_prime = 0;
  bool flat = false;  // Gamma' vanishes identically to flat_tol
  int sign_prime_min = 0;
  int sign_prime_max = 0;
  double gamma_at_zero = 0;
};

/// Samples Gamma on a log grid, brackets sign changes of Gamma' and refines
/// them with TOMS 748.
GammaCurve critical_points(const Melnikov& m, const MelnikovOptions& opts = {});

/// -(sgn Delta K(0) + sgn Delta K~(0)) / 2. Throws DegenerateCoefficient.
int degree(const CoefficientField& K, int N);

struct DegreeReport {
  int formula = 0;
  /// (sgn Gamma'(tau_max) - sgn Gamma'(tau_min)) / 2.
  int endpoint_count = 0;
  /// Sum of sgn Gamma''(tau) over nondegenerate critical points.
  int critical_sum = 0;
  bool endpoints_resolved = false;
  bool consistent = false;
};

DegreeReport degree_check(const Melnikov& m, const GammaCurve& curve);

/// max_k |Gamma_K(tau_k) - Gamma_{K~}(1/tau_k)| / scale.
double kelvin_symmetry_defect(const Melnikov& m, const std::vector<double>& taus);

/// CSV columns tau, gamma, gamma_prime.
void write_gamma_csv(std::ostream& os, const GammaCurve& curve);

}  // namespace ckn
