#pragma once

// Lyapunov-Schmidt reduction of f_t = f_0 - t G_{K-1} near the manifold
// Z = {z_mu}. For each (mu, t) the bordered system
//
//   f_t'(z_mu + w) = eta G xi_mu,    <w, xi_mu>_{D_a} = 0
//
// is solved by Newton in the grid values of w plus eta, and
// Phi_t(mu) = f_t(z_mu + w(mu, t)) is the reduced function. Critical points
// of f_t are the solutions of (P_t). mu is Kelvin-centred as in melnikov.

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "ckn/coeff.hpp"
#include "ckn/efgrid.hpp"
#include "ckn/instanton.hpp"

namespace ckn {

struct ReductionOptions {
  int max_iterations = 50;
  double tolerance = 1e-11;  // relative to ||z||_{D_a}
  int max_halvings = 20;     // damping
  int max_eps_splits = 8;    // continuation in t after a failed solve
};

struct ReductionSolution {
  double mu = 1;
  double eps = 0;
  RadialFunction w;
  double eta = 0;
  int newton_iters = 0;
  /// ||f_t'(z + w) - eta G xi||_* + |<w, xi>|.
  double residual_norm = 0;
  /// |<w, xi>_{D_a}|.
  double orthogonality = 0;
  /// ||f_t'(z + w) - eta G xi||_*.
  double stationarity = 0;
  /// ||f_t'(z)||_*, the reference for the stationarity bound.
  double initial_gradient = 0;

  RadialFunction solution() const;
  RadialFunction z;
};

struct PhiSample {
  ReductionSolution solution;
  double phi = 0;
  double phi_prime = 0;
};

class Reduction {
 public:
  Reduction(std::shared_ptr<const EFGrid> grid, CoefficientField K, ReductionOptions opts = {});

  const EFGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const EFGrid>& grid_ptr() const noexcept { return grid_; }
  const CoefficientField& coefficient() const noexcept { return K_; }
  const ReductionOptions& options() const noexcept { return opts_; }

  /// Kelvin-centred z_mu and its unit tangent.
  RadialFunction base(double mu) const;
  TangentVector tangent(double mu) const;

  /// Discrete f_t(u) and the dual vector f_t'(u).
  double energy(std::span<const double> psi, double t) const;
  /// f_t(a) - f_t(b), formed from a - b so close arguments keep their digits.
  double energy_difference(std::span<const double> a, std::span<const double> b, double t) const;
  Eigen::VectorXd gradient(std::span<const double> psi, double t) const;
  /// Discrete f_t''(u) = G - (p-1)|S| W K_t |u|^{p-2}.
  SparseMatrix hessian(std::span<const double> psi, double t) const;
  /// sqrt(g^T G^{-1} g).
  double dual_norm(const Eigen::VectorXd& g) const;

  /// Newton from w = 0; on failure, continuation in t from t/2.
  /// Throws NewtonDivergence.
  ReductionSolution solve(double mu, double t) const;
  ReductionSolution solve(double mu, double t, const ReductionSolution* guess) const;

  double phi(double mu, double t) const;
  /// Centred difference in ln mu with mu-step ~ 1e-4 mu.
  double phi_prime(double mu, double t) const;
  /// Phi, Phi' and the solution at mu, sharing the solves.
  PhiSample phi_sample(double mu, double t, const ReductionSolution* guess = nullptr) const;
  /// Second difference in ln mu with mu-step ~ 1e-2 mu.
  double phi_second(double mu, double t) const;

 private:
  std::optional<ReductionSolution> newton(double mu, double t, const ReductionSolution* guess) const;

  std::shared_ptr<const EFGrid> grid_;
  CoefficientField K_;
  ReductionOptions opts_;
  std::vector<double> Kvals_;   // K at the nodes
  std::vector<double> weights_;  // power_weights * |S|
};

struct PhiCriticalPoint {
  double mu = 0;
  double phi = 0;
  double phi_second = 0;
  /// Nearest nondegenerate critical point of Gamma_K and |mu - mu_bar| / t.
  double mu_bar = 0;
  double gamma_second = 0;
  double rate = 0;
  double eta = 0;
  std::optional<RadialFunction> u;  // z_mu + w(mu, t)
};

struct PhiCurve {
  double t = 0;
  std::vector<double> mu, phi, phi_prime;
  std::vector<PhiCriticalPoint> critical_points;
  bool flat = false;
};

struct PhiSearchOptions {
  double mu_min = 0.5;
  double mu_max = 2.0;
  int samples = 41;
  double flat_tol = 1e-9;  // max |mu Phi'| <= flat_tol * max |Phi|
};

/// Brackets sign changes of Phi'_t and refines them with TOMS 748; each point
/// is paired with the nearest Gamma critical point in the same window.
PhiCurve phi_critical_points(const Reduction& red, double t, const PhiSearchOptions& opts = {});

/// Throws NoCriticalPoint when the curve has none.
const PhiCriticalPoint& nearest_critical_point(const PhiCurve& curve, double mu);

struct SpectrumReport {
  /// Largest generalized eigenvalues nu of M v = nu G v, M = (p-1)|S| W K_t u^{p-2};
  /// the Hessian eigenvalues relative to G are 1 - nu.
  std::vector<double> nu;
  /// #{nu > 1 + zero_tol}.
  int negative_count = 0;
  /// Negative pivots of a sparse LDL^T of the Hessian (Sylvester inertia).
  int ldlt_negative_count = -1;
  bool zero_mode_present = false;
  double zero_tol = 0;
  /// 1 - nu for the mode nearest zero.
  double near_zero_eigenvalue = 0;
  /// |<v, z>| / (||v|| ||z||) for the lowest mode and |<v, xi>| for the near-zero mode.
  double lowest_alignment_z = 0;
  double zero_alignment_xi = 0;
  /// 1 - max nu over the G-orthocomplement of span{z, xi}.
  double projected_margin = 0;
  /// f''(v, v) / ||v||^2 at v = z.
  double rayleigh_z = 0;
};

/// Spectral facts of f_t''(u) around the manifold point z_mu.
SpectrumReport hessian_spectrum(const Reduction& red, const RadialFunction& u, double t, double mu,
                                double zero_tol = 1e-6, int block = 6);

struct MorseCheck {
  int index = 0;     // negative eigenvalues of f_t''(z + w(mu_t, t))
  int expected = 0;  // 1 + [Gamma''(mu_t) > 0]
  SpectrumReport spectrum;
};

MorseCheck morse_index_check(const Reduction& red, double mu_t, double t);

/// CSV columns mu, phi, phi_prime.
void write_phi_csv(std::ostream& os, const PhiCurve& curve);

}  // namespace ckn
