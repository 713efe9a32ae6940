#pragma once

// Pohozaev identities for radial profiles on balls B_sigma.
//
// With R the Emden-Fowler residual of (P_t) and psi' = d psi/ds,
//
//   (1/p) int_{B_sigma} (grad K_t . x) u^p |x|^{-bp}
//     - (sigma/p) int_{dB_sigma} K_t u^p |x|^{-bp} - int_{dB_sigma} B
//     = |S^{N-1}| int_{-inf}^{ln sigma} R psi' ds,
//
// which vanishes for solutions. All surface integrals of radial functions
// are |S^{N-1}| sigma^{N-1} times the integrand at sigma.

#include <memory>

#include "ckn/coeff.hpp"
#include "ckn/efgrid.hpp"

namespace ckn {

struct PohozaevReport {
  double sigma = 0;
  double lhs_volume = 0;
  double lhs_surface = 0;
  double rhs_boundary = 0;
  /// lhs_volume - lhs_surface - rhs_boundary.
  double residual = 0;
  /// residual / max(|lhs_volume|, |lhs_surface|, |rhs_boundary|), 0 for u = 0.
  double relative_residual = 0;
  /// |S^{N-1}| int R psi' up to ln sigma; equals residual for any smooth profile.
  double equation_correction = 0;
  /// (residual - equation_correction) with the same normalisation.
  double relative_corrected = 0;
};

/// int_{dB_sigma} B for radial u:
/// |S^{N-1}| sigma^{N-1} [kappa/2 sigma^{-2a} u u' + sigma^{1-2a}/2 u'^2].
double boundary_term_B(const RadialFunction& u, double sigma);

PohozaevReport local_identity(const RadialFunction& u, const CoefficientField& K, double sigma,
                              double t);

/// |S^{N-1}| int t r K'(r) psi^p ds; zero for solutions of (P_t).
double global_identity(const RadialFunction& u, const CoefficientField& K, double t);
/// |S^{N-1}| int |t r K'(r)| psi^p ds, the natural size of global_identity.
double global_identity_scale(const RadialFunction& u, const CoefficientField& K, double t);

/// Measure of the unit sphere used in the bubble constant: |S^{N-1}|, the
/// area of the unit sphere of R^N.
double omega_sphere(const ProblemParams& params);

struct BubbleConstant {
  double value = 0;
  /// Closed-form tail estimates beyond the grid ends.
  double tail_contribution = 0;
};

/// A = K0 / (kappa omega) int z_{K0}^{p-1} |x|^{-bp} dx
///   = K0 / (kappa omega) |S^{N-1}| int e^{kappa s/2} psi_{K0}^{p-1} ds.
BubbleConstant bubble_constant(std::shared_ptr<const EFGrid> grid, double K0);
double bubble_constant_A(std::shared_ptr<const EFGrid> grid, double K0);
/// On the default grid.
double bubble_constant_A(const ProblemParams& params, double K0);

}  // namespace ckn
