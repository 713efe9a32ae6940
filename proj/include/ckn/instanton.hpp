#pragma once

// The explicit radial solution of  -div(|x|^{-2a} grad z) = z^{p-1} |x|^{-bp},
//
//   z_1(r) = (1 + c r^theta)^{-E},
//
// its dilations z_{K0,mu}, the Kelvin transform, the Green's function and the
// energy functionals
//
//   f_0(u) = 1/2 ||u||^2 - 1/p int |u|^p |x|^{-bp},   G_K(u) = 1/p int K |u|^p |x|^{-bp}.
//
// In Emden-Fowler variables psi_1(s) = e^{kappa s/2}(1 + c e^{theta s})^{-E} is
// even about s* = -ln(c)/theta, so kelvin(z_{1,mu}) = z_{1, mu_K^2/mu} with
// mu_K = c^{1/theta}.

#include <vector>

#include "ckn/coeff.hpp"
#include "ckn/efgrid.hpp"
#include "ckn/params.hpp"

namespace ckn {

struct InstantonShape {
  double c = 0;
  double theta = 0;
  double E = 0;
};

InstantonShape instanton_shape(const ProblemParams& params);

/// z_1(r); z1_eval(params, 0) = 1.
double z1_eval(const ProblemParams& params, double r);
/// psi_1(s) = e^{kappa s/2} z_1(e^s) and its s-derivative.
double z1_psi(const ProblemParams& params, double s);
double z1_psi_prime(const ProblemParams& params, double s);
/// psi_1'' from the ODE psi'' = kappa^2/4 psi - psi^{p-1}.
double z1_psi_second(const ProblemParams& params, double s);

/// Peak of psi_1: s* = -ln(c)/theta.
double instanton_peak(const ProblemParams& params);
/// mu_K = e^{-s*}: z_{1,mu_K} is fixed by the Kelvin transform.
double kelvin_centre(const ProblemParams& params);

/// mu^{-kappa/2} z_1(K0^{2/((p-2)kappa)} x / mu). In psi-coordinates
/// K0^{-1/(p-2)} psi_1(s - ln mu + 2 ln K0 / ((p-2) kappa)).
RadialFunction make_instanton(std::shared_ptr<const EFGrid> grid, double K0, double mu);

/// Kelvin-centred member z_{1, tau mu_K}; its psi is even about s = ln tau.
RadialFunction centred_instanton(std::shared_ptr<const EFGrid> grid, double tau);

/// |x|^{-kappa} u(x/|x|^2), i.e. psi(s) -> psi(-s). Needs a symmetric grid.
RadialFunction kelvin(const RadialFunction& u);

/// r^{2+2a-N}.
double green(const ProblemParams& params, double r);
/// Green's function sampled on the grid: psi = e^{-kappa s/2}, growing to the left.
RadialFunction green(std::shared_ptr<const EFGrid> grid);

/// R = -psi'' + kappa^2/4 psi - (1 + t(K-1)) |psi|^{p-2} psi at every node.
/// Returned as a profile with no tails (weight kappa/2).
RadialFunction pde_residual(const RadialFunction& u, const CoefficientField& K, double t);
/// Same residual with no nonlinearity (source term switched off).
RadialFunction linear_residual(const RadialFunction& u);

/// Lattice weights (rate p kappa/2) for p-power integrands of standard
/// profiles, consistent with the Gram matrix.
std::vector<double> power_weights(const EFGrid& grid);

double f0(const RadialFunction& u);
double G_K(const RadialFunction& u, const CoefficientField& K);
double f_eps(const RadialFunction& u, const CoefficientField& K, double eps);

/// Discrete f_0''(z): the matrix G - (p-1)|S^{N-1}| W diag(|psi_z|^{p-2}).
SparseMatrix f0_hessian_matrix(const RadialFunction& z);
/// f_0''(z)(v, w).
double f0_hessian_form(const RadialFunction& z, const RadialFunction& v, const RadialFunction& w);
/// D_a-Riesz representative of f_0''(z) v.
RadialFunction f0_hessian_apply(const RadialFunction& z, const RadialFunction& v);

struct TangentVector {
  RadialFunction xi;
  double raw_norm = 0;  // ||d z_{1,mu} / d mu||_{D_a} before normalization
};

/// d/dmu z_{1,mu} from the closed form, normalized to unit D_a norm.
TangentVector tangent_vector(std::shared_ptr<const EFGrid> grid, double mu);

struct InstantonFit {
  double K0 = 1;
  double mu = 1;
  double amplitude = 1;  // K0^{-1/(p-2)}
  double shift = 0;      // ln mu - 2 ln K0/((p-2) kappa)
  /// max |psi - psi_fit| / max |psi|.
  double residual = 0;
  int iterations = 0;
};

/// Gauss-Newton least-squares fit of psi by A psi_1(s - d) on the grid.
InstantonFit fit_instanton(const RadialFunction& u);

}  // namespace ckn
