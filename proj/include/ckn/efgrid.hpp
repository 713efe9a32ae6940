#pragma once

// Emden-Fowler discretization. A radial u is stored as
//
//   u(r) = r^{-w} psi(ln r),   w = kappa/2 for the u-formulation,
//
// on a uniform grid s_0 = -S < ... < s_{n-1} = S. With w = kappa/2 both
// singular weights drop out:
//
//   int |x|^{-2a} |grad u|^2 dx = |S^{N-1}| int (psi'^2 + kappa^2/4 psi^2) ds
//   int |u|^p |x|^{-bp}    dx = |S^{N-1}| int |psi|^p ds
//
// and dilations u -> mu^{-kappa/2} u(x/mu) are translations s -> s - ln mu.
// Beyond +-S profiles are continued by exponential tails psi ~ exp(-rate |s|);
// every quadrature adds the closed-form tail contribution.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ckn/params.hpp"

namespace ckn {

using SparseMatrix = Eigen::SparseMatrix<double>;

class EFGrid {
 public:
  static constexpr std::size_t kMinNodes = 64;
  static constexpr std::size_t kDefaultNodes = 2048;
  /// Default half-width S = kDefaultWidthFactor / kappa.
  static constexpr double kDefaultWidthFactor = 20.0;

  /// Throws DomainError unless n >= 64 and S >= 10/kappa.
  EFGrid(const ProblemParams& params, double half_width, std::size_t nodes);

  static std::shared_ptr<const EFGrid> make(const ProblemParams& params, double half_width,
                                            std::size_t nodes);
  /// S = 20/kappa, n = 2048.
  static std::shared_ptr<const EFGrid> make_default(const ProblemParams& params);

  const ProblemParams& params() const noexcept { return params_; }
  double half_width() const noexcept { return half_width_; }
  std::size_t size() const noexcept { return s_.size(); }
  double spacing() const noexcept { return h_; }
  std::span<const double> nodes() const noexcept { return s_; }
  double node(std::size_t i) const noexcept { return s_[i]; }
  double radius(std::size_t i) const noexcept { return r_[i]; }
  std::span<const double> radii() const noexcept { return r_; }
  /// kappa/2: decay rate of psi for profiles in D^{1,2}_a that behave like solutions.
  double decay_rate() const noexcept { return 0.5 * params_.kappa(); }
  double sphere_area() const noexcept { return sphere_area_; }

  bool same_as(const EFGrid& other) const noexcept;

  // --- quadrature -------------------------------------------------------
  /// Gregory (end-corrected trapezoid, 4th order) weights.
  std::span<const double> weights() const noexcept { return w_; }
  /// int_{-inf}^{inf} f ds with f ~ f_front exp(-left_rate (s_0 - s)) to the
  /// left and f ~ f_back exp(-right_rate (s - s_{n-1})) to the right.
  /// Pass +inf to drop a tail.
  double integrate(std::span<const double> f, double left_rate, double right_rate) const;
  /// Weights of the lattice sum h sum_{j in Z} f_j for f continued beyond the
  /// ends by f_{-k} = f_0 e^{-rate k h}: h inside, h (1 + e^{-rate h}/(1 - e^{-rate h}))
  /// at the two ends. Consistent with gram().
  std::vector<double> lattice_weights(double rate) const;
  /// int_{-inf}^{s_end} f ds; the partial last cell uses the cubic interpolant.
  double integrate_to(std::span<const double> f, double s_end, double left_rate) const;

  // --- differentiation --------------------------------------------------
  /// d/ds and d^2/ds^2: 7-point centred stencils, one-sided near the ends.
  const SparseMatrix& first_derivative() const noexcept { return d1_; }
  const SparseMatrix& second_derivative() const noexcept { return d2_; }
  std::vector<double> d1(std::span<const double> f) const;
  std::vector<double> d2(std::span<const double> f) const;

  /// Gram matrix of the D^{1,2}_a inner product for profiles with the standard
  /// kappa/2 tails: <u,v> = psi_u^T G psi_v. Lattice sums over Z with the
  /// tails continued exponentially: midpoint values of a staggered 6th-order
  /// derivative for psi'^2, node values for psi^2.
  const SparseMatrix& gram() const noexcept { return gram_; }
  /// G^{-1} g, the Riesz representative of a dual vector.
  Eigen::VectorXd solve_gram(const Eigen::VectorXd& g) const;

  // --- interpolation ----------------------------------------------------
  /// Cubic Lagrange interpolation in s through the four nearest nodes.
  /// Throws OutOfRange outside [-S, S].
  double interpolate(std::span<const double> f, double s) const;

 private:
  ProblemParams params_;
  double half_width_;
  double h_;
  double sphere_area_;
  std::vector<double> s_, r_, w_;
  SparseMatrix d1_, d2_, gram_;
  struct GramFactor;
  std::shared_ptr<const GramFactor> gram_factor_;
};

/// sum_{k>=1} e^{-k x}.
inline double lattice_tail_factor(double x) { return std::exp(-x) / -std::expm1(-x); }

/// Exponential decay rates of psi beyond the two grid ends.
struct TailDecay {
  double left = std::numeric_limits<double>::infinity();
  double right = std::numeric_limits<double>::infinity();
};

class RadialFunction {
 public:
  /// u-formulation profile with the standard kappa/2 tails.
  RadialFunction(std::shared_ptr<const EFGrid> grid, std::vector<double> psi);
  RadialFunction(std::shared_ptr<const EFGrid> grid, std::vector<double> psi, TailDecay tails,
                 double weight_exponent);

  /// Identically zero profile.
  static RadialFunction zero(std::shared_ptr<const EFGrid> grid);

  const EFGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const EFGrid>& grid_ptr() const noexcept { return grid_; }
  std::span<const double> psi() const noexcept { return psi_; }
  double psi(std::size_t i) const noexcept { return psi_[i]; }
  std::size_t size() const noexcept { return psi_.size(); }
  TailDecay tails() const noexcept { return tails_; }
  /// w in u(r) = r^{-w} psi(ln r).
  double weight_exponent() const noexcept { return weight_exponent_; }

  /// u(r_i).
  double value(std::size_t i) const;
  std::vector<double> values() const;
  /// Same grid, tails and weight convention, new psi.
  RadialFunction with_psi(std::vector<double> psi) const;

 private:
  std::shared_ptr<const EFGrid> grid_;
  std::vector<double> psi_;
  TailDecay tails_;
  double weight_exponent_;
};

/// Throws GridMismatch unless both profiles live on the same grid.
void require_same_grid(const RadialFunction& u, const RadialFunction& v);

/// int |u|^p |x|^{-bp} dx.
double integrate_volume_p(const RadialFunction& u);
/// <u, v>_{D^{1,2}_a}.
double inner_Da(const RadialFunction& u, const RadialFunction& v);
double norm_Da(const RadialFunction& u);
/// ||u||_{D_a} + sup |u| (1 + r^kappa).
double norm_E(const RadialFunction& u);
/// du/dr as a profile (weight exponent w+1).
RadialFunction differentiate(const RadialFunction& u);
/// (u(sigma), u'(sigma)) with cubic interpolation in s; throws OutOfRange.
std::pair<double, double> surface_sample(const RadialFunction& u, double sigma);

/// Multiplication by r^{a-alpha}: v-formulation profile to u-formulation.
RadialFunction to_u_formulation(const RadialFunction& v);
/// Multiplication by r^{alpha-a}.
RadialFunction to_v_formulation(const RadialFunction& u);

/// CSV columns s, r, psi, u, du_dr.
void write_profile_csv(std::ostream& os, const RadialFunction& u);

}  // namespace ckn
