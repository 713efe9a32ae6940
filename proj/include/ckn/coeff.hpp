#pragma once

// Radial coefficient fields K(r) and their inversion K~(r) = K(1/r).

#include <memory>
#include <vector>

namespace ckn {

enum class CoefficientKind { Constant, SelfDualBump, Table };

const char* to_string(CoefficientKind kind);

class CoefficientField {
 public:
  static CoefficientField constant(double c);
  /// K(r) = 1 + A r^2 / (1 + r^4). Self-dual: K~ = K. Requires A > -2.
  static CoefficientField self_dual_bump(double A);
  /// Natural cubic spline in (ln r, K) through strictly increasing positive radii.
  /// The r^2 and r^{-2} Taylor coefficients are least-squares fits on the five
  /// smallest and five largest radii.
  static CoefficientField table(std::vector<double> r, std::vector<double> K);

  CoefficientKind kind() const noexcept { return kind_; }
  double constant_value() const noexcept { return value_; }
  double amplitude() const noexcept { return amplitude_; }
  const std::vector<double>& table_r() const noexcept { return table_r_; }
  const std::vector<double>& table_K() const noexcept { return table_K_; }

  /// K(r), r >= 0. TABLE kind throws InterpolationError outside its radii
  /// (r = 0 returns the fitted limit).
  double eval(double r) const;
  /// K(1/r); r = 0 returns the limit of K at infinity.
  double eval_tilde(double r) const;
  /// dK/dr, so that grad K(x) . x = r dK/dr.
  double radial_derivative(double r) const;
  /// As eval / radial_derivative, but TABLE fields continue past their radii
  /// with the fitted expansions K(0) + c2 r^2 and K(inf) + c2_inf r^{-2}.
  /// Grid quadratures use these.
  double eval_extended(double r) const;
  double radial_derivative_extended(double r) const;

  double limit_at_origin() const noexcept { return c0_origin_; }
  double limit_at_infinity() const noexcept { return c0_infinity_; }
  /// K(r) = K(0) + c2_origin r^2 + o(r^2).
  double c2_origin() const noexcept { return c2_origin_; }
  /// K(r) = K(inf) + c2_infinity r^{-2} + o(r^{-2}).
  double c2_infinity() const noexcept { return c2_infinity_; }
  /// A_1 with 1/A_1 <= K everywhere.
  double a1_bound() const noexcept { return a1_bound_; }
  /// For TABLE fields C^2 regularity of K~ cannot be certified from samples.
  bool tilde_regularity_assumed() const noexcept { return kind_ == CoefficientKind::Table; }

  /// Smallest and largest radius at which eval() is defined.
  double min_radius() const noexcept;
  double max_radius() const noexcept;

 private:
  struct Spline;
  CoefficientField() = default;

  CoefficientKind kind_ = CoefficientKind::Constant;
  double value_ = 1;
  double amplitude_ = 0;
  std::vector<double> table_r_, table_K_;
  std::shared_ptr<const Spline> spline_;
  double c0_origin_ = 1, c0_infinity_ = 1, c2_origin_ = 0, c2_infinity_ = 0;
  double a1_bound_ = 1;
};

struct PoleLaplacians {
  double at_origin = 0;    // Delta K(0) = 2N c2_origin
  double at_infinity = 0;  // Delta K~(0) = 2N c2_infinity
  int sign_origin = 0;
  int sign_infinity = 0;
};

/// Throws DegenerateCoefficient if either Laplacian vanishes.
PoleLaplacians laplacians_at_poles(const CoefficientField& K, int N);

/// Estimate of sup_{|x| < radius} |grad K| on a log-spaced diagnostic grid.
double gradient_bound(const CoefficientField& K, double radius = 2.0, int samples = 4000);

/// Minimum of K over a log-spaced diagnostic grid on [r_min, r_max].
double diagnostic_minimum(const CoefficientField& K, double r_min, double r_max, int samples = 4000);

}  // namespace ckn
