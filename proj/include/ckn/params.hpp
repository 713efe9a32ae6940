#pragma once

// Exponent algebra for the weighted critical problem
//
//   -div(|x|^{-2 alpha} grad v) - lambda |x|^{-2(1+alpha)} v = K v^{p-1} |x|^{-beta p}
//
// and its Hardy-free form in the exponents (a, b):
//
//   -div(|x|^{-2a} grad u) = K u^{p-1} |x|^{-bp},     u = |x|^{a-alpha} v.

#include <string>
#include <vector>

namespace ckn {

class ProblemParams {
 public:
  /// Computes a, b, p from (N, alpha, beta, lambda). Throws ConstraintViolation
  /// if alpha < (N-2)/2, alpha <= beta < alpha+1 or lambda < ((N-2-2alpha)/2)^2 fails.
  static ProblemParams derive(int N, double alpha, double beta, double lambda);

  int N() const noexcept { return N_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double lambda() const noexcept { return lambda_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double p() const noexcept { return p_; }

  /// kappa = N - 2 - 2a. u ~ |x|^{-kappa} at infinity, psi ~ exp(-kappa |s| / 2).
  double kappa() const noexcept { return N_ - 2.0 - 2.0 * a_; }
  /// N - 2 - 2 alpha, the same exponent for the v-formulation.
  double kappa_alpha() const noexcept { return N_ - 2.0 - 2.0 * alpha_; }
  /// Critical exponent evaluated from (alpha, beta).
  double p_from_alpha_beta() const noexcept;
  /// Critical exponent evaluated from (a, b).
  double p_from_a_b() const noexcept;
  /// 2N/(N-2).
  double sobolev_exponent() const noexcept { return 2.0 * N_ / (N_ - 2.0); }
  /// |S^{N-1}|, the area of the unit sphere of R^N.
  double sphere_area() const noexcept;

  bool operator==(const ProblemParams&) const = default;

 private:
  ProblemParams() = default;
  int N_ = 3;
  double alpha_ = 0, beta_ = 0, lambda_ = 0;
  double a_ = 0, b_ = 0, p_ = 0;
};

/// Free-function spelling used by the CLI and the tests.
inline ProblemParams derive_ab(int N, double alpha, double beta, double lambda) {
  return ProblemParams::derive(N, alpha, beta, lambda);
}

enum class AdmissibilityLevel { CknBasic, Compactness, Existence };

struct Violation {
  std::string constraint;
  double value = 0;  // offending quantity
  double bound = 0;  // the bound it should satisfy
  bool borderline = false;
};

struct AdmissibilityReport {
  AdmissibilityLevel level = AdmissibilityLevel::CknBasic;
  bool passed = true;
  std::vector<Violation> violations;
};

/// Distance within which a satisfied inequality is still reported, tagged borderline.
inline constexpr double kBorderlineSlack = 1e-12;

/// Checks every constraint of the requested level and the levels it implies;
/// lists all failures rather than stopping at the first.
AdmissibilityReport check_admissible(const ProblemParams& params, AdmissibilityLevel level);

const char* to_string(AdmissibilityLevel level);

}  // namespace ckn
