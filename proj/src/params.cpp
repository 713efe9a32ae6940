#include "ckn/params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ckn/errors.hpp"

namespace ckn {

namespace {

std::string describe(double value, const char* relation, double bound) {
  std::ostringstream os;
  os.precision(17);
  os << value << ' ' << relation << ' ' << bound << " fails";
  return os.str();
}

struct Checker {
  AdmissibilityReport& report;

  // value > bound (strict); a margin below kBorderlineSlack is a borderline failure.
  void greater(const char* name, double value, double bound) {
    const double margin = value - bound;
    if (margin > kBorderlineSlack) return;
    report.violations.push_back({name, value, bound, margin > 0});
  }
  void less(const char* name, double value, double bound) {
    const double margin = bound - value;
    if (margin > kBorderlineSlack) return;
    report.violations.push_back({name, value, bound, margin > 0});
  }
  void greater_equal(const char* name, double value, double bound) {
    if (value >= bound) return;
    report.violations.push_back({name, value, bound, false});
  }
  void less_equal(const char* name, double value, double bound) {
    if (value <= bound) return;
    report.violations.push_back({name, value, bound, false});
  }
};

}  // namespace

ProblemParams ProblemParams::derive(int N, double alpha, double beta, double lambda) {
  if (N < 3) throw ConstraintViolation("N>=3", describe(N, ">=", 3));
  const double half_gap = (N - 2.0) / 2.0;
  if (!(alpha < half_gap)) throw ConstraintViolation("alpha<(N-2)/2", describe(alpha, "<", half_gap));
  if (!(alpha <= beta)) throw ConstraintViolation("alpha<=beta", describe(alpha, "<=", beta));
  if (!(beta < alpha + 1.0)) throw ConstraintViolation("beta<alpha+1", describe(beta, "<", alpha + 1.0));
  const double hardy = std::pow((N - 2.0 - 2.0 * alpha) / 2.0, 2);
  if (!(lambda < hardy)) throw ConstraintViolation("lambda<((N-2-2alpha)/2)^2", describe(lambda, "<", hardy));

  ProblemParams q;
  q.N_ = N;
  q.alpha_ = alpha;
  q.beta_ = beta;
  q.lambda_ = lambda;
  q.a_ = half_gap - std::sqrt(hardy - lambda);
  q.b_ = beta + q.a_ - alpha;
  q.p_ = q.p_from_alpha_beta();
  return q;
}

double ProblemParams::p_from_alpha_beta() const noexcept {
  return 2.0 * N_ / (N_ - 2.0 * (1.0 + alpha_ - beta_));
}

double ProblemParams::p_from_a_b() const noexcept {
  return 2.0 * N_ / (N_ - 2.0 * (1.0 + a_ - b_));
}

double ProblemParams::sphere_area() const noexcept {
  const double half = N_ / 2.0;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

AdmissibilityReport check_admissible(const ProblemParams& q, AdmissibilityLevel level) {
  AdmissibilityReport report;
  report.level = level;
  Checker c{report};
  const double N = q.N();
  const double hardy = std::pow((N - 2.0 - 2.0 * q.alpha()) / 2.0, 2);

  c.less("alpha<(N-2)/2", q.alpha(), (N - 2.0) / 2.0);
  c.less_equal("alpha<=beta", q.alpha(), q.beta());
  c.less("beta<alpha+1", q.beta(), q.alpha() + 1.0);
  c.less("lambda<((N-2-2alpha)/2)^2", q.lambda(), hardy);

  if (level != AdmissibilityLevel::CknBasic) {
    c.greater_equal("lambda>=-alpha(N-2-alpha)", q.lambda(), -q.alpha() * (N - 2.0 - q.alpha()));
    c.greater("lambda>((N-2-2alpha)/2)^2-1", q.lambda(), hardy - 1.0);
    c.greater("beta>alpha", q.beta(), q.alpha());
    c.greater("p>2/sqrt(((N-2-2alpha)/2)^2-lambda)", q.p(), 2.0 / std::sqrt(hardy - q.lambda()));
    c.greater_equal("a>=0", q.a(), 0.0);
    c.greater("a>(N-4)/2", q.a(), (N - 4.0) / 2.0);
    c.less("a<(N-2)/2", q.a(), (N - 2.0) / 2.0);
    c.greater("p>4/(N-2-2a)", q.p(), 4.0 / q.kappa());
    c.less("p<2N/(N-2)", q.p(), q.sobolev_exponent());
  }
  if (level == AdmissibilityLevel::Existence) {
    c.greater("p>3", q.p(), 3.0);
  }
  report.passed = report.violations.empty();
  return report;
}

const char* to_string(AdmissibilityLevel level) {
  switch (level) {
    case AdmissibilityLevel::CknBasic: return "CKN_BASIC";
    case AdmissibilityLevel::Compactness: return "COMPACTNESS";
    case AdmissibilityLevel::Existence: return "EXISTENCE";
  }
  return "?";
}

}  // namespace ckn
