#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ckn/errors.hpp"
#include "ckn/params.hpp"

using namespace ckn;

namespace {
bool has_violation(const AdmissibilityReport& r, const std::string& name) {
  return std::any_of(r.violations.begin(), r.violations.end(),
                     [&](const Violation& v) { return v.constraint == name; });
}
}  // namespace

TEST_CASE("lambda = 0 leaves the exponents alone") {
  const auto q = derive_ab(3, 0.0, 0.0, 0.0);
  CHECK(q.a() == 0.0);
  CHECK(q.b() == 0.0);
  CHECK(q.p() == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("reference tuple") {
  const auto q = derive_ab(3, 0.0, 0.15, 0.0);
  CHECK(q.a() == 0.0);
  CHECK(q.b() == doctest::Approx(0.15).epsilon(1e-15));
  CHECK(q.p() == doctest::Approx(60.0 / 13.0).epsilon(1e-15));
  CHECK(q.kappa() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("N=4, lambda=3/4") {
  // a = 1 - sqrt(1 - 3/4) = 1/2, p = 2N / (N - 2 + 2(b - a)) = 4
  const auto q = derive_ab(4, 0.0, 0.0, 0.75);
  CHECK(q.a() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.b() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.p() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("alpha=0.1, lambda=0.05, beta=0.2") {
  const auto q = derive_ab(3, 0.1, 0.2, 0.05);
  CHECK(q.a() == doctest::Approx(0.5 - std::sqrt(0.16 - 0.05)).epsilon(1e-14));
  CHECK(q.b() - q.a() == doctest::Approx(0.1).epsilon(1e-13));
}

TEST_CASE("derive rejects inadmissible tuples") {
  CHECK_THROWS_AS(derive_ab(3, 0.6, 0.7, 0.0), ConstraintViolation);
  CHECK_THROWS_AS(derive_ab(3, 0.0, -0.1, 0.0), ConstraintViolation);
  CHECK_THROWS_AS(derive_ab(3, 0.0, 1.0, 0.0), ConstraintViolation);
  CHECK_THROWS_AS(derive_ab(2, 0.0, 0.1, 0.0), ConstraintViolation);
  CHECK_THROWS_AS(derive_ab(3, 0.0, 0.1, 0.3), ConstraintViolation);
  try {
    derive_ab(3, 0.6, 0.7, 0.0);
  } catch (const ConstraintViolation& e) {
    CHECK(e.constraint() == "alpha<(N-2)/2");
  }
}

TEST_CASE("admissibility levels on the reference tuple") {
  const auto q = derive_ab(3, 0.0, 0.15, 0.0);
  for (auto level : {AdmissibilityLevel::CknBasic, AdmissibilityLevel::Compactness, AdmissibilityLevel::Existence}) {
    const auto r = check_admissible(q, level);
    CHECK(r.passed);
    CHECK(r.violations.empty());
  }
}

TEST_CASE("beta=0.9 fails compactness on p > 4/(N-2-2a)") {
  const auto q = derive_ab(3, 0.0, 0.9, 0.0);
  CHECK(q.p() == doctest::Approx(6.0 / 2.8).epsilon(1e-14));
  const auto r = check_admissible(q, AdmissibilityLevel::Compactness);
  CHECK_FALSE(r.passed);
  CHECK(has_violation(r, "p>4/(N-2-2a)"));
  CHECK(check_admissible(q, AdmissibilityLevel::CknBasic).passed);
}

TEST_CASE("existence lists every failure") {
  const auto q = derive_ab(3, 0.0, 0.9, 0.0);
  const auto r = check_admissible(q, AdmissibilityLevel::Existence);
  CHECK(has_violation(r, "p>3"));
  CHECK(has_violation(r, "p>4/(N-2-2a)"));
}

TEST_CASE("random tuples: identities and monotonicity of a in lambda") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int n = 0;
  for (int k = 0; k < 2000 && n < 300; ++k) {
    const int N = 3 + static_cast<int>(u(rng) * 6);
    const double alpha = -0.5 + u(rng) * (0.5 * (N - 2) + 0.5) * 0.99;
    const double beta = alpha + u(rng) * 0.99;
    const double lmax = std::pow(0.5 * (N - 2 - 2 * alpha), 2);
    const double l1 = -0.5 + u(rng) * (lmax + 0.5) * 0.98;
    const double l2 = l1 + 0.01 * (lmax - l1);
    try {
      const auto q1 = derive_ab(N, alpha, beta, l1);
      const auto q2 = derive_ab(N, alpha, beta, l2);
      ++n;
      CHECK(q2.a() > q1.a());
      CHECK(std::abs(q1.p_from_alpha_beta() - q1.p_from_a_b()) <= 1e-13 * q1.p());
      const double lhs = N - q1.b() * q1.p(), rhs = 0.5 * q1.p() * q1.kappa();
      CHECK(std::abs(lhs - rhs) <= 1e-13 * std::max(std::abs(lhs), std::abs(rhs)));
    } catch (const ConstraintViolation&) {
    }
  }
  CHECK(n >= 100);
}

TEST_CASE("a -> alpha as lambda -> 0") {
  for (double l : {1e-2, 1e-4, 1e-6}) {
    const auto q = derive_ab(4, 0.2, 0.5, l);
    CHECK(std::abs(q.a() - 0.2) < 2 * l);
  }
}
