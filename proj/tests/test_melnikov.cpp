#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/instanton.hpp"
#include "ckn/melnikov.hpp"

using namespace ckn;

namespace {
const ProblemParams T1 = derive_ab(3, 0.0, 0.15, 0.0);

CoefficientField mixed_table() {
  std::vector<double> r, k;
  for (int i = 0; i <= 200; ++i) {
    const double x = std::pow(10.0, -4.0 + 8.0 * i / 200.0);
    r.push_back(x);
    k.push_back(1.0 + 0.5 * x * x / (1.0 + x * x * x * x) - 0.8 * x * x / (1.0 + x * x));  // c2: -0.3, +1.3
  }
  return CoefficientField::table(r, k);
}
}  // namespace

TEST_CASE("constant K: Gamma is flat") {
  const auto g = EFGrid::make_default(T1);
  const double c = 1.3;
  Melnikov m(g, CoefficientField::constant(c));
  const double expected = c * integrate_volume_p(make_instanton(g, 1.0, 1.0)) / T1.p();
  for (double tau : {0.1, 1.0, 10.0}) CHECK(m.gamma(tau) == doctest::Approx(expected).epsilon(1e-10));
  const auto curve = critical_points(m);
  CHECK(curve.flat);
  CHECK(curve.critical_points.empty());
}

TEST_CASE("Kelvin symmetry for the bump") {
  const auto g = EFGrid::make_default(T1);
  Melnikov m(g, CoefficientField::self_dual_bump(0.5));
  for (double tau : {2.0, 5.0, 10.0}) CHECK(m.gamma(tau) == doctest::Approx(m.gamma(1.0 / tau)).epsilon(1e-8));
  CHECK(kelvin_symmetry_defect(m, {0.1, 0.5, 2.0, 7.0}) <= 1e-8);
}

TEST_CASE("endpoint limit") {
  const auto g = EFGrid::make_default(T1);
  const auto K = CoefficientField::self_dual_bump(0.5);
  Melnikov m(g, K);
  Melnikov m1(g, CoefficientField::constant(1.0));
  CHECK(std::abs(m.gamma(1e-4) - K.eval(0.0) * m1.gamma(1.0)) <= 1e-4 * m1.gamma(1.0));
  CHECK(m.gamma_at_zero() == doctest::Approx(m1.gamma(1.0)).epsilon(1e-12));
}

TEST_CASE("Gamma''(0)") {
  const auto g = EFGrid::make_default(T1);
  const auto guard = gamma_second_at_zero_guard(T1);
  CHECK(guard.integrable);
  CHECK(guard.exponent == doctest::Approx(30.0 / 13.0).epsilon(1e-14));
  for (double A : {0.5, -0.5}) {
    Melnikov m(g, CoefficientField::self_dual_bump(A));
    const double f = gamma_second_at_zero(m);
    CHECK((f > 0) == (A > 0));
    const auto ex = gamma_second_extrapolated(m);
    CHECK(std::abs(ex.value - f) <= 1e-3 * std::abs(f));
  }
  Melnikov flat(g, CoefficientField::constant(1.0));
  CHECK_THROWS_AS(gamma_second_at_zero(flat), DegenerateCoefficient);
}

TEST_CASE("degree formula") {
  CHECK(degree(CoefficientField::self_dual_bump(0.5), 3) == -1);
  CHECK(degree(CoefficientField::self_dual_bump(-0.5), 3) == 1);
  CHECK(degree(mixed_table(), 3) == 0);
  CHECK_THROWS_AS(degree(CoefficientField::constant(1.0), 3), DegenerateCoefficient);
}

TEST_CASE("degree cross-check on Gamma'") {
  const auto g = EFGrid::make_default(T1);
  for (double A : {0.5, -0.5}) {
    Melnikov m(g, CoefficientField::self_dual_bump(A));
    const auto c = critical_points(m);
    const auto d = degree_check(m, c);
    CHECK(d.consistent);
    CHECK(d.endpoints_resolved);
    CHECK(d.endpoint_count == d.formula);
    CHECK(d.critical_sum == d.formula);
    REQUIRE(c.critical_points.size() == 1);
    CHECK(c.critical_points[0].tau == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(c.critical_points[0].nondegenerate);
    CHECK((c.critical_points[0].gamma_second < 0) == (A > 0));
  }
  Melnikov m(g, mixed_table());
  const auto d = degree_check(m, critical_points(m));
  CHECK(d.formula == 0);
  CHECK(d.consistent);
}

TEST_CASE("Gamma' against finite differences") {
  const auto g = EFGrid::make_default(T1);
  Melnikov m(g, CoefficientField::self_dual_bump(0.5));
  for (double tau : {0.3, 2.5}) {
    const double h = 1e-4 * tau;
    const double fd = (m.gamma(tau + h) - m.gamma(tau - h)) / (2 * h);
    CHECK(m.gamma_prime(tau) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("gamma CSV") {
  const auto g = EFGrid::make(T1, 20.0, 256);
  Melnikov m(g, CoefficientField::self_dual_bump(0.5));
  MelnikovOptions o;
  o.samples = 11;
  std::ostringstream os;
  write_gamma_csv(os, critical_points(m, o));
  const auto text = os.str();
  CHECK(text.rfind("tau,gamma,gamma_prime\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 12);
}
