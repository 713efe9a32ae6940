#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ckn/instanton.hpp"
#include "ckn/pohozaev.hpp"

using namespace ckn;

namespace {
const ProblemParams T1 = derive_ab(3, 0.0, 0.15, 0.0);
}

TEST_CASE("boundary term of the Green's function vanishes") {
  const auto g = EFGrid::make_default(T1);
  const auto G = green(g);
  for (double sigma : {1e-3, 0.1, 1.0, 3.0, 50.0}) CHECK(std::abs(boundary_term_B(G, sigma)) <= 1e-10);
}

TEST_CASE("boundary term of G_a + 1 near the origin") {
  const auto g = EFGrid::make_default(T1);
  const double k2 = g->decay_rate();
  std::vector<double> psi(g->size());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = 2.0 * std::cosh(k2 * g->node(i));
  const RadialFunction u(g, psi, TailDecay{-k2, -k2}, k2);
  const double expected = -0.5 * T1.kappa() * T1.kappa() * T1.sphere_area();
  CHECK(boundary_term_B(u, 1e-3) == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("zero profile") {
  const auto g = EFGrid::make_default(T1);
  const auto z = RadialFunction::zero(g);
  const auto K = CoefficientField::self_dual_bump(0.5);
  CHECK(boundary_term_B(z, 1.0) == 0.0);
  const auto r = local_identity(z, K, 1.0, 1.0);
  CHECK(r.lhs_volume == 0.0);
  CHECK(r.lhs_surface == 0.0);
  CHECK(r.rhs_boundary == 0.0);
  CHECK(r.residual == 0.0);
  CHECK(r.relative_residual == 0.0);
}

TEST_CASE("local identity on instantons") {
  const auto g = EFGrid::make_default(T1);
  const auto one = CoefficientField::constant(1.0);
  for (double mu : {0.5, 1.0}) {
    const auto z = make_instanton(g, 1.0, mu);
    for (double sigma : {0.5, 1.0, 2.0}) {
      const auto r = local_identity(z, one, sigma, 0.7);
      CHECK(r.lhs_volume == 0.0);
      CHECK(r.relative_residual <= 1e-6);
      CHECK(r.residual == doctest::Approx(r.lhs_volume - r.lhs_surface - r.rhs_boundary));
    }
  }
}

TEST_CASE("local identity converges under refinement") {
  const auto one = CoefficientField::constant(1.0);
  double prev = 0;
  for (std::size_t cells : {128, 256, 512}) {
    const auto g = EFGrid::make(T1, 20.0, cells + 1);
    const double r = std::abs(local_identity(make_instanton(g, 1.0, 1.0), one, 1.0, 1.0).relative_residual);
    if (prev > 0) CHECK(prev / r >= 4.0);
    prev = r;
  }
}

TEST_CASE("corrected identity for a non-solution") {
  // the equation residual accounts for the whole defect
  const auto g = EFGrid::make_default(T1);
  const auto K = CoefficientField::self_dual_bump(0.5);
  const auto z = make_instanton(g, 1.0, 1.0);
  for (double sigma : {0.5, 1.0, 2.0}) {
    const auto r = local_identity(z, K, sigma, 1.0);
    CHECK(std::abs(r.relative_corrected) <= 1e-6);
  }
}

TEST_CASE("global identity") {
  const auto g = EFGrid::make_default(T1);
  const auto z = make_instanton(g, 1.0, 1.0);
  CHECK(global_identity(z, CoefficientField::constant(2.0), 1.0) == 0.0);
  // z_1 is not a solution for the bump; mu is off the Kelvin centre
  const auto K = CoefficientField::self_dual_bump(0.5);
  CHECK(std::abs(global_identity(z, K, 1.0)) > 1e-3 * global_identity_scale(z, K, 1.0));
}

TEST_CASE("bubble constant") {
  const auto g = EFGrid::make_default(T1);
  const auto b1 = bubble_constant(g, 1.0);
  const auto b2 = bubble_constant(g, 2.0);
  CHECK(b1.value > 0);
  CHECK(std::abs(b1.tail_contribution) < 1e-10 * b1.value);
  // psi_{K0}(s) = K0^{-1/(p-2)} psi_1(s + d),  d = 2 ln K0 / ((p-2) kappa);
  // int e^{kappa s/2} psi^{p-1} picks up K0^{-(p-1)/(p-2)} e^{-kappa d/2}.
  const double p = T1.p();
  const double predicted = 2.0 * std::pow(2.0, -(p - 1) / (p - 2)) * std::pow(2.0, -1.0 / (p - 2));
  CHECK(b2.value / b1.value == doctest::Approx(predicted).epsilon(1e-10));
  CHECK(omega_sphere(T1) == doctest::Approx(4 * M_PI).epsilon(1e-15));
}
