#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ckn/efgrid.hpp"
#include "ckn/errors.hpp"
#include "ckn/instanton.hpp"

using namespace ckn;

namespace {
const ProblemParams T1 = derive_ab(3, 0.0, 0.15, 0.0);

double psi_p_integral(const RadialFunction& u) {
  return integrate_volume_p(u) / u.grid().sphere_area();
}
}  // namespace

TEST_CASE("grid construction") {
  const auto g = EFGrid::make_default(T1);
  CHECK(g->size() == 2048);
  CHECK(g->half_width() == 20.0);
  CHECK(g->spacing() == doctest::Approx(40.0 / 2047.0).epsilon(1e-15));
  for (std::size_t i = 1; i < g->size(); ++i) {
    CHECK(g->node(i) > g->node(i - 1));
    CHECK(std::abs(g->node(i) - g->node(i - 1) - g->spacing()) < 1e-12);
  }
  CHECK_THROWS_AS(EFGrid::make(T1, 20.0, 63), DomainError);
  CHECK_THROWS_AS(EFGrid::make(T1, 9.9, 2048), DomainError);
}

TEST_CASE("zero profile") {
  const auto g = EFGrid::make_default(T1);
  const auto z = RadialFunction::zero(g);
  CHECK(integrate_volume_p(z) == 0.0);
  CHECK(norm_Da(z) == 0.0);
  CHECK(norm_E(z) == 0.0);
  CHECK_THROWS_AS(RadialFunction(g, std::vector<double>(10, 1.0)), GridMismatch);
}

TEST_CASE("K=1 weak form: ||z||^2 = int z^p |x|^{-bp} ") {
  const auto g = EFGrid::make_default(T1);
  const auto z = make_instanton(g, 1.0, 1.0);
  const double n2 = std::pow(norm_Da(z), 2);
  CHECK(std::abs(n2 - integrate_volume_p(z)) <= 1e-8 * n2);
}

TEST_CASE("Sobolev case a=b=0: int |grad z|^2 = int z^6") {
  const auto q = derive_ab(3, 0.0, 0.0, 0.0);
  const auto g = EFGrid::make_default(q);
  const auto z = make_instanton(g, 1.0, 1.0);
  const double n2 = std::pow(norm_Da(z), 2);
  CHECK(std::abs(n2 - integrate_volume_p(z)) <= 1e-8 * n2);
}

TEST_CASE("p-integral is dilation invariant") {
  const auto g = EFGrid::make_default(T1);
  const double ref = integrate_volume_p(make_instanton(g, 1.0, 1.0));
  for (double mu : {0.5, 2.0}) {
    CHECK(integrate_volume_p(make_instanton(g, 1.0, mu)) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("quadrature order") {
  // geometric convergence on decaying integrands: grids finer than h ~ 0.3
  // sit at round-off, so h = 1.25 -> 0.625 on a wide domain
  const double S = 40.0;
  const double ref = psi_p_integral(make_instanton(EFGrid::make(T1, S, 2049), 1.0, 1.0));
  const double e0 = std::abs(psi_p_integral(make_instanton(EFGrid::make(T1, S, 65), 1.0, 1.0)) - ref);
  const double e1 = std::abs(psi_p_integral(make_instanton(EFGrid::make(T1, S, 129), 1.0, 1.0)) - ref);
  CHECK(e0 > 0);
  CHECK(e0 / e1 >= 16.0);
  CHECK(e1 <= 1e-6 * ref);
}

TEST_CASE("Kelvin isometry of the D_a norm") {
  const auto g = EFGrid::make_default(T1);
  const auto z = make_instanton(g, 1.0, 2.0);
  CHECK(std::abs(norm_Da(kelvin(z)) - norm_Da(z)) <= 1e-10 * norm_Da(z));
}

TEST_CASE("Cauchy-Schwarz on random profiles") {
  const auto g = EFGrid::make(T1, 20.0, 256);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> a(g->size()), b(g->size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double env = std::exp(-0.5 * std::abs(g->node(i)));
      a[i] = env * n01(rng);
      b[i] = env * n01(rng);
    }
    const RadialFunction u(g, a), v(g, b);
    const double ip = inner_Da(u, v);
    CHECK(ip * ip <= std::pow(norm_Da(u), 2) * std::pow(norm_Da(v), 2) * (1 + 1e-12));
    CHECK(inner_Da(u, v) == doctest::Approx(inner_Da(v, u)).epsilon(1e-12));
  }
}

TEST_CASE("differentiate the Green's function") {
  const auto g = EFGrid::make_default(T1);
  const auto G = green(g);
  const auto [u, du] = surface_sample(G, 1.0);
  const double k = T1.kappa();
  CHECK(u == doctest::Approx(1.0).epsilon(1e-8));  // s=0 is off-node
  CHECK(std::abs(du + k) <= 1e-8 * k);  // (2+2a-N) r^{1+2a-N} at r=1
}

TEST_CASE("constant psi: du/dr = -(kappa/2) u/r") {
  const auto g = EFGrid::make_default(T1);
  const RadialFunction u(g, std::vector<double>(g->size(), 1.0), TailDecay{0.0, 0.0}, 0.5 * T1.kappa());
  const auto du = differentiate(u);
  for (std::size_t i : {100u, 1024u, 1900u}) {
    const double r = g->radius(i);
    CHECK(du.value(i) == doctest::Approx(-0.5 * T1.kappa() * u.value(i) / r).epsilon(1e-10));
  }
}

TEST_CASE("surface sample at sigma=1") {
  const auto g = EFGrid::make_default(T1);
  const auto z = make_instanton(g, 1.0, 1.0);
  const auto [u, du] = surface_sample(z, 1.0);
  CHECK(u == doctest::Approx(z1_psi(T1, 0.0)).epsilon(1e-8));
  CHECK(du == doctest::Approx(z1_psi_prime(T1, 0.0) - 0.5 * T1.kappa() * z1_psi(T1, 0.0)).epsilon(1e-8));
  CHECK_THROWS_AS(surface_sample(z, std::exp(25.0)), OutOfRange);
  CHECK_THROWS_AS(surface_sample(z, 0.0), OutOfRange);
}

TEST_CASE("u/v formulation maps") {
  SUBCASE("lambda=0: identity") {
    const auto g = EFGrid::make_default(T1);
    const auto z = make_instanton(g, 1.0, 1.0);
    const auto v = to_v_formulation(z);
    for (std::size_t i = 0; i < z.size(); i += 97) CHECK(v.value(i) == doctest::Approx(z.value(i)).epsilon(1e-15));
  }
  SUBCASE("alpha=0.1, beta=0.2, lambda=0.05") {
    const auto q = derive_ab(3, 0.1, 0.2, 0.05);
    const auto g = EFGrid::make_default(q);
    const auto z = make_instanton(g, 1.0, 1.0);
    const auto v = to_v_formulation(z);
    const auto back = to_u_formulation(v);
    const double e = q.a() - q.alpha();
    CHECK(e == doctest::Approx(0.068337).epsilon(1e-5));
    for (std::size_t i = 0; i < z.size(); i += 97) {
      CHECK(back.value(i) == doctest::Approx(z.value(i)).epsilon(1e-14));
      CHECK(z.value(i) == doctest::Approx(std::pow(g->radius(i), e) * v.value(i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("E-norm is finite and continuous in mu") {
  const auto g = EFGrid::make_default(T1);
  const double e1 = norm_E(make_instanton(g, 1.0, 1.0));
  CHECK(std::isfinite(e1));
  CHECK(norm_E(make_instanton(g, 1.0, 1.0001)) == doctest::Approx(e1).epsilon(1e-3));
}

TEST_CASE("grid mismatch") {
  const auto g1 = EFGrid::make(T1, 20.0, 256);
  const auto g2 = EFGrid::make(T1, 20.0, 512);
  CHECK_THROWS_AS(inner_Da(make_instanton(g1, 1, 1), make_instanton(g2, 1, 1)), GridMismatch);
}

TEST_CASE("profile CSV") {
  const auto g = EFGrid::make(T1, 20.0, 128);
  std::ostringstream os;
  write_profile_csv(os, make_instanton(g, 1.0, 1.0));
  const auto text = os.str();
  CHECK(text.rfind("s,r,psi,u,du_dr\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 129);
}
