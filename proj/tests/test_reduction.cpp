#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/melnikov.hpp"
#include "ckn/reduction.hpp"

using namespace ckn;

namespace {
const ProblemParams T1 = derive_ab(3, 0.0, 0.15, 0.0);

std::shared_ptr<const EFGrid> grid() {
  static const auto g = EFGrid::make_default(T1);
  return g;
}

void check_invariants(const Reduction& red, const ReductionSolution& s) {
  const double w = norm_Da(s.w);
  CHECK(s.orthogonality <= 1e-10 * w + 1e-300);
  CHECK(s.stationarity <= 1e-8 * s.initial_gradient + 1e-12);
  CHECK(std::abs(inner_Da(s.w, red.tangent(s.mu).xi)) <= 1e-10 * w + 1e-300);
}
}  // namespace

TEST_CASE("t=0: the manifold is critical") {
  Reduction red(grid(), CoefficientField::self_dual_bump(0.5));
  for (double mu : {0.7, 1.0, 1.6}) {
    const auto s = red.solve(mu, 0.0);
    CHECK(s.eta == 0.0);
    CHECK(norm_Da(s.w) == 0.0);
    CHECK(s.newton_iters == 0);
  }
  std::vector<double> phis;
  for (double mu : {0.5, 0.8, 1.0, 1.4, 2.0}) phis.push_back(red.phi(mu, 0.0));
  const auto [lo, hi] = std::minmax_element(phis.begin(), phis.end());
  CHECK(*hi - *lo <= 1e-8 * std::abs(*hi));
}

TEST_CASE("w is linear in t") {
  Reduction red(grid(), CoefficientField::self_dual_bump(0.5));
  std::vector<double> ratio;
  for (double t : {1e-2, 1e-3, 1e-4}) {
    const auto s = red.solve(1.0, t);
    check_invariants(red, s);
    ratio.push_back(norm_Da(s.w) / t);
  }
  const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
  CHECK(*hi / *lo <= 2.0);
}

TEST_CASE("mu-derivative of w") {
  Reduction red(grid(), CoefficientField::self_dual_bump(0.5));
  std::vector<double> c;
  for (double t : {1e-2, 1e-3}) {
    const double mu = 1.3, h = 1e-4 * mu;
    const auto wp = red.solve(mu + h, t).w, wm = red.solve(mu - h, t).w;
    std::vector<double> d(wp.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (wp.psi(i) - wm.psi(i)) / (2 * h);
    c.push_back(norm_Da(wp.with_psi(d)) / ((1 + 1 / mu) * t));
  }
  CHECK(c[0] / c[1] <= 2.0);
  CHECK(c[1] / c[0] <= 2.0);
}

TEST_CASE("Phi' against -t Gamma'") {
  const auto K = CoefficientField::self_dual_bump(0.5);
  Reduction red(grid(), K);
  Melnikov mel(grid(), K);
  for (double mu : {0.7, 1.5}) {
    const double q2 = (red.phi_prime(mu, 1e-2) + 1e-2 * mel.gamma_prime(mu)) / 1e-4;
    const double q3 = (red.phi_prime(mu, 1e-3) + 1e-3 * mel.gamma_prime(mu)) / 1e-6;
    CHECK(std::abs(q3) <= 2 * std::abs(q2) + 1e-6);
    CHECK(red.phi_prime(mu, 1e-3) == doctest::Approx(-1e-3 * mel.gamma_prime(mu)).epsilon(1e-2));
  }
}

TEST_CASE("phi_prime agrees with finite differences of phi") {
  Reduction red(grid(), CoefficientField::self_dual_bump(0.5));
  const double mu = 1.4, t = 1e-2, h = 1e-3 * mu;
  const double fd = (red.phi(mu + h, t) - red.phi(mu - h, t)) / (2 * h);
  CHECK(red.phi_prime(mu, t) == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("energy_difference equals the difference of energies") {
  Reduction red(grid(), CoefficientField::self_dual_bump(0.5));
  const auto a = make_instanton(grid(), 1.0, 1.1), b = make_instanton(grid(), 1.0, 1.0);
  const double d = red.energy_difference(a.psi(), b.psi(), 0.3);
  CHECK(d == doctest::Approx(red.energy(a.psi(), 0.3) - red.energy(b.psi(), 0.3)).epsilon(1e-8));
}

TEST_CASE("Kelvin symmetry of Phi for the bump") {
  Reduction red(grid(), CoefficientField::self_dual_bump(0.5));
  for (double mu : {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.98}) {
    CHECK(red.phi(mu, 1e-2) == doctest::Approx(red.phi(1.0 / mu, 1e-2)).epsilon(1e-7));
  }
}

TEST_CASE("critical points of Phi_t") {
  const auto K = CoefficientField::self_dual_bump(0.5);
  Reduction red(grid(), K);
  Melnikov mel(grid(), K);
  const double g2 = mel.gamma_second(1.0);
  for (double t : {1e-3, 1e-4}) {
    const auto curve = phi_critical_points(red, t);
    REQUIRE(curve.critical_points.size() == 1);
    const auto& pt = curve.critical_points.front();
    CHECK(std::abs(pt.mu - 1.0) <= 1e-6 + 10 * t);
    CHECK(pt.mu_bar == doctest::Approx(1.0).epsilon(1e-8));
    CHECK((pt.phi_second > 0) == (g2 < 0));
    CHECK(pt.u.has_value());
  }
}

TEST_CASE("constant K: Phi_t is flat") {
  Reduction red(grid(), CoefficientField::constant(1.0));
  PhiSearchOptions o;
  o.samples = 9;
  const auto curve = phi_critical_points(red, 1e-3, o);
  CHECK(curve.flat);
  CHECK(curve.critical_points.empty());
  CHECK_THROWS_AS(nearest_critical_point(curve, 1.0), NoCriticalPoint);
}

TEST_CASE("spectrum at t=0") {
  Reduction red(grid(), CoefficientField::constant(1.0));
  const auto sp = hessian_spectrum(red, red.base(1.0), 0.0, 1.0);
  CHECK(sp.negative_count == 1);
  CHECK(sp.zero_mode_present);
  CHECK(sp.rayleigh_z == doctest::Approx(-(T1.p() - 2.0)).epsilon(1e-6));
  CHECK(sp.projected_margin > 0);
  CHECK(sp.lowest_alignment_z > 0.9);
  CHECK(sp.zero_alignment_xi > 0.9);
}

TEST_CASE("Morse index follows the sign of Gamma''") {
  for (double A : {0.5, -0.5}) {
    const auto K = CoefficientField::self_dual_bump(A);
    Reduction red(grid(), K);
    const auto m = morse_index_check(red, 1.0, 1e-2);
    CHECK(m.index == m.expected);
    CHECK(m.expected == (A > 0 ? 1 : 2));
  }
}

TEST_CASE("phi CSV") {
  PhiCurve c;
  c.t = 1e-3;
  c.mu = {0.5, 1.0};
  c.phi = {1.0, 2.0};
  c.phi_prime = {0.1, 0.0};
  std::ostringstream os;
  write_phi_csv(os, c);
  const auto text = os.str();
  CHECK(text.rfind("mu,phi,phi_prime\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}
