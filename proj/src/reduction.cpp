#include "ckn/reduction.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/melnikov.hpp"

namespace ckn {

namespace {

using Vec = Eigen::VectorXd;

Eigen::Map<const Vec> as_vec(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

int sgn(double x) { return (x > 0) - (x < 0); }

const double kPhiStep = std::asinh(1e-4);
const double kPhiStep2 = std::asinh(1e-2);

}  // namespace

RadialFunction ReductionSolution::solution() const {
  std::vector<double> psi(z.psi().begin(), z.psi().end());
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += w.psi(i);
  return z.with_psi(std::move(psi));
}

Reduction::Reduction(std::shared_ptr<const EFGrid> grid, CoefficientField K, ReductionOptions opts)
    : grid_(std::move(grid)), K_(std::move(K)), opts_(opts) {
  weights_ = power_weights(*grid_);
  for (auto& w : weights_) w *= grid_->sphere_area();
  Kvals_.resize(grid_->size());
  for (std::size_t i = 0; i < Kvals_.size(); ++i) Kvals_[i] = K_.eval_extended(grid_->radius(i));
}

RadialFunction Reduction::base(double mu) const { return centred_instanton(grid_, mu); }

TangentVector Reduction::tangent(double mu) const {
  return tangent_vector(grid_, mu * kelvin_centre(grid_->params()));
}

double Reduction::energy(std::span<const double> psi, double t) const {
  const double p = grid_->params().p();
  const auto x = as_vec(psi);
  double pot = 0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    pot += weights_[i] * (1.0 + t * (Kvals_[i] - 1.0)) * std::pow(std::abs(psi[i]), p);
  }
  return 0.5 * x.dot(grid_->gram() * x) - pot / p;
}

double Reduction::energy_difference(std::span<const double> a, std::span<const double> b,
                                    double t) const {
  const double p = grid_->params().p();
  const auto x = as_vec(a), y = as_vec(b);
  const Vec d = x - y;
  double pot = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ya = std::abs(a[i]), yb = std::abs(b[i]);
    if (yb == 0) {
      pot += weights_[i] * (1.0 + t * (Kvals_[i] - 1.0)) * std::pow(ya, p);
      continue;
    }
    // |a|^p - |b|^p without cancellation
    const double rel = std::expm1(p * std::log1p((ya - yb) / yb));
    pot += weights_[i] * (1.0 + t * (Kvals_[i] - 1.0)) * std::pow(yb, p) * rel;
  }
  return 0.5 * d.dot(grid_->gram() * (x + y)) - pot / p;
}

Vec Reduction::gradient(std::span<const double> psi, double t) const {
  const double p = grid_->params().p();
  Vec g = grid_->gram() * as_vec(psi);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double Kt = 1.0 + t * (Kvals_[i] - 1.0);
    g[static_cast<Eigen::Index>(i)] -= weights_[i] * Kt * std::pow(std::abs(psi[i]), p - 2.0) * psi[i];
  }
  return g;
}

SparseMatrix Reduction::hessian(std::span<const double> psi, double t) const {
  const double p = grid_->params().p();
  SparseMatrix h = grid_->gram();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double Kt = 1.0 + t * (Kvals_[i] - 1.0);
    h.coeffRef(k, k) -= (p - 1.0) * weights_[i] * Kt * std::pow(std::abs(psi[i]), p - 2.0);
  }
  return h;
}

double Reduction::dual_norm(const Vec& g) const {
  return std::sqrt(std::max(0.0, g.dot(grid_->solve_gram(g))));
}

std::optional<ReductionSolution> Reduction::newton(double mu, double t,
                                                   const ReductionSolution* guess) const {
  const auto z = base(mu);
  const auto xi = tangent(mu).xi;
  const Eigen::Index n = static_cast<Eigen::Index>(z.size());
  const Vec gxi = grid_->gram() * as_vec(xi.psi());
  const Vec zv = as_vec(z.psi());
  const double scale = std::max(1.0, norm_Da(z));
  const double tol = opts_.tolerance * scale;

  Vec w = Vec::Zero(n);
  double eta = 0;
  if (guess != nullptr) {
    w = as_vec(guess->w.psi());
    eta = guess->eta;
  }

  auto residual = [&](const Vec& wv, double e, Vec& F1, double& F2) {
    const Vec u = zv + wv;
    F1 = gradient(std::span<const double>(u.data(), static_cast<std::size_t>(n)), t) - e * gxi;
    F2 = gxi.dot(wv);
    return dual_norm(F1) + std::abs(F2);
  };

  Vec F1;
  double F2 = 0;
  double res = residual(w, eta, F1, F2);
  const double initial_gradient = dual_norm(gradient(z.psi(), t));
  int iters = 0;
  Eigen::SparseLU<SparseMatrix> lu;
  while (res > tol && iters < opts_.max_iterations) {
    const Vec u = zv + w;
    const SparseMatrix H = hessian(std::span<const double>(u.data(), static_cast<std::size_t>(n)), t);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(H.nonZeros() + 2 * n));
    for (int k = 0; k < H.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(H, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      trip.emplace_back(i, n, -gxi[i]);
      trip.emplace_back(n, i, gxi[i]);
    }
    SparseMatrix J(n + 1, n + 1);
    J.setFromTriplets(trip.begin(), trip.end());
    lu.compute(J);
    if (lu.info() != Eigen::Success) return std::nullopt;
    Vec rhs(n + 1);
    rhs.head(n) = -F1;
    rhs[n] = -F2;
    const Vec step = lu.solve(rhs);
    ++iters;

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opts_.max_halvings; ++k, alpha *= 0.5) {
      const Vec w_try = w + alpha * step.head(n);
      const double eta_try = eta + alpha * step[n];
      Vec F1_try;
      double F2_try = 0;
      const double r = residual(w_try, eta_try, F1_try, F2_try);
      if (std::isfinite(r) && (r < res || r <= tol)) {
        w = w_try;
        eta = eta_try;
        F1 = std::move(F1_try);
        F2 = F2_try;
        res = r;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!(res <= tol)) return std::nullopt;

  ReductionSolution sol{mu, t, z.with_psi(to_std(w)), eta, iters, res, std::abs(F2), dual_norm(F1),
                        initial_gradient, z};
  return sol;
}

ReductionSolution Reduction::solve(double mu, double t) const { return solve(mu, t, nullptr); }

ReductionSolution Reduction::solve(double mu, double t, const ReductionSolution* guess) const {
  if (auto sol = newton(mu, t, guess)) return *sol;
  // Continuation in t: reach t through t/2^k, t/2^{k-1}, ...
  for (int splits = 1; splits <= opts_.max_eps_splits; ++splits) {
    std::optional<ReductionSolution> prev;
    bool ok = true;
    for (int k = splits; k >= 0; --k) {
      const double tk = t / std::pow(2.0, k);
      prev = newton(mu, tk, prev ? &*prev : nullptr);
      if (!prev) {
        ok = false;
        break;
      }
    }
    if (ok) return *prev;
  }
  std::ostringstream os;
  os << "reduction Newton failed at mu=" << mu << ", t=" << t;
  throw NewtonDivergence(os.str(), std::numeric_limits<double>::quiet_NaN());
}

double Reduction::phi(double mu, double t) const {
  const auto sol = solve(mu, t);
  return energy(sol.solution().psi(), t);
}

PhiSample Reduction::phi_sample(double mu, double t, const ReductionSolution* guess) const {
  PhiSample out{solve(mu, t, guess), 0, 0};
  const auto& mid = out.solution;
  const auto su = solve(mu * std::exp(kPhiStep), t, &mid);
  const auto sd = solve(mu * std::exp(-kPhiStep), t, &mid);
  out.phi = energy(mid.solution().psi(), t);
  out.phi_prime = energy_difference(su.solution().psi(), sd.solution().psi(), t) /
                  (2.0 * mu * std::sinh(kPhiStep));
  return out;
}

double Reduction::phi_prime(double mu, double t) const { return phi_sample(mu, t).phi_prime; }

double Reduction::phi_second(double mu, double t) const {
  const auto mid = solve(mu, t);
  const auto su = solve(mu * std::exp(kPhiStep2), t, &mid);
  const auto sd = solve(mu * std::exp(-kPhiStep2), t, &mid);
  const auto um = mid.solution(), uu = su.solution(), ud = sd.solution();
  const double dup = energy_difference(uu.psi(), um.psi(), t);
  const double ddn = energy_difference(um.psi(), ud.psi(), t);
  const double d = kPhiStep2;
  const double fll = (dup - ddn) / (d * d);
  const double fl = (dup + ddn) / (2.0 * d);
  return (fll - fl) / (mu * mu);
}

PhiCurve phi_critical_points(const Reduction& red, double t, const PhiSearchOptions& opts) {
  if (!(opts.mu_min > 0) || !(opts.mu_max > opts.mu_min) || opts.samples < 2) {
    throw DomainError("phi_critical_points needs 0 < mu_min < mu_max and two samples");
  }
  PhiCurve c;
  c.t = t;
  const int n = opts.samples;
  const double lo = std::log(opts.mu_min), hi = std::log(opts.mu_max);
  double max_phi = 0, max_prime = 0;
  std::optional<ReductionSolution> prev;
  for (int i = 0; i < n; ++i) {
    const double mu = std::exp(lo + (hi - lo) * i / (n - 1));
    auto smp = red.phi_sample(mu, t, prev ? &*prev : nullptr);
    c.mu.push_back(mu);
    c.phi.push_back(smp.phi);
    c.phi_prime.push_back(smp.phi_prime);
    prev = std::move(smp.solution);
    max_phi = std::max(max_phi, std::abs(c.phi.back()));
    max_prime = std::max(max_prime, std::abs(mu * c.phi_prime.back()));
  }
  c.flat = max_prime <= opts.flat_tol * max_phi;
  if (c.flat) return c;

  Melnikov mel(red.grid_ptr(), red.coefficient());
  MelnikovOptions mopts;
  mopts.tau_min = opts.mu_min;
  mopts.tau_max = opts.mu_max;
  mopts.samples = 4 * n + 1;
  const auto gcurve = critical_points(mel, mopts);

  const double zero_tol = 1e-9 * max_prime;
  auto add_point = [&](double mu) {
    PhiCriticalPoint pt;
    pt.mu = mu;
    const auto sol = red.solve(mu, t);
    pt.phi = red.energy(sol.solution().psi(), t);
    pt.eta = sol.eta;
    pt.u = sol.solution();
    pt.phi_second = red.phi_second(mu, t);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gcurve.critical_points) {
      if (!g.nondegenerate) continue;
      if (std::abs(g.tau - mu) < best) {
        best = std::abs(g.tau - mu);
        pt.mu_bar = g.tau;
        pt.gamma_second = g.gamma_second;
      }
    }
    pt.rate = std::isfinite(best) ? best / t : std::numeric_limits<double>::infinity();
    c.critical_points.push_back(std::move(pt));
  };
  auto f = [&](double x) { return red.phi_prime(std::exp(x), t); };
  for (int i = 0; i + 1 < n; ++i) {
    const double fa = c.phi_prime[i], fb = c.phi_prime[i + 1];
    if (std::abs(fa) <= zero_tol) {
      if (i > 0 && std::abs(c.phi_prime[i - 1]) > zero_tol) add_point(c.mu[i]);
      continue;
    }
    if (std::abs(fb) <= zero_tol || sgn(fa) == sgn(fb)) continue;
    std::uintmax_t iters = 60;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, std::log(c.mu[i]), std::log(c.mu[i + 1]), fa, fb,
        [&](double x0, double x1) { return std::abs(x1 - x0) < 1e-13; }, iters);
    add_point(std::exp(0.5 * (a + b)));
  }
  return c;
}

const PhiCriticalPoint& nearest_critical_point(const PhiCurve& curve, double mu) {
  if (curve.critical_points.empty()) {
    std::ostringstream os;
    os << "no critical point of Phi_t at t=" << curve.t << (curve.flat ? " (flat)" : "");
    throw NoCriticalPoint(os.str());
  }
  return *std::min_element(curve.critical_points.begin(), curve.critical_points.end(),
                           [mu](const auto& a, const auto& b) {
                             return std::abs(a.mu - mu) < std::abs(b.mu - mu);
                           });
}

namespace {

// Top eigenpairs of M v = nu G v by subspace iteration with Rayleigh-Ritz.
// `project` (optional) is applied after every G^{-1} M product.
template <class Project>
std::pair<Vec, Eigen::MatrixXd> top_modes(const EFGrid& grid, const Vec& mdiag, Eigen::MatrixXd V,
                                          Project project, int wanted) {
  const SparseMatrix& G = grid.gram();
  Vec nu_prev = Vec::Constant(wanted, std::numeric_limits<double>::infinity());
  Vec nu(V.cols());
  for (int it = 0; it < 2000; ++it) {
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
      Vec col = grid.solve_gram(mdiag.cwiseProduct(V.col(j)));
      project(col);
      V.col(j) = col;
    }
    const Eigen::MatrixXd A = V.transpose() * mdiag.asDiagonal() * V;
    const Eigen::MatrixXd B = V.transpose() * (G * V);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()),
                                                                   0.5 * (B + B.transpose()));
    // Ascending order: reverse to put the largest first.
    const Eigen::MatrixXd Y = es.eigenvectors().rowwise().reverse();
    nu = es.eigenvalues().reverse();
    V = V * Y;
    for (Eigen::Index j = 0; j < V.cols(); ++j) {
      const double nrm = std::sqrt(V.col(j).dot(G * V.col(j)));
      if (nrm > 0) V.col(j) /= nrm;
    }
    if ((nu.head(wanted) - nu_prev).cwiseAbs().maxCoeff() <= 1e-13 * std::max(1.0, nu[0])) break;
    nu_prev = nu.head(wanted);
  }
  return {nu, V};
}

}  // namespace

SpectrumReport hessian_spectrum(const Reduction& red, const RadialFunction& u, double t, double mu,
                                double zero_tol, int block) {
  const auto& grid = red.grid();
  const auto& q = grid.params();
  const double p = q.p();
  const Eigen::Index n = static_cast<Eigen::Index>(u.size());
  const SparseMatrix H = red.hessian(u.psi(), t);
  const SparseMatrix& G = grid.gram();
  const Vec mdiag = Vec(G.diagonal()) - Vec(H.diagonal());

  const auto zf = red.base(mu);
  const auto xif = red.tangent(mu).xi;
  const Vec z = as_vec(zf.psi());
  const Vec xi = as_vec(xif.psi());
  const double lm = std::log(mu);

  Eigen::MatrixXd V(n, block);
  for (int j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      V(i, j) = z[i] * std::pow(grid.node(static_cast<std::size_t>(i)) - lm, j);
    }
  }
  auto none = [](Vec&) {};
  const int wanted = std::min(3, block);
  auto [nu, modes] = top_modes(grid, mdiag, V, none, wanted);

  SpectrumReport rep;
  rep.zero_tol = zero_tol;
  rep.nu.assign(nu.data(), nu.data() + nu.size());
  int near = 0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    if (nu[j] > 1.0 + zero_tol) ++rep.negative_count;
    if (std::abs(nu[j] - 1.0) < std::abs(nu[near] - 1.0)) near = static_cast<int>(j);
  }
  rep.near_zero_eigenvalue = 1.0 - nu[near];
  rep.zero_mode_present = std::abs(rep.near_zero_eigenvalue) <= zero_tol;
  const double znorm = std::sqrt(z.dot(G * z));
  rep.lowest_alignment_z = std::abs(modes.col(0).dot(G * z)) / znorm;
  rep.zero_alignment_xi = std::abs(modes.col(near).dot(G * xi));
  rep.rayleigh_z = z.dot(H * z) / (znorm * znorm);

  // G-orthonormal basis of span{z, xi}.
  Vec e1 = z / znorm;
  Vec e2 = xi - e1 * e1.dot(G * xi);
  e2 /= std::sqrt(e2.dot(G * e2));
  const Vec ge1 = G * e1, ge2 = G * e2;
  auto project = [&](Vec& v) {
    v -= e1 * ge1.dot(v);
    v -= e2 * ge2.dot(v);
  };
  Eigen::MatrixXd W = V;
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    Vec col = W.col(j);
    // Odd and even shapes beyond the first two directions.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = grid.node(static_cast<std::size_t>(i)) - lm;
      col[i] += z[i] * std::cos(static_cast<double>(j + 1) * s);
    }
    project(col);
    W.col(j) = col;
  }
  const auto proj = top_modes(grid, mdiag, W, project, 1);
  rep.projected_margin = 1.0 - proj.first[0];

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(H);
  if (ldlt.info() == Eigen::Success) {
    const Vec d = ldlt.vectorD();
    rep.ldlt_negative_count = static_cast<int>((d.array() < 0).count());
  }
  (void)p;
  return rep;
}

MorseCheck morse_index_check(const Reduction& red, double mu_t, double t) {
  const auto sol = red.solve(mu_t, t);
  MorseCheck out{0, 0, hessian_spectrum(red, sol.solution(), t, mu_t)};
  out.index = out.spectrum.ldlt_negative_count >= 0 && !out.spectrum.zero_mode_present
                  ? out.spectrum.ldlt_negative_count
                  : out.spectrum.negative_count;
  Melnikov mel(red.grid_ptr(), red.coefficient());
  out.expected = 1 + (mel.gamma_second(mu_t) > 0 ? 1 : 0);
  return out;
}

void write_phi_csv(std::ostream& os, const PhiCurve& curve) {
  const auto prec = os.precision(17);
  os << "mu,phi,phi_prime\n";
  for (std::size_t i = 0; i < curve.mu.size(); ++i) {
    os << curve.mu[i] << ',' << curve.phi[i] << ',' << curve.phi_prime[i] << '\n';
  }
  os.precision(prec);
}

}  // namespace ckn
