#include "ckn/efgrid.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ckn/errors.hpp"
#include "ckn/stencil.hpp"

namespace ckn {

struct EFGrid::GramFactor {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

namespace {

constexpr int kStencilHalf = 3;  // 7-point centred stencils

std::vector<double> gregory_weights(std::size_t count, double h) {
  std::vector<double> w(count, h);
  if (count < 2) return std::vector<double>(count, 0.0);
  if (count < 6) {
    w.front() = w.back() = 0.5 * h;
    return w;
  }
  const double ends[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int k = 0; k < 3; ++k) {
    w[k] = ends[k] * h;
    w[count - 1 - k] = ends[k] * h;
  }
  return w;
}

// Stencil offsets (in units of h) used at row i of an n-node grid.
std::vector<int> stencil_columns(int i, int n, int width) {
  int first = i - width / 2;
  first = std::clamp(first, 0, n - width);
  std::vector<int> cols(width);
  for (int k = 0; k < width; ++k) cols[k] = first + k;
  return cols;
}

SparseMatrix build_derivative(int n, double h, int order) {
  // Centred 7-point in the interior; one-sided near the ends, 7 points for d/ds
  // and 8 for d^2/ds^2 so that the ends keep sixth order.
  const int one_sided_width = order == 1 ? 7 : 8;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 8);
  const double scale = std::pow(h, -order);
  for (int i = 0; i < n; ++i) {
    const bool interior = i >= kStencilHalf && i < n - kStencilHalf;
    const auto cols = interior ? stencil_columns(i, n, 2 * kStencilHalf + 1)
                               : stencil_columns(i, n, one_sided_width);
    std::vector<double> offsets(cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) offsets[k] = cols[k] - i;
    const auto w = fd_weights(0.0, offsets, order);
    for (std::size_t k = 0; k < cols.size(); ++k) triplets.emplace_back(i, cols[k], w[k] * scale);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

// Gradient part of the Gram matrix, h sum_m (D psi)_{m+1/2}^2 over every
// midpoint of the infinite lattice, psi continued by psi_{-k} = psi_0 e^{-rate k h}
// (and likewise on the right). D is the 6-point centred stencil. Rows touching
// a real node are assembled explicitly; the purely exponential rest is a
// geometric series folded into the two end diagonals.
SparseMatrix lattice_stiffness(int n, double h, double rate) {
  static const double offsets[6] = {-2.5, -1.5, -0.5, 0.5, 1.5, 2.5};
  const auto w = fd_weights(0.0, offsets, 1);
  std::vector<Eigen::Triplet<double>> triplets;
  const int first = -3, last = n + 1;  // midpoints m + 1/2 with a real node in the stencil
  SparseMatrix d(last - first + 1, n);
  for (int m = first; m <= last; ++m) {
    for (int k = 0; k < 6; ++k) {
      const int node = m - 2 + k;
      const double c = w[k] / h;
      if (node < 0) {
        triplets.emplace_back(m - first, 0, c * std::exp(rate * node * h));
      } else if (node > n - 1) {
        triplets.emplace_back(m - first, n - 1, c * std::exp(-rate * (node - (n - 1)) * h));
      } else {
        triplets.emplace_back(m - first, node, c);
      }
    }
  }
  d.setFromTriplets(triplets.begin(), triplets.end());
  SparseMatrix stiff = h * SparseMatrix(d.transpose()) * d;
  // Midpoints m <= -4: (D psi)_m = psi_0 e^{rate m h} A.
  double A = 0;
  for (int k = 0; k < 6; ++k) A += w[k] / h * std::exp(rate * (k - 2) * h);
  const double q = std::exp(-2.0 * rate * h);
  const double tail = h * A * A * std::pow(q, 4) / (1.0 - q);
  stiff.coeffRef(0, 0) += tail;
  stiff.coeffRef(n - 1, n - 1) += tail;
  return stiff;
}

double tail_integral(double f_end, double rate) {
  if (!std::isfinite(rate)) return 0.0;
  if (!(rate > 0)) {
    if (f_end == 0) return 0.0;
    throw DomainError("tail of a non-decaying integrand is not integrable");
  }
  return f_end / rate;
}

// Mixed tail of psi' phi' + (kappa^2/4) psi phi for two exponential tails.
double gradient_tail(double psi_end, double phi_end, double rate_u, double rate_v, double kappa) {
  if (!std::isfinite(rate_u) || !std::isfinite(rate_v)) return 0.0;
  const double sum = rate_u + rate_v;
  if (!(sum > 0)) {
    if (psi_end * phi_end == 0) return 0.0;
    throw DomainError("D_a inner product of non-decaying profiles");
  }
  return (rate_u * rate_v + 0.25 * kappa * kappa) * psi_end * phi_end / sum;
}

}  // namespace

EFGrid::EFGrid(const ProblemParams& params, double half_width, std::size_t nodes)
    : params_(params), half_width_(half_width) {
  const double kappa = params.kappa();
  if (!(kappa > 0)) throw DomainError("EFGrid requires N-2-2a > 0");
  if (nodes < kMinNodes) {
    std::ostringstream os;
    os << "EFGrid needs at least " << kMinNodes << " nodes, got " << nodes;
    throw DomainError(os.str());
  }
  if (!(half_width >= 10.0 / kappa * (1 - 1e-14))) {
    std::ostringstream os;
    os << "EFGrid half-width " << half_width << " below 10/(N-2-2a) = " << 10.0 / kappa;
    throw DomainError(os.str());
  }
  const int n = static_cast<int>(nodes);
  h_ = 2.0 * half_width / (n - 1);
  s_.resize(nodes);
  r_.resize(nodes);
  for (int i = 0; i < n; ++i) {
    // Symmetric construction keeps s_{n-1-i} = -s_i exactly.
    const int j = n - 1 - i;
    s_[i] = i <= j ? -half_width + i * h_ : half_width - j * h_;
    if (2 * i == n - 1) s_[i] = 0.0;
    r_[i] = std::exp(s_[i]);
  }
  sphere_area_ = params.sphere_area();
  w_ = gregory_weights(nodes, h_);
  d1_ = build_derivative(n, h_, 1);
  d2_ = build_derivative(n, h_, 2);

  // Mass part on the same lattice: h at every node, geometric tails at the ends.
  SparseMatrix g = lattice_stiffness(n, h_, 0.5 * kappa);
  const double end_mass = h_ * lattice_tail_factor(kappa * h_);
  for (int i = 0; i < n; ++i) {
    g.coeffRef(i, i) += 0.25 * kappa * kappa * (h_ + ((i == 0 || i == n - 1) ? end_mass : 0.0));
  }
  gram_ = sphere_area_ * g;
  gram_.makeCompressed();
  auto factor = std::make_shared<GramFactor>();
  factor->ldlt.compute(gram_);
  if (factor->ldlt.info() != Eigen::Success) throw DomainError("Gram matrix factorization failed");
  gram_factor_ = std::move(factor);
}

Eigen::VectorXd EFGrid::solve_gram(const Eigen::VectorXd& g) const {
  return gram_factor_->ldlt.solve(g);
}

std::shared_ptr<const EFGrid> EFGrid::make(const ProblemParams& params, double half_width,
                                           std::size_t nodes) {
  return std::make_shared<const EFGrid>(params, half_width, nodes);
}

std::shared_ptr<const EFGrid> EFGrid::make_default(const ProblemParams& params) {
  return make(params, kDefaultWidthFactor / params.kappa(), kDefaultNodes);
}

bool EFGrid::same_as(const EFGrid& other) const noexcept {
  return this == &other || (params_ == other.params_ && half_width_ == other.half_width_ &&
                            s_.size() == other.s_.size());
}

std::vector<double> EFGrid::lattice_weights(double rate) const {
  std::vector<double> w(s_.size(), h_);
  const double end = h_ * lattice_tail_factor(rate * h_);
  w.front() += end;
  w.back() += end;
  return w;
}

double EFGrid::integrate(std::span<const double> f, double left_rate, double right_rate) const {
  double sum = 0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w_[i] * f[i];
  return sum + tail_integral(f.front(), left_rate) + tail_integral(f.back(), right_rate);
}

double EFGrid::integrate_to(std::span<const double> f, double s_end, double left_rate) const {
  if (s_end < s_.front() || s_end > s_.back()) {
    throw OutOfRange("integrate_to: endpoint outside the grid");
  }
  std::size_t j = static_cast<std::size_t>(std::floor((s_end - s_.front()) / h_));
  j = std::min(j, s_.size() - 1);
  const auto w = gregory_weights(j + 1, h_);
  double sum = tail_integral(f.front(), left_rate);
  for (std::size_t i = 0; i <= j; ++i) sum += w[i] * f[i];
  const double rest = s_end - s_[j];
  if (rest > 0) {
    // 3-point Gauss-Legendre on [s_j, s_end].
    static const double x[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double g[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double mid = s_[j] + 0.5 * rest;
    for (int k = 0; k < 3; ++k) sum += 0.5 * rest * g[k] * interpolate(f, mid + 0.5 * rest * x[k]);
  }
  return sum;
}

std::vector<double> EFGrid::d1(std::span<const double> f) const {
  Eigen::Map<const Eigen::VectorXd> x(f.data(), static_cast<Eigen::Index>(f.size()));
  Eigen::VectorXd y = d1_ * x;
  return {y.data(), y.data() + y.size()};
}

std::vector<double> EFGrid::d2(std::span<const double> f) const {
  Eigen::Map<const Eigen::VectorXd> x(f.data(), static_cast<Eigen::Index>(f.size()));
  Eigen::VectorXd y = d2_ * x;
  return {y.data(), y.data() + y.size()};
}

double EFGrid::interpolate(std::span<const double> f, double s) const {
  if (s < s_.front() - 1e-12 * h_ || s > s_.back() + 1e-12 * h_) {
    std::ostringstream os;
    os << "s=" << s << " outside grid [" << s_.front() << ", " << s_.back() << "]";
    throw OutOfRange(os.str());
  }
  const int n = static_cast<int>(s_.size());
  int j = static_cast<int>(std::floor((s - s_.front()) / h_));
  const int first = std::clamp(j - 1, 0, n - 4);
  double out = 0;
  for (int k = 0; k < 4; ++k) {
    double basis = 1;
    for (int m = 0; m < 4; ++m) {
      if (m != k) basis *= (s - s_[first + m]) / (s_[first + k] - s_[first + m]);
    }
    out += basis * f[first + k];
  }
  return out;
}

// --- RadialFunction ---------------------------------------------------------

RadialFunction::RadialFunction(std::shared_ptr<const EFGrid> grid, std::vector<double> psi)
    : grid_(std::move(grid)), psi_(std::move(psi)) {
  tails_ = {grid_->decay_rate(), grid_->decay_rate()};
  weight_exponent_ = grid_->decay_rate();
  if (psi_.size() != grid_->size()) throw GridMismatch("profile length differs from grid size");
}

RadialFunction::RadialFunction(std::shared_ptr<const EFGrid> grid, std::vector<double> psi,
                               TailDecay tails, double weight_exponent)
    : grid_(std::move(grid)), psi_(std::move(psi)), tails_(tails), weight_exponent_(weight_exponent) {
  if (psi_.size() != grid_->size()) throw GridMismatch("profile length differs from grid size");
}

RadialFunction RadialFunction::zero(std::shared_ptr<const EFGrid> grid) {
  std::vector<double> psi(grid->size(), 0.0);
  return RadialFunction(std::move(grid), std::move(psi));
}

double RadialFunction::value(std::size_t i) const {
  return std::exp(-weight_exponent_ * grid_->node(i)) * psi_[i];
}

std::vector<double> RadialFunction::values() const {
  std::vector<double> out(psi_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i);
  return out;
}

RadialFunction RadialFunction::with_psi(std::vector<double> psi) const {
  return RadialFunction(grid_, std::move(psi), tails_, weight_exponent_);
}

void require_same_grid(const RadialFunction& u, const RadialFunction& v) {
  if (!u.grid().same_as(v.grid())) throw GridMismatch("profiles live on different grids");
}

namespace {

void require_u_formulation(const RadialFunction& u) {
  if (std::abs(u.weight_exponent() - u.grid().decay_rate()) > 1e-14) {
    throw DomainError("operation defined for u-formulation profiles (weight exponent kappa/2)");
  }
}

}  // namespace

double integrate_volume_p(const RadialFunction& u) {
  require_u_formulation(u);
  const auto& g = u.grid();
  const double p = g.params().p();
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(std::abs(u.psi(i)), p);
  return g.sphere_area() * g.integrate(f, p * u.tails().left, p * u.tails().right);
}

double inner_Da(const RadialFunction& u, const RadialFunction& v) {
  require_same_grid(u, v);
  require_u_formulation(u);
  require_u_formulation(v);
  const auto& g = u.grid();
  const double kappa = g.params().kappa();
  auto standard = [&](const RadialFunction& f) {
    return f.tails().left == g.decay_rate() && f.tails().right == g.decay_rate();
  };
  if (standard(u) && standard(v)) {
    Eigen::Map<const Eigen::VectorXd> x(u.psi().data(), static_cast<Eigen::Index>(u.size()));
    Eigen::Map<const Eigen::VectorXd> y(v.psi().data(), static_cast<Eigen::Index>(v.size()));
    return x.dot(g.gram() * y);
  }
  // Other tails: quadrature of psi' phi' + kappa^2/4 psi phi with their own tails.
  const auto du = g.d1(u.psi());
  const auto dv = g.d1(v.psi());
  std::vector<double> f(u.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = du[i] * dv[i] + 0.25 * kappa * kappa * u.psi(i) * v.psi(i);
  }
  const std::size_t last = u.size() - 1;
  double sum = g.integrate(f, std::numeric_limits<double>::infinity(),
                           std::numeric_limits<double>::infinity());
  sum += gradient_tail(u.psi(0), v.psi(0), u.tails().left, v.tails().left, kappa);
  sum += gradient_tail(u.psi(last), v.psi(last), u.tails().right, v.tails().right, kappa);
  return g.sphere_area() * sum;
}

double norm_Da(const RadialFunction& u) { return std::sqrt(std::max(0.0, inner_Da(u, u))); }

double norm_E(const RadialFunction& u) {
  const auto& g = u.grid();
  const double kappa = g.params().kappa();
  double sup = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sup = std::max(sup, std::abs(u.value(i)) * (1.0 + std::pow(g.radius(i), kappa)));
  }
  return norm_Da(u) + sup;
}

RadialFunction differentiate(const RadialFunction& u) {
  const auto dpsi = u.grid().d1(u.psi());
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = dpsi[i] - u.weight_exponent() * u.psi(i);
  return RadialFunction(u.grid_ptr(), std::move(out), u.tails(), u.weight_exponent() + 1.0);
}

std::pair<double, double> surface_sample(const RadialFunction& u, double sigma) {
  const auto& g = u.grid();
  if (!(sigma > 0)) throw OutOfRange("surface_sample requires sigma > 0");
  const double s = std::log(sigma);
  const double w = u.weight_exponent();
  const double psi = g.interpolate(u.psi(), s);
  const auto dpsi_nodes = g.d1(u.psi());
  const double dpsi = g.interpolate(dpsi_nodes, s);
  const double value = std::pow(sigma, -w) * psi;
  const double slope = std::pow(sigma, -w - 1.0) * (dpsi - w * psi);
  return {value, slope};
}

RadialFunction to_u_formulation(const RadialFunction& v) {
  const auto& q = v.grid().params();
  return RadialFunction(v.grid_ptr(), std::vector<double>(v.psi().begin(), v.psi().end()),
                        v.tails(), v.weight_exponent() - (q.a() - q.alpha()));
}

RadialFunction to_v_formulation(const RadialFunction& u) {
  const auto& q = u.grid().params();
  return RadialFunction(u.grid_ptr(), std::vector<double>(u.psi().begin(), u.psi().end()),
                        u.tails(), u.weight_exponent() + (q.a() - q.alpha()));
}

void write_profile_csv(std::ostream& os, const RadialFunction& u) {
  const auto du = differentiate(u);
  const auto prec = os.precision(17);
  os << "s,r,psi,u,du_dr\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    os << u.grid().node(i) << ',' << u.grid().radius(i) << ',' << u.psi(i) << ',' << u.value(i)
       << ',' << du.value(i) << '\n';
  }
  os.precision(prec);
}

}  // namespace ckn
