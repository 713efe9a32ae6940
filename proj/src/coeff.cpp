#include "ckn/coeff.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_spline.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ckn/errors.hpp"

namespace ckn {

struct CoefficientField::Spline {
  gsl_spline* handle = nullptr;
  explicit Spline(const std::vector<double>& x, const std::vector<double>& y)
      : handle(gsl_spline_alloc(gsl_interp_cspline, x.size())) {
    gsl_spline_init(handle, x.data(), y.data(), x.size());
  }
  ~Spline() { gsl_spline_free(handle); }
  Spline(const Spline&) = delete;
  Spline& operator=(const Spline&) = delete;
};

namespace {

// Least-squares fit y = c0 + c2 x over the given samples.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  const double c2 = (n * sxy - sx * sy) / det;
  const double c0 = (sy - c2 * sx) / n;
  return {c0, c2};
}

struct GslSilencer {
  GslSilencer() { gsl_set_error_handler_off(); }
};
const GslSilencer silence_gsl;

}  // namespace

const char* to_string(CoefficientKind kind) {
  switch (kind) {
    case CoefficientKind::Constant: return "constant";
    case CoefficientKind::SelfDualBump: return "self_dual_bump";
    case CoefficientKind::Table: return "table";
  }
  return "?";
}

CoefficientField CoefficientField::constant(double c) {
  if (!(c > 0)) throw DomainError("constant coefficient must be positive");
  CoefficientField K;
  K.kind_ = CoefficientKind::Constant;
  K.value_ = c;
  K.c0_origin_ = K.c0_infinity_ = c;
  K.a1_bound_ = 1.0 / c;
  return K;
}

CoefficientField CoefficientField::self_dual_bump(double A) {
  if (!(A > -2.0)) throw DomainError("self_dual_bump requires A > -2");
  CoefficientField K;
  K.kind_ = CoefficientKind::SelfDualBump;
  K.amplitude_ = A;
  K.c0_origin_ = K.c0_infinity_ = 1.0;
  K.c2_origin_ = K.c2_infinity_ = A;
  // r^2/(1+r^4) ranges over [0, 1/2].
  K.a1_bound_ = A >= 0 ? 1.0 : 1.0 / (1.0 + A / 2.0);
  return K;
}

CoefficientField CoefficientField::table(std::vector<double> r, std::vector<double> values) {
  if (r.size() != values.size()) throw DomainError("table: r and K differ in length");
  if (r.size() < 10) throw DomainError("table: need at least 10 samples");
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] > 0)) throw DomainError("table: radii must be positive");
    if (i > 0 && !(r[i] > r[i - 1])) throw DomainError("table: radii must be strictly increasing");
    if (!(values[i] > 0) || !std::isfinite(values[i])) throw DomainError("table: K must be positive");
  }
  CoefficientField K;
  K.kind_ = CoefficientKind::Table;
  std::vector<double> log_r(r.size());
  std::transform(r.begin(), r.end(), log_r.begin(), [](double x) { return std::log(x); });
  K.spline_ = std::make_shared<const Spline>(log_r, values);

  std::vector<double> x0, y0, xi, yi;
  for (std::size_t i = 0; i < 5; ++i) {
    x0.push_back(r[i] * r[i]);
    y0.push_back(values[i]);
    const std::size_t j = r.size() - 1 - i;
    xi.push_back(1.0 / (r[j] * r[j]));
    yi.push_back(values[j]);
  }
  std::tie(K.c0_origin_, K.c2_origin_) = fit_line(x0, y0);
  std::tie(K.c0_infinity_, K.c2_infinity_) = fit_line(xi, yi);
  K.a1_bound_ = 1.0 / *std::min_element(values.begin(), values.end());
  K.table_r_ = std::move(r);
  K.table_K_ = std::move(values);
  return K;
}

double CoefficientField::min_radius() const noexcept {
  return kind_ == CoefficientKind::Table ? table_r_.front() : 0.0;
}

double CoefficientField::max_radius() const noexcept {
  return kind_ == CoefficientKind::Table ? table_r_.back() : std::numeric_limits<double>::infinity();
}

double CoefficientField::eval(double r) const {
  switch (kind_) {
    case CoefficientKind::Constant:
      return value_;
    case CoefficientKind::SelfDualBump: {
      if (std::isinf(r)) return 1.0;
      const double r2 = r * r;
      return 1.0 + amplitude_ * r2 / (1.0 + r2 * r2);
    }
    case CoefficientKind::Table: {
      if (r == 0) return c0_origin_;
      if (r < table_r_.front() || r > table_r_.back()) {
        std::ostringstream os;
        os << "table coefficient evaluated at r=" << r << " outside [" << table_r_.front() << ", "
           << table_r_.back() << "]";
        throw InterpolationError(os.str());
      }
      return gsl_spline_eval(spline_->handle, std::log(r), nullptr);
    }
  }
  return 0;
}

double CoefficientField::eval_tilde(double r) const {
  if (r == 0) return c0_infinity_;
  return eval(1.0 / r);
}

double CoefficientField::radial_derivative(double r) const {
  switch (kind_) {
    case CoefficientKind::Constant:
      return 0.0;
    case CoefficientKind::SelfDualBump: {
      const double r4 = r * r * r * r;
      const double den = 1.0 + r4;
      return amplitude_ * 2.0 * r * (1.0 - r4) / (den * den);
    }
    case CoefficientKind::Table: {
      if (r < table_r_.front() || r > table_r_.back()) {
        throw InterpolationError("table coefficient derivative outside sample range");
      }
      return gsl_spline_eval_deriv(spline_->handle, std::log(r), nullptr) / r;
    }
  }
  return 0;
}

double CoefficientField::eval_extended(double r) const {
  if (kind_ != CoefficientKind::Table) return eval(r);
  if (r < table_r_.front()) return c0_origin_ + c2_origin_ * r * r;
  if (r > table_r_.back()) return c0_infinity_ + c2_infinity_ / (r * r);
  return eval(r);
}

double CoefficientField::radial_derivative_extended(double r) const {
  if (kind_ != CoefficientKind::Table) return radial_derivative(r);
  if (r < table_r_.front()) return 2.0 * c2_origin_ * r;
  if (r > table_r_.back()) return -2.0 * c2_infinity_ / (r * r * r);
  return radial_derivative(r);
}

PoleLaplacians laplacians_at_poles(const CoefficientField& K, int N) {
  PoleLaplacians out;
  out.at_origin = 2.0 * N * K.c2_origin();
  out.at_infinity = 2.0 * N * K.c2_infinity();
  auto sgn = [](double x) { return (x > 0) - (x < 0); };
  out.sign_origin = sgn(out.at_origin);
  out.sign_infinity = sgn(out.at_infinity);
  if (out.sign_origin == 0 || out.sign_infinity == 0) {
    std::ostringstream os;
    os << "Laplacian of K vanishes at a pole: DeltaK(0)=" << out.at_origin
       << ", DeltaK~(0)=" << out.at_infinity;
    throw DegenerateCoefficient(os.str());
  }
  return out;
}

double gradient_bound(const CoefficientField& K, double radius, int samples) {
  double lo = K.kind() == CoefficientKind::Table ? K.min_radius() : radius * 1e-6;
  double hi = std::min(radius, K.max_radius());
  double best = 0;
  for (int i = 0; i < samples; ++i) {
    const double r = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
    best = std::max(best, std::abs(K.radial_derivative(r)));
  }
  return best;
}

double diagnostic_minimum(const CoefficientField& K, double r_min, double r_max, int samples) {
  r_min = std::max(r_min, K.min_radius());
  r_max = std::min(r_max, K.max_radius());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (samples - 1));
    best = std::min(best, K.eval(r));
  }
  return best;
}

}  // namespace ckn
