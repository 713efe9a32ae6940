#include "ckn/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <set>
#include <sstream>

#include "ckn/acceptance.hpp"
#include "ckn/instanton.hpp"

namespace ckn {

namespace {

double number(const Json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ConfigError(std::string(where) + ": missing \"" + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string(where) + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

void only_keys(const Json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
  }
}

std::vector<double> number_list(const Json& opts, const char* key, std::vector<double> fallback) {
  if (!opts.contains(key)) return fallback;
  const auto& v = opts.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array() || v.empty()) throw ConfigError(std::string("options.") + key + " must be a number or a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(std::string("options.") + key + " must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

double option(const Json& opts, const char* key, double fallback) {
  if (!opts.contains(key)) return fallback;
  if (!opts.at(key).is_number()) throw ConfigError(std::string("options.") + key + " must be a number");
  return opts.at(key).get<double>();
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

void write_csv(const CommandOptions& opts, const std::string& name,
               const std::function<void(std::ostream&)>& body) {
  if (opts.csv_dir.empty()) return;
  std::filesystem::create_directories(opts.csv_dir);
  std::ofstream os(std::filesystem::path(opts.csv_dir) / name);
  if (!os) throw Error("cannot write " + name + " in " + opts.csv_dir);
  body(os);
}

double sup_abs(std::span<const double> x) {
  double m = 0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

int sgn(double x) { return (x > 0) - (x < 0); }

}  // namespace

// --- config -------------------------------------------------------------

ProblemParams parse_problem(const Json& j) {
  for (const char* derived : {"a", "b", "p"}) {
    if (j.is_object() && j.contains(derived)) {
      throw ConfigError(std::string("problem: derived field \"") + derived + "\" is not accepted");
    }
  }
  only_keys(j, {"N", "alpha", "beta", "lambda"}, "problem");
  if (!j.contains("N") || !j.at("N").is_number_integer()) throw ConfigError("problem: \"N\" must be an integer");
  const int N = j.at("N").get<int>();
  try {
    return ProblemParams::derive(N, number(j, "alpha", "problem"), number(j, "beta", "problem"),
                                 number(j, "lambda", "problem"));
  } catch (const ConstraintViolation& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

CoefficientField parse_coefficient(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("coefficient: needs a string \"kind\"");
  }
  const auto kind = j.at("kind").get<std::string>();
  try {
    if (kind == "self_dual_bump") {
      only_keys(j, {"kind", "A"}, "coefficient");
      return CoefficientField::self_dual_bump(number(j, "A", "coefficient"));
    }
    if (kind == "constant") {
      only_keys(j, {"kind", "c"}, "coefficient");
      return CoefficientField::constant(number(j, "c", "coefficient"));
    }
    if (kind == "table") {
      only_keys(j, {"kind", "r", "K"}, "coefficient");
      if (!j.contains("r") || !j.contains("K") || !j.at("r").is_array() || !j.at("K").is_array()) {
        throw ConfigError("coefficient: table needs arrays \"r\" and \"K\"");
      }
      return CoefficientField::table(j.at("r").get<std::vector<double>>(), j.at("K").get<std::vector<double>>());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("coefficient: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("coefficient: ") + e.what());
  }
  throw ConfigError("coefficient: unknown kind \"" + kind + "\"");
}

RunConfig RunConfig::from_json(const Json& j) {
  for (const char* derived : {"a", "b", "p"}) {
    if (j.is_object() && j.contains(derived)) {
      throw ConfigError(std::string("derived field \"") + derived + "\" is not accepted");
    }
  }
  only_keys(j, {"problem", "coefficient", "grid", "options"}, "config");
  RunConfig cfg;
  if (!j.contains("problem")) throw ConfigError("config: missing \"problem\"");
  cfg.problem = parse_problem(j.at("problem"));
  if (j.contains("coefficient")) cfg.coefficient = parse_coefficient(j.at("coefficient"));
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    only_keys(g, {"S", "n"}, "grid");
    if (g.contains("S")) cfg.grid.S = number(g, "S", "grid");
    if (g.contains("n")) {
      if (!g.at("n").is_number_integer() || g.at("n").get<long long>() < 1) {
        throw ConfigError("grid: \"n\" must be a positive integer");
      }
      cfg.grid.n = g.at("n").get<std::size_t>();
    }
  }
  if (j.contains("options")) {
    if (!j.at("options").is_object()) throw ConfigError("options must be an object");
    cfg.options = j.at("options");
  }
  cfg.make_grid();  // validates S and n
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  Json j;
  try {
    j = Json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j);
}

std::shared_ptr<const EFGrid> RunConfig::make_grid() const {
  const double S = grid.S.value_or(EFGrid::kDefaultWidthFactor / problem.kappa());
  try {
    return EFGrid::make(problem, S, grid.n);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

// --- serialization ------------------------------------------------------

Json to_json(const ProblemParams& q) {
  return Json{{"N", q.N()},
              {"alpha", q.alpha()},
              {"beta", q.beta()},
              {"lambda", q.lambda()},
              {"a", q.a()},
              {"b", q.b()},
              {"p", q.p()},
              {"kappa", q.kappa()},
              {"kappa_alpha", q.kappa_alpha()},
              {"p_from_alpha_beta", q.p_from_alpha_beta()},
              {"p_from_a_b", q.p_from_a_b()},
              {"sobolev_exponent", q.sobolev_exponent()}};
}

Json to_json(const AdmissibilityReport& r) {
  Json v = Json::array();
  for (const auto& x : r.violations) {
    v.push_back({{"constraint", x.constraint}, {"value", x.value}, {"bound", x.bound}, {"borderline", x.borderline}});
  }
  return Json{{"level", to_string(r.level)}, {"passed", r.passed}, {"violations", v}};
}

Json to_json(const CoefficientField& K) {
  Json j{{"kind", to_string(K.kind())}};
  switch (K.kind()) {
    case CoefficientKind::Constant: j["c"] = K.constant_value(); break;
    case CoefficientKind::SelfDualBump: j["A"] = K.amplitude(); break;
    case CoefficientKind::Table:
      j["r"] = K.table_r();
      j["K"] = K.table_K();
      j["tilde_regularity_assumed"] = true;
      break;
  }
  j["K_origin"] = K.limit_at_origin();
  j["K_infinity"] = K.limit_at_infinity();
  j["c2_origin"] = K.c2_origin();
  j["c2_infinity"] = K.c2_infinity();
  j["A1_bound"] = K.a1_bound();
  return j;
}

Json to_json(const PohozaevReport& r) {
  return Json{{"sigma", r.sigma},
              {"lhs_volume", r.lhs_volume},
              {"lhs_surface", r.lhs_surface},
              {"rhs_boundary", r.rhs_boundary},
              {"residual", r.residual},
              {"relative_residual", r.relative_residual},
              {"equation_correction", r.equation_correction},
              {"relative_corrected", r.relative_corrected}};
}

Json to_json(const GammaCurve& c, bool with_samples) {
  Json pts = Json::array();
  for (const auto& p : c.critical_points) {
    pts.push_back({{"tau", p.tau}, {"gamma", p.gamma}, {"gamma_second", p.gamma_second},
                   {"nondegenerate", p.nondegenerate}});
  }
  Json j{{"samples", c.tau.size()},
         {"tau_min", c.tau.empty() ? 0.0 : c.tau.front()},
         {"tau_max", c.tau.empty() ? 0.0 : c.tau.back()},
         {"scale", c.scale},
         {"max_abs_prime", c.max_abs_prime},
         {"flat", c.flat},
         {"sign_prime_min", c.sign_prime_min},
         {"sign_prime_max", c.sign_prime_max},
         {"gamma_at_zero", c.gamma_at_zero},
         {"critical_points", pts}};
  if (with_samples) {
    j["tau"] = c.tau;
    j["gamma"] = c.gamma;
    j["gamma_prime"] = c.gamma_prime;
  }
  return j;
}

Json to_json(const DegreeReport& r) {
  return Json{{"formula", r.formula},
              {"endpoint_count", r.endpoint_count},
              {"critical_sum", r.critical_sum},
              {"endpoints_resolved", r.endpoints_resolved},
              {"consistent", r.consistent}};
}

Json to_json(const PhiCurve& c, bool with_samples) {
  Json pts = Json::array();
  for (const auto& p : c.critical_points) {
    pts.push_back({{"mu", p.mu},
                   {"phi", p.phi},
                   {"phi_second", p.phi_second},
                   {"mu_bar", finite_or_null(p.mu_bar)},
                   {"gamma_second", p.gamma_second},
                   {"rate", finite_or_null(p.rate)},
                   {"eta", p.eta}});
  }
  Json j{{"t", c.t}, {"samples", c.mu.size()}, {"flat", c.flat}, {"critical_points", pts}};
  if (with_samples) {
    j["mu"] = c.mu;
    j["phi"] = c.phi;
    j["phi_prime"] = c.phi_prime;
  }
  return j;
}

Json to_json(const DiagnosticsRecord& d) {
  return Json{{"norm_E", d.norm_E},
              {"sup_ratio", d.sup_ratio},
              {"inf_ratio", d.inf_ratio},
              {"sandwich_C", finite_or_null(d.sandwich_C)},
              {"wbar_peak_s", d.wbar_peak_s},
              {"wbar_monotone_after_peak", d.wbar_monotone_after_peak},
              {"envelope_C", d.envelope_C},
              {"max_u", d.max_u},
              {"pohozaev_global", d.pohozaev_global},
              {"pohozaev_scale", d.pohozaev_scale},
              {"symmetry_defect", d.symmetry_defect}};
}

Json to_json(const ContinuationRun& run) {
  Json states = Json::array();
  for (const auto& s : run.states) {
    states.push_back({{"t", s.t},
                      {"newton_iters", s.newton_iters},
                      {"pde_residual", s.pde_residual},
                      {"diagnostics", to_json(s.diagnostics)}});
  }
  Json j{{"coefficient", to_json(run.K)},
         {"status", to_string(run.status)},
         {"message", run.message},
         {"seed_mu", run.seed_mu},
         {"seed_eta", run.seed_eta},
         {"rejected_steps", run.rejected_steps},
         {"t_schedule", run.t_schedule},
         {"states", states},
         {"violations", run.violations}};
  if (run.archived_wbar) {
    j["archived_wbar"] = std::vector<double>(run.archived_wbar->psi().begin(), run.archived_wbar->psi().end());
  }
  return j;
}

Json to_json(const InstantonFit& f) {
  return Json{{"K0", f.K0},       {"mu", f.mu},           {"amplitude", f.amplitude},
              {"shift", f.shift}, {"residual", f.residual}, {"iterations", f.iterations}};
}

// --- checks -------------------------------------------------------------

void Checks::at_most(const std::string& name, double value, double bound) {
  items_.push_back({name, value, bound, std::isfinite(value) && value <= bound});
}

void Checks::at_least(const std::string& name, double value, double bound) {
  items_.push_back({name, value, bound, std::isfinite(value) && value >= bound});
}

void Checks::require(const std::string& name, bool ok) { items_.push_back({name, ok ? 1.0 : 0.0, 1.0, ok}); }

bool Checks::passed() const {
  return std::all_of(items_.begin(), items_.end(), [](const auto& c) { return c.passed; });
}

Json Checks::to_json() const {
  Json a = Json::array();
  for (const auto& c : items_) {
    a.push_back({{"name", c.name}, {"value", finite_or_null(c.value)}, {"bound", c.bound}, {"passed", c.passed}});
  }
  return a;
}

Json Checks::violations() const {
  Json a = Json::array();
  for (const auto& c : items_) {
    if (!c.passed) a.push_back({{"name", c.name}, {"value", finite_or_null(c.value)}, {"bound", c.bound}});
  }
  return a;
}

// --- commands -----------------------------------------------------------

namespace {

struct Context {
  const RunConfig& cfg;
  const CommandOptions& opts;
  std::shared_ptr<const EFGrid> grid;
  Json body = Json::object();
  Checks checks;
  double tol(double base) const { return base * opts.tol_scale; }
};

void cmd_params(Context& c) {
  const auto& q = c.cfg.problem;
  c.body["problem"] = to_json(q);
  Json adm = Json::object();
  for (auto level : {AdmissibilityLevel::CknBasic, AdmissibilityLevel::Compactness, AdmissibilityLevel::Existence}) {
    adm[to_string(level)] = to_json(check_admissible(q, level));
  }
  c.body["admissibility"] = adm;
  const double lhs = q.N() - q.b() * q.p(), rhs = 0.5 * q.p() * q.kappa();
  c.checks.at_most("N-bp = p kappa/2 (relative)", std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)), c.tol(1e-13));
  c.checks.at_most("p(alpha,beta) = p(a,b) (relative)",
                   std::abs(q.p_from_alpha_beta() - q.p_from_a_b()) / q.p(), c.tol(1e-13));
  c.checks.require("basic admissibility", check_admissible(q, AdmissibilityLevel::CknBasic).passed);
  const auto& K = c.cfg.coefficient;
  Json coeff = to_json(K);
  try {
    const auto poles = laplacians_at_poles(K, q.N());
    coeff["laplacian_origin"] = poles.at_origin;
    coeff["laplacian_infinity"] = poles.at_infinity;
    coeff["degree"] = degree(K, q.N());
  } catch (const DegenerateCoefficient& e) {
    coeff["degree"] = nullptr;
    coeff["degenerate"] = e.what();
  }
  coeff["gradient_bound_B2"] = gradient_bound(K);
  coeff["diagnostic_minimum"] = diagnostic_minimum(K, 1e-6, 1e6);
  c.body["coefficient"] = coeff;
}

void cmd_instanton(Context& c) {
  const auto& q = c.cfg.problem;
  const double K0 = option(c.cfg.options, "K0", 1.0);
  const auto mus = number_list(c.cfg.options, "mu", {1.0});
  const auto sh = instanton_shape(q);
  c.body["shape"] = {{"c", sh.c}, {"theta", sh.theta}, {"E", sh.E}, {"peak_s", instanton_peak(q)},
                     {"kelvin_centre", kelvin_centre(q)}, {"z1_at_1", z1_eval(q, 1.0)}};
  c.body["K0"] = K0;
  const auto K = CoefficientField::constant(K0);
  Json profiles = Json::array();
  for (std::size_t k = 0; k < mus.size(); ++k) {
    const double mu = mus[k];
    if (!(mu > 0)) throw ConfigError("options.mu must be positive");
    const auto z = make_instanton(c.grid, K0, mu);
    const double res = sup_abs(pde_residual(z, K, 1.0).psi());
    const double nd = norm_Da(z);
    const double vp = K0 * integrate_volume_p(z);
    const auto fit = fit_instanton(kelvin(z));
    const double mu_k = kelvin_centre(q);
    // kelvin(z_{K0,mu}) = z_{K0, mu'} with ln mu' = 2 ln mu_K - ln mu + 4 ln K0/((p-2) kappa)
    const double predicted = mu_k * mu_k / mu * std::pow(K0, 4.0 / ((q.p() - 2.0) * q.kappa()));
    profiles.push_back({{"mu", mu},
                        {"residual_sup", res},
                        {"norm_Da", nd},
                        {"f0", f0(z)},
                        {"energy_identity_relative", std::abs(nd * nd - vp) / vp},
                        {"kelvin_fit", to_json(fit)},
                        {"kelvin_mu_predicted", predicted}});
    std::ostringstream tag;
    tag << "mu=" << mu;
    c.checks.at_most("residual sup " + tag.str(), res, c.tol(1e-8));
    c.checks.at_most("||z||^2 = K0 int z^p " + tag.str(), std::abs(nd * nd - vp) / vp, c.tol(1e-10));
    c.checks.at_most("kelvin refit " + tag.str(), fit.residual, c.tol(1e-6));
    write_csv(c.opts, "instanton_" + std::to_string(k) + ".csv", [&](std::ostream& os) { write_profile_csv(os, z); });
  }
  c.body["profiles"] = profiles;
}

void cmd_pohozaev(Context& c) {
  const auto& q = c.cfg.problem;
  const auto mus = number_list(c.cfg.options, "mu", {0.5, 1.0});
  const auto sigmas = number_list(c.cfg.options, "sigma", {0.5, 1.0, 2.0});
  const double t = option(c.cfg.options, "t", 1.0);
  const auto one = CoefficientField::constant(1.0);
  Json local = Json::array();
  for (double mu : mus) {
    const auto z = make_instanton(c.grid, 1.0, mu);
    for (double sigma : sigmas) {
      const auto r = local_identity(z, one, sigma, t);
      local.push_back({{"mu", mu}, {"report", to_json(r)}});
      std::ostringstream tag;
      tag << "local identity mu=" << mu << " sigma=" << sigma;
      c.checks.at_most(tag.str(), r.relative_residual, c.tol(1e-6));
    }
  }
  c.body["local_identity_constant_K"] = local;

  // Not a solution for non-constant K: the defect matches the equation correction.
  Json field = Json::array();
  const auto z1 = make_instanton(c.grid, 1.0, 1.0);
  for (double sigma : sigmas) {
    const auto r = local_identity(z1, c.cfg.coefficient, sigma, t);
    field.push_back(to_json(r));
    std::ostringstream tag;
    tag << "corrected identity, configured K, sigma=" << sigma;
    c.checks.at_most(tag.str(), std::abs(r.relative_corrected), c.tol(1e-6));
  }
  c.body["local_identity_configured_K"] = field;

  const auto G = green(c.grid);
  Json green_b = Json::array();
  for (double sigma : {1e-3, 0.5, 1.0, 2.0}) {
    const double B = boundary_term_B(G, sigma);
    green_b.push_back({{"sigma", sigma}, {"B", B}});
    std::ostringstream tag;
    tag << "Green boundary term sigma=" << sigma;
    c.checks.at_most(tag.str(), std::abs(B), c.tol(1e-10));
  }
  c.body["green_boundary_term"] = green_b;
  std::vector<double> psi(c.grid->size());
  const double k2 = c.grid->decay_rate();
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = 2.0 * std::cosh(k2 * c.grid->node(i));
  const RadialFunction G1(c.grid, std::move(psi), TailDecay{-k2, -k2}, k2);
  const double B1 = boundary_term_B(G1, 1e-3);
  const double expected = -0.5 * q.kappa() * q.kappa() * q.sphere_area();
  c.body["green_plus_one"] = {{"sigma", 1e-3}, {"B", B1}, {"expected", expected}};
  c.checks.at_most("Green+1 boundary term (relative)", std::abs(B1 - expected) / std::abs(expected), c.tol(1e-3));

  const double K0 = c.cfg.coefficient.limit_at_origin();
  const auto A = bubble_constant(c.grid, K0);
  c.body["bubble_constant"] = {{"K0", K0}, {"A", A.value}, {"tail_contribution", A.tail_contribution},
                               {"omega", omega_sphere(q)}};
}

void cmd_melnikov(Context& c) {
  const auto& q = c.cfg.problem;
  const auto& K = c.cfg.coefficient;
  MelnikovOptions mo;
  mo.tau_min = option(c.cfg.options, "tau_min", mo.tau_min);
  mo.tau_max = option(c.cfg.options, "tau_max", mo.tau_max);
  mo.samples = static_cast<int>(option(c.cfg.options, "samples", mo.samples));
  Melnikov m(c.grid, K);
  GammaCurve curve;
  try {
    curve = critical_points(m, mo);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("melnikov: ") + e.what());
  }
  c.body["curve"] = to_json(curve);
  write_csv(c.opts, "gamma.csv", [&](std::ostream& os) { write_gamma_csv(os, curve); });
  const double defect = kelvin_symmetry_defect(m, curve.tau);
  c.body["kelvin_symmetry_defect"] = defect;
  c.checks.at_most("Gamma_K(tau) = Gamma_K~(1/tau)", defect, c.tol(1e-8));
  if (K.kind() == CoefficientKind::Constant) {
    c.checks.at_most("constant K flatness", curve.max_abs_prime / curve.scale, c.tol(1e-10));
    c.body["degree"] = nullptr;
    return;
  }
  try {
    const auto d = degree_check(m, curve);
    c.body["degree"] = d.formula;
    c.body["degree_check"] = to_json(d);
    c.checks.require("degree formula = endpoint count = critical sum", d.consistent);
  } catch (const DegenerateCoefficient& e) {
    c.body["degree"] = nullptr;
    c.body["degenerate"] = e.what();
  }
  const auto guard = gamma_second_at_zero_guard(q);
  c.body["gamma_second_zero_guard"] = {{"exponent", guard.exponent}, {"required", guard.required},
                                       {"integrable", guard.integrable}};
  if (guard.integrable) {
    try {
      const double formula = gamma_second_at_zero(m);
      const auto ex = gamma_second_extrapolated(m);
      c.body["gamma_second_at_zero"] = {{"formula", formula}, {"extrapolated", ex.value},
                                       {"raw_differences", ex.raw}, {"steps", ex.steps}};
      c.checks.at_most("Gamma''(0) formula vs differences (relative)",
                       std::abs(formula - ex.value) / std::abs(formula), c.tol(1e-3));
    } catch (const DegenerateCoefficient&) {
    }
  }
}

void cmd_reduce(Context& c) {
  const auto& K = c.cfg.coefficient;
  const auto ts = number_list(c.cfg.options, "t", {1e-2, 1e-3, 1e-4});
  const double t_max = option(c.cfg.options, "t_max", 0.05);
  PhiSearchOptions so;
  so.mu_min = option(c.cfg.options, "mu_min", so.mu_min);
  so.mu_max = option(c.cfg.options, "mu_max", so.mu_max);
  so.samples = static_cast<int>(option(c.cfg.options, "samples", so.samples));
  for (double t : ts) {
    if (!(t > 0) || t > t_max) {
      std::ostringstream os;
      os << "reduce: t=" << t << " outside (0, t_max=" << t_max << "]";
      throw ConfigError(os.str());
    }
  }
  Reduction red(c.grid, K);
  Json curves = Json::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double t = ts[k];
    const auto curve = phi_critical_points(red, t, so);
    const auto sol = red.solve(1.0, t);
    Json j = to_json(curve);
    j["w_norm_at_1"] = norm_Da(sol.w);
    j["w_norm_over_t"] = norm_Da(sol.w) / t;
    j["stationarity_at_1"] = sol.stationarity;
    j["orthogonality_at_1"] = sol.orthogonality;
    curves.push_back(j);
    std::ostringstream tag;
    tag << "t=" << t;
    c.checks.require("critical point of Phi found, " + tag.str(), !curve.critical_points.empty());
    for (const auto& p : curve.critical_points) {
      if (p.gamma_second != 0) {
        c.checks.require("sgn Phi'' = -sgn Gamma'', " + tag.str(), sgn(p.phi_second) == -sgn(p.gamma_second));
      }
    }
    write_csv(c.opts, "phi_" + std::to_string(k) + ".csv", [&](std::ostream& os) { write_phi_csv(os, curve); });
  }
  c.body["curves"] = curves;
}

void cmd_continue(Context& c) {
  const auto& K = c.cfg.coefficient;
  const auto& o = c.cfg.options;
  ContinuationOptions co;
  co.t_start = option(o, "t_start", co.t_start);
  co.t_end = option(o, "t_end", co.t_end);
  co.dt_initial = option(o, "dt_initial", co.dt_initial);
  co.dt_max = option(o, "dt_max", co.dt_max);
  co.dt_min = option(o, "dt_min", co.dt_min);
  co.seed_mu = option(o, "seed_mu", co.seed_mu);
  co.newton.tolerance = c.tol(co.newton.tolerance);
  co.residual_bound = c.tol(co.residual_bound);
  co.pohozaev_bound = c.tol(co.pohozaev_bound);
  if (o.contains("boundary")) {
    const auto b = o.at("boundary").is_string() ? o.at("boundary").get<std::string>() : "";
    if (b == "robin") co.newton.boundary = BoundaryCondition::Robin;
    else if (b == "dirichlet") co.newton.boundary = BoundaryCondition::Dirichlet;
    else throw ConfigError("options.boundary must be \"robin\" or \"dirichlet\"");
  }
  ContinuationRun run{K};
  try {
    run = continuation(c.grid, K, co);
  } catch (const DegenerateCoefficient& e) {
    throw ConfigError(std::string("continue: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("continue: ") + e.what());
  }
  c.body["boundary"] = to_string(co.newton.boundary);
  c.body["run"] = to_json(run);
  c.checks.require("status COMPLETED", run.status == RunStatus::Completed);
  c.checks.at_most("invariant failures on accepted states", static_cast<double>(run.violations.size()), 0.0);
  if (!run.states.empty()) {
    const auto& last = run.states.back();
    const auto v = to_v_formulation(last.solution);
    const double vres = sup_abs(v_formulation_residual(v, K, last.t));
    const auto sw = v_sandwich(v);
    c.body["final"] = {{"t", last.t}, {"v_residual", vres}, {"v_sandwich", {{"sup", sw.sup}, {"inf", sw.inf}, {"C", finite_or_null(sw.C)}}}};
    c.checks.at_most("v-formulation residual", vres, c.tol(1e-7));
    c.checks.require("v sandwich finite", std::isfinite(sw.C));
    if (K.kind() == CoefficientKind::SelfDualBump && last.t == 1.0) {
      c.checks.at_most("Kelvin symmetry of the t=1 solution", last.diagnostics.symmetry_defect, c.tol(1e-6));
    }
  }
  for (std::size_t k = 0; k < run.states.size(); ++k) {
    write_csv(c.opts, "profile_" + std::to_string(k) + ".csv",
              [&](std::ostream& os) { write_profile_csv(os, run.states[k].solution); });
  }
}

void cmd_verify(Context& c) {
  AcceptanceOptions ao;
  ao.problem = c.cfg.problem;
  ao.n = c.cfg.grid.n;
  ao.S = c.cfg.grid.S;
  ao.tol_scale = c.opts.tol_scale;
  const auto results = run_acceptance(ao);
  Json criteria = Json::array();
  for (const auto& r : results) {
    criteria.push_back(r.to_json());
    std::ostringstream tag;
    tag << "criterion " << r.id << " " << r.title;
    c.checks.require(tag.str(), r.passed());
  }
  c.body["criteria"] = criteria;
}

using CommandFn = void (*)(Context&);

const std::vector<std::pair<std::string, CommandFn>>& commands() {
  static const std::vector<std::pair<std::string, CommandFn>> table{
      {"params", cmd_params},   {"instanton", cmd_instanton}, {"pohozaev", cmd_pohozaev},
      {"melnikov", cmd_melnikov}, {"reduce", cmd_reduce},       {"continue", cmd_continue},
      {"verify", cmd_verify}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : commands()) n.push_back(name);
    return n;
  }();
  return names;
}

CommandResult run_command(const std::string& command, const RunConfig& config,
                          const CommandOptions& opts) {
  const auto it = std::find_if(commands().begin(), commands().end(),
                               [&](const auto& e) { return e.first == command; });
  if (it == commands().end()) throw ConfigError("unknown command \"" + command + "\"");
  if (!(opts.tol_scale > 0)) throw ConfigError("tol-scale must be positive");
  Context ctx{config, opts, config.make_grid(), Json::object(), {}};
  it->second(ctx);

  Json report;
  report["schema"] = kReportSchema;
  report["command"] = command;
  report["problem"] = to_json(config.problem);
  report["grid"] = {{"S", ctx.grid->half_width()}, {"n", ctx.grid->size()}, {"h", ctx.grid->spacing()}};
  report["tol_scale"] = opts.tol_scale;
  for (auto& [key, value] : ctx.body.items()) {
    if (key != "problem") report[key] = value;
  }
  report["checks"] = ctx.checks.to_json();
  report["violations"] = ctx.checks.violations();
  report["passed"] = ctx.checks.passed();
  return {report, ctx.checks.passed() ? 0 : 1};
}

}  // namespace ckn
