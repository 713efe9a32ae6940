#pragma once

// Run configuration, JSON serialization of every result type, and the batch
// commands behind ckn-lab. Reports carry "schema": "ckn-lab/1".
//
// Config file:
//   {"problem":     {"N": 3, "alpha": 0, "beta": 0.15, "lambda": 0},
//    "coefficient": {"kind": "self_dual_bump", "A": 0.5},
//    "grid":        {"S": 20, "n": 2048},
//    "options":     {...command specific...}}
// Derived exponents (a, b, p) are rejected.

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ckn/coeff.hpp"
#include "ckn/efgrid.hpp"
#include "ckn/errors.hpp"
#include "ckn/melnikov.hpp"
#include "ckn/params.hpp"
#include "ckn/pohozaev.hpp"
#include "ckn/reduction.hpp"
#include "ckn/solver.hpp"

namespace ckn {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "ckn-lab/1";

/// Malformed or inadmissible configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct GridConfig {
  std::optional<double> S;  // default 20/kappa
  std::size_t n = EFGrid::kDefaultNodes;
};

struct RunConfig {
  ProblemParams problem = ProblemParams::derive(3, 0.0, 0.15, 0.0);
  CoefficientField coefficient = CoefficientField::self_dual_bump(0.5);
  GridConfig grid;
  Json options = Json::object();

  /// Throws ConfigError.
  static RunConfig from_json(const Json& j);
  static RunConfig from_file(const std::string& path);
  std::shared_ptr<const EFGrid> make_grid() const;
};

/// Throws ConfigError on unknown or derived keys and on inadmissible tuples.
ProblemParams parse_problem(const Json& j);
CoefficientField parse_coefficient(const Json& j);

Json to_json(const ProblemParams& q);
Json to_json(const AdmissibilityReport& r);
Json to_json(const CoefficientField& K);
Json to_json(const PohozaevReport& r);
Json to_json(const GammaCurve& c, bool with_samples = false);
Json to_json(const DegreeReport& r);
Json to_json(const PhiCurve& c, bool with_samples = false);
Json to_json(const DiagnosticsRecord& d);
Json to_json(const ContinuationRun& run);
Json to_json(const InstantonFit& f);

/// Named tolerance check collected into a report.
struct CheckResult {
  std::string name;
  double value = 0;
  double bound = 0;
  bool passed = false;
};

class Checks {
 public:
  /// value <= bound (non-finite values fail).
  void at_most(const std::string& name, double value, double bound);
  void at_least(const std::string& name, double value, double bound);
  void require(const std::string& name, bool ok);
  bool passed() const;
  const std::vector<CheckResult>& items() const noexcept { return items_; }
  Json to_json() const;
  /// Failed checks only.
  Json violations() const;

 private:
  std::vector<CheckResult> items_;
};

struct CommandOptions {
  std::string csv_dir;  // empty: no CSV output
  double tol_scale = 1.0;
};

struct CommandResult {
  Json report;
  int exit_code = 0;  // 0 all checks pass, 1 violations
};

/// One of params, instanton, pohozaev, melnikov, reduce, continue, verify.
/// Throws ConfigError for unknown commands or options.
CommandResult run_command(const std::string& command, const RunConfig& config,
                          const CommandOptions& opts = {});

const std::vector<std::string>& command_names();

}  // namespace ckn
