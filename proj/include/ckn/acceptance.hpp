#pragma once

// The acceptance suite: eleven criteria on the reference tuple
// (N, alpha, beta, lambda) = (3, 0, 0.15, 0), each a list of pinned checks.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ckn/params.hpp"
#include "ckn/report.hpp"

namespace ckn {

struct AcceptanceOptions {
  ProblemParams problem = ProblemParams::derive(3, 0.0, 0.15, 0.0);
  std::size_t n = EFGrid::kDefaultNodes;
  std::optional<double> S;
  /// Multiplies every tolerance.
  double tol_scale = 1.0;
  std::uint64_t seed = 20240521;  // criterion 2
};

struct CriterionResult {
  int id = 0;
  std::string title;
  Checks checks;
  double seconds = 0;
  /// Set when the criterion threw.
  std::string error;
  bool passed() const { return error.empty() && checks.passed(); }
  Json to_json() const;
};

using CriterionFn = CriterionResult (*)(const AcceptanceOptions&);

struct Criterion {
  int id;
  const char* title;
  CriterionFn run;
};

const std::vector<Criterion>& acceptance_criteria();

/// Runs every criterion in order; `on_result` sees each as it finishes.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& opts,
    const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3 Kelvin suite (0.4 s)  worst: ..." style line.
std::string summary_line(const CriterionResult& r);

}  // namespace ckn
