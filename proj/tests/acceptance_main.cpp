// One line per criterion; nonzero exit if any fails.
// Optional args: n S tol_scale

#include <cstdlib>
#include <iostream>
#include <string>

#include "ckn/acceptance.hpp"

int main(int argc, char** argv) {
  ckn::AcceptanceOptions opts;
  if (argc > 1) opts.n = std::stoul(argv[1]);
  if (argc > 2) opts.S = std::stod(argv[2]);
  if (argc > 3) opts.tol_scale = std::stod(argv[3]);

  int failed = 0;
  const auto results = ckn::run_acceptance(opts, [&](const ckn::CriterionResult& r) {
    std::cout << ckn::summary_line(r) << std::endl;
    if (!r.passed()) {
      for (const auto& c : r.checks.items()) {
        if (!c.passed) std::cout << "      " << c.name << " = " << c.value << " (bound " << c.bound << ")\n";
      }
      ++failed;
    }
  });
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
