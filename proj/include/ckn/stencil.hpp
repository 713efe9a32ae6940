#pragma once

#include <span>
#include <vector>

namespace ckn {

/// Finite-difference weights for the `derivative`-th derivative at x0 from
/// samples at `nodes` (Fornberg's recursion).
std::vector<double> fd_weights(double x0, std::span<const double> nodes, int derivative);

}  // namespace ckn
