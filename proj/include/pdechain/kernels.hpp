#pragma once

#include <vector>

#include "pdechain/artifacts.hpp"

namespace pdechain::pde {

// Direct tridiagonal solve (Thomas algorithm). `lower[0]` and
// `upper[n-1]` are ignored; diagonal must be nonsingular after elimination.
std::vector<double> thomas_solve(std::vector<double> lower, std::vector<double> diag,
                                 std::vector<double> upper, std::vector<double> rhs);

// One time-symmetric leapfrog step for the wave equation with fixed-value
// boundaries: returns 2*cur - prev + lambda2 * D2 cur on the interior.
// Exposed two-level form so reversal (swap the pair, step again) retraces
// the forward trajectory exactly.
std::vector<double> leapfrog_step(const std::vector<double>& prev, const std::vector<double>& cur,
                                  double lambda2, double left, double right);

// Category dispatch; see the registry documentation for scheme selection.
Solution solve_kernel(const Problem& problem, const SolverSettings& settings);

}  // namespace pdechain::pde
