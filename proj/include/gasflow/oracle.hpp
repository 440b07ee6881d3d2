#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gasflow/operator.hpp"

namespace gasflow {

struct OracleOptions {
  int n_starts = 200;
  std::uint64_t seed = 0;
  double newton_tol = 1e-10;
  int max_newton_iters = 80;
  double damping = 0.5;       // backtracking shrink on the residual norm
  double dedupe_tol = 1e-6;
  double flow_scale = -1.0;   // < 0: use |q|_1
  double pi_scale = -1.0;     // < 0: use max(10 * slack_pi, 1)
};

// Damped Newton on the full residual F(z) = 0 with psi re-symmetrized to
// |psi| after every step. Returns a state with ||F||_inf <= newton_tol,
// psi = |phi| and pi >= -tol, or nothing if the start does not converge to a
// physical solution.
std::optional<GasState> newton_solve(const OperatorContext& ctx,
                                     const GasState& start,
                                     const OracleOptions& opts = {});

// Deterministic multistart wrapper: random starts with per-start seeds
// derived from the master seed, deduplicated in (phi, psi) and sorted.
std::vector<GasState> multistart(const OperatorContext& ctx,
                                 const OracleOptions& opts = {});

}  // namespace gasflow
